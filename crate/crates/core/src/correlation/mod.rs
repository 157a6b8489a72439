//! Second-order correlation histograms and the antibunching-dip analysis.

mod fit;

pub use fit::{background_correct, fit_g2, CorrectedG2, G2Fit};

use crate::photon::{virtual_hbt_split, DetectorId, PhotonEventStream};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum CorrelationError {
    #[error("no events on detector {0:?}")]
    EmptyStream(DetectorId),
    #[error("invalid binning: {0}")]
    BadBinning(String),
    #[error("normalization undefined: {0}")]
    ZeroRate(String),
    #[error("fit failed: {0}")]
    Fit(String),
}

/// Binned, normalized coincidence counts vs delay, symmetric about zero.
///
/// `normalized` divides raw pair counts by rate_start * rate_stop *
/// bin_width * duration (with a finite-duration edge factor), so it tends
/// to 1 at large |tau| for uncorrelated streams.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct G2Histogram {
    pub bin_centers_ps: Vec<f64>,
    pub counts: Vec<u64>,
    pub normalized: Vec<f64>,
    pub bin_width_ps: f64,
    pub tau_max_ps: f64,
    pub n_start_events: usize,
    pub n_stop_events: usize,
    pub duration_ps: f64,
}

impl G2Histogram {
    /// Mean normalized value over the outermost `fraction` of the window on
    /// each side; a diagnostic cross-check of the rate-product normalization.
    pub fn far_wing_mean(&self, fraction: f64) -> f64 {
        let cut = (1.0 - fraction.clamp(0.0, 1.0)) * self.tau_max_ps;
        let mut sum = 0.0;
        let mut n = 0usize;
        for (c, v) in self.bin_centers_ps.iter().zip(&self.normalized) {
            if c.abs() >= cut {
                sum += v;
                n += 1;
            }
        }
        if n == 0 {
            f64::NAN
        } else {
            sum / n as f64
        }
    }

    pub fn total_coincidences(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Histogram of all pairwise delays t_stop - t_start within +-tau_max
/// (full pair counting, not start-stop gated).
pub fn cross_correlate(
    stream: &PhotonEventStream,
    start: DetectorId,
    stop: DetectorId,
    bin_width_ps: f64,
    tau_max_ps: f64,
) -> Result<G2Histogram, CorrelationError> {
    if !(bin_width_ps > 0.0) {
        return Err(CorrelationError::BadBinning(format!(
            "bin width must be > 0, got {bin_width_ps}"
        )));
    }
    if tau_max_ps < 10.0 * bin_width_ps {
        return Err(CorrelationError::BadBinning(format!(
            "tau_max {tau_max_ps} ps must be at least 10 bin widths ({bin_width_ps} ps)"
        )));
    }
    let starts = stream.events_for(start);
    let stops = stream.events_for(stop);
    if starts.is_empty() {
        return Err(CorrelationError::EmptyStream(start));
    }
    if stops.is_empty() {
        return Err(CorrelationError::EmptyStream(stop));
    }
    let duration = stream.duration_ps;
    if !(duration > 0.0) {
        return Err(CorrelationError::ZeroRate("stream duration is zero".into()));
    }

    let k_max = (tau_max_ps / bin_width_ps).round() as i64;
    let n_bins = (2 * k_max + 1) as usize;
    let window = (k_max as f64 + 0.5) * bin_width_ps;

    // partition pairs over start events; per-bin merge is a plain sum, so
    // the result is independent of the partitioning
    let counts = starts
        .par_iter()
        .fold(
            || vec![0u64; n_bins],
            |mut acc, &t0| {
                let lo = stops.partition_point(|&t| t < t0 - window);
                for &t1 in &stops[lo..] {
                    if t1 - t0 > window {
                        break;
                    }
                    let k = ((t1 - t0) / bin_width_ps).round() as i64;
                    if k.abs() <= k_max {
                        acc[(k + k_max) as usize] += 1;
                    }
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; n_bins],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );

    let rate_start = starts.len() as f64 / duration;
    let rate_stop = stops.len() as f64 / duration;
    let denom_base = rate_start * rate_stop * bin_width_ps * duration;
    if !(denom_base > 0.0) {
        return Err(CorrelationError::ZeroRate(format!(
            "rate product vanished ({} x {} events)",
            starts.len(),
            stops.len()
        )));
    }

    let bin_centers_ps: Vec<f64> =
        (-k_max..=k_max).map(|k| k as f64 * bin_width_ps).collect();
    let normalized: Vec<f64> = bin_centers_ps
        .iter()
        .zip(&counts)
        .map(|(c, &n)| {
            let edge = (1.0 - c.abs() / duration).max(f64::EPSILON);
            n as f64 / (denom_base * edge)
        })
        .collect();

    Ok(G2Histogram {
        bin_centers_ps,
        counts,
        normalized,
        bin_width_ps,
        tau_max_ps,
        n_start_events: starts.len(),
        n_stop_events: stops.len(),
        duration_ps: duration,
    })
}

/// HBT auto-correlation of one port: the port's events are split by a
/// virtual 50:50 splitter and the two halves cross-correlated.
pub fn auto_correlate(
    stream: &PhotonEventStream,
    det: DetectorId,
    bin_width_ps: f64,
    tau_max_ps: f64,
    split_seed: u64,
) -> Result<G2Histogram, CorrelationError> {
    let split = virtual_hbt_split(stream, det, split_seed);
    cross_correlate(&split, DetectorId::A, DetectorId::B, bin_width_ps, tau_max_ps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::photon::{
        route_and_detect, simulate_emitter, BackgroundWeights, ChannelSpec, EmitterSpec,
    };

    fn emitter() -> EmitterSpec {
        EmitterSpec {
            pump_rate_per_ns: 0.5,
            decay_rate_per_ns: 0.5,
            beta_forward: 0.475,
            beta_backward: 0.475,
        }
    }

    fn quiet_channel() -> ChannelSpec {
        ChannelSpec {
            background_rate_per_ns: 0.0,
            background_weights: BackgroundWeights::default(),
            split_cross: 0.5,
            detector_efficiency: 1.0,
            jitter_fwhm_ps: 0.0,
            dead_time_ps: 0.0,
        }
    }

    fn background_only_stream(seed: u64) -> PhotonEventStream {
        let mut spec = emitter();
        spec.beta_forward = 0.0;
        spec.beta_backward = 0.0;
        let mut chan = quiet_channel();
        chan.background_rate_per_ns = 0.05;
        let e = simulate_emitter(&spec, 2e8, seed).unwrap();
        route_and_detect(&e, &spec, &chan, 2e8, seed).unwrap()
    }

    #[test]
    fn binning_preconditions() {
        let stream = background_only_stream(1);
        assert!(matches!(
            cross_correlate(&stream, DetectorId::A, DetectorId::B, 0.0, 1000.0),
            Err(CorrelationError::BadBinning(_))
        ));
        assert!(matches!(
            cross_correlate(&stream, DetectorId::A, DetectorId::B, 128.0, 500.0),
            Err(CorrelationError::BadBinning(_))
        ));
    }

    #[test]
    fn empty_detector_is_an_error() {
        let mut spec = emitter();
        spec.beta_forward = 0.0;
        let e = simulate_emitter(&spec, 1e7, 2).unwrap();
        let stream = route_and_detect(&e, &spec, &quiet_channel(), 1e7, 2).unwrap();
        assert!(matches!(
            cross_correlate(&stream, DetectorId::A, DetectorId::B, 128.0, 50_000.0),
            Err(CorrelationError::EmptyStream(DetectorId::A))
        ));
    }

    #[test]
    fn uncorrelated_background_normalizes_to_one() {
        let stream = background_only_stream(3);
        let hist =
            cross_correlate(&stream, DetectorId::A, DetectorId::B, 128.0, 50_000.0).unwrap();
        let mean: f64 = hist.normalized.iter().sum::<f64>() / hist.normalized.len() as f64;
        let total: u64 = hist.total_coincidences();
        let sigma_mean = (total as f64).sqrt()
            / (hist.normalized.len() as f64)
            / (total as f64 / hist.normalized.len() as f64);
        assert!(
            (mean - 1.0).abs() < 3.0 * sigma_mean,
            "mean {mean} +- {sigma_mean}"
        );
        // bin-level scatter behaves like Poisson: no more than ~1% of bins
        // past 3 sigma
        let per_bin = total as f64 / hist.normalized.len() as f64;
        let outliers = hist
            .normalized
            .iter()
            .filter(|&&v| (v - 1.0).abs() > 3.0 / per_bin.sqrt())
            .count();
        assert!(
            (outliers as f64) < 0.01 * hist.normalized.len() as f64,
            "{outliers} of {} bins past 3 sigma",
            hist.normalized.len()
        );
        let wing = hist.far_wing_mean(0.2);
        assert!((wing - 1.0).abs() < 0.05, "far wing {wing}");
    }

    #[test]
    fn perfect_emitter_has_empty_zero_bin() {
        let spec = emitter();
        let e = simulate_emitter(&spec, 5e7, 4).unwrap();
        let stream = route_and_detect(&e, &spec, &quiet_channel(), 5e7, 4).unwrap();
        let hist = cross_correlate(&stream, DetectorId::A, DetectorId::B, 1.0, 500.0).unwrap();
        let zero_bin = hist.bin_centers_ps.iter().position(|&c| c == 0.0).unwrap();
        assert_eq!(hist.counts[zero_bin], 0);
        assert_eq!(hist.normalized[zero_bin], 0.0);
    }

    #[test]
    fn reversed_correlation_is_time_mirrored() {
        let stream = background_only_stream(5);
        let ab = cross_correlate(&stream, DetectorId::A, DetectorId::B, 128.0, 20_000.0).unwrap();
        let ba = cross_correlate(&stream, DetectorId::B, DetectorId::A, 128.0, 20_000.0).unwrap();
        let n = ab.counts.len();
        for i in 0..n {
            assert_eq!(ab.counts[i], ba.counts[n - 1 - i]);
        }
    }

    #[test]
    fn auto_correlation_uses_virtual_split() {
        let spec = emitter();
        let e = simulate_emitter(&spec, 2e8, 6).unwrap();
        let stream = route_and_detect(&e, &spec, &quiet_channel(), 2e8, 6).unwrap();
        let hist = auto_correlate(&stream, DetectorId::Control, 128.0, 20_000.0, 6).unwrap();
        assert_eq!(
            hist.n_start_events + hist.n_stop_events,
            stream.count(DetectorId::Control)
        );
        // antibunched: centre bin well below the wings
        let zero_bin = hist.bin_centers_ps.iter().position(|&c| c == 0.0).unwrap();
        assert!(hist.normalized[zero_bin] < 0.3);
    }
}
