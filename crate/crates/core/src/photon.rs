//! Seeded Monte-Carlo generation of time-tagged photon detection events: a
//! CW-pumped two-level emitter, bidirectional waveguide emission, an on-chip
//! splitter with arbitrary ratio, Poissonian background light per detector,
//! and detectors with finite efficiency, Gaussian timing jitter and optional
//! dead time.
//!
//! Timestamps are in ps, rates in events/ns. Every draw runs through a
//! ChaCha stream derived from (seed, stage), so a stream is reproducible
//! byte-for-byte from (seed, spec, duration).

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum PhotonError {
    #[error("invalid photon-stream spec: {0}")]
    InvalidSpec(String),
}

/// CW-pumped two-level emitter feeding a bidirectional waveguide.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EmitterSpec {
    /// Ground -> excited pumping rate, events/ns.
    pub pump_rate_per_ns: f64,
    /// Excited -> ground decay rate (1/lifetime), events/ns.
    pub decay_rate_per_ns: f64,
    /// Probability an emitted photon enters the guided mode toward the splitter.
    pub beta_forward: f64,
    /// Probability it travels toward the control port instead.
    pub beta_backward: f64,
}

impl EmitterSpec {
    pub fn validate(&self) -> Result<(), PhotonError> {
        if !(self.pump_rate_per_ns > 0.0) || !(self.decay_rate_per_ns > 0.0) {
            return Err(PhotonError::InvalidSpec(format!(
                "pump and decay rates must be > 0, got {} / {}",
                self.pump_rate_per_ns, self.decay_rate_per_ns
            )));
        }
        if !(0.0..=1.0).contains(&self.beta_forward)
            || !(0.0..=1.0).contains(&self.beta_backward)
            || self.beta_forward + self.beta_backward > 1.0 + 1e-12
        {
            return Err(PhotonError::InvalidSpec(format!(
                "need beta_forward + beta_backward <= 1, got {} + {}",
                self.beta_forward, self.beta_backward
            )));
        }
        Ok(())
    }

    /// Steady-state emission rate pump*decay/(pump+decay), events/ns.
    pub fn emission_rate_per_ns(&self) -> f64 {
        self.pump_rate_per_ns * self.decay_rate_per_ns
            / (self.pump_rate_per_ns + self.decay_rate_per_ns)
    }

    /// Correlation time of the ideal antibunching dip, ps.
    pub fn dip_tau_c_ps(&self) -> f64 {
        1000.0 / (self.pump_rate_per_ns + self.decay_rate_per_ns)
    }
}

/// Per-detector multipliers for the background rate.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BackgroundWeights {
    pub a: f64,
    pub b: f64,
    pub control: f64,
}

impl Default for BackgroundWeights {
    fn default() -> Self {
        BackgroundWeights { a: 1.0, b: 1.0, control: 1.0 }
    }
}

/// Detection channel: splitter ratio, background light and detector response.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ChannelSpec {
    /// Uncorrelated Poissonian background rate per detector, events/ns.
    pub background_rate_per_ns: f64,
    /// Optional per-detector scaling of the background rate.
    #[serde(default)]
    pub background_weights: BackgroundWeights,
    /// Probability a splitter-side photon exits the cross port (detector A).
    pub split_cross: f64,
    /// Detection probability per arriving photon.
    pub detector_efficiency: f64,
    /// FWHM of the Gaussian timing jitter applied per event, ps.
    pub jitter_fwhm_ps: f64,
    /// Detector dead time, ps (0 disables).
    #[serde(default)]
    pub dead_time_ps: f64,
}

impl ChannelSpec {
    pub fn validate(&self) -> Result<(), PhotonError> {
        if !(self.background_rate_per_ns >= 0.0) {
            return Err(PhotonError::InvalidSpec(format!(
                "background rate must be >= 0, got {}",
                self.background_rate_per_ns
            )));
        }
        for (name, w) in [
            ("a", self.background_weights.a),
            ("b", self.background_weights.b),
            ("control", self.background_weights.control),
        ] {
            if !(w >= 0.0) || !w.is_finite() {
                return Err(PhotonError::InvalidSpec(format!(
                    "background weight {name} must be >= 0, got {w}"
                )));
            }
        }
        if !(0.0..=1.0).contains(&self.split_cross) {
            return Err(PhotonError::InvalidSpec(format!(
                "split_cross must be in [0, 1], got {}",
                self.split_cross
            )));
        }
        if !(0.0..=1.0).contains(&self.detector_efficiency) {
            return Err(PhotonError::InvalidSpec(format!(
                "detector_efficiency must be in [0, 1], got {}",
                self.detector_efficiency
            )));
        }
        if !(self.jitter_fwhm_ps >= 0.0) || !(self.dead_time_ps >= 0.0) {
            return Err(PhotonError::InvalidSpec(
                "jitter and dead time must be >= 0".into(),
            ));
        }
        Ok(())
    }

    pub fn background_rate_at(&self, det: DetectorId) -> f64 {
        let w = match det {
            DetectorId::A => self.background_weights.a,
            DetectorId::B => self.background_weights.b,
            DetectorId::Control => self.background_weights.control,
        };
        self.background_rate_per_ns * w
    }
}

/// Physical detector identity; serialized as "A" / "B" / "C".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DetectorId {
    A,
    B,
    #[serde(rename = "C")]
    Control,
}

impl DetectorId {
    pub fn code(&self) -> char {
        match self {
            DetectorId::A => 'A',
            DetectorId::B => 'B',
            DetectorId::Control => 'C',
        }
    }

    pub fn from_code(c: &str) -> Option<Self> {
        match c.trim() {
            "A" | "a" => Some(DetectorId::A),
            "B" | "b" => Some(DetectorId::B),
            "C" | "c" | "control" => Some(DetectorId::Control),
            _ => None,
        }
    }

    fn order(&self) -> u8 {
        match self {
            DetectorId::A => 0,
            DetectorId::B => 1,
            DetectorId::Control => 2,
        }
    }
}

/// One detection record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhotonEvent {
    pub timestamp_ps: f64,
    pub detector: DetectorId,
}

/// Time-sorted detection events plus the provenance needed to regenerate them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhotonEventStream {
    pub events: Vec<PhotonEvent>,
    pub duration_ps: f64,
    pub seed: u64,
    pub emitter: EmitterSpec,
    pub channel: ChannelSpec,
}

impl PhotonEventStream {
    pub fn events_for(&self, det: DetectorId) -> Vec<f64> {
        self.events
            .iter()
            .filter(|e| e.detector == det)
            .map(|e| e.timestamp_ps)
            .collect()
    }

    pub fn count(&self, det: DetectorId) -> usize {
        self.events.iter().filter(|e| e.detector == det).count()
    }
}

// RNG stage tags keep the emitter, the routing pass and the virtual splitter
// on independent substreams of the same scenario seed.
const STAGE_EMITTER: u64 = 1;
const STAGE_ROUTE: u64 = 2;
const STAGE_VIRTUAL_SPLIT: u64 = 3;

fn stage_rng(seed: u64, stage: u64) -> ChaCha8Rng {
    let mut bytes = [0u8; 32];
    bytes[..8].copy_from_slice(&seed.to_le_bytes());
    bytes[8..16].copy_from_slice(&stage.to_le_bytes());
    bytes[16..24].copy_from_slice(b"photonmc");
    ChaCha8Rng::from_seed(bytes)
}

/// Gillespie simulation of the two-state emitter: ground -> excited at the
/// pump rate, excited -> ground at the decay rate emitting one photon per
/// de-excitation. Returns raw emission times in ps, unrouted and undetected.
pub fn simulate_emitter(
    spec: &EmitterSpec,
    duration_ps: f64,
    seed: u64,
) -> Result<Vec<f64>, PhotonError> {
    spec.validate()?;
    if !(duration_ps > 0.0) || !duration_ps.is_finite() {
        return Err(PhotonError::InvalidSpec(format!(
            "duration must be > 0, got {duration_ps}"
        )));
    }
    let mut rng = stage_rng(seed, STAGE_EMITTER);
    let pump = Exp::new(spec.pump_rate_per_ns / 1000.0).expect("validated rate");
    let decay = Exp::new(spec.decay_rate_per_ns / 1000.0).expect("validated rate");
    let mut t = 0.0_f64;
    let mut out = Vec::with_capacity((spec.emission_rate_per_ns() * duration_ps / 1000.0) as usize);
    loop {
        t += pump.sample(&mut rng);
        if t > duration_ps {
            break;
        }
        t += decay.sample(&mut rng);
        if t > duration_ps {
            break;
        }
        out.push(t);
    }
    Ok(out)
}

/// Route emissions through the waveguide and splitter onto the detectors,
/// add per-detector Poissonian background, then apply detection efficiency,
/// Gaussian jitter and dead time. Events outside [0, duration] are dropped.
pub fn route_and_detect(
    emissions: &[f64],
    emitter: &EmitterSpec,
    channel: &ChannelSpec,
    duration_ps: f64,
    seed: u64,
) -> Result<PhotonEventStream, PhotonError> {
    emitter.validate()?;
    channel.validate()?;
    if !(duration_ps > 0.0) {
        return Err(PhotonError::InvalidSpec(format!(
            "duration must be > 0, got {duration_ps}"
        )));
    }
    let mut rng = stage_rng(seed, STAGE_ROUTE);

    // pass 1: route every emission (control / A / B / lost)
    let mut per_det: [Vec<f64>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    for &t in emissions {
        let u: f64 = rng.gen();
        if u < emitter.beta_backward {
            per_det[DetectorId::Control.order() as usize].push(t);
        } else if u < emitter.beta_backward + emitter.beta_forward {
            let v: f64 = rng.gen();
            let det = if v < channel.split_cross { DetectorId::A } else { DetectorId::B };
            per_det[det.order() as usize].push(t);
        }
    }

    // pass 2: background per detector, in fixed detector order
    for det in [DetectorId::A, DetectorId::B, DetectorId::Control] {
        let rate = channel.background_rate_at(det) / 1000.0; // per ps
        if rate <= 0.0 {
            continue;
        }
        let gaps = Exp::new(rate).expect("positive rate");
        let mut t = 0.0_f64;
        loop {
            t += gaps.sample(&mut rng);
            if t > duration_ps {
                break;
            }
            per_det[det.order() as usize].push(t);
        }
    }

    // pass 3: efficiency thinning and per-event jitter, fixed order
    let sigma = channel.jitter_fwhm_ps / (8.0 * 2f64.ln()).sqrt();
    let jitter = if sigma > 0.0 { Some(Normal::new(0.0, sigma).expect("sigma > 0")) } else { None };
    let mut events = Vec::new();
    for det in [DetectorId::A, DetectorId::B, DetectorId::Control] {
        for &t in &per_det[det.order() as usize] {
            if channel.detector_efficiency < 1.0 && rng.gen::<f64>() >= channel.detector_efficiency
            {
                continue;
            }
            let t = match &jitter {
                Some(j) => t + j.sample(&mut rng),
                None => t,
            };
            if (0.0..=duration_ps).contains(&t) {
                events.push(PhotonEvent { timestamp_ps: t, detector: det });
            }
        }
    }

    events.sort_by(|a, b| {
        a.timestamp_ps
            .partial_cmp(&b.timestamp_ps)
            .unwrap()
            .then(a.detector.order().cmp(&b.detector.order()))
    });

    if channel.dead_time_ps > 0.0 {
        let mut last: [f64; 3] = [f64::NEG_INFINITY; 3];
        events.retain(|e| {
            let idx = e.detector.order() as usize;
            if e.timestamp_ps - last[idx] >= channel.dead_time_ps {
                last[idx] = e.timestamp_ps;
                true
            } else {
                false
            }
        });
    }

    Ok(PhotonEventStream {
        events,
        duration_ps,
        seed,
        emitter: *emitter,
        channel: *channel,
    })
}

/// Split one detector's events 50:50 onto virtual detectors A and B; the
/// tabletop HBT arrangement for auto-correlating a single port.
pub fn virtual_hbt_split(stream: &PhotonEventStream, det: DetectorId, seed: u64) -> PhotonEventStream {
    let mut rng = stage_rng(seed, STAGE_VIRTUAL_SPLIT);
    let events = stream
        .events
        .iter()
        .filter(|e| e.detector == det)
        .map(|e| PhotonEvent {
            timestamp_ps: e.timestamp_ps,
            detector: if rng.gen::<f64>() < 0.5 { DetectorId::A } else { DetectorId::B },
        })
        .collect();
    PhotonEventStream { events, ..stream.clone() }
}

/// Signal fraction rho = S/(S+B) at one detector, from the configured rates.
/// Detector efficiency thins signal and background alike, so it cancels.
pub fn signal_to_total(emitter: &EmitterSpec, channel: &ChannelSpec, det: DetectorId) -> f64 {
    let emission = emitter.emission_rate_per_ns();
    let signal = match det {
        DetectorId::Control => emission * emitter.beta_backward,
        DetectorId::A => emission * emitter.beta_forward * channel.split_cross,
        DetectorId::B => emission * emitter.beta_forward * (1.0 - channel.split_cross),
    };
    let background = channel.background_rate_at(det);
    if signal + background <= 0.0 {
        return 0.0;
    }
    signal / (signal + background)
}

/// Effective signal fraction of a detector pair: the antibunching dip depth
/// scales with rho_a * rho_b, so the pair rho is the geometric mean.
pub fn signal_to_total_pair(
    emitter: &EmitterSpec,
    channel: &ChannelSpec,
    start: DetectorId,
    stop: DetectorId,
) -> f64 {
    (signal_to_total(emitter, channel, start) * signal_to_total(emitter, channel, stop)).sqrt()
}
