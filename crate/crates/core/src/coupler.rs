//! Coupled-mode-theory design layer: coupling lengths, power transfer,
//! (wavelength x gap) design maps and the entrance mismatch loss.

use crate::numeric::simpson;
use crate::waveguide::{
    self, effective_index_2d, solve_supermodes, CouplerGeometry, FieldProfile, WaveguideError,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum CouplerError {
    #[error("invalid coupler input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Waveguide(#[from] WaveguideError),
}

/// A concrete coupler design point.
///
/// `mismatch_loss` and `per_bend_loss` are configured fractions; callers
/// that want the physical entrance loss fill `mismatch_loss` from
/// [`mismatch_loss`](crate::coupler::mismatch_loss) on the same geometry.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CouplerDesign {
    pub geometry: CouplerGeometry,
    pub interaction_length_um: f64,
    pub bend_radius_um: f64,
    pub per_bend_loss: f64,
    #[serde(default)]
    pub mismatch_loss: f64,
}

impl CouplerDesign {
    pub fn validate(&self) -> Result<(), CouplerError> {
        self.geometry.validate()?;
        if !(self.interaction_length_um >= 0.0) || !self.interaction_length_um.is_finite() {
            return Err(CouplerError::InvalidInput(format!(
                "interaction_length_um must be >= 0, got {}",
                self.interaction_length_um
            )));
        }
        if !(self.bend_radius_um > 0.0) {
            return Err(CouplerError::InvalidInput(format!(
                "bend_radius_um must be > 0, got {}",
                self.bend_radius_um
            )));
        }
        if !(0.0..0.05).contains(&self.per_bend_loss) {
            return Err(CouplerError::InvalidInput(format!(
                "per_bend_loss must be in [0, 0.05), got {}",
                self.per_bend_loss
            )));
        }
        if !(0.0..1.0).contains(&self.mismatch_loss) {
            return Err(CouplerError::InvalidInput(format!(
                "mismatch_loss must be in [0, 1), got {}",
                self.mismatch_loss
            )));
        }
        if self.total_fixed_loss() >= 1.0 {
            return Err(CouplerError::InvalidInput(
                "combined fixed losses reach 100%".into(),
            ));
        }
        Ok(())
    }

    pub fn total_fixed_loss(&self) -> f64 {
        self.mismatch_loss + 2.0 * self.per_bend_loss
    }

    /// Bend radii below 2 um are outside the negligible-bend-loss regime.
    pub fn bend_radius_warning(&self) -> Option<String> {
        (self.bend_radius_um < 2.0).then(|| {
            format!(
                "bend radius {} um is below 2 um; per-bend loss {} may underestimate the real \
                 bend loss",
                self.bend_radius_um, self.per_bend_loss
            )
        })
    }
}

/// Power split at the coupler output; components sum to 1.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SplitResult {
    /// Power remaining in the input arm.
    pub p_bar: f64,
    /// Power transferred to the neighbour arm.
    pub p_cross: f64,
    pub loss: f64,
}

/// Shortest interaction length for 50:50 splitting, in um:
/// lambda0 * asin(sqrt(0.5)) / (pi * delta_n) = lambda0 / (4 delta_n).
pub fn l5050_um(wavelength_nm: f64, delta_n: f64) -> Result<f64, CouplerError> {
    if !(delta_n > 0.0) {
        return Err(CouplerError::InvalidInput(format!(
            "delta_n must be > 0 for a finite coupling length, got {delta_n}"
        )));
    }
    if !(wavelength_nm > 0.0) {
        return Err(CouplerError::InvalidInput(format!(
            "wavelength must be > 0, got {wavelength_nm}"
        )));
    }
    Ok(wavelength_nm * (0.5f64.sqrt()).asin() / (PI * delta_n) / 1000.0)
}

/// Shortest interaction length (um) at which the lossless cross fraction
/// reaches `p_cross`.
pub fn interaction_length_for_cross_um(
    p_cross: f64,
    wavelength_nm: f64,
    delta_n: f64,
) -> Result<f64, CouplerError> {
    if !(0.0..=1.0).contains(&p_cross) {
        return Err(CouplerError::InvalidInput(format!(
            "p_cross must be in [0, 1], got {p_cross}"
        )));
    }
    if !(delta_n > 0.0) {
        return Err(CouplerError::InvalidInput(format!(
            "delta_n must be > 0, got {delta_n}"
        )));
    }
    Ok(wavelength_nm * p_cross.sqrt().asin() / (PI * delta_n) / 1000.0)
}

/// Lossless coupled-mode transfer scaled by the design's fixed losses:
/// p_cross = sin^2(pi * delta_n * L / lambda0), both ports scaled by
/// (1 - mismatch_loss - 2 per_bend_loss), deficit reported as loss.
pub fn power_transfer(design: &CouplerDesign, delta_n: f64) -> Result<SplitResult, CouplerError> {
    design.validate()?;
    if !(delta_n >= 0.0) || !delta_n.is_finite() {
        return Err(CouplerError::InvalidInput(format!(
            "delta_n must be >= 0, got {delta_n}"
        )));
    }
    let length_nm = design.interaction_length_um * 1000.0;
    let phase = PI * delta_n * length_nm / design.geometry.wavelength_nm;
    let cross = phase.sin().powi(2);
    let keep = 1.0 - design.total_fixed_loss();
    Ok(SplitResult {
        p_bar: (1.0 - cross) * keep,
        p_cross: cross * keep,
        loss: design.total_fixed_loss(),
    })
}

/// One cell of the 50:50 coupling-length design map.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MapCell {
    pub wavelength_nm: f64,
    pub gap_nm: f64,
    pub delta_n: Option<f64>,
    pub l5050_um: Option<f64>,
    pub valid: bool,
}

/// One cell of the entrance-loss map.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LossCell {
    pub wavelength_nm: f64,
    pub gap_nm: f64,
    pub loss_fraction: Option<f64>,
    pub valid: bool,
}

/// Supermode splitting and L_50:50 per (gap, wavelength) grid point, sorted
/// by (gap, wavelength). Cells where no supermode pair is guided are marked
/// invalid rather than zero.
pub fn sweep_l5050_map(
    base: &CouplerGeometry,
    wavelengths_nm: &[f64],
    gaps_nm: &[f64],
) -> Result<Vec<MapCell>, CouplerError> {
    let cells = sweep_grid(base, wavelengths_nm, gaps_nm)?;
    Ok(cells
        .into_par_iter()
        .map(|geom| match waveguide::solve_supermode_indices(&geom) {
            Ok((n_sym, n_asym)) => {
                let dn = n_sym - n_asym;
                let l = l5050_um(geom.wavelength_nm, dn).ok();
                MapCell {
                    wavelength_nm: geom.wavelength_nm,
                    gap_nm: geom.gap_nm,
                    delta_n: Some(dn),
                    l5050_um: l,
                    valid: l.is_some(),
                }
            }
            Err(WaveguideError::NoGuidedMode(_)) => MapCell {
                wavelength_nm: geom.wavelength_nm,
                gap_nm: geom.gap_nm,
                delta_n: None,
                l5050_um: None,
                valid: false,
            },
            // invalid spec was excluded by the upfront validation
            Err(e) => unreachable!("unexpected sweep error: {e}"),
        })
        .collect())
}

/// Entrance mismatch loss per (gap, wavelength) grid point, sorted by
/// (gap, wavelength).
pub fn sweep_loss_map(
    base: &CouplerGeometry,
    wavelengths_nm: &[f64],
    gaps_nm: &[f64],
) -> Result<Vec<LossCell>, CouplerError> {
    let cells = sweep_grid(base, wavelengths_nm, gaps_nm)?;
    Ok(cells
        .into_par_iter()
        .map(|geom| match mismatch_loss(&geom) {
            Ok(loss) => LossCell {
                wavelength_nm: geom.wavelength_nm,
                gap_nm: geom.gap_nm,
                loss_fraction: Some(loss),
                valid: true,
            },
            Err(CouplerError::Waveguide(WaveguideError::NoGuidedMode(_))) => LossCell {
                wavelength_nm: geom.wavelength_nm,
                gap_nm: geom.gap_nm,
                loss_fraction: None,
                valid: false,
            },
            Err(e) => unreachable!("unexpected sweep error: {e}"),
        })
        .collect())
}

fn sweep_grid(
    base: &CouplerGeometry,
    wavelengths_nm: &[f64],
    gaps_nm: &[f64],
) -> Result<Vec<CouplerGeometry>, CouplerError> {
    base.validate()?;
    if wavelengths_nm.is_empty() || gaps_nm.is_empty() {
        return Err(CouplerError::InvalidInput("empty sweep grid".into()));
    }
    let mut out = Vec::with_capacity(wavelengths_nm.len() * gaps_nm.len());
    let mut gaps = gaps_nm.to_vec();
    let mut lams = wavelengths_nm.to_vec();
    gaps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    lams.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for &gap in &gaps {
        for &lam in &lams {
            let geom = CouplerGeometry { gap_nm: gap, wavelength_nm: lam, ..*base };
            geom.validate()?;
            out.push(geom);
        }
    }
    Ok(out)
}

/// Mode-conversion loss between the input waveguide and the coupling region:
/// 1 - T_overlap * T_fresnel, where T_overlap is the intensity overlap of the
/// isolated input mode (centred on the left guide) with the launched
/// supermode superposition (sym + antisym)/sqrt(2), and T_fresnel accounts
/// for the propagation-constant step using the symmetric supermode.
pub fn mismatch_loss(geom: &CouplerGeometry) -> Result<f64, CouplerError> {
    geom.validate()?;
    if geom.is_isolated() {
        return Err(CouplerError::InvalidInput(
            "mismatch loss needs a finite gap".into(),
        ));
    }
    let pair = solve_supermodes(geom)?;
    let iso = effective_index_2d(geom)?;
    // isolated profile is centred on its own core; move it onto the left guide
    let left_centre = -0.5 * (geom.gap_nm + geom.width_nm);
    let input = iso.profile.shifted(left_centre);

    let launched = FieldProfile {
        position_nm: input.position_nm.clone(),
        amplitude: input
            .position_nm
            .iter()
            .map(|&x| {
                (pair.symmetric.profile.interp(x) + pair.antisymmetric.profile.interp(x))
                    / 2f64.sqrt()
            })
            .collect(),
    };
    let t_overlap = overlap_on_same_grid(&input, &launched);
    let beta_in = iso.beta_rad_per_nm;
    let beta_super = pair.symmetric.beta_rad_per_nm;
    let r = (beta_in - beta_super) / (beta_in + beta_super);
    let t_fresnel = 1.0 - r * r;
    Ok((1.0 - t_overlap * t_fresnel).clamp(0.0, 1.0 - f64::EPSILON))
}

// both profiles share the same grid here, so integrate directly
fn overlap_on_same_grid(a: &FieldProfile, b: &FieldProfile) -> f64 {
    let h = a.pitch_nm();
    let ab: Vec<f64> = a.amplitude.iter().zip(&b.amplitude).map(|(x, y)| x * y).collect();
    let aa: Vec<f64> = a.amplitude.iter().map(|x| x * x).collect();
    let bb: Vec<f64> = b.amplitude.iter().map(|x| x * x).collect();
    let num = simpson(&ab, h);
    let den = simpson(&aa, h) * simpson(&bb, h);
    if den <= 0.0 {
        return 0.0;
    }
    (num * num / den).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn paper_geom(gap: f64) -> CouplerGeometry {
        CouplerGeometry::new(280.0, 140.0, gap, 3.48, 1.0, 927.0)
    }

    fn lossless_design(length_um: f64) -> CouplerDesign {
        CouplerDesign {
            geometry: paper_geom(100.0),
            interaction_length_um: length_um,
            bend_radius_um: 2.0,
            per_bend_loss: 0.0,
            mismatch_loss: 0.0,
        }
    }

    #[test]
    fn l5050_closed_form() {
        assert_relative_eq!(l5050_um(1000.0, 0.25).unwrap(), 1.0, max_relative = 1e-12);
        // doubling delta_n halves the length exactly
        let a = l5050_um(927.0, 0.05).unwrap();
        let b = l5050_um(927.0, 0.10).unwrap();
        assert_relative_eq!(a, 2.0 * b, max_relative = 1e-12);
        assert!(l5050_um(927.0, 0.0).is_err());
        assert!(l5050_um(927.0, -0.1).is_err());
    }

    #[test]
    fn zero_length_keeps_power_in_input_arm() {
        let r = power_transfer(&lossless_design(0.0), 0.05).unwrap();
        assert_eq!(r.p_bar, 1.0);
        assert_eq!(r.p_cross, 0.0);
        assert_eq!(r.loss, 0.0);
    }

    #[test]
    fn half_beat_length_splits_evenly() {
        let dn = 0.0482;
        let l = l5050_um(927.0, dn).unwrap();
        let r = power_transfer(&lossless_design(l), dn).unwrap();
        assert_relative_eq!(r.p_bar, 0.5, epsilon = 1e-9);
        assert_relative_eq!(r.p_cross, 0.5, epsilon = 1e-9);
    }

    #[test]
    fn over_coupled_length_reaches_seventy_thirty() {
        let dn = 0.0506;
        let l70 = interaction_length_for_cross_um(0.7, 927.0, dn).unwrap();
        let l50 = l5050_um(927.0, dn).unwrap();
        assert!(l70 > l50, "70:30 point must sit beyond the 50:50 point");
        let r = power_transfer(&lossless_design(l70), dn).unwrap();
        assert_relative_eq!(r.p_cross, 0.7, epsilon = 1e-9);
        assert_relative_eq!(r.p_bar, 0.3, epsilon = 1e-9);
    }

    #[test]
    fn energy_accounting_with_losses() {
        let mut design = lossless_design(3.7);
        design.per_bend_loss = 0.01;
        design.mismatch_loss = 0.004;
        let r = power_transfer(&design, 0.0482).unwrap();
        assert_relative_eq!(r.p_bar + r.p_cross + r.loss, 1.0, epsilon = 1e-9);
        assert_relative_eq!(r.loss, 0.024, epsilon = 1e-12);
        assert!(r.p_bar >= 0.0 && r.p_cross >= 0.0);
    }

    #[test]
    fn design_validation_bounds() {
        let mut d = lossless_design(1.0);
        d.per_bend_loss = 0.05;
        assert!(d.validate().is_err());
        d.per_bend_loss = 0.01;
        d.bend_radius_um = 0.0;
        assert!(d.validate().is_err());
        d.bend_radius_um = 1.0;
        assert!(d.validate().is_ok());
        assert!(d.bend_radius_warning().is_some());
        d.bend_radius_um = 2.0;
        assert!(d.bend_radius_warning().is_none());
    }

    #[test]
    fn degenerate_single_cell_sweep_matches_direct_call() {
        let base = paper_geom(100.0);
        let cells = sweep_l5050_map(&base, &[927.0], &[100.0]).unwrap();
        assert_eq!(cells.len(), 1);
        let pair = solve_supermodes(&base).unwrap();
        let direct = l5050_um(927.0, pair.delta_n).unwrap();
        assert_eq!(cells[0].l5050_um, Some(direct));
        assert_eq!(cells[0].delta_n, Some(pair.delta_n));
        assert!(cells[0].valid);
    }

    #[test]
    fn sweep_marks_unguided_cells_invalid() {
        // 2.0-index core barely guides; a long wavelength kills the odd mode
        let base = CouplerGeometry::new(120.0, 80.0, 400.0, 1.6, 1.0, 900.0);
        let cells = sweep_l5050_map(&base, &[900.0, 1600.0], &[400.0]).unwrap();
        assert!(cells.iter().any(|c| !c.valid), "expected at least one invalid cell");
        for c in &cells {
            if !c.valid {
                assert!(c.delta_n.is_none() && c.l5050_um.is_none());
            }
        }
    }

    #[test]
    fn sweep_rejects_empty_grid_and_bad_geometry() {
        let base = paper_geom(100.0);
        assert!(sweep_l5050_map(&base, &[], &[100.0]).is_err());
        let mut bad = base;
        bad.width_nm = -1.0;
        assert!(sweep_l5050_map(&bad, &[927.0], &[100.0]).is_err());
    }

    #[test]
    fn fresnel_term_vanishes_for_equal_betas() {
        let beta = 0.017;
        let r: f64 = (beta - beta) / (beta + beta);
        assert_eq!(1.0 - r * r, 1.0);
    }

    #[test]
    fn mismatch_loss_decoupling_limit() {
        let loss = mismatch_loss(&paper_geom(10.0 * 927.0)).unwrap();
        assert!(loss < 1e-4, "loss = {loss}");
    }

    #[test]
    fn mismatch_loss_monotone_in_gap() {
        let mut prev = f64::INFINITY;
        for gap in [20.0, 40.0, 60.0, 80.0, 100.0, 150.0] {
            let loss = mismatch_loss(&paper_geom(gap)).unwrap();
            assert!(loss < prev, "loss({gap}) = {loss} not below {prev}");
            prev = loss;
        }
    }
}
