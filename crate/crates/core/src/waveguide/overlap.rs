//! Normalized intensity overlap between transverse field profiles.

use super::{FieldProfile, ModeSolution};
use crate::numeric::simpson;

/// |integral(Ea*Eb)|^2 / (integral(Ea^2) * integral(Eb^2)) in [0, 1].
///
/// Profiles are resampled onto a common uniform grid spanning the union of
/// both windows, at the finer of the two native pitches; fields are zero
/// outside their own window.
pub fn mode_overlap(a: &ModeSolution, b: &ModeSolution) -> f64 {
    overlap_profiles(&a.profile, &b.profile)
}

pub(crate) fn overlap_profiles(a: &FieldProfile, b: &FieldProfile) -> f64 {
    let lo = a.position_nm[0].min(b.position_nm[0]);
    let hi = a.position_nm[a.position_nm.len() - 1].max(b.position_nm[b.position_nm.len() - 1]);
    let pitch = a.pitch_nm().min(b.pitch_nm());
    let mut n = ((hi - lo) / pitch).ceil() as usize + 1;
    if n % 2 == 0 {
        n += 1;
    }
    let h = (hi - lo) / (n - 1) as f64;
    let mut ab = Vec::with_capacity(n);
    let mut aa = Vec::with_capacity(n);
    let mut bb = Vec::with_capacity(n);
    for i in 0..n {
        let x = lo + h * i as f64;
        let ea = a.interp(x);
        let eb = b.interp(x);
        ab.push(ea * eb);
        aa.push(ea * ea);
        bb.push(eb * eb);
    }
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
    use crate::waveguide::{effective_index_2d, solve_supermodes, CouplerGeometry};

    fn paper_geom(gap: f64) -> CouplerGeometry {
        CouplerGeometry::new(280.0, 140.0, gap, 3.48, 1.0, 927.0)
    }

    #[test]
    fn identical_profiles_overlap_to_one() {
        let mode = effective_index_2d(&paper_geom(f64::INFINITY)).unwrap();
        let ov = mode_overlap(&mode, &mode);
        assert!((ov - 1.0).abs() < 1e-9, "overlap = {ov}");
    }

    #[test]
    fn opposite_parity_overlap_vanishes() {
        let pair = solve_supermodes(&paper_geom(90.0)).unwrap();
        let ov = mode_overlap(&pair.symmetric, &pair.antisymmetric);
        assert!(ov < 1e-9, "overlap = {ov}");
    }

    #[test]
    fn shifted_copy_overlaps_less_than_one() {
        let mode = effective_index_2d(&paper_geom(f64::INFINITY)).unwrap();
        let mut shifted = mode.clone();
        shifted.profile = shifted.profile.shifted(120.0);
        let ov = mode_overlap(&mode, &shifted);
        assert!(ov < 1.0 && ov > 0.0);
    }
}
