//! Effective-index reduction of the rectangular cross-section and the
//! symmetric/antisymmetric supermode solver for the coupled pair.
//!
//! The 2D problem is reduced in two TE slab steps: vertical (thickness =
//! height) giving an effective core index, then horizontal (thickness =
//! width) in that effective medium. The coupled cross-section becomes a
//! 5-layer horizontal problem which is solved per parity by shooting from
//! the symmetry plane outward; this stays numerically exact even when the
//! gap is so wide that the two supermodes are degenerate to machine
//! precision (a full-stack scan cannot separate them there).

use super::profile::{sample_normalized, PiecewiseField};
use super::slab::{default_pitch, refine_root, SCAN_POINTS};
use super::{
    CouplerGeometry, Layer, ModeSolution, Parity, StackSpec, SupermodePair, WaveguideError,
};
use crate::numeric::linspace;

/// Effective index of the isolated rectangular waveguide via the two-step
/// effective-index method. The returned profile is the horizontal field,
/// with x = 0 at the waveguide centre. The gap field of `geom` is ignored.
pub fn effective_index_2d(geom: &CouplerGeometry) -> Result<ModeSolution, WaveguideError> {
    geom.validate()?;
    let horizontal = horizontal_stack(geom)?;
    let mut mode = super::solve_slab_te(&horizontal, 0).map_err(|e| step_err("horizontal", e))?;
    // centre the profile on the core
    mode.profile = mode.profile.shifted(-0.5 * geom.width_nm);
    Ok(mode)
}

pub(crate) fn effective_index_2d_neff(geom: &CouplerGeometry) -> Result<f64, WaveguideError> {
    let horizontal = horizontal_stack(geom)?;
    solve_neff(&horizontal, 0).map_err(|e| step_err("horizontal", e))
}

fn horizontal_stack(geom: &CouplerGeometry) -> Result<StackSpec, WaveguideError> {
    let n_vertical = vertical_neff(geom)?;
    Ok(StackSpec::symmetric(geom.n_clad, n_vertical, geom.width_nm, geom.wavelength_nm))
}

fn vertical_neff(geom: &CouplerGeometry) -> Result<f64, WaveguideError> {
    let vertical =
        StackSpec::symmetric(geom.n_clad, geom.n_core, geom.height_nm, geom.wavelength_nm);
    solve_neff(&vertical, 0).map_err(|e| step_err("vertical", e))
}

fn step_err(step: &str, e: WaveguideError) -> WaveguideError {
    match e {
        WaveguideError::NoGuidedMode(msg) => {
            WaveguideError::NoGuidedMode(format!("{step} slab step: {msg}"))
        }
        other => other,
    }
}

/// Root-only slab solve (no profile construction).
fn solve_neff(stack: &StackSpec, order: usize) -> Result<f64, WaveguideError> {
    let count = super::guided_te_mode_count(stack)?;
    if order >= count {
        return Err(WaveguideError::NoGuidedMode(format!(
            "stack supports {count} guided TE mode(s), requested order {order}"
        )));
    }
    Ok(super::solve_slab_te(stack, order)?.n_eff)
}

/// Symmetric and antisymmetric supermodes of the coupled cross-section.
///
/// Profiles span the full two-waveguide structure with x = 0 at the centre
/// of the gap, and are sign-normalized so the left-waveguide lobe is
/// positive (so that (sym + antisym)/sqrt(2) launches into the left guide).
pub fn solve_supermodes(geom: &CouplerGeometry) -> Result<SupermodePair, WaveguideError> {
    let (n_sym, n_asym, ctx) = supermode_indices(geom)?;
    let symmetric = build_supermode(&ctx, n_sym, Parity::Even);
    let antisymmetric = build_supermode(&ctx, n_asym, Parity::Odd);
    Ok(SupermodePair { symmetric, antisymmetric, delta_n: n_sym - n_asym })
}

/// (n_sym, n_antisym) without profile construction; used by design sweeps.
pub(crate) fn solve_supermode_indices(geom: &CouplerGeometry) -> Result<(f64, f64), WaveguideError> {
    let (n_sym, n_asym, _) = supermode_indices(geom)?;
    Ok((n_sym, n_asym))
}

struct HalfStructure {
    k0: f64,
    n_clad: f64,
    n_wg: f64,
    width_nm: f64,
    half_gap_nm: f64,
}

fn supermode_indices(geom: &CouplerGeometry) -> Result<(f64, f64, HalfStructure), WaveguideError> {
    geom.validate()?;
    if geom.is_isolated() {
        return Err(WaveguideError::InvalidSpec(
            "supermodes require a finite gap; use effective_index_2d for isolated guides".into(),
        ));
    }
    let n_wg = vertical_neff(geom)?;
    let ctx = HalfStructure {
        k0: geom.k0(),
        n_clad: geom.n_clad,
        n_wg,
        width_nm: geom.width_nm,
        half_gap_nm: 0.5 * geom.gap_nm,
    };
    let n_sym = highest_parity_root(&ctx, Parity::Even).ok_or_else(|| {
        WaveguideError::NoGuidedMode(format!(
            "no symmetric supermode at gap {} nm / {} nm",
            geom.gap_nm, geom.wavelength_nm
        ))
    })?;
    let n_asym = highest_parity_root(&ctx, Parity::Odd).ok_or_else(|| {
        WaveguideError::NoGuidedMode(format!(
            "no antisymmetric supermode at gap {} nm / {} nm (confinement too weak for \
             coupled-mode operation)",
            geom.gap_nm, geom.wavelength_nm
        ))
    })?;
    Ok((n_sym, n_asym, ctx))
}

/// Dispersion of one parity class: shoot from the symmetry plane (E' = 0 for
/// even, E = 0 for odd) outward through half-gap and core, and require pure
/// decay in the outer cladding. Growing toward the cladding keeps the
/// arithmetic cancellation-free at arbitrarily wide gaps.
fn parity_dispersion(ctx: &HalfStructure, parity: Parity, n_eff: f64) -> f64 {
    let k0 = ctx.k0;
    let beta2 = (k0 * n_eff) * (k0 * n_eff);
    let (mut e, mut f) = match parity {
        Parity::Even => (1.0, 0.0),
        _ => (0.0, k0),
    };
    for (n, d) in [(ctx.n_clad, ctx.half_gap_nm), (ctx.n_wg, ctx.width_nm)] {
        let kappa2 = (k0 * n) * (k0 * n) - beta2;
        let (en, fn_) = step_state(e, f, kappa2, d);
        e = en;
        f = fn_;
        let scale = e.abs().max(f.abs() / k0).max(f64::MIN_POSITIVE);
        e /= scale;
        f /= scale;
    }
    let gamma = (beta2 - (k0 * ctx.n_clad) * (k0 * ctx.n_clad)).max(0.0).sqrt();
    (f + gamma * e) / k0
}

fn step_state(e: f64, f: f64, kappa2: f64, d: f64) -> (f64, f64) {
    let u = kappa2 * d * d;
    let (c, s) = if u > 1e-12 {
        let x = u.sqrt();
        (x.cos(), x.sin() / x)
    } else if u < -1e-12 {
        let x = (-u).sqrt();
        if x > 30.0 {
            let e2 = (-2.0 * x).exp();
            (0.5 * (1.0 + e2), 0.5 * (1.0 - e2) / x)
        } else {
            (x.cosh(), x.sinh() / x)
        }
    } else {
        (1.0 - u / 2.0, 1.0 - u / 6.0)
    };
    (e * c + f * d * s, -e * kappa2 * d * s + f * c)
}

fn highest_parity_root(ctx: &HalfStructure, parity: Parity) -> Option<f64> {
    let lo = ctx.n_clad;
    let hi = ctx.n_wg;
    if hi <= lo {
        return None;
    }
    let margin = (hi - lo) * 1e-9;
    let xs = linspace(lo + margin, hi - margin, SCAN_POINTS);
    let f = |x: f64| parity_dispersion(ctx, parity, x);
    let mut prev = f(xs[0]);
    let mut best: Option<(f64, f64)> = None;
    for pair in xs.windows(2).skip(0) {
        let fx = f(pair[1]);
        if prev == 0.0 {
            best = Some((pair[0], pair[0]));
        } else if prev * fx < 0.0 {
            best = Some((pair[0], pair[1]));
        }
        prev = fx;
    }
    best.map(|(a, b)| if a == b { a } else { refine_root(&f, a, b) })
}

/// Assemble a full-structure supermode profile by mirroring the half field.
fn build_supermode(ctx: &HalfStructure, n_eff: f64, parity: Parity) -> ModeSolution {
    let k0 = ctx.k0;
    let beta2 = (k0 * n_eff).powi(2);
    let gamma_clad = (beta2 - (k0 * ctx.n_clad).powi(2)).max(0.0).sqrt();
    // layers walked from the symmetry plane: half-gap, then core; the outer
    // cladding decay is attached explicitly
    let shoot_stack = StackSpec::new(
        vec![
            Layer::new(ctx.n_clad, f64::INFINITY),
            Layer::new(ctx.n_clad, ctx.half_gap_nm),
            Layer::new(ctx.n_wg, ctx.width_nm),
            Layer::new(ctx.n_clad, f64::INFINITY),
        ],
        2.0 * std::f64::consts::PI / k0,
    );
    let (e0, f0) = match parity {
        Parity::Even => (1.0, 0.0),
        _ => (0.0, k0),
    };
    let half = PiecewiseField::open_ended(&shoot_stack, n_eff, e0, f0).close_top(gamma_clad);
    let (_, hi) = half.window();
    let pitch = default_pitch(shoot_stack.wavelength_nm, ctx.n_wg.max(ctx.n_clad));
    let odd_sign = if parity == Parity::Odd { -1.0 } else { 1.0 };
    let field = |x: f64| {
        if x >= 0.0 {
            half.evaluate(x)
        } else {
            odd_sign * half.evaluate(-x)
        }
    };
    let mut profile = sample_normalized(-hi, hi, pitch, field);
    // make the left-waveguide lobe positive
    let left_centre = -(ctx.half_gap_nm + 0.5 * ctx.width_nm);
    if profile.interp(left_centre) < 0.0 {
        for a in &mut profile.amplitude {
            *a = -*a;
        }
    }
    ModeSolution { n_eff, beta_rad_per_nm: k0 * n_eff, parity, profile }
}
