//! Transfer-matrix TE mode solver for multilayer slab stacks.
//!
//! The dispersion function shoots the field state (E, E') from a purely
//! growing solution in the bottom cladding through every interior layer and
//! measures how far the top-cladding state is from purely decaying. TE
//! continuity keeps both E and E' continuous at interfaces, so the state
//! simply propagates; the function is entire in n_eff (no tan-style poles),
//! which makes sign-change bracketing exhaustive for simple roots.

use super::profile::PiecewiseField;
use super::{ModeSolution, Parity, StackSpec, WaveguideError};

/// Fixed initial scan resolution for root bracketing.
pub(crate) const SCAN_POINTS: usize = 10_000;
const BISECT_WIDTH: f64 = 1e-13;

/// cos/cosh and sin/sinh propagation kernels as functions of u = kappa^2 * d^2,
/// continuous through u = 0: c(u) = cos(sqrt(u)), s(u) = sin(sqrt(u))/sqrt(u)
/// for u > 0 and the hyperbolic counterparts for u < 0.
fn cs(u: f64) -> (f64, f64) {
    if u > 1e-12 {
        let x = u.sqrt();
        (x.cos(), x.sin() / x)
    } else if u < -1e-12 {
        let x = (-u).sqrt();
        if x > 30.0 {
            // scaled by e^{-x}; a positive factor does not move roots and the
            // caller renormalizes the state anyway
            let e2 = (-2.0 * x).exp();
            (0.5 * (1.0 + e2), 0.5 * (1.0 - e2) / x)
        } else {
            (x.cosh(), x.sinh() / x)
        }
    } else {
        (1.0 - u / 2.0 + u * u / 24.0, 1.0 - u / 6.0 + u * u / 120.0)
    }
}

/// Advance (E, E') across a homogeneous layer.
fn step(e: f64, f: f64, kappa2: f64, d: f64) -> (f64, f64) {
    let (c, s) = cs(kappa2 * d * d);
    (e * c + f * d * s, -e * kappa2 * d * s + f * c)
}

/// Magnitude of the dimensionless TE dispersion function at `n_eff`;
/// vanishes exactly at guided-mode indices, so solver output is directly
/// checkable.
pub fn te_dispersion_residual(stack: &StackSpec, n_eff: f64) -> f64 {
    te_dispersion(stack, n_eff).abs()
}

/// Dimensionless TE dispersion function; zero exactly at guided-mode indices.
pub(crate) fn te_dispersion(stack: &StackSpec, n_eff: f64) -> f64 {
    let k0 = stack.k0();
    let beta2 = (k0 * n_eff) * (k0 * n_eff);
    let n_bot = stack.layers[0].n;
    let n_top = stack.layers[stack.layers.len() - 1].n;
    let gamma_bot = (beta2 - (k0 * n_bot) * (k0 * n_bot)).max(0.0).sqrt();
    let gamma_top = (beta2 - (k0 * n_top) * (k0 * n_top)).max(0.0).sqrt();

    let mut e = 1.0;
    let mut f = gamma_bot;
    for layer in &stack.layers[1..stack.layers.len() - 1] {
        let kappa2 = (k0 * layer.n) * (k0 * layer.n) - beta2;
        let (en, fn_) = step(e, f, kappa2, layer.thickness_nm);
        e = en;
        f = fn_;
        let scale = e.abs().max(f.abs() / k0).max(f64::MIN_POSITIVE);
        e /= scale;
        f /= scale;
    }
    (f + gamma_top * e) / k0
}

/// Valid n_eff search interval (max cladding index, max interior index).
pub(crate) fn dispersion_scan_range(stack: &StackSpec) -> Option<(f64, f64)> {
    let n_bot = stack.layers[0].n;
    let n_top = stack.layers[stack.layers.len() - 1].n;
    let lo = n_bot.max(n_top);
    let hi = stack.layers[1..stack.layers.len() - 1]
        .iter()
        .map(|l| l.n)
        .fold(f64::NEG_INFINITY, f64::max);
    if hi > lo {
        Some((lo, hi))
    } else {
        None
    }
}

/// Bisection to a fixed interval width followed by a short secant polish,
/// keeping the best-residual point seen.
pub(crate) fn refine_root<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    let mut fb = f(b);
    debug_assert!(fa * fb <= 0.0);
    for _ in 0..200 {
        if b - a < BISECT_WIDTH {
            break;
        }
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fa * fm < 0.0 {
            b = m;
            fb = fm;
        } else {
            a = m;
            fa = fm;
        }
    }
    let (mut x0, mut f0, mut x1, mut f1) =
        if fa.abs() < fb.abs() { (b, fb, a, fa) } else { (a, fa, b, fb) };
    let mut best = (x1, f1.abs());
    for _ in 0..8 {
        let df = f1 - f0;
        if df == 0.0 {
            break;
        }
        let x2 = x1 - f1 * (x1 - x0) / df;
        if !x2.is_finite() {
            break;
        }
        let f2 = f(x2);
        if f2.abs() < best.1 {
            best = (x2, f2.abs());
        }
        x0 = x1;
        f0 = f1;
        x1 = x2;
        f1 = f2;
        if f2 == 0.0 {
            break;
        }
    }
    best.0
}

/// Scan the dispersion function and return bracketed roots in descending
/// n_eff order (mode 0 first). Degenerate tangential roots produce no sign
/// change and are treated as absent.
fn bracket_roots(stack: &StackSpec) -> Vec<(f64, f64)> {
    let Some((lo, hi)) = dispersion_scan_range(stack) else {
        return Vec::new();
    };
    let margin = (hi - lo) * 1e-9;
    let lo = lo + margin;
    let hi = hi - margin;
    let step = (hi - lo) / (SCAN_POINTS - 1) as f64;
    let mut brackets = Vec::new();
    let mut x_prev = lo;
    let mut f_prev = te_dispersion(stack, x_prev);
    for i in 1..SCAN_POINTS {
        let x = lo + step * i as f64;
        let fx = te_dispersion(stack, x);
        if f_prev == 0.0 {
            brackets.push((x_prev, x_prev));
        } else if f_prev * fx < 0.0 {
            brackets.push((x_prev, x));
        }
        x_prev = x;
        f_prev = fx;
    }
    brackets.reverse();
    brackets
}

/// Number of guided TE modes the stack supports at its wavelength.
pub fn guided_te_mode_count(stack: &StackSpec) -> Result<usize, WaveguideError> {
    stack.validate()?;
    Ok(bracket_roots(stack).len())
}

/// Solve the `mode_order`-th guided TE mode (0 = fundamental, highest n_eff).
pub fn solve_slab_te(stack: &StackSpec, mode_order: usize) -> Result<ModeSolution, WaveguideError> {
    stack.validate()?;
    let brackets = bracket_roots(stack);
    if mode_order >= brackets.len() {
        return Err(WaveguideError::NoGuidedMode(format!(
            "stack supports {} guided TE mode(s) at {} nm, requested order {}",
            brackets.len(),
            stack.wavelength_nm,
            mode_order
        )));
    }
    let (a, b) = brackets[mode_order];
    let n_eff = if a == b { a } else { refine_root(&|x| te_dispersion(stack, x), a, b) };

    let k0 = stack.k0();
    let field = PiecewiseField::from_stack(stack, n_eff);
    let parity = slab_parity(stack, &field);
    let profile = field.sample(default_pitch(stack.wavelength_nm, max_index(stack)));
    Ok(ModeSolution { n_eff, beta_rad_per_nm: k0 * n_eff, parity, profile })
}

pub(crate) fn max_index(stack: &StackSpec) -> f64 {
    stack.layers.iter().map(|l| l.n).fold(1.0, f64::max)
}

/// Default profile sampling pitch: lambda/(40 n) capped at 1 nm so Simpson
/// quadrature of norms and overlaps stays well below 1e-6 relative error.
pub(crate) fn default_pitch(wavelength_nm: f64, n_max: f64) -> f64 {
    (wavelength_nm / (40.0 * n_max)).min(1.0)
}

/// Parity with respect to the stack midplane, or None for asymmetric stacks.
fn slab_parity(stack: &StackSpec, field: &PiecewiseField) -> Parity {
    let m = stack.layers.len();
    let symmetric = (0..m / 2).all(|i| {
        let a = &stack.layers[i];
        let b = &stack.layers[m - 1 - i];
        let same_d = i == 0 || (a.thickness_nm - b.thickness_nm).abs() < 1e-9;
        (a.n - b.n).abs() < 1e-12 && same_d
    });
    if !symmetric {
        return Parity::None;
    }
    let center = 0.5 * field.interior_span();
    let (lo, hi) = field.window();
    let mut s_even = 0.0;
    let mut s_odd = 0.0;
    let n = 257;
    for i in 0..n {
        let x = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        let ex = field.evaluate(x);
        let mx = field.evaluate(2.0 * center - x);
        s_even += (ex + mx) * (ex + mx);
        s_odd += (ex - mx) * (ex - mx);
    }
    if s_odd <= s_even * 1e-12 {
        Parity::Even
    } else if s_even <= s_odd * 1e-12 {
        Parity::Odd
    } else {
        Parity::None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::simpson;
    use approx::assert_relative_eq;

    fn paper_stack() -> StackSpec {
        StackSpec::symmetric(1.0, 3.48, 140.0, 927.0)
    }

    #[test]
    fn uniform_medium_has_no_guided_mode() {
        let stack = StackSpec::symmetric(1.5, 1.5, 500.0, 900.0);
        let err = solve_slab_te(&stack, 0).unwrap_err();
        assert!(err.is_no_guided_mode());
        assert_eq!(guided_te_mode_count(&stack).unwrap(), 0);
    }

    #[test]
    fn cladding_above_core_has_no_guided_mode() {
        let stack = StackSpec::symmetric(2.0, 1.2, 500.0, 900.0);
        assert!(solve_slab_te(&stack, 0).unwrap_err().is_no_guided_mode());
    }

    #[test]
    fn bulk_limit_approaches_core_index() {
        // 20 lambda thick core: the fundamental sits just below n_core
        let stack = StackSpec::symmetric(1.0, 3.48, 20.0 * 927.0, 927.0);
        let mode = solve_slab_te(&stack, 0).unwrap();
        assert!(mode.n_eff < 3.48);
        assert!(3.48 - mode.n_eff < 1e-3, "n_eff = {}", mode.n_eff);
    }

    #[test]
    fn requesting_too_high_order_is_no_guided_mode() {
        let stack = paper_stack();
        let count = guided_te_mode_count(&stack).unwrap();
        assert!(count >= 1);
        assert!(solve_slab_te(&stack, count).unwrap_err().is_no_guided_mode());
    }

    #[test]
    fn residual_is_tiny_at_returned_index() {
        for stack in [
            paper_stack(),
            StackSpec::symmetric(1.45, 2.2, 600.0, 1550.0),
            StackSpec::new(
                vec![
                    super::super::Layer::new(1.0, f64::INFINITY),
                    super::super::Layer::new(3.1, 220.0),
                    super::super::Layer::new(1.44, f64::INFINITY),
                ],
                1310.0,
            ),
        ] {
            let count = guided_te_mode_count(&stack).unwrap();
            for order in 0..count {
                let mode = solve_slab_te(&stack, order).unwrap();
                let r = te_dispersion(&stack, mode.n_eff).abs();
                assert!(r < 1e-10, "order {order}: residual {r}");
            }
        }
    }

    #[test]
    fn mode_count_matches_scan_sign_changes() {
        let stack = StackSpec::symmetric(1.0, 3.48, 900.0, 927.0);
        let (lo, hi) = dispersion_scan_range(&stack).unwrap();
        let n = SCAN_POINTS;
        let mut changes = 0;
        let mut prev = te_dispersion(&stack, lo + (hi - lo) * 1e-9);
        for i in 1..n {
            let x = lo + (hi - lo) * (1e-9 + (1.0 - 2e-9) * i as f64 / (n - 1) as f64);
            let fx = te_dispersion(&stack, x);
            if prev * fx < 0.0 {
                changes += 1;
            }
            prev = fx;
        }
        assert_eq!(guided_te_mode_count(&stack).unwrap(), changes);
        assert!(changes >= 2);
    }

    #[test]
    fn modes_are_ordered_and_alternate_parity() {
        let stack = StackSpec::symmetric(1.0, 3.48, 900.0, 927.0);
        let count = guided_te_mode_count(&stack).unwrap();
        let mut prev = f64::INFINITY;
        for order in 0..count {
            let mode = solve_slab_te(&stack, order).unwrap();
            assert!(mode.n_eff < prev);
            assert!(mode.n_eff > 1.0 && mode.n_eff < 3.48);
            let expect = if order % 2 == 0 { Parity::Even } else { Parity::Odd };
            assert_eq!(mode.parity, expect, "order {order}");
            prev = mode.n_eff;
        }
    }

    #[test]
    fn profile_is_normalized_and_decays_in_claddings() {
        let mode = solve_slab_te(&paper_stack(), 0).unwrap();
        let sq: Vec<f64> = mode.profile.amplitude.iter().map(|e| e * e).collect();
        let norm = simpson(&sq, mode.profile.pitch_nm());
        assert_relative_eq!(norm, 1.0, max_relative = 1e-6);

        // monotone decay in the outer claddings
        let xs = &mode.profile.position_nm;
        let es = &mode.profile.amplitude;
        let mut i = 0;
        while xs[i] < 0.0 {
            assert!(es[i + 1].abs() >= es[i].abs() - 1e-12);
            i += 1;
        }
        let mut j = xs.len() - 1;
        while xs[j] > 140.0 {
            assert!(es[j - 1].abs() >= es[j].abs() - 1e-12);
            j -= 1;
        }
    }

    #[test]
    fn field_and_derivative_are_continuous_at_interfaces() {
        let stack = StackSpec::new(
            vec![
                super::super::Layer::new(1.0, f64::INFINITY),
                super::super::Layer::new(3.48, 140.0),
                super::super::Layer::new(1.6, 90.0),
                super::super::Layer::new(3.1, 120.0),
                super::super::Layer::new(1.44, f64::INFINITY),
            ],
            980.0,
        );
        let count = guided_te_mode_count(&stack).unwrap();
        assert!(count >= 1);
        for order in 0..count {
            let mode = solve_slab_te(&stack, order).unwrap();
            let field = PiecewiseField::from_stack(&stack, mode.n_eff);
            let (lo, hi) = field.window();
            let peak = (0..2000)
                .map(|i| field.evaluate(lo + (hi - lo) * i as f64 / 1999.0).abs())
                .fold(0.0f64, f64::max);
            let eps = 1e-7;
            for x in field.interfaces() {
                let jump_e = (field.evaluate(x - eps) - field.evaluate(x + eps)).abs();
                let jump_f = (field.derivative(x - eps) - field.derivative(x + eps)).abs();
                // normalize the derivative jump by k0*peak to make it dimensionless
                let k0 = stack.k0();
                assert!(jump_e / peak < 1e-8, "E jump {} at {}", jump_e / peak, x);
                assert!(jump_f / (k0 * peak) < 1e-6, "E' jump at {x}");
            }
        }
    }
}
