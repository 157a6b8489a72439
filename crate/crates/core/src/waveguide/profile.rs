//! Piecewise-analytic field representation behind the sampled profiles.
//!
//! A guided TE field is an exponential in each cladding and a cos/cosh
//! combination in each interior layer; storing the per-layer coefficients
//! lets profiles be evaluated exactly at any position, so interface
//! continuity is a property of the construction rather than of a grid.

use super::{FieldProfile, StackSpec};
use crate::numeric::simpson;

#[derive(Debug, Clone, Copy)]
struct Segment {
    x_start: f64,
    thickness: f64,
    kappa2: f64,
    e0: f64,
    f0: f64,
}

impl Segment {
    fn eval(&self, x: f64) -> (f64, f64) {
        let dx = x - self.x_start;
        let u = self.kappa2 * dx * dx;
        let (c, s) = cs_unscaled(u);
        (
            self.e0 * c + self.f0 * dx * s,
            -self.e0 * self.kappa2 * dx * s + self.f0 * c,
        )
    }
}

// unscaled kernels; profile construction only sees bounded arguments
fn cs_unscaled(u: f64) -> (f64, f64) {
    if u > 1e-12 {
        let x = u.sqrt();
        (x.cos(), x.sin() / x)
    } else if u < -1e-12 {
        let x = (-u).sqrt();
        (x.cosh(), x.sinh() / x)
    } else {
        (1.0 - u / 2.0 + u * u / 24.0, 1.0 - u / 6.0 + u * u / 120.0)
    }
}

/// Exact piecewise field of one TE solution at a given effective index.
#[derive(Debug, Clone)]
pub(crate) struct PiecewiseField {
    x0: f64,
    gamma_bottom: f64,
    segments: Vec<Segment>,
    /// Some(gamma): semi-infinite decaying top cladding.
    /// None: the field description simply ends at the last interface
    /// (used for half-structure shooting up to a symmetry plane).
    gamma_top: Option<f64>,
    x_end: f64,
    e_end: f64,
    f_end: f64,
}

impl PiecewiseField {
    /// Shoot from a purely growing bottom-cladding solution through the
    /// interior layers of `stack` at effective index `n_eff`.
    pub(crate) fn from_stack(stack: &StackSpec, n_eff: f64) -> Self {
        let k0 = stack.k0();
        let beta2 = (k0 * n_eff).powi(2);
        let n_bot = stack.layers[0].n;
        let n_top = stack.layers[stack.layers.len() - 1].n;
        let gamma_bottom = (beta2 - (k0 * n_bot).powi(2)).max(0.0).sqrt();
        let gamma_top = (beta2 - (k0 * n_top).powi(2)).max(0.0).sqrt();
        let mut field = Self::shoot(stack, n_eff, 1.0, gamma_bottom);
        field.gamma_bottom = gamma_bottom;
        field.gamma_top = Some(gamma_top);
        field
    }

    /// Shoot with an explicit starting state (E, E') at the first interface;
    /// the description is left open at the last interface.
    pub(crate) fn open_ended(stack: &StackSpec, n_eff: f64, e_start: f64, f_start: f64) -> Self {
        let k0 = stack.k0();
        let beta2 = (k0 * n_eff).powi(2);
        let n_bot = stack.layers[0].n;
        let gamma_bottom = (beta2 - (k0 * n_bot).powi(2)).max(0.0).sqrt();
        let mut field = Self::shoot(stack, n_eff, e_start, f_start);
        field.gamma_bottom = gamma_bottom;
        field
    }

    /// Attach a semi-infinite decaying cladding past the last interface.
    pub(crate) fn close_top(mut self, gamma: f64) -> Self {
        self.gamma_top = Some(gamma);
        self
    }

    fn shoot(stack: &StackSpec, n_eff: f64, e_start: f64, f_start: f64) -> Self {
        let k0 = stack.k0();
        let beta2 = (k0 * n_eff).powi(2);
        let mut segments = Vec::with_capacity(stack.layers.len() - 2);
        let mut x = 0.0;
        let mut e = e_start;
        let mut f = f_start;
        for layer in &stack.layers[1..stack.layers.len() - 1] {
            let kappa2 = (k0 * layer.n).powi(2) - beta2;
            let seg = Segment { x_start: x, thickness: layer.thickness_nm, kappa2, e0: e, f0: f };
            let (en, fn_) = seg.eval(x + layer.thickness_nm);
            segments.push(seg);
            x += layer.thickness_nm;
            e = en;
            f = fn_;
        }
        PiecewiseField {
            x0: 0.0,
            gamma_bottom: 0.0,
            segments,
            gamma_top: None,
            x_end: x,
            e_end: e,
            f_end: f,
        }
    }

    pub(crate) fn interfaces(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.segments.iter().map(|s| s.x_start).collect();
        v.push(self.x_end);
        v
    }

    pub(crate) fn interior_span(&self) -> f64 {
        self.x_end - self.x0
    }

    pub(crate) fn end_state(&self) -> (f64, f64) {
        (self.e_end, self.f_end)
    }

    /// Sampling window: the interior plus five decay lengths into each
    /// semi-infinite cladding (none past an open end).
    pub(crate) fn window(&self) -> (f64, f64) {
        let lo = self.x0 - 5.0 / self.gamma_bottom.max(1e-12);
        let hi = match self.gamma_top {
            Some(g) => self.x_end + 5.0 / g.max(1e-12),
            None => self.x_end,
        };
        (lo, hi)
    }

    pub(crate) fn evaluate(&self, x: f64) -> f64 {
        if x < self.x0 {
            return self.segments[0].e0 * (self.gamma_bottom * (x - self.x0)).exp();
        }
        if x >= self.x_end {
            return match self.gamma_top {
                Some(g) => self.e_end * (-g * (x - self.x_end)).exp(),
                None => self.e_end,
            };
        }
        let seg = self.segment_at(x);
        seg.eval(x).0
    }

    pub(crate) fn derivative(&self, x: f64) -> f64 {
        if x < self.x0 {
            return self.gamma_bottom
                * self.segments[0].e0
                * (self.gamma_bottom * (x - self.x0)).exp();
        }
        if x >= self.x_end {
            return match self.gamma_top {
                Some(g) => -g * self.e_end * (-g * (x - self.x_end)).exp(),
                None => self.f_end,
            };
        }
        let seg = self.segment_at(x);
        seg.eval(x).1
    }

    fn segment_at(&self, x: f64) -> &Segment {
        // few segments: linear scan
        for seg in self.segments.iter().rev() {
            if x >= seg.x_start {
                return seg;
            }
        }
        &self.segments[0]
    }

    /// Sample over the window at (at most) the requested pitch, L2-normalize
    /// over that window and fix the overall sign so the peak is positive.
    pub(crate) fn sample(&self, pitch_nm: f64) -> FieldProfile {
        let (lo, hi) = self.window();
        sample_normalized(lo, hi, pitch_nm, |x| self.evaluate(x))
    }
}

/// Sample an arbitrary field on [lo, hi], L2-normalize with Simpson
/// quadrature, and make the dominant lobe positive. The sample count is
/// forced odd so Simpson needs no trapezoid tail.
pub(crate) fn sample_normalized<F: Fn(f64) -> f64>(
    lo: f64,
    hi: f64,
    pitch_nm: f64,
    field: F,
) -> FieldProfile {
    let span = hi - lo;
    let mut n = (span / pitch_nm).ceil() as usize + 1;
    if n < 3 {
        n = 3;
    }
    if n % 2 == 0 {
        n += 1;
    }
    let h = span / (n - 1) as f64;
    let position_nm: Vec<f64> = (0..n).map(|i| lo + h * i as f64).collect();
    let mut amplitude: Vec<f64> = position_nm.iter().map(|&x| field(x)).collect();
    let sq: Vec<f64> = amplitude.iter().map(|e| e * e).collect();
    let norm = simpson(&sq, h).sqrt();
    let peak = amplitude.iter().cloned().fold(0.0f64, |m, e| if e.abs() > m.abs() { e } else { m });
    let scale = if peak < 0.0 { -1.0 / norm } else { 1.0 / norm };
    for a in &mut amplitude {
        *a *= scale;
    }
    FieldProfile { position_nm, amplitude }
}
