//! Guided TE modes of 1D multilayer slab stacks and effective-index
//! reductions of rectangular air-clad cross-sections.
//!
//! All lengths are in nanometres, propagation constants in rad/nm.
//! The solvers handle lossless real-index media only.

mod eim;
mod overlap;
mod profile;
mod slab;

pub use eim::{effective_index_2d, solve_supermodes};
pub use overlap::mode_overlap;
pub use slab::{guided_te_mode_count, solve_slab_te, te_dispersion_residual};

pub(crate) use eim::solve_supermode_indices;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors from the mode solvers.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum WaveguideError {
    /// The structure supports fewer guided TE modes than requested.
    #[error("no guided TE mode: {0}")]
    NoGuidedMode(String),
    /// The input violates a structural invariant (not a physics outcome).
    #[error("invalid waveguide spec: {0}")]
    InvalidSpec(String),
}

impl WaveguideError {
    pub fn is_no_guided_mode(&self) -> bool {
        matches!(self, WaveguideError::NoGuidedMode(_))
    }
}

/// One layer of a slab stack.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Layer {
    /// Refractive index (dimensionless, >= 1).
    pub n: f64,
    /// Thickness in nm. Ignored for the first and last (semi-infinite) layers.
    pub thickness_nm: f64,
}

impl Layer {
    pub fn new(n: f64, thickness_nm: f64) -> Self {
        Layer { n, thickness_nm }
    }
}

/// Layered refractive-index cross-section of a slab waveguide.
///
/// The first and last layers are semi-infinite claddings; only interior
/// thicknesses enter the calculation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StackSpec {
    pub layers: Vec<Layer>,
    pub wavelength_nm: f64,
}

impl StackSpec {
    pub fn new(layers: Vec<Layer>, wavelength_nm: f64) -> Self {
        StackSpec { layers, wavelength_nm }
    }

    /// Three-layer stack with identical claddings.
    pub fn symmetric(n_clad: f64, n_core: f64, core_thickness_nm: f64, wavelength_nm: f64) -> Self {
        StackSpec {
            layers: vec![
                Layer::new(n_clad, f64::INFINITY),
                Layer::new(n_core, core_thickness_nm),
                Layer::new(n_clad, f64::INFINITY),
            ],
            wavelength_nm,
        }
    }

    pub fn validate(&self) -> Result<(), WaveguideError> {
        if self.layers.len() < 3 {
            return Err(WaveguideError::InvalidSpec(format!(
                "need at least 3 layers, got {}",
                self.layers.len()
            )));
        }
        if !(self.wavelength_nm > 0.0) || !self.wavelength_nm.is_finite() {
            return Err(WaveguideError::InvalidSpec(format!(
                "wavelength must be positive and finite, got {}",
                self.wavelength_nm
            )));
        }
        for (i, layer) in self.layers.iter().enumerate() {
            if !(layer.n >= 1.0) || !layer.n.is_finite() {
                return Err(WaveguideError::InvalidSpec(format!(
                    "layer {i}: index must be >= 1, got {}",
                    layer.n
                )));
            }
            let interior = i > 0 && i + 1 < self.layers.len();
            if interior && (!(layer.thickness_nm > 0.0) || !layer.thickness_nm.is_finite()) {
                return Err(WaveguideError::InvalidSpec(format!(
                    "layer {i}: interior thickness must be positive, got {}",
                    layer.thickness_nm
                )));
            }
        }
        Ok(())
    }

    pub(crate) fn k0(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.wavelength_nm
    }
}

/// Cross-section of two identical rectangular waveguides separated by a gap.
///
/// `gap_nm = f64::INFINITY` means isolated (uncoupled) waveguides; in the
/// JSON form this is written as `"gap_nm": null` or by omitting the field.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CouplerGeometry {
    pub width_nm: f64,
    pub height_nm: f64,
    #[serde(
        default = "infinite_gap",
        serialize_with = "gap_to_json",
        deserialize_with = "gap_from_json"
    )]
    pub gap_nm: f64,
    pub n_core: f64,
    pub n_clad: f64,
    pub wavelength_nm: f64,
}

fn infinite_gap() -> f64 {
    f64::INFINITY
}

fn gap_to_json<S: serde::Serializer>(gap: &f64, ser: S) -> Result<S::Ok, S::Error> {
    if gap.is_finite() {
        ser.serialize_some(gap)
    } else {
        ser.serialize_none()
    }
}

fn gap_from_json<'de, D: serde::Deserializer<'de>>(de: D) -> Result<f64, D::Error> {
    let v: Option<f64> = Option::deserialize(de)?;
    Ok(v.unwrap_or(f64::INFINITY))
}

impl CouplerGeometry {
    pub fn new(
        width_nm: f64,
        height_nm: f64,
        gap_nm: f64,
        n_core: f64,
        n_clad: f64,
        wavelength_nm: f64,
    ) -> Self {
        CouplerGeometry { width_nm, height_nm, gap_nm, n_core, n_clad, wavelength_nm }
    }

    /// Same cross-section with the neighbour waveguide removed.
    pub fn isolated(&self) -> Self {
        CouplerGeometry { gap_nm: f64::INFINITY, ..*self }
    }

    pub fn is_isolated(&self) -> bool {
        !self.gap_nm.is_finite()
    }

    pub fn validate(&self) -> Result<(), WaveguideError> {
        let positive = [
            ("width_nm", self.width_nm),
            ("height_nm", self.height_nm),
            ("wavelength_nm", self.wavelength_nm),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(WaveguideError::InvalidSpec(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if !(self.gap_nm > 0.0) {
            return Err(WaveguideError::InvalidSpec(format!(
                "gap_nm must be positive (or infinite for isolated), got {}",
                self.gap_nm
            )));
        }
        if !(self.n_clad >= 1.0) || !(self.n_core > self.n_clad) || !self.n_core.is_finite() {
            return Err(WaveguideError::InvalidSpec(format!(
                "need n_core > n_clad >= 1, got n_core={} n_clad={}",
                self.n_core, self.n_clad
            )));
        }
        Ok(())
    }

    pub(crate) fn k0(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.wavelength_nm
    }
}

/// Transverse parity of a mode with respect to the structure's symmetry plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
    None,
}

/// Sampled transverse field profile on a uniform grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldProfile {
    pub position_nm: Vec<f64>,
    pub amplitude: Vec<f64>,
}

impl FieldProfile {
    pub fn pitch_nm(&self) -> f64 {
        if self.position_nm.len() < 2 {
            return 0.0;
        }
        (self.position_nm[self.position_nm.len() - 1] - self.position_nm[0])
            / (self.position_nm.len() - 1) as f64
    }

    /// Linear interpolation; zero outside the sampled window.
    pub fn interp(&self, x: f64) -> f64 {
        let xs = &self.position_nm;
        let n = xs.len();
        if n == 0 || x < xs[0] || x > xs[n - 1] {
            return 0.0;
        }
        let pitch = self.pitch_nm();
        if pitch <= 0.0 {
            return self.amplitude[0];
        }
        let t = (x - xs[0]) / pitch;
        let i = (t.floor() as usize).min(n - 2);
        let frac = t - i as f64;
        self.amplitude[i] * (1.0 - frac) + self.amplitude[i + 1] * frac
    }

    /// Same profile translated by `dx` nm.
    pub fn shifted(&self, dx: f64) -> Self {
        FieldProfile {
            position_nm: self.position_nm.iter().map(|x| x + dx).collect(),
            amplitude: self.amplitude.clone(),
        }
    }
}

/// One guided TE mode: effective index, propagation constant and sampled field.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModeSolution {
    /// Effective index, strictly between cladding and core indices.
    pub n_eff: f64,
    /// Propagation constant 2*pi*n_eff/lambda0, rad/nm.
    pub beta_rad_per_nm: f64,
    pub parity: Parity,
    pub profile: FieldProfile,
}

/// Symmetric/antisymmetric supermode pair of a coupled two-waveguide section.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SupermodePair {
    pub symmetric: ModeSolution,
    pub antisymmetric: ModeSolution,
    /// n_sym - n_antisym; positive for any finite gap.
    pub delta_n: f64,
}
