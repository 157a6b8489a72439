//! Design and simulation toolkit for on-chip directional-coupler
//! beam-splitters fed by a single-photon emitter.
//!
//! Two layers:
//!
//! * a **design layer** — TE slab mode solving, effective-index reduction of
//!   air-clad rectangular waveguides, supermode splitting, coupled-mode
//!   power transfer and the mode-conversion loss of the coupler entrance
//!   ([`waveguide`], [`coupler`]);
//! * a **quantum-statistics layer** — seeded Monte-Carlo photon streams from
//!   a CW-pumped two-level emitter routed through the splitter onto jittery
//!   detectors, correlation histograms, IRF-convolved antibunching fits and
//!   background correction ([`photon`], [`correlation`]).
//!
//! Units are nm for transverse geometry, ps for time, events/ns for rates.
//! Every stochastic operation is a pure function of an explicit u64 seed.

pub mod coupler;
pub mod correlation;
pub mod io;
pub mod numeric;
pub mod photon;
pub mod scenario;
pub mod waveguide;

pub use coupler::{
    interaction_length_for_cross_um, l5050_um, mismatch_loss, power_transfer, sweep_l5050_map,
    sweep_loss_map, CouplerDesign, CouplerError, LossCell, MapCell, SplitResult,
};
pub use correlation::{
    auto_correlate, background_correct, cross_correlate, fit_g2, CorrectedG2, CorrelationError,
    G2Fit, G2Histogram,
};
pub use photon::{
    route_and_detect, signal_to_total, signal_to_total_pair, simulate_emitter, virtual_hbt_split,
    ChannelSpec, DetectorId, EmitterSpec, PhotonError, PhotonEvent, PhotonEventStream,
};
pub use scenario::{AnalysisSpec, MapConfig, ScenarioConfig, SweepGrid};
pub use waveguide::{
    effective_index_2d, guided_te_mode_count, mode_overlap, solve_slab_te, solve_supermodes,
    CouplerGeometry, FieldProfile, Layer, ModeSolution, Parity, StackSpec, SupermodePair,
    WaveguideError,
};
