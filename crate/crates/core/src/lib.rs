//! Covariance-matrix dynamics of N oscillators sharing a non-Markovian thermal bath,
//! with partial-transpose negativity and multi-mode squeezing along the trajectory.
//!
//! Units are natural (ħ = k_B = 1) and phase-space vectors are ordered
//! (q₁, p₁, …, q_N, p_N); the vacuum covariance is ½·I.

pub mod bath;
pub mod config;
pub mod dynamics;
pub mod entanglement;
pub mod error;
pub mod linalg;
pub mod model;
pub mod scenario;
pub mod states;

pub use bath::{BathSpec, CoefficientTable, Coefficients, FrequencyShift};
pub use config::{InitialState, OutputKind, RunConfig, SweepParameter, SweepSpec};
pub use dynamics::{Basis, BlockKind, BlockSystem, CovarianceState, Generator, Method, Trajectory};
pub use entanglement::{EntanglementReport, GMatrix, SqueezeMatchParams};
pub use error::{Error, Result};
pub use model::{EffectiveFrequencies, ModeTransform, SystemParams};
pub use states::{AsymmetricStateSpec, GhzStateSpec};

/// Shortest round-trip representation, so identical runs give identical bytes.
pub fn fmt_num(x: f64) -> String {
    format!("{x:e}")
}
