//! System parameters, effective frequencies and the collective-mode transform.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// N identical oscillators with a uniform pairwise position coupling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemParams {
    pub n_modes: usize,
    #[serde(default = "one")]
    pub mass: f64,
    #[serde(default = "one")]
    pub omega: f64,
    #[serde(default)]
    pub lambda: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for SystemParams {
    fn default() -> Self {
        SystemParams {
            n_modes: 3,
            mass: 1.0,
            omega: 1.0,
            lambda: 0.0,
        }
    }
}

impl SystemParams {
    pub fn new(n_modes: usize, mass: f64, omega: f64, lambda: f64) -> Result<Self> {
        let p = SystemParams {
            n_modes,
            mass,
            omega,
            lambda,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_modes < 2 {
            return Err(Error::InvalidModeCount(self.n_modes));
        }
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "mass",
                value: self.mass,
                reason: "must be positive",
            });
        }
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "omega",
                value: self.omega,
                reason: "must be positive",
            });
        }
        if !self.lambda.is_finite() {
            return Err(Error::InvalidParameter {
                name: "lambda",
                value: self.lambda,
                reason: "must be finite",
            });
        }
        effective_frequencies(self).map(|_| ())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveFrequencies {
    /// Frequency of the N−1 relaxation-free modes.
    pub omega_f: f64,
    /// Frequency of the damped symmetric mode.
    pub omega_n: f64,
}

pub fn effective_frequencies(params: &SystemParams) -> Result<EffectiveFrequencies> {
    let w2 = params.omega * params.omega;
    let free = w2 - params.lambda / params.mass;
    let damped = w2 + (params.n_modes as f64 - 1.0) * params.lambda / params.mass;
    if free <= 0.0 || free.is_nan() {
        return Err(Error::FrequencyImaginary {
            which: "omega_f",
            radicand: free,
        });
    }
    if damped <= 0.0 || damped.is_nan() {
        return Err(Error::FrequencyImaginary {
            which: "omega_n",
            radicand: damped,
        });
    }
    Ok(EffectiveFrequencies {
        omega_f: free.sqrt(),
        omega_n: damped.sqrt(),
    })
}

/// Orthogonal map from bare positions to collective positions; row N is the symmetric mode.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeTransform {
    pub matrix: DMatrix<f64>,
}

impl ModeTransform {
    pub fn n_modes(&self) -> usize {
        self.matrix.nrows()
    }
}

pub fn mode_transform(n_modes: usize) -> Result<ModeTransform> {
    if n_modes < 2 {
        return Err(Error::InvalidModeCount(n_modes));
    }
    let n = n_modes;
    let mut t = DMatrix::zeros(n, n);
    for k in 0..n - 1 {
        // 1-based row k+1 has N−k−1 trailing entries.
        let rest = (n - k - 1) as f64;
        let norm = (rest / (rest + 1.0)).sqrt();
        t[(k, k)] = norm;
        for j in k + 1..n {
            t[(k, j)] = -norm / rest;
        }
    }
    let u = 1.0 / (n as f64).sqrt();
    for j in 0..n {
        t[(n - 1, j)] = u;
    }
    Ok(ModeTransform { matrix: t })
}

/// T ⊗ I₂ in the interleaved ordering (q₁, p₁, …, q_N, p_N).
pub fn expand_to_phase_space(t: &ModeTransform) -> DMatrix<f64> {
    let n = t.n_modes();
    let mut s = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let v = t.matrix[(i, j)];
            s[(2 * i, 2 * j)] = v;
            s[(2 * i + 1, 2 * j + 1)] = v;
        }
    }
    s
}
