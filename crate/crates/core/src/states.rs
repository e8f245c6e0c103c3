//! Initial covariances of the two squeezed-vacuum families, in the transformed basis.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dynamics::{Basis, CovarianceState};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GhzStateSpec {
    pub n_modes: usize,
    pub r: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymmetricStateSpec {
    pub r0: f64,
    pub rs: f64,
}

impl AsymmetricStateSpec {
    pub fn r_bar(&self) -> f64 {
        (8.0 * self.r0 * self.r0 + self.rs * self.rs).sqrt()
    }

    /// q = (8r0 + rs)/r̄, or None at r̄ = 0 where only q·sinh r̄ is defined.
    pub fn q(&self) -> Option<f64> {
        let rb = self.r_bar();
        (rb > 0.0).then(|| (8.0 * self.r0 + self.rs) / rb)
    }
}

fn check_r(name: &'static str, r: f64) -> Result<()> {
    if r >= 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value: r,
            reason: "squeezing must be nonnegative",
        })
    }
}

pub fn ghz_initial_covariance(spec: &GhzStateSpec) -> Result<CovarianceState> {
    check_r("r", spec.r)?;
    let lo = 0.5 * (-2.0 * spec.r).exp();
    let hi = 0.5 * (2.0 * spec.r).exp();
    let diag: Vec<f64> = match spec.n_modes {
        2 => vec![lo, hi, hi, lo],
        3 => vec![lo, hi, lo, hi, hi, lo],
        n => return Err(Error::UnsupportedModeCount(n)),
    };
    Ok(CovarianceState::new(
        0.0,
        DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag)),
        Basis::Transformed,
    ))
}

/// sinh(x)/x with its limit at 0.
fn sinhc(x: f64) -> f64 {
    if x.abs() < 1e-6 {
        1.0 + x * x / 6.0
    } else {
        x.sinh() / x
    }
}

pub fn asymmetric_initial_covariance(spec: &AsymmetricStateSpec) -> Result<CovarianceState> {
    check_r("r0", spec.r0)?;
    check_r("rs", spec.rs)?;
    let (r0, rs) = (spec.r0, spec.rs);
    let rb = spec.r_bar();
    let sc = sinhc(rb);
    let ch = rb.cosh();
    // q·sinh r̄ written without dividing by r̄.
    let qs = (8.0 * r0 + rs) * sc;
    let minus = 3.0 * ch - qs;
    let plus = 3.0 * ch + qs;
    let e = |k: f64| (k * rs).exp();
    let s3 = 3f64.sqrt();
    let s6 = 6f64.sqrt();

    let mut v = DMatrix::zeros(6, 6);
    v[(0, 0)] = e(-2.0) / 24.0 * (9.0 + e(3.0) * minus);
    v[(1, 1)] = e(2.0) / 24.0 * (9.0 + e(-3.0) * plus);
    v[(2, 2)] = e(-2.0) / 8.0 * (1.0 + e(3.0) * minus);
    v[(3, 3)] = e(2.0) / 8.0 * (1.0 + e(-3.0) * plus);
    v[(4, 4)] = e(1.0) / 6.0 * plus;
    v[(5, 5)] = e(-1.0) / 6.0 * minus;
    let v13 = -e(-2.0) / (8.0 * s3) * (3.0 - e(3.0) * minus);
    let v24 = -e(2.0) / (8.0 * s3) * (3.0 - e(-3.0) * plus);
    let v35 = -e(1.0) * (r0 - rs) * sc / s6;
    let v46 = e(-1.0) * (r0 - rs) * sc / s6;
    // The q-row coupling of mode 1 to the damped mode is V₁₅ = V₃₅/√3.
    let v15 = v35 / s3;
    let v26 = v46 / s3;
    for &(i, j, x) in &[
        (0, 2, v13),
        (1, 3, v24),
        (2, 4, v35),
        (3, 5, v46),
        (0, 4, v15),
        (1, 5, v26),
    ] {
        v[(i, j)] = x;
        v[(j, i)] = x;
    }
    Ok(CovarianceState::new(0.0, v, Basis::Transformed))
}
