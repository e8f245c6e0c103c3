//! Spectral density, kernels and the tabulated master-equation coefficients.

pub mod quadrature;

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::EffectiveFrequencies;
use quadrature::{integrate, Tolerance};

/// Upper frequency limit in units of the cutoff; e^{-64} makes the tail irrelevant.
pub const CUTOFF_MULTIPLE: f64 = 8.0;

const KERNEL_TOL: Tolerance = Tolerance {
    abs: 1e-11,
    rel: 1e-12,
};

/// How the damped-mode drift treats the bath-induced frequency shift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrequencyShift {
    /// Adds the counterterm (2/M)∫J(ω)/ω dω so Ω_N stays the physical frequency.
    #[default]
    Renormalized,
    /// Uses Ω_N² + Ω̃²_N(t) literally.
    Bare,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathSpec {
    pub gamma0: f64,
    pub cutoff: f64,
    #[serde(default = "ohmic")]
    pub ohmicity: f64,
    pub temperature: f64,
    #[serde(default)]
    pub frequency_shift: FrequencyShift,
}

fn ohmic() -> f64 {
    1.0
}

impl Default for BathSpec {
    fn default() -> Self {
        BathSpec {
            gamma0: 0.05,
            cutoff: 100.0,
            ohmicity: 1.0,
            temperature: 10.0,
            frequency_shift: FrequencyShift::Renormalized,
        }
    }
}

impl BathSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |name, value, reason| Err(Error::InvalidParameter { name, value, reason });
        if !(self.cutoff > 0.0 && self.cutoff.is_finite()) {
            return bad("cutoff", self.cutoff, "must be positive");
        }
        if !(self.gamma0 >= 0.0 && self.gamma0.is_finite()) {
            return bad("gamma0", self.gamma0, "must be nonnegative");
        }
        if !(self.ohmicity > 0.0 && self.ohmicity.is_finite()) {
            return bad("ohmicity", self.ohmicity, "must be positive");
        }
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return bad("temperature", self.temperature, "must be nonnegative");
        }
        if self.ohmicity < 1.0 && self.temperature > 0.0 {
            log::warn!(
                "sub-Ohmic bath (n = {}) at T > 0: the noise integrand is singular at ω = 0",
                self.ohmicity
            );
        }
        Ok(())
    }
}

/// J(ω) = (2/π) γ0 ω M (ω/Λ)^{n−1} e^{−ω²/Λ²}.
pub fn spectral_density(omega: f64, spec: &BathSpec, mass: f64) -> f64 {
    if omega <= 0.0 {
        return 0.0;
    }
    let x = omega / spec.cutoff;
    2.0 / PI * spec.gamma0 * omega * mass * x.powf(spec.ohmicity - 1.0) * (-x * x).exp()
}

/// Bose occupation 1/(e^{ω/T} − 1); zero at T = 0.
pub fn mean_occupation(omega: f64, temperature: f64) -> f64 {
    if temperature <= 0.0 {
        return 0.0;
    }
    1.0 / (omega / temperature).exp_m1()
}

/// x/tanh(x), finite at the origin.
fn x_coth_x(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 + x * x / 3.0
    } else {
        x / x.tanh()
    }
}

/// J(ω)(1 + 2N̄(ω)) with the ω → 0 limit substituted explicitly.
pub fn thermal_weight(omega: f64, spec: &BathSpec, mass: f64) -> f64 {
    if spec.temperature <= 0.0 {
        return spectral_density(omega, spec, mass);
    }
    let x = omega / spec.cutoff;
    let pref = 2.0 / PI * spec.gamma0 * mass * (-x * x).exp();
    // ω·coth(ω/2T) = 2T·(y/tanh y), y = ω/2T.
    let wc = 2.0 * spec.temperature * x_coth_x(omega / (2.0 * spec.temperature));
    if spec.ohmicity == 1.0 {
        pref * wc
    } else if omega <= 0.0 {
        if spec.ohmicity > 1.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        pref * wc * x.powf(spec.ohmicity - 1.0)
    }
}

fn panels(spec: &BathSpec, t: f64) -> (usize, usize) {
    let upper = CUTOFF_MULTIPLE * spec.cutoff;
    // Roughly one panel per half oscillation, never fewer than 8.
    let n0 = ((upper * t / PI).ceil() as usize).clamp(8, 1 << 16);
    (n0, 4 * n0 + 4000)
}

fn kernel<F: Fn(f64) -> f64>(f: F, t: f64, spec: &BathSpec) -> Result<f64> {
    let (n0, max) = panels(spec, t);
    let r = integrate(f, 0.0, CUTOFF_MULTIPLE * spec.cutoff, KERNEL_TOL, n0, max);
    // The contract is an absolute tolerance of 1e-10; the working target is tighter.
    if !r.converged && r.error > 1e-10 {
        return Err(Error::QuadratureFailure {
            t,
            estimate: r.error,
            intervals: r.intervals,
        });
    }
    Ok(r.value)
}

/// Dissipation kernel Π(t) = ∫ J(ω) sin(ωt) dω.
pub fn dissipation_kernel(t: f64, spec: &BathSpec, mass: f64) -> Result<f64> {
    if t == 0.0 || spec.gamma0 == 0.0 {
        return Ok(0.0);
    }
    kernel(|w| spectral_density(w, spec, mass) * (w * t).sin(), t, spec)
}

/// Noise kernel ν(t) = ∫ J(ω) coth(ω/2T) cos(ωt) dω.
pub fn noise_kernel(t: f64, spec: &BathSpec, mass: f64) -> Result<f64> {
    if spec.gamma0 == 0.0 {
        return Ok(0.0);
    }
    kernel(|w| thermal_weight(w, spec, mass) * (w * t).cos(), t, spec)
}

/// (2/M)∫J(ω)/ω dω, the static part of the frequency shift.
pub fn shift_counterterm(spec: &BathSpec, mass: f64) -> Result<f64> {
    if spec.gamma0 == 0.0 {
        return Ok(0.0);
    }
    let f = |w: f64| {
        let x = w / spec.cutoff;
        2.0 / PI * spec.gamma0 * mass * x.powf(spec.ohmicity - 1.0) * (-x * x).exp()
    };
    let r = integrate(f, 0.0, CUTOFF_MULTIPLE * spec.cutoff, KERNEL_TOL, 16, 20_000);
    if !r.converged && r.error > 1e-10 {
        return Err(Error::QuadratureFailure {
            t: 0.0,
            estimate: r.error,
            intervals: r.intervals,
        });
    }
    Ok(2.0 / mass * r.value)
}

/// Coefficients of the damped-mode master equation at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Coefficients {
    pub omega_shift_sq: f64,
    pub gamma_n: f64,
    pub d_n: f64,
    pub f_n: f64,
}

/// Ω̃²_N, γ_N, D_N, f_N on a uniform grid t_k = k·step.
#[derive(Debug, Clone)]
pub struct CoefficientTable {
    pub step: f64,
    pub omega_shift_sq: Vec<f64>,
    pub gamma_n: Vec<f64>,
    pub d_n: Vec<f64>,
    pub f_n: Vec<f64>,
    /// Static shift added to the drift; zero for `FrequencyShift::Bare`.
    pub counterterm: f64,
    /// Time after which both kernels were negligible and set to zero.
    pub kernel_cutoff_time: f64,
}

impl CoefficientTable {
    /// Largest grid spacing that resolves both the bath and the damped-mode timescale.
    pub fn resolving_step(spec: &BathSpec, freqs: &EffectiveFrequencies) -> f64 {
        (0.1 / spec.cutoff).min(0.01 / freqs.omega_n)
    }

    /// Table with spacing `step`, covering [0, t_max].
    pub fn build(
        spec: &BathSpec,
        freqs: &EffectiveFrequencies,
        mass: f64,
        t_max: f64,
        step: f64,
    ) -> Result<Self> {
        spec.validate()?;
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "t_max",
                value: t_max,
                reason: "must be positive",
            });
        }
        if step.is_nan() || step <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "dt",
                value: step,
                reason: "must be positive",
            });
        }
        let bound = Self::resolving_step(spec, freqs);
        if step > bound * (1.0 + 1e-12) {
            return Err(Error::GridTooCoarse { step, bound });
        }
        let n = (t_max / step - 1e-9).ceil().max(1.0) as usize;
        let wn = freqs.omega_n;

        // Kernels on a quarter-step grid (two Simpson panels per node interval), stopped once negligible.
        let window = 20.0 / spec.cutoff;
        let sub = 0.25 * step;
        let mut pi_k = Vec::with_capacity(4 * n + 1);
        let mut nu_k = Vec::with_capacity(4 * n + 1);
        let mut peak = 0.0f64;
        let mut quiet_since: Option<f64> = None;
        let mut cutoff_time = (4 * n) as f64 * sub;
        for k in 0..=4 * n {
            let t = k as f64 * sub;
            let p = dissipation_kernel(t, spec, mass)?;
            let v = noise_kernel(t, spec, mass)?;
            peak = peak.max(p.abs()).max(v.abs());
            pi_k.push(p);
            nu_k.push(v);
            let floor = (1e-14 * peak).max(1e-12);
            if p.abs() < floor && v.abs() < floor && t > window {
                let since = *quiet_since.get_or_insert(t);
                if t - since >= window {
                    cutoff_time = since;
                    break;
                }
            } else {
                quiet_since = None;
            }
        }
        let first_zero = pi_k.len().min(
            (cutoff_time / sub).round() as usize + 1,
        );
        pi_k.truncate(first_zero);
        nu_k.truncate(first_zero);
        let pi_at = |k: usize| pi_k.get(k).copied().unwrap_or(0.0);
        let nu_at = |k: usize| nu_k.get(k).copied().unwrap_or(0.0);

        let mut tab = CoefficientTable {
            step,
            omega_shift_sq: vec![0.0; n + 1],
            gamma_n: vec![0.0; n + 1],
            d_n: vec![0.0; n + 1],
            f_n: vec![0.0; n + 1],
            counterterm: match spec.frequency_shift {
                FrequencyShift::Renormalized => shift_counterterm(spec, mass)?,
                FrequencyShift::Bare => 0.0,
            },
            kernel_cutoff_time: cutoff_time,
        };
        let (mut a, mut b, mut c, mut d) = (0.0, 0.0, 0.0, 0.0);
        for k in 0..n {
            let mut cp = 0.0;
            let mut sp = 0.0;
            let mut cn = 0.0;
            let mut sn = 0.0;
            for (w, j) in [1.0, 4.0, 2.0, 4.0, 1.0].iter().zip(0..5) {
                let i = 4 * k + j;
                let t = i as f64 * sub;
                let (s, co) = (wn * t).sin_cos();
                let p = pi_at(i);
                let v = nu_at(i);
                cp += w * co * p;
                sp += w * s * p;
                cn += w * co * v;
                sn += w * s * v;
            }
            let h12 = step / 12.0;
            a += h12 * cp;
            b += h12 * sp;
            c += h12 * cn;
            d += h12 * sn;
            tab.omega_shift_sq[k + 1] = -2.0 / mass * a;
            tab.gamma_n[k + 1] = b / (mass * wn);
            tab.d_n[k + 1] = c;
            tab.f_n[k + 1] = -d / (mass * wn);
        }
        Ok(tab)
    }

    /// Table whose nodes contain every RK4 stage time for step `dt`.
    pub fn for_step(
        spec: &BathSpec,
        freqs: &EffectiveFrequencies,
        mass: f64,
        t_max: f64,
        dt: f64,
    ) -> Result<Self> {
        let bound = Self::resolving_step(spec, freqs);
        let mut step = 0.5 * dt;
        while step > bound * (1.0 + 1e-12) {
            step *= 0.5;
        }
        Self::build(spec, freqs, mass, t_max, step)
    }

    pub fn len(&self) -> usize {
        self.gamma_n.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma_n.is_empty()
    }

    pub fn t_max(&self) -> f64 {
        (self.len() - 1) as f64 * self.step
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.step
    }

    fn node(&self, k: usize) -> Coefficients {
        Coefficients {
            omega_shift_sq: self.omega_shift_sq[k],
            gamma_n: self.gamma_n[k],
            d_n: self.d_n[k],
            f_n: self.f_n[k],
        }
    }

    /// Coefficients at time t: exact on nodes, cubic Lagrange in between.
    pub fn at(&self, t: f64) -> Result<Coefficients> {
        let t_max = self.t_max();
        let slack = 1e-9 * self.step;
        if !(t >= -slack && t <= t_max + slack) {
            return Err(Error::TimeOutOfRange { t, t_max });
        }
        let x = (t / self.step).clamp(0.0, (self.len() - 1) as f64);
        let k = x.round();
        if (x - k).abs() < 1e-9 {
            return Ok(self.node(k as usize));
        }
        let last = self.len() - 1;
        if last < 3 {
            // Too few nodes for a cubic; fall back to linear.
            let i = x.floor() as usize;
            let u = x - i as f64;
            let lerp = |v: &[f64]| v[i] * (1.0 - u) + v[i + 1] * u;
            return Ok(Coefficients {
                omega_shift_sq: lerp(&self.omega_shift_sq),
                gamma_n: lerp(&self.gamma_n),
                d_n: lerp(&self.d_n),
                f_n: lerp(&self.f_n),
            });
        }
        let i0 = (x.floor() as isize - 1).clamp(0, last as isize - 3) as usize;
        let u = x - i0 as f64;
        let w = [
            -(u - 1.0) * (u - 2.0) * (u - 3.0) / 6.0,
            u * (u - 2.0) * (u - 3.0) / 2.0,
            -u * (u - 1.0) * (u - 3.0) / 2.0,
            u * (u - 1.0) * (u - 2.0) / 6.0,
        ];
        let cubic = |v: &[f64]| (0..4).map(|j| w[j] * v[i0 + j]).sum::<f64>();
        Ok(Coefficients {
            omega_shift_sq: cubic(&self.omega_shift_sq),
            gamma_n: cubic(&self.gamma_n),
            d_n: cubic(&self.d_n),
            f_n: cubic(&self.f_n),
        })
    }

    /// Largest |Ω̄²_N(t)| over the table, drift counterterm included.
    pub fn max_effective_frequency_sq(&self, omega_n: f64) -> f64 {
        self.omega_shift_sq
            .iter()
            .map(|s| (omega_n * omega_n + s + self.counterterm).abs())
            .fold(0.0, f64::max)
    }

    /// Rows of (t, Ω̃², γ, D, f) for CSV export.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "omega_shift_sq", "gamma_n", "d_n", "f_n"])?;
        for k in 0..self.len() {
            w.write_record([
                crate::fmt_num(self.time(k)),
                crate::fmt_num(self.omega_shift_sq[k]),
                crate::fmt_num(self.gamma_n[k]),
                crate::fmt_num(self.d_n[k]),
                crate::fmt_num(self.f_n[k]),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}
