//! Covariance equations of motion in Lyapunov and block form, and their integration.

pub mod blocks;

use nalgebra::DMatrix;

use crate::bath::{CoefficientTable, Coefficients};
use crate::error::{Error, Result};
use crate::linalg::heisenberg_min_eigenvalue;
use crate::model::EffectiveFrequencies;

pub use blocks::{Block, BlockKind, BlockSystem};

/// Violations of V + (i/2)σ ≥ 0 smaller than this are integration noise.
pub const HEISENBERG_SLACK: f64 = 1e-9;

/// Courant-like factor: dt·ω_max must stay below it.
pub const STEP_FACTOR: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    Transformed,
    Bare,
}

impl Basis {
    pub fn name(self) -> &'static str {
        match self {
            Basis::Transformed => "transformed",
            Basis::Bare => "bare",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceState {
    pub time: f64,
    pub matrix: DMatrix<f64>,
    pub basis: Basis,
}

impl CovarianceState {
    pub fn new(time: f64, matrix: DMatrix<f64>, basis: Basis) -> Self {
        CovarianceState {
            time,
            matrix,
            basis,
        }
    }

    pub fn n_modes(&self) -> usize {
        self.matrix.nrows() / 2
    }

    pub fn expect_basis(&self, basis: Basis) -> Result<()> {
        if self.basis != basis {
            return Err(Error::BasisMismatch {
                expected: basis.name(),
                found: self.basis.name(),
            });
        }
        Ok(())
    }

    pub fn asymmetry(&self) -> f64 {
        (&self.matrix - self.matrix.transpose()).amax()
    }

    pub fn heisenberg_min_eigenvalue(&self) -> f64 {
        heisenberg_min_eigenvalue(&self.matrix)
    }

    pub fn is_physical(&self) -> bool {
        self.heisenberg_min_eigenvalue() >= -HEISENBERG_SLACK
    }
}

/// Upper-triangle (i ≤ j) index pairs in row-major order.
pub fn upper_triangle(dim: usize) -> Vec<(usize, usize)> {
    (0..dim).flat_map(|i| (i..dim).map(move |j| (i, j))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[default]
    Lyapunov,
    Block,
}

/// 2×2 drift blocks, one per transformed mode.
#[derive(Debug, Clone, PartialEq)]
pub struct Drift {
    pub blocks: Vec<[[f64; 2]; 2]>,
}

impl Drift {
    pub fn to_matrix(&self) -> DMatrix<f64> {
        let n = self.blocks.len();
        let mut a = DMatrix::zeros(2 * n, 2 * n);
        for (k, b) in self.blocks.iter().enumerate() {
            for r in 0..2 {
                for c in 0..2 {
                    a[(2 * k + r, 2 * k + c)] = b[r][c];
                }
            }
        }
        a
    }
}

/// Drift and diffusion generator for one parameter point.
#[derive(Debug, Clone, Copy)]
pub struct Generator<'a> {
    pub n_modes: usize,
    pub mass: f64,
    pub freqs: EffectiveFrequencies,
    pub table: &'a CoefficientTable,
}

impl<'a> Generator<'a> {
    pub fn new(
        n_modes: usize,
        mass: f64,
        freqs: EffectiveFrequencies,
        table: &'a CoefficientTable,
    ) -> Self {
        Generator {
            n_modes,
            mass,
            freqs,
            table,
        }
    }

    pub fn coefficients(&self, t: f64) -> Result<Coefficients> {
        self.table.at(t)
    }

    /// Ω̄²_N(t) as it enters the drift.
    pub fn damped_frequency_sq(&self, c: &Coefficients) -> f64 {
        self.freqs.omega_n * self.freqs.omega_n + c.omega_shift_sq + self.table.counterterm
    }

    pub fn drift(&self, t: f64) -> Result<Drift> {
        let c = self.coefficients(t)?;
        Ok(self.drift_from(&c))
    }

    fn drift_from(&self, c: &Coefficients) -> Drift {
        let m = self.mass;
        let wf2 = self.freqs.omega_f * self.freqs.omega_f;
        let mut blocks = vec![[[0.0, 1.0 / m], [-m * wf2, 0.0]]; self.n_modes];
        blocks[self.n_modes - 1] = [
            [0.0, 1.0 / m],
            [-m * self.damped_frequency_sq(c), -2.0 * c.gamma_n],
        ];
        Drift { blocks }
    }

    pub fn drift_matrix(&self, t: f64) -> Result<DMatrix<f64>> {
        Ok(self.drift(t)?.to_matrix())
    }

    pub fn diffusion_matrix(&self, t: f64) -> Result<DMatrix<f64>> {
        let c = self.coefficients(t)?;
        Ok(self.diffusion_from(&c))
    }

    fn diffusion_from(&self, c: &Coefficients) -> DMatrix<f64> {
        let d = 2 * self.n_modes;
        let mut m = DMatrix::zeros(d, d);
        m[(d - 2, d - 1)] = -c.f_n;
        m[(d - 1, d - 2)] = -c.f_n;
        m[(d - 1, d - 1)] = 2.0 * c.d_n;
        m
    }

    /// Largest step admitted by the stability bound.
    pub fn max_step(&self) -> f64 {
        let w = self
            .freqs
            .omega_n
            .max(self.freqs.omega_f)
            .max(self.table.max_effective_frequency_sq(self.freqs.omega_n).sqrt());
        STEP_FACTOR / w
    }

    /// A·V + V·Aᵀ + Dm using the block-diagonal drift.
    pub fn lyapunov_rhs(&self, t: f64, v: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let c = self.coefficients(t)?;
        let drift = self.drift_from(&c);
        let mut out = lyapunov_product(&drift, v);
        let d = 2 * self.n_modes;
        out[(d - 2, d - 1)] -= c.f_n;
        out[(d - 1, d - 2)] -= c.f_n;
        out[(d - 1, d - 1)] += 2.0 * c.d_n;
        Ok(out)
    }

    pub fn build_block_system(&self) -> BlockSystem {
        BlockSystem::derive(self.n_modes)
    }

    /// Fixed-step RK4 from `v0` to `t_end`, keeping every `stride`-th step.
    pub fn evolve(
        &self,
        v0: &CovarianceState,
        dt: f64,
        t_end: f64,
        stride: usize,
        method: Method,
    ) -> Result<Trajectory> {
        v0.expect_basis(Basis::Transformed)?;
        if v0.n_modes() != self.n_modes {
            return Err(Error::WrongModeCount {
                expected: self.n_modes,
                found: v0.n_modes(),
            });
        }
        let steps = step_count(v0.time, t_end, dt)?;
        let bound = self.max_step();
        if dt > bound {
            return Err(Error::StepTooLarge { dt, bound });
        }
        let stride = stride.max(1);
        let traj = match method {
            Method::Lyapunov => self.evolve_lyapunov(v0, dt, steps, stride)?,
            Method::Block => self.evolve_blocks(v0, dt, steps, stride)?,
        };
        Ok(traj.checked())
    }

    fn evolve_lyapunov(
        &self,
        v0: &CovarianceState,
        dt: f64,
        steps: usize,
        stride: usize,
    ) -> Result<Trajectory> {
        let t0 = v0.time;
        let mut v = v0.matrix.clone();
        let mut traj = Trajectory::with_capacity(steps / stride + 2);
        traj.push(t0, v.clone());
        for k in 0..steps {
            let t = t0 + k as f64 * dt;
            let h = 0.5 * dt;
            let k1 = self.lyapunov_rhs(t, &v)?;
            let k2 = self.lyapunov_rhs(t + h, &(&v + &k1 * h))?;
            let k3 = self.lyapunov_rhs(t + h, &(&v + &k2 * h))?;
            let k4 = self.lyapunov_rhs(t + dt, &(&v + &k3 * dt))?;
            v += (k1 + (k2 + k3) * 2.0 + k4) * (dt / 6.0);
            // Keep the iterate exactly symmetric.
            for i in 0..v.nrows() {
                for j in i + 1..v.ncols() {
                    let s = 0.5 * (v[(i, j)] + v[(j, i)]);
                    v[(i, j)] = s;
                    v[(j, i)] = s;
                }
            }
            if (k + 1) % stride == 0 || k + 1 == steps {
                traj.push(t0 + (k + 1) as f64 * dt, v.clone());
            }
        }
        Ok(traj)
    }

    fn evolve_blocks(
        &self,
        v0: &CovarianceState,
        dt: f64,
        steps: usize,
        stride: usize,
    ) -> Result<Trajectory> {
        let system = self.build_block_system();
        let t0 = v0.time;
        let mut x: Vec<Vec<f64>> = system
            .blocks
            .iter()
            .map(|b| b.elements.iter().map(|&(i, j)| v0.matrix[(i, j)]).collect())
            .collect();
        let mut traj = Trajectory::with_capacity(steps / stride + 2);
        traj.push(t0, system.assemble(&x, self.n_modes));
        for k in 0..steps {
            let t = t0 + k as f64 * dt;
            let c = [
                self.coefficients(t)?,
                self.coefficients(t + 0.5 * dt)?,
                self.coefficients(t + dt)?,
            ];
            let stages: Vec<_> = c.iter().map(|c| self.block_parameters(c)).collect();
            for (b, xb) in system.blocks.iter().zip(x.iter_mut()) {
                blocks::rk4_step(b, xb, &stages, dt);
            }
            if (k + 1) % stride == 0 || k + 1 == steps {
                traj.push(t0 + (k + 1) as f64 * dt, system.assemble(&x, self.n_modes));
            }
        }
        Ok(traj)
    }

    fn block_parameters(&self, c: &Coefficients) -> blocks::BlockParameters {
        blocks::BlockParameters {
            mass: self.mass,
            omega_f_sq: self.freqs.omega_f * self.freqs.omega_f,
            omega_bar_sq: self.damped_frequency_sq(c),
            gamma: 2.0 * c.gamma_n,
            f: c.f_n,
            d: c.d_n,
        }
    }

    /// Conserved combinations: one per free mode and two per free pair, (N−1)² in total.
    pub fn constants_of_motion(&self, v: &CovarianceState) -> Result<Vec<f64>> {
        constants_of_motion(v, &self.freqs, self.mass)
    }
}

pub(crate) fn step_count(t0: f64, t_end: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "dt",
            value: dt,
            reason: "must be positive",
        });
    }
    let span = t_end - t0;
    if span.is_nan() || span < 0.0 {
        return Err(Error::InvalidParameter {
            name: "t_max",
            value: t_end,
            reason: "must not precede the initial time",
        });
    }
    let n = (span / dt).round();
    if (n * dt - span).abs() > 1e-9 * span.max(1.0) {
        return Err(Error::InvalidParameter {
            name: "t_max",
            value: t_end,
            reason: "must be an integer multiple of dt",
        });
    }
    Ok(n as usize)
}

/// A·V + V·Aᵀ for block-diagonal A given as 2×2 blocks.
pub fn lyapunov_product(drift: &Drift, v: &DMatrix<f64>) -> DMatrix<f64> {
    let d = v.nrows();
    let mut av = DMatrix::zeros(d, d);
    for (k, b) in drift.blocks.iter().enumerate() {
        let (r0, r1) = (2 * k, 2 * k + 1);
        for j in 0..d {
            av[(r0, j)] = b[0][0] * v[(r0, j)] + b[0][1] * v[(r1, j)];
            av[(r1, j)] = b[1][0] * v[(r0, j)] + b[1][1] * v[(r1, j)];
        }
    }
    let avt = av.transpose();
    av + avt
}

pub fn constants_of_motion(
    v: &CovarianceState,
    freqs: &EffectiveFrequencies,
    mass: f64,
) -> Result<Vec<f64>> {
    v.expect_basis(Basis::Transformed)?;
    let n = v.n_modes();
    let m = &v.matrix;
    let k = mass * freqs.omega_f * freqs.omega_f;
    let mut out = Vec::with_capacity((n - 1) * (n - 1));
    for i in 0..n - 1 {
        let (qi, pi) = (2 * i, 2 * i + 1);
        out.push(k * m[(qi, qi)] + m[(pi, pi)] / mass);
        for j in i + 1..n - 1 {
            let (qj, pj) = (2 * j, 2 * j + 1);
            out.push(k * m[(qi, qj)] + m[(pi, pj)] / mass);
            out.push(m[(qi, pj)] - m[(pi, qj)]);
        }
    }
    Ok(out)
}

/// Closed-form (V⁻, V₁₂) orbit of a relaxation-free block.
pub fn analytic_free_block(t: f64, v_minus_0: f64, v12_0: f64, omega_f: f64) -> (f64, f64) {
    let (s, c) = (2.0 * omega_f * t).sin_cos();
    (
        v_minus_0 * c + 2.0 * omega_f * v12_0 * s,
        v12_0 * c - v_minus_0 / (2.0 * omega_f) * s,
    )
}

/// Exact orbit of one relaxation-free mode's (qq, qp, pp) elements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeBlockSolution {
    pub v_plus: f64,
    pub v_minus_0: f64,
    pub v12_0: f64,
    pub omega_f: f64,
    pub mass: f64,
}

impl FreeBlockSolution {
    /// From the initial (qq, qp, pp) elements of a free mode.
    pub fn new(vqq: f64, vqp: f64, vpp: f64, omega_f: f64, mass: f64) -> Self {
        let k = mass * omega_f * omega_f;
        FreeBlockSolution {
            v_plus: k * vqq + vpp / mass,
            v_minus_0: k * vqq - vpp / mass,
            v12_0: vqp,
            omega_f,
            mass,
        }
    }

    /// (qq, qp, pp) at time t.
    pub fn at(&self, t: f64) -> (f64, f64, f64) {
        let (vm, v12) = analytic_free_block(t, self.v_minus_0, self.v12_0, self.omega_f);
        let k = self.mass * self.omega_f * self.omega_f;
        let vqq = (self.v_plus + vm) / (2.0 * k);
        let vpp = (self.v_plus - vm) * self.mass / 2.0;
        (vqq, v12, vpp)
    }
}

/// Sampled trajectory in the transformed basis.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DMatrix<f64>>,
    /// Set when some sample violated the Heisenberg bound by more than the slack.
    pub nonphysical: bool,
}

impl Trajectory {
    fn with_capacity(n: usize) -> Self {
        Trajectory {
            times: Vec::with_capacity(n),
            states: Vec::with_capacity(n),
            nonphysical: false,
        }
    }

    fn push(&mut self, t: f64, v: DMatrix<f64>) {
        self.times.push(t);
        self.states.push(v);
    }

    fn checked(mut self) -> Self {
        let worst = self
            .states
            .iter()
            .map(heisenberg_min_eigenvalue)
            .fold(f64::INFINITY, f64::min);
        if worst < -HEISENBERG_SLACK {
            log::warn!("trajectory violates the Heisenberg bound: min eigenvalue {worst:e}");
            self.nonphysical = true;
        }
        self
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn state(&self, k: usize) -> CovarianceState {
        CovarianceState::new(self.times[k], self.states[k].clone(), Basis::Transformed)
    }

    pub fn last(&self) -> CovarianceState {
        self.state(self.len() - 1)
    }

    /// Mean covariance over samples with t ≥ t_end − window.
    pub fn late_average(&self, window: f64) -> DMatrix<f64> {
        let t_end = *self.times.last().expect("nonempty trajectory");
        let picked: Vec<_> = self
            .times
            .iter()
            .zip(&self.states)
            .filter(|(t, _)| **t >= t_end - window - 1e-12)
            .map(|(_, v)| v)
            .collect();
        let mut acc = DMatrix::zeros(self.states[0].nrows(), self.states[0].ncols());
        for v in &picked {
            acc += *v;
        }
        acc / picked.len() as f64
    }

    /// CSV with t and the upper-triangle elements V_ij (1-based names).
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let dim = self.states.first().map_or(0, |v| v.nrows());
        let pairs = upper_triangle(dim);
        let mut header = vec!["t".to_string()];
        header.extend(pairs.iter().map(|(i, j)| format!("V_{}_{}", i + 1, j + 1)));
        w.write_record(&header)?;
        for (t, v) in self.times.iter().zip(&self.states) {
            let mut row = vec![crate::fmt_num(*t)];
            row.extend(pairs.iter().map(|&(i, j)| crate::fmt_num(v[(i, j)])));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Averaging window spanning five periods of the 2Ω_F oscillation.
pub fn stationary_window(freqs: &EffectiveFrequencies) -> f64 {
    5.0 * std::f64::consts::PI / freqs.omega_f
}
