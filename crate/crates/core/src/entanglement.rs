//! Partial-transpose negativity, the three-mode squeezing criterion and threshold formulas.

use nalgebra::{Complex, DMatrix, Matrix2};

use crate::bath::mean_occupation;
use crate::dynamics::{Basis, CovarianceState};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_min_eigenvalue, symplectic_form};
use crate::model::{expand_to_phase_space, mode_transform};

pub use crate::linalg::symplectic_form as symplectic;

/// V′ = Sᵀ·V·S.
pub fn to_bare_basis(v: &CovarianceState, s: &DMatrix<f64>) -> Result<CovarianceState> {
    v.expect_basis(Basis::Transformed)?;
    Ok(CovarianceState::new(v.time, s.transpose() * &v.matrix * s, Basis::Bare))
}

/// V = S·V′·Sᵀ.
pub fn to_transformed_basis(v: &CovarianceState, s: &DMatrix<f64>) -> Result<CovarianceState> {
    v.expect_basis(Basis::Bare)?;
    Ok(CovarianceState::new(v.time, s * &v.matrix * s.transpose(), Basis::Transformed))
}

fn phase_space_transform(n: usize) -> Result<DMatrix<f64>> {
    Ok(expand_to_phase_space(&mode_transform(n)?))
}

/// Minimum eigenvalue of Γ_j V′ Γ_j + (i/2)σ, with Γ_j flipping mode j's momentum (0-based j).
pub fn negativity(v_bare: &CovarianceState, j: usize) -> Result<f64> {
    v_bare.expect_basis(Basis::Bare)?;
    let n = v_bare.n_modes();
    if j >= n {
        return Err(Error::IndexError { i: j, j, n });
    }
    let mut m = v_bare.matrix.clone();
    let p = 2 * j + 1;
    for k in 0..2 * n {
        if k != p {
            m[(p, k)] = -m[(p, k)];
            m[(k, p)] = -m[(k, p)];
        }
    }
    let half_sigma = symplectic_form(n) * 0.5;
    Ok(hermitian_min_eigenvalue(&m, &half_sigma))
}

/// η_j for every transposed mode.
pub fn negativities(v_bare: &CovarianceState) -> Result<Vec<f64>> {
    (0..v_bare.n_modes()).map(|j| negativity(v_bare, j)).collect()
}

/// Parameters of the local squeezing transformation and their intermediates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezeMatchParams {
    pub m1: Complex<f64>,
    pub m2: Complex<f64>,
    pub m3: f64,
    pub m4: f64,
    pub f1: Complex<f64>,
    pub f2: f64,
    pub f3: f64,
    pub h1: f64,
    pub h2: f64,
    pub r1: f64,
    pub r2: f64,
    pub phi: f64,
    pub theta: f64,
    /// False when |m1| = 0 and φ fell back to 0.
    pub phi_defined: bool,
    /// False when |f1| = 0 and θ fell back to 0.
    pub theta_defined: bool,
}

/// Principal-branch half angle, 0 at the origin.
fn half_arg(z: Complex<f64>) -> (f64, bool) {
    if z.norm() == 0.0 {
        (0.0, false)
    } else {
        // Adding +0.0 maps a −0.0 imaginary part to +0.0, keeping arg in (−π, π].
        (0.5 * (z.im + 0.0).atan2(z.re), true)
    }
}

pub fn squeeze_match_params(v_bare: &CovarianceState) -> Result<SqueezeMatchParams> {
    v_bare.expect_basis(Basis::Bare)?;
    if v_bare.n_modes() != 3 {
        return Err(Error::WrongModeCount {
            expected: 3,
            found: v_bare.n_modes(),
        });
    }
    let v = &v_bare.matrix;
    let m1 = Complex::new(0.5 * (v[(0, 0)] - v[(1, 1)]), -v[(0, 1)]);
    let m2 = Complex::new(v[(0, 2)] - v[(1, 3)], -(v[(0, 3)] + v[(1, 2)]));
    let m3 = v[(0, 0)] + v[(1, 1)];
    let m4 = v[(0, 2)] + v[(1, 3)];
    let a1 = m1.norm();
    if m3 <= 2.0 * a1 {
        return Err(Error::UnphysicalMoments {
            m3,
            two_abs_m1: 2.0 * a1,
        });
    }
    let (phi, phi_defined) = half_arg(m1);
    let r1 = 0.25 * ((m3 - 2.0 * a1) / (m3 + 2.0 * a1)).ln();
    let (u1, v1) = (r1.cosh(), r1.sinh());
    let e = |x: f64| Complex::from_polar(1.0, x);
    let f1 = m2 * u1 * u1 + m2.conj() * e(4.0 * phi) * v1 * v1 + e(2.0 * phi) * (2.0 * m4 * u1 * v1);
    let f2 = (m2 * e(-2.0 * phi) + m2.conj() * e(2.0 * phi)).re * u1 * v1 + m4 * (1.0 + 2.0 * v1 * v1);
    let f3 = 4.0 * a1 * u1 * v1 + m3 * (1.0 + 2.0 * v1 * v1);
    let (theta, theta_defined) = half_arg(f1);
    let h1 = f1.norm() - f2;
    let h2 = -(f1.norm() + f2);
    let r2 = 0.25 * ((h2.abs() + f3) / (h1.abs() + f3)).ln();
    Ok(SqueezeMatchParams {
        m1,
        m2,
        m3,
        m4,
        f1,
        f2,
        f3,
        h1,
        h2,
        r1,
        r2,
        phi,
        theta,
        phi_defined,
        theta_defined,
    })
}

/// Real 2×2 map (q, p) ↦ (q̃, p̃) of ã = α·a + β·a†, with a = (q + ip)/√2.
fn bogoliubov(alpha: Complex<f64>, beta: Complex<f64>) -> Matrix2<f64> {
    let c1 = alpha + beta;
    let c2 = Complex::<f64>::i() * (alpha - beta);
    Matrix2::new(c1.re, c2.re, c1.im, c2.im)
}

/// One local symplectic map per mode, acting on bare-basis quadratures.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalTransform {
    pub blocks: Vec<Matrix2<f64>>,
}

impl LocalTransform {
    /// Two-stage local squeezing: (r1, φ) then (r2, θ), with modes 2 and 3 treated alike.
    pub fn from_params(p: &SqueezeMatchParams) -> Self {
        let (u1, v1, u2, v2) = (p.r1.cosh(), p.r1.sinh(), p.r2.cosh(), p.r2.sinh());
        let e = |x: f64| Complex::from_polar(1.0, x);
        let d = p.phi - p.theta;
        let alpha1 = e(p.theta) * (u1 * u2 - e(2.0 * d) * (v1 * v2));
        let beta1 = e(-p.theta) * (u1 * v2 - e(-2.0 * d) * (v1 * u2));
        let alpha2 = e(p.theta) * (u1 * u2 + e(2.0 * d) * (v1 * v2));
        let beta2 = -(e(-p.theta) * (u1 * v2 + e(-2.0 * d) * (v1 * u2)));
        let first = bogoliubov(alpha1, beta1);
        let rest = bogoliubov(alpha2, beta2);
        LocalTransform {
            blocks: vec![first, rest, rest],
        }
    }

    /// Same map on every mode.
    pub fn common(l: Matrix2<f64>, n_modes: usize) -> Self {
        LocalTransform {
            blocks: vec![l; n_modes],
        }
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.blocks.len();
        let mut l = DMatrix::zeros(2 * n, 2 * n);
        for (k, b) in self.blocks.iter().enumerate() {
            for r in 0..2 {
                for c in 0..2 {
                    l[(2 * k + r, 2 * k + c)] = b[(r, c)];
                }
            }
        }
        l
    }

    /// Second moments of the transformed operators: L·V′·Lᵀ.
    pub fn apply(&self, v_bare: &DMatrix<f64>) -> DMatrix<f64> {
        let l = self.matrix();
        &l * v_bare * l.transpose()
    }
}

/// Permutation-symmetric correlation matrix of the locally transformed modes
/// (½ convention: a, b are q and p variances, c, d the cross covariances).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GMatrix {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    /// Largest deviation of the transformed moments from the four-parameter pattern.
    pub pattern_defect: f64,
}

impl GMatrix {
    /// 6×6 matrix in the ordering (q₁, p₁, q₂, p₂, q₃, p₃).
    pub fn assemble(&self) -> DMatrix<f64> {
        DMatrix::from_fn(6, 6, |i, j| match (i % 2, j % 2, i / 2 == j / 2) {
            (0, 0, true) => self.a,
            (1, 1, true) => self.b,
            (0, 0, false) => self.c,
            (1, 1, false) => self.d,
            _ => 0.0,
        })
    }
}

/// Four-parameter fit of L·V′·Lᵀ.
pub fn g_matrix(v_bare: &CovarianceState, transform: &LocalTransform) -> Result<GMatrix> {
    v_bare.expect_basis(Basis::Bare)?;
    if v_bare.n_modes() != 3 || transform.blocks.len() != 3 {
        return Err(Error::WrongModeCount {
            expected: 3,
            found: v_bare.n_modes(),
        });
    }
    let w = transform.apply(&v_bare.matrix);
    let diag = |o: usize| (0..3).map(|k| w[(2 * k + o, 2 * k + o)]).sum::<f64>() / 3.0;
    let off = |o: usize| {
        [(0, 1), (0, 2), (1, 2)]
            .iter()
            .map(|&(i, j)| w[(2 * i + o, 2 * j + o)])
            .sum::<f64>()
            / 3.0
    };
    let mut g = GMatrix {
        a: diag(0),
        b: diag(1),
        c: off(0),
        d: off(1),
        pattern_defect: 0.0,
    };
    g.pattern_defect = (w - g.assemble()).amax();
    Ok(g)
}

/// Closed-form G from the squeeze parameters, kept for comparison with the moment-based G.
pub fn g_matrix_closed_form(p: &SqueezeMatchParams) -> GMatrix {
    let (ep, em) = ((2.0 * p.r2).exp(), (-2.0 * p.r2).exp());
    GMatrix {
        a: -2.0 * p.f3 * ep,
        b: -2.0 * p.f3 * em,
        c: 2.0 * p.h1 * ep,
        d: 2.0 * p.h2 * em,
        pattern_defect: f64::NAN,
    }
}

fn check_pair(i: usize, j: usize) -> Result<()> {
    if i == j || i >= 3 || j >= 3 {
        return Err(Error::IndexError { i, j, n: 3 });
    }
    Ok(())
}

/// ⟨(ΔX̃_i)²⟩ + ⟨(ΔỸ_j)²⟩ from G (0-based collective indices, i ≠ j).
pub fn combined_variance(g: &GMatrix, i: usize, j: usize) -> Result<f64> {
    check_pair(i, j)?;
    let var_x = if i == 2 { g.a + 2.0 * g.c } else { g.a - g.c };
    let var_y = if j == 2 { g.b + 2.0 * g.d } else { g.b - g.d };
    Ok(var_x + var_y)
}

/// All ordered pairs (i, j), i ≠ j, of the three collective modes.
pub fn index_pairs() -> [(usize, usize); 6] {
    [(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)]
}

/// Collective quadrature block k of a bare covariance: (T V′ Tᵀ) restricted to mode k.
fn collective_block(v_transformed: &DMatrix<f64>, k: usize) -> Matrix2<f64> {
    Matrix2::new(
        v_transformed[(2 * k, 2 * k)],
        v_transformed[(2 * k, 2 * k + 1)],
        v_transformed[(2 * k + 1, 2 * k)],
        v_transformed[(2 * k + 1, 2 * k + 1)],
    )
}

/// Best common local squeeze for one (X̃_i, Ỹ_j) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalSqueeze {
    pub value: f64,
    /// Unit-determinant map applied to every mode.
    pub transform: Matrix2<f64>,
}

/// Minimises Var(X̃_i) + Var(Ỹ_j) over a common local symplectic map L.
///
/// With P, Q the collective blocks of modes i and j the minimum is
/// 2·sqrt(det Q · λ_min(Q⁻¹P)).
pub fn optimal_combined_variance(v_bare: &CovarianceState, i: usize, j: usize) -> Result<OptimalSqueeze> {
    v_bare.expect_basis(Basis::Bare)?;
    if v_bare.n_modes() != 3 {
        return Err(Error::WrongModeCount {
            expected: 3,
            found: v_bare.n_modes(),
        });
    }
    check_pair(i, j)?;
    let s = phase_space_transform(3)?;
    let w = &s * &v_bare.matrix * s.transpose();
    optimal_from_blocks(&collective_block(&w, i), &collective_block(&w, j))
}

fn optimal_from_blocks(p: &Matrix2<f64>, q: &Matrix2<f64>) -> Result<OptimalSqueeze> {
    let det_q = q.determinant();
    let det_p = p.determinant();
    if !(det_q > 0.0 && det_p > 0.0) {
        return Err(Error::UnphysicalMoments {
            m3: det_q.min(det_p),
            two_abs_m1: 0.0,
        });
    }
    // det(P − λQ) = det_q λ² − B λ + det_p.
    let b = p[(0, 0)] * q[(1, 1)] + p[(1, 1)] * q[(0, 0)] - 2.0 * p[(0, 1)] * q[(0, 1)];
    let disc = (b * b - 4.0 * det_q * det_p).max(0.0);
    // Stable smaller root.
    let lam = 2.0 * det_p / (b + disc.sqrt());
    let value = 2.0 * (det_q * lam).sqrt();

    let m = p - q * lam;
    let e = if m[(0, 0)].abs() + m[(0, 1)].abs() >= m[(1, 0)].abs() + m[(1, 1)].abs() {
        nalgebra::Vector2::new(-m[(0, 1)], m[(0, 0)])
    } else {
        nalgebra::Vector2::new(-m[(1, 1)], m[(1, 0)])
    };
    let e = if e.norm() == 0.0 {
        nalgebra::Vector2::new(1.0, 0.0)
    } else {
        e.normalize()
    };
    let epe = e.dot(&(p * e));
    let eqe = e.dot(&(q * e));
    let t = (det_q / (epe * eqe)).powf(0.25);
    let u = e * t;
    let k = nalgebra::Vector2::new(-u[1], u[0]);
    let qinv = q.try_inverse().expect("positive determinant");
    let qk = qinv * k;
    let w = qk / k.dot(&qk);
    Ok(OptimalSqueeze {
        value,
        transform: Matrix2::new(u[0], u[1], w[0], w[1]),
    })
}

/// Negativities and squeezing diagnostics at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct EntanglementReport {
    pub time: f64,
    /// η_j for j = 1..N (stored 0-based).
    pub eta: Vec<f64>,
    /// ((i, j), optimal combined variance) for the three-mode case, else empty.
    pub combined_variances: Vec<((usize, usize), f64)>,
    pub best_variance: Option<f64>,
    pub params: Option<SqueezeMatchParams>,
}

impl EntanglementReport {
    pub fn min_eta(&self) -> f64 {
        self.eta.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Full report for a transformed-basis covariance.
pub fn entanglement_report(v: &CovarianceState) -> Result<EntanglementReport> {
    let s = phase_space_transform(v.n_modes())?;
    let bare = to_bare_basis(v, &s)?;
    let eta = negativities(&bare)?;
    let (combined_variances, best_variance, params) = if v.n_modes() == 3 {
        let mut cv = Vec::with_capacity(6);
        for (i, j) in index_pairs() {
            let p = collective_block(&v.matrix, i);
            let q = collective_block(&v.matrix, j);
            cv.push(((i, j), optimal_from_blocks(&p, &q)?.value));
        }
        let best = cv.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
        (cv, Some(best), squeeze_match_params(&bare).ok())
    } else {
        (Vec::new(), None, None)
    };
    Ok(EntanglementReport {
        time: v.time,
        eta,
        combined_variances,
        best_variance,
        params,
    })
}

/// V₁₁·V₄₄ − ¼ for two modes in the transformed basis; negative means entangled.
pub fn two_mode_threshold(v: &CovarianceState) -> Result<f64> {
    v.expect_basis(Basis::Transformed)?;
    if v.n_modes() != 2 {
        return Err(Error::WrongModeCount {
            expected: 2,
            found: v.n_modes(),
        });
    }
    Ok(v.matrix[(0, 0)] * v.matrix[(3, 3)] - 0.25)
}

/// r* = ½ ln(2N̄(ω) + 1).
pub fn squeezing_threshold(temperature: f64, omega: f64) -> f64 {
    0.5 * (2.0 * mean_occupation(omega, temperature) + 1.0).ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{ghz_initial_covariance, GhzStateSpec};

    fn vacuum(n: usize, basis: Basis) -> CovarianceState {
        CovarianceState::new(0.0, DMatrix::identity(2 * n, 2 * n) * 0.5, basis)
    }

    fn ghz_bare(r: f64) -> CovarianceState {
        let v = ghz_initial_covariance(&GhzStateSpec { n_modes: 3, r }).unwrap();
        to_bare_basis(&v, &phase_space_transform(3).unwrap()).unwrap()
    }

    #[test]
    fn vacuum_negativity_is_zero() {
        for j in 0..3 {
            assert!(negativity(&vacuum(3, Basis::Bare), j).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn two_mode_squeezed_vacuum() {
        for r in [0.5f64, 1.0, 2.0] {
            let (c, s) = ((2.0 * r).cosh(), (2.0 * r).sinh());
            let m = DMatrix::from_row_slice(
                4,
                4,
                &[c, 0.0, s, 0.0, 0.0, c, 0.0, -s, s, 0.0, c, 0.0, 0.0, -s, 0.0, c],
            ) * 0.5;
            let v = CovarianceState::new(0.0, m, Basis::Bare);
            let expect = 0.5 * ((-2.0 * r).exp() - 1.0);
            for j in 0..2 {
                assert!((negativity(&v, j).unwrap() - expect).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn ghz_bare_is_permutation_symmetric() {
        let v = ghz_bare(1.0).matrix;
        for (a, b) in [(0, 1), (1, 2), (0, 2)] {
            for o in 0..2 {
                assert!((v[(2 * a + o, 2 * a + o)] - v[(2 * b + o, 2 * b + o)]).abs() < 1e-10);
            }
        }
        assert!(v[(0, 2)].abs() > 0.1 && v[(1, 3)].abs() > 0.1);
        let eta = negativities(&ghz_bare(1.0)).unwrap();
        assert!((eta[0] - eta[1]).abs() < 1e-10 && (eta[1] - eta[2]).abs() < 1e-10);
        assert!(eta[0] < 0.0);
    }

    #[test]
    fn bare_round_trip() {
        let s = phase_space_transform(3).unwrap();
        let v = ghz_initial_covariance(&GhzStateSpec { n_modes: 3, r: 0.8 }).unwrap();
        let back = to_transformed_basis(&to_bare_basis(&v, &s).unwrap(), &s).unwrap();
        assert!((&back.matrix - &v.matrix).amax() < 1e-12);
        assert!(to_bare_basis(&back.clone(), &s).is_ok());
        assert!(to_transformed_basis(&v, &s).is_err());
    }

    #[test]
    fn vacuum_match_params() {
        let p = squeeze_match_params(&vacuum(3, Basis::Bare)).unwrap();
        assert_eq!(p.m1.norm(), 0.0);
        assert_eq!(p.m3, 1.0);
        assert_eq!(p.r1, 0.0);
        assert_eq!(p.f2, 0.0);
        assert_eq!(p.h1, p.f1.norm());
        assert_eq!(p.h2, -p.f1.norm());
        assert_eq!(p.r2, 0.0);
        assert!(!p.phi_defined && !p.theta_defined);
    }

    #[test]
    fn single_mode_squeezed_branch() {
        let r: f64 = 0.6;
        let mut m = DMatrix::identity(6, 6) * 0.5;
        m[(0, 0)] = 0.5 * (-2.0 * r).exp();
        m[(1, 1)] = 0.5 * (2.0 * r).exp();
        let p = squeeze_match_params(&CovarianceState::new(0.0, m, Basis::Bare)).unwrap();
        assert!(p.m1.re < 0.0 && p.m1.im == 0.0);
        assert!((p.phi - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!(((2.0 * p.r1).exp() - (-2.0 * r).exp()).abs() < 1e-12);
        // With these parameters the (r1, φ) stage squeezes mode 1 further: e^{-2r} becomes e^{-4r}.
        let w = LocalTransform::from_params(&SqueezeMatchParams { r2: 0.0, theta: 0.0, ..p })
            .apply(&CovarianceState::new(0.0, {
                let mut m = DMatrix::identity(6, 6) * 0.5;
                m[(0, 0)] = 0.5 * (-2.0 * r).exp();
                m[(1, 1)] = 0.5 * (2.0 * r).exp();
                m
            }, Basis::Bare).matrix);
        assert!((w[(0, 0)] - 0.5 * (-4.0 * r).exp()).abs() < 1e-12);
        assert!((w[(1, 1)] - 0.5 * (4.0 * r).exp()).abs() < 1e-12);
        assert!(w[(0, 1)].abs() < 1e-12);
    }

    #[test]
    fn unphysical_moments_rejected() {
        let mut m = DMatrix::identity(6, 6) * 0.5;
        m[(0, 1)] = 0.6;
        m[(1, 0)] = 0.6;
        assert!(matches!(
            squeeze_match_params(&CovarianceState::new(0.0, m, Basis::Bare)),
            Err(Error::UnphysicalMoments { .. })
        ));
    }

    #[test]
    fn local_transforms_are_symplectic() {
        let p = squeeze_match_params(&ghz_bare(1.3)).unwrap();
        for b in LocalTransform::from_params(&p).blocks {
            assert!((b.determinant() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_form_g_is_minus_four_times_moments_on_vacuum() {
        let v = vacuum(3, Basis::Bare);
        let p = squeeze_match_params(&v).unwrap();
        let g = g_matrix(&v, &LocalTransform::from_params(&p)).unwrap();
        let closed = g_matrix_closed_form(&p);
        assert_eq!((g.c, g.d), (0.0, 0.0));
        assert!((closed.a + 4.0 * g.a).abs() < 1e-15 && (closed.b + 4.0 * g.b).abs() < 1e-15);
        assert_eq!(combined_variance(&g, 0, 1).unwrap(), 1.0);
    }

    #[test]
    fn g_reproduces_transformed_moments() {
        for r in [0.3, 1.0, 2.0] {
            let v = ghz_bare(r);
            let o = optimal_combined_variance(&v, 0, 2).unwrap();
            let t = LocalTransform::common(o.transform, 3);
            let g = g_matrix(&v, &t).unwrap();
            assert!(g.pattern_defect < 1e-8, "r={r}: {}", g.pattern_defect);
            let w = t.apply(&v.matrix);
            assert!((g.assemble() - &w).amax() < 1e-8);
            // Permuting modes leaves G unchanged.
            let perm = [2usize, 0, 1];
            let gm = g.assemble();
            for i in 0..6 {
                for j in 0..6 {
                    let (pi, pj) = (2 * perm[i / 2] + i % 2, 2 * perm[j / 2] + j % 2);
                    assert_eq!(gm[(i, j)], gm[(pi, pj)]);
                }
            }
        }
    }

    #[test]
    fn two_stage_transform_breaks_mode_symmetry() {
        // Mode 1 gets a different map than modes 2 and 3, so the moments leave the G pattern.
        let v = ghz_bare(0.3);
        let p = squeeze_match_params(&v).unwrap();
        let g = g_matrix(&v, &LocalTransform::from_params(&p)).unwrap();
        assert!(g.pattern_defect > 1e-2);
    }

    #[test]
    fn combined_variance_indices() {
        let g = GMatrix {
            a: 0.5,
            b: 0.5,
            c: 0.0,
            d: 0.0,
            pattern_defect: 0.0,
        };
        assert!(matches!(combined_variance(&g, 1, 1), Err(Error::IndexError { .. })));
        assert!(matches!(combined_variance(&g, 0, 3), Err(Error::IndexError { .. })));
    }

    #[test]
    fn optimal_squeeze_vacuum_and_ghz() {
        for (i, j) in index_pairs() {
            let o = optimal_combined_variance(&vacuum(3, Basis::Bare), i, j).unwrap();
            assert!((o.value - 1.0).abs() < 1e-14);
        }
        let r1 = entanglement_report(&ghz_initial_covariance(&GhzStateSpec { n_modes: 3, r: 1.0 }).unwrap())
            .unwrap();
        assert!(r1.best_variance.unwrap() < 1.0);
        assert!(r1.min_eta() < 0.0);
    }

    #[test]
    fn optimal_transform_attains_value() {
        let v = ghz_bare(1.2);
        for (i, j) in index_pairs() {
            let o = optimal_combined_variance(&v, i, j).unwrap();
            assert!((o.transform.determinant() - 1.0).abs() < 1e-12);
            let lt = LocalTransform::common(o.transform, 3);
            let w = lt.apply(&v.matrix);
            let g = g_matrix(&v, &lt).unwrap();
            assert!(g.pattern_defect < 1e-8);
            let direct = combined_variance(&g, i, j).unwrap();
            assert!((direct - o.value).abs() < 1e-10, "{direct} vs {}", o.value);
            let _ = w;
        }
    }

    #[test]
    fn optimum_beats_sampled_local_maps() {
        let v = ghz_bare(0.9);
        let o = optimal_combined_variance(&v, 0, 2).unwrap();
        for k in 0..40 {
            let chi = k as f64 * 0.157;
            for s in [-1.5f64, -0.7, -0.2, 0.0, 0.4, 1.1] {
                let rot = Matrix2::new(chi.cos(), chi.sin(), -chi.sin(), chi.cos());
                let sq = Matrix2::new((-s).exp(), 0.0, 0.0, s.exp());
                let g = g_matrix(&v, &LocalTransform::common(sq * rot, 3)).unwrap();
                assert!(combined_variance(&g, 0, 2).unwrap() >= o.value - 1e-12);
            }
        }
    }

    #[test]
    fn monotone_in_r_at_t0() {
        let mut last = f64::INFINITY;
        for k in 0..=15 {
            let r = 0.5 + 0.1 * k as f64;
            let v = ghz_initial_covariance(&GhzStateSpec { n_modes: 3, r }).unwrap();
            let best = entanglement_report(&v).unwrap().best_variance.unwrap();
            assert!(best < last);
            last = best;
        }
    }

    #[test]
    fn matched_parameters_squeeze_ghz_at_t0() {
        let v = ghz_bare(1.0);
        let p = squeeze_match_params(&v).unwrap();
        let g = g_matrix(&v, &LocalTransform::from_params(&p)).unwrap();
        let best = index_pairs()
            .iter()
            .map(|&(i, j)| combined_variance(&g, i, j).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert!(best < 1.0);
        assert!(negativity(&v, 0).unwrap() < 0.0);
    }

    #[test]
    fn two_mode_threshold_values() {
        assert!(two_mode_threshold(&vacuum(2, Basis::Transformed)).unwrap().abs() < 1e-15);
        let v = ghz_initial_covariance(&GhzStateSpec { n_modes: 2, r: 0.7 }).unwrap();
        let x = two_mode_threshold(&v).unwrap();
        assert!((x - (0.25 * (-4.0f64 * 0.7).exp() - 0.25)).abs() < 1e-15);
        assert!(two_mode_threshold(&vacuum(3, Basis::Transformed)).is_err());
    }

    #[test]
    fn thresholds() {
        assert!((squeezing_threshold(10.0, 1.0) - 1.4982826).abs() < 1e-6);
        assert!((squeezing_threshold(5.0, 1.0) - 1.1529553).abs() < 1e-6);
        assert_eq!(squeezing_threshold(0.0, 1.0), 0.0);
    }
}
