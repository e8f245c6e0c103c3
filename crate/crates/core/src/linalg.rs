//! Small dense helpers shared by the dynamics and entanglement modules.

use nalgebra::{Complex, DMatrix, SymmetricEigen};

/// Block-diagonal σ with [[0, 1], [−1, 0]] per mode.
pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let mut s = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        s[(2 * k, 2 * k + 1)] = 1.0;
        s[(2 * k + 1, 2 * k)] = -1.0;
    }
    s
}

/// Minimum eigenvalue of the Hermitian matrix `re + i·im`.
pub fn hermitian_min_eigenvalue(re: &DMatrix<f64>, im: &DMatrix<f64>) -> f64 {
    let h = DMatrix::from_fn(re.nrows(), re.ncols(), |i, j| Complex::new(re[(i, j)], im[(i, j)]));
    SymmetricEigen::new(h).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Minimum eigenvalue of V + (i/2)σ; negative values violate the uncertainty principle.
pub fn heisenberg_min_eigenvalue(v: &DMatrix<f64>) -> f64 {
    let sigma = symplectic_form(v.nrows() / 2) * 0.5;
    hermitian_min_eigenvalue(v, &sigma)
}

/// Eigen-decomposition based exp of a real symmetric matrix.
pub fn symmetric_expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let e = SymmetricEigen::new(a.clone());
    let d = DMatrix::from_diagonal(&e.eigenvalues.map(f64::exp));
    &e.eigenvectors * d * e.eigenvectors.transpose()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Cyclic Jacobi on the real 2n×2n embedding [[A, −B], [B, A]] of A + iB.
    fn jacobi_min(re: &DMatrix<f64>, im: &DMatrix<f64>) -> f64 {
        let n = re.nrows();
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = re[(i, j)];
                m[(i + n, j + n)] = re[(i, j)];
                m[(i, j + n)] = -im[(i, j)];
                m[(i + n, j)] = im[(i, j)];
            }
        }
        let k = 2 * n;
        for _ in 0..100 {
            let off: f64 = (0..k)
                .flat_map(|i| (0..k).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| m[(i, j)] * m[(i, j)])
                .sum();
            if off < 1e-26 {
                break;
            }
            for p in 0..k {
                for q in p + 1..k {
                    if m[(p, q)].abs() < 1e-300 {
                        continue;
                    }
                    let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * m[(p, q)]);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for r in 0..k {
                        let (mp, mq) = (m[(r, p)], m[(r, q)]);
                        m[(r, p)] = c * mp - s * mq;
                        m[(r, q)] = s * mp + c * mq;
                    }
                    for r in 0..k {
                        let (mp, mq) = (m[(p, r)], m[(q, r)]);
                        m[(p, r)] = c * mp - s * mq;
                        m[(q, r)] = s * mp + c * mq;
                    }
                }
            }
        }
        (0..k).map(|i| m[(i, i)]).fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn symplectic_form_properties() {
        let s = symplectic_form(3);
        assert_eq!(s.transpose(), -&s);
        assert_eq!(&s * &s, -DMatrix::<f64>::identity(6, 6));
    }

    #[test]
    fn vacuum_saturates_heisenberg() {
        let v = DMatrix::<f64>::identity(6, 6) * 0.5;
        assert!(heisenberg_min_eigenvalue(&v).abs() < 1e-14);
    }

    #[test]
    fn eigensolver_matches_jacobi_oracle() {
        let mut seed = 12345u64;
        let mut rnd = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        for n in [2, 4, 6] {
            let a = DMatrix::from_fn(n, n, |_, _| rnd());
            let b = DMatrix::from_fn(n, n, |_, _| rnd());
            let re = &a + a.transpose();
            let im = &b - b.transpose();
            let x = hermitian_min_eigenvalue(&re, &im);
            let y = jacobi_min(&re, &im);
            assert!((x - y).abs() < 1e-10, "{x} vs {y}");
        }
    }

    #[test]
    fn expm_of_diagonal() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.5, -1.0]));
        let e = symmetric_expm(&a);
        assert!((e[(0, 0)] - 0.5f64.exp()).abs() < 1e-14);
        assert!((e[(1, 1)] - (-1f64).exp()).abs() < 1e-14);
    }
}
