//! Direct-sum decomposition of the covariance equations into small blocks.
//!
//! The element map is not hard-coded: the Lyapunov operator V ↦ AV + VAᵀ is
//! expanded on the upper-triangle elements for a probe drift, split into
//! connected components, and each component is matched against the four block
//! templates under every ordering of its elements.

use nalgebra::DMatrix;

use super::{lyapunov_product, upper_triangle, Drift};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BlockKind {
    /// Single relaxation-free mode (qq, qp, pp).
    A1,
    /// Damped mode (qq, qp, pp), carries the inhomogeneous term.
    A2,
    /// Free mode i with the damped mode.
    A3,
    /// Two free modes.
    A4,
    /// Reduced (V⁻, V₁₂) view of an A1 block; never emitted as an evolution block.
    A5,
}

impl BlockKind {
    pub fn dim(self) -> usize {
        match self {
            BlockKind::A1 | BlockKind::A2 => 3,
            BlockKind::A3 | BlockKind::A4 => 4,
            BlockKind::A5 => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub kind: BlockKind,
    /// Covariance element (i, j), i ≤ j, governed by each block row.
    pub elements: Vec<(usize, usize)>,
    /// Block rows that receive the diffusion terms (i, j) of Dm.
    pub inhomogeneous: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockSystem {
    pub blocks: Vec<Block>,
}

/// Physical values entering the block templates at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockParameters {
    pub mass: f64,
    pub omega_f_sq: f64,
    pub omega_bar_sq: f64,
    /// Damping rate γ = 2γ_N.
    pub gamma: f64,
    pub f: f64,
    pub d: f64,
}

/// Block matrix for `kind` with the given physical values.
pub fn template(kind: BlockKind, p: &BlockParameters) -> DMatrix<f64> {
    let m = p.mass;
    let (wf, wb, g) = (p.omega_f_sq, p.omega_bar_sq, p.gamma);
    match kind {
        BlockKind::A1 => DMatrix::from_row_slice(
            3,
            3,
            &[0.0, 2.0 / m, 0.0, -m * wf, 0.0, 1.0 / m, 0.0, -2.0 * m * wf, 0.0],
        ),
        BlockKind::A2 => DMatrix::from_row_slice(
            3,
            3,
            &[0.0, 2.0 / m, 0.0, -m * wb, -g, 1.0 / m, 0.0, -2.0 * m * wb, -2.0 * g],
        ),
        BlockKind::A3 | BlockKind::A4 => {
            let (wb, g) = if kind == BlockKind::A3 { (wb, g) } else { (wf, 0.0) };
            DMatrix::from_row_slice(
                4,
                4,
                &[
                    0.0, 1.0 / m, 1.0 / m, 0.0, //
                    -m * wb, -g, 0.0, 1.0 / m, //
                    -m * wf, 0.0, 0.0, 1.0 / m, //
                    0.0, -m * wf, -m * wb, -g,
                ],
            )
        }
        BlockKind::A5 => DMatrix::from_row_slice(2, 2, &[0.0, 4.0 * wf, -1.0, 0.0]),
    }
}

/// Inhomogeneous term of each row of `block` from (f, D).
fn forcing(block: &Block, p: &BlockParameters, row: usize) -> f64 {
    let (i, j) = block.elements[row];
    if i == j {
        2.0 * p.d
    } else {
        -p.f
    }
}

// Distinct, generic values so no template coincides with another by accident.
const PROBE: BlockParameters = BlockParameters {
    mass: 1.3,
    omega_f_sq: 0.7,
    omega_bar_sq: 2.9,
    gamma: 0.37,
    f: 0.0,
    d: 0.0,
};

/// Matrix of the linear map V ↦ AV + VAᵀ on the upper-triangle elements.
pub fn lyapunov_operator(drift: &Drift) -> (Vec<(usize, usize)>, DMatrix<f64>) {
    let dim = 2 * drift.blocks.len();
    let pairs = upper_triangle(dim);
    let mut c = DMatrix::zeros(pairs.len(), pairs.len());
    for (col, &(k, l)) in pairs.iter().enumerate() {
        let mut e = DMatrix::zeros(dim, dim);
        e[(k, l)] = 1.0;
        e[(l, k)] = 1.0;
        let out = lyapunov_product(drift, &e);
        for (row, &(i, j)) in pairs.iter().enumerate() {
            c[(row, col)] = out[(i, j)];
        }
    }
    (pairs, c)
}

fn components(c: &DMatrix<f64>) -> Vec<Vec<usize>> {
    let n = c.nrows();
    let mut label = vec![usize::MAX; n];
    let mut out = Vec::new();
    for s in 0..n {
        if label[s] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut stack = vec![s];
        let mut members = vec![];
        label[s] = id;
        while let Some(u) = stack.pop() {
            members.push(u);
            for w in 0..n {
                if label[w] == usize::MAX && (c[(u, w)] != 0.0 || c[(w, u)] != 0.0) {
                    label[w] = id;
                    stack.push(w);
                }
            }
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for (k, &first) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(k);
        for mut tail in permutations(&rest) {
            tail.insert(0, first);
            out.push(tail);
        }
    }
    out
}

fn probe_drift(n_modes: usize) -> Drift {
    let p = PROBE;
    let mut blocks = vec![[[0.0, 1.0 / p.mass], [-p.mass * p.omega_f_sq, 0.0]]; n_modes];
    blocks[n_modes - 1] = [[0.0, 1.0 / p.mass], [-p.mass * p.omega_bar_sq, -p.gamma]];
    Drift { blocks }
}

impl BlockSystem {
    /// Derives the blocks and their element maps for N modes.
    pub fn derive(n_modes: usize) -> Self {
        let (pairs, c) = lyapunov_operator(&probe_drift(n_modes));
        let kinds = [BlockKind::A1, BlockKind::A2, BlockKind::A3, BlockKind::A4];
        let mut blocks = Vec::new();
        for comp in components(&c) {
            let mut found = None;
            'search: for perm in permutations(&comp) {
                for &kind in &kinds {
                    if kind.dim() != perm.len() {
                        continue;
                    }
                    let t = template(kind, &PROBE);
                    let matches = (0..perm.len()).all(|r| {
                        (0..perm.len()).all(|s| (c[(perm[r], perm[s])] - t[(r, s)]).abs() < 1e-12)
                    });
                    if matches {
                        found = Some((kind, perm.clone()));
                        break 'search;
                    }
                }
            }
            let (kind, perm) = found.unwrap_or_else(|| {
                panic!("Lyapunov component {comp:?} matches no block template")
            });
            let elements: Vec<_> = perm.iter().map(|&e| pairs[e]).collect();
            let last = 2 * n_modes - 2;
            let inhomogeneous = elements
                .iter()
                .enumerate()
                .filter(|(_, &(i, j))| (i, j) == (last, last + 1) || (i, j) == (last + 1, last + 1))
                .map(|(r, _)| r)
                .collect();
            blocks.push(Block {
                kind,
                elements,
                inhomogeneous,
            });
        }
        // Order: for each free mode i, A1(i), A4(i, j>i), A3(i, N); then A2.
        blocks.sort_by_key(|b| {
            let modes: Vec<usize> = b.elements.iter().flat_map(|&(i, j)| [i / 2, j / 2]).collect();
            let lo = *modes.iter().min().unwrap();
            let hi = *modes.iter().max().unwrap();
            let rank = match b.kind {
                BlockKind::A1 => 0,
                BlockKind::A4 => 1,
                BlockKind::A3 => 2,
                _ => 3,
            };
            if b.kind == BlockKind::A2 {
                (usize::MAX, rank, 0)
            } else {
                (lo, rank, hi)
            }
        });
        BlockSystem { blocks }
    }

    pub fn dimension(&self) -> usize {
        self.blocks.iter().map(|b| b.elements.len()).sum()
    }

    pub fn count(&self, kind: BlockKind) -> usize {
        self.blocks.iter().filter(|b| b.kind == kind).count()
    }

    /// Symmetric covariance from per-block element values.
    pub fn assemble(&self, x: &[Vec<f64>], n_modes: usize) -> DMatrix<f64> {
        let mut v = DMatrix::zeros(2 * n_modes, 2 * n_modes);
        for (b, xb) in self.blocks.iter().zip(x) {
            for (&(i, j), &val) in b.elements.iter().zip(xb) {
                v[(i, j)] = val;
                v[(j, i)] = val;
            }
        }
        v
    }
}

fn rhs(block: &Block, p: &BlockParameters, x: &[f64]) -> Vec<f64> {
    let a = template(block.kind, p);
    let mut out: Vec<f64> = (0..x.len())
        .map(|r| (0..x.len()).map(|s| a[(r, s)] * x[s]).sum())
        .collect();
    for &r in &block.inhomogeneous {
        out[r] += forcing(block, p, r);
    }
    out
}

/// One classical RK4 step; `stages` holds the parameters at t, t + dt/2, t + dt.
pub(crate) fn rk4_step(block: &Block, x: &mut [f64], stages: &[BlockParameters], dt: f64) {
    let axpy = |x: &[f64], k: &[f64], h: f64| -> Vec<f64> {
        x.iter().zip(k).map(|(a, b)| a + h * b).collect()
    };
    let k1 = rhs(block, &stages[0], x);
    let k2 = rhs(block, &stages[1], &axpy(x, &k1, 0.5 * dt));
    let k3 = rhs(block, &stages[1], &axpy(x, &k2, 0.5 * dt));
    let k4 = rhs(block, &stages[2], &axpy(x, &k3, dt));
    for r in 0..x.len() {
        x[r] += dt / 6.0 * (k1[r] + 2.0 * k2[r] + 2.0 * k3[r] + k4[r]);
    }
}
