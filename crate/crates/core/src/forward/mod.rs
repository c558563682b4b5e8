//! Finite-difference Dirichlet problems for `-Δψ + (v - E)ψ = 0` in the cube and
//! the resulting Dirichlet-to-Neumann maps.
//!
//! The interior operator is the 7-point Laplacian on the `n³` interior nodes;
//! boundary values sit on the face nodes of [`Domain`]. Normal derivatives use
//! the one-sided stencil `(3ψ_b - 4ψ₁ + ψ₂) / (2h)`.

mod dtn;
mod spectral_guard;

use std::sync::Arc;

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::Lu;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;

use crate::geometry::Domain;
use crate::potential::Potential;
use crate::{Error, Result};

pub use dtn::{delta_norm, read_dtn, write_dtn, BoundaryOperator, DtnMap};
pub use spectral_guard::free_dirichlet_margin;

/// Right-hand sides solved together when assembling kernels.
const BLOCK: usize = 128;

/// Factored interior operator `-Δ_h + v - E` for one potential and energy.
pub struct ForwardSolver {
    domain: Arc<Domain>,
    energy: f64,
    diag: Vec<f64>,
    lu: Lu<usize, f64>,
    /// `(first, second)` interior neighbours of each boundary node.
    inward: Vec<(usize, usize)>,
    margin: f64,
}

impl std::fmt::Debug for ForwardSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ForwardSolver")
            .field("n", &self.domain.n())
            .field("energy", &self.energy)
            .field("margin", &self.margin)
            .finish()
    }
}

impl ForwardSolver {
    /// Factors the operator and checks that `E` is not (numerically) a
    /// Dirichlet eigenvalue.
    pub fn new(v: &Potential, energy: f64) -> Result<Self> {
        if !energy.is_finite() {
            return Err(Error::Domain(format!("energy must be finite, got {energy}")));
        }
        let domain = v.domain().clone();
        let n = domain.n();
        let h2 = domain.spacing().powi(2);
        let diag: Vec<f64> = v.values().iter().map(|&vi| 6.0 / h2 + vi - energy).collect();
        let mut triplets = Vec::with_capacity(7 * domain.interior_len());
        for flat in 0..domain.interior_len() {
            triplets.push(Triplet::new(flat, flat, diag[flat]));
            let idx = domain.unflatten(flat);
            for a in 0..3 {
                for up in [false, true] {
                    let mut nb = idx;
                    if up {
                        if idx[a] + 1 == n {
                            continue;
                        }
                        nb[a] += 1;
                    } else {
                        if idx[a] == 0 {
                            continue;
                        }
                        nb[a] -= 1;
                    }
                    triplets.push(Triplet::new(flat, domain.index(nb), -1.0 / h2));
                }
            }
        }
        let len = domain.interior_len();
        let a = SparseColMat::<usize, f64>::try_new_from_triplets(len, len, &triplets)
            .map_err(|e| Error::Solver(format!("assembly failed: {e:?}")))?;
        let scale = diag.iter().fold(0.0f64, |m, d| m.max(d.abs())).max(6.0 / h2);
        let threshold = 1e-8 * scale;
        let lu = match a.sp_lu() {
            Ok(lu) => lu,
            Err(_) => {
                return Err(Error::NearEigenvalue { energy, margin: 0.0, threshold });
            }
        };
        let inward = domain
            .boundary_nodes()
            .iter()
            .map(|b| (domain.index(b.inward(n, 1)), domain.index(b.inward(n, 2))))
            .collect();
        let mut solver = Self { domain, energy, diag, lu, inward, margin: 0.0 };
        let margin = spectral_guard::smallest_singular_value(&solver);
        if !(margin >= threshold) {
            return Err(Error::NearEigenvalue { energy, margin: margin.max(0.0), threshold });
        }
        solver.margin = margin;
        Ok(solver)
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// Smallest singular value of the interior operator.
    pub fn margin(&self) -> f64 {
        self.margin
    }

    /// `A x` with zero boundary values.
    pub fn apply_interior(&self, x: &[f64]) -> Vec<f64> {
        let d = &self.domain;
        let n = d.n();
        let inv_h2 = 1.0 / d.spacing().powi(2);
        let mut out = vec![0.0; x.len()];
        for (flat, o) in out.iter_mut().enumerate() {
            let idx = d.unflatten(flat);
            let mut s = self.diag[flat] * x[flat];
            for a in 0..3 {
                if idx[a] > 0 {
                    let mut nb = idx;
                    nb[a] -= 1;
                    s -= inv_h2 * x[d.index(nb)];
                }
                if idx[a] + 1 < n {
                    let mut nb = idx;
                    nb[a] += 1;
                    s -= inv_h2 * x[d.index(nb)];
                }
            }
            *o = s;
        }
        out
    }

    fn boundary_rhs(&self, g: &[f64]) -> Vec<f64> {
        let d = &self.domain;
        let inv_h2 = 1.0 / d.spacing().powi(2);
        let mut b = vec![0.0; d.interior_len()];
        for (node, (first, _)) in g.iter().zip(&self.inward) {
            b[*first] += node * inv_h2;
        }
        b
    }

    /// `A⁻¹ b` for several columns at once (`b` is `len × cols`, column-major).
    pub(crate) fn solve_block(&self, rhs: &mut Mat<f64>) {
        self.lu.solve_in_place(rhs.as_mut());
    }

    pub(crate) fn solve_vec(&self, b: &[f64]) -> Vec<f64> {
        let mut m = Mat::<f64>::from_fn(b.len(), 1, |i, _| b[i]);
        self.solve_block(&mut m);
        m.col_as_slice(0).to_vec()
    }

    /// Interior field of the Dirichlet problem with boundary values `g`.
    pub fn solve_dirichlet(&self, g: &[f64]) -> Result<Vec<f64>> {
        if g.len() != self.domain.boundary_len() {
            return Err(Error::Incompatible(format!(
                "boundary data has {} values, expected {}",
                g.len(),
                self.domain.boundary_len()
            )));
        }
        if let Some(bad) = g.iter().find(|x| !x.is_finite()) {
            return Err(Error::Domain(format!("non-finite boundary value {bad}")));
        }
        let b = self.boundary_rhs(g);
        let bn = l2(&b);
        let mut x = self.solve_vec(&b);
        for _ in 0..2 {
            let r: Vec<f64> = b.iter().zip(self.apply_interior(&x)).map(|(bi, ai)| bi - ai).collect();
            let rel = if bn > 0.0 { l2(&r) / bn } else { l2(&r) };
            if rel <= 1e-12 {
                return Ok(x);
            }
            let dx = self.solve_vec(&r);
            x.iter_mut().zip(dx).for_each(|(xi, di)| *xi += di);
        }
        let r: Vec<f64> = b.iter().zip(self.apply_interior(&x)).map(|(bi, ai)| bi - ai).collect();
        let rel = if bn > 0.0 { l2(&r) / bn } else { l2(&r) };
        if rel > 1e-10 {
            return Err(Error::Solver(format!("relative residual {rel:e} after refinement")));
        }
        Ok(x)
    }

    /// Outward normal derivative on every boundary node.
    pub fn normal_derivative(&self, g: &[f64], field: &[f64]) -> Vec<f64> {
        let inv = 0.5 / self.domain.spacing();
        g.iter()
            .zip(&self.inward)
            .map(|(gb, (a1, a2))| (3.0 * gb - 4.0 * field[*a1] + field[*a2]) * inv)
            .collect()
    }

    /// `Φ g` by one direct solve.
    pub fn apply_dtn(&self, g: &[f64]) -> Result<Vec<f64>> {
        let field = self.solve_dirichlet(g)?;
        Ok(self.normal_derivative(g, &field))
    }

    /// Dense kernel assembled from all boundary impulses.
    pub fn dtn_map(&self) -> Result<DtnMap> {
        dtn::assemble(self, BLOCK)
    }

    pub(crate) fn inward(&self) -> &[(usize, usize)] {
        &self.inward
    }
}

impl BoundaryOperator for ForwardSolver {
    fn domain(&self) -> &Domain {
        &self.domain
    }

    fn energy(&self) -> f64 {
        self.energy
    }

    fn apply(&self, g: &[f64]) -> Result<Vec<f64>> {
        self.apply_dtn(g)
    }
}

fn l2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Smallest singular value of `-Δ_h + v - E`; errors if it is below the
/// near-eigenvalue threshold.
pub fn check_not_eigenvalue(v: &Potential, energy: f64) -> Result<f64> {
    ForwardSolver::new(v, energy).map(|s| s.margin())
}

pub fn solve_dirichlet(v: &Potential, energy: f64, g: &[f64]) -> Result<Vec<f64>> {
    ForwardSolver::new(v, energy)?.solve_dirichlet(g)
}

pub fn dtn_map(v: &Potential, energy: f64) -> Result<DtnMap> {
    ForwardSolver::new(v, energy)?.dtn_map()
}
