use std::io::{Read, Write};
use std::sync::Arc;

use faer::Mat;
use sha2::{Digest, Sha256};

use super::ForwardSolver;
use crate::geometry::Domain;
use crate::{Error, Result};

/// Anything that maps Dirichlet data on the face nodes to Neumann data.
pub trait BoundaryOperator {
    fn domain(&self) -> &Domain;
    fn energy(&self) -> f64;
    fn apply(&self, g: &[f64]) -> Result<Vec<f64>>;
}

/// Dense DtN map stored as an integral kernel: `(Φg)_i = Σ_j K_ij g_j w_j`.
#[derive(Clone, Debug)]
pub struct DtnMap {
    domain: Arc<Domain>,
    energy: f64,
    kernel: Vec<f64>,
    weights: Vec<f64>,
}

pub(super) fn assemble(solver: &ForwardSolver, block: usize) -> Result<DtnMap> {
    let d = solver.domain().clone();
    let nb = d.boundary_len();
    let len = d.interior_len();
    let h = d.spacing();
    let inv_h2 = 1.0 / (h * h);
    let weights = d.boundary_weights();
    let inward = solver.inward();
    let mut kernel = vec![0.0; nb * nb];
    let mut start = 0;
    while start < nb {
        let cols = block.min(nb - start);
        let mut rhs = Mat::<f64>::zeros(len, cols);
        for c in 0..cols {
            rhs[(inward[start + c].0, c)] = inv_h2;
        }
        solver.solve_block(&mut rhs);
        for c in 0..cols {
            let j = start + c;
            let x = rhs.col_as_slice(c);
            let wj = weights[j];
            for (i, (a1, a2)) in inward.iter().enumerate() {
                let g = if i == j { 3.0 } else { 0.0 };
                kernel[i * nb + j] = (g - 4.0 * x[*a1] + x[*a2]) / (2.0 * h * wj);
            }
        }
        start += cols;
    }
    if kernel.iter().any(|k| !k.is_finite()) {
        return Err(Error::Solver("non-finite DtN kernel entry".into()));
    }
    Ok(DtnMap { domain: d, energy: solver.energy(), kernel, weights })
}

impl DtnMap {
    pub fn size(&self) -> usize {
        self.weights.len()
    }

    pub fn kernel(&self) -> &[f64] {
        &self.kernel
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.kernel[i * self.size() + j]
    }

    pub fn domain_arc(&self) -> &Arc<Domain> {
        &self.domain
    }

    /// Induced ∞-norm of the DtN matrix, `max_i Σ_j |K_ij| w_j`.
    pub fn operator_norm(&self) -> f64 {
        let nb = self.size();
        (0..nb)
            .map(|i| (0..nb).map(|j| self.kernel[i * nb + j].abs() * self.weights[j]).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn checksum(&self) -> [u8; 32] {
        let mut hasher = Sha256::new();
        for k in &self.kernel {
            hasher.update(k.to_le_bytes());
        }
        hasher.finalize().into()
    }
}

impl BoundaryOperator for DtnMap {
    fn domain(&self) -> &Domain {
        &self.domain
    }

    fn energy(&self) -> f64 {
        self.energy
    }

    fn apply(&self, g: &[f64]) -> Result<Vec<f64>> {
        let nb = self.size();
        if g.len() != nb {
            return Err(Error::Incompatible(format!("boundary data has {} values, expected {nb}", g.len())));
        }
        let wg: Vec<f64> = g.iter().zip(&self.weights).map(|(a, b)| a * b).collect();
        Ok((0..nb)
            .map(|i| self.kernel[i * nb..(i + 1) * nb].iter().zip(&wg).map(|(k, x)| k * x).sum())
            .collect())
    }
}

/// `δ = ‖Φ₁ - Φ₂‖`, the induced ∞-norm of the difference of the DtN matrices.
pub fn delta_norm(a: &DtnMap, b: &DtnMap) -> Result<f64> {
    if !a.domain.same_as(&b.domain) {
        return Err(Error::Incompatible("DtN maps on different grids".into()));
    }
    if a.energy != b.energy {
        return Err(Error::Incompatible(format!("DtN maps at energies {} and {}", a.energy, b.energy)));
    }
    let nb = a.size();
    let mut best = 0.0f64;
    for i in 0..nb {
        let row = i * nb..(i + 1) * nb;
        let s: f64 = a.kernel[row.clone()]
            .iter()
            .zip(&b.kernel[row])
            .zip(&a.weights)
            .map(|((x, y), w)| (x - y).abs() * w)
            .sum();
        best = best.max(s);
    }
    Ok(best)
}

const MAGIC: &[u8; 8] = b"GELFDTN\0";
const VERSION: u32 = 1;

/// Versioned little-endian file: magic, version, `n`, half width, energy,
/// SHA-256 of the kernel, then the row-major kernel.
pub fn write_dtn(map: &DtnMap, out: &mut impl Write) -> Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&(map.domain.n() as u32).to_le_bytes())?;
    out.write_all(&map.domain.half_width().to_le_bytes())?;
    out.write_all(&map.energy.to_le_bytes())?;
    out.write_all(&map.checksum())?;
    for k in &map.kernel {
        out.write_all(&k.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_dtn(input: &mut impl Read) -> Result<DtnMap> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("not a DtN file".into()));
    }
    let mut b4 = [0u8; 4];
    let mut b8 = [0u8; 8];
    input.read_exact(&mut b4)?;
    let version = u32::from_le_bytes(b4);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported DtN version {version}")));
    }
    input.read_exact(&mut b4)?;
    let n = u32::from_le_bytes(b4) as usize;
    input.read_exact(&mut b8)?;
    let half_width = f64::from_le_bytes(b8);
    input.read_exact(&mut b8)?;
    let energy = f64::from_le_bytes(b8);
    let mut sum = [0u8; 32];
    input.read_exact(&mut sum)?;
    let domain = Arc::new(Domain::new(half_width, n)?);
    let nb = domain.boundary_len();
    let mut kernel = Vec::with_capacity(nb * nb);
    for _ in 0..nb * nb {
        input.read_exact(&mut b8)?;
        kernel.push(f64::from_le_bytes(b8));
    }
    let weights = domain.boundary_weights();
    let map = DtnMap { domain, energy, kernel, weights };
    if map.checksum() != sum {
        return Err(Error::Format("DtN checksum mismatch".into()));
    }
    Ok(map)
}
