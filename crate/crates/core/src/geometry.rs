//! The cube `D = [-w, w]³`, its interior lattice, boundary quadrature and the
//! complex momenta `(k, l)` used to build exponentially growing solutions.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub type Vec3 = [f64; 3];
pub type CVec3 = [Complex64; 3];

pub const MIN_POINTS: usize = 8;

pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Bilinear (non-conjugating) product of complex 3-vectors.
pub fn cdot(a: &CVec3, b: &CVec3) -> Complex64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// `a · x` for complex `a` and real `x`.
pub fn cdot_real(a: &CVec3, x: &Vec3) -> Complex64 {
    a[0] * x[0] + a[1] * x[1] + a[2] * x[2]
}

pub fn re(a: &CVec3) -> Vec3 {
    [a[0].re, a[1].re, a[2].re]
}

pub fn im(a: &CVec3) -> Vec3 {
    [a[0].im, a[1].im, a[2].im]
}

pub fn neg(a: &CVec3) -> CVec3 {
    [-a[0], -a[1], -a[2]]
}

/// One of the six faces, identified by the normal axis and its sign.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Face {
    pub axis: usize,
    pub positive: bool,
}

impl Face {
    pub fn all() -> [Face; 6] {
        let mut out = [Face { axis: 0, positive: false }; 6];
        for axis in 0..3 {
            out[2 * axis] = Face { axis, positive: false };
            out[2 * axis + 1] = Face { axis, positive: true };
        }
        out
    }

    pub fn tangential_axes(&self) -> (usize, usize) {
        match self.axis {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        }
    }
}

/// A boundary quadrature node on a face of the cube.
#[derive(Clone, Debug)]
pub struct BoundaryNode {
    pub face: Face,
    /// Interior lattice indices along the two tangential axes.
    pub tangential: (usize, usize),
    pub position: Vec3,
    pub normal: Vec3,
    pub weight: f64,
}

impl BoundaryNode {
    /// Lattice index of the interior node `depth` cells inside along the normal.
    pub fn inward(&self, n: usize, depth: usize) -> [usize; 3] {
        let (a, b) = self.face.tangential_axes();
        let mut idx = [0usize; 3];
        idx[a] = self.tangential.0;
        idx[b] = self.tangential.1;
        idx[self.face.axis] = if self.face.positive { n - depth } else { depth - 1 };
        idx
    }
}

/// The cube `[-w, w]³` with `n` interior lattice points per axis.
#[derive(Clone, Debug)]
pub struct Domain {
    half_width: f64,
    n: usize,
    h: f64,
    nodes: Vec<BoundaryNode>,
}

impl Domain {
    pub fn new(half_width: f64, n: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::Config(format!("half width must be positive, got {half_width}")));
        }
        if n < MIN_POINTS {
            return Err(Error::Config(format!(
                "need at least {MIN_POINTS} interior points per axis, got {n}"
            )));
        }
        let h = 2.0 * half_width / (n as f64 + 1.0);
        let wt = |i: usize| if i == 0 || i + 1 == n { 1.5 * h } else { h };
        let mut nodes = Vec::with_capacity(6 * n * n);
        for face in Face::all() {
            let (ta, tb) = face.tangential_axes();
            let mut normal = [0.0; 3];
            normal[face.axis] = if face.positive { 1.0 } else { -1.0 };
            for a in 0..n {
                for b in 0..n {
                    let mut position = [0.0; 3];
                    position[face.axis] = normal[face.axis] * half_width;
                    position[ta] = -half_width + (a as f64 + 1.0) * h;
                    position[tb] = -half_width + (b as f64 + 1.0) * h;
                    nodes.push(BoundaryNode {
                        face,
                        tangential: (a, b),
                        position,
                        normal,
                        weight: wt(a) * wt(b),
                    });
                }
            }
        }
        Ok(Self { half_width, n, h, nodes })
    }

    /// The unit-volume cube `[-1/2, 1/2]³`.
    pub fn unit(n: usize) -> Result<Self> {
        Self::new(0.5, n)
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn cell_volume(&self) -> f64 {
        self.h * self.h * self.h
    }

    /// Circumradius `L = w√3`, the sup of `|x|` over the cube.
    pub fn radius(&self) -> f64 {
        self.half_width * 3f64.sqrt()
    }

    pub fn volume(&self) -> f64 {
        (2.0 * self.half_width).powi(3)
    }

    pub fn surface_area(&self) -> f64 {
        6.0 * (2.0 * self.half_width).powi(2)
    }

    /// `c₃ = √|D|`, the Cauchy-Schwarz constant between L¹ and L² on D.
    pub fn c3(&self) -> f64 {
        self.volume().sqrt()
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + (i as f64 + 1.0) * self.h
    }

    pub fn point(&self, idx: [usize; 3]) -> Vec3 {
        [self.coord(idx[0]), self.coord(idx[1]), self.coord(idx[2])]
    }

    pub fn interior_len(&self) -> usize {
        self.n * self.n * self.n
    }

    /// Row-major flat index, last axis fastest.
    pub fn index(&self, idx: [usize; 3]) -> usize {
        (idx[0] * self.n + idx[1]) * self.n + idx[2]
    }

    pub fn unflatten(&self, flat: usize) -> [usize; 3] {
        let n = self.n;
        [flat / (n * n), (flat / n) % n, flat % n]
    }

    pub fn boundary_nodes(&self) -> &[BoundaryNode] {
        &self.nodes
    }

    pub fn boundary_len(&self) -> usize {
        self.nodes.len()
    }

    pub fn boundary_weights(&self) -> Vec<f64> {
        self.nodes.iter().map(|b| b.weight).collect()
    }

    pub fn same_as(&self, other: &Domain) -> bool {
        self.n == other.n && self.half_width == other.half_width
    }
}

/// Largest admissible `|ξ|` for given `E` and `ρ`: `2√(E + ρ²)`.
pub fn max_xi_radius(energy: f64, rho: f64) -> Result<f64> {
    let s = energy + rho * rho;
    if !(s > 0.0) {
        return Err(Error::Domain(format!("E + rho^2 = {s} must be positive")));
    }
    Ok(2.0 * s.sqrt())
}

/// A pair `(k, l)` with `k·k = l·l = E`, `k - l = ξ` and `|Im k| = |Im l| = ρ`.
#[derive(Clone, Debug)]
pub struct MomentumPair {
    pub k: CVec3,
    pub l: CVec3,
    pub xi: Vec3,
    pub rho: f64,
    pub energy: f64,
}

impl MomentumPair {
    /// `-l`, the momentum paired with the first potential in the bilinear identity.
    pub fn minus_l(&self) -> CVec3 {
        neg(&self.l)
    }

    /// Builds a pair from a given `k` and a `ξ` on its admissible circle,
    /// checking the defining relations to a relative tolerance.
    pub fn from_k(k: CVec3, xi: Vec3, energy: f64) -> Result<Self> {
        let l = [k[0] - xi[0], k[1] - xi[1], k[2] - xi[2]];
        let rho = norm(&im(&k));
        let scale = 1.0 + energy.abs() + rho * rho + dot(&xi, &xi);
        let kk = cdot(&k, &k) - energy;
        let ll = cdot(&l, &l) - energy;
        if kk.norm() > 1e-10 * scale || ll.norm() > 1e-10 * scale {
            return Err(Error::Domain(format!(
                "momenta off the variety: |k·k - E| = {:e}, |l·l - E| = {:e}",
                kk.norm(),
                ll.norm()
            )));
        }
        Ok(Self { k, l, xi, rho, energy })
    }
}

/// Orthonormal frame `(ê₁, ê₂, ê₃)` with `ê₁ ∥ ξ`.
fn frame(xi: &Vec3) -> (Vec3, Vec3, Vec3) {
    let r = norm(xi);
    if r == 0.0 {
        return ([1.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]);
    }
    let e1 = [xi[0] / r, xi[1] / r, xi[2] / r];
    let mut best = 0;
    for i in 1..3 {
        if e1[i].abs() < e1[best].abs() {
            best = i;
        }
    }
    let mut u = [0.0; 3];
    u[best] = 1.0;
    let c = cross(&e1, &u);
    let cn = norm(&c);
    let e2 = [c[0] / cn, c[1] / cn, c[2] / cn];
    let e3 = cross(&e1, &e2);
    (e1, e2, e3)
}

/// Deterministic construction of `(k, l) ∈ Θ_E` with `k - l = ξ` and
/// `|Im k| = |Im l| = ρ`:
/// `k = ξ/2 + a ê₂ + iρ ê₃`, `l = k - ξ`, `a = √(E + ρ² - |ξ|²/4)`.
///
/// For `ξ = 0` the frame is `ê₂ = (1,0,0)`, `ê₃ = (0,0,1)`.
pub fn make_theta_pair(energy: f64, rho: f64, xi: Vec3) -> Result<MomentumPair> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::Domain(format!("rho must be positive, got {rho}")));
    }
    let s = energy + rho * rho;
    if s < 0.0 {
        return Err(Error::Domain(format!("E + rho^2 = {s} is negative")));
    }
    let r = norm(&xi);
    let limit = 2.0 * s.sqrt();
    if r > limit * (1.0 + 1e-12) {
        return Err(Error::InfeasibleFrequency { norm: r, limit });
    }
    let a = (s - 0.25 * r * r).max(0.0).sqrt();
    let (_, e2, e3) = frame(&xi);
    let mut k = [Complex64::new(0.0, 0.0); 3];
    let mut l = [Complex64::new(0.0, 0.0); 3];
    for i in 0..3 {
        k[i] = Complex64::new(0.5 * xi[i] + a * e2[i], rho * e3[i]);
        l[i] = Complex64::new(-0.5 * xi[i] + a * e2[i], rho * e3[i]);
    }
    Ok(MomentumPair { k, l, xi, rho, energy })
}
