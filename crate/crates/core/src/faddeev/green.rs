use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::fft::{self, Fft3};
use crate::geometry::{cdot_real, dot, im, norm, re, BoundaryNode, CVec3, Domain, Vec3};
use crate::potential::FrequencyLattice;
use crate::{Error, Result};

/// Default period of the kernel lattice sum as a multiple of the cube width.
pub const DEFAULT_GREEN_PERIOD_FACTOR: f64 = 12.0;

/// Convolution grid holding the cube and its face planes. Node `p` along an
/// axis sits at `x₀ + p h` for `p ≤ n` and at `x₀ + (p - m) h` otherwise, so the
/// face planes `±w` are lattice planes. With `m ≥ 2n + 3` every difference of
/// two nodes has a unique representative, so circular convolution is exact.
#[derive(Clone, Debug)]
pub struct PaddedGrid {
    domain: Arc<Domain>,
    m: usize,
}

impl PaddedGrid {
    pub fn new(domain: Arc<Domain>) -> Self {
        let m = fft::smooth_len(2 * domain.n() + 3, false);
        Self { domain, m }
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn side(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.m * self.m * self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    pub fn period(&self) -> f64 {
        self.m as f64 * self.domain.spacing()
    }

    pub fn flat(&self, p: [usize; 3]) -> usize {
        (p[0] * self.m + p[1]) * self.m + p[2]
    }

    pub fn interior_flat(&self, idx: [usize; 3]) -> usize {
        self.flat(idx)
    }

    pub fn boundary_flat(&self, node: &BoundaryNode) -> usize {
        let (a, b) = node.face.tangential_axes();
        let mut p = [0usize; 3];
        p[a] = node.tangential.0;
        p[b] = node.tangential.1;
        p[node.face.axis] = if node.face.positive { self.domain.n() } else { self.m - 1 };
        self.flat(p)
    }

    fn signed_node(&self, p: usize) -> f64 {
        if p <= self.domain.n() {
            p as f64
        } else {
            p as f64 - self.m as f64
        }
    }

    pub fn coord(&self, p: usize) -> f64 {
        self.domain.coord(0) + self.signed_node(p) * self.domain.spacing()
    }

    /// Padded-grid indices of all interior nodes, in domain order.
    pub fn interior_flats(&self) -> Vec<usize> {
        (0..self.domain.interior_len()).map(|f| self.interior_flat(self.domain.unflatten(f))).collect()
    }

    pub fn lattice(&self, offset: Vec3) -> FrequencyLattice {
        FrequencyLattice::new(self.m, self.period(), offset)
    }
}

fn denominator(k: &CVec3, xi: &Vec3) -> Complex64 {
    cdot_real(k, xi) * 2.0 + dot(xi, xi)
}

/// Cell average of `-1/(ξ² + 2k·ξ)` over the lattice cell centred at `centre`,
/// from a symmetric midpoint rule that never samples the cell centre.
fn cell_average(k: &CVec3, centre: &Vec3, spacing: f64) -> Complex64 {
    const Q: usize = 16;
    let mut acc = Complex64::new(0.0, 0.0);
    for a in 0..Q {
        for b in 0..Q {
            for c in 0..Q {
                let off = |i: usize| ((i as f64 + 0.5) / Q as f64 - 0.5) * spacing;
                let xi = [centre[0] + off(a), centre[1] + off(b), centre[2] + off(c)];
                acc -= denominator(k, &xi).inv();
            }
        }
    }
    acc / (Q * Q * Q) as f64
}

/// `-1 / (ξ² + 2k·ξ)` on a lattice. Cells whose centre sits on the singular set
/// receive their cell average.
pub fn faddeev_symbol(k: &CVec3, lattice: &FrequencyLattice) -> Result<Vec<Complex64>> {
    if norm(&im(k)) == 0.0 {
        return Err(Error::Singular("the Faddeev symbol needs Im k != 0".into()));
    }
    let scale = dot(&re(k), &re(k)) + dot(&im(k), &im(k));
    Ok((0..lattice.len())
        .map(|f| {
            let xi = lattice.frequency(f);
            let den = denominator(k, &xi);
            if den.norm() <= 1e-14 * scale {
                cell_average(k, &xi, lattice.spacing())
            } else {
                -den.inv()
            }
        })
        .collect())
}

/// Closed form of `g(x, iρω) = -e^{ρ(ω·x - |x|)} / (4π|x|)`, the Faddeev Green
/// function at `E = -ρ²`.
pub fn green_reference(x: Vec3, rho: f64, omega: Vec3) -> Result<f64> {
    let r = norm(&x);
    if r == 0.0 {
        return Err(Error::Domain("the Green function is singular at the origin".into()));
    }
    if (norm(&omega) - 1.0).abs() > 1e-12 {
        return Err(Error::Domain("omega must be a unit vector".into()));
    }
    Ok(-(rho * (dot(&omega, &x) - r)).exp() / (4.0 * PI * r))
}

/// Convolution with the Faddeev Green function restricted to differences of
/// cube nodes.
///
/// The kernel is the band-limited lattice sum of the symbol with period
/// `q m h ≥ period_factor · 2w`, evaluated on the convolution grid by splitting
/// the fine frequency lattice into `q³` cosets of the coarse one. The sum is
/// averaged over the two fine-lattice offsets `±s`, which keeps the lattice
/// off the singular set and cancels the leading periodic-image term.
pub struct GreenOperator {
    grid: PaddedGrid,
    k: CVec3,
    fft: Fft3,
    refinement: usize,
    offset: Vec3,
    kernel_hat: Vec<Complex64>,
}

impl GreenOperator {
    pub fn new(domain: Arc<Domain>, k: CVec3, period_factor: f64) -> Result<Self> {
        if !(period_factor >= 2.0) || !period_factor.is_finite() {
            return Err(Error::Config(format!(
                "kernel period must be at least twice the cube width, got factor {period_factor}"
            )));
        }
        let kim = im(&k);
        if norm(&kim) == 0.0 {
            return Err(Error::Singular("the Faddeev symbol needs Im k != 0".into()));
        }
        let grid = PaddedGrid::new(domain);
        let m = grid.side();
        let n1 = grid.domain().n() as f64 + 1.0;
        let q = ((period_factor * n1 / m as f64).ceil() as usize).max(1);
        let fine = FrequencyLattice::new(m * q, (m * q) as f64 * grid.domain().spacing(), [0.0; 3]);
        let offset = choose_offset(&fine, &k);
        let fft = Fft3::new(m);
        let len = m * m * m;
        let cosets = (2 * q * q * q) as f64;
        let mut kernel = vec![Complex64::new(0.0, 0.0); len];
        let mut buf = vec![Complex64::new(0.0, 0.0); len];
        let period = grid.period();
        for sign in [1.0, -1.0] {
            for t0 in 0..q {
                for t1 in 0..q {
                    for t2 in 0..q {
                        let s = [t0, t1, t2]
                            .map(|t| t as f64)
                            .iter()
                            .zip(&offset)
                            .map(|(t, o)| (t + sign * o) / q as f64)
                            .collect::<Vec<_>>();
                        let s = [s[0], s[1], s[2]];
                        let symbol = faddeev_symbol(&k, &FrequencyLattice::new(m, period, s))?;
                        buf.copy_from_slice(&symbol);
                        fft.inverse(&mut buf);
                        let twist = [0, 1, 2].map(|a| {
                            (0..m)
                                .map(|p| Complex64::from_polar(1.0, 2.0 * PI * s[a] * fft::signed(p, m) as f64 / m as f64))
                                .collect::<Vec<_>>()
                        });
                        for p0 in 0..m {
                            for p1 in 0..m {
                                let t01 = twist[0][p0] * twist[1][p1];
                                let row = (p0 * m + p1) * m;
                                for p2 in 0..m {
                                    kernel[row + p2] += buf[row + p2] * t01 * twist[2][p2];
                                }
                            }
                        }
                    }
                }
            }
        }
        // kernel now holds cosets · m³ · h³ g(x_p); store its transform with the
        // 1/m³ of the inverse transform folded in
        let scale = 1.0 / (cosets * (len as f64) * (len as f64));
        kernel.iter_mut().for_each(|v| *v *= scale);
        fft.forward(&mut kernel);
        Ok(Self { grid, k, fft, refinement: q, offset, kernel_hat: kernel })
    }

    pub fn k(&self) -> &CVec3 {
        &self.k
    }

    pub fn grid(&self) -> &PaddedGrid {
        &self.grid
    }

    /// Number of cosets per axis, so the kernel period is this times the
    /// grid period.
    pub fn refinement(&self) -> usize {
        self.refinement
    }

    /// Fractional offset of the fine frequency lattice, in fine cells.
    pub fn offset(&self) -> Vec3 {
        self.offset
    }

    /// `(g * f)` sampled on the grid; `f` is given on the grid.
    pub fn apply(&self, f: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(f.len(), self.grid.len());
        let mut buf = f.to_vec();
        self.fft.forward(&mut buf);
        buf.iter_mut().zip(&self.kernel_hat).for_each(|(b, g)| *b *= g);
        self.fft.inverse(&mut buf);
        buf
    }
}

/// Fractional lattice offset for the pair `±s`, in lattice cells.
///
/// When `Im k` lies along a coordinate axis the offset is a sixth of a cell
/// along that axis: the image sum then carries weights `cos(πj/3)`, whose
/// harmonic sum vanishes. Otherwise the candidate among sixths of a cell that
/// keeps the lattice furthest from the singular circle is used.
fn choose_offset(lattice: &FrequencyLattice, k: &CVec3) -> Vec3 {
    let kim = im(k);
    let rho = norm(&kim);
    for a in 0..3 {
        if kim[a].abs() >= rho * (1.0 - 1e-12) {
            let mut s = [0.0; 3];
            s[a] = 1.0 / 6.0;
            return s;
        }
    }
    // lattice points near the circle ξ·Im k = 0, |ξ + Re k| = |Re k|
    let spacing = lattice.spacing();
    let kre = re(k);
    let a = norm(&kre);
    let omega = [kim[0] / rho, kim[1] / rho, kim[2] / rho];
    let u = if a > 0.0 { [kre[0] / a, kre[1] / a, kre[2] / a] } else { crate::geometry::cross(&omega, &[1.0, 0.0, 0.0]) };
    let u = {
        let l = norm(&u).max(f64::MIN_POSITIVE);
        [u[0] / l, u[1] / l, u[2] / l]
    };
    let v = crate::geometry::cross(&omega, &u);
    let steps = ((2.0 * PI * a / (0.25 * spacing)).ceil() as usize).max(1);
    let mut near = std::collections::BTreeSet::new();
    for i in 0..steps {
        let t = 2.0 * PI * i as f64 / steps as f64;
        let p = [0, 1, 2].map(|c| -kre[c] + a * (t.cos() * u[c] + t.sin() * v[c]));
        let base = p.map(|x| (x / spacing).floor() as i64);
        for d0 in -1..=2 {
            for d1 in -1..=2 {
                for d2 in -1..=2 {
                    near.insert([base[0] + d0, base[1] + d1, base[2] + d2]);
                }
            }
        }
    }
    let mut best = ([1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0], 0.0);
    for a in 0..6 {
        for b in 0..6 {
            for c in 0..6 {
                if a + b + c == 0 {
                    continue;
                }
                let s = [a as f64 / 6.0, b as f64 / 6.0, c as f64 / 6.0];
                let mut worst = f64::INFINITY;
                for j in &near {
                    for sign in [1.0, -1.0] {
                        let xi = [0, 1, 2].map(|c| spacing * (j[c] as f64 + sign * s[c]));
                        worst = worst.min(denominator(k, &xi).norm());
                    }
                }
                if worst > best.1 {
                    best = (s, worst);
                }
            }
        }
    }
    best.0
}

/// `g * f` for a potential-sized `f` on the interior lattice, sampled back on
/// the interior lattice.
pub fn apply_green(k: &CVec3, domain: &Arc<Domain>, f: &[Complex64], period_factor: f64) -> Result<Vec<Complex64>> {
    if f.len() != domain.interior_len() {
        return Err(Error::Incompatible("source does not match the grid".into()));
    }
    let op = GreenOperator::new(domain.clone(), *k, period_factor)?;
    let flats = op.grid().interior_flats();
    let mut padded = vec![Complex64::new(0.0, 0.0); op.grid().len()];
    for (i, &fl) in flats.iter().enumerate() {
        padded[fl] = f[i];
    }
    let out = op.apply(&padded);
    Ok(flats.iter().map(|&fl| out[fl]).collect())
}
