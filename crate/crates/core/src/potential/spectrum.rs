use std::f64::consts::PI;

use num_complex::Complex64;

use super::Potential;
use crate::fft::{self, Fft3};
use crate::geometry::{norm, Vec3};
use crate::{Error, Result};

/// Default computational period, as a multiple of the cube width.
pub const DEFAULT_PERIOD_FACTOR: f64 = 2.0;

/// Cubic lattice `Δ·(j + s)`, `j ∈ Z³` in FFT order, `Δ = 2π / period`.
#[derive(Clone, Debug)]
pub struct FrequencyLattice {
    m: usize,
    spacing: f64,
    offset: Vec3,
}

impl FrequencyLattice {
    pub fn new(m: usize, period: f64, offset: Vec3) -> Self {
        Self { m, spacing: 2.0 * PI / period, offset }
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

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.spacing
    }

    /// Fractional shift `s`, in units of the spacing.
    pub fn offset(&self) -> Vec3 {
        self.offset
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(3)
    }

    pub fn signed_index(&self, flat: usize) -> [i64; 3] {
        let m = self.m;
        [
            fft::signed(flat / (m * m), m),
            fft::signed((flat / m) % m, m),
            fft::signed(flat % m, m),
        ]
    }

    pub fn flat(&self, j: [i64; 3]) -> Option<usize> {
        let m = self.m;
        Some((fft::bin(j[0], m)? * m + fft::bin(j[1], m)?) * m + fft::bin(j[2], m)?)
    }

    pub fn frequency(&self, flat: usize) -> Vec3 {
        let j = self.signed_index(flat);
        self.frequency_of(j)
    }

    pub fn frequency_of(&self, j: [i64; 3]) -> Vec3 {
        [
            self.spacing * (j[0] as f64 + self.offset[0]),
            self.spacing * (j[1] as f64 + self.offset[1]),
            self.spacing * (j[2] as f64 + self.offset[2]),
        ]
    }

    /// Lattice points with `|ξ| ≤ r`, ordered by signed index.
    pub fn ball(&self, r: f64) -> Vec<[i64; 3]> {
        let reach = ((r / self.spacing).ceil() + 1.0).min(self.m as f64) as i64;
        let lo = (-reach).max(-((self.m / 2) as i64));
        let hi = reach.min(((self.m - 1) / 2) as i64);
        let mut out = Vec::new();
        for a in lo..=hi {
            for b in lo..=hi {
                for c in lo..=hi {
                    let j = [a, b, c];
                    if norm(&self.frequency_of(j)) <= r {
                        out.push(j);
                    }
                }
            }
        }
        out
    }
}

/// Lattice Fourier coefficients of a grid potential.
#[derive(Clone, Debug)]
pub struct Spectrum {
    lattice: FrequencyLattice,
    coefficients: Vec<Complex64>,
}

/// Rectangle-rule transform of `w` on a lattice with period
/// `period_factor × (2w)`. Padding is zero.
pub fn fourier_transform(w: &Potential, period_factor: f64) -> Result<Spectrum> {
    if !(period_factor >= 1.0) || !period_factor.is_finite() {
        return Err(Error::Config(format!(
            "period factor {period_factor} is below the support width; the lattice would alias"
        )));
    }
    let d = w.domain();
    let n = d.n();
    let h = d.spacing();
    let m = fft::smooth_len((period_factor * (n as f64 + 1.0)).ceil() as usize, true);
    let period = m as f64 * h;
    let lattice = FrequencyLattice::new(m, period, [0.0; 3]);
    let mut data = vec![Complex64::new(0.0, 0.0); m * m * m];
    for (flat, &v) in w.values().iter().enumerate() {
        let [i, j, k] = d.unflatten(flat);
        data[(i * m + j) * m + k] = Complex64::new(v, 0.0);
    }
    Fft3::new(m).inverse(&mut data);
    let x0 = d.coord(0);
    let scale = d.cell_volume() / (2.0 * PI).powi(3);
    let phase: Vec<Complex64> = (0..m)
        .map(|p| Complex64::from_polar(scale.cbrt(), lattice.spacing * fft::signed(p, m) as f64 * x0))
        .collect();
    for (flat, c) in data.iter_mut().enumerate() {
        let (a, b, e) = (flat / (m * m), (flat / m) % m, flat % m);
        *c *= phase[a] * phase[b] * phase[e];
    }
    Ok(Spectrum { lattice, coefficients: data })
}

impl Spectrum {
    pub fn lattice(&self) -> &FrequencyLattice {
        &self.lattice
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn coefficient(&self, j: [i64; 3]) -> Option<Complex64> {
        self.lattice.flat(j).map(|f| self.coefficients[f])
    }

    fn weighted(&self) -> impl Iterator<Item = (f64, Complex64)> + '_ {
        self.coefficients
            .iter()
            .enumerate()
            .map(|(f, &c)| (norm(&self.lattice.frequency(f)), c))
    }

    /// `(2π)^{3/2} (Σ (1+|ξ|²)^m |ŵ|² Δ³)^{1/2}`; equals the grid L² norm at `m = 0`.
    pub fn sobolev_norm(&self, m: f64) -> Result<f64> {
        check_order(m)?;
        let s: f64 = self.weighted().map(|(r, c)| (1.0 + r * r).powf(m) * c.norm_sqr()).sum();
        Ok((2.0 * PI).powf(1.5) * (s * self.lattice.cell_volume()).sqrt())
    }

    /// `max (1+|ξ|²)^{m/2} |ŵ|` over the lattice.
    pub fn weighted_sup_norm(&self, m: f64) -> Result<f64> {
        check_order(m)?;
        Ok(self
            .weighted()
            .map(|(r, c)| (1.0 + r * r).powf(0.5 * m) * c.norm())
            .fold(0.0, f64::max))
    }

    /// `‖ŵ‖_{L²(|ξ| ≥ r)}` on the lattice.
    pub fn tail_l2(&self, r: f64) -> f64 {
        let s: f64 = self.weighted().filter(|(k, _)| *k >= r).map(|(_, c)| c.norm_sqr()).sum();
        (s * self.lattice.cell_volume()).sqrt()
    }

    /// `‖ŵ‖_{L¹(|ξ| ≥ r)}` on the lattice; `m` only gates the `m > 3` requirement
    /// of the matching bound.
    pub fn tail_l1(&self, r: f64, m: f64) -> Result<f64> {
        if !(m > 3.0) {
            return Err(Error::Domain(format!("L1 tail bound needs m > 3, got {m}")));
        }
        let s: f64 = self.weighted().filter(|(k, _)| *k >= r).map(|(_, c)| c.norm()).sum();
        Ok(s * self.lattice.cell_volume())
    }

    /// `‖ŵ‖_{L²(|ξ| < r)}` on the lattice.
    pub fn head_l2(&self, r: f64) -> f64 {
        let s: f64 = self.weighted().filter(|(k, _)| *k < r).map(|(_, c)| c.norm_sqr()).sum();
        (s * self.lattice.cell_volume()).sqrt()
    }

    /// `‖ŵ‖_{L¹(|ξ| < r)}` on the lattice.
    pub fn head_l1(&self, r: f64) -> f64 {
        let s: f64 = self.weighted().filter(|(k, _)| *k < r).map(|(_, c)| c.norm()).sum();
        s * self.lattice.cell_volume()
    }
}

fn check_order(m: f64) -> Result<()> {
    if !(m >= 0.0) || !m.is_finite() {
        return Err(Error::Domain(format!("smoothness order must be non-negative, got {m}")));
    }
    Ok(())
}

/// Tail bound `c₂ N_{H^m} r^{-m}`, `c₂ = (2π)^{-3/2}`.
pub fn tail_l2_bound(n_hm: f64, m: f64, r: f64) -> f64 {
    (2.0 * PI).powf(-1.5) * n_hm * r.powf(-m)
}

/// `4π N_{W^m} r^{3-m} / (m - 3)` for `m > 3`.
pub fn tail_l1_bound(n_wm: f64, m: f64, r: f64) -> f64 {
    4.0 * PI * n_wm * r.powf(3.0 - m) / (m - 3.0)
}
