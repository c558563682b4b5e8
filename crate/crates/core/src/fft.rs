use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Smallest integer `≥ min` whose prime factors are 2, 3 and 5, optionally odd.
pub(crate) fn smooth_len(min: usize, odd: bool) -> usize {
    let mut m = min.max(1);
    loop {
        if (!odd || m % 2 == 1) && is_smooth(m) {
            return m;
        }
        m += 1;
    }
}

fn is_smooth(mut m: usize) -> bool {
    for p in [2, 3, 5] {
        while m % p == 0 {
            m /= p;
        }
    }
    m == 1
}

/// Signed lattice index of FFT bin `p` for a transform of length `m`.
pub(crate) fn signed(p: usize, m: usize) -> i64 {
    if p <= (m - 1) / 2 {
        p as i64
    } else {
        p as i64 - m as i64
    }
}

/// Bin holding signed index `j`, if representable.
pub(crate) fn bin(j: i64, m: usize) -> Option<usize> {
    let lo = -((m / 2) as i64);
    let hi = ((m - 1) / 2) as i64;
    if j < lo || j > hi {
        None
    } else if j >= 0 {
        Some(j as usize)
    } else {
        Some((j + m as i64) as usize)
    }
}

/// Unnormalised cubic FFT of side `m`, row-major with the last axis fastest.
pub(crate) struct Fft3 {
    m: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Fft3 {
    pub(crate) fn new(m: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            m,
            forward: planner.plan_fft_forward(m),
            inverse: planner.plan_fft_inverse(m),
        }
    }

    /// `Σ_p f_p e^{-2πi j·p/m}` in place.
    pub(crate) fn forward(&self, data: &mut [Complex64]) {
        self.run(self.forward.as_ref(), data);
    }

    /// `Σ_j F_j e^{+2πi j·p/m}` in place (no `1/m³`).
    pub(crate) fn inverse(&self, data: &mut [Complex64]) {
        self.run(self.inverse.as_ref(), data);
    }

    fn run(&self, plan: &dyn Fft<f64>, data: &mut [Complex64]) {
        let m = self.m;
        assert_eq!(data.len(), m * m * m);
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        // last axis: contiguous lines
        plan.process_with_scratch(data, &mut scratch);
        // middle axis: gather each plane's columns into contiguous lines
        let mut lines = vec![Complex64::new(0.0, 0.0); m * m];
        for i in 0..m {
            let plane = &mut data[i * m * m..(i + 1) * m * m];
            for j in 0..m {
                for k in 0..m {
                    lines[k * m + j] = plane[j * m + k];
                }
            }
            plan.process_with_scratch(&mut lines, &mut scratch);
            for j in 0..m {
                for k in 0..m {
                    plane[j * m + k] = lines[k * m + j];
                }
            }
        }
        // first axis: one slab of lines per value of the middle index
        for j in 0..m {
            for i in 0..m {
                let src = (i * m + j) * m;
                for k in 0..m {
                    lines[k * m + i] = data[src + k];
                }
            }
            plan.process_with_scratch(&mut lines, &mut scratch);
            for i in 0..m {
                let dst = (i * m + j) * m;
                for k in 0..m {
                    data[dst + k] = lines[k * m + i];
                }
            }
        }
    }
}
