use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ForwardSolver;
use crate::geometry::Domain;

const MAX_STEPS: usize = 80;

/// Smallest singular value of the (symmetric) interior operator, from Lanczos
/// on its inverse. Returns 0 when the factorisation produces non-finite values.
pub(super) fn smallest_singular_value(solver: &ForwardSolver) -> f64 {
    let len = solver.domain().interior_len();
    let steps = MAX_STEPS.min(len);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut q: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
    normalise(&mut q);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(steps);
    let mut alpha = Vec::with_capacity(steps);
    let mut beta: Vec<f64> = Vec::with_capacity(steps);
    let mut last = f64::NAN;
    for step in 0..steps {
        let mut w = solver.solve_vec(&q);
        if w.iter().any(|x| !x.is_finite()) {
            return 0.0;
        }
        let a = dot(&w, &q);
        alpha.push(a);
        basis.push(q.clone());
        // full reorthogonalisation, twice
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&w, b);
                w.iter_mut().zip(b).for_each(|(wi, bi)| *wi -= c * bi);
            }
        }
        let dominant = {
            let (lo, hi) = tridiagonal_extremes(&alpha, &beta);
            lo.abs().max(hi.abs())
        };
        let bnorm = dot(&w, &w).sqrt();
        let settled = step >= 6 && (dominant - last).abs() <= 1e-10 * dominant;
        if settled || bnorm <= 1e-13 * dominant || step + 1 == steps {
            return 1.0 / dominant;
        }
        last = dominant;
        beta.push(bnorm);
        q = w.iter().map(|x| x / bnorm).collect();
    }
    unreachable!()
}

/// Analytic smallest `|λ - E|` over the discrete Dirichlet spectrum of `-Δ_h`
/// (`v = 0`): `λ = Σ_a (4/h²) sin²(i_a π / (2(n+1)))`.
pub fn free_dirichlet_margin(domain: &Domain, energy: f64) -> f64 {
    let n = domain.n();
    let h = domain.spacing();
    let mu: Vec<f64> = (1..=n)
        .map(|i| 4.0 / (h * h) * (i as f64 * std::f64::consts::PI / (2.0 * (n as f64 + 1.0))).sin().powi(2))
        .collect();
    let mut best = f64::INFINITY;
    for a in &mu {
        for b in &mu {
            for c in &mu {
                best = best.min((a + b + c - energy).abs());
            }
        }
    }
    best
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalise(x: &mut [f64]) {
    let n = dot(x, x).sqrt();
    x.iter_mut().for_each(|v| *v /= n);
}

/// Number of eigenvalues below `x` of the symmetric tridiagonal matrix.
fn sturm_count(alpha: &[f64], beta: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0;
    for i in 0..alpha.len() {
        let off = if i == 0 { 0.0 } else { beta[i - 1] * beta[i - 1] };
        d = alpha[i] - x - if i == 0 { 0.0 } else { off / d };
        if d == 0.0 {
            d = f64::EPSILON * (alpha[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

fn tridiagonal_extremes(alpha: &[f64], beta: &[f64]) -> (f64, f64) {
    let k = alpha.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..k {
        let r = if i > 0 { beta[i - 1].abs() } else { 0.0 } + if i + 1 < k { beta[i].abs() } else { 0.0 };
        lo = lo.min(alpha[i] - r);
        hi = hi.max(alpha[i] + r);
    }
    let bisect = |target: usize| {
        let (mut a, mut b) = (lo, hi);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if sturm_count(alpha, beta, mid) > target {
                b = mid;
            } else {
                a = mid;
            }
            if b - a <= 1e-15 * (a.abs().max(b.abs())) {
                break;
            }
        }
        0.5 * (a + b)
    };
    (bisect(0), bisect(k - 1))
}
