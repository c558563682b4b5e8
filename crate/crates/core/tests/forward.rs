mod common;

use std::f64::consts::PI;

use common::{cosine, gaussian, loglog_slope, unit};
use gelfand_core::forward::{delta_norm, dtn_map, read_dtn, write_dtn, ForwardSolver};
use gelfand_core::geometry::Domain;
use gelfand_core::potential::Potential;

fn trace(d: &Domain, f: impl Fn([f64; 3]) -> f64) -> Vec<f64> {
    d.boundary_nodes().iter().map(|b| f(b.position)).collect()
}

/// Max-node error of `Φ` applied to the trace of a harmonic `u` with gradient `grad`.
fn harmonic_error(n: usize, u: impl Fn([f64; 3]) -> f64, grad: impl Fn([f64; 3]) -> [f64; 3]) -> f64 {
    let d = unit(n);
    let s = ForwardSolver::new(&Potential::zero(d.clone()), 0.0).unwrap();
    let phi = s.apply_dtn(&trace(&d, &u)).unwrap();
    d.boundary_nodes()
        .iter()
        .zip(&phi)
        .map(|(b, p)| {
            let g = grad(b.position);
            let exact = g[0] * b.normal[0] + g[1] * b.normal[1] + g[2] * b.normal[2];
            (p - exact).abs()
        })
        .fold(0.0, f64::max)
}

#[test]
fn linear_trace_is_reproduced_on_every_grid() {
    for n in [16, 24, 32] {
        let e = harmonic_error(n, |x| x[2], |_| [0.0, 0.0, 1.0]);
        assert!(e < 1e-8, "n = {n}: {e:e}");
    }
}

#[test]
fn cubic_harmonic_converges_at_second_order() {
    // x₃³ - (3/2) x₃ (x₁² + x₂²) is harmonic
    let u = |x: [f64; 3]| x[2].powi(3) - 1.5 * x[2] * (x[0] * x[0] + x[1] * x[1]);
    let grad = |x: [f64; 3]| [-3.0 * x[2] * x[0], -3.0 * x[2] * x[1], 3.0 * x[2] * x[2] - 1.5 * (x[0] * x[0] + x[1] * x[1])];
    let ns = [16usize, 24, 32];
    let errs: Vec<f64> = ns.iter().map(|&n| harmonic_error(n, u, grad)).collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
    let hs: Vec<f64> = ns.iter().map(|&n| 1.0 / (n as f64 + 1.0)).collect();
    let order = loglog_slope(&hs, &errs);
    assert!(order >= 1.8, "order {order}, errors {errs:?}");
}

#[test]
fn smallest_dirichlet_eigenvalue_near_continuum() {
    let d = unit(32);
    let s = ForwardSolver::new(&Potential::zero(d.clone()), 0.0).unwrap();
    let continuum = 3.0 * PI * PI;
    assert!((s.margin() - continuum).abs() <= 0.05 * continuum, "{}", s.margin());
    let h = d.spacing();
    let discrete = 12.0 / (h * h) * (PI * h / 2.0).sin().powi(2);
    assert!((s.margin() - discrete).abs() <= 1e-6 * discrete);
}

#[test]
fn delta_is_a_metric() {
    let d = unit(10);
    let v1 = gaussian(&d, 1.0, [0.0; 3], 0.07);
    let v2 = cosine(&d, 2.0, [0.0, 0.0, 0.0], 0.2);
    let v3 = v1.add(&v2).unwrap();
    let maps: Vec<_> = [&v1, &v2, &v3].iter().map(|v| dtn_map(v, 2.0).unwrap()).collect();
    for a in &maps {
        assert_eq!(delta_norm(a, a).unwrap(), 0.0);
        for b in &maps {
            assert_eq!(delta_norm(a, b).unwrap(), delta_norm(b, a).unwrap());
            for c in &maps {
                let lhs = delta_norm(a, c).unwrap();
                let rhs = delta_norm(a, b).unwrap() + delta_norm(b, c).unwrap();
                assert!(lhs <= rhs * (1.0 + 1e-14));
            }
        }
    }
    assert!(delta_norm(&maps[0], &maps[1]).unwrap() > 0.0);
}

#[test]
fn delta_grows_with_the_perturbation() {
    let d = unit(10);
    let v1 = gaussian(&d, 1.0, [0.0; 3], 0.07);
    let w = cosine(&d, 1.0, [0.0; 3], 0.22);
    let base = dtn_map(&v1, 1.0).unwrap();
    let deltas: Vec<f64> = [0.01, 0.1, 1.0, 4.0]
        .iter()
        .map(|&eps| delta_norm(&base, &dtn_map(&v1.add(&w.scaled(eps)).unwrap(), 1.0).unwrap()).unwrap())
        .collect();
    assert!(deltas.windows(2).all(|p| p[1] > p[0]), "{deltas:?}");
    // first order in ε for small perturbations
    let ratio = deltas[1] / deltas[0];
    assert!((ratio - 10.0).abs() < 0.5, "{ratio}");
}

#[test]
fn dense_map_agrees_with_direct_solves() {
    let d = unit(10);
    let v = gaussian(&d, 3.0, [0.0; 3], 0.07);
    let s = ForwardSolver::new(&v, 5.0).unwrap();
    let map = s.dtn_map().unwrap();
    let g = trace(&d, |x| (2.0 * x[0]).cos() + x[1] * x[2]);
    let direct = s.apply_dtn(&g).unwrap();
    let via = gelfand_core::forward::BoundaryOperator::apply(&map, &g).unwrap();
    let scale = direct.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    for (a, b) in direct.iter().zip(&via) {
        assert!((a - b).abs() <= 1e-9 * scale);
    }
}

#[test]
fn dtn_file_roundtrip_keeps_checksum() {
    let d = unit(10);
    let map = dtn_map(&gaussian(&d, 1.0, [0.0; 3], 0.07), 1.0).unwrap();
    let mut buf = Vec::new();
    write_dtn(&map, &mut buf).unwrap();
    let back = read_dtn(&mut buf.as_slice()).unwrap();
    assert_eq!(back.checksum(), map.checksum());
    assert_eq!(delta_norm(&map, &back).unwrap(), 0.0);
}
