mod common;

use std::sync::Arc;

use common::{bandlimited, cosine, gaussian, unit};
use gelfand_core::faddeev::{solve_mu, MuOptions};
use gelfand_core::forward::{delta_norm, dtn_map, ForwardSolver};
use gelfand_core::geometry::{make_theta_pair, Domain, MomentumPair};
use gelfand_core::identity::{
    c9, calibrate_constant, check_identity, hdiff_boundary, hdiff_volume, verify_lemma21, verify_lemma32,
};
use gelfand_core::potential::{Potential, PotentialPair};

fn born_pair(d: &Arc<Domain>) -> PotentialPair {
    let v1 = gaussian(d, 1.0, [0.0; 3], 0.08);
    let v2 = v1.add(&cosine(d, 0.5, [0.1, 0.0, 0.0], 0.15)).unwrap();
    PotentialPair::new(v1, v2).unwrap()
}

fn pair() -> MomentumPair {
    make_theta_pair(4.0, 2.0, [1.0, 0.0, 0.0]).unwrap()
}

#[test]
fn equal_potentials_give_zero() {
    let d = unit(10);
    let v = cosine(&d, 2.0, [0.0; 3], 0.25);
    let fix = PotentialPair::new(v.clone(), v.clone()).unwrap();
    let s = ForwardSolver::new(&v, 4.0).unwrap();
    let check = check_identity(&fix, &s, &s, &pair(), &MuOptions::default()).unwrap();
    assert_eq!(check.hdiff_volume.norm(), 0.0);
    assert_eq!(check.hdiff_boundary.norm(), 0.0);
    assert_eq!(check.identity_mismatch(), 0.0);
    let rec = verify_lemma32(&fix, &pair(), &MuOptions::default()).unwrap();
    assert_eq!((rec.residual, rec.implied_c6), (0.0, 0.0));
    let rec = verify_lemma21(&fix, &pair(), 0.0, 0.1).unwrap();
    assert_eq!((rec.lhs, rec.implied_c1), (0.0, 0.0));
    assert!(rec.holds(1e-9));
}

#[test]
fn volume_and_boundary_forms_agree_under_refinement() {
    let mut last = f64::INFINITY;
    for n in [10, 16] {
        let d = unit(n);
        let fix = born_pair(&d);
        let s1 = ForwardSolver::new(&fix.v1, 4.0).unwrap();
        let s2 = ForwardSolver::new(&fix.v2, 4.0).unwrap();
        let check = check_identity(&fix, &s1, &s2, &pair(), &MuOptions::default()).unwrap();
        let mm = check.identity_mismatch();
        assert!(mm <= 0.1, "n = {n}: {mm}");
        assert!(mm < last, "n = {n}: {mm} after {last}");
        last = mm;
        // Born regime: all three forms track v̂₂ - v̂₁
        let scale = check.vhat_diff.norm();
        assert!(check.residual_volume <= 0.1 * scale);
        assert!(check.residual_lemma32 <= 0.1 * scale);
    }
}

#[test]
fn volume_form_is_linear_in_the_difference() {
    let d = unit(10);
    let v1 = gaussian(&d, 1.0, [0.0; 3], 0.08);
    let wa = cosine(&d, 0.7, [0.0; 3], 0.2);
    let wb = bandlimited(&d, 0.4, 0.25, 2);
    let p = pair();
    let s1 = solve_mu(&v1, &p.minus_l(), &MuOptions::default()).unwrap();
    // any state at k serves: the form only multiplies by the stored μ
    let s2 = solve_mu(&v1.add(&wa).unwrap(), &p.k, &MuOptions::default()).unwrap();
    let form = |w: &Potential| hdiff_volume(&PotentialPair::new(v1.clone(), v1.add(w).unwrap()).unwrap(), &s1, &s2, &p).unwrap();
    let a = form(&wa);
    let b = form(&wb);
    let ab = form(&wa.add(&wb).unwrap());
    assert!((ab - a - b).norm() <= 1e-12 * (a.norm() + b.norm()));
    let scaled = form(&wa.scaled(-2.5));
    assert!((scaled + a * 2.5).norm() <= 1e-12 * a.norm());
}

#[test]
fn swapping_the_potentials_negates_the_volume_form() {
    let d = unit(10);
    let fix = born_pair(&d);
    let p = pair();
    let s1 = solve_mu(&fix.v1, &p.minus_l(), &MuOptions::default()).unwrap();
    let s2 = solve_mu(&fix.v2, &p.k, &MuOptions::default()).unwrap();
    let forward = hdiff_volume(&fix, &s1, &s2, &p).unwrap();
    // roles: k' = -l, l' = -k, so ξ' = ξ; the first state is now μ₂(k), the second μ₁(-l)
    let swapped_pair = MomentumPair::from_k(p.minus_l(), p.xi, p.energy).unwrap();
    let swapped = PotentialPair::new(fix.v2.clone(), fix.v1.clone()).unwrap();
    let back = hdiff_volume(&swapped, &s2, &s1, &swapped_pair).unwrap();
    assert!((forward + back).norm() <= 1e-12 * forward.norm());
}

#[test]
fn boundary_form_obeys_the_trace_bound() {
    let d = unit(10);
    let fix = born_pair(&d);
    let p = pair();
    let (m1, m2) = (dtn_map(&fix.v1, 4.0).unwrap(), dtn_map(&fix.v2, 4.0).unwrap());
    let delta = delta_norm(&m1, &m2).unwrap();
    let s1 = solve_mu(&fix.v1, &p.minus_l(), &MuOptions::default()).unwrap();
    let s2 = solve_mu(&fix.v2, &p.k, &MuOptions::default()).unwrap();
    let hb = hdiff_boundary(&m1, &m2, &s1, &s2, &p).unwrap();
    let sup = |s: &gelfand_core::faddeev::FaddeevState| {
        let t = s.boundary_trace();
        t.values.iter().map(|c| c.norm()).fold(0.0, f64::max) * t.log_scale.exp()
    };
    let bound = c9(&d) * sup(&s1) * delta * sup(&s2);
    assert!(hb.norm() <= bound, "{} vs {bound}", hb.norm());
    assert_eq!(hdiff_boundary(&m1, &m1, &s1, &s2, &p).unwrap().norm(), 0.0);
}

#[test]
fn energy_mismatch_is_reported() {
    let d = unit(10);
    let fix = born_pair(&d);
    let p = pair();
    let m1 = dtn_map(&fix.v1, 1.0).unwrap();
    let s1 = solve_mu(&fix.v1, &p.minus_l(), &MuOptions::default()).unwrap();
    let s2 = solve_mu(&fix.v2, &p.k, &MuOptions::default()).unwrap();
    assert!(hdiff_boundary(&m1, &m1, &s1, &s2, &p).is_err());
    // states in the wrong slots
    assert!(hdiff_volume(&fix, &s2, &s1, &p).is_err());
}

#[test]
fn calibration_is_max_based() {
    let a = calibrate_constant([0.1, 0.4, 0.2]).unwrap();
    assert!((a - 0.6).abs() < 1e-15);
    let b = calibrate_constant([0.1, 0.4, 0.2, 0.3]).unwrap();
    assert!(b >= a);
    assert!(calibrate_constant([0.0, 0.0]).is_err());
}

#[test]
fn lemma21_rejects_infeasible_frequencies() {
    let d = unit(10);
    let fix = born_pair(&d);
    let mut p = make_theta_pair(0.0, 1.0, [0.0; 3]).unwrap();
    p.xi = [5.0, 0.0, 0.0];
    assert!(verify_lemma21(&fix, &p, 0.1, 0.1).is_err());
}
