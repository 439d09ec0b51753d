#![allow(clippy::excessive_precision)]

mod common;

use common::*;
use duopoly_core::equilibria::{jacobian_at, jacobian_entries, JacobianData, JacobianEntries};
use duopoly_core::integrator::rk4_step;
use duopoly_core::liapunov::{
    decay_envelope, nonlinear_terms, peculiar_planar, peculiar_planar_unscaled, rionero_v, rionero_vdot,
};
use duopoly_core::sampling::{self, ParamRanges};
use duopoly_core::{build_bundle, LiapunovBundle, LiapunovError, ModelParams, Perturbation, PlanarSystem, State};
use proptest::prelude::*;
use rand::Rng;

fn reference_bundle() -> LiapunovBundle {
    let p = reference();
    build_bundle(&jacobian_at(&p, &State::new(0.8, 0.6)), &p).unwrap()
}

fn max_q(xs: &[Q]) -> Q {
    xs.iter().cloned().fold(qi(0), |m, x| if x > m { x } else { m })
}

fn abs_q(x: Q) -> Q {
    if x < qi(0) {
        -x
    } else {
        x
    }
}

/// Exact constants written out from their defining formulas.
struct ExactConstants {
    alpha: [Q; 3],
    m: [Q; 4],
    delta: [Q; 2],
    h1: Q,
    radius_sq: Q,
}

fn exact_constants(p: &ModelParams<Q>, e: &State<Q>) -> ExactConstants {
    let two = qi(2);
    let a11 = p.a * (p.theta1 - e.v * p.gamma - two * e.u * p.l1);
    let a12 = -(p.a * e.u * p.gamma);
    let a21 = -(p.nu * p.gamma * e.v);
    let a22 = p.nu * (p.theta2 - p.gamma * e.u - two * e.v * p.l2);
    let a0 = a11 * a22 - a12 * a21;
    let i0 = abs_q(a11 + a22);
    let alpha1 = a0 + a21 * a21 + a22 * a22;
    let alpha2 = a0 + a11 * a11 + a12 * a12;
    let alpha3 = a11 * a21 + a12 * a22;
    let m = [
        abs_q(alpha3 * (p.a * p.l1 + p.nu * p.gamma) - alpha1 * p.a * p.gamma),
        abs_q(alpha3 * (p.nu * p.l2 + p.a * p.gamma) - alpha2 * p.nu * p.gamma),
        alpha1 * p.a * p.l1,
        alpha2 * p.nu * p.l2,
    ];
    let mm = max_q(&m);
    let d1 = a0 / two;
    let d2 = a0 / two + a11 * a11 + a21 * a21 + a12 * a12 + a22 * a22;
    let num = a0 * i0 * d1;
    ExactConstants {
        alpha: [alpha1, alpha2, alpha3],
        m,
        delta: [d1, d2],
        h1: a0 * i0 / d2,
        radius_sq: num * num / (two * mm * mm * d2 * d2),
    }
}

#[test]
fn reference_bundle_constants() {
    let exact = exact_constants(&reference_exact(), &e3_exact());
    assert_eq!(exact.alpha, [q(3, 5), qi(2), q(2, 5)]);
    assert_eq!(exact.m, [q(13, 30), q(1, 5), q(9, 10), q(4, 3)]);
    assert_eq!(exact.delta, [q(1, 5), qi(2)]);
    assert_eq!(exact.h1, q(8, 25));
    assert_eq!(exact.radius_sq, q(18, 15625));

    let b = reference_bundle();
    let close = |x: f64, e: Q| rel_err(x, to_f64(e)) <= 1e-12;
    assert!(close(b.alpha1, exact.alpha[0]) && close(b.alpha2, exact.alpha[1]) && close(b.alpha3, exact.alpha[2]));
    for (m, e) in b.m.iter().zip(exact.m) {
        assert!(close(*m, e));
    }
    assert!(close(b.m_max, q(4, 3)));
    assert!(close(b.delta1, exact.delta[0]) && close(b.delta2, exact.delta[1]));
    assert!(rel_err(b.h1, 0.32) <= 1e-10);
    assert!(rel_err(b.radius_sq, 1.152e-3) <= 1e-10);
    // h2 = √2·(4/3)/(1/5)^{3/2}, 40-digit reference.
    assert!(rel_err(b.h2, 21.081851067789195546659290296218123558) <= 1e-10);
    assert!(b.alpha3_positive);
    assert!(!b.global_ok);
    assert!(2.0 > b.radius_sq);
}

#[test]
fn symmetric_anchor_constants() {
    let p = reference();
    let j = JacobianData::from_entries(JacobianEntries { a11: -1.0, a12: 0.0, a21: 0.0, a22: -1.0 });
    let b = build_bundle(&j, &p).unwrap();
    assert_eq!((b.alpha1, b.alpha2, b.alpha3), (2.0, 2.0, 0.0));
    assert_eq!((b.delta1, b.delta2), (0.5, 2.5));
    assert!((b.h1 - 0.8).abs() < 1e-15);
}

#[test]
fn v_examples_exact() {
    let j = jacobian_entries(&reference_exact(), &e3_exact());
    assert_eq!(rionero_v(&j, &qi(0), &qi(0)), qi(0));
    assert_eq!(rionero_v(&j, &qi(1), &qi(0)), q(3, 10));
    assert_eq!(rionero_v(&j, &qi(0), &qi(1)), qi(1));
    let b = reference_bundle();
    let anchor = State::new(0.8, 0.6);
    assert!((b.v(&Perturbation::new(1.0, 0.0, anchor)) - 0.3).abs() < 1e-15);
}

#[test]
fn vdot_axis_example_exact() {
    let p = reference_exact();
    let j = jacobian_entries(&p, &e3_exact());
    let eps = q(1, 100);
    let expected = -(q(16, 25) * eps * eps) - q(9, 10) * eps * eps * eps;
    assert_eq!(rionero_vdot(&j, &p, &eps, &qi(0)), expected);
    assert_eq!(rionero_vdot(&j, &p, &qi(0), &qi(0)), qi(0));
}

/// ∇V · (linear part + nonlinearity), with the partials of the quadratic form
/// written out by hand.
fn chain_rule_vdot(p: &ModelParams<Q>, j: &JacobianEntries<Q>, du: Q, dv: Q) -> Q {
    let det = j.a11 * j.a22 - j.a12 * j.a21;
    let dvdu = det * du - j.a21 * (j.a11 * dv - j.a21 * du) - j.a22 * (j.a12 * dv - j.a22 * du);
    let dvdv = det * dv + j.a11 * (j.a11 * dv - j.a21 * du) + j.a12 * (j.a12 * dv - j.a22 * du);
    let f = -(p.a * p.gamma * du * dv) - p.a * p.l1 * du * du;
    let g = -(p.nu * p.gamma * du * dv) - p.nu * p.l2 * dv * dv;
    dvdu * (j.a11 * du + j.a12 * dv + f) + dvdv * (j.a21 * du + j.a22 * dv + g)
}

proptest! {
    #[test]
    fn vdot_equals_chain_rule_exactly(n in -400i128..400, m in -400i128..400) {
        let p = reference_exact();
        let j = jacobian_entries(&p, &e3_exact());
        let (du, dv) = (q(n, 1000), q(m, 1000));
        prop_assert_eq!(rionero_vdot(&j, &p, &du, &dv), chain_rule_vdot(&p, &j, du, dv));
    }

    #[test]
    fn vdot_equals_chain_rule_other_parameters(n in -50i128..50, m in -50i128..50, g in 1i128..4) {
        // Integer-friendly admissible family: γ < 4 < L₁ = L₂ = 5.
        let p = ModelParams::new(q(1, 3), q(3, 4), qi(g), qi(7), qi(6), qi(5), qi(5)).unwrap();
        let d = p.l1 * p.l2 - p.gamma * p.gamma;
        let e = State::new((p.theta1 * p.l2 - p.theta2 * p.gamma) / d, (p.theta2 * p.l1 - p.theta1 * p.gamma) / d);
        let j = jacobian_entries(&p, &e);
        let (du, dv) = (q(n, 100), q(m, 100));
        prop_assert_eq!(rionero_vdot(&j, &p, &du, &dv), chain_rule_vdot(&p, &j, du, dv));
    }
}

fn random_bundles(count: usize, seed: u64) -> Vec<(ModelParams, State, LiapunovBundle)> {
    let mut rng = sampling::rng(seed);
    (0..count)
        .map(|_| {
            let p = sampling::random_admissible_params(&mut rng, &ParamRanges::default());
            let e = duopoly_core::equilibria::conjectural_point(&p).unwrap();
            let b = build_bundle(&jacobian_at(&p, &e), &p).unwrap();
            (p, e, b)
        })
        .collect()
}

#[test]
fn sandwich_and_cubic_bound_on_random_perturbations() {
    let mut bundles = random_bundles(9, 5);
    bundles.push((reference(), State::new(0.8, 0.6), reference_bundle()));
    let mut rng = sampling::rng(99);
    for i in 0..100_000 {
        let (p, e, b) = &bundles[i % bundles.len()];
        let scale = 10f64.powf(rng.gen_range(-4.0..1.0));
        let pert = Perturbation::new(scale * rng.gen_range(-1.0..1.0), scale * rng.gen_range(-1.0..1.0), *e);
        let norm = pert.norm_sq();
        let v = b.v(&pert);
        assert!(b.delta1 * norm <= v * (1.0 + 1e-12), "lower sandwich at {pert:?}");
        assert!(v <= b.delta2 * norm * (1.0 + 1e-12), "upper sandwich at {pert:?}");
        let psi = b.psi(&pert, p);
        assert!(psi.abs() <= std::f64::consts::SQRT_2 * b.m_max * norm.powf(1.5) * (1.0 + 1e-12));
    }
}

#[test]
fn derivative_inequality_inside_basin() {
    let mut bundles = random_bundles(9, 6);
    bundles.push((reference(), State::new(0.8, 0.6), reference_bundle()));
    let mut rng = sampling::rng(100);
    for i in 0..20_000 {
        let (p, e, b) = &bundles[i % bundles.len()];
        let r = b.radius_sq.sqrt() * rng.gen::<f64>().sqrt();
        let phi = rng.gen_range(0.0..std::f64::consts::TAU);
        let pert = Perturbation::new(r * phi.cos(), r * phi.sin(), *e);
        let v = b.v(&pert);
        let rhs = -(b.h1 - b.h2 * v.sqrt()) * v;
        let vdot = b.vdot(&pert, p);
        assert!(vdot <= rhs + 1e-12 * v.abs().max(f64::MIN_POSITIVE) * (b.h1 + b.h2), "{vdot} > {rhs}");
    }
}

#[test]
fn vdot_matches_numeric_derivative_along_flow() {
    let p = reference();
    let b = reference_bundle();
    let anchor = State::new(0.8, 0.6);
    let mut rng = sampling::rng(4);
    let h = 1e-3;
    for _ in 0..200 {
        let r = 0.01 * rng.gen::<f64>().sqrt().max(1e-3);
        let phi = rng.gen_range(0.0..std::f64::consts::TAU);
        let s0 = State::new(anchor.u + r * phi.cos(), anchor.v + r * phi.sin());
        let mut s = s0;
        let mut vs = [0.0; 5];
        for v in vs.iter_mut() {
            *v = b.v(&Perturbation::from_state(&s, &anchor));
            s = rk4_step(&p, s, h);
        }
        // Fourth-order forward difference.
        let numeric = (-25.0 * vs[0] + 48.0 * vs[1] - 36.0 * vs[2] + 16.0 * vs[3] - 3.0 * vs[4]) / (12.0 * h);
        let pert = Perturbation::from_state(&s0, &anchor);
        let analytic = b.vdot(&pert, &p);
        assert!((analytic - numeric).abs() <= 1e-6 * pert.norm_sq(), "{analytic} vs {numeric}");
        assert!((analytic - numeric).abs() <= 1e-6 * analytic.abs());
    }
}

#[test]
fn decay_envelope_examples() {
    let b = reference_bundle();
    let v0 = 0.5 * b.certified_level();
    assert_eq!(b.decay_envelope(v0, 0.0).unwrap(), v0);
    // η = 1/2 ⇒ h₂√V0 = h₁/2.
    let v_half = (b.h1 / (2.0 * b.h2)).powi(2);
    let eta = b.certified_eta(v_half).unwrap();
    assert!((eta - 0.5).abs() < 1e-12);
    let halving = 4.332169878499658183857700759113603550472;
    let ratio = b.decay_envelope(v_half, halving).unwrap() / v_half;
    assert!((ratio - 0.5).abs() < 1e-10);
    assert!((decay_envelope(v_half, &b, 0.5, halving) / v_half - 0.5).abs() < 1e-10);
    let too_big = (b.h1 / b.h2).powi(2);
    assert!(matches!(b.decay_envelope(too_big, 1.0), Err(LiapunovError::OutsideBasin { .. })));
}

#[test]
fn local_condition_examples() {
    let b = reference_bundle();
    let anchor = State::new(0.8, 0.6);
    assert!(b.local_condition(&Perturbation::new(0.0, 0.0, anchor)));
    let along = |n2: f64| Perturbation::new(n2.sqrt(), 0.0, anchor);
    assert!(b.local_condition(&along(1.0e-3)));
    assert!(!b.local_condition(&along(2.0e-3)));
}

#[test]
fn planar_examples() {
    let sys = PlanarSystem::new(-1.0, 0.0, 0.0, -1.0, |_: f64, _: f64| (0.0, 0.0));
    let w = peculiar_planar(&sys, 1.0, 0.0);
    assert_eq!((w.w, w.w_dot), (-2.0, -2.0));
    assert_eq!(peculiar_planar(&sys, 0.0, 0.0).w, 0.0);
}

#[test]
fn stripped_planar_form_reproduces_v() {
    let p = reference();
    let b = reference_bundle();
    let j = b.jac;
    let nl = move |x: f64, y: f64| nonlinear_terms(&p, &x, &y);
    let sys = PlanarSystem::new(j.a11, j.a12, j.a21, j.a22, nl);
    let anchor = State::new(0.8, 0.6);
    let mut rng = sampling::rng(8);
    for _ in 0..10_000 {
        let (x, y) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let w = peculiar_planar(&sys, x, y);
        let stripped = peculiar_planar_unscaled(&sys, x, y);
        let v = b.v(&Perturbation::new(x, y, anchor));
        assert!(rel_err(stripped.w, v) <= 1e-12);
        assert!(rel_err(w.w / sys.trace(), v) <= 1e-12);
        // As printed, the scaled W is negative for this stable anchor.
        assert!(w.w <= 0.0);
    }
}
