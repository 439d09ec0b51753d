#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod common;

use common::*;
use duopoly_core::equilibria::{
    analyze, classify, closed_form_traces, conjectural_admissible, critical_points, jacobian_at,
    jacobian_entries, Classification, EquilibriumKind,
};
use duopoly_core::sampling::{self, ParamRanges};
use duopoly_core::verifier::fd_jacobian_check;
use duopoly_core::{ModelParams, State};
use proptest::prelude::*;

#[test]
fn critical_points_exact() {
    let cps = critical_points(&reference_exact());
    assert_eq!(cps[0].point, Some(State::new(qi(0), qi(0))));
    assert_eq!(cps[1].point, Some(State::new(qi(0), qi(1))));
    assert_eq!(cps[2].point, Some(State::new(qi(1), qi(0))));
    assert_eq!(cps[3].kind, EquilibriumKind::Conjectural);
    assert_eq!(cps[3].point, Some(e3_exact()));
    assert!(cps.iter().all(|c| c.admissible));
}

#[test]
fn e3_float_path_within_1e14() {
    let e3 = critical_points(&reference())[3].point.unwrap();
    assert!((e3.u - 0.8).abs() <= 1e-14 && (e3.v - 0.6).abs() <= 1e-14);
}

#[test]
fn weak_coupling_approaches_decoupled_monopolies() {
    let p = ModelParams::new(q(1, 2), q(1, 3), q(1, 1_000_000_000), qi(3), qi(2), qi(3), qi(2)).unwrap();
    let e3 = critical_points(&p)[3].point.unwrap();
    assert!((to_f64(e3.u) - 1.0).abs() < 1e-8 && (to_f64(e3.v) - 1.0).abs() < 1e-8);
}

#[test]
fn admissibility_boundary_exact() {
    // θ₁L₂ = θ₂γ puts E3 on the v-axis.
    let p = ModelParams::new(qi(1), qi(1), qi(1), qi(1), qi(1), qi(2), qi(1)).unwrap();
    let e3 = &critical_points(&p)[3];
    assert_eq!(e3.point.unwrap().u, qi(0));
    assert!(!e3.admissible);
    assert!(!conjectural_admissible(&p));
}

#[test]
fn jacobian_at_e3_exact() {
    let p = reference_exact();
    let j = jacobian_entries(&p, &e3_exact());
    assert_eq!((j.a11, j.a12, j.a21, j.a22), (q(-6, 5), q(-2, 5), q(-1, 5), q(-2, 5)));
    assert_eq!(j.trace(), q(-8, 5));
    assert_eq!(j.det(), q(2, 5));
    assert_eq!(j.disc(), q(24, 25));
    // A0 from the parameter formula aν(θ₁L₂ − θ₂γ)(θ₂L₁ − θ₁γ)/(L₁L₂ − γ²).
    let a0 = p.a * p.nu * (p.theta1 * p.l2 - p.theta2 * p.gamma) * (p.theta2 * p.l1 - p.theta1 * p.gamma)
        / (p.l1 * p.l2 - p.gamma * p.gamma);
    assert_eq!(a0, q(2, 5));
}

#[test]
fn jacobian_at_boundary_points_exact() {
    let p = reference_exact();
    let j0 = jacobian_entries(&p, &State::new(qi(0), qi(0)));
    assert_eq!((j0.a11, j0.a12, j0.a21, j0.a22), (q(3, 2), qi(0), qi(0), q(2, 3)));
    let f = jacobian_at(&reference(), &State::new(0.0, 0.0));
    let (l1, l2) = f.eigenvalues.unwrap();
    assert!((l1 - 2.0 / 3.0).abs() < 1e-15 && (l2 - 1.5).abs() < 1e-15);

    let j1 = jacobian_at(&reference(), &State::new(0.0, 1.0));
    let (l1, l2) = j1.eigenvalues.unwrap();
    assert!((l1 + 2.0 / 3.0).abs() < 1e-15 && (l2 - 1.0).abs() < 1e-15);
}

#[test]
fn classification_at_reference() {
    let r = analyze(&reference());
    let classes: Vec<_> = r.iter().map(|e| e.classification.unwrap()).collect();
    assert_eq!(
        classes,
        vec![
            Classification::UnstableNode,
            Classification::Saddle,
            Classification::Saddle,
            Classification::StableNode
        ]
    );
}

#[test]
fn closed_form_traces_exact() {
    let t = closed_form_traces(&reference_exact());
    let e3 = t[3].unwrap();
    assert_eq!((e3.trace, e3.det), (q(-8, 5), q(2, 5)));
    let e0 = t[0].unwrap();
    assert_eq!((e0.trace, e0.det), (q(13, 6), qi(1)));
    assert!(t[1].unwrap().det < qi(0));
    assert!(t[2].unwrap().det < qi(0));
}

#[test]
fn closed_form_traces_omit_inadmissible_e3() {
    let p = ModelParams::checked(0.5, 0.3, 3.0, 3.0, 2.0, 3.0, 2.0).unwrap();
    assert!(closed_form_traces(&p)[3].is_none());
}

#[test]
fn e3_entry_identity_exact() {
    // At E3 the marginal profits vanish, so a11 = −aL₁ū etc. and A0 = aν ū v̄ (L₁L₂ − γ²).
    let p = reference_exact();
    let e = e3_exact();
    let j = jacobian_entries(&p, &e);
    assert_eq!(j.a11, -(p.a * p.l1 * e.u));
    assert_eq!(j.a12, -(p.a * p.gamma * e.u));
    assert_eq!(j.a21, -(p.nu * p.gamma * e.v));
    assert_eq!(j.a22, -(p.nu * p.l2 * e.v));
    assert_eq!(j.det(), p.a * p.nu * e.u * e.v * (p.l1 * p.l2 - p.gamma * p.gamma));
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

#[test]
fn randomized_classification_and_real_spectrum() {
    let mut rng = sampling::rng(2024);
    let mut findings = Vec::new();
    for _ in 0..10_000 {
        let p = sampling::random_admissible_params(&mut rng, &ParamRanges::default());
        let report = analyze(&p);
        let expected = [
            Classification::UnstableNode,
            Classification::Saddle,
            Classification::Saddle,
            Classification::StableNode,
        ];
        for (r, want) in report.iter().zip(expected) {
            let j = r.jacobian.unwrap();
            if r.classification != Some(want) || !(j.disc > 0.0) {
                findings.push((p, r.kind, r.classification, j.disc));
            }
        }
    }
    assert!(findings.is_empty(), "counterexamples: {findings:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn closed_forms_agree_with_jacobian(seed in any::<u64>()) {
        let p = sampling::random_admissible_params(&mut sampling::rng(seed), &ParamRanges::default());
        let traces = closed_form_traces(&p);
        for (cp, td) in critical_points(&p).iter().zip(traces) {
            let j = jacobian_at(&p, &cp.point.unwrap());
            let td = td.unwrap();
            let scale = j.a11.abs() + j.a22.abs();
            prop_assert!((j.trace - td.trace).abs() <= 1e-12 * scale.max(td.trace.abs()));
            prop_assert!(rel(j.det, td.det) <= 1e-12 || (j.det - td.det).abs() <= 1e-12 * scale * scale);
        }
    }

    #[test]
    fn e3_determinant_two_forms(seed in any::<u64>()) {
        let p = sampling::random_admissible_params(&mut sampling::rng(seed), &ParamRanges::default());
        let e = critical_points(&p)[3].point.unwrap();
        let j = jacobian_at(&p, &e);
        let closed = p.a * p.nu * e.u * e.v * (p.l1 * p.l2 - p.gamma * p.gamma);
        // Relative to the size of the summands a11·a22 and a12·a21.
        let terms = (j.a11 * j.a22).abs() + (j.a12 * j.a21).abs();
        prop_assert!((j.det - closed).abs() <= 1e-12 * terms.max(closed.abs()), "{} vs {}", j.det, closed);
        let entry_scale = p.a * (p.theta1 + p.gamma * e.v + 2.0 * p.l1 * e.u);
        prop_assert!((j.a11 + p.a * p.l1 * e.u).abs() <= 1e-12 * entry_scale);
    }

    #[test]
    fn spectral_equation_holds(seed in any::<u64>(), u in 0.0f64..5.0, v in 0.0f64..5.0) {
        let p = sampling::random_admissible_params(&mut sampling::rng(seed), &ParamRanges::default());
        let j = jacobian_at(&p, &State::new(u, v));
        prop_assert!(rel(j.trace, j.a11 + j.a22) <= 1e-12);
        prop_assert!(rel(j.disc, j.trace * j.trace - 4.0 * j.det) <= 1e-10 || (j.disc - (j.trace * j.trace - 4.0 * j.det)).abs() <= 1e-12 * j.trace * j.trace);
        if let Some((l1, l2)) = j.eigenvalues {
            prop_assert!(l1 <= l2);
            let scale = j.trace * j.trace + j.det.abs();
            for l in [l1, l2] {
                prop_assert!((l * l - j.trace * l + j.det).abs() <= 1e-10 * scale.max(l * l));
            }
        }
    }

    #[test]
    fn finite_difference_jacobian(seed in any::<u64>(), u in 0.0f64..5.0, v in 0.0f64..5.0) {
        let p = sampling::random_admissible_params(&mut sampling::rng(seed), &ParamRanges::default());
        let check = fd_jacobian_check(&p, State::new(u, v));
        prop_assert!(check.relative_error <= 1e-5, "{:?}", check);
    }
}

#[test]
fn stable_classification_needs_linear_stability() {
    for r in analyze(&reference()) {
        let j = r.jacobian.unwrap();
        assert_eq!(classify(&j).is_stable(), j.trace < 0.0 && j.det > 0.0);
    }
}
