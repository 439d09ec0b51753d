//! The `verify` command: every certification suite on the configured market.

use duopoly_core::equilibria::{analyze_with_tolerance, closed_form_traces, EquilibriumReport};
use duopoly_core::integrator::{self, AbsorbingRect, InvarianceReport};
use duopoly_core::sampling::{self, SampleRng};
use duopoly_core::verifier::{
    self, decay_conformance, discrete_vs_continuous, empirical_order, envelope_check, fd_jacobian_check, gap_blowup_time,
    kappa_bound, liapunov_algebra_sample, sample_certified_perturbation, uniqueness_gap_check_with_kappa, vdot_flow_sample,
    CheckStatus, DecayOptions, VerifyError, HORIZON_FRACTION, NOISE_FLOOR,
};
use duopoly_core::{Classification, LiapunovBundle, ModelParams, Perturbation, State};
use rand::Rng;
use rayon::prelude::*;
use serde_json::{Map, Value};

use crate::commands::{header, interior_bundle};
use crate::config::{RunConfig, SUITES};
use crate::format::{num, obj, state};

pub const DET_TOLERANCE: f64 = 1e-12;
pub const FD_TOLERANCE: f64 = 1e-5;
pub const ORDER_TOLERANCE: f64 = 0.3;
pub const ENVELOPE_REL_TOLERANCE: f64 = 1e-7;
pub const ALGEBRA_TOLERANCE: f64 = 1e-12;
pub const VDOT_TOLERANCE: f64 = 1e-6;
pub const VDOT_MAX_NORM: f64 = 0.01;
pub const ORDER_DTS: [f64; 4] = [0.1, 0.05, 0.025, 0.0125];
pub const ENVELOPE_BOX: f64 = 5.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub status: CheckStatus,
    pub details: Map<String, Value>,
}

impl Check {
    fn new(name: &'static str, status: CheckStatus) -> Self {
        Check { name, status, details: Map::new() }
    }

    fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.details.insert(key.to_string(), value.into());
        self
    }

    fn uncertified(name: &'static str, reason: impl Into<String>) -> Self {
        Check::new(name, CheckStatus::Uncertified).with("reason", reason.into())
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("name".into(), self.name.into());
        m.insert("status".into(), self.status.label().into());
        m.extend(self.details.clone());
        Value::Object(m)
    }
}

struct Context<'a> {
    cfg: &'a RunConfig,
    p: ModelParams,
    reports: [EquilibriumReport; 4],
    interior: Result<(State, LiapunovBundle), String>,
    rect: AbsorbingRect,
}

/// Independent stream per suite, derived from the run seed.
fn suite_rng(seed: u64, name: &str) -> SampleRng {
    let index = SUITES.iter().position(|s| *s == name).unwrap_or(SUITES.len()) as u64;
    sampling::rng(seed ^ (index + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

pub fn run_checks(cfg: &RunConfig, p: &ModelParams) -> Vec<Check> {
    let reports = analyze_with_tolerance(p, cfg.tolerance);
    let interior = interior_bundle(p, &reports);
    let ctx = Context { cfg, p: *p, reports, interior, rect: AbsorbingRect::from_params(p) };
    cfg.verify.suites.par_iter().map(|name| run_suite(&ctx, name)).collect()
}

fn run_suite(ctx: &Context, name: &'static str) -> Check {
    let mut rng = suite_rng(ctx.cfg.seed, name);
    match name {
        "classification" => classification(ctx),
        "closed_form_traces" => traces(ctx),
        "fd_jacobian" => fd_jacobian(ctx, &mut rng),
        "rk4_order" => rk4_order(ctx),
        "envelopes" => envelopes(ctx, &mut rng),
        "positive_invariance" => invariance(ctx, &mut rng),
        "liapunov_algebra" => algebra(ctx, &mut rng),
        "vdot_consistency" => vdot(ctx, &mut rng),
        "liapunov_decay" => decay(ctx, &mut rng),
        "uniqueness" => uniqueness(ctx, &mut rng),
        "discrete_fixed_points" => discrete(ctx),
        _ => unreachable!("suite names are validated with the config"),
    }
}

fn classification(ctx: &Context) -> Check {
    const NAME: &str = "classification";
    let labels: Map<String, Value> = ctx
        .reports
        .iter()
        .map(|r| (r.kind.label().to_string(), r.classification.map_or("degenerate", |c| c.label()).into()))
        .collect();
    if !ctx.reports[3].admissible {
        return Check::uncertified(NAME, "interior equilibrium is not admissible").with("classes", labels);
    }
    let expected = [Classification::UnstableNode, Classification::Saddle, Classification::Saddle, Classification::StableNode];
    let pattern = ctx.reports.iter().zip(expected).all(|(r, e)| r.classification == Some(e));
    let real = ctx.reports.iter().all(|r| r.jacobian.is_some_and(|j| j.disc > 0.0));
    Check::new(NAME, CheckStatus::from_bool(pattern && real))
        .with("classes", labels)
        .with("real_eigenvalues", real)
}

fn traces(ctx: &Context) -> Check {
    let closed = closed_form_traces(&ctx.p);
    let mut worst: f64 = 0.0;
    let mut compared = 0;
    for (r, cf) in ctx.reports.iter().zip(closed) {
        let (Some(j), Some(cf)) = (r.jacobian, cf) else { continue };
        compared += 1;
        let trace_scale = (j.a11.abs() + j.a22.abs()).max(f64::MIN_POSITIVE);
        let det_scale = (j.a11 * j.a22).abs() + (j.a12 * j.a21).abs();
        let det_scale = det_scale.max(j.det.abs()).max(f64::MIN_POSITIVE);
        worst = worst.max((cf.trace - j.trace).abs() / trace_scale);
        worst = worst.max((cf.det - j.det).abs() / det_scale);
    }
    Check::new("closed_form_traces", CheckStatus::from_bool(worst <= DET_TOLERANCE))
        .with("compared", compared)
        .with("max_relative_error", num(worst))
        .with("tolerance", num(DET_TOLERANCE))
}

fn fd_jacobian(ctx: &Context, rng: &mut SampleRng) -> Check {
    let mut points: Vec<State> = ctx.reports.iter().filter(|r| r.admissible).filter_map(|r| r.point).collect();
    for _ in 0..32 {
        points.push(ctx.rect.sample_interior(rng));
    }
    let worst = points.iter().map(|s| fd_jacobian_check(&ctx.p, *s).relative_error).fold(0.0, f64::max);
    Check::new("fd_jacobian", CheckStatus::from_bool(worst <= FD_TOLERANCE))
        .with("points", points.len())
        .with("max_relative_error", num(worst))
        .with("tolerance", num(FD_TOLERANCE))
}

fn rk4_order(ctx: &Context) -> Check {
    let s0 = State::new(2.0 * ctx.rect.u_max, 0.1 * ctx.rect.v_max);
    match empirical_order(&ctx.p, s0, 2.0, &ORDER_DTS) {
        Ok(fit) => Check::new("rk4_order", CheckStatus::from_bool((fit.order - 4.0).abs() <= ORDER_TOLERANCE))
            .with("s0", state(&s0))
            .with("dts", fit.dts.iter().map(|d| num(*d)).collect::<Vec<_>>())
            .with("errors", fit.errors.iter().map(|d| num(*d)).collect::<Vec<_>>())
            .with("order", num(fit.order))
            .with("tolerance", num(ORDER_TOLERANCE)),
        Err(e) => Check::new("rk4_order", CheckStatus::Fail).with("error", e.to_string()),
    }
}

fn box_start(rng: &mut SampleRng) -> State {
    State::new(ENVELOPE_BOX * sampling::open_unit(rng), ENVELOPE_BOX * sampling::open_unit(rng))
}

fn envelopes(ctx: &Context, rng: &mut SampleRng) -> Check {
    let v = &ctx.cfg.verify;
    let dt = ctx.cfg.simulate.dt;
    let starts: Vec<State> = (0..v.samples).map(|_| box_start(rng)).collect();
    let results: Vec<_> = starts.par_iter().map(|s| envelope_check(&ctx.p, *s, v.t_end, dt)).collect();
    let mut worst: f64 = 0.0;
    let mut min_component = f64::INFINITY;
    let mut failures = 0;
    for r in &results {
        match r {
            Ok(c) => {
                worst = worst.max(c.max_ratio_u).max(c.max_ratio_v);
                min_component = min_component.min(c.min_component);
            }
            Err(_) => failures += 1,
        }
    }
    let ok = failures == 0 && worst <= 1.0 + ENVELOPE_REL_TOLERANCE && min_component >= integrator::ORTHANT_ABORT;
    Check::new("envelopes", CheckStatus::from_bool(ok))
        .with("samples", starts.len())
        .with("t_end", num(v.t_end))
        .with("dt", num(dt))
        .with("max_envelope_ratio", num(worst))
        .with("min_component", num(min_component))
        .with("integration_failures", failures)
        .with("tolerance", num(ENVELOPE_REL_TOLERANCE))
}

fn invariance(ctx: &Context, rng: &mut SampleRng) -> Check {
    let v = &ctx.cfg.verify;
    let dt = ctx.cfg.simulate.dt;
    let mut starts = vec![ctx.rect.corner()];
    if let Ok((e3, _)) = &ctx.interior {
        starts.push(*e3);
    }
    starts.extend((0..v.samples).map(|_| ctx.rect.sample_interior(rng)));
    let parts: Vec<InvarianceReport> = starts
        .par_iter()
        .map(|s| integrator::invariance_from(&ctx.p, &ctx.rect, std::slice::from_ref(s), v.t_end, dt))
        .collect();
    let mut report = InvarianceReport { t_end: v.t_end, tolerance: integrator::INVARIANCE_TOLERANCE, ..Default::default() };
    for part in parts {
        report.merge(part);
    }
    let mut check = Check::new("positive_invariance", CheckStatus::from_bool(report.passed()))
        .with("samples", report.samples)
        .with("t_end", num(v.t_end))
        .with("dt", num(dt))
        .with("max_excess", num(report.max_excess))
        .with("violations", report.violations.len())
        .with("integration_failures", report.failures.len())
        .with("tolerance", num(report.tolerance));
    if let Some(w) = report.violations.first() {
        check = check.with("first_violation", obj([("start", state(&w.start)), ("t", num(w.t)), ("excess", num(w.excess))]));
    }
    check
}

fn algebra(ctx: &Context, rng: &mut SampleRng) -> Check {
    const NAME: &str = "liapunov_algebra";
    let (anchor, b) = match &ctx.interior {
        Ok(x) => x,
        Err(reason) => return Check::uncertified(NAME, reason.clone()),
    };
    let (mut lower, mut upper, mut cubic) = (0.0f64, 0.0f64, 0.0f64);
    let n = ctx.cfg.verify.algebra_samples;
    for _ in 0..n {
        let scale = 10f64.powf(rng.gen_range(-4.0..1.0));
        let pert = Perturbation::new(scale * rng.gen_range(-1.0..1.0), scale * rng.gen_range(-1.0..1.0), *anchor);
        let s = liapunov_algebra_sample(&ctx.p, b, &pert);
        lower = lower.max(s.lower_ratio);
        upper = upper.max(s.upper_ratio);
        cubic = cubic.max(s.cubic_ratio);
    }
    let bound = 1.0 + ALGEBRA_TOLERANCE;
    Check::new(NAME, CheckStatus::from_bool(lower <= bound && upper <= bound && cubic <= bound))
        .with("samples", n)
        .with("max_lower_ratio", num(lower))
        .with("max_upper_ratio", num(upper))
        .with("max_cubic_ratio", num(cubic))
        .with("alpha3_positive", b.alpha3_positive)
        .with("tolerance", num(ALGEBRA_TOLERANCE))
}

/// Perturbation radius for the derivative check: inside the certified basin
/// (so `V̇ < 0` and relative errors are meaningful) and at most [`VDOT_MAX_NORM`].
pub fn vdot_radius(b: &LiapunovBundle) -> f64 {
    (0.99 * b.radius_sq * b.delta1 / b.delta2).sqrt().min(VDOT_MAX_NORM)
}

fn vdot(ctx: &Context, rng: &mut SampleRng) -> Check {
    const NAME: &str = "vdot_consistency";
    let (anchor, b) = match &ctx.interior {
        Ok(x) => x,
        Err(reason) => return Check::uncertified(NAME, reason.clone()),
    };
    let r_max = vdot_radius(b);
    let h = 1e-3;
    let mut worst: f64 = 0.0;
    let mut done = 0;
    for _ in 0..ctx.cfg.verify.perturbations.max(1) * 4 {
        let r = r_max * rng.gen_range(0.5..1.0);
        let phi = rng.gen_range(0.0..std::f64::consts::TAU);
        let s0 = State::new(anchor.u + r * phi.cos(), anchor.v + r * phi.sin());
        if !s0.strictly_positive() {
            continue;
        }
        worst = worst.max(vdot_flow_sample(&ctx.p, b, *anchor, s0, h).relative_error());
        done += 1;
    }
    Check::new(NAME, CheckStatus::from_bool(worst <= VDOT_TOLERANCE))
        .with("samples", done)
        .with("max_norm", num(r_max))
        .with("step", num(h))
        .with("max_relative_error", num(worst))
        .with("tolerance", num(VDOT_TOLERANCE))
}

fn decay(ctx: &Context, rng: &mut SampleRng) -> Check {
    const NAME: &str = "liapunov_decay";
    let (anchor, b) = match &ctx.interior {
        Ok(x) => x,
        Err(reason) => return Check::uncertified(NAME, reason.clone()),
    };
    let v = &ctx.cfg.verify;
    let opts = DecayOptions { dt: ctx.cfg.simulate.dt, ..DecayOptions::default() };
    let starts: Vec<State> = (0..v.perturbations).map(|_| sample_certified_perturbation(b, *anchor, rng)).collect();
    let reports: Vec<_> = starts.par_iter().map(|s| decay_conformance(&ctx.p, *s, b, v.decay_t_end, &opts)).collect();
    let count = |st| reports.iter().filter(|r| r.status == st).count();
    let (pass, fail, unc) = (count(CheckStatus::Pass), count(CheckStatus::Fail), count(CheckStatus::Uncertified));
    let worst = reports.iter().map(|r| r.max_envelope_ratio).fold(0.0, f64::max);
    let max_eta = reports.iter().map(|r| r.eta).fold(0.0, f64::max);
    let status = if fail > 0 {
        CheckStatus::Fail
    } else if pass == 0 {
        CheckStatus::Uncertified
    } else {
        CheckStatus::Pass
    };
    Check::new(NAME, status)
        .with("perturbations", reports.len())
        .with("passed", pass)
        .with("failed", fail)
        .with("uncertified", unc)
        .with("t_end", num(v.decay_t_end))
        .with("h1", num(b.h1))
        .with("radius_sq", num(b.radius_sq))
        .with("max_eta", num(max_eta))
        .with("max_envelope_ratio", num(worst))
        .with("tolerance", num(opts.tolerance))
}

/// Pairs checked by the uniqueness suite: a zero-separation pair, a probe near
/// the origin where the gap grows, then random nearby pairs in S.
pub fn uniqueness_pairs(rect: &AbsorbingRect, count: usize, rng: &mut SampleRng) -> Vec<(State, (f64, f64))> {
    let mut pairs = vec![
        (rect.sample_interior(rng), (0.0, 0.0)),
        (State::new(0.05 * rect.u_max, 0.05 * rect.v_max), (1e-4 * rect.u_max, 1e-4 * rect.v_max)),
    ];
    while pairs.len() < count + 2 {
        let s0 = rect.sample_interior(rng);
        let d = (rng.gen_range(-1e-3..1e-3) * rect.u_max, rng.gen_range(-1e-3..1e-3) * rect.v_max);
        let s1 = State::new(s0.u + d.0, s0.v + d.1);
        if s1.strictly_positive() && rect.contains(&s1, 0.0) {
            pairs.push((s0, d));
        }
    }
    pairs
}

fn uniqueness(ctx: &Context, rng: &mut SampleRng) -> Check {
    let v = &ctx.cfg.verify;
    let dt = ctx.cfg.simulate.dt;
    let kappa = v.kappa.unwrap_or_else(|| kappa_bound(&ctx.p));
    let pairs = uniqueness_pairs(&ctx.rect, v.pairs, rng);
    let results: Vec<Result<verifier::UniquenessCertificate, VerifyError>> = pairs
        .par_iter()
        .map(|(s0, d)| {
            let e0 = d.0 * d.0 + d.1 * d.1;
            let t_end = v.gap_t_end.min(0.99 * HORIZON_FRACTION * gap_blowup_time(e0, kappa));
            uniqueness_gap_check_with_kappa(&ctx.p, *s0, *d, t_end, dt, kappa)
        })
        .collect();
    let mut worst: f64 = 0.0;
    let mut errors = 0;
    let mut failing = None;
    for (pair, r) in pairs.iter().zip(&results) {
        match r {
            Ok(c) => {
                if c.max_ratio > worst {
                    worst = c.max_ratio;
                }
                if !c.passed() && failing.is_none() {
                    failing = Some(pair);
                }
            }
            Err(_) => errors += 1,
        }
    }
    let zero_gap = results[0].as_ref().map_or(f64::INFINITY, |c| c.observed_max_gap_sq.sqrt());
    let ok = errors == 0 && worst <= 1.0 && zero_gap <= NOISE_FLOOR;
    let mut check = Check::new("uniqueness", CheckStatus::from_bool(ok))
        .with("kappa", num(kappa))
        .with("kappa_source", if v.kappa.is_some() { "override" } else { "derived" })
        .with("pairs", pairs.len())
        .with("max_ratio", num(worst))
        .with("zero_separation_gap", num(zero_gap))
        .with("noise_floor", num(NOISE_FLOOR))
        .with("errors", errors);
    if let Some((s0, d)) = failing {
        check = check.with("first_failure", obj([("s0", state(s0)), ("delta", Value::Array(vec![num(d.0), num(d.1)]))]));
    }
    check
}

fn discrete(ctx: &Context) -> Check {
    let r = discrete_vs_continuous(&ctx.p);
    let points: Vec<Value> = r
        .points
        .iter()
        .map(|f| {
            obj([
                ("label", f.kind.label().into()),
                ("state", state(&f.state)),
                ("scaled_residual", num(f.scaled_residual)),
                ("multipliers", f.multipliers.map_or(Value::Null, |(a, b)| Value::Array(vec![num(a), num(b)]))),
            ])
        })
        .collect();
    Check::new("discrete_fixed_points", CheckStatus::from_bool(r.passed()))
        .with("points", points)
        .with("max_scaled_residual", num(r.max_scaled_residual))
        .with("tolerance", num(r.tolerance))
}

/// Full JSON report and whether any check failed.
pub fn report(cfg: &RunConfig, p: &ModelParams) -> (Value, bool) {
    let checks = run_checks(cfg, p);
    let failed = checks.iter().any(|c| c.status == CheckStatus::Fail);
    let mut m = header("verify", cfg, Some(p));
    m.insert("status".into(), if failed { "fail" } else { "pass" }.into());
    m.insert("evidence".into(), "floating-point numerical checks, not proofs".into());
    let mut counts = Map::new();
    for st in [CheckStatus::Pass, CheckStatus::Fail, CheckStatus::Uncertified] {
        counts.insert(st.label().into(), checks.iter().filter(|c| c.status == st).count().into());
    }
    m.insert("counts".into(), Value::Object(counts));
    m.insert("checks".into(), Value::Array(checks.iter().map(Check::to_json).collect()));
    (Value::Object(m), failed)
}
