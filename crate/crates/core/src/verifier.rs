//! Runnable numerical certifications: the uniqueness gap bound, Liapunov decay
//! conformance, discrete/continuous fixed-point agreement, and the
//! finite-difference and convergence-order hygiene checks.
//!
//! Everything here is floating-point evidence, not a proof.

use alloc::vec::Vec;
use core::fmt;

use crate::equilibria::{conjectural_point, critical_points, jacobian_entries, EquilibriumKind, JacobianData};
use crate::integrator::{self, integrate, AbsorbingRect, IntegrateError, Method};
use crate::liapunov::LiapunovBundle;
use crate::math;
use crate::model::{discrete_step, vector_field, ModelParams, Perturbation, State};

/// Zero-separation pairs must stay within this gap.
pub const NOISE_FLOOR: f64 = 1e-12;
/// Fraction of the blow-up time of the gap bound that is checked.
pub const HORIZON_FRACTION: f64 = 0.9;
/// Relative slack on the Liapunov envelope.
pub const ENVELOPE_TOLERANCE: f64 = 1e-6;
/// Leading fraction of samples dropped before fitting the decay rate.
pub const DEFAULT_TRANSIENT_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CheckStatus {
    Pass,
    Fail,
    Uncertified,
}

impl CheckStatus {
    pub fn label(self) -> &'static str {
        match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "fail",
            CheckStatus::Uncertified => "uncertified",
        }
    }

    pub fn from_bool(ok: bool) -> Self {
        if ok {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        }
    }
}

impl fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VerifyError {
    Integrate(IntegrateError),
    /// The requested end time lies past the checked fraction of the bound's blow-up time.
    HorizonExceeded { requested: f64, limit: f64 },
    /// A start point is not in `(0, θ₁/L₁] × (0, θ₂/L₂]`.
    OutsideAbsorbingSet(State),
}

impl From<IntegrateError> for VerifyError {
    fn from(e: IntegrateError) -> Self {
        VerifyError::Integrate(e)
    }
}

impl fmt::Display for VerifyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerifyError::Integrate(e) => write!(f, "integration failed: {e}"),
            VerifyError::HorizonExceeded { requested, limit } => {
                write!(f, "end time {requested} exceeds the gap bound's validity horizon {limit}")
            }
            VerifyError::OutsideAbsorbingSet(s) => {
                write!(f, "start ({}, {}) is not inside the absorbing rectangle", s.u, s.v)
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for VerifyError {}

/// Growth constant for `d/dt(ũ² + ṽ²) ≤ κ (ũ² + ṽ²)` between two solutions in S:
/// `κ = 2 max(aθ₁, νθ₂) + √2 γ (a + ν)(θ₁/L₁ + θ₂/L₂)`.
///
/// The linear terms are bounded by dropping `−L(u₁ + u₂) ≤ 0`; the bilinear
/// terms use `|u₁v₁ − u₂v₂| ≤ (θ₂/L₂)|ũ| + (θ₁/L₁)|ṽ|` on S.
pub fn kappa_bound(p: &ModelParams) -> f64 {
    let linear = 2.0 * (p.a * p.theta1).max(p.nu * p.theta2);
    let cross = core::f64::consts::SQRT_2 * p.gamma * (p.a + p.nu) * (p.theta1 / p.l1 + p.theta2 / p.l2);
    linear + cross
}

/// Closed-form gap bound
/// `E(t) ≤ E₀ e^{κt} / [1 + √E₀ (1 − e^{κt/2})]²`, or `None` once the
/// denominator is no longer positive.
pub fn gap_bound(e0: f64, kappa: f64, t: f64) -> Option<f64> {
    let y0 = math::sqrt(e0);
    let den = 1.0 - y0 * math::expm1(0.5 * kappa * t);
    if den <= 0.0 {
        return None;
    }
    Some(e0 * math::exp(kappa * t) / (den * den))
}

/// Time at which the bound's denominator vanishes: `(2/κ) ln(1 + 1/√E₀)`.
pub fn gap_blowup_time(e0: f64, kappa: f64) -> f64 {
    if e0 <= 0.0 {
        return f64::INFINITY;
    }
    2.0 / kappa * math::ln1p(1.0 / math::sqrt(e0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniquenessCertificate {
    pub kappa: f64,
    /// Checked validity horizon, [`HORIZON_FRACTION`] of the blow-up time.
    pub horizon: f64,
    pub blowup_time: f64,
    pub t_end: f64,
    pub initial_gap_sq: f64,
    pub observed_max_gap_sq: f64,
    pub final_gap_sq: f64,
    /// Largest `observed / bound` over samples with `t > 0` (the ratio is 1 at `t = 0`).
    pub max_ratio: f64,
    /// Whether `ũ² + ṽ²` never increased between samples.
    pub monotone_contraction: bool,
}

impl UniquenessCertificate {
    pub fn gap_bound(&self, t: f64) -> Option<f64> {
        gap_bound(self.initial_gap_sq, self.kappa, t)
    }

    pub fn passed(&self) -> bool {
        self.max_ratio <= 1.0
    }

    pub fn status(&self) -> CheckStatus {
        CheckStatus::from_bool(self.passed())
    }
}

fn in_absorbing(rect: &AbsorbingRect, s: &State) -> bool {
    s.u > 0.0 && s.v > 0.0 && s.u <= rect.u_max && s.v <= rect.v_max
}

pub fn uniqueness_gap_check(
    p: &ModelParams,
    s0: State,
    delta0: (f64, f64),
    t_end: f64,
    dt: f64,
) -> Result<UniquenessCertificate, VerifyError> {
    uniqueness_gap_check_with_kappa(p, s0, delta0, t_end, dt, kappa_bound(p))
}

/// Same as [`uniqueness_gap_check`] with an explicit `κ`.
pub fn uniqueness_gap_check_with_kappa(
    p: &ModelParams,
    s0: State,
    delta0: (f64, f64),
    t_end: f64,
    dt: f64,
    kappa: f64,
) -> Result<UniquenessCertificate, VerifyError> {
    let rect = AbsorbingRect::from_params(p);
    let s1 = State::new(s0.u + delta0.0, s0.v + delta0.1);
    for s in [s0, s1] {
        if !in_absorbing(&rect, &s) {
            return Err(VerifyError::OutsideAbsorbingSet(s));
        }
    }
    let e0 = s0.distance_sq(&s1);
    let blowup_time = gap_blowup_time(e0, kappa);
    let horizon = HORIZON_FRACTION * blowup_time;
    if t_end > horizon {
        return Err(VerifyError::HorizonExceeded { requested: t_end, limit: horizon });
    }
    let first = integrate(p, s0, t_end, dt, Method::Rk4)?;
    let second = integrate(p, s1, t_end, dt, Method::Rk4)?;

    let mut max_ratio: f64 = 0.0;
    let mut observed_max: f64 = 0.0;
    let mut prev = e0;
    let mut monotone = true;
    let mut last = e0;
    for ((&t, a), b) in first.times.iter().zip(&first.states).zip(&second.states) {
        let gap = a.distance_sq(b);
        observed_max = observed_max.max(gap);
        if gap > prev * (1.0 + 1e-9) {
            monotone = false;
        }
        prev = gap;
        last = gap;
        if t == 0.0 {
            continue;
        }
        let ratio = if e0 == 0.0 {
            if math::sqrt(gap) <= NOISE_FLOOR {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            match gap_bound(e0, kappa, t) {
                Some(bound) => gap / bound,
                None => f64::INFINITY,
            }
        };
        max_ratio = max_ratio.max(ratio);
    }
    Ok(UniquenessCertificate {
        kappa,
        horizon,
        blowup_time,
        t_end,
        initial_gap_sq: e0,
        observed_max_gap_sq: observed_max,
        final_gap_sq: last,
        max_ratio,
        monotone_contraction: monotone,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayNote {
    /// `U₀² + V₀² > radius_sq`.
    OutsideLocalCondition,
    /// Inside the local disc but `h₂√V(0) ≥ h₁`, so no decay rate is certified.
    EtaNotBelowOne,
    /// Interior equilibrium missing or not admissible.
    NoInteriorEquilibrium,
    IntegrationFailed,
}

impl DecayNote {
    pub fn label(self) -> &'static str {
        match self {
            DecayNote::OutsideLocalCondition => "outside_local_condition",
            DecayNote::EtaNotBelowOne => "eta_not_below_one",
            DecayNote::NoInteriorEquilibrium => "no_interior_equilibrium",
            DecayNote::IntegrationFailed => "integration_failed",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayOptions {
    pub dt: f64,
    pub transient_fraction: f64,
    pub tolerance: f64,
}

impl Default for DecayOptions {
    fn default() -> Self {
        DecayOptions {
            dt: integrator::DEFAULT_DT,
            transient_fraction: DEFAULT_TRANSIENT_FRACTION,
            tolerance: ENVELOPE_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayReport {
    pub status: CheckStatus,
    pub note: Option<DecayNote>,
    pub perturbation_norm_sq: f64,
    pub radius_sq: f64,
    pub local_condition: bool,
    pub v0: f64,
    pub eta: f64,
    /// `(1 − η) h₁`, when certified.
    pub predicted_rate: Option<f64>,
    /// Least-squares `−d ln V / dt` after the transient, when computable.
    pub empirical_rate: Option<f64>,
    /// Largest `V(t) / envelope(t)`.
    pub max_envelope_ratio: f64,
    /// `V` never increased between samples.
    pub monotone: bool,
    pub samples: usize,
}

impl DecayReport {
    /// Empirical rate at least the certified one.
    pub fn rate_ok(&self) -> Option<bool> {
        Some(self.empirical_rate? >= self.predicted_rate?)
    }
}

/// Integrates the perturbation system from `s0 − E3`, evaluates `V` along it and
/// compares it with `V(0) e^{−(1−η)h₁t}`.
///
/// Starts outside the local disc, or inside it but with `η ≥ 1`, are reported
/// as [`CheckStatus::Uncertified`] without asserting the envelope.
pub fn decay_conformance(p: &ModelParams, s0: State, bundle: &LiapunovBundle, t_end: f64, opts: &DecayOptions) -> DecayReport {
    let mut report = DecayReport {
        status: CheckStatus::Uncertified,
        note: None,
        perturbation_norm_sq: f64::NAN,
        radius_sq: bundle.radius_sq,
        local_condition: false,
        v0: f64::NAN,
        eta: f64::NAN,
        predicted_rate: None,
        empirical_rate: None,
        max_envelope_ratio: 0.0,
        monotone: true,
        samples: 0,
    };
    let anchor = match conjectural_point(p) {
        Some(e3) if crate::equilibria::conjectural_admissible(p) => e3,
        _ => {
            report.note = Some(DecayNote::NoInteriorEquilibrium);
            return report;
        }
    };
    let pert0 = Perturbation::from_state(&s0, &anchor);
    let v0 = bundle.v(&pert0);
    report.perturbation_norm_sq = pert0.norm_sq();
    report.v0 = v0;
    report.local_condition = bundle.local_condition(&pert0);
    report.eta = bundle.eta(v0);
    if !report.local_condition {
        report.note = Some(DecayNote::OutsideLocalCondition);
        return report;
    }
    let eta = match bundle.certified_eta(v0) {
        Ok(eta) => eta,
        Err(_) => {
            report.note = Some(DecayNote::EtaNotBelowOne);
            return report;
        }
    };
    let rate = bundle.decay_rate(eta);
    report.predicted_rate = Some(rate);

    let path = match integrator::integrate_perturbation(p, pert0, t_end, opts.dt) {
        Ok(path) => path,
        Err(_) => {
            report.status = CheckStatus::Fail;
            report.note = Some(DecayNote::IntegrationFailed);
            return report;
        }
    };
    report.samples = path.len();
    let values: Vec<(f64, f64)> = path.iter().map(|(t, pert)| (*t, bundle.v(pert))).collect();

    let mut envelope_ok = true;
    let mut prev = v0;
    for &(t, v) in &values {
        let envelope = v0 * math::exp(-rate * t);
        if v > envelope * (1.0 + opts.tolerance) {
            envelope_ok = false;
        }
        if envelope > 0.0 {
            report.max_envelope_ratio = report.max_envelope_ratio.max(v / envelope);
        } else if v > 0.0 {
            report.max_envelope_ratio = f64::INFINITY;
        }
        if v > prev * (1.0 + 1e-9) {
            report.monotone = false;
        }
        prev = v;
    }
    report.empirical_rate = fit_decay_rate(&values, v0, opts.transient_fraction);
    report.status = CheckStatus::from_bool(envelope_ok && report.monotone);
    report
}

/// `−slope` of the least-squares line through `(t, ln V)`, skipping the
/// transient and samples that have decayed into roundoff.
fn fit_decay_rate(values: &[(f64, f64)], v0: f64, transient_fraction: f64) -> Option<f64> {
    let skip = libm::ceil(transient_fraction * values.len() as f64) as usize;
    let floor = v0 * 1e-20;
    let (ts, logs): (Vec<f64>, Vec<f64>) = values
        .iter()
        .skip(skip)
        .filter(|&&(_, v)| v > floor && v > 0.0)
        .map(|&(t, v)| (t, math::ln(v)))
        .unzip();
    fit_slope(&ts, &logs).map(|s| -s)
}

/// Ordinary least-squares slope; `None` with fewer than two distinct abscissae.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return None;
    }
    let mx = xs[..n].iter().sum::<f64>() / n as f64;
    let my = ys[..n].iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs[..n].iter().zip(&ys[..n]) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

/// Largest `x(t) / envelope(t)` for each component along one trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeCheck {
    pub start: State,
    pub max_ratio_u: f64,
    pub max_ratio_v: f64,
    /// Most negative component seen.
    pub min_component: f64,
}

impl EnvelopeCheck {
    pub fn within(&self, rel_tol: f64) -> bool {
        self.max_ratio_u <= 1.0 + rel_tol && self.max_ratio_v <= 1.0 + rel_tol
    }
}

/// Integrates from `s0` and compares every sample with the logistic upper envelopes.
pub fn envelope_check(p: &ModelParams, s0: State, t_end: f64, dt: f64) -> Result<EnvelopeCheck, IntegrateError> {
    let traj = integrate(p, s0, t_end, dt, Method::Rk4)?;
    let mut out = EnvelopeCheck { start: s0, max_ratio_u: 0.0, max_ratio_v: 0.0, min_component: f64::INFINITY };
    for (t, s) in traj.iter() {
        let eu = integrator::upper_envelope(p, integrator::Component::U, s0.u, t);
        let ev = integrator::upper_envelope(p, integrator::Component::V, s0.v, t);
        out.max_ratio_u = out.max_ratio_u.max(s.u / eu);
        out.max_ratio_v = out.max_ratio_v.max(s.v / ev);
        out.min_component = out.min_component.min(s.u).min(s.v);
    }
    Ok(out)
}

/// Ratios `δ₁‖p‖²/V`, `V/(δ₂‖p‖²)` and `|Ψ|/(√2 M ‖p‖³)` for one perturbation;
/// each is at most 1 when the corresponding inequality holds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlgebraSample {
    pub lower_ratio: f64,
    pub upper_ratio: f64,
    pub cubic_ratio: f64,
}

pub fn liapunov_algebra_sample(p: &ModelParams, bundle: &LiapunovBundle, pert: &Perturbation) -> AlgebraSample {
    let norm = pert.norm_sq();
    if norm == 0.0 {
        return AlgebraSample { lower_ratio: 0.0, upper_ratio: 0.0, cubic_ratio: 0.0 };
    }
    let v = bundle.v(pert);
    let psi = bundle.psi(pert, p);
    AlgebraSample {
        lower_ratio: bundle.delta1 * norm / v,
        upper_ratio: v / (bundle.delta2 * norm),
        cubic_ratio: psi.abs() / (core::f64::consts::SQRT_2 * bundle.m_max * norm * math::sqrt(norm)),
    }
}

/// Analytic `V̇` at `s0` against a fourth-order forward difference of `V`
/// along RK4 steps of size `h` of the perturbation system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VdotSample {
    pub norm_sq: f64,
    pub analytic: f64,
    pub numeric: f64,
}

impl VdotSample {
    pub fn relative_error(&self) -> f64 {
        let diff = (self.analytic - self.numeric).abs();
        if diff == 0.0 {
            0.0
        } else {
            diff / self.analytic.abs()
        }
    }
}

pub fn vdot_flow_sample(p: &ModelParams, bundle: &LiapunovBundle, anchor: State, s0: State, h: f64) -> VdotSample {
    let mut pert = Perturbation::from_state(&s0, &anchor);
    let mut vs = [0.0; 5];
    for v in vs.iter_mut() {
        *v = bundle.v(&pert);
        pert = integrator::rk4_perturbation_step(p, pert, h);
    }
    let numeric = (-25.0 * vs[0] + 48.0 * vs[1] - 36.0 * vs[2] + 16.0 * vs[3] - 3.0 * vs[4]) / (12.0 * h);
    let pert = Perturbation::from_state(&s0, &anchor);
    VdotSample { norm_sq: pert.norm_sq(), analytic: bundle.vdot(&pert, p), numeric }
}

/// Uniform draw from the disc `‖p‖² ≤ 0.99 · radius_sq · δ₁/δ₂` around `anchor`.
///
/// Since `V ≤ δ₂‖p‖²`, every such start lies in the local disc and has `η < 1`.
pub fn sample_certified_perturbation<R: rand::Rng + ?Sized>(bundle: &LiapunovBundle, anchor: State, rng: &mut R) -> State {
    let r = math::sqrt(0.99 * bundle.radius_sq * bundle.delta1 / bundle.delta2) * math::sqrt(rng.gen::<f64>());
    let phi = rng.gen::<f64>() * core::f64::consts::TAU;
    State::new(anchor.u + r * libm::cos(phi), anchor.v + r * libm::sin(phi))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteFixedPoint {
    pub kind: EquilibriumKind,
    pub state: State,
    /// `‖step(E) − E‖∞ / (max(a, ν) · max coefficient · max(1, ‖E‖∞)²)`.
    pub scaled_residual: f64,
    /// Eigenvalues `1 + λᵢ` of the map's linearization, when real.
    pub multipliers: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteReport {
    pub points: Vec<DiscreteFixedPoint>,
    pub max_scaled_residual: f64,
    pub tolerance: f64,
}

impl DiscreteReport {
    pub fn passed(&self) -> bool {
        self.max_scaled_residual <= self.tolerance
    }
}

/// Checks that every admissible critical point is a fixed point of the
/// discrete map and records the map's multipliers there.
pub fn discrete_vs_continuous(p: &ModelParams) -> DiscreteReport {
    let coefficient = p.scale() * p.a.max(p.nu);
    let mut points = Vec::new();
    let mut worst: f64 = 0.0;
    for cp in critical_points(p).iter().filter(|c| c.admissible) {
        let Some(e) = cp.point else { continue };
        let next = discrete_step(p, &e);
        let size = e.u.abs().max(e.v.abs()).max(1.0);
        let residual = (next.u - e.u).abs().max((next.v - e.v).abs()) / (coefficient * size * size);
        worst = worst.max(residual);
        let j = JacobianData::from_entries(jacobian_entries(p, &e));
        points.push(DiscreteFixedPoint {
            kind: cp.kind,
            state: e,
            scaled_residual: residual,
            multipliers: j.eigenvalues.map(|(l1, l2)| (1.0 + l1, 1.0 + l2)),
        });
    }
    DiscreteReport { points, max_scaled_residual: worst, tolerance: 1e-12 }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdJacobianCheck {
    pub state: State,
    pub step: f64,
    /// Largest entry difference over the largest analytic entry magnitude.
    pub relative_error: f64,
}

/// Central-difference Jacobian of the vector field against the analytic
/// entries, with step `1e−6 · max(1, |u|, |v|)`.
pub fn fd_jacobian_check(p: &ModelParams, s: State) -> FdJacobianCheck {
    let h = 1e-6 * s.u.abs().max(s.v.abs()).max(1.0);
    let f = |u: f64, v: f64| vector_field(p, &State::new(u, v));
    let (fu_p, fu_m) = (f(s.u + h, s.v), f(s.u - h, s.v));
    let (fv_p, fv_m) = (f(s.u, s.v + h), f(s.u, s.v - h));
    let fd = [
        (fu_p.0 - fu_m.0) / (2.0 * h),
        (fv_p.0 - fv_m.0) / (2.0 * h),
        (fu_p.1 - fu_m.1) / (2.0 * h),
        (fv_p.1 - fv_m.1) / (2.0 * h),
    ];
    let an = jacobian_entries(p, &s);
    let analytic = [an.a11, an.a12, an.a21, an.a22];
    let scale = analytic.iter().fold(0.0_f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
    let diff = fd.iter().zip(&analytic).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    FdJacobianCheck { state: s, step: h, relative_error: diff / scale }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderFit {
    pub dts: Vec<f64>,
    pub errors: Vec<f64>,
    /// Slope of `ln error` against `ln dt`.
    pub order: f64,
}

/// Observed RK4 order: final-state errors against a run at `min(dts)/32`.
pub fn empirical_order(p: &ModelParams, s0: State, t_end: f64, dts: &[f64]) -> Result<OrderFit, VerifyError> {
    let finest = dts.iter().copied().fold(f64::INFINITY, f64::min) / 32.0;
    let (_, reference) = integrate(p, s0, t_end, finest, Method::Rk4)?.last().expect("non-empty");
    let mut errors = Vec::with_capacity(dts.len());
    for &dt in dts {
        let (_, end) = integrate(p, s0, t_end, dt, Method::Rk4)?.last().expect("non-empty");
        errors.push(math::sqrt(end.distance_sq(&reference)));
    }
    let log_dt: Vec<f64> = dts.iter().map(|d| math::ln(*d)).collect();
    let log_err: Vec<f64> = errors.iter().map(|e| math::ln(*e)).collect();
    let order = fit_slope(&log_dt, &log_err).unwrap_or(f64::NAN);
    Ok(OrderFit { dts: dts.to_vec(), errors, order })
}
