//! Time integration of the continuous system plus the absorbing-rectangle
//! machinery: the `1/u` upper envelopes, entry detection and positive
//! invariance checks.

use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::math;
use crate::model::{perturbation_field, vector_field, ModelParams, Perturbation, State};
use crate::sampling;

/// Components below this are an orthant violation, not roundoff.
pub const ORTHANT_ABORT: f64 = -1e-10;
/// Default slack for absorbing-set entry detection.
pub const DEFAULT_ENTRY_EPS: f64 = 1e-6;
/// Default fixed step.
pub const DEFAULT_DT: f64 = 1e-3;
/// Default per-step tolerance of the adaptive method.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;
/// Exits from S beyond this count as invariance violations.
pub const INVARIANCE_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Method {
    /// Classical fourth-order Runge–Kutta with a fixed step.
    #[default]
    Rk4,
    /// Dormand–Prince 5(4) with per-step error `≤ atol + rtol·|y|`; steps never exceed `dt`.
    Rk45 { rtol: f64, atol: f64 },
}

impl Method {
    pub fn rk45() -> Self {
        Method::Rk45 { rtol: DEFAULT_TOLERANCE, atol: DEFAULT_TOLERANCE }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Method::Rk4 => "rk4",
            Method::Rk45 { .. } => "rk45",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Event {
    /// First sample after which the trajectory stays in S (with the default slack).
    AbsorbingEntry { t: f64 },
    /// Most negative component seen in the tolerated band `[−1e−10, 0)`.
    OrthantExcursion { t: f64, value: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub method: Method,
    pub dt: f64,
    pub events: Vec<Event>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(f64, State)> {
        Some((*self.times.last()?, *self.states.last()?))
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, State)> + '_ {
        self.times.iter().copied().zip(self.states.iter().copied())
    }

    pub fn absorbing_entry(&self) -> Option<f64> {
        self.events.iter().find_map(|e| match e {
            Event::AbsorbingEntry { t } => Some(*t),
            _ => None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IntegrateError {
    InvalidStep(f64),
    InvalidHorizon(f64),
    InitialOutsideOrthant(State),
    /// Adaptive step shrank below the representable increment at time `t`.
    StepUnderflow { t: f64 },
    /// A component fell below [`ORTHANT_ABORT`].
    OrthantViolation { t: f64, state: State },
    NonFinite { t: f64 },
}

impl fmt::Display for IntegrateError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IntegrateError::InvalidStep(dt) => write!(f, "step must be positive and finite, got {dt}"),
            IntegrateError::InvalidHorizon(t) => write!(f, "end time must be positive and finite, got {t}"),
            IntegrateError::InitialOutsideOrthant(s) => {
                write!(f, "initial state ({}, {}) is outside the first orthant", s.u, s.v)
            }
            IntegrateError::StepUnderflow { t } => write!(f, "step size underflow at t = {t}"),
            IntegrateError::OrthantViolation { t, state } => {
                write!(f, "orthant violation at t = {t}: state ({}, {})", state.u, state.v)
            }
            IntegrateError::NonFinite { t } => write!(f, "non-finite state at t = {t}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for IntegrateError {}

fn field(p: &ModelParams, s: State) -> (f64, f64) {
    vector_field(p, &s)
}

#[inline]
fn axpy(s: State, h: f64, k: (f64, f64)) -> State {
    State::new(s.u + h * k.0, s.v + h * k.1)
}

/// One classical RK4 step.
pub fn rk4_step(p: &ModelParams, s: State, h: f64) -> State {
    let k1 = field(p, s);
    let k2 = field(p, axpy(s, 0.5 * h, k1));
    let k3 = field(p, axpy(s, 0.5 * h, k2));
    let k4 = field(p, axpy(s, h, k3));
    State::new(
        s.u + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
        s.v + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
    )
}

/// One RK4 step of the perturbation system about the interior equilibrium.
pub fn rk4_perturbation_step(p: &ModelParams, pert: Perturbation, h: f64) -> Perturbation {
    let at = |du: f64, dv: f64| perturbation_field(p, &Perturbation::new(du, dv, pert.anchor));
    let k1 = at(pert.du, pert.dv);
    let k2 = at(pert.du + 0.5 * h * k1.0, pert.dv + 0.5 * h * k1.1);
    let k3 = at(pert.du + 0.5 * h * k2.0, pert.dv + 0.5 * h * k2.1);
    let k4 = at(pert.du + h * k3.0, pert.dv + h * k3.1);
    Perturbation::new(
        pert.du + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
        pert.dv + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
        pert.anchor,
    )
}

/// Fixed-step RK4 in perturbation coordinates `(U, V)` about the interior
/// equilibrium, sampled on the same uniform grid as [`integrate`].
///
/// Unlike integrating `(u, v)` and subtracting `(ū, v̄)`, small perturbations
/// keep full relative precision and never stall against the resolution of `ū`.
pub fn integrate_perturbation(
    p: &ModelParams,
    pert0: Perturbation,
    t_end: f64,
    dt: f64,
) -> Result<Vec<(f64, Perturbation)>, IntegrateError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(IntegrateError::InvalidStep(dt));
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(IntegrateError::InvalidHorizon(t_end));
    }
    let start = pert0.to_state();
    if !start.is_finite() || !start.in_first_orthant() {
        return Err(IntegrateError::InitialOutsideOrthant(start));
    }
    let n = step_count(t_end, dt);
    let h = t_end / n as f64;
    let mut out = Vec::with_capacity(n + 1);
    let mut pert = pert0;
    out.push((0.0, pert));
    for k in 1..=n {
        pert = rk4_perturbation_step(p, pert, h);
        let t = if k == n { t_end } else { k as f64 * h };
        if !(pert.du.is_finite() && pert.dv.is_finite()) {
            return Err(IntegrateError::NonFinite { t });
        }
        out.push((t, pert));
    }
    Ok(out)
}

/// Number of uniform steps of size `≤ dt` covering `t_end`.
fn step_count(t_end: f64, dt: f64) -> usize {
    let ratio = t_end / dt;
    let nearest = libm::round(ratio);
    let n = if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) { nearest } else { libm::ceil(ratio) };
    (n as usize).max(1)
}

struct Guard {
    excursion: Option<(f64, f64)>,
}

impl Guard {
    fn check(&mut self, t: f64, s: State) -> Result<(), IntegrateError> {
        if !s.is_finite() {
            return Err(IntegrateError::NonFinite { t });
        }
        let low = s.u.min(s.v);
        if low < ORTHANT_ABORT {
            return Err(IntegrateError::OrthantViolation { t, state: s });
        }
        if low < 0.0 && self.excursion.is_none_or(|(_, v)| low < v) {
            self.excursion = Some((t, low));
        }
        Ok(())
    }
}

/// Integrates from `s0` to `t_end`, sampling at least every `dt`.
///
/// No positivity clamping is applied; a component below `−1e−10` aborts.
pub fn integrate(p: &ModelParams, s0: State, t_end: f64, dt: f64, method: Method) -> Result<Trajectory, IntegrateError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(IntegrateError::InvalidStep(dt));
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(IntegrateError::InvalidHorizon(t_end));
    }
    if !s0.is_finite() || !s0.in_first_orthant() {
        return Err(IntegrateError::InitialOutsideOrthant(s0));
    }
    let mut guard = Guard { excursion: None };
    let (times, states) = match method {
        Method::Rk4 => run_rk4(p, s0, t_end, dt, &mut guard)?,
        Method::Rk45 { rtol, atol } => run_dopri(p, s0, t_end, dt, rtol, atol, &mut guard)?,
    };
    let mut traj = Trajectory { times, states, method, dt, events: Vec::new() };
    if let Some(t) = entry_time(&traj, &AbsorbingRect::from_params(p), DEFAULT_ENTRY_EPS) {
        traj.events.push(Event::AbsorbingEntry { t });
    }
    if let Some((t, value)) = guard.excursion {
        traj.events.push(Event::OrthantExcursion { t, value });
    }
    Ok(traj)
}

type Samples = (Vec<f64>, Vec<State>);

fn run_rk4(p: &ModelParams, s0: State, t_end: f64, dt: f64, guard: &mut Guard) -> Result<Samples, IntegrateError> {
    let n = step_count(t_end, dt);
    let h = t_end / n as f64;
    let mut times = Vec::with_capacity(n + 1);
    let mut states = Vec::with_capacity(n + 1);
    let mut s = s0;
    times.push(0.0);
    states.push(s);
    for k in 1..=n {
        s = rk4_step(p, s, h);
        let t = if k == n { t_end } else { k as f64 * h };
        guard.check(t, s)?;
        times.push(t);
        states.push(s);
    }
    Ok((times, states))
}

// Dormand–Prince 5(4) tableau; the field is autonomous so the nodes c_i are not needed.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn combo(s: State, h: f64, terms: &[(f64, (f64, f64))]) -> State {
    let (mut du, mut dv) = (0.0, 0.0);
    for &(c, k) in terms {
        du += c * k.0;
        dv += c * k.1;
    }
    State::new(s.u + h * du, s.v + h * dv)
}

/// One Dormand–Prince step: (fifth-order solution, error estimate).
fn dopri_step(p: &ModelParams, s: State, h: f64) -> (State, (f64, f64)) {
    let k1 = field(p, s);
    let k2 = field(p, combo(s, h, &[(A21, k1)]));
    let k3 = field(p, combo(s, h, &[(A31, k1), (A32, k2)]));
    let k4 = field(p, combo(s, h, &[(A41, k1), (A42, k2), (A43, k3)]));
    let k5 = field(p, combo(s, h, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)]));
    let k6 = field(p, combo(s, h, &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)]));
    let next = combo(s, h, &[(B1, k1), (B3, k3), (B4, k4), (B5, k5), (B6, k6)]);
    let k7 = field(p, next);
    let err = (
        h * (E1 * k1.0 + E3 * k3.0 + E4 * k4.0 + E5 * k5.0 + E6 * k6.0 + E7 * k7.0),
        h * (E1 * k1.1 + E3 * k3.1 + E4 * k4.1 + E5 * k5.1 + E6 * k6.1 + E7 * k7.1),
    );
    (next, err)
}

fn run_dopri(
    p: &ModelParams,
    s0: State,
    t_end: f64,
    dt: f64,
    rtol: f64,
    atol: f64,
    guard: &mut Guard,
) -> Result<Samples, IntegrateError> {
    let mut times = Vec::new();
    let mut states = Vec::new();
    let mut t = 0.0;
    let mut s = s0;
    let mut h = dt.min(t_end);
    times.push(t);
    states.push(s);
    while t < t_end {
        let last = t + h >= t_end;
        let step = if last { t_end - t } else { h };
        if step <= 1e-14 * t.abs().max(1.0) {
            return Err(IntegrateError::StepUnderflow { t });
        }
        let (next, err) = dopri_step(p, s, step);
        let su = atol + rtol * s.u.abs().max(next.u.abs());
        let sv = atol + rtol * s.v.abs().max(next.v.abs());
        let norm = (err.0 / su).abs().max((err.1 / sv).abs());
        if !norm.is_finite() {
            h = 0.25 * step;
            continue;
        }
        if norm <= 1.0 {
            t = if last { t_end } else { t + step };
            s = next;
            guard.check(t, s)?;
            times.push(t);
            states.push(s);
        }
        let factor = if norm == 0.0 { 5.0 } else { (0.9 * libm::pow(norm, -0.2)).clamp(0.2, 5.0) };
        h = (step * factor).min(dt);
    }
    Ok((times, states))
}

/// Which output an envelope bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    U,
    V,
}

/// Upper bound on one output from `ẇ ≥ −kθ w + kL` with `w = 1/u`:
/// `u(t) ≤ 1 / [w₀ e^{−kθt} + (L/θ)(1 − e^{−kθt})]`, where `(k, θ, L)` is
/// `(a, θ₁, L₁)` for `U` and `(ν, θ₂, L₂)` for `V`.
pub fn upper_envelope(p: &ModelParams, component: Component, x0: f64, t: f64) -> f64 {
    let (rate, theta, slope) = component_constants(p, component);
    let kt = rate * theta * t;
    let decay = math::exp(-kt);
    let growth = -math::expm1(-kt);
    1.0 / (decay / x0 + slope / theta * growth)
}

/// `t → ∞` limit of [`upper_envelope`]: `θ/L`.
pub fn envelope_limit(p: &ModelParams, component: Component) -> f64 {
    let (_, theta, slope) = component_constants(p, component);
    theta / slope
}

/// Time at which the envelope started from `x0 > level > θ/L` reaches `level`.
/// `Some(0)` if `x0 ≤ level`; `None` if `level ≤ θ/L` (never reached).
pub fn envelope_crossing_time(p: &ModelParams, component: Component, x0: f64, level: f64) -> Option<f64> {
    if x0 <= level {
        return Some(0.0);
    }
    let (rate, theta, slope) = component_constants(p, component);
    let w_inf = slope / theta;
    let w_level = 1.0 / level;
    if w_level >= w_inf {
        return None;
    }
    // w_inf + (w0 − w_inf) e^{−kθt} = w_level
    let w0 = 1.0 / x0;
    Some(math::ln((w_inf - w0) / (w_inf - w_level)) / (rate * theta))
}

fn component_constants(p: &ModelParams, component: Component) -> (f64, f64, f64) {
    match component {
        Component::U => (p.a, p.theta1, p.l1),
        Component::V => (p.nu, p.theta2, p.l2),
    }
}

/// Upper-bounding rectangle `u ≤ θ₁/L₁`, `v ≤ θ₂/L₂` of the absorbing set S.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbsorbingRect {
    pub u_max: f64,
    pub v_max: f64,
}

impl AbsorbingRect {
    pub fn from_params(p: &ModelParams) -> Self {
        AbsorbingRect { u_max: p.theta1 / p.l1, v_max: p.theta2 / p.l2 }
    }

    /// Upper-edge test with slack; the lower edges are open and not checked.
    pub fn contains(&self, s: &State, eps: f64) -> bool {
        s.u <= self.u_max + eps && s.v <= self.v_max + eps
    }

    /// How far `s` lies beyond the upper edges (0 inside).
    pub fn excess(&self, s: &State) -> f64 {
        (s.u - self.u_max).max(s.v - self.v_max).max(0.0)
    }

    pub fn corner(&self) -> State {
        State::new(self.u_max, self.v_max)
    }

    /// Uniform point in the open rectangle `(0, u_max) × (0, v_max)`.
    pub fn sample_interior<R: Rng + ?Sized>(&self, rng: &mut R) -> State {
        State::new(self.u_max * sampling::open_unit(rng), self.v_max * sampling::open_unit(rng))
    }
}

/// First sample time after which every later sample lies within the slackened
/// rectangle; `None` if the final sample is outside.
pub fn entry_time(traj: &Trajectory, rect: &AbsorbingRect, eps: f64) -> Option<f64> {
    match traj.states.iter().rposition(|s| !rect.contains(s, eps)) {
        None => traj.times.first().copied(),
        Some(i) => traj.times.get(i + 1).copied(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvarianceViolation {
    pub start: State,
    pub t: f64,
    pub state: State,
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct InvarianceReport {
    pub samples: usize,
    pub t_end: f64,
    pub tolerance: f64,
    /// Largest `excess` over every sample of every trajectory.
    pub max_excess: f64,
    pub violations: Vec<InvarianceViolation>,
    pub failures: Vec<(State, IntegrateError)>,
}

impl InvarianceReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.failures.is_empty()
    }

    pub fn merge(&mut self, other: InvarianceReport) {
        self.samples += other.samples;
        self.max_excess = self.max_excess.max(other.max_excess);
        self.violations.extend(other.violations);
        self.failures.extend(other.failures);
    }
}

/// Integrates from each start and records any excursion beyond S by more than
/// [`INVARIANCE_TOLERANCE`].
pub fn invariance_from(p: &ModelParams, rect: &AbsorbingRect, starts: &[State], t_end: f64, dt: f64) -> InvarianceReport {
    let mut report = InvarianceReport {
        samples: 0,
        t_end,
        tolerance: INVARIANCE_TOLERANCE,
        max_excess: 0.0,
        ..Default::default()
    };
    for &start in starts {
        report.samples += 1;
        let traj = match integrate(p, start, t_end, dt, Method::Rk4) {
            Ok(traj) => traj,
            Err(e) => {
                report.failures.push((start, e));
                continue;
            }
        };
        let mut worst: Option<InvarianceViolation> = None;
        for (t, s) in traj.iter() {
            let excess = rect.excess(&s);
            report.max_excess = report.max_excess.max(excess);
            if excess > INVARIANCE_TOLERANCE && worst.is_none_or(|w| excess > w.excess) {
                worst = Some(InvarianceViolation { start, t, state: s, excess });
            }
        }
        report.violations.extend(worst);
    }
    report
}

/// [`invariance_from`] over `samples` random points strictly inside S.
pub fn check_positive_invariance(
    p: &ModelParams,
    rect: &AbsorbingRect,
    samples: usize,
    seed: u64,
    t_end: f64,
    dt: f64,
) -> InvarianceReport {
    let mut rng = sampling::rng(seed);
    let starts: Vec<State> = (0..samples).map(|_| rect.sample_interior(&mut rng)).collect();
    invariance_from(p, rect, &starts, t_end, dt)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> ModelParams {
        ModelParams::checked(0.5, 1.0 / 3.0, 1.0, 3.0, 2.0, 3.0, 2.0).unwrap()
    }

    #[test]
    fn rejects_bad_arguments() {
        let p = reference();
        let s = State::new(1.0, 1.0);
        assert_eq!(integrate(&p, s, 1.0, -0.1, Method::Rk4), Err(IntegrateError::InvalidStep(-0.1)));
        assert_eq!(integrate(&p, s, 0.0, 0.1, Method::Rk4), Err(IntegrateError::InvalidHorizon(0.0)));
        assert!(matches!(
            integrate(&p, State::new(-1.0, 1.0), 1.0, 0.1, Method::Rk4),
            Err(IntegrateError::InitialOutsideOrthant(_))
        ));
    }

    #[test]
    fn times_are_uniform_and_end_exactly() {
        let traj = integrate(&reference(), State::new(1.0, 1.0), 1.0, 0.3, Method::Rk4).unwrap();
        assert_eq!(traj.len(), 5);
        assert_eq!(*traj.times.last().unwrap(), 1.0);
        assert!(traj.times.windows(2).all(|w| w[1] > w[0] && w[1] - w[0] <= 0.3));
        let traj = integrate(&reference(), State::new(1.0, 1.0), 50.0, 1e-3, Method::Rk4).unwrap();
        assert_eq!(traj.len(), 50_001);
    }

    #[test]
    fn adaptive_samples_at_least_every_dt() {
        let traj = integrate(&reference(), State::new(2.0, 0.1), 10.0, 0.05, Method::rk45()).unwrap();
        assert_eq!(*traj.times.last().unwrap(), 10.0);
        assert!(traj.times.windows(2).all(|w| w[1] > w[0] && w[1] - w[0] <= 0.05 + 1e-15));
    }

    #[test]
    fn adaptive_step_underflow_reports_time() {
        // Huge speeds make the field too stiff for any representable step.
        let p = ModelParams::checked(1e300, 1.0, 1.0, 3.0, 2.0, 3.0, 2.0).unwrap();
        let err = integrate(&p, State::new(2.0, 1.0), 1.0, 0.1, Method::rk45()).unwrap_err();
        assert!(matches!(err, IntegrateError::StepUnderflow { .. } | IntegrateError::NonFinite { .. }), "{err:?}");
    }

    #[test]
    fn blow_up_is_reported_not_clamped() {
        let p = ModelParams::checked(50.0, 50.0, 1.0, 3.0, 2.0, 3.0, 2.0).unwrap();
        let err = integrate(&p, State::new(4.0, 4.0), 1.0, 0.1, Method::Rk4).unwrap_err();
        assert!(matches!(err, IntegrateError::OrthantViolation { .. } | IntegrateError::NonFinite { .. }));
    }

    #[test]
    fn envelope_endpoints() {
        let p = reference();
        assert!((upper_envelope(&p, Component::U, 2.0, 0.0) - 2.0).abs() < 1e-15);
        assert!((upper_envelope(&p, Component::V, 0.3, 0.0) - 0.3).abs() < 1e-15);
        assert!((upper_envelope(&p, Component::U, 2.0, 200.0) - envelope_limit(&p, Component::U)).abs() < 1e-12);
        assert_eq!(envelope_limit(&p, Component::V), 1.0);
    }

    #[test]
    fn crossing_time_inverts_envelope() {
        let p = reference();
        let t = envelope_crossing_time(&p, Component::U, 2.0, 1.2).unwrap();
        assert!((upper_envelope(&p, Component::U, 2.0, t) - 1.2).abs() < 1e-12);
        assert_eq!(envelope_crossing_time(&p, Component::U, 0.5, 1.0), Some(0.0));
        assert_eq!(envelope_crossing_time(&p, Component::U, 2.0, 1.0), None);
    }

    #[test]
    fn entry_time_cases() {
        let p = reference();
        let rect = AbsorbingRect::from_params(&p);
        let stuck = Trajectory {
            times: alloc::vec![0.0, 1.0, 2.0],
            states: alloc::vec![State::new(2.0, 2.0); 3],
            method: Method::Rk4,
            dt: 1.0,
            events: Vec::new(),
        };
        assert_eq!(entry_time(&stuck, &rect, 1e-6), None);
        let inside = integrate(&p, State::new(0.5, 0.5), 5.0, 0.01, Method::Rk4).unwrap();
        assert_eq!(entry_time(&inside, &rect, 1e-6), Some(0.0));
        assert_eq!(inside.absorbing_entry(), Some(0.0));
    }
}
