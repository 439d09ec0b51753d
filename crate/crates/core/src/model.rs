//! Parameters, states, marginal profits, the continuous vector field and the
//! discrete adjustment map it descends from.

use core::fmt;

use crate::scalar::Scalar;

/// Roundoff band accepted by the first-orthant predicate.
pub const ORTHANT_TOLERANCE: f64 = 1e-14;

/// The seven positive model constants.
///
/// `theta1`/`theta2` are the net marginal-revenue intercepts (θᵢ = αᵢ − cᵢ),
/// `l1`/`l2` the own-effect slopes, `gamma` the cross effect and `a`/`nu`
/// the adjustment speeds of firms X and Y.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams<T = f64> {
    pub a: T,
    pub nu: T,
    pub gamma: T,
    pub theta1: T,
    pub theta2: T,
    pub l1: T,
    pub l2: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamError {
    /// The named parameter is zero, negative or NaN.
    NotPositive(&'static str),
    /// The named parameter is infinite or NaN.
    NotFinite(&'static str),
}

impl fmt::Display for ParamError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamError::NotPositive(name) => write!(f, "parameter `{name}` must be strictly positive"),
            ParamError::NotFinite(name) => write!(f, "parameter `{name}` must be finite"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ParamError {}

/// Parameter names in canonical order.
pub const PARAM_NAMES: [&str; 7] = ["a", "nu", "gamma", "theta1", "theta2", "L1", "L2"];

impl<T: Scalar> ModelParams<T> {
    pub fn new(a: T, nu: T, gamma: T, theta1: T, theta2: T, l1: T, l2: T) -> Result<Self, ParamError> {
        let p = ModelParams { a, nu, gamma, theta1, theta2, l1, l2 };
        for (name, value) in PARAM_NAMES.iter().zip(p.values()) {
            if !(value > T::zero()) {
                return Err(ParamError::NotPositive(name));
            }
        }
        Ok(p)
    }

    /// Values in [`PARAM_NAMES`] order.
    pub fn values(&self) -> [T; 7] {
        [
            self.a.clone(),
            self.nu.clone(),
            self.gamma.clone(),
            self.theta1.clone(),
            self.theta2.clone(),
            self.l1.clone(),
            self.l2.clone(),
        ]
    }

    /// `L₁L₂ − γ²`, the denominator of the interior equilibrium.
    pub fn coupling_determinant(&self) -> T {
        self.l1.clone() * self.l2.clone() - self.gamma.square()
    }

    /// `θ₁L₂ − θ₂γ`.
    pub fn x_margin(&self) -> T {
        self.theta1.clone() * self.l2.clone() - self.theta2.clone() * self.gamma.clone()
    }

    /// `θ₂L₁ − θ₁γ`.
    pub fn y_margin(&self) -> T {
        self.theta2.clone() * self.l1.clone() - self.theta1.clone() * self.gamma.clone()
    }
}

impl ModelParams<f64> {
    /// Like [`ModelParams::new`] but also rejects infinities.
    pub fn checked(a: f64, nu: f64, gamma: f64, theta1: f64, theta2: f64, l1: f64, l2: f64) -> Result<Self, ParamError> {
        let p = Self::new(a, nu, gamma, theta1, theta2, l1, l2)?;
        for (name, value) in PARAM_NAMES.iter().zip(p.values()) {
            if !value.is_finite() {
                return Err(ParamError::NotFinite(name));
            }
        }
        Ok(p)
    }

    pub fn from_array(values: [f64; 7]) -> Result<Self, ParamError> {
        let [a, nu, gamma, theta1, theta2, l1, l2] = values;
        Self::checked(a, nu, gamma, theta1, theta2, l1, l2)
    }

    /// Largest coefficient magnitude, used to scale residual tolerances.
    pub fn scale(&self) -> f64 {
        self.values().iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// One market state: outputs of firm X (`u`) and firm Y (`v`).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct State<T = f64> {
    pub u: T,
    pub v: T,
}

impl<T> State<T> {
    pub const fn new(u: T, v: T) -> Self {
        State { u, v }
    }
}

impl State<f64> {
    /// First-orthant membership with the roundoff band [`ORTHANT_TOLERANCE`].
    pub fn in_first_orthant(&self) -> bool {
        self.u >= -ORTHANT_TOLERANCE && self.v >= -ORTHANT_TOLERANCE
    }

    pub fn strictly_positive(&self) -> bool {
        self.u > 0.0 && self.v > 0.0
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.v.is_finite()
    }

    pub fn distance_sq(&self, other: &State) -> f64 {
        let du = self.u - other.u;
        let dv = self.v - other.v;
        du * du + dv * dv
    }
}

/// Displacement `(U, V) = (u − ū, v − v̄)` from an anchor equilibrium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Perturbation<T = f64> {
    pub du: T,
    pub dv: T,
    pub anchor: State<T>,
}

impl<T: Scalar> Perturbation<T> {
    pub fn new(du: T, dv: T, anchor: State<T>) -> Self {
        Perturbation { du, dv, anchor }
    }

    pub fn from_state(state: &State<T>, anchor: &State<T>) -> Self {
        Perturbation {
            du: state.u.clone() - anchor.u.clone(),
            dv: state.v.clone() - anchor.v.clone(),
            anchor: anchor.clone(),
        }
    }

    pub fn to_state(&self) -> State<T> {
        State::new(self.anchor.u.clone() + self.du.clone(), self.anchor.v.clone() + self.dv.clone())
    }

    /// `U² + V²`.
    pub fn norm_sq(&self) -> T {
        self.du.square() + self.dv.square()
    }

    pub fn is_zero(&self) -> bool {
        self.du == T::zero() && self.dv == T::zero()
    }
}

/// `(Πx, Πy) = (θ₁ − γv − L₁u, θ₂ − γu − L₂v)`.
pub fn marginal_profit<T: Scalar>(p: &ModelParams<T>, s: &State<T>) -> (T, T) {
    let px = p.theta1.clone() - p.gamma.clone() * s.v.clone() - p.l1.clone() * s.u.clone();
    let py = p.theta2.clone() - p.gamma.clone() * s.u.clone() - p.l2.clone() * s.v.clone();
    (px, py)
}

/// Right-hand side `(a u Πx, ν v Πy)` of the continuous system.
pub fn vector_field<T: Scalar>(p: &ModelParams<T>, s: &State<T>) -> (T, T) {
    let (px, py) = marginal_profit(p, s);
    (p.a.clone() * s.u.clone() * px, p.nu.clone() * s.v.clone() * py)
}

/// Right-hand side of the perturbation system about the interior equilibrium
/// `pert.anchor`, where both marginal profits vanish:
/// `(a(ū + U)(−L₁U − γV), ν(v̄ + V)(−γU − L₂V))`.
///
/// Equals `vector_field` at `anchor + (U, V)` but is evaluated without the
/// cancellation in `u − ū`.
pub fn perturbation_field<T: Scalar>(p: &ModelParams<T>, pert: &Perturbation<T>) -> (T, T) {
    let (du, dv) = (pert.du.clone(), pert.dv.clone());
    let px = -(p.l1.clone() * du.clone()) - p.gamma.clone() * dv.clone();
    let py = -(p.gamma.clone() * du.clone()) - p.l2.clone() * dv.clone();
    (
        p.a.clone() * (pert.anchor.u.clone() + du) * px,
        p.nu.clone() * (pert.anchor.v.clone() + dv) * py,
    )
}

/// One period of the bounded-rationality adjustment map.
///
/// Large adjustment speeds can push the result out of the first orthant; the
/// result is returned as computed.
pub fn discrete_step<T: Scalar>(p: &ModelParams<T>, s: &State<T>) -> State<T> {
    let (du, dv) = vector_field(p, s);
    State::new(s.u.clone() + du, s.v.clone() + dv)
}

/// Iterates [`discrete_step`] `steps` times, returning every iterate including `s0`.
pub fn iterate_map(p: &ModelParams, s0: State, steps: usize) -> alloc::vec::Vec<State> {
    let mut out = alloc::vec::Vec::with_capacity(steps + 1);
    let mut s = s0;
    out.push(s);
    for _ in 0..steps {
        s = discrete_step(p, &s);
        out.push(s);
    }
    out
}
