//! Rionero's quadratic Liapunov function around a linearly stable equilibrium.
//!
//! For a linearization `(a11, a12, a21, a22)` with trace `I0` and determinant
//! `A0`,
//!
//! ```text
//! V(U, V) = ½ [A0 (U² + V²) + (a11 V − a21 U)² + (a12 V − a22 U)²]
//! ```
//!
//! Along the perturbation flow `V̇ = −A0 |I0| (U² + V²) + Ψ` with the cubic
//! remainder `Ψ = (α₁U − α₃V) f + (α₂V − α₃U) g`. Bounding `Ψ` and sandwiching
//! `V` between `δ₁‖·‖²` and `δ₂‖·‖²` gives `V̇ ≤ −(h₁ − h₂√V) V`, hence
//! exponential decay whenever `h₂√V(0) < h₁`.

use core::fmt;

use crate::equilibria::{JacobianData, JacobianEntries};
use crate::math;
use crate::model::{ModelParams, Perturbation};
use crate::scalar::Scalar;

/// Quadratic-form coefficients `α₁ = A0 + a21² + a22²`, `α₂ = A0 + a11² + a12²`,
/// `α₃ = a11 a21 + a12 a22`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Alphas<T = f64> {
    pub alpha1: T,
    pub alpha2: T,
    pub alpha3: T,
}

impl<T: Scalar> Alphas<T> {
    pub fn from_entries(j: &JacobianEntries<T>) -> Self {
        let det = j.det();
        Alphas {
            alpha1: det.clone() + j.a21.square() + j.a22.square(),
            alpha2: det + j.a11.square() + j.a12.square(),
            alpha3: j.a11.clone() * j.a21.clone() + j.a12.clone() * j.a22.clone(),
        }
    }
}

/// The quadratic form `V` at `(du, dv)`.
pub fn rionero_v<T: Scalar>(j: &JacobianEntries<T>, du: &T, dv: &T) -> T {
    let e = du.square() + dv.square();
    let first = j.a11.clone() * dv.clone() - j.a21.clone() * du.clone();
    let second = j.a12.clone() * dv.clone() - j.a22.clone() * du.clone();
    (j.det() * e + first.square() + second.square()) / T::two()
}

/// Nonlinear part of the perturbation system: `f = −aγUV − aL₁U²`, `g = −νγUV − νL₂V²`.
pub fn nonlinear_terms<T: Scalar>(p: &ModelParams<T>, du: &T, dv: &T) -> (T, T) {
    let uv = du.clone() * dv.clone();
    let f = -(p.a.clone() * p.gamma.clone() * uv.clone()) - p.a.clone() * p.l1.clone() * du.square();
    let g = -(p.nu.clone() * p.gamma.clone() * uv) - p.nu.clone() * p.l2.clone() * dv.square();
    (f, g)
}

/// Cubic remainder `Ψ = (α₁U − α₃V) f + (α₂V − α₃U) g`.
pub fn psi<T: Scalar>(alphas: &Alphas<T>, p: &ModelParams<T>, du: &T, dv: &T) -> T {
    let (f, g) = nonlinear_terms(p, du, dv);
    (alphas.alpha1.clone() * du.clone() - alphas.alpha3.clone() * dv.clone()) * f
        + (alphas.alpha2.clone() * dv.clone() - alphas.alpha3.clone() * du.clone()) * g
}

/// `V̇ = −A0|I0|(U² + V²) + Ψ`.
///
/// Equals the chain-rule derivative only when `I0 < 0`; the stable anchors
/// this is built for.
pub fn rionero_vdot<T: Scalar>(j: &JacobianEntries<T>, p: &ModelParams<T>, du: &T, dv: &T) -> T {
    let alphas = Alphas::from_entries(j);
    let e = du.square() + dv.square();
    -(j.det() * j.trace().abs_val() * e) + psi(&alphas, p, du, dv)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LiapunovError {
    /// The anchor is not linearly stable (`A0 > 0` and `I0 < 0` required).
    NotLinearlyStable { trace: f64, det: f64 },
    /// `h₂√V(0) ≥ h₁`: the decay rate is not certified.
    OutsideBasin { eta: f64 },
}

impl fmt::Display for LiapunovError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LiapunovError::NotLinearlyStable { trace, det } => {
                write!(f, "anchor is not linearly stable (trace {trace}, determinant {det})")
            }
            LiapunovError::OutsideBasin { eta } => {
                write!(f, "outside certified basin: h2*sqrt(V0)/h1 = {eta} >= 1")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for LiapunovError {}

/// All constants of the exponential-stability estimate around one anchor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiapunovBundle {
    pub jac: JacobianData,
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha3: f64,
    /// `m1..m4`, bounds on the four cubic monomial coefficients of `Ψ`.
    pub m: [f64; 4],
    /// `max(m1..m4)`.
    pub m_max: f64,
    /// `A0 / 2`.
    pub delta1: f64,
    /// `A0 / 2 + a11² + a21² + a12² + a22²`.
    pub delta2: f64,
    /// `A0 |I0| / δ₂`.
    pub h1: f64,
    /// `√2 M / δ₁^{3/2}`.
    pub h2: f64,
    /// `(A0 |I0| δ₁)² / (2 M² δ₂²)`.
    pub radius_sq: f64,
    /// `θ₁²/L₁² + θ₂²/L₂² ≤ radius_sq`.
    pub global_ok: bool,
    /// `α₃ > 0`; false flags an anchor outside the intended (interior) case.
    pub alpha3_positive: bool,
}

/// Builds the bundle for a linearly stable anchor.
pub fn build_bundle(j: &JacobianData, p: &ModelParams) -> Result<LiapunovBundle, LiapunovError> {
    if !(j.det > 0.0 && j.trace < 0.0) {
        return Err(LiapunovError::NotLinearlyStable { trace: j.trace, det: j.det });
    }
    let alphas = Alphas::from_entries(&j.entries());
    let (alpha1, alpha2, alpha3) = (alphas.alpha1, alphas.alpha2, alphas.alpha3);
    let m = [
        (alpha3 * (p.a * p.l1 + p.nu * p.gamma) - alpha1 * p.a * p.gamma).abs(),
        (alpha3 * (p.nu * p.l2 + p.a * p.gamma) - alpha2 * p.nu * p.gamma).abs(),
        alpha1 * p.a * p.l1,
        alpha2 * p.nu * p.l2,
    ];
    let m_max = m.iter().copied().fold(0.0_f64, f64::max);
    let a0 = j.det;
    let i0 = j.trace.abs();
    let delta1 = 0.5 * a0;
    let delta2 = 0.5 * a0 + j.a11 * j.a11 + j.a21 * j.a21 + j.a12 * j.a12 + j.a22 * j.a22;
    let h1 = a0 * i0 / delta2;
    let h2 = core::f64::consts::SQRT_2 * m_max / (delta1 * math::sqrt(delta1));
    let num = a0 * i0 * delta1;
    let radius_sq = num * num / (2.0 * m_max * m_max * delta2 * delta2);
    let u_max = p.theta1 / p.l1;
    let v_max = p.theta2 / p.l2;
    Ok(LiapunovBundle {
        jac: *j,
        alpha1,
        alpha2,
        alpha3,
        m,
        m_max,
        delta1,
        delta2,
        h1,
        h2,
        radius_sq,
        global_ok: u_max * u_max + v_max * v_max <= radius_sq,
        alpha3_positive: alpha3 > 0.0,
    })
}

impl LiapunovBundle {
    pub fn alphas(&self) -> Alphas<f64> {
        Alphas { alpha1: self.alpha1, alpha2: self.alpha2, alpha3: self.alpha3 }
    }

    pub fn v(&self, pert: &Perturbation) -> f64 {
        rionero_v(&self.jac.entries(), &pert.du, &pert.dv)
    }

    pub fn vdot(&self, pert: &Perturbation, p: &ModelParams) -> f64 {
        rionero_vdot(&self.jac.entries(), p, &pert.du, &pert.dv)
    }

    pub fn psi(&self, pert: &Perturbation, p: &ModelParams) -> f64 {
        psi(&self.alphas(), p, &pert.du, &pert.dv)
    }

    /// `U₀² + V₀² ≤ radius_sq`.
    pub fn local_condition(&self, pert0: &Perturbation) -> bool {
        pert0.norm_sq() <= self.radius_sq
    }

    /// `η = h₂√V(0) / h₁`, without range check.
    pub fn eta(&self, v0: f64) -> f64 {
        self.h2 * math::sqrt(v0) / self.h1
    }

    /// `η` for an initial value, rejected unless `η < 1`.
    pub fn certified_eta(&self, v0: f64) -> Result<f64, LiapunovError> {
        let eta = self.eta(v0);
        if eta < 1.0 {
            Ok(eta)
        } else {
            Err(LiapunovError::OutsideBasin { eta })
        }
    }

    /// Largest `V(0)` with `η < 1`, i.e. `(h₁/h₂)²`.
    pub fn certified_level(&self) -> f64 {
        let r = self.h1 / self.h2;
        r * r
    }

    /// Certified envelope `V(0) e^{−(1−η) h₁ t}` with `η` derived from `V(0)`.
    pub fn decay_envelope(&self, v0: f64, t: f64) -> Result<f64, LiapunovError> {
        let eta = self.certified_eta(v0)?;
        Ok(decay_envelope(v0, self, eta, t))
    }

    /// Decay rate `(1 − η) h₁`.
    pub fn decay_rate(&self, eta: f64) -> f64 {
        (1.0 - eta) * self.h1
    }
}

/// `V(0) e^{−(1−η) h₁ t}` for a caller-supplied `η`; no basin check.
pub fn decay_envelope(v0: f64, bundle: &LiapunovBundle, eta: f64, t: f64) -> f64 {
    v0 * math::exp(-bundle.decay_rate(eta) * t)
}

/// Generic planar system `ẋ = ax + by + f`, `ẏ = cx + dy + g`.
pub struct PlanarSystem<F> {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub nonlinearity: F,
}

impl<F> PlanarSystem<F>
where
    F: Fn(f64, f64) -> (f64, f64),
{
    pub fn new(a: f64, b: f64, c: f64, d: f64, nonlinearity: F) -> Self {
        PlanarSystem { a, b, c, d, nonlinearity }
    }

    /// `I = a + d`.
    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    /// `A = ad − bc`.
    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    /// `(α₁, α₂, α₃) = (A + c² + d², A + a² + b², ac + bd)`.
    pub fn alphas(&self) -> Alphas<f64> {
        let det = self.det();
        Alphas {
            alpha1: det + self.c * self.c + self.d * self.d,
            alpha2: det + self.a * self.a + self.b * self.b,
            alpha3: self.a * self.c + self.b * self.d,
        }
    }
}

/// Values of the generic construction at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeculiarValues {
    pub w: f64,
    pub w_dot: f64,
}

/// Planar construction with the leading trace factor kept as written:
/// `W = ½ I [A(x² + y²) + (ay − cx)² + (by − dx)²]`,
/// `Ẇ = I A (x² + y²) + I [(α₁x − α₃y) f + (α₂y − α₃x) g]`.
///
/// For a stable system (`I < 0`) this `W` is negative definite; dividing both
/// values by `I` (see [`peculiar_planar_unscaled`]) gives the positive form
/// used by [`LiapunovBundle::v`].
pub fn peculiar_planar<F>(sys: &PlanarSystem<F>, x: f64, y: f64) -> PeculiarValues
where
    F: Fn(f64, f64) -> (f64, f64),
{
    let trace = sys.trace();
    let unscaled = peculiar_planar_unscaled(sys, x, y);
    PeculiarValues { w: trace * unscaled.w, w_dot: trace * unscaled.w_dot }
}

/// [`peculiar_planar`] with the leading factor `I` removed.
pub fn peculiar_planar_unscaled<F>(sys: &PlanarSystem<F>, x: f64, y: f64) -> PeculiarValues
where
    F: Fn(f64, f64) -> (f64, f64),
{
    let det = sys.det();
    let e = x * x + y * y;
    let first = sys.a * y - sys.c * x;
    let second = sys.b * y - sys.d * x;
    let w = 0.5 * (det * e + first * first + second * second);
    let (f, g) = (sys.nonlinearity)(x, y);
    let al = sys.alphas();
    let psi = (al.alpha1 * x - al.alpha3 * y) * f + (al.alpha2 * y - al.alpha3 * x) * g;
    PeculiarValues { w, w_dot: det * e + psi }
}
