//! Critical points, linearization and trace–determinant classification.

use core::fmt;

use crate::math;
use crate::model::{ModelParams, State};
use crate::scalar::Scalar;

/// Default absolute band on trace, determinant and discriminant below which a
/// linearization is treated as non-hyperbolic.
pub const DEFAULT_DEGENERACY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EquilibriumKind {
    /// E0 = (0, 0).
    Origin,
    /// E1 = (0, θ₂/L₂), firm X out of the market.
    BoundaryY,
    /// E2 = (θ₁/L₁, 0), firm Y out of the market.
    BoundaryX,
    /// E3, the interior conjectural-variation equilibrium.
    Conjectural,
}

impl EquilibriumKind {
    pub const ALL: [EquilibriumKind; 4] = [
        EquilibriumKind::Origin,
        EquilibriumKind::BoundaryY,
        EquilibriumKind::BoundaryX,
        EquilibriumKind::Conjectural,
    ];

    pub fn label(self) -> &'static str {
        match self {
            EquilibriumKind::Origin => "E0",
            EquilibriumKind::BoundaryY => "E1",
            EquilibriumKind::BoundaryX => "E2",
            EquilibriumKind::Conjectural => "E3",
        }
    }
}

impl fmt::Display for EquilibriumKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A critical point of the vector field.
///
/// `point` is `None` only for E3 when `L₁L₂ = γ²` (degenerate denominator).
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalPoint<T = f64> {
    pub kind: EquilibriumKind,
    pub point: Option<State<T>>,
    pub admissible: bool,
}

impl<T> CriticalPoint<T> {
    pub fn is_degenerate(&self) -> bool {
        self.point.is_none()
    }
}

/// Interior equilibrium, or `None` when `L₁L₂ − γ² = 0`.
pub fn conjectural_point<T: Scalar>(p: &ModelParams<T>) -> Option<State<T>> {
    let det = p.coupling_determinant();
    if det == T::zero() {
        return None;
    }
    Some(State::new(p.x_margin() / det.clone(), p.y_margin() / det))
}

/// All three positivity conditions for E3.
pub fn conjectural_admissible<T: Scalar>(p: &ModelParams<T>) -> bool {
    let zero = T::zero();
    p.x_margin() > zero && p.y_margin() > zero && p.coupling_determinant() > zero
}

/// E0, E1, E2, E3 in that order.
pub fn critical_points<T: Scalar>(p: &ModelParams<T>) -> [CriticalPoint<T>; 4] {
    let zero = T::zero();
    [
        CriticalPoint {
            kind: EquilibriumKind::Origin,
            point: Some(State::new(zero.clone(), zero.clone())),
            admissible: true,
        },
        CriticalPoint {
            kind: EquilibriumKind::BoundaryY,
            point: Some(State::new(zero.clone(), p.theta2.clone() / p.l2.clone())),
            admissible: true,
        },
        CriticalPoint {
            kind: EquilibriumKind::BoundaryX,
            point: Some(State::new(p.theta1.clone() / p.l1.clone(), zero)),
            admissible: true,
        },
        CriticalPoint {
            kind: EquilibriumKind::Conjectural,
            point: conjectural_point(p),
            admissible: conjectural_admissible(p),
        },
    ]
}

/// Linearization entries of the perturbation system about `(ū, v̄)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobianEntries<T = f64> {
    pub a11: T,
    pub a12: T,
    pub a21: T,
    pub a22: T,
}

impl<T: Scalar> JacobianEntries<T> {
    pub fn trace(&self) -> T {
        self.a11.clone() + self.a22.clone()
    }

    pub fn det(&self) -> T {
        self.a11.clone() * self.a22.clone() - self.a12.clone() * self.a21.clone()
    }

    /// `I0² − 4A0`, evaluated as `(a11 − a22)² + 4 a12 a21` (same value, no cancellation).
    pub fn disc(&self) -> T {
        let four = T::two() * T::two();
        (self.a11.clone() - self.a22.clone()).square() + four * self.a12.clone() * self.a21.clone()
    }
}

/// `a11 = a(θ₁ − γv̄ − 2L₁ū)`, `a12 = −aγū`, `a21 = −νγv̄`, `a22 = ν(θ₂ − γū − 2L₂v̄)`.
pub fn jacobian_entries<T: Scalar>(p: &ModelParams<T>, s: &State<T>) -> JacobianEntries<T> {
    let two = T::two();
    let a11 = p.a.clone()
        * (p.theta1.clone() - s.v.clone() * p.gamma.clone() - two.clone() * s.u.clone() * p.l1.clone());
    let a12 = -(p.a.clone() * s.u.clone() * p.gamma.clone());
    let a21 = -(p.nu.clone() * p.gamma.clone() * s.v.clone());
    let a22 = p.nu.clone() * (p.theta2.clone() - p.gamma.clone() * s.u.clone() - two * s.v.clone() * p.l2.clone());
    JacobianEntries { a11, a12, a21, a22 }
}

/// Float linearization with its spectral data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobianData {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
    /// Trace I0.
    pub trace: f64,
    /// Determinant A0.
    pub det: f64,
    /// I0² − 4A0.
    pub disc: f64,
    /// Real eigenvalues sorted ascending; `None` for a complex pair.
    pub eigenvalues: Option<(f64, f64)>,
}

impl JacobianData {
    pub fn from_entries(e: JacobianEntries<f64>) -> Self {
        let trace = e.trace();
        let det = e.det();
        let disc = e.disc();
        JacobianData {
            a11: e.a11,
            a12: e.a12,
            a21: e.a21,
            a22: e.a22,
            trace,
            det,
            disc,
            eigenvalues: real_roots(trace, det, disc),
        }
    }

    pub fn entries(&self) -> JacobianEntries<f64> {
        JacobianEntries { a11: self.a11, a12: self.a12, a21: self.a21, a22: self.a22 }
    }

    pub fn is_complex_pair(&self) -> bool {
        self.eigenvalues.is_none()
    }
}

/// Roots of `λ² − trace·λ + det = 0`; the larger-magnitude root is taken from
/// the quadratic formula and the other from `det / λ`.
fn real_roots(trace: f64, det: f64, disc: f64) -> Option<(f64, f64)> {
    if !(disc >= 0.0) {
        return None;
    }
    let root = math::sqrt(disc);
    let q = 0.5 * (trace + if trace >= 0.0 { root } else { -root });
    let (l1, l2) = if q == 0.0 { (0.0, 0.0) } else { (q, det / q) };
    Some(if l1 <= l2 { (l1, l2) } else { (l2, l1) })
}

pub fn jacobian_at(p: &ModelParams, s: &State) -> JacobianData {
    JacobianData::from_entries(jacobian_entries(p, s))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Degeneracy {
    /// |A0| within tolerance: a zero eigenvalue.
    ZeroDeterminant,
    /// |I0| within tolerance with A0 > 0: centre-type linearization.
    ZeroTrace,
    /// |disc| within tolerance: repeated eigenvalue on the node/focus boundary.
    RepeatedEigenvalue,
    /// disc < 0: complex pair (focus), outside the node classification.
    ComplexPair,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Classification {
    StableNode,
    UnstableNode,
    Saddle,
    NonHyperbolic(Degeneracy),
}

impl Classification {
    pub fn label(&self) -> &'static str {
        match self {
            Classification::StableNode => "stable_node",
            Classification::UnstableNode => "unstable_node",
            Classification::Saddle => "saddle",
            Classification::NonHyperbolic(Degeneracy::ZeroDeterminant) => "non_hyperbolic:zero_determinant",
            Classification::NonHyperbolic(Degeneracy::ZeroTrace) => "non_hyperbolic:zero_trace",
            Classification::NonHyperbolic(Degeneracy::RepeatedEigenvalue) => "non_hyperbolic:repeated_eigenvalue",
            Classification::NonHyperbolic(Degeneracy::ComplexPair) => "non_hyperbolic:complex_pair",
        }
    }

    pub fn is_stable(&self) -> bool {
        matches!(self, Classification::StableNode)
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

pub fn classify(j: &JacobianData) -> Classification {
    classify_with_tolerance(j, DEFAULT_DEGENERACY_TOLERANCE)
}

/// Trace–determinant classification. A saddle only needs `A0 < −tol`; nodes
/// also need `|I0| > tol` and `disc > tol`.
pub fn classify_with_tolerance(j: &JacobianData, tol: f64) -> Classification {
    if j.det.abs() <= tol {
        return Classification::NonHyperbolic(Degeneracy::ZeroDeterminant);
    }
    if j.det < 0.0 {
        return Classification::Saddle;
    }
    if j.trace.abs() <= tol {
        return Classification::NonHyperbolic(Degeneracy::ZeroTrace);
    }
    if j.disc.abs() <= tol {
        return Classification::NonHyperbolic(Degeneracy::RepeatedEigenvalue);
    }
    if j.disc < 0.0 {
        return Classification::NonHyperbolic(Degeneracy::ComplexPair);
    }
    if j.trace < 0.0 {
        Classification::StableNode
    } else {
        Classification::UnstableNode
    }
}

/// Trace and determinant pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceDet<T = f64> {
    pub trace: T,
    pub det: T,
}

/// Trace and determinant at E0..E3 from their explicit parameter formulas,
/// independent of [`jacobian_entries`]. The E3 entry is `None` unless E3 is
/// admissible.
pub fn closed_form_traces<T: Scalar>(p: &ModelParams<T>) -> [Option<TraceDet<T>>; 4] {
    let a_t1 = p.a.clone() * p.theta1.clone();
    let nu_t2 = p.nu.clone() * p.theta2.clone();
    let e0 = TraceDet {
        trace: a_t1.clone() + nu_t2.clone(),
        det: p.a.clone() * p.theta1.clone() * p.theta2.clone() * p.nu.clone(),
    };
    let x_rate = p.a.clone() * p.x_margin() / p.l2.clone();
    let e1 = TraceDet {
        trace: x_rate.clone() - nu_t2.clone(),
        det: x_rate * (-nu_t2),
    };
    let y_rate = p.nu.clone() * p.y_margin() / p.l1.clone();
    let e2 = TraceDet {
        trace: y_rate.clone() - a_t1.clone(),
        det: y_rate * (-a_t1),
    };
    let e3 = if conjectural_admissible(p) {
        let den = p.coupling_determinant();
        Some(TraceDet {
            trace: -(p.a.clone() * p.l1.clone() * p.x_margin()) / den.clone()
                - p.nu.clone() * p.l2.clone() * p.y_margin() / den.clone(),
            det: p.a.clone() * p.nu.clone() * p.x_margin() * p.y_margin() / den,
        })
    } else {
        None
    };
    [Some(e0), Some(e1), Some(e2), e3]
}

/// Everything known about one equilibrium.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumReport {
    pub kind: EquilibriumKind,
    pub point: Option<State>,
    pub admissible: bool,
    pub jacobian: Option<JacobianData>,
    pub classification: Option<Classification>,
}

/// Critical points with linearization and classification, E0..E3.
pub fn analyze(p: &ModelParams) -> [EquilibriumReport; 4] {
    analyze_with_tolerance(p, DEFAULT_DEGENERACY_TOLERANCE)
}

/// As [`analyze`]; `tol` is the classification band and also marks E3
/// degenerate when `|L₁L₂ − γ²| ≤ tol · L₁L₂`.
pub fn analyze_with_tolerance(p: &ModelParams, tol: f64) -> [EquilibriumReport; 4] {
    let mut cps = critical_points(p);
    if p.coupling_determinant().abs() <= tol * p.l1 * p.l2 {
        cps[3].point = None;
        cps[3].admissible = false;
    }
    cps.map(|cp| {
        let jacobian = cp.point.map(|s| jacobian_at(p, &s));
        EquilibriumReport {
            kind: cp.kind,
            point: cp.point,
            admissible: cp.admissible,
            jacobian,
            classification: jacobian.map(|j| classify_with_tolerance(&j, tol)),
        }
    })
}
