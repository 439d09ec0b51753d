#![allow(dead_code)]

use duopoly_core::{ModelParams, State};
use num_rational::Ratio;

pub type Q = Ratio<i128>;

pub fn q(n: i128, d: i128) -> Q {
    Ratio::new(n, d)
}

pub fn qi(n: i128) -> Q {
    Ratio::from_integer(n)
}

/// (a, ν, γ, θ₁, θ₂, L₁, L₂) = (1/2, 1/3, 1, 3, 2, 3, 2).
pub fn reference_exact() -> ModelParams<Q> {
    ModelParams::new(q(1, 2), q(1, 3), qi(1), qi(3), qi(2), qi(3), qi(2)).unwrap()
}

pub fn reference() -> ModelParams {
    ModelParams::checked(0.5, 1.0 / 3.0, 1.0, 3.0, 2.0, 3.0, 2.0).unwrap()
}

pub fn e3_exact() -> State<Q> {
    State::new(q(4, 5), q(3, 5))
}

pub fn to_f64(x: Q) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

pub fn rel_err(actual: f64, expected: f64) -> f64 {
    if expected == 0.0 {
        actual.abs()
    } else {
        ((actual - expected) / expected).abs()
    }
}
