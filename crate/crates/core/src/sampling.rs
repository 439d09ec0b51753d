//! Seeded sampling of parameters and states for the randomized checks.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::equilibria::conjectural_admissible;
use crate::math;
use crate::model::ModelParams;

pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform in the open interval (0, 1).
pub fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let x: f64 = rng.gen();
        if x > 0.0 {
            return x;
        }
    }
}

/// Log-uniform in `[lo, hi]`.
pub fn log_uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    let (l, h) = (math::ln(lo), math::ln(hi));
    math::exp(l + (h - l) * rng.gen::<f64>())
}

/// Ranges for [`random_admissible_params`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamRanges {
    /// Bounds for `a` and `ν`.
    pub speed: (f64, f64),
    /// Bounds for `γ`, `θ₁`, `θ₂`, `L₁`, `L₂`.
    pub coefficient: (f64, f64),
}

impl Default for ParamRanges {
    fn default() -> Self {
        ParamRanges { speed: (0.1, 2.0), coefficient: (0.2, 5.0) }
    }
}

/// Log-uniform draw of all seven parameters, rejected until the interior
/// equilibrium is admissible.
pub fn random_admissible_params<R: Rng + ?Sized>(rng: &mut R, ranges: &ParamRanges) -> ModelParams {
    loop {
        let (s0, s1) = ranges.speed;
        let (c0, c1) = ranges.coefficient;
        let values = [
            log_uniform(rng, s0, s1),
            log_uniform(rng, s0, s1),
            log_uniform(rng, c0, c1),
            log_uniform(rng, c0, c1),
            log_uniform(rng, c0, c1),
            log_uniform(rng, c0, c1),
            log_uniform(rng, c0, c1),
        ];
        if let Ok(p) = ModelParams::from_array(values) {
            if conjectural_admissible(&p) {
                return p;
            }
        }
    }
}
