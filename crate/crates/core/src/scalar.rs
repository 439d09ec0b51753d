use core::ops::Neg;

use num_traits::Num;

/// Ordered field used by the closed-form evaluations.
///
/// Anything with field arithmetic and an order qualifies, which covers `f64`
/// and `num_rational::Ratio<i64>`/`Ratio<i128>`.
pub trait Scalar: Clone + PartialOrd + Num + Neg<Output = Self> {
    fn two() -> Self {
        Self::one() + Self::one()
    }

    fn abs_val(&self) -> Self {
        if *self < Self::zero() {
            -self.clone()
        } else {
            self.clone()
        }
    }

    fn square(&self) -> Self {
        self.clone() * self.clone()
    }
}

impl<T> Scalar for T where T: Clone + PartialOrd + Num + Neg<Output = T> {}
