//! Scalar abstraction shared by the probability routines.
//!
//! Distribution arithmetic only needs a field, so it runs over exact
//! rationals as well as `f32`/`f64`. Anything involving logarithms is
//! restricted to [`Real`].

use std::fmt::Debug;

use num_traits::{Float, Num, ToPrimitive};

use crate::Rational;

pub trait Scalar: Num + Clone + PartialOrd + Debug + Send + Sync + 'static {
    /// Converts an exact rational into this scalar, rounding if needed.
    fn from_rational(r: &Rational) -> Self;

    fn half() -> Self {
        Self::from_rational(&Rational::new(1, 2))
    }

    fn to_f64(&self) -> f64;
}

impl Scalar for f64 {
    fn from_rational(r: &Rational) -> Self {
        // Integer parts may exceed 2^53; going through f64 division keeps
        // the relative error at one rounding per operand.
        *r.numer() as f64 / *r.denom() as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for f32 {
    fn from_rational(r: &Rational) -> Self {
        f64::from_rational(r) as f32
    }

    fn to_f64(&self) -> f64 {
        f64::from(*self)
    }
}

impl Scalar for Rational {
    fn from_rational(r: &Rational) -> Self {
        *r
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

/// Floating-point scalars: everything needed for divergences and derivatives.
pub trait Real: Scalar + Float {}

impl<T: Scalar + Float> Real for T {}

/// Checks `0 <= x <= 1`.
pub(crate) fn is_probability<S: Scalar>(x: &S) -> bool {
    *x >= S::zero() && *x <= S::one()
}

/// Builds an exact rational from a float with a bounded denominator.
///
/// Intended for user-facing inputs such as `0.8`; the result is the
/// closest fraction with denominator dividing `10^12`.
pub fn rational_from_f64(x: f64) -> Option<Rational> {
    if !x.is_finite() {
        return None;
    }
    const SCALE: i128 = 1_000_000_000_000;
    let scaled = (x * SCALE as f64).round();
    if scaled.abs() > 1e30 {
        return None;
    }
    Some(Rational::new(scaled as i128, SCALE))
}
