//! Scalar abstractions.
//!
//! Continuous geometry and the closed-form laws are written against [`Scalar`],
//! so they run on `f32` or `f64`. Exact computations (master probabilities,
//! linear feasibility, discretized free-will measures) use [`Exact`] or any
//! type implementing [`Field`].

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FloatConst, FromPrimitive, Num, Signed, ToPrimitive};

/// Floating point scalar used by geometry, laws and samplers.
pub trait Scalar: Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static {
    /// Converts an `f64` literal. Every `Scalar` can represent (a rounding of) any finite `f64`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 literal")
    }

    /// Unit-norm tolerance: `1e-12` for `f64`, scaled to machine epsilon for narrower types.
    #[inline]
    fn unit_tolerance() -> Self {
        Self::lit(1e-12).max(Self::epsilon() * Self::lit(64.0))
    }
}

impl<T> Scalar for T where T: Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static {}

/// Ordered field with exact or floating arithmetic. Pivoting in the
/// feasibility solver relies on exact zero tests, so use it with [`Exact`].
pub trait Field: Clone + Num + Signed + PartialOrd + Debug {}

impl<T> Field for T where T: Clone + Num + Signed + PartialOrd + Debug {}

/// Arbitrary-precision rational.
pub type Exact = BigRational;

/// `n/d` as an [`Exact`].
pub fn ratio(n: i64, d: i64) -> Exact {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Exact rational value of a finite float.
pub fn exact_from_f64(x: f64) -> Exact {
    BigRational::from_float(x).expect("finite float")
}

/// Nearest `f64` to an exact rational.
pub fn exact_to_f64(x: &Exact) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // Ratios of huge integers can overflow the naive conversion.
        let shift = x.numer().bits().max(x.denom().bits()) as i64 - 60;
        let n = (x.numer() >> shift.max(0) as usize).to_f64().unwrap_or(0.0);
        let d = (x.denom() >> shift.max(0) as usize).to_f64().unwrap_or(1.0);
        n / d
    })
}

/// `log2` of a positive rational, exact whenever numerator and denominator are powers of two.
pub fn log2_exact(x: &Exact) -> f64 {
    fn log2_int(v: &BigInt) -> f64 {
        let bits = v.bits();
        if bits <= 1000 {
            v.to_f64().expect("fits").log2()
        } else {
            let shift = bits - 64;
            (v >> shift as usize).to_f64().expect("fits").log2() + shift as f64
        }
    }
    assert!(x.is_positive(), "log2 of non-positive rational");
    log2_int(x.numer()) - log2_int(x.denom())
}
