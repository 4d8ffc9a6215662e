//! Closed-form joint laws.

use crate::error::{Error, Result};
use crate::geometry::{Outcome, UnitVector3};
use crate::law::{JointLaw2x2, SettingsPair};
use crate::models::TbFamily;
use crate::scalar::Scalar;

/// Singlet reference law `(1 - sigma*tau*a.b)/4`.
pub fn singlet_law<T: Scalar>(s: &SettingsPair<T>) -> JointLaw2x2<T> {
    correlated_law(-s.overlap())
}

/// The unique unbiased law with correlator `c`: `(1 + sigma*tau*c)/4`.
pub fn correlated_law<T: Scalar>(c: T) -> JointLaw2x2<T> {
    let q = T::lit(0.25);
    JointLaw2x2::from_fn(|s, t| q * (T::one() + (s * t).scalar::<T>() * c))
}

/// Malus marginal `(1 + outcome * u.n)/2`.
pub fn malus_marginal<T: Scalar>(u: &UnitVector3<T>, n: &UnitVector3<T>, outcome: Outcome) -> T {
    let x = outcome.scalar::<T>() * u.dot(n);
    // Clamp rounding excursions past |u.n| = 1.
    (T::lit(0.5) * (T::one() + x)).max(T::zero()).min(T::one())
}

/// Average law of the two one-parameter extensions of the Toner-Bacon model.
pub fn tb_extension_law<T: Scalar>(p: T, family: TbFamily, s: &SettingsPair<T>) -> Result<JointLaw2x2<T>> {
    check_probability(p)?;
    let strength = match family {
        TbFamily::SettingDependent => T::lit(2.0) * p - T::one(),
        TbFamily::OutcomeDependent => p,
    };
    Ok(correlated_law(-strength * s.overlap()))
}

/// Law of the Di Lorenzo hidden-variable distribution read out with deterministic Hall outcomes:
/// `(1 - sigma*tau*sgn(a.b))/4`. At `a.b = 0` the convention `sgn(0) = +1` applies.
pub fn mixed_law<T: Scalar>(s: &SettingsPair<T>) -> JointLaw2x2<T> {
    let sign = Outcome::of(s.overlap()).scalar::<T>();
    correlated_law(-sign)
}

/// True when [`mixed_law`] was evaluated on the measure-zero set `a.b = 0`.
pub fn mixed_law_on_boundary<T: Scalar>(s: &SettingsPair<T>) -> bool {
    s.overlap() == T::zero()
}

pub(crate) fn check_probability<T: Scalar>(p: T) -> Result<()> {
    if !(p >= T::zero() && p <= T::one()) {
        return Err(Error::ProbabilityOutOfRange(p.to_f64().unwrap_or(f64::NAN)));
    }
    Ok(())
}
