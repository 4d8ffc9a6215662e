//! The Toner-Bacon one-bit model, its two stochastic extensions and the
//! limited-free-will reading where the bit becomes a hidden variable.

use crate::error::{Error, Result};
use crate::geometry::{sample_uniform_sphere, Outcome, UnitVector3};
use crate::law::{JointLaw2x2, OutcomePair, SettingsPair};
use crate::models::laws::check_probability;
use crate::models::{HiddenSample, TbFamily};
use crate::rng::RandomStream;
use crate::scalar::Scalar;

/// Bit computed at A: `c = sgn(u.a) sgn(v.a)`.
#[inline]
pub fn tb_bit<T: Scalar>(u: &UnitVector3<T>, v: &UnitVector3<T>, a: &UnitVector3<T>) -> Outcome {
    Outcome::of(u.dot(a)) * Outcome::of(v.dot(a))
}

/// B's outcome given the bit: `tau = -sgn((u + c v).b)`.
#[inline]
pub fn tb_receiver<T: Scalar>(u: &UnitVector3<T>, v: &UnitVector3<T>, c: Outcome, b: &UnitVector3<T>) -> Outcome {
    let w = u.as_vector() + v.as_vector() * c.scalar::<T>();
    -Outcome::of(w.dot(&b.as_vector()))
}

/// Deterministic outcomes of the one-bit model.
pub fn tb_outcomes<T: Scalar>(u: &UnitVector3<T>, v: &UnitVector3<T>, s: &SettingsPair<T>) -> OutcomePair {
    let sigma = Outcome::of(u.dot(&s.a));
    let c = tb_bit(u, v, &s.a);
    OutcomePair::new(sigma, tb_receiver(u, v, c, &s.b))
}

/// `Q^B(tau | lambda, a, b, sigma)` for the deterministic model. Conditioning on the
/// outcome A cannot produce is the indeterminate `0/0` case.
pub fn tb_conditional_b<T: Scalar>(
    u: &UnitVector3<T>,
    v: &UnitVector3<T>,
    s: &SettingsPair<T>,
    sigma: Outcome,
) -> Result<Outcome> {
    let o = tb_outcomes(u, v, s);
    if sigma != o.sigma {
        return Err(Error::IncompatiblePriors);
    }
    Ok(o.tau)
}

/// Draws `(u, v)` independently and uniformly.
pub fn tb_sample<T: Scalar>(stream: &mut RandomStream) -> HiddenSample<T> {
    let u = sample_uniform_sphere(stream);
    let v = sample_uniform_sphere(stream);
    HiddenSample::TonerBacon { u, v }
}

/// B's outcome in an extension given A's realized outcome.
fn extension_tau<T: Scalar>(
    family: TbFamily,
    u: &UnitVector3<T>,
    v: &UnitVector3<T>,
    s: &SettingsPair<T>,
    sigma: Outcome,
) -> Outcome {
    let c = match family {
        TbFamily::SettingDependent => tb_bit(u, v, &s.a),
        TbFamily::OutcomeDependent => sigma * Outcome::of(v.dot(&s.a)),
    };
    tb_receiver(u, v, c, &s.b)
}

/// One trial of an extension: A reports `S(lambda, a)` with probability `p`, its negation otherwise.
pub fn tb_extension_sample<T: Scalar>(
    p: T,
    family: TbFamily,
    u: &UnitVector3<T>,
    v: &UnitVector3<T>,
    s: &SettingsPair<T>,
    stream: &mut RandomStream,
) -> Result<OutcomePair> {
    check_probability(p)?;
    let det = Outcome::of(u.dot(&s.a));
    let keep = stream.uniform() < p.to_f64().expect("finite p");
    let sigma = if keep { det } else { -det };
    Ok(OutcomePair::new(sigma, extension_tau(family, u, v, s, sigma)))
}

/// `P(sigma, tau | lambda, a, b)` for an extension.
pub fn tb_extension_conditional_law<T: Scalar>(
    p: T,
    family: TbFamily,
    u: &UnitVector3<T>,
    v: &UnitVector3<T>,
    s: &SettingsPair<T>,
) -> JointLaw2x2<T> {
    let det = Outcome::of(u.dot(&s.a));
    let kept = OutcomePair::new(det, extension_tau(family, u, v, s, det));
    let flipped = OutcomePair::new(-det, extension_tau(family, u, v, s, -det));
    JointLaw2x2::from_fn(|sg, t| {
        let o = OutcomePair::new(sg, t);
        let mut w = T::zero();
        if o == kept {
            w = w + p;
        }
        if o == flipped {
            w = w + (T::one() - p);
        }
        w
    })
}

/// Density of `(u, v, c)` given the settings when `c` is a hidden variable:
/// uniform on `(u, v)` times the indicator `c = sgn(u.a) sgn(v.a)`.
pub fn tb_freewill_density<T: Scalar>(u: &UnitVector3<T>, v: &UnitVector3<T>, c: Outcome, s: &SettingsPair<T>) -> T {
    if c == tb_bit(u, v, &s.a) {
        let four_pi = T::lit(4.0) * T::PI();
        T::one() / (four_pi * four_pi)
    } else {
        T::zero()
    }
}

/// Draws `(u, v, c)` from the settings-conditional density.
pub fn tb_freewill_sample<T: Scalar>(s: &SettingsPair<T>, stream: &mut RandomStream) -> HiddenSample<T> {
    let u = sample_uniform_sphere(stream);
    let v = sample_uniform_sphere(stream);
    let c = tb_bit(&u, &v, &s.a);
    HiddenSample::TbFreeWill { u, v, c }
}

/// Outcomes when `c` is carried by the hidden variable: `sigma = sgn(u.a)`,
/// `tau = -sgn((u + c v).b)`. Neither side reads the other's setting.
pub fn tb_freewill_outcomes<T: Scalar>(
    u: &UnitVector3<T>,
    v: &UnitVector3<T>,
    c: Outcome,
    s: &SettingsPair<T>,
) -> OutcomePair {
    OutcomePair::new(Outcome::of(u.dot(&s.a)), tb_receiver(u, v, c, &s.b))
}
