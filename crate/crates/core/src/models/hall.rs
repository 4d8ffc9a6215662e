//! Hall's deterministic model with minimal measurement dependence.
//!
//! The hidden variable is a single spin `u` (with `v = -u`) whose density depends
//! on both settings through `f = sgn(u.a) sgn(v.b) a.b`.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::geometry::{sample_uniform_sphere, Outcome, UnitVector3};
use crate::law::{OutcomePair, SettingsPair};
use crate::models::HiddenSample;
use crate::rng::RandomStream;
use crate::scalar::Scalar;

/// Rejection envelope for [`hall_density`] against the uniform proposal.
///
/// The density `(1 - f)/(8 arccos f)` peaks in the interior of `[-1, 1]`
/// (at `f = cos x` with `tan(x/2) = x`, value ~0.09058), above its `f = -1` value `1/(4 pi)`.
pub const HALL_ENVELOPE: f64 = 0.0952;

/// Safety margin the envelope must keep over the scanned supremum.
pub const HALL_ENVELOPE_MARGIN: f64 = 1.05;

/// `f(u, -u, a, b) = sgn(u.a) sgn(-u.b) a.b`.
pub fn hall_f<T: Scalar>(u: &UnitVector3<T>, s: &SettingsPair<T>) -> T {
    let sa = Outcome::of(u.dot(&s.a));
    let sb = Outcome::of((-*u).dot(&s.b));
    (sa * sb).scalar::<T>() * s.overlap()
}

/// `(1 - f)/(8 arccos f)` as a function of `f`, with the removable singularity at `f = 1` set to its limit 0.
pub fn hall_density_of_f<T: Scalar>(f: T) -> T {
    let f = f.max(-T::one()).min(T::one());
    if T::one() - f <= T::lit(1e-9) {
        return T::zero();
    }
    (T::one() - f) / (T::lit(8.0) * f.acos())
}

/// Density of `u` on the sphere (area measure) given the settings.
pub fn hall_density<T: Scalar>(u: &UnitVector3<T>, s: &SettingsPair<T>) -> T {
    hall_density_of_f(hall_f(u, s))
}

/// `Pi(a, b | u)`: settings density given `u` under uniform setting priors.
pub fn hall_settings_conditional<T: Scalar>(u: &UnitVector3<T>, s: &SettingsPair<T>) -> T {
    let f = hall_f(u, s).max(-T::one()).min(T::one());
    if T::one() - f <= T::lit(1e-9) {
        return T::zero();
    }
    (T::one() - f) / (T::lit(32.0) * T::PI() * f.acos())
}

/// Supremum of the density over a uniform grid of `points` values of `f` in `[-1, 1]`.
pub fn hall_envelope_scan(points: usize) -> f64 {
    (0..points).map(|k| -1.0 + 2.0 * k as f64 / (points - 1) as f64).map(hall_density_of_f::<f64>).fold(0.0, f64::max)
}

/// Checks once per process that [`HALL_ENVELOPE`] dominates a 10^5-point scan with margin.
pub fn verify_hall_envelope() -> Result<()> {
    static SCAN: OnceLock<f64> = OnceLock::new();
    let sup = *SCAN.get_or_init(|| hall_envelope_scan(100_000));
    if sup * HALL_ENVELOPE_MARGIN > HALL_ENVELOPE {
        return Err(Error::EnvelopeViolation {
            density: sup * HALL_ENVELOPE_MARGIN,
            envelope: HALL_ENVELOPE,
            f: f64::NAN,
        });
    }
    Ok(())
}

/// Accept/reject step for a proposed `u` with an independent uniform draw `w` in `[0, 1)`.
pub fn hall_accept<T: Scalar>(u: &UnitVector3<T>, s: &SettingsPair<T>, w: f64) -> Result<bool> {
    let f = hall_f(u, s);
    let density = hall_density_of_f(f).to_f64().expect("finite density");
    if density > HALL_ENVELOPE {
        return Err(Error::EnvelopeViolation { density, envelope: HALL_ENVELOPE, f: f.to_f64().unwrap_or(f64::NAN) });
    }
    Ok(w * HALL_ENVELOPE < density)
}

/// Draws `u` from [`hall_density`] by rejection from the uniform sphere.
pub fn hall_sample<T: Scalar>(s: &SettingsPair<T>, stream: &mut RandomStream) -> Result<HiddenSample<T>> {
    verify_hall_envelope()?;
    loop {
        let u = sample_uniform_sphere(stream);
        if hall_accept(&u, s, stream.uniform())? {
            return Ok(HiddenSample::Hall { u });
        }
    }
}

/// `sigma = sgn(u.a)`, `tau = sgn(-u.b)`.
#[inline]
pub fn hall_outcomes<T: Scalar>(u: &UnitVector3<T>, s: &SettingsPair<T>) -> OutcomePair {
    OutcomePair::new(Outcome::of(u.dot(&s.a)), Outcome::of((-*u).dot(&s.b)))
}
