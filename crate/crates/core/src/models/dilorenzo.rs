//! Di Lorenzo's model: the spin is tied to one of the two settings, outcomes follow Malus's law.

use crate::geometry::{Outcome, UnitVector3};
use crate::law::{JointLaw2x2, OutcomePair, SettingsPair};
use crate::models::laws::malus_marginal;
use crate::models::HiddenSample;
use crate::rng::RandomStream;
use crate::scalar::Scalar;

/// The spin selected by `(c, d)`: `d a` for `c = 0`, `-d b` for `c = 1`.
pub fn dilorenzo_atom<T: Scalar>(c: bool, d: Outcome, s: &SettingsPair<T>) -> UnitVector3<T> {
    if c {
        s.b.signed(-d)
    } else {
        s.a.signed(d)
    }
}

/// Atom weight of `(u, c, d)` under the settings: 1/4 on the four atoms, 0 elsewhere.
pub fn dilorenzo_atom_weight<T: Scalar>(u: &UnitVector3<T>, c: bool, d: Outcome, s: &SettingsPair<T>) -> T {
    let target = dilorenzo_atom(c, d, s);
    if T::one() - u.dot(&target) <= T::unit_tolerance() {
        T::lit(0.25)
    } else {
        T::zero()
    }
}

/// Draws fair `c` and `d` and sets the spin accordingly.
pub fn dilorenzo_sample<T: Scalar>(s: &SettingsPair<T>, stream: &mut RandomStream) -> HiddenSample<T> {
    let c = stream.coin();
    let d = if stream.coin() { Outcome::Plus } else { Outcome::Minus };
    HiddenSample::DiLorenzo { u: dilorenzo_atom(c, d, s), c, d }
}

/// Draws an outcome with Malus probability `(1 + o u.n)/2` for `o = +1`.
pub fn malus_draw<T: Scalar>(u: &UnitVector3<T>, n: &UnitVector3<T>, stream: &mut RandomStream) -> Outcome {
    let plus = malus_marginal(u, n, Outcome::Plus).to_f64().expect("finite probability");
    if stream.uniform() < plus {
        Outcome::Plus
    } else {
        Outcome::Minus
    }
}

/// Independent Malus outcomes for spin `u` at A and `-u` at B.
pub fn dilorenzo_outcomes<T: Scalar>(
    u: &UnitVector3<T>,
    s: &SettingsPair<T>,
    stream: &mut RandomStream,
) -> OutcomePair {
    let sigma = malus_draw(u, &s.a, stream);
    let tau = malus_draw(&-*u, &s.b, stream);
    OutcomePair::new(sigma, tau)
}

/// Product of the two Malus marginals.
pub fn dilorenzo_conditional_law<T: Scalar>(u: &UnitVector3<T>, s: &SettingsPair<T>) -> JointLaw2x2<T> {
    let v = -*u;
    JointLaw2x2::from_fn(|sg, t| malus_marginal(u, &s.a, sg) * malus_marginal(&v, &s.b, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::law::LawEstimate;
    use crate::models::hall::hall_outcomes;
    use crate::models::laws::{mixed_law, singlet_law};
    use crate::rng::substream;
    use approx::assert_abs_diff_eq;
    use Outcome::*;

    #[test]
    fn atoms() {
        let s = SettingsPair::<f64>::planar_degrees(10.0, 70.0);
        assert_eq!(dilorenzo_atom(false, Plus, &s), s.a);
        let u = dilorenzo_atom(true, Minus, &s);
        assert_eq!(u, s.b);
        assert_eq!(-u, -s.b);
        assert_eq!(dilorenzo_atom_weight(&s.a, false, Plus, &s), 0.25);
        assert_eq!(dilorenzo_atom_weight(&s.a, true, Plus, &s), 0.0);
    }

    #[test]
    fn atom_frequencies_are_quarter() {
        let s = SettingsPair::<f64>::planar_degrees(0.0, 50.0);
        let mut counts = [[0u64; 2]; 2];
        let n = 1_000_000u64;
        for k in 0..n {
            let HiddenSample::DiLorenzo { u, c, d } = dilorenzo_sample(&s, &mut substream(20, k)) else {
                unreachable!()
            };
            assert_eq!(u, dilorenzo_atom(c, d, &s));
            counts[c as usize][d.index()] += 1;
        }
        for row in counts {
            for x in row {
                assert!((x as f64 / n as f64 - 0.25).abs() < 0.005);
            }
        }
    }

    #[test]
    fn aligned_spin_gives_deterministic_sigma() {
        let s = SettingsPair::<f64>::planar_degrees(0.0, 50.0);
        let mut st = substream(21, 0);
        for _ in 0..1000 {
            assert_eq!(dilorenzo_outcomes(&s.a, &s, &mut st).sigma, Plus);
            assert_eq!(dilorenzo_outcomes(&-s.a, &s, &mut st).sigma, Minus);
        }
    }

    #[test]
    fn reproduces_singlet_and_unbiased_marginals() {
        for deg in [0.0, 45.0, 120.0] {
            let s = SettingsPair::<f64>::planar_degrees(0.0, deg);
            let mut est = LawEstimate::new();
            for k in 0..1_000_000u64 {
                let mut t = substream(23 + deg as u64, k);
                let HiddenSample::DiLorenzo { u, .. } = dilorenzo_sample(&s, &mut t) else { unreachable!() };
                est.record(dilorenzo_outcomes(&u, &s, &mut t));
            }
            assert!(est.max_abs_dev(&singlet_law(&s)).unwrap() < 0.005);
            let law = est.law().unwrap();
            assert!((law.marginal_a(Plus) - 0.5).abs() < 0.005);
        }
    }

    #[test]
    fn conditional_law_matches_malus_product() {
        let s = SettingsPair::<f64>::planar_degrees(0.0, 60.0);
        let law = dilorenzo_conditional_law(&s.a, &s);
        // u = a: sigma = +1 surely; tau = +1 with probability (1 - a.b)/2.
        assert_abs_diff_eq!(law.get(Plus, Plus), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(law.get(Plus, Minus), 0.75, epsilon = 1e-15);
        assert_eq!(law.marginal_a(Minus), 0.0);
    }

    #[test]
    fn hall_readout_gives_mixed_law() {
        let s = SettingsPair::<f64>::planar_degrees(0.0, 60.0);
        let mut est = LawEstimate::new();
        for k in 0..1_000_000u64 {
            let HiddenSample::DiLorenzo { u, .. } = dilorenzo_sample(&s, &mut substream(24, k)) else { unreachable!() };
            est.record(hall_outcomes(&u, &s));
        }
        assert!(est.max_abs_dev(&mixed_law(&s)).unwrap() < 0.005);
    }
}
