//! Hidden-variable models: closed-form laws, lambda samplers, per-lambda outcome laws
//! and the hypotheses each model satisfies.

pub mod dilorenzo;
pub mod flags;
pub mod hall;
pub mod laws;
pub mod simulate;
pub mod toner_bacon;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::{Outcome, UnitVector3};
use crate::law::{JointLaw2x2, OutcomePair, SettingsPair};
use crate::rng::RandomStream;
use crate::scalar::Scalar;

use dilorenzo::{dilorenzo_atom_weight, dilorenzo_conditional_law, dilorenzo_outcomes, dilorenzo_sample};
use hall::{hall_density, hall_outcomes, hall_sample};
use laws::{mixed_law, singlet_law, tb_extension_law};
use toner_bacon::{
    tb_extension_conditional_law, tb_extension_sample, tb_freewill_density, tb_freewill_outcomes, tb_freewill_sample,
    tb_outcomes, tb_sample,
};

/// The two stochastic extensions of the one-bit model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TbFamily {
    /// B decodes the bit computed from `lambda` and `a`; correlator `-(2p-1) a.b`.
    SettingDependent,
    /// B decodes `sigma * sgn(v.a)` using A's realized outcome; correlator `-p a.b`.
    OutcomeDependent,
}

impl TbFamily {
    pub fn number(self) -> u8 {
        match self {
            TbFamily::SettingDependent => 1,
            TbFamily::OutcomeDependent => 2,
        }
    }

    pub fn from_number(n: u8) -> Result<Self> {
        match n {
            1 => Ok(TbFamily::SettingDependent),
            2 => Ok(TbFamily::OutcomeDependent),
            other => Err(Error::InvalidConfig(format!("family must be 1 or 2, got {other}"))),
        }
    }
}

/// One draw of the hidden variable. Variants with a single spin carry `v = -u` implicitly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum HiddenSample<T> {
    TonerBacon {
        u: UnitVector3<T>,
        v: UnitVector3<T>,
    },
    TbExtension {
        u: UnitVector3<T>,
        v: UnitVector3<T>,
        family: TbFamily,
        p: T,
    },
    TbFreeWill {
        u: UnitVector3<T>,
        v: UnitVector3<T>,
        c: Outcome,
    },
    Hall {
        u: UnitVector3<T>,
    },
    /// `c = false` ties `u` to `d a`, `c = true` ties `u` to `-d b`.
    DiLorenzo {
        u: UnitVector3<T>,
        c: bool,
        d: Outcome,
    },
    /// `c_a = true` marks the A particle as the one that fires only at `a = +-u`; `c_b = !c_a`.
    Loophole {
        u: UnitVector3<T>,
        c_a: bool,
    },
}

impl<T: Scalar> HiddenSample<T> {
    pub fn u(&self) -> UnitVector3<T> {
        match *self {
            HiddenSample::TonerBacon { u, .. }
            | HiddenSample::TbExtension { u, .. }
            | HiddenSample::TbFreeWill { u, .. }
            | HiddenSample::Hall { u }
            | HiddenSample::DiLorenzo { u, .. }
            | HiddenSample::Loophole { u, .. } => u,
        }
    }

    pub fn v(&self) -> UnitVector3<T> {
        match *self {
            HiddenSample::TonerBacon { v, .. }
            | HiddenSample::TbExtension { v, .. }
            | HiddenSample::TbFreeWill { v, .. } => v,
            HiddenSample::Hall { u } | HiddenSample::DiLorenzo { u, .. } | HiddenSample::Loophole { u, .. } => -u,
        }
    }

    /// The discrete `c` field as the integer the transcripts record, if the variant has one.
    pub fn c_value(&self) -> Option<i8> {
        match *self {
            HiddenSample::TbFreeWill { c, .. } => Some(c.value()),
            HiddenSample::DiLorenzo { c, .. } => Some(c as i8),
            HiddenSample::Loophole { c_a, .. } => Some(c_a as i8),
            _ => None,
        }
    }

    pub fn d_value(&self) -> Option<i8> {
        match *self {
            HiddenSample::DiLorenzo { d, .. } => Some(d.value()),
            _ => None,
        }
    }

    pub fn variant_name(&self) -> &'static str {
        match self {
            HiddenSample::TonerBacon { .. } => "TonerBacon",
            HiddenSample::TbExtension { .. } => "TbExtension",
            HiddenSample::TbFreeWill { .. } => "TbFreeWill",
            HiddenSample::Hall { .. } => "Hall",
            HiddenSample::DiLorenzo { .. } => "DiLorenzo",
            HiddenSample::Loophole { .. } => "Loophole",
        }
    }
}

/// Identifiers accepted on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelId {
    Singlet,
    TonerBacon,
    TbExt1,
    TbExt2,
    TbFreeWill,
    Hall,
    DiLorenzo,
    Mixed,
}

impl ModelId {
    pub const ALL: [ModelId; 8] = [
        ModelId::Singlet,
        ModelId::TonerBacon,
        ModelId::TbExt1,
        ModelId::TbExt2,
        ModelId::TbFreeWill,
        ModelId::Hall,
        ModelId::DiLorenzo,
        ModelId::Mixed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelId::Singlet => "singlet",
            ModelId::TonerBacon => "tb",
            ModelId::TbExt1 => "tb-ext1",
            ModelId::TbExt2 => "tb-ext2",
            ModelId::TbFreeWill => "tb-freewill",
            ModelId::Hall => "hall",
            ModelId::DiLorenzo => "dilorenzo",
            ModelId::Mixed => "mixed",
        }
    }

    /// Closed-form law for the models defined by one. Hidden-variable models only
    /// reproduce a law in expectation and must be simulated.
    pub fn closed_form_law<T: Scalar>(self, p: T, s: &SettingsPair<T>) -> Result<JointLaw2x2<T>> {
        match self {
            ModelId::Singlet => Ok(singlet_law(s)),
            ModelId::Mixed => Ok(mixed_law(s)),
            ModelId::TbExt1 => tb_extension_law(p, TbFamily::SettingDependent, s),
            ModelId::TbExt2 => tb_extension_law(p, TbFamily::OutcomeDependent, s),
            other => Err(Error::NoClosedForm(other.name().to_string())),
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelId::ALL.into_iter().find(|m| m.name() == s).ok_or_else(|| Error::UnknownModel(s.to_string()))
    }
}

/// A hidden-variable model with a lambda sampler.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Model<T> {
    TonerBacon,
    TbExtension {
        family: TbFamily,
        p: T,
    },
    TbFreeWill,
    Hall,
    DiLorenzo,
    /// Di Lorenzo's lambda distribution read out with Hall's deterministic outcomes.
    Mixed,
}

impl<T: Scalar> Model<T> {
    /// `p` is only read by the extensions.
    pub fn from_id(id: ModelId, p: T) -> Result<Self> {
        Ok(match id {
            ModelId::Singlet => return Err(Error::InvalidConfig("singlet has no hidden-variable sampler".into())),
            ModelId::TonerBacon => Model::TonerBacon,
            ModelId::TbExt1 => {
                laws::check_probability(p)?;
                Model::TbExtension { family: TbFamily::SettingDependent, p }
            }
            ModelId::TbExt2 => {
                laws::check_probability(p)?;
                Model::TbExtension { family: TbFamily::OutcomeDependent, p }
            }
            ModelId::TbFreeWill => Model::TbFreeWill,
            ModelId::Hall => Model::Hall,
            ModelId::DiLorenzo => Model::DiLorenzo,
            ModelId::Mixed => Model::Mixed,
        })
    }

    pub fn id(&self) -> ModelId {
        match self {
            Model::TonerBacon => ModelId::TonerBacon,
            Model::TbExtension { family: TbFamily::SettingDependent, .. } => ModelId::TbExt1,
            Model::TbExtension { family: TbFamily::OutcomeDependent, .. } => ModelId::TbExt2,
            Model::TbFreeWill => ModelId::TbFreeWill,
            Model::Hall => ModelId::Hall,
            Model::DiLorenzo => ModelId::DiLorenzo,
            Model::Mixed => ModelId::Mixed,
        }
    }

    /// The law the model reproduces on average.
    pub fn reference_law(&self, s: &SettingsPair<T>) -> Result<JointLaw2x2<T>> {
        match *self {
            Model::TbExtension { family, p } => tb_extension_law(p, family, s),
            Model::Mixed => Ok(mixed_law(s)),
            _ => Ok(singlet_law(s)),
        }
    }

    /// Draws lambda given the settings. Models obeying uncorrelated choice ignore `s`.
    pub fn sample_lambda(&self, s: &SettingsPair<T>, stream: &mut RandomStream) -> Result<HiddenSample<T>> {
        match *self {
            Model::TonerBacon => Ok(tb_sample(stream)),
            Model::TbExtension { family, p } => {
                let HiddenSample::TonerBacon { u, v } = tb_sample(stream) else { unreachable!() };
                Ok(HiddenSample::TbExtension { u, v, family, p })
            }
            Model::TbFreeWill => Ok(tb_freewill_sample(s, stream)),
            Model::Hall => hall_sample(s, stream),
            Model::DiLorenzo | Model::Mixed => Ok(dilorenzo_sample(s, stream)),
        }
    }

    /// Outcomes for a given lambda; stochastic models draw from `stream`.
    pub fn outcomes(
        &self,
        lambda: &HiddenSample<T>,
        s: &SettingsPair<T>,
        stream: &mut RandomStream,
    ) -> Result<OutcomePair> {
        match (*self, *lambda) {
            (Model::TonerBacon, HiddenSample::TonerBacon { u, v }) => Ok(tb_outcomes(&u, &v, s)),
            (Model::TbExtension { .. }, HiddenSample::TbExtension { u, v, family, p }) => {
                tb_extension_sample(p, family, &u, &v, s, stream)
            }
            (Model::TbFreeWill, HiddenSample::TbFreeWill { u, v, c }) => Ok(tb_freewill_outcomes(&u, &v, c, s)),
            (Model::Hall, HiddenSample::Hall { u }) => Ok(hall_outcomes(&u, s)),
            (Model::DiLorenzo, HiddenSample::DiLorenzo { u, .. }) => Ok(dilorenzo_outcomes(&u, s, stream)),
            (Model::Mixed, HiddenSample::DiLorenzo { u, .. }) => Ok(hall_outcomes(&u, s)),
            _ => Err(Error::WrongVariant(lambda.variant_name())),
        }
    }

    /// `P(sigma, tau | lambda, a, b)`.
    pub fn conditional_law(&self, lambda: &HiddenSample<T>, s: &SettingsPair<T>) -> Result<JointLaw2x2<T>> {
        match (*self, *lambda) {
            (Model::TonerBacon, HiddenSample::TonerBacon { u, v }) => Ok(JointLaw2x2::point(tb_outcomes(&u, &v, s))),
            (Model::TbExtension { .. }, HiddenSample::TbExtension { u, v, family, p }) => {
                Ok(tb_extension_conditional_law(p, family, &u, &v, s))
            }
            (Model::TbFreeWill, HiddenSample::TbFreeWill { u, v, c }) => {
                Ok(JointLaw2x2::point(tb_freewill_outcomes(&u, &v, c, s)))
            }
            (Model::Hall, HiddenSample::Hall { u }) => Ok(JointLaw2x2::point(hall_outcomes(&u, s))),
            (Model::DiLorenzo, HiddenSample::DiLorenzo { u, .. }) => Ok(dilorenzo_conditional_law(&u, s)),
            (Model::Mixed, HiddenSample::DiLorenzo { u, .. }) => Ok(JointLaw2x2::point(hall_outcomes(&u, s))),
            _ => Err(Error::WrongVariant(lambda.variant_name())),
        }
    }

    /// Weight of `lambda` under the settings: a density for continuous models, an atom
    /// weight for the Di Lorenzo distribution.
    pub fn lambda_weight(&self, lambda: &HiddenSample<T>, s: &SettingsPair<T>) -> Result<T> {
        let four_pi = T::lit(4.0) * T::PI();
        match (*self, *lambda) {
            (Model::TonerBacon, HiddenSample::TonerBacon { .. })
            | (Model::TbExtension { .. }, HiddenSample::TbExtension { .. }) => Ok(T::one() / (four_pi * four_pi)),
            (Model::TbFreeWill, HiddenSample::TbFreeWill { u, v, c }) => Ok(tb_freewill_density(&u, &v, c, s)),
            (Model::Hall, HiddenSample::Hall { u }) => Ok(hall_density(&u, s)),
            (Model::DiLorenzo | Model::Mixed, HiddenSample::DiLorenzo { u, c, d }) => {
                Ok(dilorenzo_atom_weight(&u, c, d, s))
            }
            _ => Err(Error::WrongVariant(lambda.variant_name())),
        }
    }

    /// One full trial at fixed settings.
    pub fn trial(&self, s: &SettingsPair<T>, stream: &mut RandomStream) -> Result<(HiddenSample<T>, OutcomePair)> {
        let lambda = self.sample_lambda(s, stream)?;
        let o = self.outcomes(&lambda, s, stream)?;
        Ok((lambda, o))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    #[test]
    fn model_ids_round_trip() {
        for id in ModelId::ALL {
            assert_eq!(id.name().parse::<ModelId>().unwrap(), id);
            assert_eq!(id.to_string(), id.name());
        }
        assert!(matches!("bohm".parse::<ModelId>(), Err(Error::UnknownModel(_))));
    }

    #[test]
    fn closed_forms() {
        let s = SettingsPair::<f64>::planar_degrees(0.0, 60.0);
        let p = ModelId::Singlet.closed_form_law(1.0, &s).unwrap();
        assert!((p.get(Outcome::Plus, Outcome::Plus) - 0.125).abs() < 1e-15);
        assert_eq!(ModelId::Mixed.closed_form_law(1.0, &s).unwrap().get(Outcome::Plus, Outcome::Plus), 0.0);
        let u = ModelId::TbExt1.closed_form_law(0.5, &s).unwrap();
        assert_eq!(u, JointLaw2x2::uniform());
        assert!(matches!(ModelId::Hall.closed_form_law(1.0, &s), Err(Error::NoClosedForm(_))));
    }

    #[test]
    fn mismatched_variant_is_rejected() {
        let s = SettingsPair::<f64>::planar_degrees(0.0, 60.0);
        let lambda = HiddenSample::Hall { u: s.a };
        let mut st = substream(1, 1);
        assert!(matches!(Model::TonerBacon.outcomes(&lambda, &s, &mut st), Err(Error::WrongVariant("Hall"))));
    }

    #[test]
    fn extension_probability_is_validated() {
        assert!(Model::from_id(ModelId::TbExt1, 1.5f64).is_err());
        assert!(Model::from_id(ModelId::Singlet, 1.0f64).is_err());
    }

    #[test]
    fn conditional_laws_are_normalized() {
        let mut st = substream(3, 3);
        let models = [
            Model::TonerBacon,
            Model::TbExtension { family: TbFamily::SettingDependent, p: 0.3 },
            Model::TbExtension { family: TbFamily::OutcomeDependent, p: 0.8 },
            Model::TbFreeWill,
            Model::Hall,
            Model::DiLorenzo,
            Model::Mixed,
        ];
        for m in models {
            for _ in 0..1000 {
                let s = SettingsPair::new(
                    crate::geometry::sample_uniform_sphere(&mut st),
                    crate::geometry::sample_uniform_sphere(&mut st),
                );
                let (lambda, _) = m.trial(&s, &mut st).unwrap();
                assert!(m.conditional_law(&lambda, &s).unwrap().is_valid(1e-12));
            }
        }
    }
}
