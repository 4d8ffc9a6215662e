//! Which of the standard hypotheses each model satisfies, and an empirical check of the
//! declared classification against the per-lambda laws.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{sample_uniform_sphere, Outcome, UnitVector3};
use crate::law::{JointLaw2x2, SettingsPair};
use crate::models::laws::malus_marginal;
use crate::models::{Model, ModelId};
use crate::rng::RandomStream;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ModelFlags {
    pub deterministic: bool,
    pub setting_independent: bool,
    pub reducible_correlations: bool,
    pub uncorrelated_choice: bool,
    pub malus_compliant: bool,
}

const fn flags(det: bool, si: bool, rc: bool, uc: bool, malus: bool) -> ModelFlags {
    ModelFlags {
        deterministic: det,
        setting_independent: si,
        reducible_correlations: rc,
        uncorrelated_choice: uc,
        malus_compliant: malus,
    }
}

/// Declared classification. Setting independence of the one-bit model refers to its
/// communication reading, where B's outcome depends on `a` through the bit.
pub fn model_flags(id: ModelId) -> Result<ModelFlags> {
    Ok(match id {
        ModelId::TonerBacon => flags(true, false, true, true, false),
        ModelId::TbExt1 => flags(false, false, true, true, false),
        ModelId::TbExt2 => flags(false, true, false, true, false),
        ModelId::TbFreeWill => flags(true, true, true, false, false),
        ModelId::Hall => flags(true, true, true, false, false),
        ModelId::DiLorenzo => flags(false, true, true, false, true),
        ModelId::Mixed => flags(true, true, true, false, false),
        ModelId::Singlet => return Err(Error::UnknownModel("singlet has no hidden variable to classify".into())),
    })
}

const TOL: f64 = 1e-12;

fn close(x: f64, y: f64) -> bool {
    (x - y).abs() <= TOL * (1.0 + x.abs().max(y.abs()))
}

fn marginals(law: &JointLaw2x2<f64>) -> ([f64; 2], [f64; 2]) {
    (
        [law.marginal_a(Outcome::Plus), law.marginal_a(Outcome::Minus)],
        [law.marginal_b(Outcome::Plus), law.marginal_b(Outcome::Minus)],
    )
}

fn malus_pair(u: &UnitVector3<f64>, n: &UnitVector3<f64>) -> [f64; 2] {
    [malus_marginal(u, n, Outcome::Plus), malus_marginal(u, n, Outcome::Minus)]
}

/// Classifies a model from its per-lambda laws. Lambda is drawn at one settings pair
/// and evaluated on a `k x k` grid of random settings.
///
/// Setting independence asks that A's marginal not depend on `b` and B's on `a`; for a
/// model whose per-lambda law does not factorize only one of the two orderings of the
/// chain rule needs a setting-free marginal.
pub fn observed_flags(model: &Model<f64>, n_lambda: usize, k: usize, stream: &mut RandomStream) -> Result<ModelFlags> {
    let a: Vec<UnitVector3<f64>> = (0..k).map(|_| sample_uniform_sphere(stream)).collect();
    let b: Vec<UnitVector3<f64>> = (0..k).map(|_| sample_uniform_sphere(stream)).collect();
    let base = SettingsPair::new(a[0], b[0]);

    let mut det = true;
    let mut rc = true;
    let mut a_free_of_b = true;
    let mut b_free_of_a = true;
    let mut uc = true;
    let mut malus = true;

    for _ in 0..n_lambda {
        let lambda = model.sample_lambda(&base, stream)?;
        let w0 = model.lambda_weight(&lambda, &base)?;
        let (u, v) = (lambda.u(), lambda.v());
        let mut laws = vec![vec![JointLaw2x2::default(); k]; k];
        for i in 0..k {
            for j in 0..k {
                let s = SettingsPair::new(a[i], b[j]);
                let law = model.conditional_law(&lambda, &s)?;
                det &= law.entries().iter().flatten().all(|&x| close(x, 0.0) || close(x, 1.0));
                rc &= law.max_abs_diff(&law.product_of_marginals()) <= TOL;
                uc &= close(model.lambda_weight(&lambda, &s)?, w0);
                let (ma, mb) = marginals(&law);
                let (ea, eb) = (malus_pair(&u, &a[i]), malus_pair(&v, &b[j]));
                malus &= (0..2).all(|o| close(ma[o], ea[o]) && close(mb[o], eb[o]));
                laws[i][j] = law;
            }
        }
        for i in 0..k {
            for j in 0..k {
                let (ma, mb) = marginals(&laws[i][j]);
                let (ma0, _) = marginals(&laws[i][0]);
                let (_, mb0) = marginals(&laws[0][j]);
                a_free_of_b &= (0..2).all(|o| close(ma[o], ma0[o]));
                b_free_of_a &= (0..2).all(|o| close(mb[o], mb0[o]));
            }
        }
    }

    let si = if rc { a_free_of_b && b_free_of_a } else { a_free_of_b || b_free_of_a };
    Ok(flags(det, si, rc, uc, malus))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::TbFamily;
    use crate::rng::substream;

    #[test]
    fn declared_examples() {
        assert_eq!(model_flags(ModelId::DiLorenzo).unwrap(), flags(false, true, true, false, true));
        assert!(!model_flags(ModelId::Hall).unwrap().malus_compliant);
        assert!(!model_flags(ModelId::TbExt2).unwrap().reducible_correlations);
        assert!(model_flags(ModelId::Singlet).is_err());
    }

    #[test]
    fn declared_flags_match_observed() {
        for id in ModelId::ALL.into_iter().filter(|id| *id != ModelId::Singlet) {
            for p in [0.3, 0.75] {
                let model = Model::from_id(id, p).unwrap();
                let observed = observed_flags(&model, 300, 3, &mut substream(30, id as u64)).unwrap();
                assert_eq!(observed, model_flags(id).unwrap(), "{id} p={p}");
            }
        }
    }

    #[test]
    fn extension_at_p_one_is_deterministic() {
        let m = Model::TbExtension { family: TbFamily::SettingDependent, p: 1.0 };
        let f = observed_flags(&m, 200, 3, &mut substream(31, 0)).unwrap();
        assert!(f.deterministic && f.reducible_correlations && !f.setting_independent);
    }
}
