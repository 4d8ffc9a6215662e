//! Measurement-dependence measures on discretized models: the variation distance `M` between
//! hidden-variable laws under different settings, and the settings/lambda mutual information.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{Outcome, UnitVector3};
use crate::law::SettingsPair;
use crate::models::dilorenzo::dilorenzo_atom;
use crate::scalar::{exact_to_f64, log2_exact, ratio, Exact};

/// A model over an `n x n` settings grid with finitely many lambda atoms.
/// `conditionals[i * n + j]` is the sparse law of lambda given `(a_i, b_j)`, sorted by atom.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscretizedModel {
    pub n: usize,
    pub n_atoms: usize,
    pub conditionals: Vec<Vec<(usize, Exact)>>,
}

impl DiscretizedModel {
    pub fn new(n: usize, n_atoms: usize, conditionals: Vec<Vec<(usize, Exact)>>) -> Result<Self> {
        if n == 0 || conditionals.len() != n * n {
            return Err(Error::InvalidConfig(format!("need {} conditionals for a grid of {n}", n * n)));
        }
        for (p, law) in conditionals.iter().enumerate() {
            let total = law.iter().fold(Exact::zero(), |s, (_, w)| s + w);
            let sorted = law.windows(2).all(|w| w[0].0 < w[1].0);
            if total != Exact::one() || !sorted || law.iter().any(|(k, w)| *k >= n_atoms || w.is_negative()) {
                return Err(Error::InvalidConfig(format!(
                    "conditional law of settings pair {p} is not a distribution"
                )));
            }
        }
        Ok(DiscretizedModel { n, n_atoms, conditionals })
    }

    fn settings_prior(&self) -> Exact {
        ratio(1, (self.n * self.n) as i64)
    }

    /// Marginal law of lambda under uniform independent settings.
    pub fn lambda_marginal(&self) -> Vec<Exact> {
        let mut m = vec![Exact::zero(); self.n_atoms];
        let w = self.settings_prior();
        for law in &self.conditionals {
            for (k, p) in law {
                m[*k] += &w * p;
            }
        }
        m
    }
}

/// Settings directions: A at `k pi / n`, B rotated by a generic offset so no B direction
/// coincides with or opposes an A direction.
pub fn settings_grids(n: usize) -> (Vec<UnitVector3<f64>>, Vec<UnitVector3<f64>>) {
    let step = std::f64::consts::PI / n as f64;
    let offset = step / 7f64.sqrt();
    let a = (0..n).map(|k| UnitVector3::planar_radians(k as f64 * step)).collect();
    let b = (0..n).map(|k| UnitVector3::planar_radians(k as f64 * step + offset)).collect();
    (a, b)
}

type AtomKey = ([i64; 3], bool, i8);

fn atom_key(u: &UnitVector3<f64>, c: bool, d: Outcome) -> AtomKey {
    let q = |x: f64| (x * 1e9).round() as i64;
    ([q(u.x()), q(u.y()), q(u.z())], c, d.value())
}

/// Di Lorenzo's distribution with Kronecker weights: four atoms `(u, c, d)` of weight 1/4 per pair.
pub fn discretized_dilorenzo(n: usize) -> Result<DiscretizedModel> {
    let (a, b) = settings_grids(n);
    let mut atoms: BTreeMap<AtomKey, usize> = BTreeMap::new();
    let mut conditionals = Vec::with_capacity(n * n);
    for ai in &a {
        for bj in &b {
            let s = SettingsPair::new(*ai, *bj);
            let mut law: Vec<(usize, Exact)> = Vec::with_capacity(4);
            for c in [false, true] {
                for d in Outcome::BOTH {
                    let key = atom_key(&dilorenzo_atom(c, d, &s), c, d);
                    let next = atoms.len();
                    let k = *atoms.entry(key).or_insert(next);
                    law.push((k, ratio(1, 4)));
                }
            }
            law.sort_by_key(|(k, _)| *k);
            conditionals.push(law);
        }
    }
    DiscretizedModel::new(n, atoms.len(), conditionals)
}

/// Lambda names both settings: `mu(lambda | a_i, b_j) = [lambda = (i, j)]`.
pub fn dictated_settings(n: usize) -> Result<DiscretizedModel> {
    let conditionals = (0..n * n).map(|p| vec![(p, Exact::one())]).collect();
    DiscretizedModel::new(n, n * n, conditionals)
}

/// Lambda uniform over `atoms` values regardless of the settings.
pub fn settings_independent(n: usize, atoms: usize) -> Result<DiscretizedModel> {
    let w = ratio(1, atoms as i64);
    let law: Vec<(usize, Exact)> = (0..atoms).map(|k| (k, w.clone())).collect();
    DiscretizedModel::new(n, atoms, vec![law; n * n])
}

fn l1_distance(p: &[(usize, Exact)], q: &[(usize, Exact)]) -> Exact {
    let (mut i, mut j) = (0, 0);
    let mut s = Exact::zero();
    while i < p.len() || j < q.len() {
        match (p.get(i), q.get(j)) {
            (Some((ki, wi)), Some((kj, wj))) if ki == kj => {
                s += (wi - wj).abs();
                i += 1;
                j += 1;
            }
            (Some((ki, wi)), Some((kj, _))) if ki < kj => {
                s += wi;
                i += 1;
            }
            (Some((_, wi)), None) => {
                s += wi;
                i += 1;
            }
            (_, Some((_, wj))) => {
                s += wj;
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    s
}

/// `sup` over pairs of settings pairs of `sum_lambda |mu(lambda|a,b) - mu(lambda|a',b')|`, exactly.
pub fn measure_m(m: &DiscretizedModel) -> Exact {
    let laws = &m.conditionals;
    (0..laws.len())
        .into_par_iter()
        .map(|p| (p + 1..laws.len()).map(|q| l1_distance(&laws[p], &laws[q])).max().unwrap_or_else(Exact::zero))
        .max()
        .unwrap_or_else(Exact::zero)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MutualInformation {
    pub i_bits: f64,
    pub i_max_bits: f64,
    pub settings_entropy_bits: f64,
    pub lambda_entropy_bits: f64,
}

/// `I(a, b : lambda)` under uniform independent settings by exact enumeration. Terms are grouped
/// by the exact ratio `mu(lambda|a,b) / P(lambda)` so that a single logarithm is taken per value.
pub fn mutual_information(m: &DiscretizedModel) -> MutualInformation {
    let marginal = m.lambda_marginal();
    let w = m.settings_prior();
    let mut groups: BTreeMap<Exact, Exact> = BTreeMap::new();
    for law in &m.conditionals {
        for (k, p) in law {
            if p.is_zero() {
                continue;
            }
            *groups.entry(p / &marginal[*k]).or_insert_with(Exact::zero) += &w * p;
        }
    }
    let i_bits = groups.iter().map(|(r, weight)| exact_to_f64(weight) * log2_exact(r)).sum::<f64>();
    let lambda_entropy_bits = marginal.iter().filter(|p| !p.is_zero()).map(|p| -exact_to_f64(p) * log2_exact(p)).sum();
    let settings_entropy_bits = 2.0 * (m.n as f64).log2();
    MutualInformation { i_bits, i_max_bits: settings_entropy_bits, settings_entropy_bits, lambda_entropy_bits }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FreeWillReport {
    #[serde(rename = "M")]
    pub m: f64,
    #[serde(rename = "M_exact")]
    pub m_exact: String,
    #[serde(rename = "I_bits")]
    pub i_bits: f64,
    #[serde(rename = "I_max_bits")]
    pub i_max_bits: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub lambda_atoms: usize,
}

pub fn free_will_report(m: &DiscretizedModel) -> FreeWillReport {
    let mm = measure_m(m);
    let mi = mutual_information(m);
    FreeWillReport {
        m: exact_to_f64(&mm),
        m_exact: mm.to_string(),
        i_bits: mi.i_bits,
        i_max_bits: mi.i_max_bits,
        n: m.n,
        lambda_atoms: m.n_atoms,
    }
}
