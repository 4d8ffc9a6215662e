//! Does a set of pairwise statistics admit a joint distribution over all four outcomes?
//!
//! Decided twice: by exact linear programming over the 16 atoms, and by the eight CHSH
//! inequalities together with positivity of the four pairwise laws.

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::Outcome;
use crate::inequalities::correlator::CorrelatorEstimate;
use crate::inequalities::lp::{solve_feasibility, verify_verdict, LpVerdict};
use crate::inequalities::master::{atom_coefficients, MasterProb16};
use crate::scalar::{exact_from_f64, exact_to_f64, ratio, Exact, Field};

/// Pairwise statistics in correlator order, with single-outcome means `[m_a, m_a', m_b, m_b']`.
#[derive(Clone, Debug, PartialEq)]
pub struct PairwiseData<T> {
    pub correlators: [T; 4],
    pub marginals: [T; 4],
}

/// For correlator `k`, the indices of its A and B settings in the marginal array.
pub const PAIR_MARGINALS: [(usize, usize); 4] = [(0, 2), (1, 2), (0, 3), (1, 3)];

impl<T: Field> PairwiseData<T> {
    /// Unbiased outcomes: all marginals zero.
    pub fn unbiased(correlators: [T; 4]) -> Self {
        PairwiseData { correlators, marginals: std::array::from_fn(|_| T::zero()) }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, values) in [("correlator", &self.correlators), ("marginal", &self.marginals)] {
            for (i, v) in values.iter().enumerate() {
                if v.abs() > T::one() {
                    return Err(Error::InconsistentInput(format!("{name} {i} = {v:?} exceeds 1 in magnitude")));
                }
            }
        }
        Ok(())
    }

    /// `P(sigma, tau)` on pair `k` implied by the correlator and marginals.
    pub fn pair_probability(&self, k: usize, sigma: Outcome, tau: Outcome) -> T {
        let (i, j) = PAIR_MARGINALS[k];
        let s = if sigma == Outcome::Plus { T::one() } else { -T::one() };
        let t = if tau == Outcome::Plus { T::one() } else { -T::one() };
        let four = T::one() + T::one() + T::one() + T::one();
        (T::one()
            + s.clone() * self.marginals[i].clone()
            + t.clone() * self.marginals[j].clone()
            + s * t * self.correlators[k].clone())
            / four
    }
}

/// A violated face of the local polytope.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Facet {
    /// `sign * (C1 + C2 + C3 + C4 - 2 C_minus) <= 2`.
    Chsh { minus: usize, sign: i8 },
    /// `P(sigma, tau)` on pair `pair` must be nonnegative.
    Positivity { pair: usize, sigma: i8, tau: i8 },
}

impl Facet {
    pub fn all() -> Vec<Facet> {
        let mut v = Vec::with_capacity(24);
        for minus in 0..4 {
            for sign in [1, -1] {
                v.push(Facet::Chsh { minus, sign });
            }
        }
        for pair in 0..4 {
            for sigma in [1, -1] {
                for tau in [1, -1] {
                    v.push(Facet::Positivity { pair, sigma, tau });
                }
            }
        }
        v
    }

    /// Amount by which the facet is violated (positive means violated).
    pub fn excess<T: Field>(&self, d: &PairwiseData<T>) -> T {
        match *self {
            Facet::Chsh { minus, sign } => {
                let mut sum = T::zero();
                for c in &d.correlators {
                    sum = sum + c.clone();
                }
                let two = T::one() + T::one();
                let v = sum - two.clone() * d.correlators[minus].clone();
                let v = if sign > 0 { v } else { -v };
                v - two
            }
            Facet::Positivity { pair, sigma, tau } => {
                let o = |x: i8| if x > 0 { Outcome::Plus } else { Outcome::Minus };
                -d.pair_probability(pair, o(sigma), o(tau))
            }
        }
    }
}

/// The first violated facet, if any.
pub fn facet_check<T: Field>(d: &PairwiseData<T>) -> Option<Facet> {
    Facet::all().into_iter().find(|f| f.excess(d) > T::zero())
}

fn constraint_matrix() -> Vec<Vec<Exact>> {
    (0..9).map(|row| (0..16).map(|k| Exact::from_integer(atom_coefficients(k)[row].into())).collect()).collect()
}

/// Exact LP: does a master distribution reproduce the data?
pub fn lp_feasibility(d: &PairwiseData<Exact>) -> LpVerdict<Exact> {
    let a = constraint_matrix();
    let mut b = vec![Exact::one()];
    b.extend(d.correlators.iter().cloned());
    b.extend(d.marginals.iter().cloned());
    let verdict = solve_feasibility(&a, &b);
    debug_assert!(verify_verdict(&a, &b, &verdict));
    verdict
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    /// A master distribution reproducing the data.
    pub witness: Option<[f64; 16]>,
    pub facet_violated: Option<Facet>,
    /// Dual certificate of infeasibility over the rows `[normalization, C1..C4, marginals]`.
    pub farkas: Option<Vec<f64>>,
    pub certificate_verified: bool,
    pub lp_agrees_with_facets: bool,
}

/// Decides feasibility exactly and cross-checks the two characterizations.
pub fn fine_feasibility(d: &PairwiseData<Exact>) -> Result<FeasibilityReport> {
    d.validate()?;
    let a = constraint_matrix();
    let mut b = vec![Exact::one()];
    b.extend(d.correlators.iter().cloned());
    b.extend(d.marginals.iter().cloned());
    let verdict = solve_feasibility(&a, &b);
    let certificate_verified = verify_verdict(&a, &b, &verdict);
    let facet = facet_check(d);
    let lp_agrees_with_facets = verdict.is_feasible() == facet.is_none();
    Ok(match verdict {
        LpVerdict::Feasible(x) => FeasibilityReport {
            feasible: true,
            witness: Some(symmetrize_witness(&MasterProb16 { q: std::array::from_fn(|k| x[k].clone()) }, d).to_f64()),
            facet_violated: facet,
            farkas: None,
            certificate_verified,
            lp_agrees_with_facets,
        },
        LpVerdict::Infeasible(y) => FeasibilityReport {
            feasible: false,
            witness: None,
            facet_violated: facet,
            farkas: Some(y.iter().map(exact_to_f64).collect()),
            certificate_verified,
            lp_agrees_with_facets,
        },
    })
}

/// Floating-point convenience wrapper; inputs are converted to exact rationals.
pub fn fine_feasibility_f64(correlators: [f64; 4], marginals: [f64; 4]) -> Result<FeasibilityReport> {
    if correlators.iter().chain(&marginals).any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("feasibility input".into()));
    }
    fine_feasibility(&PairwiseData {
        correlators: correlators.map(exact_from_f64),
        marginals: marginals.map(exact_from_f64),
    })
}

/// Feasibility with each statistic allowed anywhere in `value +- k * std_error`, clipped to `[-1, 1]`.
pub fn relaxed_feasibility(
    correlators: &[CorrelatorEstimate; 4],
    marginals: &[CorrelatorEstimate; 4],
    k: f64,
) -> Result<FeasibilityReport> {
    let stats: Vec<&CorrelatorEstimate> = correlators.iter().chain(marginals).collect();
    if stats.iter().any(|c| !c.value.is_finite() || !c.std_error.is_finite()) {
        return Err(Error::NonFinite("relaxed feasibility input".into()));
    }
    // Variables: 16 atoms, then a lower and an upper slack per statistic.
    let n = 16 + 2 * stats.len();
    let mut a = Vec::new();
    let mut b = Vec::new();
    let mut norm = vec![Exact::zero(); n];
    for x in norm.iter_mut().take(16) {
        *x = Exact::one();
    }
    a.push(norm);
    b.push(Exact::one());
    for (i, c) in stats.iter().enumerate() {
        let lo = exact_from_f64((c.value - k * c.std_error).max(-1.0));
        let hi = exact_from_f64((c.value + k * c.std_error).min(1.0));
        let row: Vec<Exact> = (0..16).map(|atom| Exact::from_integer(atom_coefficients(atom)[i + 1].into())).collect();
        let mut lower = row.clone();
        lower.resize(n, Exact::zero());
        lower[16 + 2 * i] = -Exact::one();
        a.push(lower);
        b.push(lo);
        let mut upper = row;
        upper.resize(n, Exact::zero());
        upper[16 + 2 * i + 1] = Exact::one();
        a.push(upper);
        b.push(hi);
    }
    let verdict = solve_feasibility(&a, &b);
    let certificate_verified = verify_verdict(&a, &b, &verdict);
    let point = PairwiseData {
        correlators: correlators.map(|c| exact_from_f64(c.value.clamp(-1.0, 1.0))),
        marginals: marginals.map(|c| exact_from_f64(c.value.clamp(-1.0, 1.0))),
    };
    let facet = facet_check(&point);
    Ok(match verdict {
        LpVerdict::Feasible(x) => FeasibilityReport {
            feasible: true,
            witness: Some(std::array::from_fn(|atom| exact_to_f64(&x[atom]))),
            facet_violated: facet,
            farkas: None,
            certificate_verified,
            // A point estimate may sit just outside the polytope while its band does not.
            lp_agrees_with_facets: true,
        },
        LpVerdict::Infeasible(y) => FeasibilityReport {
            feasible: false,
            witness: None,
            facet_violated: facet,
            farkas: Some(y.iter().map(exact_to_f64).collect()),
            certificate_verified,
            lp_agrees_with_facets: facet.is_some(),
        },
    })
}

/// All correlators and marginals zero.
pub fn uniform_data() -> PairwiseData<Exact> {
    PairwiseData::unbiased(std::array::from_fn(|_| ratio(0, 1)))
}

/// Atom-index bit of each outcome, in marginal order `[a, a', b, b']`.
const MARGINAL_BITS: [usize; 4] = [3, 1, 2, 0];

/// Sign picked up by marginal `i` and correlator `k` when the outcomes in `mask` are relabeled.
fn relabel_signs(mask: usize) -> ([bool; 4], [bool; 4]) {
    let flipped: [bool; 4] = MARGINAL_BITS.map(|bit| (mask >> bit) & 1 == 1);
    let corr = PAIR_MARGINALS.map(|(i, j)| flipped[i] != flipped[j]);
    (flipped, corr)
}

/// Averages a witness over the outcome relabelings that leave the data unchanged.
/// The result is still a witness; for unbiased, uncorrelated data it is the uniform master.
pub fn symmetrize_witness(x: &MasterProb16<Exact>, d: &PairwiseData<Exact>) -> MasterProb16<Exact> {
    let mut masks = Vec::new();
    for mask in 0..16 {
        let (m_flip, c_flip) = relabel_signs(mask);
        let keeps = |v: &Exact, flip: bool| !flip || v.is_zero();
        let invariant = d.marginals.iter().zip(m_flip).all(|(v, f)| keeps(v, f))
            && d.correlators.iter().zip(c_flip).all(|(v, f)| keeps(v, f));
        if invariant {
            masks.push(mask);
        }
    }
    let count = Exact::from_integer((masks.len() as i64).into());
    MasterProb16 {
        q: std::array::from_fn(|k| {
            let mut s = Exact::zero();
            for &mask in &masks {
                s += x.q[k ^ mask].clone();
            }
            s / count.clone()
        }),
    }
}

/// A symmetrized witness as an exact master, when feasible.
pub fn witness_master(d: &PairwiseData<Exact>) -> Option<MasterProb16<Exact>> {
    match lp_feasibility(d) {
        LpVerdict::Feasible(x) => {
            let raw = MasterProb16 { q: std::array::from_fn(|k| x[k].clone()) };
            Some(symmetrize_witness(&raw, d))
        }
        LpVerdict::Infeasible(_) => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inequalities::correlator::ChshSettings;
    use crate::models::laws::singlet_law;
    use crate::rng::substream;

    #[test]
    fn uniform_is_feasible() {
        let d = uniform_data();
        let r = fine_feasibility(&d).unwrap();
        assert!(r.feasible && r.lp_agrees_with_facets && r.certificate_verified);
        let m = witness_master(&d).unwrap();
        assert!(m.is_valid());
        assert_eq!(m.correlators(), d.correlators);
    }

    #[test]
    fn uniform_witness_is_returned_for_zero_data() {
        let r = fine_feasibility(&uniform_data()).unwrap();
        assert_eq!(r.witness.unwrap(), [1.0 / 16.0; 16]);
        assert_eq!(witness_master(&uniform_data()).unwrap(), MasterProb16::uniform());
    }

    #[test]
    fn symmetrized_witness_still_reproduces_data() {
        let mut st = substream(51, 0);
        for _ in 0..500 {
            let m = MasterProb16::random(&mut st, 10);
            let d = PairwiseData { correlators: m.correlators(), marginals: m.marginals() };
            let w = witness_master(&d).unwrap();
            assert!(w.is_valid());
            assert_eq!(w.correlators(), d.correlators);
            assert_eq!(w.marginals(), d.marginals);
        }
    }

    #[test]
    fn singlet_at_optimal_angles_is_infeasible() {
        let c = ChshSettings::singlet_optimal().pairs().map(|s| singlet_law(&s).correlator());
        let r = fine_feasibility_f64(c, [0.0; 4]).unwrap();
        assert!(!r.feasible);
        assert!(r.certificate_verified);
        assert!(matches!(r.facet_violated, Some(Facet::Chsh { .. })));
        assert!(r.lp_agrees_with_facets);
    }

    #[test]
    fn out_of_range_input_is_rejected() {
        assert!(fine_feasibility_f64([1.5, 0.0, 0.0, 0.0], [0.0; 4]).is_err());
        assert!(fine_feasibility_f64([0.0; 4], [f64::NAN, 0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn biased_marginals_can_break_positivity_alone() {
        // All marginals 1 force every outcome to +1, so every correlator must be 1.
        let d = PairwiseData {
            correlators: std::array::from_fn(|_| ratio(0, 1)),
            marginals: [ratio(1, 1), ratio(1, 1), ratio(1, 1), ratio(1, 1)],
        };
        let r = fine_feasibility(&d).unwrap();
        assert!(!r.feasible && r.lp_agrees_with_facets);
        assert!(matches!(r.facet_violated, Some(Facet::Positivity { pair: 0, .. })));
    }

    #[test]
    fn lp_and_facets_agree_on_random_rationals() {
        let mut st = substream(50, 0);
        let mut feasible = 0;
        for i in 0..10_000 {
            let mut pick = || ratio(st.index(121) as i64 - 60, 60);
            let correlators = std::array::from_fn(|_| pick());
            let marginals = if i % 2 == 0 {
                std::array::from_fn(|_| ratio(0, 1))
            } else {
                std::array::from_fn(|_| ratio(st.index(41) as i64 - 20, 60))
            };
            let r = fine_feasibility(&PairwiseData { correlators, marginals }).unwrap();
            assert!(r.lp_agrees_with_facets, "{r:?}");
            assert!(r.certificate_verified);
            feasible += r.feasible as usize;
        }
        assert!(feasible > 1000 && feasible < 9000, "{feasible}");
    }

    #[test]
    fn relaxation_absorbs_noise_near_the_bound() {
        let c = [0.5, 0.5, 0.5, -0.51].map(|v| CorrelatorEstimate { value: v, std_error: 0.005, n_trials: 10_000 });
        let m = [CorrelatorEstimate { value: 0.0, std_error: 0.01, n_trials: 10_000 }; 4];
        let exact = fine_feasibility_f64(c.map(|x| x.value), [0.0; 4]).unwrap();
        assert!(!exact.feasible);
        let relaxed = relaxed_feasibility(&c, &m, 3.0).unwrap();
        assert!(relaxed.feasible && relaxed.certificate_verified);
        let strict = relaxed_feasibility(&c, &m, 0.0).unwrap();
        assert!(!strict.feasible && strict.certificate_verified);
    }
}
