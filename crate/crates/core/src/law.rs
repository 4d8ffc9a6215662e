//! Settings, outcome pairs, joint laws and their Monte Carlo estimates.

use num_traits::{Num, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Outcome, UnitVector3};
use crate::scalar::Scalar;

/// Analyzer directions at the two stations.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar + Serialize", deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct SettingsPair<T> {
    pub a: UnitVector3<T>,
    pub b: UnitVector3<T>,
}

impl<T: Scalar> SettingsPair<T> {
    pub fn new(a: UnitVector3<T>, b: UnitVector3<T>) -> Self {
        Self { a, b }
    }

    /// Both directions in the x-y plane, angles in degrees.
    pub fn planar_degrees(a: T, b: T) -> Self {
        Self::new(UnitVector3::planar_degrees(a), UnitVector3::planar_degrees(b))
    }

    #[inline]
    pub fn overlap(&self) -> T {
        self.a.dot(&self.b)
    }

    /// Same pair with the stations' roles exchanged.
    pub fn swapped(&self) -> Self {
        Self::new(self.b, self.a)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OutcomePair {
    pub sigma: Outcome,
    pub tau: Outcome,
}

impl OutcomePair {
    pub fn new(sigma: Outcome, tau: Outcome) -> Self {
        Self { sigma, tau }
    }

    #[inline]
    pub fn product(&self) -> Outcome {
        self.sigma * self.tau
    }

    pub fn all() -> [OutcomePair; 4] {
        use Outcome::*;
        [
            OutcomePair::new(Plus, Plus),
            OutcomePair::new(Plus, Minus),
            OutcomePair::new(Minus, Plus),
            OutcomePair::new(Minus, Minus),
        ]
    }
}

/// Joint probabilities `P(sigma, tau)` for the four outcome pairs, indexed by [`Outcome::index`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointLaw2x2<T> {
    p: [[T; 2]; 2],
}

impl<T: Clone + Num + PartialOrd> JointLaw2x2<T> {
    /// Builds a law from a probability function, without validation.
    pub fn from_fn(mut f: impl FnMut(Outcome, Outcome) -> T) -> Self {
        use Outcome::*;
        Self { p: [[f(Plus, Plus), f(Plus, Minus)], [f(Minus, Plus), f(Minus, Minus)]] }
    }

    /// Builds a validated law. `tol` bounds `|sum - 1|` (use zero for exact types).
    pub fn try_new(p: [[T; 2]; 2], tol: T) -> Result<Self> {
        let law = Self { p };
        if !law.is_valid(tol) {
            return Err(Error::InconsistentInput("joint law entries must be non-negative and sum to one".into()));
        }
        Ok(law)
    }

    pub fn is_valid(&self, tol: T) -> bool {
        let zero = T::zero();
        let nonneg = self.p.iter().flatten().all(|x| *x >= zero);
        let s = self.total();
        let one = T::one();
        let dev = if s > one.clone() { s - one } else { one - s };
        nonneg && dev <= tol
    }

    #[inline]
    pub fn get(&self, sigma: Outcome, tau: Outcome) -> T {
        self.p[sigma.index()][tau.index()].clone()
    }

    #[inline]
    pub fn at(&self, o: OutcomePair) -> T {
        self.get(o.sigma, o.tau)
    }

    pub fn total(&self) -> T {
        self.p.iter().flatten().cloned().fold(T::zero(), |acc, x| acc + x)
    }

    pub fn entries(&self) -> &[[T; 2]; 2] {
        &self.p
    }

    /// `sum sigma*tau*P(sigma, tau)`.
    pub fn correlator(&self) -> T {
        let same = self.p[0][0].clone() + self.p[1][1].clone();
        let diff = self.p[0][1].clone() + self.p[1][0].clone();
        same - diff
    }

    /// `P_A(sigma) = sum_tau P(sigma, tau)`.
    pub fn marginal_a(&self, sigma: Outcome) -> T {
        let r = &self.p[sigma.index()];
        r[0].clone() + r[1].clone()
    }

    pub fn marginal_b(&self, tau: Outcome) -> T {
        let j = tau.index();
        self.p[0][j].clone() + self.p[1][j].clone()
    }

    /// Product of the two marginals.
    pub fn product_of_marginals(&self) -> Self {
        Self::from_fn(|s, t| self.marginal_a(s) * self.marginal_b(t))
    }
}

impl<T: Scalar> JointLaw2x2<T> {
    pub fn uniform() -> Self {
        let q = T::lit(0.25);
        Self { p: [[q; 2]; 2] }
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        let mut m = T::zero();
        for i in 0..2 {
            for j in 0..2 {
                m = m.max((self.p[i][j] - other.p[i][j]).abs());
            }
        }
        m
    }

    /// Deterministic law concentrated on one outcome pair.
    pub fn point(o: OutcomePair) -> Self {
        Self::from_fn(|s, t| if s == o.sigma && t == o.tau { T::one() } else { T::zero() })
    }
}

/// Outcome counts from a Monte Carlo run.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LawEstimate {
    pub counts: [[u64; 2]; 2],
}

impl LawEstimate {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn record(&mut self, o: OutcomePair) {
        self.counts[o.sigma.index()][o.tau.index()] += 1;
    }

    pub fn merge(&mut self, other: &LawEstimate) {
        for i in 0..2 {
            for j in 0..2 {
                self.counts[i][j] += other.counts[i][j];
            }
        }
    }

    pub fn n(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn law(&self) -> Result<JointLaw2x2<f64>> {
        let n = self.n();
        if n == 0 {
            return Err(Error::EmptySample);
        }
        Ok(JointLaw2x2::from_fn(|s, t| self.counts[s.index()][t.index()] as f64 / n as f64))
    }

    /// Largest binomial standard error over the four cells.
    pub fn std_error(&self) -> f64 {
        let n = self.n() as f64;
        if n == 0.0 {
            return f64::INFINITY;
        }
        self.counts
            .iter()
            .flatten()
            .map(|&c| {
                let p = c as f64 / n;
                (p * (1.0 - p) / n).sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// Largest deviation from a reference law.
    pub fn max_abs_dev(&self, reference: &JointLaw2x2<f64>) -> Result<f64> {
        Ok(self.law()?.max_abs_diff(reference))
    }
}

/// Mean of `1{outcome = (sigma, tau)} - P_ref(sigma, tau | settings)` over trials whose
/// settings vary from trial to trial. Zero in expectation iff the trials follow the reference.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ResidualEstimate {
    sum: [[f64; 2]; 2],
    sum_sq: [[f64; 2]; 2],
    n: u64,
}

impl ResidualEstimate {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, observed: OutcomePair, reference: &JointLaw2x2<f64>) {
        for o in OutcomePair::all() {
            let hit = if o == observed { 1.0 } else { 0.0 };
            let r = hit - reference.at(o);
            let (i, j) = (o.sigma.index(), o.tau.index());
            self.sum[i][j] += r;
            self.sum_sq[i][j] += r * r;
        }
        self.n += 1;
    }

    pub fn merge(&mut self, other: &ResidualEstimate) {
        for i in 0..2 {
            for j in 0..2 {
                self.sum[i][j] += other.sum[i][j];
                self.sum_sq[i][j] += other.sum_sq[i][j];
            }
        }
        self.n += other.n;
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> [[f64; 2]; 2] {
        let n = self.n.max(1) as f64;
        self.sum.map(|row| row.map(|x| x / n))
    }

    pub fn max_abs_dev(&self) -> f64 {
        self.mean().iter().flatten().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn std_error(&self) -> f64 {
        let n = self.n as f64;
        if n < 2.0 {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let mean = self.sum[i][j] / n;
                let var = (self.sum_sq[i][j] / n - mean * mean).max(0.0) * n / (n - 1.0);
                worst = worst.max((var / n).sqrt());
            }
        }
        worst
    }
}

impl<T: Zero + Clone + Num + PartialOrd> Default for JointLaw2x2<T> {
    fn default() -> Self {
        Self::from_fn(|_, _| T::zero())
    }
}
