//! The chain rule `P(e_1, ..., e_k) = prod_j P(e_j | e_1, ..., e_{j-1})` checked on a finite joint.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Field;

/// A joint distribution over `k` discrete variables, row-major in the variable order.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteJoint<T> {
    dims: Vec<usize>,
    p: Vec<T>,
}

impl<T: Field> DiscreteJoint<T> {
    pub fn new(dims: Vec<usize>, p: Vec<T>) -> Result<Self> {
        let size: usize = dims.iter().product();
        if dims.is_empty() || dims.contains(&0) || size != p.len() {
            return Err(Error::InvalidConfig(format!("joint of shape {dims:?} needs {size} entries, got {}", p.len())));
        }
        if p.iter().any(|x| *x < T::zero()) {
            return Err(Error::InvalidConfig("negative probability in joint".into()));
        }
        Ok(DiscreteJoint { dims, p })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total(&self) -> T {
        self.p.iter().fold(T::zero(), |s, x| s + x.clone())
    }

    fn index_of(&self, e: &[usize]) -> usize {
        e.iter().zip(&self.dims).fold(0, |acc, (&v, &d)| acc * d + v)
    }

    fn outcome_of(&self, mut idx: usize) -> Vec<usize> {
        let mut e = vec![0; self.dims.len()];
        for (slot, &d) in e.iter_mut().zip(&self.dims).rev() {
            *slot = idx % d;
            idx /= d;
        }
        e
    }

    pub fn prob(&self, e: &[usize]) -> T {
        self.p[self.index_of(e)].clone()
    }

    /// Probability that the first `e.len()` variables take the values in `e`.
    pub fn prefix_prob(&self, e: &[usize]) -> T {
        let mut s = T::zero();
        for (idx, x) in self.p.iter().enumerate() {
            if self.outcome_of(idx)[..e.len()] == *e {
                s = s + x.clone();
            }
        }
        s
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ChainReport {
    pub holds: bool,
    pub outcomes_checked: usize,
    /// Factors skipped because their conditioning prefix has probability zero.
    pub indeterminate_factors: usize,
}

/// Verifies the chain rule on every outcome. A factor whose prefix has zero probability is
/// the indeterminate `0/0` and is skipped; the product of the remaining factors must still match.
pub fn bayes_chain_check<T: Field>(joint: &DiscreteJoint<T>, tol: T) -> ChainReport {
    let mut report = ChainReport { holds: true, ..Default::default() };
    let k = joint.dims.len();
    for idx in 0..joint.p.len() {
        let e = joint.outcome_of(idx);
        let mut product = T::one();
        for j in 0..k {
            let prefix = joint.prefix_prob(&e[..j]);
            if prefix.is_zero() {
                report.indeterminate_factors += 1;
                continue;
            }
            product = product * joint.prefix_prob(&e[..=j]) / prefix;
        }
        // Without a conditioning event the first factor is the marginal itself, so a skipped
        // factor always follows a zero factor and the product is zero as well.
        report.holds &= (product - joint.prob(&e)).abs() <= tol;
        report.outcomes_checked += 1;
    }
    report.holds &= (joint.total() - T::one()).abs() <= tol;
    report
}
