//! Joint distributions over all four counterfactual outcomes.

use crate::geometry::Outcome;
use crate::rng::RandomStream;
use crate::scalar::{Exact, Field};

/// `q[sigma][tau][sigma'][tau']` flattened; outcome index 0 is `+1`.
#[derive(Clone, Debug, PartialEq)]
pub struct MasterProb16<T> {
    pub q: [T; 16],
}

/// Flat index of `(sigma, tau, sigma', tau')`.
pub fn atom_index(s: Outcome, t: Outcome, s2: Outcome, t2: Outcome) -> usize {
    s.index() * 8 + t.index() * 4 + s2.index() * 2 + t2.index()
}

/// Outcomes of atom `k` as `(sigma, tau, sigma', tau')`.
pub fn atom_outcomes(k: usize) -> [Outcome; 4] {
    let bit = |shift: usize| if (k >> shift) & 1 == 0 { Outcome::Plus } else { Outcome::Minus };
    [bit(3), bit(2), bit(1), bit(0)]
}

/// Row coefficients of atom `k`: `[1, C1, C2, C3, C4, m_a, m_a', m_b, m_b']` in correlator order
/// `(a,b), (a',b), (a,b'), (a',b')`.
pub fn atom_coefficients(k: usize) -> [i8; 9] {
    let [s, t, s2, t2] = atom_outcomes(k).map(Outcome::value);
    [1, s * t, s2 * t, s * t2, s2 * t2, s, s2, t, t2]
}

impl<T: Field> MasterProb16<T> {
    pub fn uniform() -> Self {
        let sixteen = (0..16).fold(T::zero(), |s, _| s + T::one());
        let w = T::one() / sixteen;
        MasterProb16 { q: std::array::from_fn(|_| w.clone()) }
    }

    pub fn is_valid(&self) -> bool {
        let mut s = T::zero();
        for x in &self.q {
            if *x < T::zero() {
                return false;
            }
            s = s + x.clone();
        }
        s == T::one()
    }

    fn moment(&self, row: usize) -> T {
        let mut s = T::zero();
        for (k, x) in self.q.iter().enumerate() {
            let c = atom_coefficients(k)[row];
            if c > 0 {
                s = s + x.clone();
            } else {
                s = s - x.clone();
            }
        }
        s
    }

    /// Induced correlators in correlator order.
    pub fn correlators(&self) -> [T; 4] {
        std::array::from_fn(|i| self.moment(i + 1))
    }

    /// Induced single-outcome means `[m_a, m_a', m_b, m_b']`.
    pub fn marginals(&self) -> [T; 4] {
        std::array::from_fn(|i| self.moment(i + 5))
    }

    /// The master with `sigma` relabeled to `-sigma`.
    pub fn flip_sigma(&self) -> Self {
        MasterProb16 { q: std::array::from_fn(|k| self.q[k ^ 8].clone()) }
    }
}

impl MasterProb16<Exact> {
    /// Random master with integer weights in `0..=max_weight`, normalized exactly.
    pub fn random(stream: &mut RandomStream, max_weight: usize) -> Self {
        let w: [i64; 16] = std::array::from_fn(|_| stream.index(max_weight + 1) as i64);
        let total: i64 = w.iter().sum::<i64>().max(1);
        if w.iter().all(|&x| x == 0) {
            return Self::uniform();
        }
        MasterProb16 { q: w.map(|x| Exact::new(x.into(), total.into())) }
    }

    pub fn to_f64(&self) -> [f64; 16] {
        self.q.clone().map(|x| crate::scalar::exact_to_f64(&x))
    }
}
