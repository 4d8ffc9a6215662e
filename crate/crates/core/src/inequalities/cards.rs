//! Two decks of King/Queen pairs: a manifestly local model whose conditional joint does not factorize.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::inequalities::bayes::DiscreteJoint;
use crate::scalar::{exact_to_f64, ratio, Exact};
use num_traits::{One, Zero};

/// Deck `i` holds a fraction `kr_qb[i]` of pairs (red King, black Queen); the rest are
/// (black King, red Queen). One card of the drawn pair goes to each observer at random.
#[derive(Clone, Debug, PartialEq)]
pub struct CardDeckModel {
    pub kr_qb: Vec<Exact>,
    pub prior: Vec<Exact>,
}

impl CardDeckModel {
    /// 30% and 70% red-King pairs, each deck chosen with probability 1/2.
    pub fn two_decks() -> Self {
        CardDeckModel { kr_qb: vec![ratio(3, 10), ratio(7, 10)], prior: vec![ratio(1, 2), ratio(1, 2)] }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |x: &Exact| *x >= Exact::zero() && *x <= Exact::one();
        if self.kr_qb.is_empty() || self.kr_qb.len() != self.prior.len() {
            return Err(Error::InvalidConfig("one prior weight per deck required".into()));
        }
        if !self.kr_qb.iter().chain(&self.prior).all(unit) {
            return Err(Error::InvalidConfig("deck fractions and priors must lie in [0, 1]".into()));
        }
        if self.prior.iter().fold(Exact::zero(), |s, x| s + x) != Exact::one() {
            return Err(Error::InvalidConfig("deck prior must sum to 1".into()));
        }
        Ok(())
    }

    /// Joint over `(deck, A gets King, B gets Black)`, booleans indexed 0 = true.
    pub fn joint(&self) -> Result<DiscreteJoint<Exact>> {
        self.validate()?;
        let half = ratio(1, 2);
        let mut p = Vec::with_capacity(4 * self.prior.len());
        for (frac, prior) in self.kr_qb.iter().zip(&self.prior) {
            let other = Exact::one() - frac;
            // A King at A leaves the Queen for B: black in a (KR, QB) pair.
            let kb = &half * frac;
            let kr = &half * &other;
            // A Queen at A leaves the King for B: black in a (KB, QR) pair.
            let qb = &half * &other;
            let qr = &half * frac;
            for x in [kb, kr, qb, qr] {
                p.push(prior * x);
            }
        }
        DiscreteJoint::new(vec![self.prior.len(), 2, 2], p)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeckStats {
    pub joint: Exact,
    pub product: Exact,
    pub factorizes: bool,
}

impl DeckStats {
    fn new(joint: Exact, p_king: Exact, p_black: Exact) -> Self {
        let product = p_king * p_black;
        DeckStats { factorizes: joint == product, joint, product }
    }
}

/// `P(K, B | deck)` against `P(K | deck) P(B | deck)`.
pub fn card_deck_stats(m: &CardDeckModel, deck: usize) -> Result<DeckStats> {
    let j = m.joint()?;
    if deck >= m.prior.len() {
        return Err(Error::InvalidConfig(format!("no deck {deck}")));
    }
    let pd = j.prefix_prob(&[deck]);
    if pd.is_zero() {
        return Err(Error::InvalidConfig(format!("deck {deck} has zero prior")));
    }
    let joint = j.prob(&[deck, 0, 0]) / &pd;
    let king = j.prefix_prob(&[deck, 0]) / &pd;
    let black = (j.prob(&[deck, 0, 0]) + j.prob(&[deck, 1, 0])) / &pd;
    Ok(DeckStats::new(joint, king, black))
}

/// The same comparison with the deck marginalized out.
pub fn card_deck_unconditional(m: &CardDeckModel) -> Result<DeckStats> {
    let j = m.joint()?;
    let n = m.prior.len();
    let sum = |f: &dyn Fn(usize) -> Exact| (0..n).fold(Exact::zero(), |s, d| s + f(d));
    let joint = sum(&|d| j.prob(&[d, 0, 0]));
    let king = sum(&|d| j.prefix_prob(&[d, 0]));
    let black = sum(&|d| j.prob(&[d, 0, 0]) + j.prob(&[d, 1, 0]));
    Ok(DeckStats::new(joint, king, black))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeckStatsReport {
    pub joint: String,
    pub product: String,
    pub joint_value: f64,
    pub product_value: f64,
    pub factorizes: bool,
}

impl From<&DeckStats> for DeckStatsReport {
    fn from(s: &DeckStats) -> Self {
        DeckStatsReport {
            joint: s.joint.to_string(),
            product: s.product.to_string(),
            joint_value: exact_to_f64(&s.joint),
            product_value: exact_to_f64(&s.product),
            factorizes: s.factorizes,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inequalities::bayes::bayes_chain_check;

    #[test]
    fn first_deck_does_not_factorize() {
        let s = card_deck_stats(&CardDeckModel::two_decks(), 0).unwrap();
        assert_eq!(s.joint, ratio(3, 20));
        assert_eq!(s.product, ratio(1, 4));
        assert!(!s.factorizes);
    }

    #[test]
    fn second_deck_and_even_mix() {
        assert_eq!(card_deck_stats(&CardDeckModel::two_decks(), 1).unwrap().joint, ratio(7, 20));
        let even = CardDeckModel { kr_qb: vec![ratio(1, 2)], prior: vec![ratio(1, 1)] };
        let s = card_deck_stats(&even, 0).unwrap();
        assert_eq!(s.joint, ratio(1, 4));
        assert!(s.factorizes);
    }

    #[test]
    fn marginalizing_the_deck_restores_factorization() {
        let s = card_deck_unconditional(&CardDeckModel::two_decks()).unwrap();
        assert_eq!(s.joint, ratio(1, 4));
        assert!(s.factorizes);
    }

    #[test]
    fn chain_rule_holds_on_deck_joint() {
        let j = CardDeckModel::two_decks().joint().unwrap();
        assert_eq!(j.total(), ratio(1, 1));
        assert!(bayes_chain_check(&j, Exact::zero()).holds);
    }

    #[test]
    fn invalid_models_are_rejected() {
        let bad = CardDeckModel { kr_qb: vec![ratio(3, 2)], prior: vec![ratio(1, 1)] };
        assert!(bad.joint().is_err());
        let unnorm = CardDeckModel { kr_qb: vec![ratio(1, 2)], prior: vec![ratio(1, 2)] };
        assert!(unnorm.validate().is_err());
    }
}
