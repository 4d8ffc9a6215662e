//! CHSH statistics estimated by simulating a model.

use serde::Serialize;

use crate::error::Result;
use crate::geometry::Outcome;
use crate::inequalities::correlator::{ChshReport, ChshSettings, CorrelatorEstimate};
use crate::law::LawEstimate;
use crate::models::simulate::fold_trials;
use crate::models::Model;
use crate::rng::substream;

const PAIR_TAG: u64 = 0x100;

/// Each settings pair gets its own `n_per_pair` trials, with lambda drawn at that pair.
pub fn chsh_monte_carlo(model: &Model<f64>, settings: ChshSettings, n_per_pair: u64, seed: u64) -> Result<ChshReport> {
    let pairs = settings.pairs();
    let counts = fold_trials(
        n_per_pair,
        || [LawEstimate::new(), LawEstimate::new(), LawEstimate::new(), LawEstimate::new()],
        |acc, k| {
            let base = substream(seed, k);
            for (i, s) in pairs.iter().enumerate() {
                let (_, o) = model.trial(s, &mut base.fork(PAIR_TAG + i as u64))?;
                acc[i].record(o);
            }
            Ok(())
        },
        |acc, part| acc.iter_mut().zip(&part).for_each(|(x, y)| x.merge(y)),
    )?;
    let mut c = [CorrelatorEstimate::exact(0.0); 4];
    for (slot, est) in c.iter_mut().zip(&counts) {
        *slot = CorrelatorEstimate::from_counts(est)?;
    }
    Ok(ChshReport::new(settings, c))
}

/// Correlators and marginals `[m_a, m_a', m_b, m_b']` with one lambda per trial shared by all four pairs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SharedLambdaStats {
    pub correlators: [CorrelatorEstimate; 4],
    pub marginals: [CorrelatorEstimate; 4],
}

#[derive(Clone, Default)]
struct Sums {
    products: [LawEstimate; 4],
    /// Outcome counts per marginal, recorded as `(outcome, +)`.
    singles: [LawEstimate; 4],
}

/// Draws lambda once per trial at the first settings pair and evaluates every pair on it.
/// A model whose outcomes need no communication then yields statistics of one joint distribution
/// of the four outcomes; one that does (Toner-Bacon) need not.
pub fn shared_lambda_statistics(
    model: &Model<f64>,
    settings: ChshSettings,
    n: u64,
    seed: u64,
) -> Result<SharedLambdaStats> {
    let pairs = settings.pairs();
    // Which pair supplies each marginal, and whether it is the A side.
    const MARGINAL_SOURCE: [(usize, bool); 4] = [(0, true), (1, true), (0, false), (2, false)];
    let sums = fold_trials(
        n,
        Sums::default,
        |acc, k| {
            let base = substream(seed, k);
            let lambda = model.sample_lambda(&pairs[0], &mut base.fork(PAIR_TAG - 1))?;
            let mut outs = Vec::with_capacity(4);
            for (i, s) in pairs.iter().enumerate() {
                let o = model.outcomes(&lambda, s, &mut base.fork(PAIR_TAG + i as u64))?;
                acc.products[i].record(o);
                outs.push(o);
            }
            for (slot, (pair, is_a)) in MARGINAL_SOURCE.iter().enumerate() {
                let x = if *is_a { outs[*pair].sigma } else { outs[*pair].tau };
                acc.singles[slot].record(crate::law::OutcomePair::new(x, Outcome::Plus));
            }
            Ok(())
        },
        |acc, part| {
            acc.products.iter_mut().zip(&part.products).for_each(|(x, y)| x.merge(y));
            acc.singles.iter_mut().zip(&part.singles).for_each(|(x, y)| x.merge(y));
        },
    )?;
    let mut correlators = [CorrelatorEstimate::exact(0.0); 4];
    let mut marginals = [CorrelatorEstimate::exact(0.0); 4];
    for i in 0..4 {
        correlators[i] = CorrelatorEstimate::from_counts(&sums.products[i])?;
        marginals[i] = CorrelatorEstimate::from_counts(&sums.singles[i])?;
    }
    Ok(SharedLambdaStats { correlators, marginals })
}
