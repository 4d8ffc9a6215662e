//! Monte Carlo estimation of a model's law, parallel over fixed chunks and reduced in order.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::law::{LawEstimate, SettingsPair};
use crate::models::Model;
use crate::rng::substream;

const CHUNK: u64 = 4096;

/// Folds `trial(k)` for `k in 0..n` into per-chunk accumulators and merges them in chunk order,
/// so the result does not depend on the thread count.
pub(crate) fn fold_trials<A, F, M>(n: u64, init: impl Fn() -> A + Sync, trial: F, merge: M) -> Result<A>
where
    A: Send,
    F: Fn(&mut A, u64) -> Result<()> + Sync,
    M: Fn(&mut A, A),
{
    if n == 0 {
        return Err(Error::InvalidConfig("n_trials must be at least 1".into()));
    }
    let parts: Vec<A> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|ci| {
            let mut acc = init();
            for k in ci * CHUNK..((ci + 1) * CHUNK).min(n) {
                trial(&mut acc, k)?;
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut total = init();
    for p in parts {
        merge(&mut total, p);
    }
    Ok(total)
}

/// Outcome counts of `n` independent trials at fixed settings; trial `k` uses substream `k`.
pub fn simulate_law(model: &Model<f64>, s: &SettingsPair<f64>, n: u64, seed: u64) -> Result<LawEstimate> {
    fold_trials(
        n,
        LawEstimate::new,
        |acc, k| {
            let (_, o) = model.trial(s, &mut substream(seed, k))?;
            acc.record(o);
            Ok(())
        },
        |acc, part| acc.merge(&part),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::laws::singlet_law;
    use crate::models::ModelId;

    #[test]
    fn dilorenzo_estimate_close_to_singlet() {
        let s = SettingsPair::planar_degrees(0.0, 70.0);
        let m = Model::from_id(ModelId::DiLorenzo, 1.0).unwrap();
        let est = simulate_law(&m, &s, 200_000, 1).unwrap();
        assert_eq!(est.n(), 200_000);
        assert!(est.max_abs_dev(&singlet_law(&s)).unwrap() < 0.005);
    }

    #[test]
    fn chunking_is_invisible() {
        let s = SettingsPair::planar_degrees(10.0, 40.0);
        let m = Model::from_id(ModelId::Hall, 1.0).unwrap();
        let whole = simulate_law(&m, &s, 10_000, 9).unwrap();
        let mut serial = LawEstimate::new();
        for k in 0..10_000 {
            serial.record(m.trial(&s, &mut substream(9, k)).unwrap().1);
        }
        assert_eq!(whole, serial);
    }

    #[test]
    fn zero_trials_rejected() {
        let m = Model::from_id(ModelId::Hall, 1.0).unwrap();
        assert!(simulate_law(&m, &SettingsPair::planar_degrees(0.0, 1.0), 0, 1).is_err());
    }
}
