//! Di Lorenzo's model run by stations that share a pseudo-random generator instead of a channel.

use crate::error::Result;
use crate::geometry::{sample_uniform_sphere, Outcome};
use crate::law::SettingsPair;
use crate::models::dilorenzo::malus_draw;
use crate::models::laws::singlet_law;
use crate::models::HiddenSample;
use crate::protocols::{
    coin_outcome, corrupt, run_trials, tags, CausalMode, Fault, ProtocolRun, RunConfig, SettingsPolicy, TrialStreams,
    TrialTranscript,
};
use crate::rng::{substream, RandomStream};
use crate::UnitVector;

/// The two draws both stations make from their identical generators.
struct SharedCoins {
    /// `false`: A is tied to the spin; `true`: B is.
    c: bool,
    d: Outcome,
}

impl SharedCoins {
    const DRAWS: u32 = 2;

    fn draw(shared: &mut RandomStream) -> Self {
        let c = shared.coin();
        let d = coin_outcome(shared);
        SharedCoins { c, d }
    }
}

/// Station A: its setting is `d u` when tied, its own request otherwise. Returns `(a_used, sigma)`.
fn station_a(
    u: &UnitVector,
    requested: UnitVector,
    shared: &mut RandomStream,
    own: &mut RandomStream,
) -> (UnitVector, Outcome) {
    let coins = SharedCoins::draw(shared);
    let a = if coins.c { requested } else { u.signed(coins.d) };
    (a, malus_draw(u, &a, own))
}

/// Station B sees the partner spin `v = -u`; when tied it uses `d v`.
fn station_b(
    v: &UnitVector,
    requested: UnitVector,
    shared: &mut RandomStream,
    own: &mut RandomStream,
) -> (UnitVector, Outcome) {
    let coins = SharedCoins::draw(shared);
    let b = if coins.c { v.signed(coins.d) } else { requested };
    (b, malus_draw(v, &b, own))
}

/// The entangler sends a uniform spin `u` (and `-u`); `c` and `d` come from a generator both
/// stations hold a copy of. Zero bits pass between the stations.
pub fn run_dilorenzo_shared_coin(cfg: &RunConfig, policy: &SettingsPolicy) -> Result<ProtocolRun> {
    policy.validate()?;
    run_trials(
        cfg,
        |k, channels| {
            let mut st = TrialStreams::new(cfg.seed, k);
            let shared = substream(cfg.seed, k).fork(tags::SHARED_AB);
            let u = sample_uniform_sphere(&mut st.entangler);
            let req_a = policy.choose_a(k, &mut st.station_a);
            let req_b = policy.choose_b(k, &mut st.station_b);

            let (a_u, mut a_own) = match cfg.fault {
                Fault::None => (u, st.station_a.clone()),
                Fault::CorruptStationA => corrupt(u, &st.station_a),
            };
            let (a, sigma) = station_a(&a_u, req_a, &mut shared.clone(), &mut a_own);
            let (b, tau) = station_b(&-u, req_b, &mut shared.clone(), &mut st.station_b);
            channels.shared_draws += SharedCoins::DRAWS as u64;

            let coins = SharedCoins::draw(&mut shared.clone());
            Ok(TrialTranscript {
                trial_index: k,
                lambda: HiddenSample::DiLorenzo { u, c: coins.c, d: coins.d },
                settings_requested: SettingsPair::new(req_a, req_b),
                settings_used: SettingsPair::new(a, b),
                sigma: Some(sigma),
                tau: Some(tau),
                bits_a_to_b: 0,
                bits_b_to_a: 0,
                shared_draws: SharedCoins::DRAWS,
                causal_mode: CausalMode::LambdaCausesSettings,
            })
        },
        singlet_law,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Settings;

    #[test]
    fn no_bits_and_two_shared_draws_per_trial() {
        let run = run_dilorenzo_shared_coin(&RunConfig::new(10_000, 3).with_transcripts(), &SettingsPolicy::FreeSphere)
            .unwrap();
        assert_eq!(run.channels.station_bits(), 0);
        assert_eq!(run.channels.shared_draws, 20_000);
        assert!(run.transcripts.iter().all(|t| t.is_consistent() && t.shared_draws == 2));
    }

    #[test]
    fn tied_station_follows_the_spin() {
        let run = run_dilorenzo_shared_coin(&RunConfig::new(2000, 4).with_transcripts(), &SettingsPolicy::FreeSphere)
            .unwrap();
        let mut seen = false;
        for t in &run.transcripts {
            let HiddenSample::DiLorenzo { u, c, d } = t.lambda else { panic!() };
            if !c {
                assert_eq!(t.settings_used.a, u.signed(d));
                assert_eq!(t.sigma, Some(d));
                seen |= d == Outcome::Plus;
                assert_eq!(t.settings_used.b, t.settings_requested.b);
            } else {
                assert_eq!(t.settings_used.b, (-u).signed(d));
                assert_eq!(t.settings_used.a, t.settings_requested.a);
            }
        }
        assert!(seen);
    }

    #[test]
    fn reproduces_singlet_at_used_settings() {
        let run = run_dilorenzo_shared_coin(&RunConfig::new(1_000_000, 5), &SettingsPolicy::FreeSphere).unwrap();
        assert!(run.residual.max_abs_dev() < 0.005, "{:?}", run.residual.mean());
        assert!(run.deviations > 0);
    }

    #[test]
    fn b_ignores_corrupted_a() {
        let cfg = RunConfig::new(3000, 6).with_transcripts();
        let policy = SettingsPolicy::Fixed(Settings::planar_degrees(0.0, 50.0));
        let clean = run_dilorenzo_shared_coin(&cfg, &policy).unwrap();
        let bad = run_dilorenzo_shared_coin(&cfg.clone().with_fault(Fault::CorruptStationA), &policy).unwrap();
        assert!(clean.transcripts.iter().zip(&bad.transcripts).all(|(x, y)| x.tau == y.tau));
        assert!(clean.transcripts.iter().zip(&bad.transcripts).any(|(x, y)| x.sigma != y.sigma));
    }
}
