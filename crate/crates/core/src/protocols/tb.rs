//! The one-bit protocol and its communication-free reading where the bit is part of lambda.

use crate::error::{Error, Result};
use crate::geometry::{sample_uniform_sphere, Outcome};
use crate::law::SettingsPair;
use crate::models::laws::singlet_law;
use crate::models::toner_bacon::{tb_bit, tb_receiver};
use crate::models::HiddenSample;
use crate::protocols::{
    corrupt, run_trials, CausalMode, Fault, ProtocolRun, RunConfig, SettingsPolicy, TrialStreams, TrialTranscript,
};
use crate::rng::RandomStream;
use crate::UnitVector;

/// Station A: outcome and the bit it transmits.
fn station_a(u: &UnitVector, v: &UnitVector, a: &UnitVector) -> (Outcome, Outcome) {
    (Outcome::of(u.dot(a)), tb_bit(u, v, a))
}

/// Station B: needs the bit from A.
fn station_b(u: &UnitVector, v: &UnitVector, b: &UnitVector, bit: Outcome) -> Outcome {
    tb_receiver(u, v, bit, b)
}

/// The entangler sends uniform `(u, v)` to both stations; A sends one bit to B per trial.
pub fn run_tb_protocol(cfg: &RunConfig, policy: &SettingsPolicy) -> Result<ProtocolRun> {
    policy.validate()?;
    run_trials(
        cfg,
        |k, channels| {
            let mut st = TrialStreams::new(cfg.seed, k);
            let u = sample_uniform_sphere(&mut st.entangler);
            let v = sample_uniform_sphere(&mut st.entangler);
            let a = policy.choose_a(k, &mut st.station_a);
            let b = policy.choose_b(k, &mut st.station_b);
            let (a_u, a_v) = match cfg.fault {
                Fault::None => (u, v),
                Fault::CorruptStationA => (corrupt(u, &st.station_a).0, v),
            };
            let (sigma, bit) = station_a(&a_u, &a_v, &a);
            channels.a_to_b.send(k, 1);
            let tau = station_b(&u, &v, &b, bit);
            let s = SettingsPair::new(a, b);
            Ok(TrialTranscript {
                trial_index: k,
                lambda: HiddenSample::TonerBacon { u, v },
                settings_requested: s,
                settings_used: s,
                sigma: Some(sigma),
                tau: Some(tau),
                bits_a_to_b: 1,
                bits_b_to_a: 0,
                shared_draws: 0,
                causal_mode: CausalMode::SettingsCauseLambda,
            })
        },
        singlet_law,
    )
}

/// A's forced choice: keep the requested candidate when it agrees with `c`, otherwise pick
/// uniformly among the candidates that do.
fn forced_setting(
    u: &UnitVector,
    v: &UnitVector,
    c: Outcome,
    candidates: &[UnitVector],
    requested: UnitVector,
    own: &mut RandomStream,
) -> Option<UnitVector> {
    if tb_bit(u, v, &requested) == c {
        return Some(requested);
    }
    let ok: Vec<&UnitVector> = candidates.iter().filter(|a| tb_bit(u, v, a) == c).collect();
    if ok.is_empty() {
        return None;
    }
    Some(*ok[own.index(ok.len())])
}

/// No communication: the entangler fixes `c` from a candidate setting it draws itself, and A's
/// setting is then constrained to agree with `c`. B chooses freely.
pub fn run_tb_freewill(cfg: &RunConfig, a_candidates: &[UnitVector], b_policy: &SettingsPolicy) -> Result<ProtocolRun> {
    if a_candidates.is_empty() {
        return Err(Error::InvalidConfig("station A needs at least one candidate setting".into()));
    }
    b_policy.validate()?;
    run_trials(
        cfg,
        |k, _channels| {
            let mut st = TrialStreams::new(cfg.seed, k);
            let u = sample_uniform_sphere(&mut st.entangler);
            let v = sample_uniform_sphere(&mut st.entangler);
            let pick = a_candidates[st.entangler.index(a_candidates.len())];
            let c = tb_bit(&u, &v, &pick);

            let (a_u, mut a_own) = match cfg.fault {
                Fault::None => (u, st.station_a.clone()),
                Fault::CorruptStationA => corrupt(u, &st.station_a),
            };
            let requested_a = a_candidates[a_own.index(a_candidates.len())];
            let a = match forced_setting(&a_u, &v, c, a_candidates, requested_a, &mut a_own) {
                Some(a) => a,
                // Only reachable with a corrupted view of lambda.
                None => requested_a,
            };
            let sigma = Outcome::of(a_u.dot(&a));

            let b = b_policy.choose_b(k, &mut st.station_b);
            let tau = tb_receiver(&u, &v, c, &b);
            Ok(TrialTranscript {
                trial_index: k,
                lambda: HiddenSample::TbFreeWill { u, v, c },
                settings_requested: SettingsPair::new(requested_a, b),
                settings_used: SettingsPair::new(a, b),
                sigma: Some(sigma),
                tau: Some(tau),
                bits_a_to_b: 0,
                bits_b_to_a: 0,
                shared_draws: 0,
                causal_mode: CausalMode::LambdaCausesSettings,
            })
        },
        singlet_law,
    )
}

/// Candidate settings on a planar sweep of `n` directions in `[0, pi)`.
pub fn planar_candidates(n: usize) -> Vec<UnitVector> {
    (0..n).map(|k| UnitVector::planar_degrees(180.0 * k as f64 / n as f64)).collect()
}
