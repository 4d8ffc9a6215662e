//! Telling action at a distance apart from settings dictated by lambda, by trying to send a message.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::Outcome;
use crate::law::SettingsPair;
use crate::models::dilorenzo::{dilorenzo_sample, malus_draw};
use crate::models::HiddenSample;
use crate::protocols::{coin_outcome, CausalMode, RunConfig, TrialStreams, TrialTranscript};
use crate::stats::empirical_bit_entropy;
use crate::{Settings, UnitVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SignalingMode {
    /// A's switch re-forces the partner spin, so B reads the intended bit.
    ActionAtADistance,
    /// The switch target is itself a fresh lambda draw that A does not control.
    SlaveWill,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SignalingReport {
    pub mode: SignalingMode,
    pub n_trials: u64,
    pub n_usable: u64,
    pub usable_fraction: f64,
    /// Bits B decoded, one per usable trial, in order.
    pub received: Vec<bool>,
    pub usable_mask: Vec<bool>,
    pub empirical_entropy: f64,
    pub success_rate: f64,
    pub bits_a_to_b: u64,
}

/// B decodes `tau = +1` as bit 1.
fn encode(bit: bool) -> Outcome {
    if bit {
        Outcome::Plus
    } else {
        Outcome::Minus
    }
}

/// Runs trials until every message bit has been sent on a usable trial.
/// A trial is usable when the spin lies along `±a`.
pub fn run_signaling_experiment(
    message: &[bool],
    mode: SignalingMode,
    settings: Settings,
    seed: u64,
) -> Result<(SignalingReport, Vec<TrialTranscript>)> {
    if settings.overlap().abs() > 1e-9 {
        return Err(Error::InvalidConfig(format!("signaling needs orthogonal settings, a.b = {}", settings.overlap())));
    }
    if message.is_empty() {
        return Err(Error::InvalidConfig("empty message".into()));
    }
    let cfg = RunConfig::new(1, seed);
    let mut received = Vec::with_capacity(message.len());
    let mut mask = Vec::new();
    let mut transcripts = Vec::new();
    let mut bits = 0u64;
    let mut k = 0u64;
    while received.len() < message.len() {
        let mut st = TrialStreams::new(cfg.seed, k);
        let lambda = dilorenzo_sample(&settings, &mut st.entangler);
        let HiddenSample::DiLorenzo { u, c, .. } = lambda else { unreachable!() };
        let usable = !c;
        mask.push(usable);
        let (b_used, spin_b, bit_sent, causal_mode) = if usable {
            let intended = message[received.len()];
            // Spin `+b` at A leaves `-b` at B, which reads tau = -1, i.e. bit 0.
            let target: UnitVector = match mode {
                SignalingMode::ActionAtADistance => settings.b.signed(-encode(intended)),
                SignalingMode::SlaveWill => settings.b.signed(coin_outcome(&mut st.entangler)),
            };
            let mode_tag = match mode {
                SignalingMode::ActionAtADistance => CausalMode::ActionAtADistance,
                SignalingMode::SlaveWill => CausalMode::LambdaCausesSettings,
            };
            (settings.b, -target, matches!(mode, SignalingMode::ActionAtADistance) as u32, mode_tag)
        } else {
            (settings.b, -u, 0, CausalMode::SettingsCauseLambda)
        };
        let sigma = malus_draw(&u, &settings.a, &mut st.station_a);
        let tau = malus_draw(&spin_b, &b_used, &mut st.station_b);
        if usable {
            received.push(tau == Outcome::Plus);
        }
        bits += bit_sent as u64;
        transcripts.push(TrialTranscript {
            trial_index: k,
            lambda,
            settings_requested: settings,
            settings_used: SettingsPair::new(settings.a, b_used),
            sigma: Some(sigma),
            tau: Some(tau),
            bits_a_to_b: bit_sent,
            bits_b_to_a: 0,
            shared_draws: 0,
            causal_mode,
        });
        k += 1;
    }
    let hits = received.iter().zip(message).filter(|(r, m)| r == m).count();
    let n_usable = received.len() as u64;
    Ok((
        SignalingReport {
            mode,
            n_trials: k,
            n_usable,
            usable_fraction: n_usable as f64 / k as f64,
            empirical_entropy: empirical_bit_entropy(&received),
            success_rate: hits as f64 / n_usable as f64,
            received,
            usable_mask: mask,
            bits_a_to_b: bits,
        },
        transcripts,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn orthogonal() -> Settings {
        Settings::planar_degrees(0.0, 90.0)
    }

    #[test]
    fn action_sends_all_zeros_exactly() {
        let msg = vec![false; 10_000];
        let (rep, _) = run_signaling_experiment(&msg, SignalingMode::ActionAtADistance, orthogonal(), 1).unwrap();
        assert!(rep.received.iter().all(|b| !b));
        assert_eq!(rep.empirical_entropy, 0.0);
        assert_eq!(rep.success_rate, 1.0);
        assert_eq!(rep.bits_a_to_b, 10_000);
        assert!((rep.usable_fraction - 0.5).abs() < 0.01);
    }

    #[test]
    fn action_sends_mixed_message() {
        let msg: Vec<bool> = (0..1000).map(|i| (i * 7 + i / 3) % 5 < 2).collect();
        let (rep, _) = run_signaling_experiment(&msg, SignalingMode::ActionAtADistance, orthogonal(), 2).unwrap();
        assert_eq!(rep.received, msg);
    }

    #[test]
    fn slave_will_output_is_random() {
        let msg = vec![true; 10_000];
        let (rep, tr) = run_signaling_experiment(&msg, SignalingMode::SlaveWill, orthogonal(), 3).unwrap();
        assert!(rep.empirical_entropy >= 0.99, "{}", rep.empirical_entropy);
        assert!((rep.success_rate - 0.5).abs() <= 0.02);
        assert_eq!(rep.bits_a_to_b, 0);
        assert!(tr.iter().all(|t| t.is_consistent()));
    }

    #[test]
    fn usable_mask_counts_usable_trials() {
        let (rep, tr) = run_signaling_experiment(&[true; 50], SignalingMode::SlaveWill, orthogonal(), 4).unwrap();
        assert_eq!(rep.usable_mask.iter().filter(|m| **m).count(), 50);
        assert_eq!(rep.usable_mask.len(), tr.len());
        assert!(*rep.usable_mask.last().unwrap());
    }

    #[test]
    fn non_orthogonal_settings_rejected() {
        assert!(run_signaling_experiment(&[true], SignalingMode::SlaveWill, Settings::planar_degrees(0.0, 45.0), 1)
            .is_err());
    }
}
