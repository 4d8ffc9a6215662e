//! Declared-settings audit: compare the settings actually used against a list fixed before lambda.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::sample_uniform_sphere;
use crate::models::dilorenzo::{dilorenzo_outcomes, dilorenzo_sample};
use crate::models::laws::singlet_law;
use crate::protocols::shared_coin::run_dilorenzo_shared_coin;
use crate::protocols::{run_trials, CausalMode, ProtocolRun, RunConfig, SettingsPolicy, TrialStreams, TrialTranscript};
use crate::Settings;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AuditMode {
    /// The source reads the declared settings and prepares lambda for them.
    SettingsCauseLambda,
    /// Lambda forces one station's setting (the shared-coin protocol).
    LambdaCausesSettings,
    /// The declared list is known only to a referee; the source prepares lambda for settings it guesses.
    RefereeSwitch,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditReport {
    pub mode: AuditMode,
    pub n_trials: u64,
    pub deviations: u64,
    /// Deviating settings that lie along the spin axis.
    pub deviations_along_spin: u64,
    /// Largest entry of the mean residual against the singlet law at the settings used.
    pub max_residual: f64,
    pub residual_std_error: f64,
}

impl AuditReport {
    /// Deviations are only expected when lambda drives the settings.
    pub fn deviations_as_expected(&self) -> bool {
        match self.mode {
            AuditMode::LambdaCausesSettings => self.deviations > 0 && self.deviations_along_spin == self.deviations,
            _ => self.deviations == 0,
        }
    }
}

fn along_spin(t: &TrialTranscript) -> bool {
    let u = t.lambda.u();
    let on_axis = |x: &crate::UnitVector| 1.0 - x.dot(&u).abs() <= 1e-12;
    (t.settings_used.a == t.settings_requested.a || on_axis(&t.settings_used.a))
        && (t.settings_used.b == t.settings_requested.b || on_axis(&t.settings_used.b))
}

pub fn run_conspiracy_audit(cfg: &RunConfig, declared: &[Settings], mode: AuditMode) -> Result<AuditReport> {
    if declared.is_empty() {
        return Err(Error::InvalidConfig("the declared settings list is empty".into()));
    }
    let pick = |k: u64| declared[(k % declared.len() as u64) as usize];
    // Transcripts are needed to check where deviations point.
    let cfg = cfg.clone().with_transcripts();
    let run: ProtocolRun = match mode {
        AuditMode::LambdaCausesSettings => run_dilorenzo_shared_coin(&cfg, &SettingsPolicy::Cycle(declared.to_vec()))?,
        AuditMode::SettingsCauseLambda | AuditMode::RefereeSwitch => run_trials(
            &cfg,
            |k, _channels| {
                let mut st = TrialStreams::new(cfg.seed, k);
                let s = pick(k);
                let prepared_for = if mode == AuditMode::RefereeSwitch {
                    Settings::new(sample_uniform_sphere(&mut st.entangler), sample_uniform_sphere(&mut st.entangler))
                } else {
                    s
                };
                let lambda = dilorenzo_sample(&prepared_for, &mut st.entangler);
                let o = dilorenzo_outcomes(&lambda.u(), &s, &mut st.station_a);
                Ok(TrialTranscript {
                    trial_index: k,
                    lambda,
                    settings_requested: s,
                    settings_used: s,
                    sigma: Some(o.sigma),
                    tau: Some(o.tau),
                    bits_a_to_b: 0,
                    bits_b_to_a: 0,
                    shared_draws: 0,
                    causal_mode: CausalMode::SettingsCauseLambda,
                })
            },
            singlet_law,
        )?,
    };
    let deviating: Vec<&TrialTranscript> = run.transcripts.iter().filter(|t| t.settings_deviate()).collect();
    Ok(AuditReport {
        mode,
        n_trials: run.n_trials,
        deviations: deviating.len() as u64,
        deviations_along_spin: deviating.iter().filter(|t| along_spin(t)).count() as u64,
        max_residual: run.residual.max_abs_dev(),
        residual_std_error: run.residual.std_error(),
    })
}
