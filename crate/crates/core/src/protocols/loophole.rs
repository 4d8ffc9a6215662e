//! Detection loophole: a particle tied to the spin fires only when its station's setting matches `±u`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{sample_uniform_sphere, Outcome};
use crate::law::SettingsPair;
use crate::models::dilorenzo::malus_draw;
use crate::models::laws::singlet_law;
use crate::models::HiddenSample;
use crate::protocols::{corrupt, run_trials, CausalMode, Fault, ProtocolRun, RunConfig, TrialStreams, TrialTranscript};
use crate::rng::RandomStream;
use crate::{Law, UnitVector};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum LoopholeMode {
    /// `n_directions` settings per side; `c_A` is a fair coin choosing the tied side.
    Symmetric { n_directions: usize },
    /// Only B is ever tied.
    Asymmetric { n_directions: usize },
    /// Settings free on the sphere; B fires when its setting lies within solid angle `delta_omega` of `±u`.
    Sphere { delta_omega: f64 },
}

impl LoopholeMode {
    fn validate(&self) -> Result<()> {
        match *self {
            LoopholeMode::Symmetric { n_directions } | LoopholeMode::Asymmetric { n_directions }
                if n_directions == 0 =>
            {
                Err(Error::InvalidConfig("n_directions must be at least 1".into()))
            }
            LoopholeMode::Sphere { delta_omega }
                if !(delta_omega > 0.0 && delta_omega <= 2.0 * std::f64::consts::PI) =>
            {
                Err(Error::InvalidConfig(format!("delta_omega must lie in (0, 2pi], got {delta_omega}")))
            }
            _ => Ok(()),
        }
    }

    /// Efficiency the construction is designed to reach.
    pub fn expected_efficiency(&self) -> f64 {
        match *self {
            LoopholeMode::Symmetric { n_directions } => 0.5 / n_directions as f64,
            LoopholeMode::Asymmetric { n_directions } => 1.0 / n_directions as f64,
            LoopholeMode::Sphere { delta_omega } => delta_omega / (2.0 * std::f64::consts::PI),
        }
    }
}

/// Planar setting lists: A at `k 180/n` degrees, B offset by half a step.
pub fn loophole_settings(n: usize) -> (Vec<UnitVector>, Vec<UnitVector>) {
    let step = 180.0 / n as f64;
    let a = (0..n).map(|k| UnitVector::planar_degrees(step * k as f64)).collect();
    let b = (0..n).map(|k| UnitVector::planar_degrees(step * (k as f64 + 0.5))).collect();
    (a, b)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EfficiencyReport {
    pub n_pairs: u64,
    pub n_coincidences: u64,
    pub efficiency: f64,
    pub efficiency_std_error: f64,
    pub expected_efficiency: f64,
    /// Pooled coincidence law.
    pub conditional_law: Law,
    /// Largest entry of the mean residual against the singlet law at each trial's settings.
    pub max_residual: f64,
    pub residual_std_error: f64,
}

impl EfficiencyReport {
    fn from_run(run: &ProtocolRun, mode: &LoopholeMode) -> Result<Self> {
        let eff = run.efficiency();
        Ok(EfficiencyReport {
            n_pairs: run.n_trials,
            n_coincidences: run.coincidences,
            efficiency: eff,
            efficiency_std_error: (eff * (1.0 - eff) / run.n_trials as f64).sqrt(),
            expected_efficiency: mode.expected_efficiency(),
            conditional_law: run.law.law()?,
            max_residual: run.residual.max_abs_dev(),
            residual_std_error: run.residual.std_error(),
        })
    }
}

fn same_axis(x: &UnitVector, u: &UnitVector) -> bool {
    1.0 - x.dot(u).abs() <= 1e-12
}

/// A particle's response: tied particles fire only on a matching axis.
fn detector(
    spin: &UnitVector,
    setting: &UnitVector,
    tied: bool,
    fires: impl Fn() -> bool,
    own: &mut RandomStream,
) -> Option<Outcome> {
    if tied && !fires() {
        return None;
    }
    Some(malus_draw(spin, setting, own))
}

pub fn run_detection_loophole(cfg: &RunConfig, mode: LoopholeMode) -> Result<(ProtocolRun, EfficiencyReport)> {
    mode.validate()?;
    let lists = match mode {
        LoopholeMode::Symmetric { n_directions } | LoopholeMode::Asymmetric { n_directions } => {
            Some(loophole_settings(n_directions))
        }
        LoopholeMode::Sphere { .. } => None,
    };
    let threshold = 1.0 - mode.expected_efficiency();
    let run = run_trials(
        cfg,
        |k, _channels| {
            let mut st = TrialStreams::new(cfg.seed, k);
            let (u, c_a, a, b) = match (&mode, &lists) {
                (LoopholeMode::Symmetric { .. }, Some((la, lb))) => {
                    let axes: Vec<&UnitVector> = la.iter().chain(lb).collect();
                    let axis = axes[st.entangler.index(axes.len())];
                    let u = if st.entangler.coin() { *axis } else { -*axis };
                    let c_a = st.entangler.coin();
                    (u, c_a, la[st.station_a.index(la.len())], lb[st.station_b.index(lb.len())])
                }
                (LoopholeMode::Asymmetric { .. }, Some((la, lb))) => {
                    let axis = lb[st.entangler.index(lb.len())];
                    let u = if st.entangler.coin() { axis } else { -axis };
                    (u, false, la[st.station_a.index(la.len())], lb[st.station_b.index(lb.len())])
                }
                _ => {
                    let u = sample_uniform_sphere(&mut st.entangler);
                    (u, false, sample_uniform_sphere(&mut st.station_a), sample_uniform_sphere(&mut st.station_b))
                }
            };
            let sphere = matches!(mode, LoopholeMode::Sphere { .. });
            let (a_u, mut a_own) = match cfg.fault {
                Fault::None => (u, st.station_a.clone()),
                Fault::CorruptStationA => corrupt(u, &st.station_a),
            };
            let sigma = detector(&a_u, &a, c_a, || same_axis(&a, &a_u), &mut a_own);
            let v = -u;
            let tau = if sphere {
                // Deterministic on the tied side: the spin is only known to lie near `±b`.
                (v.dot(&b).abs() >= threshold).then(|| Outcome::of(v.dot(&b)))
            } else {
                detector(&v, &b, !c_a, || same_axis(&b, &v), &mut st.station_b)
            };
            let s = SettingsPair::new(a, b);
            Ok(TrialTranscript {
                trial_index: k,
                lambda: HiddenSample::Loophole { u, c_a },
                settings_requested: s,
                settings_used: s,
                sigma,
                tau,
                bits_a_to_b: 0,
                bits_b_to_a: 0,
                shared_draws: 0,
                causal_mode: CausalMode::SettingsCauseLambda,
            })
        },
        singlet_law,
    )?;
    let report = EfficiencyReport::from_run(&run, &mode)?;
    Ok((run, report))
}
