//! Settings and spins read off deterministic two-handed watches.
//!
//! Time is counted in quanta of `2^-32` units and a hand's phase is a 64-bit fraction of a turn,
//! so advancing a watch is a wrapping multiply and every party computes bit-identical phases.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::Outcome;
use crate::law::{ResidualEstimate, SettingsPair};
use crate::models::dilorenzo::malus_draw;
use crate::models::hall::{hall_accept, verify_hall_envelope};
use crate::models::laws::singlet_law;
use crate::models::simulate::fold_trials;
use crate::models::HiddenSample;
use crate::protocols::{
    coin_outcome, corrupt, run_trials, CausalMode, Fault, ProtocolRun, RunConfig, TrialStreams, TrialTranscript,
};
use crate::UnitVector;

pub const QUANTA_PER_UNIT: u64 = 1 << 32;
const TWO_POW_64: f64 = 18_446_744_073_709_551_616.0;

/// Time between emissions, `pi/10` units.
pub fn emission_step() -> u64 {
    (std::f64::consts::PI / 10.0 * QUANTA_PER_UNIT as f64).round() as u64
}

/// Spacing of successive proposal readings on the proposal watch, `e` units.
fn proposal_step() -> u64 {
    (std::f64::consts::E * QUANTA_PER_UNIT as f64).round() as u64
}

pub fn time_to_quanta(t: f64) -> u64 {
    (t * QUANTA_PER_UNIT as f64).round() as u64
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Watch {
    pub period_small: f64,
    pub period_large: f64,
    /// Phase advance per quantum, in `2^-64` turns.
    rate_small: u64,
    rate_large: u64,
}

impl Watch {
    pub fn new(period_small: f64, period_large: f64) -> Result<Self> {
        for p in [period_small, period_large] {
            if !(p.is_finite() && p >= 1.0) {
                return Err(Error::InvalidConfig(format!("watch period must be finite and at least 1, got {p}")));
            }
        }
        let rate = |p: f64| (QUANTA_PER_UNIT as f64 / p).round() as u64;
        Ok(Watch { period_small, period_large, rate_small: rate(period_small), rate_large: rate(period_large) })
    }

    pub fn station_a() -> Self {
        Watch::new(1.0, 2f64.sqrt()).expect("valid periods")
    }

    pub fn station_b() -> Self {
        Watch::new(3f64.sqrt(), 5f64.sqrt()).expect("valid periods")
    }

    pub fn proposal() -> Self {
        Watch::new(7f64.sqrt(), 11f64.sqrt()).expect("valid periods")
    }

    /// Hand phases at time `t` (quanta), as fractions of a turn scaled by `2^64`.
    #[inline]
    pub fn hands(&self, t: u64) -> (u64, u64) {
        (t.wrapping_mul(self.rate_small), t.wrapping_mul(self.rate_large))
    }
}

/// Area-preserving map from hand phases in `[0, 1]` to the sphere: `cos theta = 2 p_s - 1`, `phi = 2 pi p_l`.
pub fn watch_vector_from_phases(p_small: f64, p_large: f64) -> UnitVector {
    UnitVector::from_spherical(2.0 * p_small - 1.0, std::f64::consts::TAU * p_large)
}

fn vector_of_hands((s, l): (u64, u64)) -> UnitVector {
    watch_vector_from_phases(s as f64 / TWO_POW_64, l as f64 / TWO_POW_64)
}

pub fn watch_vector(t: u64, w: &Watch) -> UnitVector {
    vector_of_hands(w.hands(t))
}

/// A station's copy of a watch: it sees a particle at its arrival time and removes the flight time.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct WatchSetup {
    pub flight_quanta: u64,
    /// Clock offsets of the station copies; nonzero values desynchronize them.
    pub skew_a: u64,
    pub skew_b: u64,
}

impl Default for WatchSetup {
    fn default() -> Self {
        WatchSetup { flight_quanta: QUANTA_PER_UNIT, skew_a: 0, skew_b: 0 }
    }
}

fn reconstruct(w: &Watch, local_arrival: u64, flight: u64) -> (u64, u64) {
    let (s1, l1) = w.hands(local_arrival);
    let (s0, l0) = w.hands(flight);
    (s1.wrapping_sub(s0), l1.wrapping_sub(l0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WatchMode {
    DiLorenzo,
    Hall,
}

/// Everything a trial needs besides its index.
struct WatchRig {
    mode: WatchMode,
    setup: WatchSetup,
    wa: Watch,
    wb: Watch,
    w0: Watch,
    step: u64,
    pstep: u64,
}

impl WatchRig {
    fn new(mode: WatchMode, setup: WatchSetup) -> Result<Self> {
        if mode == WatchMode::Hall {
            verify_hall_envelope()?;
        }
        Ok(WatchRig {
            mode,
            setup,
            wa: Watch::station_a(),
            wb: Watch::station_b(),
            w0: Watch::proposal(),
            step: emission_step(),
            pstep: proposal_step(),
        })
    }

    fn trial(&self, cfg: &RunConfig, k: u64) -> Result<TrialTranscript> {
        let (wa, wb, setup) = (&self.wa, &self.wb, &self.setup);
        let mut st = TrialStreams::new(cfg.seed, k);
        let t = k.wrapping_mul(self.step);
        let arrival = t.wrapping_add(setup.flight_quanta);

        let hands_a = reconstruct(wa, arrival.wrapping_add(setup.skew_a), setup.flight_quanta);
        let hands_b = reconstruct(wb, arrival.wrapping_add(setup.skew_b), setup.flight_quanta);
        for (name, mine, theirs) in [("A", hands_a, wa.hands(t)), ("B", hands_b, wb.hands(t))] {
            if mine != theirs {
                return Err(Error::WatchDesync {
                    trial: k,
                    detail: format!("station {name} reads hands {mine:?}, entangler reads {theirs:?}"),
                });
            }
        }
        let s = SettingsPair::new(vector_of_hands(wa.hands(t)), vector_of_hands(wb.hands(t)));
        let (a, b) = (vector_of_hands(hands_a), vector_of_hands(hands_b));

        let lambda = match self.mode {
            WatchMode::DiLorenzo => {
                let j = st.entangler.coin();
                let d = coin_outcome(&mut st.entangler);
                let u = if j { s.b.signed(-d) } else { s.a.signed(d) };
                HiddenSample::DiLorenzo { u, c: j, d }
            }
            WatchMode::Hall => {
                let mut m: u64 = 0;
                loop {
                    let u = watch_vector(t.wrapping_add(m.wrapping_mul(self.pstep)), &self.w0);
                    if hall_accept(&u, &s, st.entangler.uniform())? {
                        break HiddenSample::Hall { u };
                    }
                    m += 1;
                }
            }
        };
        let u = lambda.u();
        let (a_u, mut a_own) = match cfg.fault {
            Fault::None => (u, st.station_a.clone()),
            Fault::CorruptStationA => corrupt(u, &st.station_a),
        };
        let (sigma, tau) = match self.mode {
            WatchMode::DiLorenzo => (malus_draw(&a_u, &a, &mut a_own), malus_draw(&-u, &b, &mut st.station_b)),
            WatchMode::Hall => (Outcome::of(a_u.dot(&a)), Outcome::of((-u).dot(&b))),
        };
        Ok(TrialTranscript {
            trial_index: k,
            lambda,
            settings_requested: s,
            settings_used: s,
            sigma: Some(sigma),
            tau: Some(tau),
            bits_a_to_b: 0,
            bits_b_to_a: 0,
            shared_draws: 0,
            causal_mode: CausalMode::SettingsCauseLambda,
        })
    }
}

pub fn run_watch_realization(cfg: &RunConfig, mode: WatchMode, setup: WatchSetup) -> Result<ProtocolRun> {
    let rig = WatchRig::new(mode, setup)?;
    run_trials(cfg, |k, _channels| rig.trial(cfg, k), singlet_law)
}

/// Residuals against the singlet law in `n_bins` equal-width bins of `a.b` over `[-1, 1]`.
/// The watch settings are equidistributed, so `a.b` is close to uniform and the bins fill evenly.
pub fn watch_residual_by_overlap(
    cfg: &RunConfig,
    mode: WatchMode,
    setup: WatchSetup,
    n_bins: usize,
) -> Result<Vec<ResidualEstimate>> {
    if n_bins == 0 {
        return Err(Error::InvalidConfig("n_bins must be at least 1".into()));
    }
    let rig = WatchRig::new(mode, setup)?;
    fold_trials(
        cfg.n_trials,
        || vec![ResidualEstimate::new(); n_bins],
        |acc, k| {
            let t = rig.trial(cfg, k)?;
            let x = t.settings_used.overlap();
            let bin = (((x + 1.0) / 2.0 * n_bins as f64) as usize).min(n_bins - 1);
            if let Some(o) = t.outcomes() {
                acc[bin].record(o, &singlet_law(&t.settings_used));
            }
            Ok(())
        },
        |acc, part| acc.iter_mut().zip(&part).for_each(|(x, y)| x.merge(y)),
    )
}
