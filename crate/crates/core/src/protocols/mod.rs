//! Two stations and an entangler (plus an optional referee) run as per-trial state machines.
//!
//! Every station function receives only its own local data; anything that crosses between the
//! stations goes through a [`MeteredChannel`]. Trials draw from per-trial substreams and are
//! reduced in fixed-size chunks in trial order, so results do not depend on the thread count.

pub mod audit;
pub mod loophole;
pub mod shared_coin;
pub mod signaling;
pub mod tb;
pub mod watch;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{sample_uniform_sphere, Outcome};
use crate::law::{LawEstimate, OutcomePair, ResidualEstimate};
use crate::rng::{substream, RandomStream};
use crate::{Law, Sample, Settings, UnitVector};

/// Stream tags for the parties of one trial.
pub mod tags {
    pub const ENTANGLER: u64 = 1;
    pub const STATION_A: u64 = 2;
    pub const STATION_B: u64 = 3;
    pub const REFEREE: u64 = 4;
    pub const SHARED_AB: u64 = 5;
    pub const DECLARATION: u64 = 6;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PartyRole {
    Entangler,
    StationA,
    StationB,
    Referee,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CausalMode {
    SettingsCauseLambda,
    LambdaCausesSettings,
    ActionAtADistance,
}

/// A one-way classical channel with an exact bit count.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MeteredChannel {
    pub from: PartyRole,
    pub to: PartyRole,
    pub bits_sent: u64,
    /// `(trial_index, payload_bits)` per message; only filled when transcripts are kept.
    #[serde(skip)]
    pub log: Vec<(u64, u32)>,
    #[serde(skip)]
    logging: bool,
}

impl MeteredChannel {
    pub fn new(from: PartyRole, to: PartyRole, logging: bool) -> Self {
        MeteredChannel { from, to, bits_sent: 0, log: Vec::new(), logging }
    }

    pub fn send(&mut self, trial_index: u64, payload_bits: u32) {
        if payload_bits == 0 {
            return;
        }
        self.bits_sent += payload_bits as u64;
        if self.logging {
            self.log.push((trial_index, payload_bits));
        }
    }

    fn absorb(&mut self, other: MeteredChannel) {
        self.bits_sent += other.bits_sent;
        self.log.extend(other.log);
    }

    /// The logged payloads sum to the counter (vacuous when not logging).
    pub fn is_consistent(&self) -> bool {
        !self.logging || self.log.iter().map(|(_, b)| *b as u64).sum::<u64>() == self.bits_sent
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChannelReport {
    pub a_to_b: MeteredChannel,
    pub b_to_a: MeteredChannel,
    /// Draws both stations make from identical pseudo-random streams.
    pub shared_draws: u64,
}

impl ChannelReport {
    fn new(logging: bool) -> Self {
        ChannelReport {
            a_to_b: MeteredChannel::new(PartyRole::StationA, PartyRole::StationB, logging),
            b_to_a: MeteredChannel::new(PartyRole::StationB, PartyRole::StationA, logging),
            shared_draws: 0,
        }
    }

    pub fn station_bits(&self) -> u64 {
        self.a_to_b.bits_sent + self.b_to_a.bits_sent
    }

    pub fn communication_assisted(&self) -> bool {
        self.station_bits() > 0
    }

    fn absorb(&mut self, other: ChannelReport) {
        self.a_to_b.absorb(other.a_to_b);
        self.b_to_a.absorb(other.b_to_a);
        self.shared_draws += other.shared_draws;
    }
}

/// Per-trial record.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialTranscript {
    pub trial_index: u64,
    pub lambda: Sample,
    pub settings_requested: Settings,
    pub settings_used: Settings,
    /// `None` when the station's detector did not fire.
    pub sigma: Option<Outcome>,
    pub tau: Option<Outcome>,
    pub bits_a_to_b: u32,
    pub bits_b_to_a: u32,
    pub shared_draws: u32,
    pub causal_mode: CausalMode,
}

impl TrialTranscript {
    pub fn outcomes(&self) -> Option<OutcomePair> {
        Some(OutcomePair::new(self.sigma?, self.tau?))
    }

    pub fn settings_deviate(&self) -> bool {
        self.settings_used != self.settings_requested
    }

    /// Settings may only move away from the requested ones when lambda causes them.
    pub fn is_consistent(&self) -> bool {
        !self.settings_deviate() || self.causal_mode == CausalMode::LambdaCausesSettings
    }

    pub fn csv_row(&self, model: &str) -> CsvRow {
        let u = self.lambda.u();
        CsvRow {
            trial_index: self.trial_index,
            model: model.to_string(),
            c: self.lambda.c_value(),
            d: self.lambda.d_value(),
            u_dot_a: u.dot(&self.settings_used.a),
            u_dot_b: u.dot(&self.settings_used.b),
            sigma: self.sigma.map(Outcome::value),
            tau: self.tau.map(Outcome::value),
            det_a: self.sigma.is_some() as u8,
            det_b: self.tau.is_some() as u8,
            bits_ab: self.bits_a_to_b,
            bits_ba: self.bits_b_to_a,
        }
    }
}

/// One transcript row; the header is fixed by the field names.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CsvRow {
    pub trial_index: u64,
    pub model: String,
    pub c: Option<i8>,
    pub d: Option<i8>,
    pub u_dot_a: f64,
    pub u_dot_b: f64,
    pub sigma: Option<i8>,
    pub tau: Option<i8>,
    #[serde(rename = "detA")]
    pub det_a: u8,
    #[serde(rename = "detB")]
    pub det_b: u8,
    #[serde(rename = "bitsAB")]
    pub bits_ab: u32,
    #[serde(rename = "bitsBA")]
    pub bits_ba: u32,
}

pub const CSV_HEADER: &str = "trial_index,model,c,d,u_dot_a,u_dot_b,sigma,tau,detA,detB,bitsAB,bitsBA";

/// How stations obtain their requested settings.
#[derive(Clone, Debug, PartialEq)]
pub enum SettingsPolicy {
    Fixed(Settings),
    /// Trial `k` uses entry `k mod len`.
    Cycle(Vec<Settings>),
    /// Each station draws uniformly on the sphere from its own stream.
    FreeSphere,
    /// Each station draws uniformly from its own list with its own stream.
    FreeLists {
        a: Vec<UnitVector>,
        b: Vec<UnitVector>,
    },
}

impl SettingsPolicy {
    pub fn validate(&self) -> Result<()> {
        match self {
            SettingsPolicy::Cycle(v) if v.is_empty() => Err(Error::InvalidConfig("empty settings cycle".into())),
            SettingsPolicy::FreeLists { a, b } if a.is_empty() || b.is_empty() => {
                Err(Error::InvalidConfig("empty settings list".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn choose_a(&self, k: u64, own: &mut RandomStream) -> UnitVector {
        match self {
            SettingsPolicy::Fixed(s) => s.a,
            SettingsPolicy::Cycle(v) => v[(k % v.len() as u64) as usize].a,
            SettingsPolicy::FreeSphere => sample_uniform_sphere(own),
            SettingsPolicy::FreeLists { a, .. } => a[own.index(a.len())],
        }
    }

    pub fn choose_b(&self, k: u64, own: &mut RandomStream) -> UnitVector {
        match self {
            SettingsPolicy::Fixed(s) => s.b,
            SettingsPolicy::Cycle(v) => v[(k % v.len() as u64) as usize].b,
            SettingsPolicy::FreeSphere => sample_uniform_sphere(own),
            SettingsPolicy::FreeLists { b, .. } => b[own.index(b.len())],
        }
    }
}

/// Test hook: tamper with station A's local state after the entangler has sent its data.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Fault {
    #[default]
    None,
    CorruptStationA,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub n_trials: u64,
    pub seed: u64,
    pub keep_transcripts: bool,
    pub fault: Fault,
}

impl RunConfig {
    pub fn new(n_trials: u64, seed: u64) -> Self {
        RunConfig { n_trials, seed, keep_transcripts: false, fault: Fault::None }
    }

    pub fn with_transcripts(mut self) -> Self {
        self.keep_transcripts = true;
        self
    }

    pub fn with_fault(mut self, fault: Fault) -> Self {
        self.fault = fault;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.n_trials == 0 {
            return Err(Error::InvalidConfig("n_trials must be at least 1".into()));
        }
        Ok(())
    }
}

/// Aggregated result of a protocol run.
#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolRun {
    pub n_trials: u64,
    /// Outcome counts over coincidences, pooled over settings.
    pub law: LawEstimate,
    /// Coincidence residuals against the reference law at the settings actually used.
    pub residual: ResidualEstimate,
    pub channels: ChannelReport,
    pub coincidences: u64,
    pub deviations: u64,
    pub transcripts: Vec<TrialTranscript>,
}

impl ProtocolRun {
    pub fn efficiency(&self) -> f64 {
        self.coincidences as f64 / self.n_trials as f64
    }
}

const CHUNK: u64 = 4096;

/// Runs `trial` for every index with chunked parallelism and an order-preserving reduction.
pub(crate) fn run_trials<F, R>(cfg: &RunConfig, trial: F, reference: R) -> Result<ProtocolRun>
where
    F: Fn(u64, &mut ChannelReport) -> Result<TrialTranscript> + Sync,
    R: Fn(&Settings) -> Law + Sync,
{
    cfg.validate()?;
    let n_chunks = cfg.n_trials.div_ceil(CHUNK);
    let parts: Vec<ProtocolRun> = (0..n_chunks)
        .into_par_iter()
        .map(|ci| {
            let mut part = ProtocolRun {
                n_trials: 0,
                law: LawEstimate::new(),
                residual: ResidualEstimate::new(),
                channels: ChannelReport::new(cfg.keep_transcripts),
                coincidences: 0,
                deviations: 0,
                transcripts: Vec::new(),
            };
            let end = ((ci + 1) * CHUNK).min(cfg.n_trials);
            for k in ci * CHUNK..end {
                let t = trial(k, &mut part.channels)?;
                debug_assert_eq!(t.trial_index, k);
                part.n_trials += 1;
                part.deviations += t.settings_deviate() as u64;
                if let Some(o) = t.outcomes() {
                    part.coincidences += 1;
                    part.law.record(o);
                    part.residual.record(o, &reference(&t.settings_used));
                }
                if cfg.keep_transcripts {
                    part.transcripts.push(t);
                }
            }
            Ok(part)
        })
        .collect::<Result<_>>()?;
    let mut total = ProtocolRun {
        n_trials: 0,
        law: LawEstimate::new(),
        residual: ResidualEstimate::new(),
        channels: ChannelReport::new(cfg.keep_transcripts),
        coincidences: 0,
        deviations: 0,
        transcripts: Vec::new(),
    };
    for part in parts {
        total.n_trials += part.n_trials;
        total.law.merge(&part.law);
        total.residual.merge(&part.residual);
        total.channels.absorb(part.channels);
        total.coincidences += part.coincidences;
        total.deviations += part.deviations;
        total.transcripts.extend(part.transcripts);
    }
    Ok(total)
}

/// Streams of the parties for trial `k`.
pub(crate) struct TrialStreams {
    pub entangler: RandomStream,
    pub station_a: RandomStream,
    pub station_b: RandomStream,
}

impl TrialStreams {
    pub fn new(seed: u64, k: u64) -> Self {
        let base = substream(seed, k);
        TrialStreams {
            entangler: base.fork(tags::ENTANGLER),
            station_a: base.fork(tags::STATION_A),
            station_b: base.fork(tags::STATION_B),
        }
    }
}

pub(crate) fn coin_outcome(stream: &mut RandomStream) -> Outcome {
    if stream.coin() {
        Outcome::Plus
    } else {
        Outcome::Minus
    }
}

/// What a corrupted station A sees instead of its real inputs.
pub(crate) fn corrupt(u: UnitVector, stream: &RandomStream) -> (UnitVector, RandomStream) {
    (-u.rotate_z(1.0), stream.fork(0xdead))
}
