//! One function per subcommand; each returns a report and, for CSV/scan output, the text body.

use anyhow::{anyhow, bail, Context, Result};
use lhv_core::freewill::{dictated_settings, discretized_dilorenzo, free_will_report, settings_independent};
use lhv_core::inequalities::correlator::ALGEBRAIC_BOUND;
use lhv_core::inequalities::{
    chsh_monte_carlo, fine_feasibility_f64, relaxed_feasibility, shared_lambda_statistics, ChshReport,
};
use lhv_core::models::simulate::simulate_law;
use lhv_core::protocols::audit::{run_conspiracy_audit, AuditMode};
use lhv_core::protocols::loophole::{run_detection_loophole, LoopholeMode};
use lhv_core::protocols::shared_coin::run_dilorenzo_shared_coin;
use lhv_core::protocols::signaling::{run_signaling_experiment, SignalingMode};
use lhv_core::protocols::tb::{planar_candidates, run_tb_freewill, run_tb_protocol};
use lhv_core::protocols::watch::{run_watch_realization, WatchMode, WatchSetup};
use lhv_core::protocols::{self, ProtocolRun, SettingsPolicy};
use lhv_core::{Model, ModelId, Settings, TbFamily, UnitVector};
use serde_json::{json, Map, Value};

use crate::args::{vector_triple, Cli, Command, Format, Preset, ProtocolName, RunConfig};
use crate::output::{bit_string, law_json, InvariantCheck, Report};

pub struct Output {
    pub report: Report,
    /// Replaces the JSON report on the output stream (CSV transcripts, scan rows).
    pub body: Option<String>,
}

struct Draft {
    settings: Vec<UnitVector>,
    options: Map<String, Value>,
    results: Value,
    checks: Vec<InvariantCheck>,
    body: Option<String>,
}

impl Draft {
    fn new(settings: Vec<UnitVector>, results: Value) -> Self {
        Draft { settings, options: Map::new(), results, checks: Vec::new(), body: None }
    }

    fn option(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.options.insert(key.to_string(), value.into());
        self
    }

    fn check(mut self, name: &str, passed: bool, detail: impl Into<String>) -> Self {
        self.checks.push(InvariantCheck::new(name, passed, detail));
        self
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Law { .. } => "law",
        Command::Simulate => "simulate",
        Command::Chsh { .. } => "chsh",
        Command::Feasibility { .. } => "feasibility",
        Command::Protocol { .. } => "protocol",
        Command::Signal { .. } => "signal",
        Command::Freewill { .. } => "freewill",
        Command::Audit => "audit",
    }
}

pub fn run(cli: &Cli) -> Result<Output> {
    let c = &cli.common;
    let csv_capable = matches!(cli.command, Command::Protocol { .. });
    if c.format == Format::Csv && !csv_capable {
        bail!("--format csv: only `protocol` writes CSV transcripts");
    }
    let draft = match &cli.command {
        Command::Law { scan, step } => law(cli, *scan, *step)?,
        Command::Simulate => simulate(cli)?,
        Command::Chsh { analytic, preset } => chsh(cli, *analytic, *preset)?,
        Command::Feasibility { correlators, marginals, k, preset } => {
            feasibility(cli, correlators.as_deref(), marginals.as_deref(), *k, *preset)?
        }
        Command::Protocol { name, candidates } => protocol(cli, *name, *candidates)?,
        Command::Signal { message, bits } => signal(cli, message.as_deref(), *bits)?,
        Command::Freewill { n } => freewill(cli, *n)?,
        Command::Audit => audit(cli)?,
    };
    let name = command_name(&cli.command);
    let config = RunConfig {
        command: name.to_string(),
        model: c.model.clone(),
        n_trials: c.trials,
        seed: c.seed,
        settings: draft.settings.iter().map(vector_triple).collect(),
        p: c.p,
        family: c.family,
        mode: c.mode.clone(),
        options: draft.options,
        format: c.format,
        out: c.out.clone(),
    };
    Ok(Output {
        report: Report {
            command: name.to_string(),
            config,
            seed: c.seed,
            results: draft.results,
            invariant_checks: draft.checks,
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
        body: draft.body,
    })
}

fn model_id(cli: &Cli) -> Result<ModelId> {
    let name = cli.common.model.as_deref().ok_or_else(|| anyhow!("--model is required"))?;
    if name == "tb-ext" {
        let family = cli.common.family.ok_or_else(|| anyhow!("--family 1|2 is required with --model tb-ext"))?;
        return Ok(match TbFamily::from_number(family)? {
            TbFamily::SettingDependent => ModelId::TbExt1,
            TbFamily::OutcomeDependent => ModelId::TbExt2,
        });
    }
    Ok(name.parse::<ModelId>()?)
}

fn sampler(cli: &Cli, id: ModelId) -> Result<Model<f64>> {
    Model::from_id(id, cli.common.p).with_context(|| format!("--model {id}"))
}

fn trials(cli: &Cli) -> Result<u64> {
    match cli.common.trials {
        0 => bail!("--trials must be at least 1"),
        n => Ok(n),
    }
}

fn law(cli: &Cli, scan: bool, step: f64) -> Result<Draft> {
    let id = model_id(cli)?;
    let s = cli.common.settings()?;
    let p = cli.common.p;
    let law = id.closed_form_law(p, &s)?;
    let mut draft = Draft::new(vec![s.a, s.b], json!({ "law": law_json(&law), "overlap": s.overlap() })).check(
        "law_is_normalized",
        law.is_valid(1e-12),
        "entries in [0,1] summing to 1",
    );
    if scan {
        if !(step > 0.0 && step <= 180.0) {
            bail!("--step must lie in (0, 180], got {step}");
        }
        let a0 = cli.common.a.unwrap_or(0.0);
        let mut rows = String::from("# angle_deg correlator\n");
        let mut points = Vec::new();
        let n = (180.0 / step).floor() as usize;
        for i in 0..=n {
            let theta = i as f64 * step;
            let c = id.closed_form_law(p, &Settings::planar_degrees(a0, a0 + theta))?.correlator();
            rows.push_str(&format!("{} {}\n", crate::output::round_sig(theta), crate::output::round_sig(c)));
            points.push(json!([theta, c]));
        }
        draft.results["scan"] = Value::Array(points);
        draft.body = Some(rows);
        draft = draft.option("scan_step_deg", step);
    }
    Ok(draft)
}

fn simulate(cli: &Cli) -> Result<Draft> {
    let id = model_id(cli)?;
    let m = sampler(cli, id)?;
    let s = cli.common.settings()?;
    let n = trials(cli)?;
    let est = simulate_law(&m, &s, n, cli.common.seed)?;
    let reference = m.reference_law(&s)?;
    let dev = est.max_abs_dev(&reference)?;
    let se = est.std_error();
    Ok(Draft::new(
        vec![s.a, s.b],
        json!({
            "estimated_law": law_json(&est.law()?),
            "analytic_law": law_json(&reference),
            "max_abs_dev": dev,
            "std_err": se,
            "counts": est.counts,
        }),
    )
    .check("max_abs_dev_within_5_std_err", dev <= 5.0 * se, format!("{dev} <= 5 * {se}")))
}

fn chsh_settings_list(st: &lhv_core::inequalities::ChshSettings) -> Vec<UnitVector> {
    vec![st.a, st.a2, st.b, st.b2]
}

fn chsh(cli: &Cli, analytic: bool, preset: Preset) -> Result<Draft> {
    let id = model_id(cli)?;
    let st = cli.common.chsh_settings(preset)?;
    let p = cli.common.p;
    let report = if analytic {
        ChshReport::analytic(st, |s| id.closed_form_law(p, s))?
    } else {
        chsh_monte_carlo(&sampler(cli, id)?, st, trials(cli)?, cli.common.seed)?
    };
    let e = report.e;
    Ok(Draft::new(chsh_settings_list(&st), serde_json::to_value(&report)?)
        .option("analytic", analytic)
        .option("preset", serde_json::to_value(preset)?)
        .check("E_within_algebraic_bound", e <= ALGEBRAIC_BOUND + 1e-12, format!("E = {e}")))
}

fn four(v: &[f64], flag: &str) -> Result<[f64; 4]> {
    v.try_into().map_err(|_| anyhow!("--{flag}: expected four comma-separated values"))
}

fn feasibility(
    cli: &Cli,
    correlators: Option<&[f64]>,
    marginals: Option<&[f64]>,
    k: f64,
    preset: Preset,
) -> Result<Draft> {
    let marg = match marginals {
        Some(m) => four(m, "marginals")?,
        None => [0.0; 4],
    };
    let (report, source, settings) = match correlators {
        Some(c) => (fine_feasibility_f64(four(c, "correlators")?, marg)?, "given", vec![]),
        None => {
            let id = model_id(cli)?;
            let st = cli.common.chsh_settings(preset)?;
            match ChshReport::analytic(st, |s| id.closed_form_law(cli.common.p, s)) {
                Ok(r) => (
                    fine_feasibility_f64(r.correlators.map(|c| c.value), marg)?,
                    "closed_form",
                    chsh_settings_list(&st),
                ),
                Err(_) => {
                    if !(k.is_finite() && k >= 0.0) {
                        bail!("--k must be a non-negative number");
                    }
                    let stats = shared_lambda_statistics(&sampler(cli, id)?, st, trials(cli)?, cli.common.seed)?;
                    let r = relaxed_feasibility(&stats.correlators, &stats.marginals, k)?;
                    let mut draft_stats = serde_json::to_value(&stats)?;
                    draft_stats["relaxation_k"] = json!(k);
                    return Ok(finish_feasibility(
                        r,
                        "shared_lambda_sample",
                        chsh_settings_list(&st),
                        Some(draft_stats),
                    ));
                }
            }
        }
    };
    Ok(finish_feasibility(report, source, settings, None))
}

fn finish_feasibility(
    r: lhv_core::inequalities::FeasibilityReport,
    source: &str,
    settings: Vec<UnitVector>,
    sample: Option<Value>,
) -> Draft {
    let mut results = serde_json::to_value(&r).expect("report serializes");
    results["source"] = json!(source);
    if let Some(s) = sample {
        results["sample"] = s;
    }
    let mut d = Draft::new(settings, results).option("source", source);
    if !r.feasible {
        d = d.check("infeasibility_certificate_verified", r.certificate_verified, "exact Farkas certificate");
    }
    d.check("lp_agrees_with_facets", r.lp_agrees_with_facets, "LP verdict equals facet verdict")
}

fn run_json(run: &ProtocolRun) -> Result<Value> {
    Ok(json!({
        "n_trials": run.n_trials,
        "coincidences": run.coincidences,
        "efficiency": run.efficiency(),
        "law": law_json(&run.law.law()?),
        "max_residual": run.residual.max_abs_dev(),
        "residual_std_error": run.residual.std_error(),
        "channels": run.channels,
        "deviations": run.deviations,
    }))
}

fn transcripts_csv(run: &ProtocolRun, model: &str) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for t in &run.transcripts {
        w.serialize(t.csv_row(model))?;
    }
    if run.transcripts.is_empty() {
        w.write_record(protocols::CSV_HEADER.split(','))?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn mode_str(cli: &Cli) -> Option<&str> {
    cli.common.mode.as_deref()
}

fn protocol(cli: &Cli, name: ProtocolName, candidates: usize) -> Result<Draft> {
    let c = &cli.common;
    let mut cfg = protocols::RunConfig::new(trials(cli)?, c.seed);
    if c.format == Format::Csv {
        cfg = cfg.with_transcripts();
    }
    let n = cfg.n_trials;
    let s = c.settings()?;
    let fixed_or_free = || -> Result<SettingsPolicy> {
        Ok(match mode_str(cli) {
            None | Some("fixed") => SettingsPolicy::Fixed(s),
            Some("free") => SettingsPolicy::FreeSphere,
            Some(m) => bail!("--mode {m}: expected fixed or free"),
        })
    };
    let zero_bits = |d: Draft, run: &ProtocolRun| {
        d.check("no_station_bits", run.channels.station_bits() == 0, format!("{} bits", run.channels.station_bits()))
    };
    let law_check = |d: Draft, run: &ProtocolRun, tol: f64| {
        let r = run.residual.max_abs_dev();
        d.check("law_close_to_singlet", r <= tol, format!("max residual {r} <= {tol}"))
    };
    let label = serde_json::to_value(name)?.as_str().unwrap_or_default().to_string();
    let (run, draft) = match name {
        ProtocolName::Tb => {
            let policy = fixed_or_free()?;
            let run = run_tb_protocol(&cfg, &policy)?;
            let d = Draft::new(vec![s.a, s.b], run_json(&run)?)
                .check(
                    "a_to_b_bits_equal_trials",
                    run.channels.a_to_b.bits_sent == n,
                    format!("{} bits", run.channels.a_to_b.bits_sent),
                )
                .check(
                    "no_b_to_a_bits",
                    run.channels.b_to_a.bits_sent == 0,
                    format!("{} bits", run.channels.b_to_a.bits_sent),
                );
            let d = law_check(d, &run, 5.0 * run.residual.std_error().max(1e-3));
            (run, d)
        }
        ProtocolName::TbFreewill => {
            if candidates == 0 {
                bail!("--candidates must be at least 1");
            }
            let a = planar_candidates(candidates);
            let b: Vec<UnitVector> =
                a.iter().map(|v| v.rotate_z(std::f64::consts::PI / (2.0 * candidates as f64))).collect();
            let run = run_tb_freewill(&cfg, &a, &SettingsPolicy::FreeLists { a: a.clone(), b })?;
            let d = zero_bits(Draft::new(vec![], run_json(&run)?), &run).option("candidates", candidates);
            let d = law_check(d, &run, 5.0 * run.residual.std_error().max(1e-3));
            (run, d)
        }
        ProtocolName::SharedCoin => {
            let run = run_dilorenzo_shared_coin(&cfg, &SettingsPolicy::FreeSphere)?;
            let d = zero_bits(Draft::new(vec![], run_json(&run)?), &run).check(
                "two_shared_draws_per_trial",
                run.channels.shared_draws == 2 * n,
                format!("{} draws", run.channels.shared_draws),
            );
            let d = law_check(d, &run, 5.0 * run.residual.std_error().max(1e-3));
            (run, d)
        }
        ProtocolName::DetectionLoophole => {
            let mode = match mode_str(cli).unwrap_or("symmetric") {
                "symmetric" => LoopholeMode::Symmetric { n_directions: c.n_directions },
                "asymmetric" => LoopholeMode::Asymmetric { n_directions: c.n_directions },
                "sphere" => LoopholeMode::Sphere { delta_omega: c.delta_omega.unwrap_or(0.2 * std::f64::consts::PI) },
                m => bail!("--mode {m}: expected symmetric, asymmetric or sphere"),
            };
            let (run, rep) = run_detection_loophole(&cfg, mode)?;
            let mut results = run_json(&run)?;
            results["efficiency_report"] = serde_json::to_value(&rep)?;
            let gap = (rep.efficiency - rep.expected_efficiency).abs();
            let d = zero_bits(Draft::new(vec![], results), &run).option("loophole", serde_json::to_value(mode)?).check(
                "efficiency_within_4_std_err",
                gap <= 4.0 * rep.efficiency_std_error,
                format!("{} vs {}", rep.efficiency, rep.expected_efficiency),
            );
            let d = law_check(d, &run, (5.0 * rep.residual_std_error).max(0.01));
            (run, d)
        }
        ProtocolName::Watch => {
            let mode = match mode_str(cli).unwrap_or("dilorenzo") {
                "dilorenzo" => WatchMode::DiLorenzo,
                "hall" => WatchMode::Hall,
                m => bail!("--mode {m}: expected dilorenzo or hall"),
            };
            let run = run_watch_realization(&cfg, mode, WatchSetup::default())?;
            let d =
                zero_bits(Draft::new(vec![], run_json(&run)?), &run).check("watches_synchronized", true, "every trial");
            let d = law_check(d, &run, 5.0 * run.residual.std_error().max(1e-3));
            (run, d)
        }
    };
    let mut draft = draft.option("name", label.clone());
    if c.format == Format::Csv {
        draft.body = Some(transcripts_csv(&run, &label)?);
    }
    Ok(draft)
}

fn parse_message(text: &str) -> Result<Vec<bool>> {
    text.chars()
        .map(|ch| match ch {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(anyhow!("--message: unexpected character {other:?}; use 0 and 1")),
        })
        .collect()
}

fn signal(cli: &Cli, message: Option<&str>, bits: usize) -> Result<Draft> {
    let mode = match mode_str(cli).unwrap_or("action") {
        "action" | "action-at-a-distance" => SignalingMode::ActionAtADistance,
        "slave-will" => SignalingMode::SlaveWill,
        m => bail!("--mode {m}: expected action or slave-will"),
    };
    let msg = match message {
        Some(m) => parse_message(m)?,
        None => vec![false; bits],
    };
    let c = &cli.common;
    let s = Settings::new(
        if c.a.is_some() || c.vec_a.is_some() { c.settings()?.a } else { UnitVector::planar_degrees(0.0) },
        if c.b.is_some() || c.vec_b.is_some() { c.settings()?.b } else { UnitVector::planar_degrees(90.0) },
    );
    let (rep, _) = run_signaling_experiment(&msg, mode, s, c.seed)?;
    let results = json!({
        "mode": rep.mode,
        "n_trials": rep.n_trials,
        "n_usable": rep.n_usable,
        "usable_fraction": rep.usable_fraction,
        "received": bit_string(&rep.received),
        "usable_mask": bit_string(&rep.usable_mask),
        "empirical_entropy": rep.empirical_entropy,
        "success_rate": rep.success_rate,
        "bits_a_to_b": rep.bits_a_to_b,
    });
    let d = Draft::new(vec![s.a, s.b], results).option("message_bits", msg.len());
    Ok(match mode {
        SignalingMode::ActionAtADistance => {
            d.check("message_received_intact", rep.success_rate == 1.0, format!("success rate {}", rep.success_rate))
        }
        SignalingMode::SlaveWill => d.check(
            "received_bits_random",
            rep.empirical_entropy >= 0.99,
            format!("entropy {} >= 0.99", rep.empirical_entropy),
        ),
    })
}

fn freewill(cli: &Cli, n: usize) -> Result<Draft> {
    let model = cli.common.model.as_deref().unwrap_or("dilorenzo");
    let m = match model {
        "dilorenzo" => discretized_dilorenzo(n)?,
        "dictated" => dictated_settings(n)?,
        "independent" => settings_independent(n, 4 * n)?,
        other => bail!("--model {other}: freewill accepts dilorenzo, dictated or independent"),
    };
    let rep = free_will_report(&m);
    Ok(Draft::new(vec![], serde_json::to_value(&rep)?)
        .option("n", n)
        .check("I_at_most_I_max", rep.i_bits <= rep.i_max_bits + 1e-12, format!("{} <= {}", rep.i_bits, rep.i_max_bits))
        .check("M_at_most_2", rep.m <= 2.0, format!("M = {}", rep.m_exact)))
}

fn audit(cli: &Cli) -> Result<Draft> {
    let c = &cli.common;
    let mode = match mode_str(cli).unwrap_or("settings-cause-lambda") {
        "settings-cause-lambda" => AuditMode::SettingsCauseLambda,
        "lambda-causes-settings" => AuditMode::LambdaCausesSettings,
        "referee-switch" => AuditMode::RefereeSwitch,
        m => bail!("--mode {m}: expected settings-cause-lambda, lambda-causes-settings or referee-switch"),
    };
    let declared = if c.a.is_some() || c.b.is_some() || c.vec_a.is_some() || c.vec_b.is_some() {
        vec![c.settings()?]
    } else {
        vec![
            Settings::planar_degrees(0.0, 45.0),
            Settings::planar_degrees(90.0, 45.0),
            Settings::planar_degrees(0.0, -45.0),
        ]
    };
    let rep = run_conspiracy_audit(&protocols::RunConfig::new(trials(cli)?, c.seed), &declared, mode)?;
    let settings = declared.iter().flat_map(|s| [s.a, s.b]).collect();
    Ok(Draft::new(settings, serde_json::to_value(&rep)?).option("declared_pairs", declared.len()).check(
        "deviations_as_expected",
        rep.deviations_as_expected(),
        format!("{} deviations", rep.deviations),
    ))
}
