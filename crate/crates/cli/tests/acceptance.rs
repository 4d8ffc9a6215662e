//! Acceptance criteria at full size. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. Run with `cargo test -p lhv-lab --test acceptance`.

use std::process::Command;

use anyhow::{ensure, Result};
use lhv_core::freewill::{discretized_dilorenzo, free_will_report, measure_m};
use lhv_core::inequalities::correlator::chsh_combination;
use lhv_core::inequalities::feasibility::{uniform_data, witness_master};
use lhv_core::inequalities::{
    card_deck_stats, chsh_monte_carlo, fine_feasibility, fine_feasibility_f64, relaxed_feasibility,
    shared_lambda_statistics, CardDeckModel, ChshReport, ChshSettings, Facet, MasterProb16,
};
use lhv_core::models::laws::{mixed_law, singlet_law};
use lhv_core::models::simulate::simulate_law;
use lhv_core::protocols::loophole::{run_detection_loophole, LoopholeMode};
use lhv_core::protocols::shared_coin::run_dilorenzo_shared_coin;
use lhv_core::protocols::signaling::{run_signaling_experiment, SignalingMode};
use lhv_core::protocols::tb::{planar_candidates, run_tb_freewill, run_tb_protocol};
use lhv_core::protocols::watch::{run_watch_realization, watch_residual_by_overlap, WatchMode, WatchSetup};
use lhv_core::protocols::{RunConfig, SettingsPolicy};
use lhv_core::scalar::ratio;
use lhv_core::{substream, Law, Model, ModelId, Settings};

const SEED: u64 = 1;
const MILLION: u64 = 1_000_000;

fn sweep() -> Vec<Settings> {
    (0..12).map(|i| Settings::planar_degrees(0.0, 15.0 * i as f64)).collect()
}

/// `(1 - sigma*tau*k*a.b)/4` written out entry by entry; index 0 is `+1`.
fn damped_singlet(k: f64, s: &Settings) -> [[f64; 2]; 2] {
    let ab = s.a.dot(&s.b);
    let sign = [1.0, -1.0];
    std::array::from_fn(|i| std::array::from_fn(|j| (1.0 - sign[i] * sign[j] * k * ab) / 4.0))
}

fn max_dev(law: &Law, want: [[f64; 2]; 2]) -> f64 {
    let got = law.entries();
    (0..4).map(|k| (got[k / 2][k % 2] - want[k / 2][k % 2]).abs()).fold(0.0, f64::max)
}

fn singlet_realizations() -> Result<String> {
    let mut worst = 0.0f64;
    for (i, s) in sweep().iter().enumerate() {
        let want = damped_singlet(1.0, s);
        for id in [ModelId::DiLorenzo, ModelId::Hall] {
            let est = simulate_law(&Model::from_id(id, 1.0)?, s, MILLION, SEED + i as u64)?;
            let d = max_dev(&est.law()?, want);
            ensure!(d <= 0.005, "{} at b = {}: {d}", id.name(), 15 * i);
            worst = worst.max(d);
        }
        let run = run_tb_protocol(&RunConfig::new(MILLION, SEED + i as u64), &SettingsPolicy::Fixed(*s))?;
        let d = max_dev(&run.law.law()?, want);
        ensure!(d <= 0.005, "tb protocol at b = {}: {d}", 15 * i);
        worst = worst.max(d);
    }
    for mode in [WatchMode::DiLorenzo, WatchMode::Hall] {
        let bins = watch_residual_by_overlap(&RunConfig::new(12 * MILLION, SEED), mode, WatchSetup::default(), 12)?;
        for (i, r) in bins.iter().enumerate() {
            ensure!(r.n() > 500_000, "watch {mode:?} bin {i} has {} trials", r.n());
            ensure!(r.max_abs_dev() <= 0.005, "watch {mode:?} bin {i}: {}", r.max_abs_dev());
            worst = worst.max(r.max_abs_dev());
        }
    }
    Ok(format!("max deviation {worst:.5}"))
}

fn tb_extensions() -> Result<String> {
    let mut worst = 0.0f64;
    let s = Settings::planar_degrees(0.0, 30.0);
    for (id, strength) in [(ModelId::TbExt1, (|p: f64| 2.0 * p - 1.0) as fn(f64) -> f64), (ModelId::TbExt2, |p| p)] {
        for p in [0.25, 0.5, 0.75, 1.0] {
            let est = simulate_law(&Model::from_id(id, p)?, &s, MILLION, SEED)?;
            let d = max_dev(&est.law()?, damped_singlet(strength(p), &s));
            ensure!(d <= 0.005, "{} p = {p}: {d}", id.name());
            worst = worst.max(d);
        }
    }
    Ok(format!("max deviation {worst:.5}"))
}

fn chsh_values() -> Result<String> {
    let singlet = ChshReport::analytic(ChshSettings::singlet_optimal(), |s| Ok(singlet_law(s)))?;
    ensure!((singlet.e - 2.0 * 2f64.sqrt()).abs() <= 1e-9, "singlet E = {}", singlet.e);
    let mixed = ChshReport::analytic(ChshSettings::sign_saturating(), |s| Ok(mixed_law(s)))?;
    ensure!(mixed.e == 4.0, "mixed analytic E = {}", mixed.e);
    let mc = chsh_monte_carlo(&Model::from_id(ModelId::Mixed, 1.0)?, ChshSettings::sign_saturating(), MILLION, SEED)?;
    ensure!(mc.e >= 3.95, "mixed Monte Carlo E = {}", mc.e);
    Ok(format!("singlet {:.10}, mixed {} analytic / {:.4} sampled", singlet.e, mixed.e, mc.e))
}

fn bit_accounting() -> Result<String> {
    let n = 100_000;
    let cfg = RunConfig::new(n, SEED);
    let policy = SettingsPolicy::FreeSphere;
    let tb = run_tb_protocol(&cfg, &policy)?;
    ensure!(tb.channels.a_to_b.bits_sent == n && tb.channels.b_to_a.bits_sent == 0, "tb bits {:?}", tb.channels);
    let zero = [
        ("shared coin", run_dilorenzo_shared_coin(&cfg, &policy)?),
        ("tb free will", run_tb_freewill(&cfg, &planar_candidates(4), &policy)?),
        ("watch", run_watch_realization(&cfg, WatchMode::DiLorenzo, WatchSetup::default())?),
    ];
    for (name, run) in &zero {
        ensure!(run.channels.station_bits() == 0, "{name}: {} bits", run.channels.station_bits());
    }
    Ok(format!("tb {n} bits over {n} trials; others 0"))
}

fn detection_loophole() -> Result<String> {
    let cfg = RunConfig::new(MILLION, SEED);
    let mut out = Vec::new();
    for (mode, band) in [
        (LoopholeMode::Symmetric { n_directions: 2 }, Some(0.01)),
        (LoopholeMode::Asymmetric { n_directions: 2 }, Some(0.01)),
        (LoopholeMode::Sphere { delta_omega: 2.0 * std::f64::consts::PI * 0.05 }, None),
        (LoopholeMode::Sphere { delta_omega: 2.0 * std::f64::consts::PI * 0.1 }, None),
    ] {
        let (_, rep) = run_detection_loophole(&cfg, mode)?;
        let tol = band.unwrap_or(3.0 * rep.efficiency_std_error);
        ensure!((rep.efficiency - rep.expected_efficiency).abs() <= tol, "{mode:?}: efficiency {}", rep.efficiency);
        ensure!(rep.max_residual <= 0.01, "{mode:?}: residual {}", rep.max_residual);
        out.push(format!("{:.4}", rep.efficiency));
    }
    Ok(format!("efficiencies {}", out.join(", ")))
}

fn free_will_measures() -> Result<String> {
    for n in [2usize, 4, 8, 16] {
        let m = discretized_dilorenzo(n)?;
        ensure!(measure_m(&m) == ratio(2, 1), "N = {n}: M = {}", measure_m(&m));
        let r = free_will_report(&m);
        let log = (n as f64).log2();
        ensure!((r.i_bits - log).abs() <= 1e-9, "N = {n}: I = {}", r.i_bits);
        ensure!((r.i_max_bits - 2.0 * log).abs() <= 1e-12, "N = {n}: I_max = {}", r.i_max_bits);
    }
    Ok("M = 2 and I = log2 N for N in 2, 4, 8, 16".into())
}

fn feasibility() -> Result<String> {
    let uniform = uniform_data();
    ensure!(fine_feasibility(&uniform)?.feasible, "uniform data infeasible");
    ensure!(witness_master(&uniform) == Some(MasterProb16::uniform()), "uniform witness is not 1/16");

    let settings = ChshSettings::singlet_optimal();
    let corr = settings.pairs().map(|s| -s.a.dot(&s.b));
    let singlet = fine_feasibility_f64(corr, [0.0; 4])?;
    ensure!(!singlet.feasible, "singlet correlators feasible");
    ensure!(matches!(singlet.facet_violated, Some(Facet::Chsh { .. })), "facet {:?}", singlet.facet_violated);
    ensure!(singlet.farkas.is_some() && singlet.certificate_verified, "no verified certificate");

    for id in [ModelId::DiLorenzo, ModelId::Hall, ModelId::Mixed, ModelId::TbFreeWill] {
        let st = shared_lambda_statistics(&Model::from_id(id, 1.0)?, settings, MILLION, SEED)?;
        let r = relaxed_feasibility(&st.correlators, &st.marginals, 3.0)?;
        ensure!(r.feasible, "{} shared-lambda statistics infeasible", id.name());
    }

    let mut stream = substream(SEED, 0);
    for i in 0..10_000 {
        let c = MasterProb16::random(&mut stream, 20).correlators();
        for minus in 0..4 {
            let mut v = c.clone();
            v.swap(minus, 3);
            let e = chsh_combination(&v);
            ensure!(e <= ratio(2, 1) && e >= ratio(-2, 1), "master {i}: CHSH variant {minus} = {e}");
        }
    }
    Ok("uniform witness exact; singlet cut by a CHSH facet; shared-lambda models feasible; 10^4 masters obey |E| <= 2"
        .into())
}

fn card_decks() -> Result<String> {
    let s = card_deck_stats(&CardDeckModel::two_decks(), 0)?;
    ensure!(s.joint == ratio(3, 20) && s.product == ratio(1, 4) && !s.factorizes, "{s:?}");
    Ok(format!("joint {} vs product {}", s.joint, s.product))
}

fn message(bits: usize, tag: u64) -> Vec<bool> {
    let mut st = substream(SEED, tag);
    (0..bits).map(|_| st.coin()).collect()
}

fn signaling() -> Result<String> {
    let settings = Settings::planar_degrees(0.0, 90.0);
    let msg = message(1000, 1);
    let (action, _) = run_signaling_experiment(&msg, SignalingMode::ActionAtADistance, settings, SEED)?;
    ensure!(action.success_rate == 1.0, "action success {}", action.success_rate);

    let long = message(10_000, 2);
    let mut fractions = Vec::new();
    for mode in [SignalingMode::ActionAtADistance, SignalingMode::SlaveWill] {
        let (r, _) = run_signaling_experiment(&long, mode, settings, SEED)?;
        ensure!((r.usable_fraction - 0.5).abs() <= 0.01, "{mode:?}: usable fraction {}", r.usable_fraction);
        fractions.push(r.usable_fraction);
        if mode == SignalingMode::SlaveWill {
            ensure!(r.empirical_entropy >= 0.99, "slave will entropy {}", r.empirical_entropy);
            ensure!((r.success_rate - 0.5).abs() <= 0.02, "slave will success {}", r.success_rate);
        }
    }
    Ok(format!("action success 1; usable fractions {:.4}, {:.4}", fractions[0], fractions[1]))
}

fn thread_count_independence() -> Result<String> {
    let commands: [&[&str]; 5] = [
        &["simulate", "--model", "hall", "--trials", "200000"],
        &["chsh", "--model", "dilorenzo", "--trials", "100000"],
        &["protocol", "--name", "watch", "--mode", "hall", "--trials", "50000", "--format", "csv"],
        &["protocol", "--name", "detection-loophole", "--mode", "sphere", "--trials", "200000"],
        &["audit", "--trials", "50000"],
    ];
    let run = |args: &[&str], threads: &str| -> Result<Vec<u8>> {
        let out = Command::new(env!("CARGO_BIN_EXE_lhv-lab"))
            .args(args)
            .env("RAYON_NUM_THREADS", threads)
            .env("LHV_LAB_SEED", "11")
            .output()?;
        ensure!(out.status.code().is_some_and(|c| c <= 1), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        Ok(out.stdout)
    };
    for args in commands {
        ensure!(run(args, "1")? == run(args, "4")?, "{args:?} differs between 1 and 4 threads");
    }
    Ok(format!("{} commands byte-identical", commands.len()))
}

type Criterion = fn() -> Result<String>;

fn main() {
    let criteria: [(&str, Criterion); 10] = [
        ("singlet law from every realization", singlet_realizations),
        ("Toner-Bacon extension laws", tb_extensions),
        ("CHSH values", chsh_values),
        ("communication accounting", bit_accounting),
        ("detection-loophole efficiency", detection_loophole),
        ("free-will measures", free_will_measures),
        ("master-probability feasibility", feasibility),
        ("card decks", card_decks),
        ("signaling", signaling),
        ("thread-count independence", thread_count_independence),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = std::time::Instant::now();
        let verdict = check();
        let secs = start.elapsed().as_secs_f64();
        match verdict {
            Ok(detail) => println!("criterion {:>2}: PASS  {name}: {detail} ({secs:.1}s)", i + 1),
            Err(e) => {
                failed += 1;
                println!("criterion {:>2}: FAIL  {name}: {e:#} ({secs:.1}s)", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
