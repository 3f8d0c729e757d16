use std::fs;
use std::path::Path;

use qyao::adversary::{blindness_experiment, epsilon_bound, estimate_detection, BlindnessMode, Mode, TrialStats};
use qyao::otm::run_noninteractive;
use qyao::protocol::{ideal_output, run_qyao, HonestServer, RunOutcome, VerificationVerdict};
use serde::Serialize;

use crate::config::{BlindnessKind, ExperimentConfig};
use crate::{CliError, EXIT_ABORT};

#[derive(Serialize)]
struct VerdictRecord<'a> {
    seed: u64,
    mode: Mode,
    verdict: &'a VerificationVerdict,
    rounds: usize,
    fidelity: f64,
    otm_count: Option<usize>,
    register_high_water: usize,
}

fn write(out: &Path, name: &str, text: &str) -> Result<(), CliError> {
    fs::create_dir_all(out)?;
    fs::write(out.join(name), text)?;
    Ok(())
}

fn json_line<T: Serialize>(v: &T) -> Result<String, CliError> {
    serde_json::to_string(v).map(|s| s + "\n").map_err(|e| CliError::Internal(e.to_string()))
}

fn internal(e: impl std::fmt::Display) -> CliError {
    CliError::Internal(e.to_string())
}

/// One honest execution; exits with the abort code if the client rejects.
pub fn run(cfg: &ExperimentConfig, out: &Path) -> Result<u8, CliError> {
    let r = cfg.resolve()?;
    let t = &r.trial;
    let ideal = ideal_output(&t.unitary, t.setup.rows(), &t.client, &t.server).map_err(|e| CliError::Config(e.to_string()))?;
    let (outcome, otm_count): (RunOutcome, Option<usize>) = match r.mode {
        Mode::Interactive => (run_qyao(&t.setup, &t.client, &t.server, &mut HonestServer, r.seed).map_err(internal)?, None),
        Mode::NonInteractive => {
            let ni = run_noninteractive(&t.setup, &t.client, &t.server, &mut HonestServer, r.seed, t.flag_len).map_err(internal)?;
            write(out, "otm_table.jsonl", &ni.table.to_jsonl())?;
            let count = ni.flags.len();
            (ni.outcome, Some(count))
        }
    };
    let fidelity = outcome.fidelity(&ideal);
    write(out, "transcript.jsonl", &outcome.transcript.to_jsonl())?;
    let record = VerdictRecord {
        seed: r.seed,
        mode: r.mode,
        verdict: &outcome.verdict,
        rounds: outcome.rounds.len(),
        fidelity,
        otm_count,
        register_high_water: outcome.high_water,
    };
    let line = json_line(&record)?;
    write(out, "verdict.json", &line)?;
    print!("{line}");
    Ok(if outcome.verdict.accepted { 0 } else { EXIT_ABORT })
}

#[derive(Serialize)]
struct StatsRecord {
    seed: u64,
    mode: Mode,
    #[serde(flatten)]
    stats: TrialStats,
    abort_rate: f64,
    accept_corrupt_rate: f64,
    p_ok: f64,
    sigma: f64,
    wilson_95: (f64, f64),
    d: u32,
    epsilon: f64,
    within_bound: bool,
}

pub fn attack(cfg: &ExperimentConfig, out: &Path) -> Result<u8, CliError> {
    let r = cfg.resolve()?;
    let strategy = cfg.strategy()?;
    let trials = cfg.trials.unwrap_or(1000);
    if trials == 0 {
        return Err(CliError::Config("trials must be at least 1".into()));
    }
    let stats = estimate_detection(&strategy, r.mode, &r.trial, trials, r.seed)?;
    let degree = r.trial.setup.pattern().graph().max_degree() as u32;
    let (d, epsilon) = epsilon_bound(degree, 0.0);
    let rate = stats.accept_corrupt_rate();
    let sigma = (epsilon * (1.0 - epsilon) / trials as f64).sqrt();
    let record = StatsRecord {
        seed: r.seed,
        mode: r.mode,
        stats,
        abort_rate: stats.abort_rate(),
        accept_corrupt_rate: rate,
        p_ok: stats.p_ok(),
        sigma,
        wilson_95: stats.corrupt_interval(1.96),
        d,
        epsilon,
        within_bound: rate <= epsilon + 3.0 * sigma,
    };
    let line = json_line(&record)?;
    write(out, "stats.json", &line)?;
    print!("{line}");
    Ok(0)
}

pub fn blindness(cfg: &ExperimentConfig, out: &Path) -> Result<u8, CliError> {
    let r = cfg.resolve()?;
    let (setup_b, client_b, server_b) = cfg.resolve_other()?;
    let spec = cfg.blindness.as_ref().expect("resolved");
    let single = r.trial.setup.order().measured.is_empty();
    let mode = match spec.kind.clone().unwrap_or(if single { BlindnessKind::Exact } else { BlindnessKind::MonteCarlo }) {
        BlindnessKind::Exact => BlindnessMode::Exact,
        BlindnessKind::MonteCarlo => BlindnessMode::MonteCarlo { samples: spec.samples.or(cfg.trials).unwrap_or(10_000), seed: r.seed },
    };
    let t = &r.trial;
    let report = blindness_experiment((&t.setup, &t.client, &t.server), (&setup_b, &client_b, &server_b), mode)?;
    let line = json_line(&report)?;
    write(out, "blindness.json", &line)?;
    print!("{line}");
    Ok(0)
}
