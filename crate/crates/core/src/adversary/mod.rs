//! Malicious-server strategies, detection statistics and blindness checks.
//!
//! Strategies come in two kinds. Black-box strategies only use what the
//! server sees and are the ones the verifiability bound is checked against.
//! White-box strategies are shown the client's secrets so tests can aim at a
//! known trap.

mod blindness;
mod stats;
mod strategy;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use blindness::{blindness_experiment, exact_server_view, BlindnessMode, BlindnessReport};
pub use stats::{epsilon_bound, TrialStats};
pub use strategy::{pauli_operator, AttackStrategy, LabelFlip, Mode, PauliTarget, PhasePoint, StrategyServer};

use crate::graph::VertexId;
use crate::otm::{run_noninteractive, OtmError};
use crate::protocol::{ideal_output, run_qyao, PartyInput, ProtocolError, ProtocolSetup, RunOutcome, VerificationVerdict};

/// Output fidelity below which an accepted run counts as corrupt.
pub const CORRUPTION_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum AdversaryError {
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Otm(#[from] OtmError),
    #[error("strategy not valid in this mode: {0}")]
    StrategyMode(String),
    #[error("strategy names unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("invalid strategy: {0}")]
    Invalid(String),
    #[error("setups differ in shape: {0}")]
    ShapeMismatch(String),
    #[error("unsupported experiment: {0}")]
    Unsupported(String),
}

/// Everything fixed across the trials of one experiment.
#[derive(Clone, Debug)]
pub struct TrialConfig {
    pub setup: ProtocolSetup,
    /// Dense unitary of the computation, for the correctness oracle.
    pub unitary: Vec<Complex64>,
    pub client: PartyInput,
    pub server: PartyInput,
    /// Flag length for the non-interactive mode.
    pub flag_len: u32,
}

impl TrialConfig {
    /// `U·ρ'_in`, with the strategy's declared input deviation folded in.
    pub fn ideal_for(&self, strategy: &AttackStrategy) -> Result<Vec<Complex64>, AdversaryError> {
        let mut server = self.server.clone();
        for (row, op) in strategy.input_deviations() {
            let pos = server.rows.iter().position(|r| *r == row).ok_or_else(|| AdversaryError::Invalid(format!("row {row} is not a server input")))?;
            let n = server.qubits();
            apply_1q(&mut server.state, n, pos, pauli_operator(op));
        }
        Ok(ideal_output(&self.unitary, self.setup.rows(), &self.client, &server)?)
    }
}

fn apply_1q(state: &mut [Complex64], n: usize, pos: usize, m: [Complex64; 4]) {
    let mask = 1 << (n - 1 - pos);
    for i in 0..state.len() {
        if i & mask == 0 {
            let (a, b) = (state[i], state[i | mask]);
            state[i] = m[0] * a + m[1] * b;
            state[i | mask] = m[2] * a + m[3] * b;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialClass {
    Abort,
    AcceptCorrect,
    AcceptCorrupt,
}

#[derive(Clone, Debug)]
pub struct TrialOutcome {
    pub class: TrialClass,
    pub verdict: VerificationVerdict,
    pub fidelity: f64,
    pub run: RunOutcome,
}

/// Classifies a finished run against the ideal output.
pub fn classify(verdict: &VerificationVerdict, fidelity: f64) -> TrialClass {
    if !verdict.accepted {
        TrialClass::Abort
    } else if fidelity >= 1.0 - CORRUPTION_THRESHOLD {
        TrialClass::AcceptCorrect
    } else {
        TrialClass::AcceptCorrupt
    }
}

/// One execution with the strategy's deviations injected.
pub fn run_with_adversary(
    strategy: &AttackStrategy,
    mode: Mode,
    config: &TrialConfig,
    seed: u64,
) -> Result<TrialOutcome, AdversaryError> {
    strategy.validate(&config.setup, mode)?;
    let ideal = config.ideal_for(strategy)?;
    run_prepared(strategy, mode, config, &ideal, seed)
}

fn run_prepared(
    strategy: &AttackStrategy,
    mode: Mode,
    config: &TrialConfig,
    ideal: &[Complex64],
    seed: u64,
) -> Result<TrialOutcome, AdversaryError> {
    let mut server = strategy.behaviour();
    let run = match mode {
        Mode::Interactive => run_qyao(&config.setup, &config.client, &config.server, &mut server, seed)?,
        Mode::NonInteractive => {
            let m = strategy.flag_len().unwrap_or(config.flag_len);
            run_noninteractive(&config.setup, &config.client, &config.server, &mut server, seed, m)?.outcome
        }
    };
    let fidelity = run.fidelity(ideal);
    let class = classify(&run.verdict, fidelity);
    Ok(TrialOutcome { class, verdict: run.verdict.clone(), fidelity, run })
}

/// Trial `k` uses seed `base_seed + k`; runs in the current rayon pool.
pub fn estimate_detection(
    strategy: &AttackStrategy,
    mode: Mode,
    config: &TrialConfig,
    trials: u64,
    base_seed: u64,
) -> Result<TrialStats, AdversaryError> {
    strategy.validate(&config.setup, mode)?;
    let ideal = config.ideal_for(strategy)?;
    (0..trials)
        .into_par_iter()
        .map(|k| run_prepared(strategy, mode, config, &ideal, base_seed.wrapping_add(k)).map(|t| TrialStats::single(t.class)))
        .try_reduce(TrialStats::default, |a, b| Ok(a.merge(&b)))
}

/// Non-interactive runs against a server that spoils one token's trap bit
/// and guesses the accept flag among the other `2^m − 1` strings.
pub fn flag_guess_attack(config: &TrialConfig, m: u32, trials: u64, base_seed: u64) -> Result<TrialStats, AdversaryError> {
    estimate_detection(&AttackStrategy::FlagGuess { m }, Mode::NonInteractive, config, trials, base_seed)
}
