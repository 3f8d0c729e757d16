//! Experiment configuration files.
//!
//! ```toml
//! seed = 7
//! mode = "interactive"          # or "noninteractive"
//! builtin = "cnot"              # or a [circuit] table
//! trials = 1000
//! flag_len = 4                  # or epsilon = 0.01
//! strategy = "random-pauli"     # bundled name or a path next to this file
//!
//! [client]
//! rows = [0]
//! states = ["+"]                # "0" "1" "+" "-" "+i" "-i" or { eighths = k }
//! ```

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use qyao::adversary::{AttackStrategy, Mode, TrialConfig};
use qyao::otm::flag_length_for;
use qyao::pattern::{compile_circuit, Circuit, Gate};
use qyao::protocol::{PartyInput, ProtocolSetup};
use serde::Deserialize;

use crate::CliError;

pub const RANDOM_PAULI: &str = include_str!("../strategies/random-pauli.toml");

/// One input qubit: a named state or `|+_θ⟩` with θ in eighth-turns.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum QubitSpec {
    Named(String),
    Angle { eighths: i64 },
}

impl QubitSpec {
    fn amplitudes(&self) -> Result<[Complex64; 2], CliError> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let c = Complex64::new;
        Ok(match self {
            QubitSpec::Named(n) => match n.as_str() {
                "0" => [c(1.0, 0.0), c(0.0, 0.0)],
                "1" => [c(0.0, 0.0), c(1.0, 0.0)],
                "+" => [c(h, 0.0), c(h, 0.0)],
                "-" => [c(h, 0.0), c(-h, 0.0)],
                "+i" => [c(h, 0.0), c(0.0, h)],
                "-i" => [c(h, 0.0), c(0.0, -h)],
                other => return Err(CliError::Config(format!("unknown state {other:?}"))),
            },
            QubitSpec::Angle { eighths } => {
                let theta = std::f64::consts::FRAC_PI_4 * *eighths as f64;
                [c(h, 0.0), Complex64::from_polar(h, theta)]
            }
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputSpec {
    pub rows: Vec<u32>,
    pub states: Vec<QubitSpec>,
}

impl InputSpec {
    pub fn to_party(&self) -> Result<PartyInput, CliError> {
        let singles = self.states.iter().map(QubitSpec::amplitudes).collect::<Result<Vec<_>, _>>()?;
        PartyInput::product(self.rows.clone(), &singles).map_err(|e| CliError::Config(e.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlindnessKind {
    Exact,
    MonteCarlo,
}

/// Second computation for a blindness comparison.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlindnessSpec {
    pub kind: Option<BlindnessKind>,
    pub samples: Option<u64>,
    pub builtin: Option<String>,
    pub circuit: Option<Circuit>,
    pub client: Option<InputSpec>,
    pub server: Option<InputSpec>,
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: Option<u64>,
    pub mode: Option<Mode>,
    pub builtin: Option<String>,
    pub circuit: Option<Circuit>,
    #[serde(default)]
    pub server_inputs: Option<Vec<u32>>,
    #[serde(default)]
    pub server_outputs: Option<Vec<u32>>,
    pub client: Option<InputSpec>,
    pub server: Option<InputSpec>,
    pub trials: Option<u64>,
    pub flag_len: Option<u32>,
    pub epsilon: Option<f64>,
    pub strategy: Option<String>,
    pub blindness: Option<BlindnessSpec>,
    #[serde(skip)]
    pub dir: PathBuf,
}

/// A named ready-made computation with default inputs.
struct Builtin {
    circuit: Circuit,
    server_inputs: Vec<u32>,
    server_outputs: Vec<u32>,
    client: InputSpec,
    server: InputSpec,
}

fn named(s: &str) -> QubitSpec {
    QubitSpec::Named(s.into())
}

fn builtin(name: &str) -> Result<Builtin, CliError> {
    let single = |gates: Vec<Gate>| Builtin {
        circuit: Circuit { rows: 1, gates },
        server_inputs: vec![],
        server_outputs: vec![],
        client: InputSpec { rows: vec![0], states: vec![named("+i")] },
        server: InputSpec::default(),
    };
    Ok(match name {
        "single-vertex" => single(vec![]),
        "identity-path2" => single(vec![Gate::Identity]),
        "h-t" => single(vec![Gate::H { wire: 0 }, Gate::T { wire: 0 }]),
        "cnot" => Builtin {
            circuit: Circuit { rows: 2, gates: vec![Gate::Cnot { control: 0, target: 1 }] },
            server_inputs: vec![1],
            server_outputs: vec![1],
            client: InputSpec { rows: vec![0], states: vec![named("+")] },
            server: InputSpec { rows: vec![1], states: vec![named("0")] },
        },
        "cz" => Builtin {
            circuit: Circuit { rows: 2, gates: vec![Gate::Cz { a: 0, b: 1 }] },
            server_inputs: vec![1],
            server_outputs: vec![0],
            client: InputSpec { rows: vec![0], states: vec![named("+")] },
            server: InputSpec { rows: vec![1], states: vec![named("-")] },
        },
        other => return Err(CliError::Config(format!("unknown builtin {other:?}"))),
    })
}

/// Everything needed to run one computation.
pub struct Resolved {
    pub trial: TrialConfig,
    pub mode: Mode,
    pub seed: u64,
}

fn resolve_computation(
    builtin_name: Option<&str>,
    circuit: Option<&Circuit>,
    server_inputs: Option<&Vec<u32>>,
    server_outputs: Option<&Vec<u32>>,
    client: Option<&InputSpec>,
    server: Option<&InputSpec>,
) -> Result<(ProtocolSetup, Circuit, PartyInput, PartyInput), CliError> {
    let base = match (builtin_name, circuit) {
        (Some(_), Some(_)) => return Err(CliError::Config("give either builtin or [circuit], not both".into())),
        (Some(name), None) => builtin(name)?,
        (None, Some(c)) => Builtin {
            circuit: c.clone(),
            server_inputs: vec![],
            server_outputs: vec![],
            client: InputSpec::default(),
            server: InputSpec::default(),
        },
        (None, None) => return Err(CliError::Config("missing builtin or [circuit]".into())),
    };
    let sin = server_inputs.cloned().unwrap_or(base.server_inputs);
    let sout = server_outputs.cloned().unwrap_or(base.server_outputs);
    let client = client.cloned().unwrap_or(base.client).to_party()?;
    let server = server.cloned().unwrap_or(base.server).to_party()?;
    let pattern = compile_circuit(&base.circuit).map_err(|e| CliError::Config(e.to_string()))?;
    let setup = ProtocolSetup::new(pattern, &sin, &sout).map_err(|e| CliError::Config(e.to_string()))?;
    Ok((setup, base.circuit, client, server))
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg: ExperimentConfig = toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        cfg.dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn flag_len(&self) -> Result<u32, CliError> {
        match (self.flag_len, self.epsilon) {
            (Some(m), Some(eps)) => {
                let need = flag_length_for(eps).map_err(|e| CliError::Config(e.to_string()))?;
                if m < need {
                    return Err(CliError::Config(format!("flag_len {m} too short for epsilon {eps} (need {need})")));
                }
                Ok(m)
            }
            (Some(m), None) => Ok(m),
            (None, Some(eps)) => flag_length_for(eps).map_err(|e| CliError::Config(e.to_string())),
            (None, None) => Ok(4),
        }
    }

    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let seed = self.seed.ok_or_else(|| CliError::Config("seed is mandatory (config or --seed)".into()))?;
        let (setup, circuit, client, server) = resolve_computation(
            self.builtin.as_deref(),
            self.circuit.as_ref(),
            self.server_inputs.as_ref(),
            self.server_outputs.as_ref(),
            self.client.as_ref(),
            self.server.as_ref(),
        )?;
        let trial = TrialConfig { setup, unitary: circuit.unitary(), client, server, flag_len: self.flag_len()? };
        Ok(Resolved { trial, mode: self.mode.unwrap_or(Mode::Interactive), seed })
    }

    /// The second computation of a blindness comparison; defaults to the
    /// first one's shape with its own inputs.
    pub fn resolve_other(&self) -> Result<(ProtocolSetup, PartyInput, PartyInput), CliError> {
        let b = self.blindness.as_ref().ok_or_else(|| CliError::Config("missing [blindness] table".into()))?;
        let (builtin, circuit) = match (&b.builtin, &b.circuit) {
            (None, None) => (self.builtin.as_deref(), self.circuit.as_ref()),
            (x, y) => (x.as_deref(), y.as_ref()),
        };
        let (setup, _, client, server) =
            resolve_computation(builtin, circuit, self.server_inputs.as_ref(), self.server_outputs.as_ref(), b.client.as_ref(), b.server.as_ref())?;
        Ok((setup, client, server))
    }

    pub fn strategy(&self) -> Result<AttackStrategy, CliError> {
        let name = self.strategy.as_deref().ok_or_else(|| CliError::Config("attack needs a strategy".into()))?;
        let path = self.dir.join(name);
        let text = if path.is_file() {
            std::fs::read_to_string(&path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        } else if name == "random-pauli" {
            RANDOM_PAULI.to_string()
        } else if name == "honest" {
            "attack = \"honest\"\n".to_string()
        } else {
            return Err(CliError::Config(format!("strategy file {} not found", path.display())));
        };
        toml::from_str(&text).map_err(|e| CliError::Config(format!("strategy {name}: {e}")))
    }
}
