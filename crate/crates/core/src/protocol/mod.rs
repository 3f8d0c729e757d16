//! Client and server for the interactive two-party protocol: verifiable blind
//! computation on DT(G), server input injection and server output extraction.

mod client;
mod messages;
mod run;
mod secrets;
mod server;
mod setup;

use thiserror::Error;

pub use client::{Client, OutputKeyMaterial};
pub use messages::{Party, Phase, ProtocolMessage, Round, Transcript, TranscriptEntry, VerificationVerdict};
pub use run::{decrypt_output, run_qyao, Execution, RunOutcome};
pub use secrets::ClientSecrets;
pub use server::{HonestServer, Pauli, ServerBehaviour, ServerCtx, ServerState};
pub use setup::{ideal_output, joint_input_state, PartyInput, ProtocolSetup, RngStreams};

use crate::graph::{GraphError, VertexId};
use crate::pattern::PatternError;
use crate::qsim::QsimError;

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Pattern(#[from] PatternError),
    #[error(transparent)]
    Qsim(#[from] QsimError),
    #[error("no secret recorded for vertex {0}")]
    MissingSecret(VertexId),
    #[error("no outcome recorded for vertex {0}")]
    MissingOutcome(VertexId),
    #[error("protocol order violated: {0}")]
    OutOfOrder(String),
    #[error("edge {0}-{1} entangled twice")]
    DoubleEntangle(VertexId, VertexId),
    #[error("inputs do not match the pattern: {0}")]
    InputMismatch(String),
    #[error("malformed key map: {0}")]
    MalformedKeys(String),
    #[error("strategy not valid in this mode: {0}")]
    StrategyMode(String),
}
