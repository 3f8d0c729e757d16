use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::client::OutputKeyMaterial;
use crate::graph::VertexId;
use crate::pattern::{Angle, DtgOrder};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Injection,
    Preparation,
    Evaluation,
    Extraction,
    Verdict,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Party {
    Client,
    Server,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ProtocolMessage {
    QubitTransfer { qubits: Vec<VertexId> },
    AngleInstruction { vertex: VertexId, delta: Angle },
    OutcomeReport { vertex: VertexId, b: u8 },
    /// `(m_x, m_z)` per qubit.
    KeyReveal { keys: BTreeMap<VertexId, (u8, u8)> },
    OutputKeyReveal { keys: BTreeMap<VertexId, OutputKeyMaterial> },
    OtmDelivery { count: usize },
    /// Server-side record of opening the OTM of `vertex`; `delta` is absent
    /// for flag-only tokens.
    OtmOpen { vertex: VertexId, delta: Option<Angle> },
    FlagReturn { vertex: VertexId, flag: String },
    AbortNotice,
    AcceptNotice,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub seq: usize,
    pub phase: Phase,
    pub sender: Party,
    #[serde(flatten)]
    pub message: ProtocolMessage,
}

/// One measurement: the angle the server used and the outcome it reported.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Round {
    pub vertex: VertexId,
    pub delta: Angle,
    pub b: u8,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationVerdict {
    pub accepted: bool,
    pub failed_traps: Vec<VertexId>,
    /// OTMs whose returned flag was not the accept flag.
    #[serde(default)]
    pub failed_flags: Vec<VertexId>,
    /// Slot for aggregated acceptance statistics.
    #[serde(default)]
    pub p_ok: Option<f64>,
}

impl VerificationVerdict {
    pub fn from_failures(failed_traps: Vec<VertexId>, failed_flags: Vec<VertexId>) -> Self {
        VerificationVerdict {
            accepted: failed_traps.is_empty() && failed_flags.is_empty(),
            failed_traps,
            failed_flags,
            p_ok: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub entries: Vec<TranscriptEntry>,
}

impl Transcript {
    pub fn push(&mut self, phase: Phase, sender: Party, message: ProtocolMessage) {
        let seq = self.entries.len();
        self.entries.push(TranscriptEntry { seq, phase, sender, message });
    }

    pub fn accepted(&self) -> Option<bool> {
        self.entries.iter().rev().find_map(|e| match e.message {
            ProtocolMessage::AcceptNotice => Some(true),
            ProtocolMessage::AbortNotice => Some(false),
            _ => None,
        })
    }

    /// Checks the phase grammar: phases never go back, every outcome report
    /// follows the instruction (or OTM opening) for its vertex, measurements
    /// follow `order`, and the transcript ends with a verdict.
    pub fn validate(&self, order: &DtgOrder) -> Result<(), String> {
        let mut phase = Phase::Injection;
        let mut instructed = BTreeSet::new();
        let mut measured = Vec::new();
        for e in &self.entries {
            if e.phase < phase {
                return Err(format!("entry {} goes back to phase {:?}", e.seq, e.phase));
            }
            phase = e.phase;
            match &e.message {
                ProtocolMessage::AngleInstruction { vertex, .. } | ProtocolMessage::OtmOpen { vertex, .. } => {
                    if !instructed.insert(*vertex) {
                        return Err(format!("vertex {vertex} instructed twice"));
                    }
                    if !order.outputs.contains(vertex) {
                        measured.push(*vertex);
                    }
                }
                ProtocolMessage::OutcomeReport { vertex, .. } if !instructed.contains(vertex) => {
                    return Err(format!("outcome for {vertex} before its angle"));
                }
                ProtocolMessage::AcceptNotice | ProtocolMessage::AbortNotice if e.phase != Phase::Verdict => {
                    return Err("verdict outside the verdict phase".into());
                }
                _ => {}
            }
        }
        if measured != order.measured {
            return Err("measurements do not follow the public order".into());
        }
        match self.entries.last().map(|e| &e.message) {
            Some(ProtocolMessage::AcceptNotice | ProtocolMessage::AbortNotice) => Ok(()),
            _ => Err("transcript does not end with a verdict".into()),
        }
    }

    /// One JSON object per line.
    pub fn to_jsonl(&self) -> String {
        self.entries.iter().map(|e| serde_json::to_string(e).expect("serialisable") + "\n").collect()
    }
}
