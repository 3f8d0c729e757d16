//! One-time memories and the non-interactive protocol.
//!
//! Every vertex outside the first layer gets a token with one cell per
//! assignment of outcomes to its extended past. A cell holds the angle the
//! client would have sent for that assignment and a flag: the vertex's accept
//! flag when every trap in the label matches its `r`, a fresh reject flag
//! otherwise. Final-layer tokens carry only the flag.

mod flag;

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicBool, Ordering};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use flag::{flag_guess_experiment, flag_length_for, FlagString};

use crate::graph::VertexId;
use crate::pattern::Angle;
use crate::protocol::{
    Client, Execution, Party, PartyInput, Phase, ProtocolError, ProtocolMessage, ProtocolSetup, RunOutcome,
    ServerBehaviour,
};

#[derive(Debug, Error)]
pub enum OtmError {
    #[error("one-time memory of vertex {0} already read")]
    Destroyed(VertexId),
    #[error("label {label} out of range for the {cells} cells of vertex {vertex}")]
    InvalidLabel { vertex: VertexId, label: usize, cells: usize },
    #[error("epsilon {0} outside (0, 1)")]
    EpsilonRange(f64),
    #[error("flag length {got} below the {need} bits required")]
    FlagTooShort { got: u32, need: u32 },
    #[error("no flag returned for vertex {0}")]
    MissingFlag(VertexId),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

/// Claimed outcomes `b_{j;i}` for every `j` in EP_i.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpOutcomeLabel {
    #[serde(with = "crate::graph::keys")]
    pub bits: BTreeMap<VertexId, u8>,
}

impl EpOutcomeLabel {
    /// Cell index: the first vertex of `ep` is the most significant bit.
    pub fn index(&self, ep: &[VertexId]) -> Option<usize> {
        ep.iter().try_fold(0usize, |acc, j| Some((acc << 1) | (*self.bits.get(j)? & 1) as usize))
    }

    pub fn from_index(ep: &[VertexId], index: usize) -> Self {
        let n = ep.len();
        let bits = ep.iter().enumerate().map(|(k, j)| (*j, ((index >> (n - 1 - k)) & 1) as u8)).collect();
        EpOutcomeLabel { bits }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OtmPayload {
    /// Absent for final-layer tokens.
    pub delta: Option<Angle>,
    pub flag: FlagString,
}

/// A single-read token. Reading marks it consumed before returning, with an
/// atomic check-and-set, so no two reads can both succeed.
#[derive(Debug)]
pub struct OneTimeMemory {
    vertex: VertexId,
    ep: Vec<VertexId>,
    cells: Vec<OtmPayload>,
    consumed: AtomicBool,
}

impl OneTimeMemory {
    pub fn new(vertex: VertexId, ep: Vec<VertexId>, cells: Vec<OtmPayload>) -> Self {
        OneTimeMemory { vertex, ep, cells, consumed: AtomicBool::new(false) }
    }

    pub fn vertex(&self) -> VertexId {
        self.vertex
    }

    /// The public label order.
    pub fn extended_past(&self) -> &[VertexId] {
        &self.ep
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn is_consumed(&self) -> bool {
        self.consumed.load(Ordering::SeqCst)
    }

    /// Reveals one cell and destroys the rest. An out-of-range label is
    /// rejected without consuming the token.
    pub fn read(&self, label: usize) -> Result<OtmPayload, OtmError> {
        if label >= self.cells.len() {
            return Err(OtmError::InvalidLabel { vertex: self.vertex, label, cells: self.cells.len() });
        }
        if self.consumed.swap(true, Ordering::SeqCst) {
            return Err(OtmError::Destroyed(self.vertex));
        }
        Ok(self.cells[label].clone())
    }
}

/// One exported cell, for client-side debugging.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OtmTableRow {
    pub vertex: VertexId,
    /// Label bits in extended-past order.
    pub label: String,
    /// δ in eighth-turns.
    pub delta: Option<u8>,
    pub flag: String,
}

/// The client's full view of the prepared tokens.
#[derive(Clone, Debug)]
pub struct OtmTable {
    /// Angles sent directly to first-layer vertices.
    pub direct: BTreeMap<VertexId, Angle>,
    pub cells: BTreeMap<VertexId, (Vec<VertexId>, Vec<OtmPayload>)>,
    /// `l⁰_i` per token.
    pub accept: BTreeMap<VertexId, FlagString>,
    pub flag_len: u32,
}

impl OtmTable {
    /// The tokens handed to the server.
    pub fn tokens(&self) -> BTreeMap<VertexId, OneTimeMemory> {
        self.cells.iter().map(|(v, (ep, cells))| (*v, OneTimeMemory::new(*v, ep.clone(), cells.clone()))).collect()
    }

    pub fn rows(&self) -> Vec<OtmTableRow> {
        let mut out = Vec::new();
        for (v, (ep, cells)) in &self.cells {
            for (k, cell) in cells.iter().enumerate() {
                let label = (0..ep.len()).map(|b| if (k >> (ep.len() - 1 - b)) & 1 == 1 { '1' } else { '0' }).collect();
                out.push(OtmTableRow { vertex: *v, label, delta: cell.delta.map(Angle::eighths), flag: cell.flag.to_hex() });
            }
        }
        out
    }

    pub fn to_jsonl(&self) -> String {
        self.rows().iter().map(|r| serde_json::to_string(r).expect("serialisable") + "\n").collect()
    }
}

/// Fills one token per vertex with a non-empty extended past.
pub fn prepare_otms<R: Rng + ?Sized>(client: &Client, flag_len: u32, rng: &mut R) -> Result<OtmTable, OtmError> {
    let setup = client.setup();
    let dtg = setup.dtg();
    let secrets = &client.secrets;
    let order = setup.order();
    let mut table = OtmTable { direct: BTreeMap::new(), cells: BTreeMap::new(), accept: BTreeMap::new(), flag_len };
    for v in order.measured.iter().chain(&order.outputs).copied() {
        let final_layer = order.outputs.contains(&v);
        let ep = setup.extended_past(v).to_vec();
        if ep.is_empty() {
            if !final_layer {
                table.direct.insert(v, client.delta(v)?);
            }
            continue;
        }
        let accept = FlagString::random(flag_len, rng);
        let traps: Vec<usize> = (0..ep.len()).filter(|k| secrets.colouring.is_trap(dtg, ep[*k])).collect();
        let mut cells = Vec::with_capacity(1 << ep.len());
        for index in 0..1usize << ep.len() {
            let label = EpOutcomeLabel::from_index(&ep, index);
            let delta = if final_layer {
                None
            } else {
                Some(client.delta_with(v, |j| label.bits.get(&j).map(|b| b ^ secrets.r(j)))?)
            };
            let honest = traps.iter().all(|k| label.bits[&ep[*k]] == secrets.r(ep[*k]));
            let flag = if honest { accept.clone() } else { FlagString::random_other(flag_len, &accept, rng) };
            cells.push(OtmPayload { delta, flag });
        }
        table.cells.insert(v, (ep, cells));
        table.accept.insert(v, accept);
    }
    Ok(table)
}

fn open_token(
    exec: &mut Execution<f64>,
    tokens: &BTreeMap<VertexId, OneTimeMemory>,
    v: VertexId,
    behaviour: &mut dyn ServerBehaviour,
    flags: &mut BTreeMap<VertexId, FlagString>,
) -> Result<Option<Angle>, OtmError> {
    let token = &tokens[&v];
    let mut bits = BTreeMap::new();
    for &j in token.extended_past() {
        let b = *exec.server.outcomes.get(&j).ok_or(ProtocolError::MissingOutcome(j))?;
        let mut ctx = exec.server_ctx(behaviour);
        bits.insert(j, behaviour.otm_label_bit(&mut ctx, v, j, b) & 1);
    }
    let label = EpOutcomeLabel { bits };
    let payload = token.read(label.index(token.extended_past()).expect("complete label"))?;
    exec.transcript.push(Phase::Evaluation, Party::Server, ProtocolMessage::OtmOpen { vertex: v, delta: payload.delta });
    let mut ctx = exec.server_ctx(behaviour);
    let flag = behaviour.return_flag(&mut ctx, v, payload.flag);
    flags.insert(v, flag);
    Ok(payload.delta)
}

/// Result of a non-interactive execution.
#[derive(Clone, Debug)]
pub struct NonInteractiveOutcome {
    pub outcome: RunOutcome,
    /// Flags as returned by the server.
    pub flags: BTreeMap<VertexId, FlagString>,
    /// The client's token table, for debugging.
    pub table: OtmTable,
}

/// OTM-driven evaluation: the server measures in the public order using
/// direct angles for the first layer and one token per later vertex, then
/// reports its outcomes and flags; the client checks flags and final traps.
pub fn run_noninteractive(
    setup: &ProtocolSetup,
    client_input: &PartyInput,
    server_input: &PartyInput,
    behaviour: &mut dyn ServerBehaviour,
    seed: u64,
    flag_len: u32,
) -> Result<NonInteractiveOutcome, OtmError> {
    let mut exec: Execution<f64> = Execution::new(setup, seed)?;
    let sent = exec.inject(server_input, behaviour)?;
    exec.prepare(client_input, &sent)?;
    exec.entangle()?;
    let table = prepare_otms(&exec.client, flag_len, &mut exec.streams.otm)?;
    let tokens = table.tokens();
    exec.transcript.push(Phase::Preparation, Party::Client, ProtocolMessage::OtmDelivery { count: tokens.len() });

    let order = setup.order();
    let mut flags = BTreeMap::new();
    let mut observed = Vec::new();
    for &v in &order.measured {
        let delta = match table.direct.get(&v) {
            Some(d) => {
                exec.transcript.push(Phase::Evaluation, Party::Client, ProtocolMessage::AngleInstruction { vertex: v, delta: *d });
                *d
            }
            None => open_token(&mut exec, &tokens, v, behaviour, &mut flags)?.expect("measured tokens carry an angle"),
        };
        let b = exec.measure(v, delta, behaviour)?;
        observed.push((v, delta, b));
    }
    for &v in &order.outputs {
        if tokens.contains_key(&v) {
            open_token(&mut exec, &tokens, v, behaviour, &mut flags)?;
        }
    }
    for (v, delta, b) in observed {
        let mut ctx = exec.server_ctx(behaviour);
        let b = behaviour.report(&mut ctx, v, b) & 1;
        exec.transcript.push(Phase::Evaluation, Party::Server, ProtocolMessage::OutcomeReport { vertex: v, b });
        exec.client.record(v, b);
        exec.rounds.push(crate::protocol::Round { vertex: v, delta, b });
    }
    let mut failed_flags = Vec::new();
    for (v, accept) in &table.accept {
        let flag = flags.get(v).ok_or(OtmError::MissingFlag(*v))?;
        exec.transcript.push(Phase::Evaluation, Party::Server, ProtocolMessage::FlagReturn { vertex: *v, flag: flag.to_hex() });
        if flag != accept {
            failed_flags.push(*v);
        }
    }
    let verdict = exec.extract(behaviour, failed_flags, false)?;
    Ok(NonInteractiveOutcome { outcome: exec.finish(verdict)?, flags, table })
}
