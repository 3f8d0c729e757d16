use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::ProtocolError;
use crate::graph::{dotted_triple_graph, extended_pasts, DottedDependencies, DtgGraph, VertexId};
use crate::pattern::{dtg_measurement_order, DtgOrder, MeasurementPattern};

/// Public data both parties agree on before a run.
#[derive(Clone, Debug)]
pub struct ProtocolSetup {
    pattern: MeasurementPattern,
    dtg: DtgGraph,
    dd: DottedDependencies,
    order: DtgOrder,
    server_inputs: BTreeSet<u32>,
    server_outputs: BTreeSet<u32>,
    extended: BTreeMap<VertexId, Vec<VertexId>>,
}

impl ProtocolSetup {
    /// `server_inputs` / `server_outputs` are the rows whose input / output
    /// base-locations belong to the server; the client owns the rest.
    pub fn new(pattern: MeasurementPattern, server_inputs: &[u32], server_outputs: &[u32]) -> Result<Self, ProtocolError> {
        let rows = pattern.rows();
        if let Some(r) = server_inputs.iter().chain(server_outputs).find(|r| **r >= rows) {
            return Err(ProtocolError::InputMismatch(format!("row {r} out of range for {rows} rows")));
        }
        let dtg = dotted_triple_graph(pattern.base())?;
        let dd = DottedDependencies::new(&dtg)?;
        let order = dtg_measurement_order(&dtg, &dd.flow);
        let extended = extended_pasts(&dtg, &dd)?.into_iter().map(|(v, s)| (v, s.into_iter().collect())).collect();
        Ok(ProtocolSetup {
            pattern,
            dtg,
            dd,
            order,
            server_inputs: server_inputs.iter().copied().collect(),
            server_outputs: server_outputs.iter().copied().collect(),
            extended,
        })
    }

    pub fn pattern(&self) -> &MeasurementPattern {
        &self.pattern
    }

    pub fn dtg(&self) -> &DtgGraph {
        &self.dtg
    }

    pub fn dotted_deps(&self) -> &DottedDependencies {
        &self.dd
    }

    pub fn order(&self) -> &DtgOrder {
        &self.order
    }

    pub fn rows(&self) -> u32 {
        self.pattern.rows()
    }

    pub fn input_base(&self, row: u32) -> VertexId {
        self.pattern.input_wires()[row as usize]
    }

    pub fn output_base(&self, row: u32) -> VertexId {
        self.pattern.output_wires()[row as usize]
    }

    pub fn server_input_rows(&self) -> Vec<u32> {
        self.server_inputs.iter().copied().collect()
    }

    pub fn server_output_rows(&self) -> Vec<u32> {
        self.server_outputs.iter().copied().collect()
    }

    pub fn client_input_rows(&self) -> Vec<u32> {
        (0..self.rows()).filter(|r| !self.server_inputs.contains(r)).collect()
    }

    pub fn client_output_rows(&self) -> Vec<u32> {
        (0..self.rows()).filter(|r| !self.server_outputs.contains(r)).collect()
    }

    pub fn is_server_input_row(&self, row: u32) -> bool {
        self.server_inputs.contains(&row)
    }

    pub fn is_server_output_row(&self, row: u32) -> bool {
        self.server_outputs.contains(&row)
    }

    /// Row of an input or output base vertex.
    pub fn row_of(&self, base: VertexId) -> Option<u32> {
        (0..self.rows()).find(|r| self.input_base(*r) == base || self.output_base(*r) == base)
    }

    /// EP_i, sorted; the bit order of OTM labels.
    pub fn extended_past(&self, v: VertexId) -> &[VertexId] {
        &self.extended[&v]
    }

    pub fn max_extended_past(&self) -> usize {
        self.extended.values().map(Vec::len).max().unwrap_or(0)
    }

    /// Vertices with an empty extended past, which get their angle directly.
    pub fn is_first_layer(&self, v: VertexId) -> bool {
        self.extended[&v].is_empty()
    }
}

/// One party's input: a pure state on its `rows` followed by `reference`
/// purifying qubits that never enter the protocol.
#[derive(Clone, Debug, PartialEq)]
pub struct PartyInput {
    pub rows: Vec<u32>,
    pub state: Vec<Complex64>,
    pub reference: u32,
}

impl PartyInput {
    pub fn new(rows: Vec<u32>, state: Vec<Complex64>, reference: u32) -> Result<Self, ProtocolError> {
        let n = rows.len() + reference as usize;
        if state.len() != 1 << n {
            return Err(ProtocolError::InputMismatch(format!("{} amplitudes for {n} qubits", state.len())));
        }
        let norm: f64 = state.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(ProtocolError::InputMismatch(format!("state has norm² {norm}")));
        }
        Ok(PartyInput { rows, state, reference })
    }

    pub fn none() -> Self {
        PartyInput { rows: Vec::new(), state: vec![Complex64::new(1.0, 0.0)], reference: 0 }
    }

    /// Computational-basis product state.
    pub fn basis(rows: Vec<u32>, bits: &[u8]) -> Result<Self, ProtocolError> {
        let singles: Vec<[Complex64; 2]> = bits
            .iter()
            .map(|b| if b & 1 == 0 { [1.0.into(), 0.0.into()] } else { [0.0.into(), 1.0.into()] })
            .collect();
        Self::product(rows, &singles)
    }

    pub fn product(rows: Vec<u32>, singles: &[[Complex64; 2]]) -> Result<Self, ProtocolError> {
        if singles.len() != rows.len() {
            return Err(ProtocolError::InputMismatch("one single-qubit state per row expected".into()));
        }
        let mut state = vec![Complex64::new(1.0, 0.0)];
        for s in singles {
            let n = (s[0].norm_sqr() + s[1].norm_sqr()).sqrt();
            state = state.iter().flat_map(|a| [a * s[0] / n, a * s[1] / n]).collect();
        }
        Self::new(rows, state, 0)
    }

    pub fn qubits(&self) -> usize {
        self.rows.len() + self.reference as usize
    }
}

/// Reorders a state over `src` labels into `dst` order (same label set).
fn permute(state: &[Complex64], src: &[u32], dst: &[u32]) -> Vec<Complex64> {
    let n = src.len();
    let pos: Vec<usize> = dst.iter().map(|l| src.iter().position(|s| s == l).expect("same labels")).collect();
    let mut out = vec![Complex64::new(0.0, 0.0); state.len()];
    for (i, a) in state.iter().enumerate() {
        let mut j = 0;
        for (p, &k) in pos.iter().enumerate() {
            j |= ((i >> (n - 1 - k)) & 1) << (n - 1 - p);
        }
        out[j] = *a;
    }
    out
}

/// Joint input over `[row 0 .. row n-1, client references, server references]`.
pub fn joint_input_state(rows: u32, client: &PartyInput, server: &PartyInput) -> Result<Vec<Complex64>, ProtocolError> {
    let mut seen: Vec<u32> = client.rows.iter().chain(&server.rows).copied().collect();
    seen.sort();
    if seen != (0..rows).collect::<Vec<_>>() {
        return Err(ProtocolError::InputMismatch("client and server rows must partition the inputs".into()));
    }
    let (cr, sr) = (client.reference, server.reference);
    let mut src: Vec<u32> = client.rows.clone();
    src.extend((0..cr).map(|k| rows + k));
    src.extend(&server.rows);
    src.extend((0..sr).map(|k| rows + cr + k));
    let joint: Vec<Complex64> = client.state.iter().flat_map(|a| server.state.iter().map(move |b| a * b)).collect();
    let dst: Vec<u32> = (0..rows + cr + sr).collect();
    Ok(permute(&joint, &src, &dst))
}

/// (U ⊗ I)|in⟩ with `unitary` acting on the `rows` wires.
pub fn ideal_output(
    unitary: &[Complex64],
    rows: u32,
    client: &PartyInput,
    server: &PartyInput,
) -> Result<Vec<Complex64>, ProtocolError> {
    let input = joint_input_state(rows, client, server)?;
    let d = 1usize << rows;
    if unitary.len() != d * d {
        return Err(ProtocolError::InputMismatch("unitary size does not match the rows".into()));
    }
    let e = input.len() / d;
    let mut out = vec![Complex64::new(0.0, 0.0); input.len()];
    for i in 0..d {
        for j in 0..d {
            let u = unitary[i * d + j];
            if u.norm_sqr() == 0.0 {
                continue;
            }
            for k in 0..e {
                out[i * e + k] += u * input[j * e + k];
            }
        }
    }
    Ok(out)
}

/// Independent random streams of one execution, all derived from one seed.
///
/// Keeping the client's secrets, the server's choices, measurement collapse
/// and OTM flags apart makes interactive and non-interactive runs with the
/// same seed draw identical secrets and outcomes.
pub struct RngStreams {
    pub client: ChaCha8Rng,
    pub server: ChaCha8Rng,
    pub physics: ChaCha8Rng,
    pub otm: ChaCha8Rng,
}

impl RngStreams {
    pub fn new(seed: u64) -> Self {
        let stream = |k: u64| {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            r.set_stream(k);
            r
        };
        RngStreams { client: stream(0), server: stream(1), physics: stream(2), otm: stream(3) }
    }
}
