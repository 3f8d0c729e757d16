use std::collections::BTreeMap;

use num_complex::{Complex, Complex64};

use super::client::CLIENT_REF_BASE;
use super::server::ServerState;
use super::{
    Client, ClientSecrets, OutputKeyMaterial, Party, PartyInput, Phase, ProtocolError, ProtocolMessage, ProtocolSetup,
    RngStreams, Round, ServerBehaviour, ServerCtx, Transcript, VerificationVerdict,
};
use crate::graph::VertexId;
use crate::pattern::Angle;
use crate::qsim::{DensityMatrix, PauliPad, QuantumState, Qubit};
use crate::scalar::Scalar;

/// Label offset of the server's purifying reference qubits.
pub(crate) const SERVER_REF_BASE: Qubit = (1 << 30) + (1 << 20);
/// Label of the server's input qubit of a row before it is placed in DT(G).
pub(crate) const SERVER_INPUT_BASE: Qubit = (1 << 30) + (1 << 21);

/// Result of one execution.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub verdict: VerificationVerdict,
    /// `(δ, reported b)` per measured vertex, in order.
    pub rounds: Vec<Round>,
    pub transcript: Transcript,
    /// Joint state of `[output rows, client references, server references]`
    /// after both parties have decrypted what they could.
    pub final_state: DensityMatrix<f64>,
    /// Largest dense register the simulation needed.
    pub high_water: usize,
}

impl RunOutcome {
    pub fn fidelity(&self, ideal: &[Complex64]) -> f64 {
        self.final_state.fidelity_pure(ideal)
    }
}

/// Removes the pads on a returned output qubit: first the server's own `m`
/// pad, then `Z(θ) X^{kx} Z^{kz}`.
pub fn decrypt_output<T: Scalar>(
    engine: &mut QuantumState<T>,
    q: Qubit,
    key: &OutputKeyMaterial,
    b_of: impl Fn(VertexId) -> Option<u8>,
) -> Result<(), ProtocolError> {
    if let Some((mx, mz)) = key.m {
        engine.undo_pad(q, PauliPad::pauli(mx, mz))?;
    }
    engine.undo_pad(q, key.pad(b_of)?)?;
    Ok(())
}

fn ctx<'b>(setup: &'b ProtocolSetup, client: &'b Client, server: &dyn ServerBehaviour, rng: &'b mut rand_chacha::ChaCha8Rng) -> ServerCtx<'b> {
    let secrets = server.white_box().then_some(&client.secrets);
    ServerCtx { setup, secrets, rng }
}

/// One protocol execution, shared by the interactive and OTM-driven modes.
pub struct Execution<'a, T: Scalar = f64> {
    pub setup: &'a ProtocolSetup,
    pub client: Client<'a>,
    pub engine: QuantumState<T>,
    pub streams: RngStreams,
    pub server: ServerState,
    pub transcript: Transcript,
    pub rounds: Vec<Round>,
    client_refs: u32,
    server_refs: u32,
}

impl<'a, T: Scalar> Execution<'a, T> {
    pub fn new(setup: &'a ProtocolSetup, seed: u64) -> Result<Self, ProtocolError> {
        let mut streams = RngStreams::new(seed);
        let secrets = ClientSecrets::sample(setup, &mut streams.client)?;
        Ok(Self::with_secrets(setup, streams, secrets))
    }

    pub fn with_secrets(setup: &'a ProtocolSetup, streams: RngStreams, secrets: ClientSecrets) -> Self {
        Execution {
            setup,
            client: Client::new(setup, secrets),
            engine: QuantumState::new(),
            streams,
            server: ServerState::default(),
            transcript: Transcript::default(),
            rounds: Vec::new(),
            client_refs: 0,
            server_refs: 0,
        }
    }

    /// Server side of input injection: prepare, deviate, pad and send.
    pub fn inject(&mut self, server_input: &PartyInput, behaviour: &mut dyn ServerBehaviour) -> Result<BTreeMap<u32, Qubit>, ProtocolError> {
        let setup = self.setup;
        if server_input.rows != setup.server_input_rows() {
            return Err(ProtocolError::InputMismatch("server input rows differ from the setup".into()));
        }
        let mut labels: Vec<Qubit> = server_input.rows.iter().map(|r| SERVER_INPUT_BASE + r).collect();
        labels.extend((0..server_input.reference).map(|k| SERVER_REF_BASE + k));
        let amps: Vec<Complex<T>> = server_input.state.iter().map(|a| Complex::new(T::of(a.re), T::of(a.im))).collect();
        self.engine.prepare_register(&labels, &amps)?;
        self.server_refs = server_input.reference;
        let mut sent = BTreeMap::new();
        for &row in &server_input.rows {
            let q = SERVER_INPUT_BASE + row;
            let mut c = ctx(setup, &self.client, behaviour, &mut self.streams.server);
            if let Some(m) = behaviour.deviate_input(&mut c, row) {
                let m = m.map(|a| Complex::new(T::of(a.re), T::of(a.im)));
                self.engine.apply_1q(q, m)?;
            }
            let (mx, mz) = (rand::Rng::gen_range(&mut self.streams.server, 0..2u8), rand::Rng::gen_range(&mut self.streams.server, 0..2u8));
            self.engine.apply_pad(q, PauliPad::pauli(mx, mz))?;
            self.server.input_pads.insert(row, (mx, mz));
            sent.insert(row, q);
        }
        let qubits = server_input.rows.iter().map(|r| setup.input_base(*r)).collect();
        self.transcript.push(Phase::Injection, Party::Server, ProtocolMessage::QubitTransfer { qubits });
        Ok(sent)
    }

    /// Client prepares DT(G), the server reveals its input pads and the
    /// client updates its keys.
    pub fn prepare(&mut self, client_input: &PartyInput, server_qubits: &BTreeMap<u32, Qubit>) -> Result<(), ProtocolError> {
        let setup = self.setup;
        let order = self.client.prepare_all(&mut self.engine, client_input, server_qubits)?;
        self.client_refs = client_input.reference;
        self.transcript.push(Phase::Preparation, Party::Client, ProtocolMessage::QubitTransfer { qubits: order });
        let keys: BTreeMap<VertexId, (u8, u8)> =
            self.server.input_pads.iter().map(|(row, m)| (setup.input_base(*row), *m)).collect();
        if keys.len() != setup.server_input_rows().len() {
            return Err(ProtocolError::MalformedKeys("one key pair per server input expected".into()));
        }
        self.transcript.push(Phase::Preparation, Party::Server, ProtocolMessage::KeyReveal { keys });
        for (row, (mx, mz)) in self.server.input_pads.clone() {
            let v = self.client.secrets.input_vertex(setup, row);
            self.client.secrets.apply_server_keys(v, mx, mz)?;
        }
        Ok(())
    }

    /// What `behaviour` may see right now.
    pub fn server_ctx(&mut self, behaviour: &dyn ServerBehaviour) -> ServerCtx<'_> {
        ctx(self.setup, &self.client, behaviour, &mut self.streams.server)
    }

    /// CZ on every DT(G) edge.
    pub fn entangle(&mut self) -> Result<(), ProtocolError> {
        for &e in self.setup.dtg().edges() {
            self.server.entangle(&mut self.engine, e)?;
        }
        Ok(())
    }

    /// The server measures `v` at `delta`, applying any deviation first;
    /// returns the observed outcome.
    pub fn measure(&mut self, v: VertexId, delta: Angle, behaviour: &mut dyn ServerBehaviour) -> Result<u8, ProtocolError> {
        let mut c = ctx(self.setup, &self.client, behaviour, &mut self.streams.server);
        for p in behaviour.before_measure(&mut c, v) {
            p.apply(&mut self.engine, v.0)?;
        }
        let b = self.engine.measure_angle(v.0, delta, &mut self.streams.physics)?;
        self.server.outcomes.insert(v, b);
        Ok(b)
    }

    /// The next measured vertex in the public order.
    pub fn next_vertex(&self) -> Option<VertexId> {
        self.setup.order().measured.get(self.rounds.len()).copied()
    }

    /// One interactive round on `v`.
    pub fn round(&mut self, v: VertexId, behaviour: &mut dyn ServerBehaviour) -> Result<Round, ProtocolError> {
        if self.next_vertex() != Some(v) {
            return Err(ProtocolError::OutOfOrder(format!("vertex {v} is not next")));
        }
        let delta = self.client.delta(v)?;
        self.transcript.push(Phase::Evaluation, Party::Client, ProtocolMessage::AngleInstruction { vertex: v, delta });
        let b = self.measure(v, delta, behaviour)?;
        let mut c = ctx(self.setup, &self.client, behaviour, &mut self.streams.server);
        let b = behaviour.report(&mut c, v, b) & 1;
        self.transcript.push(Phase::Evaluation, Party::Server, ProtocolMessage::OutcomeReport { vertex: v, b });
        self.client.record(v, b);
        let round = Round { vertex: v, delta, b };
        self.rounds.push(round);
        Ok(round)
    }

    /// Output extraction and verification. `failed_flags` come from the
    /// OTM mode; measured traps are checked only when `check_measured`.
    pub fn extract(
        &mut self,
        behaviour: &mut dyn ServerBehaviour,
        failed_flags: Vec<VertexId>,
        check_measured: bool,
    ) -> Result<VerificationVerdict, ProtocolError> {
        let setup = self.setup;
        let dtg = setup.dtg();
        let outputs = setup.order().outputs.clone();
        let server_rows = setup.server_output_rows();
        for &v in &outputs {
            let mut c = ctx(setup, &self.client, behaviour, &mut self.streams.server);
            for p in behaviour.before_return(&mut c, v) {
                p.apply(&mut self.engine, v.0)?;
            }
        }
        for &row in &server_rows {
            for &v in dtg.primary_set(setup.output_base(row)).expect("output base vertex") {
                let (mx, mz) = (rand::Rng::gen_range(&mut self.streams.server, 0..2u8), rand::Rng::gen_range(&mut self.streams.server, 0..2u8));
                self.engine.apply_pad(v.0, PauliPad::pauli(mx, mz))?;
                self.server.output_pads.insert(v, (mx, mz));
            }
        }
        self.transcript.push(Phase::Extraction, Party::Server, ProtocolMessage::QubitTransfer { qubits: outputs.clone() });
        let returned: Vec<VertexId> = server_rows.iter().map(|r| self.client.secrets.output_vertex(setup, *r)).collect();
        self.transcript.push(Phase::Extraction, Party::Client, ProtocolMessage::QubitTransfer { qubits: returned.clone() });
        let pads = self.server.output_pads.clone();
        self.transcript.push(Phase::Extraction, Party::Server, ProtocolMessage::KeyReveal { keys: pads.clone() });

        let mut failed = if check_measured { self.client.failed_measured_traps() } else { Vec::new() };
        for &v in &outputs {
            if self.client.secrets.colouring.is_computation(v) {
                continue;
            }
            if let Some(&(mx, mz)) = pads.get(&v) {
                self.engine.undo_pad(v.0, PauliPad::pauli(mx, mz))?;
            }
            if self.client.secrets.is_dummy(v) {
                self.engine.measure_z(v.0, &mut self.streams.physics)?;
                continue;
            }
            let delta = self.client.secrets.theta(v).add_pi_times(self.client.secrets.r(v));
            let b = self.engine.measure_angle(v.0, delta, &mut self.streams.physics)?;
            if b != self.client.secrets.r(v) {
                failed.push(v);
            }
        }
        failed.sort();
        let verdict = VerificationVerdict::from_failures(failed, failed_flags);

        let reported = |j: VertexId| self.client.secrets.s.get(&j).map(|s| s ^ self.client.secrets.r(j));
        for row in setup.client_output_rows() {
            let o = self.client.secrets.output_vertex(setup, row);
            let key = self.client.output_key_material(o)?;
            decrypt_output(&mut self.engine, o.0, &key, reported)?;
        }
        if verdict.accepted {
            let mut keys = BTreeMap::new();
            for &o in &returned {
                let mut key = self.client.output_key_material(o)?;
                key.m = pads.get(&o).copied();
                keys.insert(o, key);
            }
            self.transcript.push(Phase::Extraction, Party::Client, ProtocolMessage::OutputKeyReveal { keys: keys.clone() });
            self.transcript.push(Phase::Verdict, Party::Client, ProtocolMessage::AcceptNotice);
            let observed = &self.server.outcomes;
            for (o, key) in &keys {
                decrypt_output(&mut self.engine, o.0, key, |j| observed.get(&j).copied())?;
            }
        } else {
            self.transcript.push(Phase::Verdict, Party::Client, ProtocolMessage::AbortNotice);
        }
        Ok(verdict)
    }

    /// Output qubits per row, then client and server references.
    pub fn output_qubits(&self) -> Vec<Qubit> {
        let mut qs: Vec<Qubit> = (0..self.setup.rows()).map(|r| self.client.secrets.output_vertex(self.setup, r).0).collect();
        qs.extend((0..self.client_refs).map(|k| CLIENT_REF_BASE + k));
        qs.extend((0..self.server_refs).map(|k| SERVER_REF_BASE + k));
        qs
    }

    pub fn finish(self, verdict: VerificationVerdict) -> Result<RunOutcome, ProtocolError> {
        let final_state = self.engine.reduced_density(&self.output_qubits())?.to_f64();
        Ok(RunOutcome {
            verdict,
            rounds: self.rounds,
            transcript: self.transcript,
            final_state,
            high_water: self.engine.high_water_mark(),
        })
    }
}

/// Interactive two-party evaluation: input injection, DT(G) preparation,
/// one round per measured vertex, then output extraction.
pub fn run_qyao(
    setup: &ProtocolSetup,
    client_input: &PartyInput,
    server_input: &PartyInput,
    behaviour: &mut dyn ServerBehaviour,
    seed: u64,
) -> Result<RunOutcome, ProtocolError> {
    let mut exec: Execution<f64> = Execution::new(setup, seed)?;
    let sent = exec.inject(server_input, behaviour)?;
    exec.prepare(client_input, &sent)?;
    exec.entangle()?;
    for v in setup.order().measured.clone() {
        exec.round(v, behaviour)?;
    }
    let verdict = exec.extract(behaviour, Vec::new(), true)?;
    exec.finish(verdict)
}
