use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{ClientSecrets, PartyInput, ProtocolError, ProtocolSetup};
use crate::graph::{past_under, Colour, ColouredPast, VertexId};
use crate::pattern::Angle;
use crate::qsim::{PauliPad, Qubit, QuantumState};
use crate::scalar::Scalar;

/// Label offset of the client's purifying reference qubits.
pub(crate) const CLIENT_REF_BASE: Qubit = 1 << 30;

/// Final-layer padding the client reveals for one output qubit: the phase key
/// and the r's of every measured qubit whose outcome corrects it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputKeyMaterial {
    pub theta: Angle,
    pub r: u8,
    /// `(j, r_j)` for the X-corrections.
    pub x_deps: Vec<(VertexId, u8)>,
    /// `(j, r_j)` for the Z-corrections.
    pub z_deps: Vec<(VertexId, u8)>,
    /// Input pad bits that add a Z-correction.
    pub input_keys: Vec<(VertexId, u8)>,
    /// Constant X key (the input pad of an output that is also an input).
    #[serde(default)]
    pub x_key: u8,
    /// The server's own `(m_x, m_z)` for the returned qubit.
    #[serde(default)]
    pub m: Option<(u8, u8)>,
}

impl OutputKeyMaterial {
    /// The pad `Z(θ) X^{kx} Z^{kz}` on the output, given the raw outcomes.
    pub fn pad(&self, b_of: impl Fn(VertexId) -> Option<u8>) -> Result<PauliPad, ProtocolError> {
        let fold = |deps: &[(VertexId, u8)]| -> Result<u8, ProtocolError> {
            deps.iter().try_fold(0u8, |acc, (j, r)| Ok(acc ^ b_of(*j).ok_or(ProtocolError::MissingOutcome(*j))? ^ r))
        };
        let x = fold(&self.x_deps)? ^ self.x_key;
        let z = fold(&self.z_deps)? ^ self.input_keys.iter().fold(0, |a, (_, k)| a ^ k);
        Ok(PauliPad { x, z, phase: self.theta })
    }
}

/// The client's side of one execution.
#[derive(Clone, Debug)]
pub struct Client<'a> {
    setup: &'a ProtocolSetup,
    pub secrets: ClientSecrets,
    pasts: BTreeMap<VertexId, ColouredPast>,
    dummy_parity: Vec<u8>,
}

impl<'a> Client<'a> {
    pub fn new(setup: &'a ProtocolSetup, secrets: ClientSecrets) -> Self {
        let dtg = setup.dtg();
        let pasts = dtg
            .vertices()
            .iter()
            .filter(|v| secrets.colouring.is_computation(v.id))
            .map(|v| (v.id, past_under(dtg, setup.dotted_deps(), &secrets.colouring, v.id)))
            .collect();
        let dummy_parity = dtg
            .vertices()
            .iter()
            .map(|v| dtg.neighbours(v.id).iter().fold(0, |acc, j| acc ^ secrets.d.get(j).copied().unwrap_or(0)))
            .collect();
        Client { setup, secrets, pasts, dummy_parity }
    }

    pub fn setup(&self) -> &'a ProtocolSetup {
        self.setup
    }

    /// Dependencies of a computation vertex; `None` for traps and dummies.
    pub fn past(&self, v: VertexId) -> Option<&ColouredPast> {
        self.pasts.get(&v)
    }

    /// Parity of the dummy bits `d_j` over the DT(G) neighbours of `v`.
    pub fn dummy_parity(&self, v: VertexId) -> u8 {
        self.dummy_parity[v.index()]
    }

    pub fn is_input_computation(&self, v: VertexId) -> bool {
        self.secrets.colouring.colour(v) == Colour::Blue
    }

    fn corrections(&self, past: &ColouredPast, s_of: &impl Fn(VertexId) -> Option<u8>) -> Result<(u8, u8), ProtocolError> {
        let fold = |vs: &std::collections::BTreeSet<VertexId>| -> Result<u8, ProtocolError> {
            vs.iter().try_fold(0u8, |acc, j| Ok(acc ^ s_of(*j).ok_or(ProtocolError::MissingOutcome(*j))?))
        };
        let sx = fold(&past.x)?;
        let sz = fold(&past.z)? ^ past.input_z.iter().fold(0, |a, k| a ^ self.secrets.x(*k));
        Ok((sx, sz))
    }

    /// δ_v given corrected outcomes `s_j` for its past.
    ///
    /// Traps and dummies get `θ + πr`. An input qubit `X^x Z(θ)|ψ⟩` that sits
    /// next to dummies also needs `x` and the dummy parity folded in.
    pub fn delta_with(&self, v: VertexId, s_of: impl Fn(VertexId) -> Option<u8>) -> Result<Angle, ProtocolError> {
        let (theta, r) = (self.secrets.theta(v), self.secrets.r(v));
        let Some(past) = self.pasts.get(&v) else {
            return Ok(theta.add_pi_times(r));
        };
        let site = self.setup.dtg().dotted_site(v);
        let phi = self.setup.pattern().phi(site).ok_or(ProtocolError::MissingSecret(v))?;
        let (sx, sz) = self.corrections(past, &s_of)?;
        let corrected = phi.signed(sx).add_pi_times(sz);
        if self.is_input_computation(v) {
            Ok((corrected + theta).signed(self.secrets.x(v)).add_pi_times(r ^ self.dummy_parity(v)))
        } else {
            Ok((corrected + theta).add_pi_times(r))
        }
    }

    pub fn delta(&self, v: VertexId) -> Result<Angle, ProtocolError> {
        self.delta_with(v, |j| self.secrets.s.get(&j).copied())
    }

    /// Records a reported outcome: `s_v = b ⊕ r_v`.
    pub fn record(&mut self, v: VertexId, b: u8) {
        let s = (b ^ self.secrets.r(v)) & 1;
        self.secrets.s.insert(v, s);
    }

    /// Key material for the output computation qubit `o`.
    pub fn output_key_material(&self, o: VertexId) -> Result<OutputKeyMaterial, ProtocolError> {
        let past = self.pasts.get(&o).ok_or(ProtocolError::MissingSecret(o))?;
        let (theta, r) = (self.secrets.theta(o), self.secrets.r(o));
        let with_r = |vs: &std::collections::BTreeSet<VertexId>| vs.iter().map(|j| (*j, self.secrets.r(*j))).collect();
        if self.is_input_computation(o) {
            // Z^D X^x Z(θ) = Z((−1)^x (θ + πD)) X^x
            let x = self.secrets.x(o);
            let (_, sz) = self.corrections(past, &|j| self.secrets.s.get(&j).copied())?;
            return Ok(OutputKeyMaterial {
                theta: theta.add_pi_times(self.dummy_parity(o) ^ sz).signed(x),
                r,
                x_deps: Vec::new(),
                z_deps: Vec::new(),
                input_keys: Vec::new(),
                x_key: x,
                m: None,
            });
        }
        Ok(OutputKeyMaterial {
            theta,
            r,
            x_deps: with_r(&past.x),
            z_deps: with_r(&past.z),
            input_keys: past.input_z.iter().map(|k| (*k, self.secrets.x(*k))).collect(),
            x_key: 0,
            m: None,
        })
    }

    /// Output pad computed from the client's own record of `s`.
    pub fn output_key(&self, o: VertexId) -> Result<PauliPad, ProtocolError> {
        let m = self.output_key_material(o)?;
        m.pad(|j| self.secrets.s.get(&j).map(|s| s ^ self.secrets.r(j)))
    }

    /// Prepares every DT(G) qubit in the engine, labelled by vertex id.
    ///
    /// `server_qubits` maps each server input row to the engine label of the
    /// padded qubit the server sent; it is relabelled into its slot here.
    pub fn prepare_all<T: Scalar>(
        &self,
        engine: &mut QuantumState<T>,
        client_input: &PartyInput,
        server_qubits: &BTreeMap<u32, Qubit>,
    ) -> Result<Vec<VertexId>, ProtocolError> {
        let setup = self.setup;
        let s = &self.secrets;
        if client_input.rows != setup.client_input_rows() {
            return Err(ProtocolError::InputMismatch("client input rows differ from the setup".into()));
        }
        let mut labels: Vec<Qubit> = client_input.rows.iter().map(|r| s.input_vertex(setup, *r).0).collect();
        labels.extend((0..client_input.reference).map(|k| CLIENT_REF_BASE + k));
        let amps: Vec<_> = client_input
            .state
            .iter()
            .map(|a| num_complex::Complex::new(T::of(a.re), T::of(a.im)))
            .collect();
        engine.prepare_register(&labels, &amps)?;
        for row in setup.server_input_rows() {
            let q = *server_qubits.get(&row).ok_or_else(|| ProtocolError::InputMismatch(format!("no qubit for server row {row}")))?;
            engine.relabel(q, s.input_vertex(setup, row).0)?;
        }
        for row in 0..setup.rows() {
            let v = s.input_vertex(setup, row);
            engine.z_rotation(v.0, s.theta(v).radians())?;
            if s.x(v) == 1 {
                engine.x(v.0)?;
            }
        }
        let mut order = Vec::with_capacity(setup.dtg().len());
        for vertex in setup.dtg().vertices() {
            let v = vertex.id;
            order.push(v);
            if self.is_input_computation(v) {
                continue;
            }
            match s.d.get(&v) {
                Some(d) => engine.prepare_dummy(v.0, *d)?,
                None => engine.prepare_plus_theta(v.0, s.theta(v).add_pi_times(self.dummy_parity(v)))?,
            }
        }
        Ok(order)
    }

    /// Measured traps whose reported outcome differs from `r`.
    pub fn failed_measured_traps(&self) -> Vec<VertexId> {
        let dtg = self.setup.dtg();
        self.setup
            .order()
            .measured
            .iter()
            .copied()
            .filter(|t| self.secrets.colouring.is_trap(dtg, *t) && self.secrets.s.get(t).copied() != Some(0))
            .collect()
    }
}
