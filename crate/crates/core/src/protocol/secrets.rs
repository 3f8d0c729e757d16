use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

use super::{ProtocolError, ProtocolSetup};
use crate::graph::{dummy_positions, sample_trap_colouring, TrapColouring, VertexId};
use crate::pattern::Angle;

/// Everything the client keeps hidden from the server.
///
/// Draw order from the client stream: colouring, θ for every DT(G) vertex in
/// label order, r likewise, d for every dummy in label order, then x for the
/// computation qubit of every input row. For server inputs the drawn θ and x
/// serve as θ' and x' until the server's keys arrive.
#[derive(Clone, Debug)]
pub struct ClientSecrets {
    pub colouring: TrapColouring,
    pub theta: Vec<Angle>,
    pub r: Vec<u8>,
    pub d: BTreeMap<VertexId, u8>,
    pub x: BTreeMap<VertexId, u8>,
    /// `s_i = b_i ⊕ r_i`, filled in as outcomes arrive.
    pub s: BTreeMap<VertexId, u8>,
    pub server_input_keys: BTreeMap<VertexId, (u8, u8)>,
}

impl ClientSecrets {
    pub fn sample<R: Rng + ?Sized>(setup: &ProtocolSetup, rng: &mut R) -> Result<Self, ProtocolError> {
        let dtg = setup.dtg();
        let colouring = sample_trap_colouring(dtg, rng);
        Self::with_colouring(setup, colouring, rng)
    }

    /// Samples everything except the colouring.
    pub fn with_colouring<R: Rng + ?Sized>(
        setup: &ProtocolSetup,
        colouring: TrapColouring,
        rng: &mut R,
    ) -> Result<Self, ProtocolError> {
        let dtg = setup.dtg();
        let n = dtg.len();
        let theta = (0..n).map(|_| Angle::from_eighths(rng.gen_range(0..8))).collect();
        let r = (0..n).map(|_| rng.gen_range(0..2u8)).collect();
        let dummies = dummy_positions(&colouring, dtg)?;
        let d = dummies.iter().map(|v| (*v, rng.gen_range(0..2u8))).collect();
        let mut secrets = ClientSecrets {
            colouring,
            theta,
            r,
            d,
            x: BTreeMap::new(),
            s: BTreeMap::new(),
            server_input_keys: BTreeMap::new(),
        };
        for row in 0..setup.rows() {
            let v = secrets.input_vertex(setup, row);
            secrets.x.insert(v, rng.gen_range(0..2u8));
        }
        Ok(secrets)
    }

    pub fn theta(&self, v: VertexId) -> Angle {
        self.theta[v.index()]
    }

    pub fn r(&self, v: VertexId) -> u8 {
        self.r[v.index()]
    }

    pub fn is_dummy(&self, v: VertexId) -> bool {
        self.d.contains_key(&v)
    }

    pub fn dummies(&self) -> BTreeSet<VertexId> {
        self.d.keys().copied().collect()
    }

    /// Input pad key of a computation input qubit; zero elsewhere.
    pub fn x(&self, v: VertexId) -> u8 {
        self.x.get(&v).copied().unwrap_or(0)
    }

    /// The computation primary of the input base-location of `row`.
    pub fn input_vertex(&self, setup: &ProtocolSetup, row: u32) -> VertexId {
        self.colouring.computation_vertex(setup.dtg(), setup.input_base(row)).expect("valid colouring")
    }

    /// The computation primary of the output base-location of `row`.
    pub fn output_vertex(&self, setup: &ProtocolSetup, row: u32) -> VertexId {
        self.colouring.computation_vertex(setup.dtg(), setup.output_base(row)).expect("valid colouring")
    }

    /// x := x' ⊕ m_x, θ := (−1)^{m_x} θ' + π m_z.
    pub fn apply_server_keys(&mut self, v: VertexId, m_x: u8, m_z: u8) -> Result<(), ProtocolError> {
        let x = self.x.get_mut(&v).ok_or(ProtocolError::MissingSecret(v))?;
        *x ^= m_x & 1;
        let t = &mut self.theta[v.index()];
        *t = t.signed(m_x).add_pi_times(m_z);
        self.server_input_keys.insert(v, (m_x & 1, m_z & 1));
        Ok(())
    }
}
