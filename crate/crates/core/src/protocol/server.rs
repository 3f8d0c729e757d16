use std::collections::{BTreeMap, BTreeSet};

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ClientSecrets, ProtocolError, ProtocolSetup};
use crate::graph::{Edge, VertexId};
use crate::otm::FlagString;
use crate::qsim::{QuantumState, Qubit};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn apply<T: Scalar>(self, engine: &mut QuantumState<T>, q: Qubit) -> Result<(), ProtocolError> {
        match self {
            Pauli::X => engine.x(q)?,
            Pauli::Y => engine.y(q)?,
            Pauli::Z => engine.z(q)?,
        }
        Ok(())
    }
}

/// What a server strategy may look at.
pub struct ServerCtx<'a> {
    pub setup: &'a ProtocolSetup,
    /// The client's secrets; only present for white-box test strategies.
    pub secrets: Option<&'a ClientSecrets>,
    pub rng: &'a mut ChaCha8Rng,
}

/// Hooks for server deviations. Every default is the honest action.
pub trait ServerBehaviour {
    /// White-box strategies are shown the client's secrets (test mode only).
    fn white_box(&self) -> bool {
        false
    }

    /// A 2×2 operator applied to the server's input on `row` before padding.
    fn deviate_input(&mut self, _ctx: &mut ServerCtx, _row: u32) -> Option<[Complex64; 4]> {
        None
    }

    /// Paulis applied to `v` just before it is measured.
    fn before_measure(&mut self, _ctx: &mut ServerCtx, _v: VertexId) -> Vec<Pauli> {
        Vec::new()
    }

    /// The outcome reported for `v`, given the observed `b`.
    fn report(&mut self, _ctx: &mut ServerCtx, _v: VertexId, b: u8) -> u8 {
        b
    }

    /// Paulis applied to output-layer qubit `v` before it is sent back.
    fn before_return(&mut self, _ctx: &mut ServerCtx, _v: VertexId) -> Vec<Pauli> {
        Vec::new()
    }

    /// The bit used for `j` when opening the OTM of `i`.
    fn otm_label_bit(&mut self, _ctx: &mut ServerCtx, _i: VertexId, _j: VertexId, b: u8) -> u8 {
        b
    }

    /// The flag returned for the OTM of `i`.
    fn return_flag(&mut self, _ctx: &mut ServerCtx, _i: VertexId, flag: FlagString) -> FlagString {
        flag
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct HonestServer;

impl ServerBehaviour for HonestServer {}

/// Server-side bookkeeping of one execution.
#[derive(Clone, Debug, Default)]
pub struct ServerState {
    entangled: BTreeSet<Edge>,
    /// Outcomes as observed (not as reported).
    pub outcomes: BTreeMap<VertexId, u8>,
    /// Pads on the server's input qubits, per row.
    pub input_pads: BTreeMap<u32, (u8, u8)>,
    /// Pads on the output-layer qubits of server output rows.
    pub output_pads: BTreeMap<VertexId, (u8, u8)>,
}

impl ServerState {
    /// Applies one CZ; each edge may be entangled once.
    pub fn entangle<T: Scalar>(&mut self, engine: &mut QuantumState<T>, edge: Edge) -> Result<(), ProtocolError> {
        if !self.entangled.insert(edge) {
            return Err(ProtocolError::DoubleEntangle(edge.lo(), edge.hi()));
        }
        engine.cz(edge.lo().0, edge.hi().0)?;
        Ok(())
    }

    pub fn entangled(&self) -> usize {
        self.entangled.len()
    }
}
