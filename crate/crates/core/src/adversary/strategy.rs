use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::AdversaryError;
use crate::graph::VertexId;
use crate::otm::FlagString;
use crate::protocol::{Pauli, ProtocolSetup, ServerBehaviour, ServerCtx};

/// When a Pauli deviation is applied.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhasePoint {
    /// Just before the server measures the qubit.
    BeforeMeasurement,
    /// On an output-layer qubit, before it is sent back.
    OnOutput,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PauliTarget {
    pub vertex: VertexId,
    pub pauli: Pauli,
    pub point: PhasePoint,
}

/// `b_{j;i}` flipped when opening the token of `i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelFlip {
    pub i: VertexId,
    pub j: VertexId,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "interactive")]
    Interactive,
    #[serde(rename = "noninteractive")]
    NonInteractive,
}

/// A malicious-server strategy, as read from a strategy file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "attack", rename_all = "snake_case")]
pub enum AttackStrategy {
    Honest,
    /// Fixed Paulis on fixed DT(G) vertices.
    PauliAttack { targets: Vec<PauliTarget> },
    /// One Pauli on a primary of `base_vertex` picked uniformly per run.
    RandomPrimary { base_vertex: VertexId, pauli: Pauli, point: PhasePoint },
    /// Flips the reported outcome of the listed vertices (bit 1 = flip).
    OutcomeLie {
        #[serde(with = "crate::graph::keys")]
        flips: BTreeMap<VertexId, u8>,
    },
    OtmInconsistentOpening { flips: Vec<LabelFlip> },
    /// Opens one token with a wrong trap bit, then guesses the accept flag
    /// among the other `2^m − 1` strings. Aims using the secrets.
    FlagGuess { m: u32 },
    /// Applies a Pauli to the server's own input before injection.
    InputDeviation { row: u32, op: Pauli },
    /// Aims a Pauli at a trap chosen from the secrets.
    TrapHit { pauli: Pauli, point: PhasePoint },
    Compose { parts: Vec<AttackStrategy> },
}

impl AttackStrategy {
    /// Strategies that peek at the client's secrets; test mode only.
    pub fn is_white_box(&self) -> bool {
        match self {
            AttackStrategy::FlagGuess { .. } | AttackStrategy::TrapHit { .. } => true,
            AttackStrategy::Compose { parts } => parts.iter().any(Self::is_white_box),
            _ => false,
        }
    }

    /// Flag length the strategy imposes, if any.
    pub fn flag_len(&self) -> Option<u32> {
        match self {
            AttackStrategy::FlagGuess { m } => Some(*m),
            AttackStrategy::Compose { parts } => parts.iter().find_map(Self::flag_len),
            _ => None,
        }
    }

    /// Deviations on the server's input, as `(row, operator)`.
    pub fn input_deviations(&self) -> Vec<(u32, Pauli)> {
        match self {
            AttackStrategy::InputDeviation { row, op } => vec![(*row, *op)],
            AttackStrategy::Compose { parts } => parts.iter().flat_map(Self::input_deviations).collect(),
            _ => Vec::new(),
        }
    }

    pub fn validate(&self, setup: &ProtocolSetup, mode: Mode) -> Result<(), AdversaryError> {
        let n = setup.dtg().len() as u32;
        let vertex = |v: VertexId| if v.0 < n { Ok(()) } else { Err(AdversaryError::UnknownVertex(v)) };
        let ni_only = |what: &str| match mode {
            Mode::NonInteractive => Ok(()),
            Mode::Interactive => Err(AdversaryError::StrategyMode(format!("{what} needs the non-interactive mode"))),
        };
        match self {
            AttackStrategy::Honest | AttackStrategy::TrapHit { .. } => Ok(()),
            AttackStrategy::PauliAttack { targets } => targets.iter().try_for_each(|t| vertex(t.vertex)),
            AttackStrategy::RandomPrimary { base_vertex, .. } => setup
                .dtg()
                .primary_set(*base_vertex)
                .map(|_| ())
                .ok_or(AdversaryError::UnknownVertex(*base_vertex)),
            AttackStrategy::OutcomeLie { flips } => flips.keys().try_for_each(|v| vertex(*v)),
            AttackStrategy::OtmInconsistentOpening { flips } => {
                ni_only("an inconsistent OTM opening")?;
                flips.iter().try_for_each(|f| vertex(f.i).and(vertex(f.j)))
            }
            AttackStrategy::FlagGuess { m } => {
                ni_only("a flag guess")?;
                if (1..=64).contains(m) {
                    Ok(())
                } else {
                    Err(AdversaryError::Invalid(format!("flag length {m} outside 1..=64")))
                }
            }
            AttackStrategy::InputDeviation { row, .. } => {
                if setup.is_server_input_row(*row) {
                    Ok(())
                } else {
                    Err(AdversaryError::Invalid(format!("row {row} is not a server input")))
                }
            }
            AttackStrategy::Compose { parts } => parts.iter().try_for_each(|p| p.validate(setup, mode)),
        }
    }

    pub fn behaviour(&self) -> StrategyServer {
        StrategyServer { strategy: self.clone(), picked: BTreeMap::new(), flag_target: None }
    }
}

/// A server executing an [`AttackStrategy`].
pub struct StrategyServer {
    strategy: AttackStrategy,
    /// Slot chosen per `RandomPrimary` / `TrapHit` part, keyed by part index.
    picked: BTreeMap<usize, VertexId>,
    /// Token whose label was spoiled for the flag guess.
    flag_target: Option<VertexId>,
}

impl StrategyServer {
    fn leaves(&self) -> Vec<(usize, &AttackStrategy)> {
        fn walk<'s>(s: &'s AttackStrategy, out: &mut Vec<&'s AttackStrategy>) {
            match s {
                AttackStrategy::Compose { parts } => parts.iter().for_each(|p| walk(p, out)),
                other => out.push(other),
            }
        }
        let mut out = Vec::new();
        walk(&self.strategy, &mut out);
        out.into_iter().enumerate().collect()
    }

    fn paulis(&mut self, ctx: &mut ServerCtx, v: VertexId, at: PhasePoint) -> Vec<Pauli> {
        let mut out = Vec::new();
        let leaves: Vec<(usize, AttackStrategy)> = self.leaves().into_iter().map(|(k, s)| (k, s.clone())).collect();
        for (k, leaf) in leaves {
            match leaf {
                AttackStrategy::PauliAttack { targets } => {
                    out.extend(targets.iter().filter(|t| t.vertex == v && t.point == at).map(|t| t.pauli));
                }
                AttackStrategy::RandomPrimary { base_vertex, pauli, point } if point == at => {
                    let slots = *ctx.setup.dtg().primary_set(base_vertex).expect("validated");
                    let chosen =
                        *self.picked.entry(k).or_insert_with(|| slots[rand::Rng::gen_range(&mut *ctx.rng, 0..3)]);
                    if chosen == v {
                        out.push(pauli);
                    }
                }
                AttackStrategy::TrapHit { pauli, point } if point == at => {
                    let secrets = ctx.secrets.expect("white-box strategy sees the secrets");
                    let dtg = ctx.setup.dtg();
                    let order = ctx.setup.order();
                    let pool: Vec<VertexId> = match point {
                        PhasePoint::BeforeMeasurement => order.measured.clone(),
                        PhasePoint::OnOutput => order.outputs.clone(),
                    };
                    let traps: Vec<VertexId> = pool.into_iter().filter(|t| secrets.colouring.is_trap(dtg, *t)).collect();
                    if traps.is_empty() {
                        continue;
                    }
                    let chosen = *self.picked.entry(k).or_insert_with(|| traps[rand::Rng::gen_range(&mut *ctx.rng, 0..traps.len())]);
                    if chosen == v {
                        out.push(pauli);
                    }
                }
                _ => {}
            }
        }
        out
    }
}

/// Dense 2×2 matrix of a Pauli.
pub fn pauli_operator(p: Pauli) -> [Complex64; 4] {
    let (o, l, i) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0));
    match p {
        Pauli::X => [o, l, l, o],
        Pauli::Y => [o, -i, i, o],
        Pauli::Z => [l, o, o, -l],
    }
}

impl ServerBehaviour for StrategyServer {
    fn white_box(&self) -> bool {
        self.strategy.is_white_box()
    }

    fn deviate_input(&mut self, _ctx: &mut ServerCtx, row: u32) -> Option<[Complex64; 4]> {
        let ops: Vec<Pauli> = self.strategy.input_deviations().into_iter().filter(|(r, _)| *r == row).map(|(_, p)| p).collect();
        if ops.is_empty() {
            return None;
        }
        let mut m = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
        for p in ops {
            let a = pauli_operator(p);
            m = [
                a[0] * m[0] + a[1] * m[2],
                a[0] * m[1] + a[1] * m[3],
                a[2] * m[0] + a[3] * m[2],
                a[2] * m[1] + a[3] * m[3],
            ];
        }
        Some(m)
    }

    fn before_measure(&mut self, ctx: &mut ServerCtx, v: VertexId) -> Vec<Pauli> {
        self.paulis(ctx, v, PhasePoint::BeforeMeasurement)
    }

    fn before_return(&mut self, ctx: &mut ServerCtx, v: VertexId) -> Vec<Pauli> {
        self.paulis(ctx, v, PhasePoint::OnOutput)
    }

    fn report(&mut self, _ctx: &mut ServerCtx, v: VertexId, b: u8) -> u8 {
        let flip = self
            .leaves()
            .iter()
            .filter_map(|(_, s)| match s {
                AttackStrategy::OutcomeLie { flips } => flips.get(&v).copied(),
                _ => None,
            })
            .fold(0, |a, f| a ^ (f & 1));
        b ^ flip
    }

    fn otm_label_bit(&mut self, ctx: &mut ServerCtx, i: VertexId, j: VertexId, b: u8) -> u8 {
        let mut flip = 0;
        let leaves: Vec<AttackStrategy> = self.leaves().into_iter().map(|(_, s)| s.clone()).collect();
        for leaf in leaves {
            match leaf {
                AttackStrategy::OtmInconsistentOpening { flips } => {
                    flip ^= flips.iter().filter(|f| f.i == i && f.j == j).count() as u8 & 1;
                }
                AttackStrategy::FlagGuess { .. } => {
                    let secrets = ctx.secrets.expect("white-box strategy sees the secrets");
                    if self.flag_target.is_none() && secrets.colouring.is_trap(ctx.setup.dtg(), j) {
                        self.flag_target = Some(i);
                        flip ^= 1;
                    }
                }
                _ => {}
            }
        }
        b ^ flip
    }

    fn return_flag(&mut self, ctx: &mut ServerCtx, i: VertexId, flag: FlagString) -> FlagString {
        if self.flag_target == Some(i) && self.strategy.flag_len().is_some() {
            return FlagString::random_other(flag.len(), &flag, ctx.rng);
        }
        flag
    }
}
