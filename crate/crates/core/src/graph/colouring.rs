use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::base::{Edge, VertexId};
use super::dtg::{DtgGraph, DtgVertexKind};
use super::GraphError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Colour {
    White,
    Black,
    Green,
    Red,
    Blue,
}

impl Colour {
    /// Blue behaves exactly like green except for where it may appear.
    fn as_computation(self) -> Colour {
        if self == Colour::Blue {
            Colour::Green
        } else {
            self
        }
    }

    pub fn is_computation(self) -> bool {
        matches!(self, Colour::Green | Colour::Blue)
    }
}

impl fmt::Display for Colour {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Colour::White => "white",
            Colour::Black => "black",
            Colour::Green => "green",
            Colour::Red => "red",
            Colour::Blue => "blue",
        };
        f.write_str(s)
    }
}

/// All six assignments of (computation, white, black) to slots 0..3.
/// Entry `[g, w, b]` puts the computation colour in slot `g`, and so on.
pub const SLOT_PERMUTATIONS: [[u8; 3]; 6] =
    [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

/// A colour for every DT(G) vertex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrapColouring {
    colour: Vec<Colour>,
}

impl TrapColouring {
    pub fn from_colours(colour: Vec<Colour>) -> Self {
        TrapColouring { colour }
    }

    /// Builds the colouring induced by a slot permutation per base vertex
    /// (indices into [`SLOT_PERMUTATIONS`]).
    pub fn from_permutations(dtg: &DtgGraph, perms: &BTreeMap<VertexId, usize>) -> Self {
        let mut colour = vec![Colour::Red; dtg.len()];
        for (v, set) in dtg.primary_sets() {
            let [g, w, b] = SLOT_PERMUTATIONS[perms[v]];
            let comp = if dtg.base().is_input(*v) { Colour::Blue } else { Colour::Green };
            colour[set[g as usize].index()] = comp;
            colour[set[w as usize].index()] = Colour::White;
            colour[set[b as usize].index()] = Colour::Black;
        }
        for vertex in dtg.vertices() {
            if let DtgVertexKind::Added { edge, lo_slot, hi_slot } = vertex.kind {
                let lo = colour[dtg.primary_set(edge.lo()).unwrap()[lo_slot as usize].index()];
                let hi = colour[dtg.primary_set(edge.hi()).unwrap()[hi_slot as usize].index()];
                colour[vertex.id.index()] = added_colour(lo, hi);
            }
        }
        TrapColouring { colour }
    }

    pub fn colour(&self, v: VertexId) -> Colour {
        self.colour[v.index()]
    }

    pub fn colours(&self) -> &[Colour] {
        &self.colour
    }

    pub fn set(&mut self, v: VertexId, c: Colour) {
        self.colour[v.index()] = c;
    }

    pub fn is_trap(&self, dtg: &DtgGraph, v: VertexId) -> bool {
        match (self.colour(v), dtg.vertex(v).is_primary()) {
            (Colour::White, true) | (Colour::Black, false) => true,
            _ => false,
        }
    }

    pub fn is_computation(&self, v: VertexId) -> bool {
        self.colour(v).is_computation()
    }

    /// Slot of the computation (green or blue) primary of `base_vertex`.
    pub fn computation_slot(&self, dtg: &DtgGraph, base_vertex: VertexId) -> Option<u8> {
        dtg.primary_set(base_vertex)?
            .iter()
            .position(|&p| self.colour(p).is_computation())
            .map(|s| s as u8)
    }

    /// The DT(G) vertex computing at each D(G) site.
    pub fn computation_vertex(&self, dtg: &DtgGraph, site: VertexId) -> Option<VertexId> {
        computation_vertex_with(dtg, site, |v| self.computation_slot(dtg, v))
    }
}

/// Colour of an added vertex joining primaries coloured `a` and `b`.
pub fn added_colour(a: Colour, b: Colour) -> Colour {
    let (a, b) = (a.as_computation(), b.as_computation());
    if a == b {
        a
    } else {
        Colour::Red
    }
}

pub(crate) fn computation_vertex_with(
    dtg: &DtgGraph,
    site: VertexId,
    slot_of: impl Fn(VertexId) -> Option<u8>,
) -> Option<VertexId> {
    match dtg.site_location(site) {
        super::dtg::BaseLocation::Vertex { vertex } => {
            Some(dtg.primary_set(vertex)?[slot_of(vertex)? as usize])
        }
        super::dtg::BaseLocation::Edge { edge } => {
            Some(dtg.added_between(edge, slot_of(edge.lo())?, slot_of(edge.hi())?))
        }
    }
}

/// Draws an independent uniformly random slot permutation for every primary set.
pub fn sample_trap_colouring<R: Rng + ?Sized>(dtg: &DtgGraph, rng: &mut R) -> TrapColouring {
    let perms = dtg
        .primary_sets()
        .keys()
        .map(|&v| (v, rng.gen_range(0..SLOT_PERMUTATIONS.len())))
        .collect();
    TrapColouring::from_permutations(dtg, &perms)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Condition {
    /// Primary vertices are white, black or green (blue at inputs).
    PrimaryPalette,
    /// Added vertices are white, black, green or red.
    AddedPalette,
    /// Each primary set has exactly one vertex of each colour.
    OnePerColour,
    /// Added colours follow from their two primaries.
    AddedDerived,
    /// Blue only at input base locations, replacing green there.
    BlueAtInputs,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub condition: Condition,
    pub vertices: Vec<VertexId>,
}

/// Every violated trap-colouring condition; empty iff the colouring is valid.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ColouringReport {
    pub violations: Vec<Violation>,
}

impl ColouringReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, condition: Condition) -> bool {
        self.violations.iter().any(|v| v.condition == condition)
    }
}

pub fn validate_colouring(dtg: &DtgGraph, col: &TrapColouring) -> ColouringReport {
    let mut report = ColouringReport::default();
    if col.colours().len() != dtg.len() {
        report.violations.push(Violation { condition: Condition::OnePerColour, vertices: vec![] });
        return report;
    }
    for (&v, set) in dtg.primary_sets() {
        let input = dtg.base().is_input(v);
        let bad: Vec<_> = set
            .iter()
            .copied()
            .filter(|&p| !matches!(col.colour(p), Colour::White | Colour::Black | Colour::Green | Colour::Blue))
            .collect();
        if !bad.is_empty() {
            report.violations.push(Violation { condition: Condition::PrimaryPalette, vertices: bad });
        }
        let comp = if input { Colour::Blue } else { Colour::Green };
        let ok = [Colour::White, Colour::Black, comp]
            .iter()
            .all(|c| set.iter().filter(|&&p| col.colour(p) == *c).count() == 1);
        if !ok {
            report.violations.push(Violation { condition: Condition::OnePerColour, vertices: set.to_vec() });
        }
        let misplaced: Vec<_> = set
            .iter()
            .copied()
            .filter(|&p| (col.colour(p) == Colour::Blue) != (input && col.colour(p).is_computation()))
            .collect();
        if !misplaced.is_empty() {
            report.violations.push(Violation { condition: Condition::BlueAtInputs, vertices: misplaced });
        }
    }
    let mut palette = Vec::new();
    let mut derived = Vec::new();
    for vertex in dtg.vertices() {
        if let DtgVertexKind::Added { edge, lo_slot, hi_slot } = vertex.kind {
            let c = col.colour(vertex.id);
            if c == Colour::Blue {
                palette.push(vertex.id);
                continue;
            }
            let lo = col.colour(dtg.primary_set(edge.lo()).unwrap()[lo_slot as usize]);
            let hi = col.colour(dtg.primary_set(edge.hi()).unwrap()[hi_slot as usize]);
            if c != added_colour(lo, hi) {
                derived.push(vertex.id);
            }
        }
    }
    if !palette.is_empty() {
        report.violations.push(Violation { condition: Condition::AddedPalette, vertices: palette });
    }
    if !derived.is_empty() {
        report.violations.push(Violation { condition: Condition::AddedDerived, vertices: derived });
    }
    report
}

/// Positions of dummy qubits: red vertices, white added vertices and black
/// primary vertices.
pub fn dummy_positions(col: &TrapColouring, dtg: &DtgGraph) -> Result<BTreeSet<VertexId>, GraphError> {
    let report = validate_colouring(dtg, col);
    if !report.is_valid() {
        return Err(GraphError::InvalidColouring(report));
    }
    Ok(dummy_set(col, dtg))
}

pub(crate) fn dummy_set(col: &TrapColouring, dtg: &DtgGraph) -> BTreeSet<VertexId> {
    dtg.vertices()
        .iter()
        .filter(|v| match (col.colour(v.id), v.is_primary()) {
            (Colour::Red, _) | (Colour::White, false) | (Colour::Black, true) => true,
            _ => false,
        })
        .map(|v| v.id)
        .collect()
}

/// The three vertex-disjoint pieces left after removing the dummies.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BrokenGraph {
    /// Computation copy, with induced edges.
    pub computation: BTreeSet<VertexId>,
    pub computation_edges: BTreeSet<Edge>,
    /// White trap primaries.
    pub white: BTreeSet<VertexId>,
    /// Black trap added vertices.
    pub black: BTreeSet<VertexId>,
    /// Edges with an endpoint in a trap set (always empty for a valid colouring).
    pub trap_edges: BTreeSet<Edge>,
}

pub fn break_at_dummies(dtg: &DtgGraph, col: &TrapColouring) -> Result<BrokenGraph, GraphError> {
    let dummies = dummy_positions(col, dtg)?;
    let keep = |v: &VertexId| !dummies.contains(v);
    let mut broken = BrokenGraph {
        computation: BTreeSet::new(),
        computation_edges: BTreeSet::new(),
        white: BTreeSet::new(),
        black: BTreeSet::new(),
        trap_edges: BTreeSet::new(),
    };
    for v in dtg.vertices().iter().map(|v| v.id).filter(keep) {
        match col.colour(v) {
            Colour::Green | Colour::Blue => broken.computation.insert(v),
            Colour::White => broken.white.insert(v),
            Colour::Black => broken.black.insert(v),
            Colour::Red => unreachable!("red vertices are dummies"),
        };
    }
    for e in dtg.edges().iter().filter(|e| keep(&e.lo()) && keep(&e.hi())) {
        if broken.computation.contains(&e.lo()) && broken.computation.contains(&e.hi()) {
            broken.computation_edges.insert(*e);
        } else {
            broken.trap_edges.insert(*e);
        }
    }
    Ok(broken)
}

impl BrokenGraph {
    /// Checks that the computation copy maps onto D(G) edge-for-edge through
    /// [`DtgGraph::dotted_site`].
    pub fn computation_matches_dotted(&self, dtg: &DtgGraph) -> bool {
        let dotted = dtg.dotted();
        let sites: BTreeSet<VertexId> = self.computation.iter().map(|&v| dtg.dotted_site(v)).collect();
        if sites.len() != self.computation.len() || sites.len() != dotted.vertices().len() {
            return false;
        }
        let mapped: BTreeSet<Edge> = self
            .computation_edges
            .iter()
            .map(|e| Edge::new(dtg.dotted_site(e.lo()), dtg.dotted_site(e.hi())))
            .collect();
        &mapped == dotted.edges()
    }
}
