//! Measurement patterns on dotted graphs and the angle formulas the client
//! uses to steer them.

mod angle;
mod compile;
mod order;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use angle::Angle;
pub use compile::{compile_circuit, compile_gate, compose_patterns, Circuit, Fragment, Gate};
pub use order::{dtg_measurement_order, DtgOrder};

use crate::graph::{compute_flow, dependency_sets, dotted_graph, BaseGraph, DependencySets, Flow, GraphError, VertexId};

#[derive(Debug, Error)]
pub enum PatternError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("no outcome recorded for dependency {0}")]
    MissingOutcome(VertexId),
    #[error("measured vertex {0} has no default angle")]
    MissingAngle(VertexId),
    #[error("unsupported gate: {0}")]
    UnsupportedGate(String),
    #[error("fragment shapes do not match: {0}")]
    ShapeMismatch(String),
}

/// A computation on D(G): default angles, flow and measurement order.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "PatternFile", into = "PatternFile")]
pub struct MeasurementPattern {
    base: BaseGraph,
    graph: BaseGraph,
    phi: BTreeMap<VertexId, Angle>,
    flow: Flow,
    deps: DependencySets,
}

impl MeasurementPattern {
    /// Builds the pattern on D(`base`). `phi` must give an angle to every
    /// non-output vertex of the dotted graph.
    pub fn new(base: BaseGraph, phi: BTreeMap<VertexId, Angle>) -> Result<Self, PatternError> {
        let graph = dotted_graph(&base)?;
        let flow = compute_flow(&graph)?;
        if let Some(v) = graph.vertices().iter().find(|v| !graph.is_output(**v) && !phi.contains_key(v)) {
            return Err(PatternError::MissingAngle(*v));
        }
        let deps = dependency_sets(&graph, &flow);
        Ok(MeasurementPattern { base, graph, phi, flow, deps })
    }

    /// All-zero angles on D(`base`): identity on every row for any width.
    pub fn zero(base: BaseGraph) -> Result<Self, PatternError> {
        let graph = dotted_graph(&base)?;
        let flow = compute_flow(&graph)?;
        let phi = graph
            .vertices()
            .iter()
            .filter(|v| !graph.is_output(**v))
            .map(|v| (*v, if flow.is_bridge(*v) { Angle::HALF_PI } else { Angle::ZERO }))
            .collect();
        let mut p = Self::new(base, phi)?;
        p.compensate_bridges();
        Ok(p)
    }

    /// Adds the π/2 that undoes the phase gate each bridge leaves on its two
    /// neighbours.
    fn compensate_bridges(&mut self) {
        let bridges: Vec<VertexId> = self.flow.bridges.iter().copied().collect();
        for b in bridges {
            let ns: Vec<VertexId> = self.graph.neighbours(b).collect();
            for n in ns {
                if let Some(a) = self.phi.get_mut(&n) {
                    *a = *a + Angle::HALF_PI;
                }
            }
        }
    }

    pub fn base(&self) -> &BaseGraph {
        &self.base
    }

    /// D(G).
    pub fn graph(&self) -> &BaseGraph {
        &self.graph
    }

    pub fn phi(&self, v: VertexId) -> Option<Angle> {
        self.phi.get(&v).copied()
    }

    pub fn angles(&self) -> &BTreeMap<VertexId, Angle> {
        &self.phi
    }

    pub fn flow(&self) -> &Flow {
        &self.flow
    }

    pub fn order(&self) -> &[VertexId] {
        &self.flow.order
    }

    pub fn deps(&self) -> &DependencySets {
        &self.deps
    }

    pub fn rows(&self) -> u32 {
        self.base.rows().unwrap_or(0)
    }

    /// Measured vertices of D(G), in measurement order.
    pub fn measured(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.flow.order.iter().copied().filter(|v| !self.graph.is_output(*v))
    }

    /// Output vertex of D(G) for each row.
    pub fn output_wires(&self) -> Vec<VertexId> {
        let width = self.graph.layout().map_or(0, |l| l.values().map(|s| s.col()).max().unwrap_or(0));
        (0..self.rows()).map(|r| self.graph.wire(r, width).expect("row output")).collect()
    }

    pub fn input_wires(&self) -> Vec<VertexId> {
        (0..self.rows()).map(|r| self.graph.wire(r, 0).expect("row input")).collect()
    }
}

#[derive(Serialize, Deserialize)]
struct PatternFile {
    base: BaseGraph,
    /// Default angle per D(G) vertex, in eighth-turns.
    #[serde(with = "crate::graph::keys")]
    phi: BTreeMap<VertexId, Angle>,
    /// Derived; checked on load when present.
    #[serde(default, with = "crate::graph::keys::option")]
    flow: Option<BTreeMap<VertexId, VertexId>>,
    #[serde(default)]
    order: Option<Vec<VertexId>>,
}

impl TryFrom<PatternFile> for MeasurementPattern {
    type Error = PatternError;

    fn try_from(file: PatternFile) -> Result<Self, PatternError> {
        let p = MeasurementPattern::new(file.base, file.phi)?;
        if file.flow.as_ref().is_some_and(|f| f != &p.flow.f) || file.order.as_ref().is_some_and(|o| o != &p.flow.order)
        {
            return Err(GraphError::FlowViolation("stored flow or order differs from the canonical one".into()).into());
        }
        Ok(p)
    }
}

impl From<MeasurementPattern> for PatternFile {
    fn from(p: MeasurementPattern) -> Self {
        PatternFile { base: p.base, phi: p.phi, flow: Some(p.flow.f), order: Some(p.flow.order) }
    }
}

fn parity(vs: impl Iterator<Item = VertexId>, bit: impl Fn(VertexId) -> Option<u8>) -> Result<u8, PatternError> {
    let mut acc = 0;
    for v in vs {
        acc ^= bit(v).ok_or(PatternError::MissingOutcome(v))? & 1;
    }
    Ok(acc)
}

/// φ'_i = (-1)^{s_X} φ_i + π s_Z, with `s` the corrected outcomes.
pub fn corrected_angle(
    i: VertexId,
    phi_i: Angle,
    s: &BTreeMap<VertexId, u8>,
    deps: &DependencySets,
) -> Result<Angle, PatternError> {
    let sx = parity(deps.x_of(i), |j| s.get(&j).copied())?;
    let sz = parity(deps.z_of(i), |j| s.get(&j).copied())?;
    Ok(phi_i.signed(sx).add_pi_times(sz))
}

/// δ_i = φ'_i + θ_i + π r_i.
pub fn delta(
    i: VertexId,
    phi_i: Angle,
    theta_i: Angle,
    r_i: u8,
    s: &BTreeMap<VertexId, u8>,
    deps: &DependencySets,
) -> Result<Angle, PatternError> {
    Ok(corrected_angle(i, phi_i, s, deps)? + theta_i + Angle::ZERO.add_pi_times(r_i))
}

/// δ_i from an influence-past assignment `c_i` of raw outcomes `b_j`.
///
/// Uses `s_j = b_j ⊕ r_j` for `j` in the past of `i`; bits of `c_i` outside the
/// past are ignored.
pub fn delta_from_influence_past(
    i: VertexId,
    phi_i: Angle,
    theta_i: Angle,
    r_i: u8,
    c_i: &BTreeMap<VertexId, u8>,
    r: &BTreeMap<VertexId, u8>,
    deps: &DependencySets,
) -> Result<Angle, PatternError> {
    let s_of = |j: VertexId| Some(c_i.get(&j)? ^ r.get(&j)?);
    let sx = parity(deps.x_of(i), s_of)?;
    let sz = parity(deps.z_of(i), s_of)?;
    Ok(phi_i.signed(sx) + theta_i + Angle::ZERO.add_pi_times(r_i ^ sz))
}

/// Vertices `v` whose outcome some other vertex depends on.
pub fn dependency_sources(deps: &DependencySets) -> BTreeSet<VertexId> {
    deps.x.values().chain(deps.z.values()).flatten().copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: u32) -> VertexId {
        VertexId(n)
    }

    fn path3_deps() -> DependencySets {
        let g = BaseGraph::path(3).unwrap();
        dependency_sets(&g, &compute_flow(&g).unwrap())
    }

    #[test]
    fn corrected_angle_examples() {
        let deps = path3_deps();
        let zeros = BTreeMap::from([(v(0), 0), (v(1), 0)]);
        assert_eq!(corrected_angle(v(2), Angle::QUARTER_PI, &zeros, &deps).unwrap(), Angle::QUARTER_PI);
        // X-dependency of v2 is v1
        let s = BTreeMap::from([(v(0), 0), (v(1), 1)]);
        assert_eq!(corrected_angle(v(2), Angle::QUARTER_PI, &s, &deps).unwrap(), Angle::from_eighths(7));
        // Z-dependency of v2 is v0
        let s = BTreeMap::from([(v(0), 1), (v(1), 0)]);
        assert_eq!(corrected_angle(v(2), Angle::QUARTER_PI, &s, &deps).unwrap(), Angle::from_eighths(5));
        assert!(matches!(
            corrected_angle(v(2), Angle::ZERO, &BTreeMap::new(), &deps),
            Err(PatternError::MissingOutcome(_))
        ));
    }

    #[test]
    fn delta_examples() {
        let deps = DependencySets::default();
        let none = BTreeMap::new();
        let d = delta(v(0), Angle::HALF_PI, Angle::from_eighths(3), 1, &none, &deps).unwrap();
        assert_eq!(d, Angle::QUARTER_PI);
        assert_eq!(delta(v(0), Angle::ZERO, Angle::QUARTER_PI, 0, &none, &deps).unwrap(), Angle::QUARTER_PI);
        assert_eq!(delta(v(0), Angle::ZERO, Angle::ZERO, 1, &none, &deps).unwrap(), Angle::PI);
    }

    #[test]
    fn influence_past_examples() {
        let deps = path3_deps();
        let r = BTreeMap::from([(v(0), 1), (v(1), 0), (v(2), 1)]);
        // empty past
        let d = delta_from_influence_past(v(0), Angle::HALF_PI, Angle::QUARTER_PI, 1, &BTreeMap::new(), &r, &deps);
        assert_eq!(d.unwrap(), Angle::HALF_PI + Angle::QUARTER_PI + Angle::PI);
        // bits outside P_1 = {v0} are ignored
        let a = BTreeMap::from([(v(0), 1)]);
        let b = BTreeMap::from([(v(0), 1), (v(2), 1)]);
        assert_eq!(
            delta_from_influence_past(v(1), Angle::QUARTER_PI, Angle::ZERO, 0, &a, &r, &deps).unwrap(),
            delta_from_influence_past(v(1), Angle::QUARTER_PI, Angle::ZERO, 0, &b, &r, &deps).unwrap()
        );
    }

    #[test]
    fn zero_pattern_compensates_bridges() {
        let p = MeasurementPattern::zero(BaseGraph::grid(2, 2, &[(0, 0)]).unwrap()).unwrap();
        let b = *p.flow().bridges.iter().next().unwrap();
        assert_eq!(p.phi(b), Some(Angle::HALF_PI));
        for n in p.graph().neighbours(b) {
            assert_eq!(p.phi(n), Some(Angle::HALF_PI));
        }
    }

    #[test]
    fn pattern_round_trips_through_toml() {
        let p = MeasurementPattern::zero(BaseGraph::grid(2, 3, &[(0, 1)]).unwrap()).unwrap();
        let text = toml::to_string(&p).unwrap();
        let back: MeasurementPattern = toml::from_str(&text).unwrap();
        assert_eq!(back.angles(), p.angles());
        assert_eq!(back.order(), p.order());
    }
}
