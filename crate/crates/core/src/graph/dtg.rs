use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::base::{dotted_graph_with_map, BaseGraph, Edge, VertexId};
use super::GraphError;

/// Where a dotted triple-graph vertex lives in the base graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BaseLocation {
    Vertex { vertex: VertexId },
    Edge { edge: Edge },
}

/// Role of a vertex in DT(G).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DtgVertexKind {
    /// One of the three copies `p_1, p_2, p_3` of a base vertex; `slot` is 0-based.
    Primary { vertex: VertexId, slot: u8 },
    /// The vertex replacing the edge between `p_lo_slot` of `edge.lo()` and
    /// `p_hi_slot` of `edge.hi()`.
    Added { edge: Edge, lo_slot: u8, hi_slot: u8 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DtgVertex {
    pub id: VertexId,
    pub kind: DtgVertexKind,
}

impl DtgVertex {
    pub fn base_location(&self) -> BaseLocation {
        match self.kind {
            DtgVertexKind::Primary { vertex, .. } => BaseLocation::Vertex { vertex },
            DtgVertexKind::Added { edge, .. } => BaseLocation::Edge { edge },
        }
    }

    pub fn is_primary(&self) -> bool {
        matches!(self.kind, DtgVertexKind::Primary { .. })
    }
}

/// The dotted triple-graph DT(G) of a base graph, with the dotted graph D(G)
/// it reduces to.
///
/// Labelling is deterministic: primaries first, by base vertex then slot;
/// then added vertices by sorted base edge, then `(lo_slot, hi_slot)`.
#[derive(Clone, Debug)]
pub struct DtgGraph {
    base: BaseGraph,
    dotted: BaseGraph,
    edge_site: BTreeMap<Edge, VertexId>,
    site_edge: BTreeMap<VertexId, Edge>,
    vertices: Vec<DtgVertex>,
    edges: BTreeSet<Edge>,
    adjacency: Vec<Vec<VertexId>>,
    primary_sets: BTreeMap<VertexId, [VertexId; 3]>,
    added_sets: BTreeMap<Edge, [VertexId; 9]>,
}

/// Constructs DT(G). The base graph must be valid and connected.
pub fn dotted_triple_graph(base: &BaseGraph) -> Result<DtgGraph, GraphError> {
    base.validate()?;
    if !base.is_connected() {
        return Err(GraphError::Disconnected);
    }
    let (dotted, edge_site) = dotted_graph_with_map(base);
    let mut vertices = Vec::new();
    let mut primary_sets = BTreeMap::new();
    let mut sorted: Vec<VertexId> = base.vertices().to_vec();
    sorted.sort();
    for &v in &sorted {
        let mut set = [VertexId(0); 3];
        for (slot, id) in set.iter_mut().enumerate() {
            *id = VertexId(vertices.len() as u32);
            vertices.push(DtgVertex { id: *id, kind: DtgVertexKind::Primary { vertex: v, slot: slot as u8 } });
        }
        primary_sets.insert(v, set);
    }
    let mut edges = BTreeSet::new();
    let mut added_sets = BTreeMap::new();
    for &e in base.edges() {
        let mut set = [VertexId(0); 9];
        for a in 0..3u8 {
            for b in 0..3u8 {
                let id = VertexId(vertices.len() as u32);
                set[(a * 3 + b) as usize] = id;
                vertices.push(DtgVertex { id, kind: DtgVertexKind::Added { edge: e, lo_slot: a, hi_slot: b } });
                edges.insert(Edge::new(primary_sets[&e.lo()][a as usize], id));
                edges.insert(Edge::new(id, primary_sets[&e.hi()][b as usize]));
            }
        }
        added_sets.insert(e, set);
    }
    let mut adjacency = vec![Vec::new(); vertices.len()];
    for e in &edges {
        adjacency[e.lo().index()].push(e.hi());
        adjacency[e.hi().index()].push(e.lo());
    }
    for list in &mut adjacency {
        list.sort();
    }
    let site_edge = edge_site.iter().map(|(e, w)| (*w, *e)).collect();
    Ok(DtgGraph {
        base: base.clone(),
        dotted,
        edge_site,
        site_edge,
        vertices,
        edges,
        adjacency,
        primary_sets,
        added_sets,
    })
}

impl DtgGraph {
    pub fn base(&self) -> &BaseGraph {
        &self.base
    }

    /// D(G), whose vertices are the computation sites.
    pub fn dotted(&self) -> &BaseGraph {
        &self.dotted
    }

    pub fn vertices(&self) -> &[DtgVertex] {
        &self.vertices
    }

    pub fn vertex(&self, v: VertexId) -> &DtgVertex {
        &self.vertices[v.index()]
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn edges(&self) -> &BTreeSet<Edge> {
        &self.edges
    }

    pub fn neighbours(&self, v: VertexId) -> &[VertexId] {
        &self.adjacency[v.index()]
    }

    pub fn primary_set(&self, base_vertex: VertexId) -> Option<&[VertexId; 3]> {
        self.primary_sets.get(&base_vertex)
    }

    pub fn primary_sets(&self) -> &BTreeMap<VertexId, [VertexId; 3]> {
        &self.primary_sets
    }

    pub fn added_set(&self, edge: Edge) -> Option<&[VertexId; 9]> {
        self.added_sets.get(&edge)
    }

    pub fn added_sets(&self) -> &BTreeMap<Edge, [VertexId; 9]> {
        &self.added_sets
    }

    /// The added vertex joining slot `lo_slot` of `edge.lo()` to `hi_slot` of `edge.hi()`.
    pub fn added_between(&self, edge: Edge, lo_slot: u8, hi_slot: u8) -> VertexId {
        self.added_sets[&edge][(lo_slot * 3 + hi_slot) as usize]
    }

    /// The D(G) vertex a DT(G) vertex would compute at, if it were green.
    pub fn dotted_site(&self, v: VertexId) -> VertexId {
        match self.vertex(v).base_location() {
            BaseLocation::Vertex { vertex } => vertex,
            BaseLocation::Edge { edge } => self.edge_site[&edge],
        }
    }

    /// Base location of a D(G) vertex.
    pub fn site_location(&self, site: VertexId) -> BaseLocation {
        if self.base.contains(site) {
            BaseLocation::Vertex { vertex: site }
        } else {
            BaseLocation::Edge { edge: self.site_edge[&site] }
        }
    }

    /// DT(G) vertices sharing a base location with `v` (including `v`).
    pub fn location_members(&self, loc: BaseLocation) -> Vec<VertexId> {
        match loc {
            BaseLocation::Vertex { vertex } => self.primary_sets[&vertex].to_vec(),
            BaseLocation::Edge { edge } => self.added_sets[&edge].to_vec(),
        }
    }

    /// Vertices whose base location is an output vertex of the base graph.
    pub fn output_layer(&self) -> Vec<VertexId> {
        let mut out: Vec<VertexId> = self
            .base
            .outputs()
            .iter()
            .flat_map(|v| self.primary_sets[v].iter().copied())
            .collect();
        out.sort();
        out
    }

    pub fn is_output_layer(&self, v: VertexId) -> bool {
        match self.vertex(v).kind {
            DtgVertexKind::Primary { vertex, .. } => self.base.is_output(vertex),
            DtgVertexKind::Added { .. } => false,
        }
    }

    pub fn is_input_location(&self, v: VertexId) -> bool {
        match self.vertex(v).kind {
            DtgVertexKind::Primary { vertex, .. } => self.base.is_input(vertex),
            DtgVertexKind::Added { .. } => false,
        }
    }

    /// Upper bound 3N(3c+1) on the number of DT(G) vertices.
    pub fn vertex_bound(&self) -> usize {
        3 * self.base.vertices().len() * (3 * self.base.max_degree() + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path2_has_fifteen_vertices() {
        let dtg = dotted_triple_graph(&BaseGraph::path(2).unwrap()).unwrap();
        assert_eq!(dtg.len(), 15);
        assert_eq!(dtg.vertices().iter().filter(|v| v.is_primary()).count(), 6);
        assert_eq!(dtg.vertex_bound(), 24);
        assert_eq!(dtg.edges().len(), 18);
    }

    #[test]
    fn single_vertex_has_only_primaries() {
        let dtg = dotted_triple_graph(&BaseGraph::single_vertex()).unwrap();
        assert_eq!(dtg.len(), 3);
        assert!(dtg.edges().is_empty());
    }

    #[test]
    fn added_vertices_join_one_primary_per_side() {
        let dtg = dotted_triple_graph(&BaseGraph::grid(2, 2, &[(0, 1)]).unwrap()).unwrap();
        for (edge, set) in dtg.added_sets() {
            let lo = dtg.primary_set(edge.lo()).unwrap();
            let hi = dtg.primary_set(edge.hi()).unwrap();
            for a in set {
                let n = dtg.neighbours(*a);
                assert_eq!(n.len(), 2);
                assert_eq!(n.iter().filter(|v| lo.contains(v)).count(), 1);
                assert_eq!(n.iter().filter(|v| hi.contains(v)).count(), 1);
            }
        }
    }

    #[test]
    fn labelling_is_deterministic() {
        let g = BaseGraph::grid(2, 3, &[(0, 1)]).unwrap();
        let a = dotted_triple_graph(&g).unwrap();
        let b = dotted_triple_graph(&g).unwrap();
        assert_eq!(a.vertices(), b.vertices());
        assert_eq!(a.edges(), b.edges());
    }

    #[test]
    fn rejects_disconnected() {
        let g = BaseGraph::new(vec![VertexId(0), VertexId(1)], [], vec![], vec![]).unwrap();
        assert!(matches!(dotted_triple_graph(&g), Err(GraphError::Disconnected)));
    }
}
