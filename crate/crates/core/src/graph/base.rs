use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::GraphError;

/// Vertex identifier, local to the graph that issued it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub u32);

impl VertexId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u32> for VertexId {
    fn from(v: u32) -> Self {
        VertexId(v)
    }
}

/// Unordered vertex pair, stored with the smaller id first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge(VertexId, VertexId);

impl Edge {
    pub fn new(a: VertexId, b: VertexId) -> Self {
        if a <= b {
            Edge(a, b)
        } else {
            Edge(b, a)
        }
    }

    pub fn lo(self) -> VertexId {
        self.0
    }

    pub fn hi(self) -> VertexId {
        self.1
    }

    pub fn contains(self, v: VertexId) -> bool {
        self.0 == v || self.1 == v
    }

    pub fn other(self, v: VertexId) -> Option<VertexId> {
        if self.0 == v {
            Some(self.1)
        } else if self.1 == v {
            Some(self.0)
        } else {
            None
        }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.0, self.1)
    }
}

/// Position of a vertex in a layered (row/column) graph.
///
/// `Wire` vertices sit on a row and carry the logical qubit along it.
/// `Bridge` vertices only appear in dotted graphs: they replace an
/// inter-row edge between `(row, col)` and `(row + 1, col)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Site {
    Wire { row: u32, col: u32 },
    Bridge { row: u32, col: u32 },
}

impl Site {
    pub fn col(self) -> u32 {
        match self {
            Site::Wire { col, .. } | Site::Bridge { col, .. } => col,
        }
    }

    /// Measurement sort key: by column, bridges of a column before its wires.
    pub(crate) fn order_key(self) -> (u32, u8, u32) {
        match self {
            Site::Bridge { row, col } => (col, 0, row),
            Site::Wire { row, col } => (col, 1, row),
        }
    }
}

/// An undirected simple graph with declared input and output vertices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawGraph")]
pub struct BaseGraph {
    vertices: Vec<VertexId>,
    edges: BTreeSet<Edge>,
    inputs: Vec<VertexId>,
    outputs: Vec<VertexId>,
    max_degree: usize,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "super::keys::option")]
    layout: Option<BTreeMap<VertexId, Site>>,
    #[serde(skip)]
    adjacency: BTreeMap<VertexId, BTreeSet<VertexId>>,
}

#[derive(Deserialize)]
struct RawGraph {
    vertices: Vec<VertexId>,
    edges: Vec<Edge>,
    inputs: Vec<VertexId>,
    outputs: Vec<VertexId>,
    #[serde(default)]
    max_degree: Option<usize>,
    #[serde(default, with = "super::keys::option")]
    layout: Option<BTreeMap<VertexId, Site>>,
}

impl TryFrom<RawGraph> for BaseGraph {
    type Error = GraphError;

    fn try_from(raw: RawGraph) -> Result<Self, GraphError> {
        let g = BaseGraph::build(
            raw.vertices,
            raw.edges.into_iter().map(|e| (e.lo(), e.hi())),
            raw.inputs,
            raw.outputs,
            raw.layout,
        )?;
        match raw.max_degree {
            Some(c) if c != g.max_degree => {
                Err(GraphError::Invalid(format!("declared max_degree {c}, actual {}", g.max_degree)))
            }
            _ => Ok(g),
        }
    }
}

impl BaseGraph {
    pub fn new(
        vertices: Vec<VertexId>,
        edges: impl IntoIterator<Item = (VertexId, VertexId)>,
        inputs: Vec<VertexId>,
        outputs: Vec<VertexId>,
    ) -> Result<Self, GraphError> {
        Self::build(vertices, edges, inputs, outputs, None)
    }

    pub fn with_layout(
        vertices: Vec<VertexId>,
        edges: impl IntoIterator<Item = (VertexId, VertexId)>,
        inputs: Vec<VertexId>,
        outputs: Vec<VertexId>,
        layout: BTreeMap<VertexId, Site>,
    ) -> Result<Self, GraphError> {
        Self::build(vertices, edges, inputs, outputs, Some(layout))
    }

    fn build(
        vertices: Vec<VertexId>,
        edges: impl IntoIterator<Item = (VertexId, VertexId)>,
        inputs: Vec<VertexId>,
        outputs: Vec<VertexId>,
        layout: Option<BTreeMap<VertexId, Site>>,
    ) -> Result<Self, GraphError> {
        let known: BTreeSet<VertexId> = vertices.iter().copied().collect();
        if known.len() != vertices.len() {
            return Err(GraphError::Invalid("duplicate vertex id".into()));
        }
        let mut edge_set = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(GraphError::Invalid(format!("self-loop at {a}")));
            }
            for v in [a, b] {
                if !known.contains(&v) {
                    return Err(GraphError::UnknownVertex(v));
                }
            }
            if !edge_set.insert(Edge::new(a, b)) {
                return Err(GraphError::Invalid(format!("duplicate edge {}", Edge::new(a, b))));
            }
        }
        for v in inputs.iter().chain(&outputs) {
            if !known.contains(v) {
                return Err(GraphError::UnknownVertex(*v));
            }
        }
        if let Some(layout) = &layout {
            if let Some(v) = vertices.iter().find(|v| !layout.contains_key(v)) {
                return Err(GraphError::Invalid(format!("vertex {v} has no layout site")));
            }
        }
        let mut g = BaseGraph {
            vertices,
            edges: edge_set,
            inputs,
            outputs,
            max_degree: 0,
            layout,
            adjacency: BTreeMap::new(),
        };
        g.rebuild_adjacency();
        let single_layer = g.is_single_layer();
        if !single_layer && g.inputs.iter().any(|v| g.outputs.contains(v)) {
            return Err(GraphError::Invalid(
                "input and output locations overlap in a multi-layer graph".into(),
            ));
        }
        Ok(g)
    }

    pub(crate) fn rebuild_adjacency(&mut self) {
        let mut adj: BTreeMap<VertexId, BTreeSet<VertexId>> =
            self.vertices.iter().map(|&v| (v, BTreeSet::new())).collect();
        for e in &self.edges {
            adj.entry(e.lo()).or_default().insert(e.hi());
            adj.entry(e.hi()).or_default().insert(e.lo());
        }
        self.max_degree = adj.values().map(BTreeSet::len).max().unwrap_or(0);
        self.adjacency = adj;
    }

    fn is_single_layer(&self) -> bool {
        match &self.layout {
            Some(layout) => layout.values().all(|s| s.col() == 0),
            None => self.edges.is_empty(),
        }
    }

    /// A single path `0 - 1 - ... - (n-1)` laid out on one row.
    pub fn path(n: u32) -> Result<Self, GraphError> {
        Self::grid(1, n, &[])
    }

    pub fn single_vertex() -> Self {
        Self::grid(1, 1, &[]).expect("1x1 grid is valid")
    }

    /// A `rows x cols` layered graph: every row is a path, plus the inter-row
    /// edges `(row, col) - (row + 1, col)` listed in `vertical`.
    ///
    /// Vertex `(row, col)` gets id `row * cols + col`.
    pub fn grid(rows: u32, cols: u32, vertical: &[(u32, u32)]) -> Result<Self, GraphError> {
        if rows == 0 || cols == 0 {
            return Err(GraphError::Invalid("grid needs at least one row and column".into()));
        }
        let id = |r: u32, c: u32| VertexId(r * cols + c);
        let mut vertices = Vec::new();
        let mut layout = BTreeMap::new();
        for r in 0..rows {
            for c in 0..cols {
                vertices.push(id(r, c));
                layout.insert(id(r, c), Site::Wire { row: r, col: c });
            }
        }
        let mut edges = Vec::new();
        for r in 0..rows {
            for c in 0..cols.saturating_sub(1) {
                edges.push((id(r, c), id(r, c + 1)));
            }
        }
        for &(r, c) in vertical {
            if r + 1 >= rows || c >= cols {
                return Err(GraphError::Invalid(format!("vertical edge ({r},{c}) out of range")));
            }
            edges.push((id(r, c), id(r + 1, c)));
        }
        let inputs = (0..rows).map(|r| id(r, 0)).collect();
        let outputs = (0..rows).map(|r| id(r, cols - 1)).collect();
        Self::with_layout(vertices, edges, inputs, outputs, layout)
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn edges(&self) -> &BTreeSet<Edge> {
        &self.edges
    }

    pub fn inputs(&self) -> &[VertexId] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[VertexId] {
        &self.outputs
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn layout(&self) -> Option<&BTreeMap<VertexId, Site>> {
        self.layout.as_ref()
    }

    pub fn site(&self, v: VertexId) -> Option<Site> {
        self.layout.as_ref().and_then(|l| l.get(&v).copied())
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.adjacency.contains_key(&v)
    }

    pub fn neighbours(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.adjacency.get(&v).into_iter().flat_map(|s| s.iter().copied())
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adjacency.get(&v).map_or(0, BTreeSet::len)
    }

    pub fn has_edge(&self, a: VertexId, b: VertexId) -> bool {
        self.edges.contains(&Edge::new(a, b))
    }

    pub fn is_input(&self, v: VertexId) -> bool {
        self.inputs.contains(&v)
    }

    pub fn is_output(&self, v: VertexId) -> bool {
        self.outputs.contains(&v)
    }

    pub fn is_connected(&self) -> bool {
        let Some(&start) = self.vertices.first() else {
            return true;
        };
        let mut seen = BTreeSet::from([start]);
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            for w in self.neighbours(v) {
                if seen.insert(w) {
                    stack.push(w);
                }
            }
        }
        seen.len() == self.vertices.len()
    }

    /// Number of rows of a layered graph (rows are indexed from 0).
    pub fn rows(&self) -> Option<u32> {
        let layout = self.layout.as_ref()?;
        layout
            .values()
            .filter_map(|s| match s {
                Site::Wire { row, .. } => Some(row + 1),
                Site::Bridge { .. } => None,
            })
            .max()
    }

    /// Wire vertex at `(row, col)` of a layered graph.
    pub fn wire(&self, row: u32, col: u32) -> Option<VertexId> {
        let layout = self.layout.as_ref()?;
        layout
            .iter()
            .find(|(_, s)| **s == Site::Wire { row, col })
            .map(|(v, _)| *v)
    }

    /// Breadth-first distances from the given start vertices.
    pub fn distances_from(&self, starts: &[VertexId]) -> BTreeMap<VertexId, usize> {
        let mut dist: BTreeMap<VertexId, usize> = starts.iter().map(|&v| (v, 0)).collect();
        let mut queue: std::collections::VecDeque<VertexId> = starts.iter().copied().collect();
        while let Some(v) = queue.pop_front() {
            let d = dist[&v];
            for w in self.neighbours(v) {
                if !dist.contains_key(&w) {
                    dist.insert(w, d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Checks the structural invariants; used after deserialization.
    pub fn validate(&self) -> Result<(), GraphError> {
        let rebuilt = Self::build(
            self.vertices.clone(),
            self.edges.iter().map(|e| (e.lo(), e.hi())),
            self.inputs.clone(),
            self.outputs.clone(),
            self.layout.clone(),
        )?;
        if rebuilt.max_degree != self.max_degree {
            return Err(GraphError::Invalid("max_degree does not match the edges".into()));
        }
        Ok(())
    }
}

/// Builds D(G): every edge `u - v` becomes `u - w - v` for a fresh vertex `w`.
///
/// New ids start after the largest existing id and follow the sorted edge
/// order. In a layered graph, wire `(r, c)` moves to `(r, 2c)`, a row edge
/// between columns `c` and `c + 1` becomes wire `(r, 2c + 1)`, and an
/// inter-row edge at column `c` becomes a bridge at column `2c`.
pub fn dotted_graph(base: &BaseGraph) -> Result<BaseGraph, GraphError> {
    base.validate()?;
    let (dotted, _) = dotted_graph_with_map(base);
    Ok(dotted)
}

/// Same as [`dotted_graph`], also returning the vertex created for each edge.
pub(crate) fn dotted_graph_with_map(base: &BaseGraph) -> (BaseGraph, BTreeMap<Edge, VertexId>) {
    let next = base.vertices.iter().map(|v| v.0 + 1).max().unwrap_or(0);
    let mut vertices = base.vertices.clone();
    let mut edges = Vec::new();
    let mut edge_vertex = BTreeMap::new();
    let mut layout = base.layout.as_ref().map(|l| {
        l.iter()
            .map(|(v, s)| {
                let s = match *s {
                    Site::Wire { row, col } => Site::Wire { row, col: 2 * col },
                    Site::Bridge { row, col } => Site::Bridge { row, col: 2 * col },
                };
                (*v, s)
            })
            .collect::<BTreeMap<_, _>>()
    });
    for (k, e) in base.edges.iter().enumerate() {
        let w = VertexId(next + k as u32);
        vertices.push(w);
        edges.push((e.lo(), w));
        edges.push((w, e.hi()));
        edge_vertex.insert(*e, w);
        if let (Some(layout), Some(base_layout)) = (layout.as_mut(), base.layout.as_ref()) {
            let site = match (base_layout[&e.lo()], base_layout[&e.hi()]) {
                (Site::Wire { row: r1, col: c1 }, Site::Wire { row: r2, col: c2 }) if r1 == r2 => {
                    Site::Wire { row: r1, col: 2 * c1.min(c2) + 1 }
                }
                (Site::Wire { row: r1, col: c1 }, Site::Wire { row: r2, .. }) => {
                    Site::Bridge { row: r1.min(r2), col: 2 * c1 }
                }
                // dotting an already dotted graph has no layered meaning
                _ => Site::Bridge { row: u32::MAX, col: u32::MAX },
            };
            layout.insert(w, site);
        }
    }
    let layout = layout.filter(|l| !l.values().any(|s| matches!(s, Site::Bridge { row: u32::MAX, .. })));
    let dotted = BaseGraph::build(vertices, edges, base.inputs.clone(), base.outputs.clone(), layout)
        .expect("dotting a valid graph yields a valid graph");
    (dotted, edge_vertex)
}
