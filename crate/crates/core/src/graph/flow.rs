use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::base::{BaseGraph, Site, VertexId};
use super::GraphError;

/// Row-preserving flow of a layered graph plus a total measurement order.
///
/// Bridge vertices (dotted inter-row edges) are measured in the Y basis and
/// sit outside the flow function: they are neither in its domain nor its
/// image, and their outcome only Z-corrects their two neighbours.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flow {
    #[serde(with = "super::keys")]
    pub f: BTreeMap<VertexId, VertexId>,
    pub order: Vec<VertexId>,
    #[serde(default)]
    pub bridges: BTreeSet<VertexId>,
}

impl Flow {
    pub fn successor(&self, v: VertexId) -> Option<VertexId> {
        self.f.get(&v).copied()
    }

    pub fn predecessor(&self, v: VertexId) -> Option<VertexId> {
        self.f.iter().find(|(_, w)| **w == v).map(|(u, _)| *u)
    }

    pub fn position(&self) -> BTreeMap<VertexId, usize> {
        self.order.iter().enumerate().map(|(k, v)| (*v, k)).collect()
    }

    pub fn is_bridge(&self, v: VertexId) -> bool {
        self.bridges.contains(&v)
    }
}

/// The canonical flow `(row, col) -> (row, col + 1)` with a column-major order.
pub fn compute_flow(g: &BaseGraph) -> Result<Flow, GraphError> {
    let layout = g.layout().ok_or_else(|| GraphError::NotLayered("no row/column layout".into()))?;
    let rows = g.rows().ok_or_else(|| GraphError::NotLayered("no wire vertices".into()))?;
    let mut width = None;
    for r in 0..rows {
        let mut cols: Vec<u32> = layout
            .values()
            .filter_map(|s| match s {
                Site::Wire { row, col } if *row == r => Some(*col),
                _ => None,
            })
            .collect();
        cols.sort();
        if cols.iter().enumerate().any(|(k, c)| *c != k as u32) {
            return Err(GraphError::NotLayered(format!("row {r} columns are not contiguous from 0")));
        }
        match width {
            None => width = Some(cols.len() as u32),
            Some(w) if w != cols.len() as u32 => {
                return Err(GraphError::NotLayered("rows have different lengths".into()))
            }
            _ => {}
        }
    }
    let width = width.unwrap_or(0);
    let wire = |r: u32, c: u32| g.wire(r, c).expect("wire exists");

    for e in g.edges() {
        let (a, b) = (layout[&e.lo()], layout[&e.hi()]);
        let ok = match (a, b) {
            (Site::Wire { row: r1, col: c1 }, Site::Wire { row: r2, col: c2 }) => {
                (r1 == r2 && c1.abs_diff(c2) == 1) || (c1 == c2 && r1.abs_diff(r2) == 1)
            }
            (Site::Bridge { row, col }, Site::Wire { row: r, col: c })
            | (Site::Wire { row: r, col: c }, Site::Bridge { row, col }) => c == col && (r == row || r == row + 1),
            _ => false,
        };
        if !ok {
            return Err(GraphError::NotLayered(format!("edge {e} does not fit the row/column layout")));
        }
    }
    let mut bridges = BTreeSet::new();
    for (&v, s) in layout {
        if let Site::Bridge { row, col } = *s {
            if row + 1 >= rows || col >= width || g.degree(v) != 2 {
                return Err(GraphError::NotLayered(format!("bridge {v} is malformed")));
            }
            bridges.insert(v);
        }
    }
    let mut f = BTreeMap::new();
    for r in 0..rows {
        for c in 0..width {
            if c + 1 < width {
                let (a, b) = (wire(r, c), wire(r, c + 1));
                if !g.has_edge(a, b) {
                    return Err(GraphError::NotLayered(format!("row {r} is broken between columns {c} and {}", c + 1)));
                }
                f.insert(a, b);
            }
        }
    }
    let want_in: BTreeSet<VertexId> = (0..rows).map(|r| wire(r, 0)).collect();
    let want_out: BTreeSet<VertexId> = (0..rows).map(|r| wire(r, width - 1)).collect();
    if g.inputs().iter().copied().collect::<BTreeSet<_>>() != want_in
        || g.outputs().iter().copied().collect::<BTreeSet<_>>() != want_out
    {
        return Err(GraphError::NotLayered("inputs/outputs must be the first/last columns".into()));
    }
    let mut order: Vec<VertexId> = g.vertices().to_vec();
    order.sort_by_key(|v| layout[v].order_key());
    let flow = Flow { f, order, bridges };
    check_flow(g, &flow)?;
    Ok(flow)
}

/// Verifies the flow conditions: `f(i)` is a non-input neighbour of `i`, `f`
/// is injective, `i` precedes `f(i)`, and `i` precedes every other neighbour
/// of `f(i)`. Bridges must follow their Z-dependencies and precede their
/// neighbours.
pub fn check_flow(g: &BaseGraph, flow: &Flow) -> Result<(), GraphError> {
    let pos = flow.position();
    let bad = |m: String| Err(GraphError::FlowViolation(m));
    if pos.len() != g.vertices().len() || g.vertices().iter().any(|v| !pos.contains_key(v)) {
        return bad("order is not a permutation of the vertices".into());
    }
    let mut image = BTreeSet::new();
    for (&i, &fi) in &flow.f {
        if !g.has_edge(i, fi) {
            return bad(format!("f({i}) = {fi} is not a neighbour"));
        }
        if g.is_input(fi) || g.is_output(i) {
            return bad(format!("f({i}) = {fi} maps from an output or into an input"));
        }
        if !image.insert(fi) {
            return bad(format!("f is not injective at {fi}"));
        }
        if pos[&i] >= pos[&fi] {
            return bad(format!("{i} does not precede f({i}) = {fi}"));
        }
        for j in g.neighbours(fi) {
            if j != i && pos[&i] >= pos[&j] {
                return bad(format!("{i} does not precede {j}, a neighbour of f({i})"));
            }
        }
    }
    for v in g.vertices() {
        let covered = flow.f.contains_key(v) || flow.bridges.contains(v) || g.is_output(*v);
        if !covered {
            return bad(format!("measured vertex {v} has no successor"));
        }
    }
    for &b in &flow.bridges {
        if flow.f.contains_key(&b) || image.contains(&b) {
            return bad(format!("bridge {b} takes part in the flow function"));
        }
        for n in g.neighbours(b) {
            if pos[&b] >= pos[&n] {
                return bad(format!("bridge {b} must precede its neighbour {n}"));
            }
            if g.is_output(n) {
                return bad(format!("bridge {b} touches output {n}"));
            }
        }
        for (&j, &fj) in &flow.f {
            if g.has_edge(fj, b) && pos[&j] >= pos[&b] {
                return bad(format!("bridge {b} precedes its dependency {j}"));
            }
        }
    }
    Ok(())
}

/// X and Z correction sources per vertex.
///
/// `x[i] = {f^-1(i)}`; `z[i] = {j : f(j) in N(i), j != i}` together with the
/// bridges adjacent to `i`. `input_z[i]` lists the inputs adjacent to `i`:
/// an input's one-time-pad X key acts on `i` like the outcome of a flow
/// predecessor of that input.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DependencySets {
    #[serde(with = "super::keys")]
    pub x: BTreeMap<VertexId, BTreeSet<VertexId>>,
    #[serde(with = "super::keys")]
    pub z: BTreeMap<VertexId, BTreeSet<VertexId>>,
    #[serde(with = "super::keys")]
    pub input_z: BTreeMap<VertexId, BTreeSet<VertexId>>,
}

impl DependencySets {
    /// P_i = X_i ∪ Z_i.
    pub fn past(&self, v: VertexId) -> BTreeSet<VertexId> {
        let mut p = self.x.get(&v).cloned().unwrap_or_default();
        p.extend(self.z.get(&v).into_iter().flatten().copied());
        p
    }

    pub fn x_of(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.x.get(&v).into_iter().flatten().copied()
    }

    pub fn z_of(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.z.get(&v).into_iter().flatten().copied()
    }

    pub fn input_z_of(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.input_z.get(&v).into_iter().flatten().copied()
    }
}

pub fn dependency_sets(g: &BaseGraph, flow: &Flow) -> DependencySets {
    let mut deps = DependencySets::default();
    for &i in g.vertices() {
        let x: BTreeSet<VertexId> = flow.f.iter().filter(|(_, fj)| **fj == i).map(|(j, _)| *j).collect();
        let mut z: BTreeSet<VertexId> = flow
            .f
            .iter()
            .filter(|(j, fj)| **j != i && g.has_edge(**fj, i))
            .map(|(j, _)| *j)
            .collect();
        z.extend(g.neighbours(i).filter(|n| flow.bridges.contains(n)));
        let input_z: BTreeSet<VertexId> = g.neighbours(i).filter(|n| g.is_input(*n)).collect();
        deps.x.insert(i, x);
        deps.z.insert(i, z);
        deps.input_z.insert(i, input_z);
    }
    deps
}
