use std::collections::{BTreeMap, BTreeSet};

use super::base::VertexId;
use super::colouring::{computation_vertex_with, TrapColouring};
use super::dtg::{BaseLocation, DtgGraph, DtgVertexKind};
use super::flow::{compute_flow, dependency_sets, DependencySets, Flow};
use super::GraphError;

/// Base-graph distance within which the extended past of a vertex must lie.
pub const EXTENDED_PAST_RADIUS: usize = 2;

/// Flow and dependency sets of D(G), the graph the computation runs on.
#[derive(Clone, Debug)]
pub struct DottedDependencies {
    pub flow: Flow,
    pub deps: DependencySets,
}

impl DottedDependencies {
    pub fn new(dtg: &DtgGraph) -> Result<Self, GraphError> {
        let flow = compute_flow(dtg.dotted())?;
        let deps = dependency_sets(dtg.dotted(), &flow);
        Ok(DottedDependencies { flow, deps })
    }
}

/// Dependencies of one DT(G) vertex under a fixed colouring.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ColouredPast {
    pub x: BTreeSet<VertexId>,
    pub z: BTreeSet<VertexId>,
    /// Computation input vertices whose pad X key Z-corrects this vertex.
    pub input_z: BTreeSet<VertexId>,
}

impl ColouredPast {
    pub fn all(&self) -> BTreeSet<VertexId> {
        self.x.union(&self.z).copied().collect()
    }
}

fn coloured_past_with(
    dtg: &DtgGraph,
    dd: &DottedDependencies,
    i: VertexId,
    slot_of: impl Fn(VertexId) -> Option<u8> + Copy,
) -> Option<ColouredPast> {
    let site = dtg.dotted_site(i);
    let map = |sites: &mut dyn Iterator<Item = VertexId>| -> Option<BTreeSet<VertexId>> {
        sites.map(|s| computation_vertex_with(dtg, s, slot_of)).collect()
    };
    Some(ColouredPast {
        x: map(&mut dd.deps.x_of(site))?,
        z: map(&mut dd.deps.z_of(site))?,
        input_z: map(&mut dd.deps.input_z_of(site))?,
    })
}

/// Past of `i` under colouring `col`: empty unless `i` is a computation vertex,
/// since traps and dummies are measured with a zero default angle.
pub fn past_under(dtg: &DtgGraph, dd: &DottedDependencies, col: &TrapColouring, i: VertexId) -> ColouredPast {
    if !col.is_computation(i) {
        return ColouredPast::default();
    }
    coloured_past_with(dtg, dd, i, |v| col.computation_slot(dtg, v)).expect("a full colouring fixes every site")
}

fn location_vertices(loc: BaseLocation) -> Vec<VertexId> {
    match loc {
        BaseLocation::Vertex { vertex } => vec![vertex],
        BaseLocation::Edge { edge } => vec![edge.lo(), edge.hi()],
    }
}

/// EP_i: every vertex that lies in the past of `i` under some trap-colouring.
///
/// Only the primary sets of base vertices that the dependency sites of `i`
/// touch are enumerated (their computation slots), fixing `i` itself to be a
/// computation vertex. Those base vertices must lie within
/// [`EXTENDED_PAST_RADIUS`] of the base location of `i`.
pub fn extended_past(dtg: &DtgGraph, dd: &DottedDependencies, i: VertexId) -> Result<BTreeSet<VertexId>, GraphError> {
    let own = dtg.vertex(i);
    let own_slots: BTreeMap<VertexId, u8> = match own.kind {
        DtgVertexKind::Primary { vertex, slot } => BTreeMap::from([(vertex, slot)]),
        DtgVertexKind::Added { edge, lo_slot, hi_slot } => BTreeMap::from([(edge.lo(), lo_slot), (edge.hi(), hi_slot)]),
    };
    let site = dtg.dotted_site(i);
    let mut touched = BTreeSet::new();
    for s in dd.deps.past(site).into_iter().chain(dd.deps.input_z_of(site)) {
        touched.extend(location_vertices(dtg.site_location(s)));
    }
    let dist = dtg.base().distances_from(&own_slots.keys().copied().collect::<Vec<_>>());
    if let Some(far) = touched.iter().find(|v| dist.get(v).map_or(true, |d| *d > EXTENDED_PAST_RADIUS)) {
        return Err(GraphError::LocalityViolation { vertex: i, base_vertex: *far });
    }
    let free: Vec<VertexId> = touched.into_iter().filter(|v| !own_slots.contains_key(v)).collect();
    let mut ep = BTreeSet::new();
    let total = 3usize.pow(free.len() as u32);
    for code in 0..total {
        let mut slots = own_slots.clone();
        let mut c = code;
        for v in &free {
            slots.insert(*v, (c % 3) as u8);
            c /= 3;
        }
        let past = coloured_past_with(dtg, dd, i, |v| slots.get(&v).copied())
            .expect("every touched base vertex has a slot");
        ep.extend(past.all());
    }
    Ok(ep)
}

/// Extended pasts of every DT(G) vertex.
pub fn extended_pasts(dtg: &DtgGraph, dd: &DottedDependencies) -> Result<BTreeMap<VertexId, BTreeSet<VertexId>>, GraphError> {
    dtg.vertices().iter().map(|v| Ok((v.id, extended_past(dtg, dd, v.id)?))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{dotted_triple_graph, sample_trap_colouring, BaseGraph};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn first_layer_has_empty_extended_past() {
        let dtg = dotted_triple_graph(&BaseGraph::path(3).unwrap()).unwrap();
        let dd = DottedDependencies::new(&dtg).unwrap();
        for &p in dtg.primary_set(VertexId(0)).unwrap() {
            assert!(extended_past(&dtg, &dd, p).unwrap().is_empty());
        }
    }

    #[test]
    fn sampled_pasts_are_inside_extended_past() {
        let dtg = dotted_triple_graph(&BaseGraph::grid(2, 3, &[(0, 1)]).unwrap()).unwrap();
        let dd = DottedDependencies::new(&dtg).unwrap();
        let ep = extended_pasts(&dtg, &dd).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let col = sample_trap_colouring(&dtg, &mut rng);
            for v in dtg.vertices() {
                assert!(past_under(&dtg, &dd, &col, v.id).all().is_subset(&ep[&v.id]));
            }
        }
    }

    #[test]
    fn extended_past_size_is_bounded() {
        let dtg = dotted_triple_graph(&BaseGraph::grid(2, 4, &[(0, 1)]).unwrap()).unwrap();
        let dd = DottedDependencies::new(&dtg).unwrap();
        let ep = extended_pasts(&dtg, &dd).unwrap();
        let c = dtg.base().max_degree();
        assert!(ep.values().all(|s| s.len() <= 3 * (3 * c + 1)));
    }
}
