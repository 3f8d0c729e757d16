use std::collections::BTreeMap;

use crate::graph::{DtgGraph, Flow, VertexId};

/// Public measurement order of DT(G): vertices follow the D(G) order of the
/// site they would compute at, ties broken by label. It does not depend on
/// the colouring.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DtgOrder {
    pub order: Vec<VertexId>,
    pub measured: Vec<VertexId>,
    pub outputs: Vec<VertexId>,
}

impl DtgOrder {
    pub fn position(&self) -> BTreeMap<VertexId, usize> {
        self.order.iter().enumerate().map(|(k, v)| (*v, k)).collect()
    }
}

pub fn dtg_measurement_order(dtg: &DtgGraph, dotted_flow: &Flow) -> DtgOrder {
    let site_pos = dotted_flow.position();
    let mut order: Vec<VertexId> = dtg.vertices().iter().map(|v| v.id).collect();
    order.sort_by_key(|v| (site_pos[&dtg.dotted_site(*v)], *v));
    let (outputs, measured) = order.iter().partition(|v| dtg.is_output_layer(**v));
    DtgOrder { order, measured, outputs }
}
