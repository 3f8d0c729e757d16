use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::AdversaryError;
use crate::graph::{dummy_positions, TrapColouring, VertexId};
use crate::protocol::{run_qyao, Client, ClientSecrets, HonestServer, PartyInput, ProtocolError, ProtocolSetup};
use crate::qsim::{DensityMatrix, QuantumState};
use crate::Angle;

/// Largest number of secret assignments the exact mode will enumerate.
const EXACT_LIMIT: u64 = 1 << 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlindnessMode {
    Exact,
    MonteCarlo { samples: u64, seed: u64 },
}

/// Result of comparing the server's view of two computations.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BlindnessReport {
    pub mode: BlindnessMode,
    /// Exact: trace distance of the averaged received states.
    pub trace_distance: Option<f64>,
    /// Monte Carlo: largest per-round z-score of the (δ, b) histograms.
    pub max_z: Option<f64>,
    pub rounds: usize,
    pub indistinguishable: bool,
}

fn check_shape(a: &ProtocolSetup, b: &ProtocolSetup) -> Result<(), AdversaryError> {
    let mismatch = |what: &str| Err(AdversaryError::ShapeMismatch(what.into()));
    if a.dtg().len() != b.dtg().len() || a.dtg().edges() != b.dtg().edges() {
        return mismatch("DT(G) differs");
    }
    if a.order().order != b.order().order || a.order().outputs != b.order().outputs {
        return mismatch("measurement order differs");
    }
    if a.server_input_rows() != b.server_input_rows() || a.server_output_rows() != b.server_output_rows() {
        return mismatch("server rows differ");
    }
    for row in 0..a.rows() {
        if a.extended_past(a.input_base(row)) != b.extended_past(b.input_base(row)) {
            return mismatch("extended pasts differ");
        }
    }
    Ok(())
}

/// Averaged state of every DT(G) qubit as the server receives it, over all
/// colourings, θ, r, dummy bits and input pads.
///
/// Only setups without measured vertices and without server inputs are
/// supported: then the server's view is exactly these qubits.
pub fn exact_server_view(setup: &ProtocolSetup, client: &PartyInput) -> Result<DensityMatrix<f64>, AdversaryError> {
    if !setup.order().measured.is_empty() || !setup.server_input_rows().is_empty() {
        return Err(AdversaryError::Unsupported("exact mode needs a graph with no measured vertices and no server input".into()));
    }
    let dtg = setup.dtg();
    let n = dtg.len();
    let bases: Vec<VertexId> = dtg.primary_sets().keys().copied().collect();
    let dummies = dummy_positions(&TrapColouring::from_permutations(dtg, &bases.iter().map(|v| (*v, 0)).collect()), dtg)
        .map_err(ProtocolError::from)?
        .len();
    let rows = setup.rows() as usize;
    // colouring, θ, r, d, x as mixed-radix digits
    let total = 6u64.pow(bases.len() as u32) * 8u64.pow(n as u32) * 2u64.pow((n + dummies + rows) as u32);
    if total > EXACT_LIMIT {
        return Err(AdversaryError::Unsupported(format!("{total} secret assignments")));
    }
    let labels: Vec<u32> = (0..n as u32).collect();
    let dim = 1usize << n;
    let sum = (0..total)
        .into_par_iter()
        .map(|mut k| -> Result<Vec<Complex64>, AdversaryError> {
            let mut digit = |radix: u64| {
                let d = k % radix;
                k /= radix;
                d
            };
            let perms = bases.iter().map(|v| (*v, digit(6) as usize)).collect();
            let colouring = TrapColouring::from_permutations(dtg, &perms);
            let theta = (0..n).map(|_| Angle::from_eighths(digit(8) as i64)).collect();
            let r = (0..n).map(|_| digit(2) as u8).collect();
            let d = dummy_positions(&colouring, dtg).map_err(ProtocolError::from)?.into_iter().map(|v| (v, digit(2) as u8)).collect();
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
                secrets.x.insert(v, digit(2) as u8);
            }
            let client_party = Client::new(setup, secrets);
            let mut engine = QuantumState::<f64>::new();
            client_party.prepare_all(&mut engine, client, &BTreeMap::new())?;
            let rho = engine.reduced_density(&labels).map_err(ProtocolError::from)?;
            Ok(rho.data().to_vec())
        })
        .try_reduce(|| vec![Complex64::new(0.0, 0.0); dim * dim], |mut a, b| {
            a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
            Ok(a)
        })?;
    let scale = 1.0 / total as f64;
    Ok(DensityMatrix::from_raw(n, sum.into_iter().map(|z| z * scale).collect()))
}

/// Per-round histogram of (δ in eighths, b): 16 cells.
fn round_histograms(setup: &ProtocolSetup, client: &PartyInput, server: &PartyInput, samples: u64, seed: u64) -> Result<Vec<[u64; 16]>, AdversaryError> {
    let rounds = setup.order().measured.len();
    (0..samples)
        .into_par_iter()
        .map(|k| -> Result<Vec<[u64; 16]>, AdversaryError> {
            let out = run_qyao(setup, client, server, &mut HonestServer, seed.wrapping_add(k))?;
            let mut h = vec![[0u64; 16]; rounds];
            for (t, round) in out.rounds.iter().enumerate() {
                h[t][(round.delta.eighths() as usize) * 2 + round.b as usize] += 1;
            }
            Ok(h)
        })
        .try_reduce(|| vec![[0u64; 16]; rounds], |mut a, b| {
            for (x, y) in a.iter_mut().zip(&b) {
                x.iter_mut().zip(y).for_each(|(p, q)| *p += q);
            }
            Ok(a)
        })
}

/// Two-sample χ² homogeneity test, mapped to a z-score by Wilson–Hilferty.
pub(crate) fn two_sample_z(a: &[u64], b: &[u64]) -> f64 {
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    let mut chi2 = 0.0;
    let mut cells = 0;
    for (x, y) in a.iter().zip(b) {
        let tot = (x + y) as f64;
        if tot == 0.0 {
            continue;
        }
        cells += 1;
        let (ea, eb) = (tot * na / (na + nb), tot * nb / (na + nb));
        chi2 += (*x as f64 - ea).powi(2) / ea + (*y as f64 - eb).powi(2) / eb;
    }
    let k = (cells.max(2) - 1) as f64;
    let v = 2.0 / (9.0 * k);
    ((chi2 / k).cbrt() - (1.0 - v)) / v.sqrt()
}

/// Compares what the server sees in two computations of the same shape.
///
/// Each case is `(setup, client input, server input)`.
pub fn blindness_experiment(
    a: (&ProtocolSetup, &PartyInput, &PartyInput),
    b: (&ProtocolSetup, &PartyInput, &PartyInput),
    mode: BlindnessMode,
) -> Result<BlindnessReport, AdversaryError> {
    check_shape(a.0, b.0)?;
    match mode {
        BlindnessMode::Exact => {
            let (va, vb) = (exact_server_view(a.0, a.1)?, exact_server_view(b.0, b.1)?);
            let dist = va.trace_distance(&vb);
            Ok(BlindnessReport { mode, trace_distance: Some(dist), max_z: None, rounds: 0, indistinguishable: dist <= 1e-6 })
        }
        BlindnessMode::MonteCarlo { samples, seed } => {
            let ha = round_histograms(a.0, a.1, a.2, samples, seed)?;
            let hb = round_histograms(b.0, b.1, b.2, samples, seed.wrapping_add(samples))?;
            let max_z = ha.iter().zip(&hb).map(|(x, y)| two_sample_z(x, y)).fold(f64::NEG_INFINITY, f64::max);
            let max_z = if ha.is_empty() { 0.0 } else { max_z };
            Ok(BlindnessReport { mode, trace_distance: None, max_z: Some(max_z), rounds: ha.len(), indistinguishable: max_z < 5.0 })
        }
    }
}
