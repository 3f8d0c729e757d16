use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Angle, MeasurementPattern, PatternError};
use crate::graph::{dotted_graph, BaseGraph, Site};

/// Gates with a fixed brickwork-style compilation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "gate", rename_all = "snake_case")]
pub enum Gate {
    Identity,
    H { wire: u32 },
    T { wire: u32 },
    /// Controlled-Z between adjacent wires.
    Cz { a: u32, b: u32 },
    /// CNOT between adjacent wires.
    Cnot { control: u32, target: u32 },
}

impl Gate {
    fn check(self, rows: u32) -> Result<(), PatternError> {
        let bad = |m: String| Err(PatternError::UnsupportedGate(m));
        match self {
            Gate::Identity => Ok(()),
            Gate::H { wire } | Gate::T { wire } if wire >= rows => bad(format!("wire {wire} out of range")),
            Gate::Cz { a: x, b: y } | Gate::Cnot { control: x, target: y } => {
                if x >= rows || y >= rows {
                    bad(format!("wires {x}, {y} out of range"))
                } else if x.abs_diff(y) != 1 {
                    bad(format!("two-qubit gate on non-adjacent wires {x}, {y}"))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// Dense matrix on `rows` wires; wire 0 is the most significant bit.
    pub fn matrix(self, rows: u32) -> Vec<Complex64> {
        let dim = 1usize << rows;
        let bit = |i: usize, w: u32| (i >> (rows - 1 - w)) & 1;
        let mut m = vec![Complex64::new(0.0, 0.0); dim * dim];
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for col in 0..dim {
            match self {
                Gate::Identity => m[col * dim + col] = 1.0.into(),
                Gate::T { wire } => {
                    let ph = if bit(col, wire) == 1 { Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4) } else { 1.0.into() };
                    m[col * dim + col] = ph;
                }
                Gate::H { wire } => {
                    let flip = col ^ (1 << (rows - 1 - wire));
                    let sign = if bit(col, wire) == 1 { -1.0 } else { 1.0 };
                    m[col * dim + col] = (sign * s).into();
                    m[flip * dim + col] = s.into();
                }
                Gate::Cz { a, b } => {
                    let v = if bit(col, a) & bit(col, b) == 1 { -1.0 } else { 1.0 };
                    m[col * dim + col] = v.into();
                }
                Gate::Cnot { control, target } => {
                    let row = if bit(col, control) == 1 { col ^ (1 << (rows - 1 - target)) } else { col };
                    m[row * dim + col] = 1.0.into();
                }
            }
        }
        m
    }
}

/// A gate sequence on a fixed number of wires.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Circuit {
    pub rows: u32,
    #[serde(default)]
    pub gates: Vec<Gate>,
}

impl Circuit {
    /// Dense unitary, row-major; wire 0 is the most significant bit.
    pub fn unitary(&self) -> Vec<Complex64> {
        let dim = 1usize << self.rows;
        let mut u = Gate::Identity.matrix(self.rows);
        for g in &self.gates {
            let m = g.matrix(self.rows);
            let mut next = vec![Complex64::new(0.0, 0.0); dim * dim];
            for i in 0..dim {
                for k in 0..dim {
                    let a = m[i * dim + k];
                    if a.norm_sqr() == 0.0 {
                        continue;
                    }
                    for j in 0..dim {
                        next[i * dim + j] += a * u[k * dim + j];
                    }
                }
            }
            u = next;
        }
        u
    }
}

/// Logical angles of a rectangular brickwork-style pattern.
///
/// `angles[row]` holds one angle per measured D(G) column (`2 * (cols - 1)`);
/// `bridges` lists the vertical base edges `(row, col)` joining `row` and
/// `row + 1` at base column `col`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fragment {
    pub rows: u32,
    pub cols: u32,
    pub angles: Vec<Vec<Angle>>,
    pub bridges: Vec<(u32, u32)>,
}

impl Fragment {
    pub fn identity(rows: u32) -> Fragment {
        Fragment { rows, cols: 1, angles: vec![Vec::new(); rows as usize], bridges: Vec::new() }
    }

    fn blank(rows: u32, cols: u32) -> Fragment {
        let m = 2 * (cols as usize - 1);
        Fragment { rows, cols, angles: vec![vec![Angle::ZERO; m]; rows as usize], bridges: Vec::new() }
    }

    /// The pattern on D(G) for this fragment, with bridge phases compensated.
    pub fn to_pattern(&self) -> Result<MeasurementPattern, PatternError> {
        let base = BaseGraph::grid(self.rows, self.cols, &self.bridges)?;
        let dotted = dotted_graph(&base)?;
        let layout = dotted.layout().expect("grid graphs are laid out");
        let mut phi = BTreeMap::new();
        for &v in dotted.vertices() {
            if dotted.is_output(v) {
                continue;
            }
            let a = match layout[&v] {
                Site::Wire { row, col } => self.angles[row as usize][col as usize],
                Site::Bridge { .. } => Angle::HALF_PI,
            };
            phi.insert(v, a);
        }
        let mut p = MeasurementPattern::new(base, phi)?;
        p.compensate_bridges();
        Ok(p)
    }
}

/// Fragment for a single gate on `rows` wires.
pub fn compile_gate(gate: Gate, rows: u32) -> Result<Fragment, PatternError> {
    gate.check(rows)?;
    let set = |f: &mut Fragment, w: u32, a: &[u8]| {
        for (k, e) in a.iter().enumerate() {
            f.angles[w as usize][k] = Angle::from_eighths(*e as i64);
        }
    };
    Ok(match gate {
        Gate::Identity => Fragment::blank(rows, 2),
        Gate::T { wire } => {
            let mut f = Fragment::blank(rows, 2);
            set(&mut f, wire, &[7, 0]);
            f
        }
        Gate::H { wire } => {
            let mut f = Fragment::blank(rows, 3);
            set(&mut f, wire, &[6, 6, 6, 0]);
            f
        }
        Gate::Cz { a, b } => {
            let mut f = Fragment::blank(rows, 2);
            f.bridges.push((a.min(b), 0));
            f
        }
        Gate::Cnot { control, target } => compose_patterns(
            rows,
            &[
                compile_gate(Gate::H { wire: target }, rows)?,
                compile_gate(Gate::Cz { a: control, b: target }, rows)?,
                compile_gate(Gate::H { wire: target }, rows)?,
            ],
        )?,
    })
}

/// Stitches fragments left to right: the output column of one is the input
/// column of the next, so widths add up to `1 + Σ (cols - 1)`.
pub fn compose_patterns(rows: u32, parts: &[Fragment]) -> Result<Fragment, PatternError> {
    let mut out = Fragment::identity(rows);
    for p in parts {
        if p.rows != rows {
            return Err(PatternError::ShapeMismatch(format!("fragment has {} rows, expected {rows}", p.rows)));
        }
        let offset = out.cols - 1;
        for (acc, add) in out.angles.iter_mut().zip(&p.angles) {
            acc.extend_from_slice(add);
        }
        out.bridges.extend(p.bridges.iter().map(|(r, c)| (*r, c + offset)));
        out.cols += p.cols - 1;
    }
    Ok(out)
}

/// Compiles a whole circuit to a measurement pattern.
pub fn compile_circuit(circuit: &Circuit) -> Result<MeasurementPattern, PatternError> {
    if circuit.rows == 0 {
        return Err(PatternError::UnsupportedGate("circuit needs at least one wire".into()));
    }
    let parts = circuit.gates.iter().map(|g| compile_gate(*g, circuit.rows)).collect::<Result<Vec<_>, _>>()?;
    compose_patterns(circuit.rows, &parts)?.to_pattern()
}
