//! Oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use num_complex::Complex64;
use qyao::pattern::{corrected_angle, Circuit};
use qyao::qsim::DensityMatrix;
use qyao::{MeasurementPattern, QuantumState, VertexId};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const REF: u32 = 1_000_000;

/// Maximally entangled state of `n` reference qubits with `n` system qubits,
/// ordered references first.
pub fn choi_input(n: u32) -> Vec<Complex64> {
    let dim = 1usize << n;
    let mut v = vec![Complex64::new(0.0, 0.0); dim * dim];
    let amp = 1.0 / (dim as f64).sqrt();
    for i in 0..dim {
        v[i * dim + i] = Complex64::new(amp, 0.0);
    }
    v
}

pub fn run_choi(p: &MeasurementPattern, seed: u64) -> DensityMatrix<f64> {
    let g = p.graph();
    let rows = p.rows();
    let inputs = p.input_wires();
    let outputs = p.output_wires();
    let mut s = QuantumState::new();
    let mut order: Vec<u32> = (0..rows).map(|r| REF + r).collect();
    order.extend(inputs.iter().map(|v| v.0));
    s.prepare_register(&order, &choi_input(rows)).unwrap();
    for v in g.vertices() {
        if !g.is_input(*v) {
            s.prepare_plus_theta(v.0, qyao::Angle::ZERO).unwrap();
        }
    }
    for e in g.edges() {
        s.cz(e.lo().0, e.hi().0).unwrap();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut outcomes: BTreeMap<VertexId, u8> = BTreeMap::new();
    for v in p.measured().collect::<Vec<_>>() {
        let a = corrected_angle(v, p.phi(v).unwrap(), &outcomes, p.deps()).unwrap();
        outcomes.insert(v, s.measure_angle(v.0, a, &mut rng).unwrap());
    }
    for o in &outputs {
        let sx: u8 = p.deps().x_of(*o).map(|j| outcomes[&j]).fold(0, |a, b| a ^ b);
        let sz: u8 = p.deps().z_of(*o).map(|j| outcomes[&j]).fold(0, |a, b| a ^ b);
        if sx == 1 {
            s.x(o.0).unwrap();
        }
        if sz == 1 {
            s.z(o.0).unwrap();
        }
    }
    let mut keep: Vec<u32> = (0..rows).map(|r| REF + r).collect();
    keep.extend(outputs.iter().map(|v| v.0));
    s.reduced_density(&keep).unwrap()
}

pub fn expected_choi(c: &Circuit) -> DensityMatrix<f64> {
    let n = c.rows;
    let u = c.unitary();
    let dim = 1usize << n;
    // I ⊗ U
    let mut big = vec![Complex64::new(0.0, 0.0); dim * dim * dim * dim];
    let d2 = dim * dim;
    for r in 0..dim {
        for i in 0..dim {
            for j in 0..dim {
                big[(r * dim + i) * d2 + (r * dim + j)] = u[i * dim + j];
            }
        }
    }
    DensityMatrix::from_pure(&choi_input(n)).conjugate_by(&big)
}

/// Choi state of a dense `2^n × 2^n` unitary.
pub fn choi_of(n: u32, u: &[Complex64]) -> DensityMatrix<f64> {
    let dim = 1usize << n;
    let d2 = dim * dim;
    let mut big = vec![Complex64::new(0.0, 0.0); d2 * d2];
    for r in 0..dim {
        for i in 0..dim {
            for j in 0..dim {
                big[(r * dim + i) * d2 + (r * dim + j)] = u[i * dim + j];
            }
        }
    }
    DensityMatrix::from_pure(&choi_input(n)).conjugate_by(&big)
}

/// Row-major product `a · b` of square matrices.
pub fn matmul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let dim = (a.len() as f64).sqrt() as usize;
    let mut out = vec![Complex64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        for k in 0..dim {
            for j in 0..dim {
                out[i * dim + j] += a[i * dim + k] * b[k * dim + j];
            }
        }
    }
    out
}

/// Hand-written gate matrices; wire 0 is the most significant bit.
pub mod gates {
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    pub fn identity(n: u32) -> Vec<Complex64> {
        let d = 1usize << n;
        (0..d * d).map(|k| if k / d == k % d { c(1.0, 0.0) } else { c(0.0, 0.0) }).collect()
    }

    pub fn h() -> Vec<Complex64> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        vec![c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)]
    }

    pub fn t() -> Vec<Complex64> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, s)]
    }

    pub fn cz() -> Vec<Complex64> {
        let mut m = identity(2);
        m[15] = c(-1.0, 0.0);
        m
    }

    /// Control on wire 0, target on wire 1.
    pub fn cnot01() -> Vec<Complex64> {
        let (o, l) = (c(0.0, 0.0), c(1.0, 0.0));
        vec![l, o, o, o, o, l, o, o, o, o, o, l, o, o, l, o]
    }

    /// `a ⊗ b`.
    pub fn kron(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
        let (da, db) = ((a.len() as f64).sqrt() as usize, (b.len() as f64).sqrt() as usize);
        let d = da * db;
        let mut out = vec![c(0.0, 0.0); d * d];
        for i in 0..da {
            for j in 0..da {
                for k in 0..db {
                    for l in 0..db {
                        out[(i * db + k) * d + j * db + l] = a[i * da + j] * b[k * db + l];
                    }
                }
            }
        }
        out
    }
}
