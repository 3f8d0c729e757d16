//! Runs compiled patterns as plain MBQC and compares against the circuit
//! unitary via the Choi state.

mod support;

use qyao::pattern::{compile_circuit, Circuit, Gate};
use support::{expected_choi, run_choi};

fn check(c: Circuit) {
    let p = compile_circuit(&c).unwrap();
    let want = expected_choi(&c);
    for seed in 0..16 {
        let got = run_choi(&p, seed);
        let d = got.trace_distance(&want);
        assert!(d < 1e-9, "{:?} seed {seed}: trace distance {d}", c.gates);
    }
}

#[test]
fn identity_wire() {
    check(Circuit { rows: 1, gates: vec![Gate::Identity] });
    check(Circuit { rows: 1, gates: vec![Gate::Identity, Gate::Identity] });
}

#[test]
fn single_qubit_gates() {
    check(Circuit { rows: 1, gates: vec![Gate::T { wire: 0 }] });
    check(Circuit { rows: 1, gates: vec![Gate::H { wire: 0 }] });
    check(Circuit { rows: 1, gates: vec![Gate::H { wire: 0 }, Gate::T { wire: 0 }, Gate::H { wire: 0 }] });
}

#[test]
fn two_qubit_gates() {
    check(Circuit { rows: 2, gates: vec![Gate::Cz { a: 0, b: 1 }] });
    check(Circuit { rows: 2, gates: vec![Gate::Cnot { control: 0, target: 1 }] });
    check(Circuit { rows: 2, gates: vec![Gate::Cnot { control: 1, target: 0 }, Gate::T { wire: 1 }] });
}
