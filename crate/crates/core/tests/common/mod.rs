#![allow(dead_code)]

use std::f64::consts::PI;

use proptest::prelude::*;
use rand::Rng;

use qjit_core::circuit::{Circuit, Gate};
use qjit_core::device::{build_topology, Topology, TopologyPreset};

pub fn topo(preset: &str) -> Topology {
    build_topology(&preset.parse::<TopologyPreset>().unwrap()).unwrap()
}

fn two_distinct(rng: &mut impl Rng, n: usize) -> (usize, usize) {
    let a = rng.random_range(0..n);
    let b = (a + rng.random_range(1..n)) % n;
    (a, b)
}

/// Random unitary gate on `n >= 2` qubits, drawn from the whole gate set or
/// from the basis only.
pub fn random_gate(rng: &mut impl Rng, n: usize, basis_only: bool) -> Gate {
    let q = rng.random_range(0..n);
    let (a, b) = two_distinct(rng, n);
    let ang = |rng: &mut dyn rand::RngCore| rng.random_range(-PI..PI);
    let kinds = if basis_only || n < 3 { 4 } else { 15 };
    match rng.random_range(0..kinds) {
        0 => Gate::u1(ang(rng), q),
        1 => Gate::u2(ang(rng), ang(rng), q),
        2 => Gate::u3(ang(rng), ang(rng), ang(rng), q),
        3 => Gate::cx(a, b),
        4 => Gate::H(q),
        5 => Gate::X(q),
        6 => Gate::Y(q),
        7 => Gate::S(q),
        8 => Gate::Tdg(q),
        9 => Gate::rz(ang(rng), q),
        10 => Gate::Cz(a, b),
        11 => Gate::cp(ang(rng), a, b),
        12 => Gate::Swap(a, b),
        13 => Gate::Z(q),
        _ => {
            let c = (0..n).find(|&c| c != a && c != b).unwrap();
            Gate::Ccx { c0: a, c1: c, target: b }
        }
    }
}

pub fn random_circuit(rng: &mut impl Rng, n: usize, len: usize, basis_only: bool) -> Circuit {
    let gates: Vec<Gate> = (0..len).map(|_| random_gate(rng, n, basis_only)).collect();
    Circuit::from_gates("", n, 0, gates).unwrap()
}

/// Random circuit in the basis on `n` qubits, as a proptest strategy.
pub fn basis_circuit(n: usize, max_len: usize) -> impl Strategy<Value = Circuit> {
    let angle = -PI..PI;
    let gate = prop_oneof![
        (angle.clone(), 0..n).prop_map(|(l, q)| Gate::u1(l, q)),
        (angle.clone(), angle.clone(), 0..n).prop_map(|(p, l, q)| Gate::u2(p, l, q)),
        (angle.clone(), angle.clone(), angle, 0..n).prop_map(|(t, p, l, q)| Gate::u3(t, p, l, q)),
        (0..n, 1..n).prop_map(move |(a, d)| Gate::cx(a, (a + d) % n)),
    ];
    prop::collection::vec(gate, 0..max_len).prop_map(move |g| Circuit::from_gates("", n, 0, g).unwrap())
}

/// Adds `measure q<i> -> c<i>` for every qubit.
pub fn measure_all(c: &Circuit) -> Circuit {
    let mut m = Circuit::new(c.n_qubits(), c.n_qubits());
    m.extend(c.gates().iter().copied()).unwrap();
    for q in 0..c.n_qubits() {
        m.push(Gate::measure(q, q)).unwrap();
    }
    m
}
