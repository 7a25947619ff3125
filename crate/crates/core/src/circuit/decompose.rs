use std::f64::consts::PI;

use super::gate::{mat2_mul, u3_angles, Mat2};
use super::{Circuit, CircuitError, Gate};

fn basis_1q(g: &Gate) -> Vec<Gate> {
    use Gate::*;
    match *g {
        H(q) => vec![Gate::u2(0.0, PI, q)],
        X(q) => vec![Gate::u3(PI, 0.0, PI, q)],
        Y(q) => vec![Gate::u3(PI, PI / 2.0, PI / 2.0, q)],
        Z(q) => vec![Gate::u1(PI, q)],
        S(q) => vec![Gate::u1(PI / 2.0, q)],
        Sdg(q) => vec![Gate::u1(-PI / 2.0, q)],
        T(q) => vec![Gate::u1(PI / 4.0, q)],
        Tdg(q) => vec![Gate::u1(-PI / 4.0, q)],
        Rz { theta, qubit } => vec![Gate::u1(theta, qubit)],
        g => vec![g],
    }
}

/// Textbook six-CX Toffoli.
fn ccx_gates(a: usize, b: usize, c: usize) -> [Gate; 15] {
    use Gate::*;
    [
        H(c),
        Gate::cx(b, c),
        Tdg(c),
        Gate::cx(a, c),
        T(c),
        Gate::cx(b, c),
        Tdg(c),
        Gate::cx(a, c),
        T(b),
        T(c),
        H(c),
        Gate::cx(a, b),
        T(a),
        Tdg(b),
        Gate::cx(a, b),
    ]
}

fn expand(g: &Gate) -> Vec<Gate> {
    use Gate::*;
    match *g {
        Cz(a, b) => vec![H(b), Gate::cx(a, b), H(b)],
        Cp { lambda, control, target } => vec![
            Gate::u1(lambda / 2.0, control),
            Gate::cx(control, target),
            Gate::u1(-lambda / 2.0, target),
            Gate::cx(control, target),
            Gate::u1(lambda / 2.0, target),
        ],
        Swap(a, b) => vec![Gate::cx(a, b), Gate::cx(b, a), Gate::cx(a, b)],
        Ccx { c0, c1, target } => ccx_gates(c0, c1, target).to_vec(),
        g => vec![g],
    }
}

/// Rewrites every convenience gate into `{U1, U2, U3, CX}`; measurements and
/// barriers pass through. The result equals the input up to global phase.
pub fn decompose_to_basis(c: &Circuit) -> Result<Circuit, CircuitError> {
    let mut out = Circuit::new(c.n_qubits(), c.n_clbits()).with_name(c.name());
    for g in c.gates() {
        for h in expand(g) {
            for b in basis_1q(&h) {
                debug_assert!(b.is_basis(), "{b:?}");
                out.push(b)?;
            }
        }
    }
    Ok(out)
}

/// Adjoint circuit: gates reversed and individually inverted.
pub fn inverse(c: &Circuit) -> Result<Circuit, CircuitError> {
    let mut out = Circuit::new(c.n_qubits(), c.n_clbits()).with_name(c.name());
    for g in c.gates().iter().rev() {
        let inv = g.inverse().ok_or(CircuitError::ContainsMeasurement)?;
        out.push(inv)?;
    }
    Ok(out)
}

fn emit_1q(m: &Mat2, q: usize) -> Option<Gate> {
    let (theta, phi, lambda) = u3_angles(m);
    if theta.abs() < 1e-12 {
        let l = super::normalize_angle(phi + lambda);
        if l.abs() < 1e-12 {
            None
        } else {
            Some(Gate::u1(l, q))
        }
    } else if (theta - PI / 2.0).abs() < 1e-12 {
        Some(Gate::u2(phi, lambda, q))
    } else {
        Some(Gate::u3(theta, phi, lambda, q))
    }
}

/// Fuses each maximal run of single-qubit gates on a wire into one basis
/// gate (`U1` when diagonal, `U2` at θ = π/2, otherwise `U3`), dropping runs
/// that multiply to the identity.
pub fn merge_single_qubit_runs(c: &Circuit) -> Result<Circuit, CircuitError> {
    let mut out = Circuit::new(c.n_qubits(), c.n_clbits()).with_name(c.name());
    let mut pending: Vec<Option<Mat2>> = vec![None; c.n_qubits()];
    let flush = |q: usize, pending: &mut Vec<Option<Mat2>>, out: &mut Circuit| {
        if let Some(m) = pending[q].take() {
            if let Some(g) = emit_1q(&m, q) {
                out.push(g)?;
            }
        }
        Ok::<_, CircuitError>(())
    };
    for g in c.gates() {
        if let Some(m) = g.matrix_1q() {
            let q = g.qubits()[0];
            pending[q] = Some(match pending[q] {
                Some(acc) => mat2_mul(&m, &acc),
                None => m,
            });
            continue;
        }
        if matches!(g, Gate::Barrier) {
            for q in 0..c.n_qubits() {
                flush(q, &mut pending, &mut out)?;
            }
        }
        for q in g.qubits() {
            flush(q, &mut pending, &mut out)?;
        }
        out.push(*g)?;
    }
    for q in 0..c.n_qubits() {
        flush(q, &mut pending, &mut out)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{phase_fidelity, unitary_of};

    fn equivalent(a: &Circuit, b: &Circuit) -> bool {
        let ua = unitary_of(a).unwrap();
        let ub = unitary_of(b).unwrap();
        phase_fidelity(&ua, &ub) > 1.0 - 1e-9
    }

    #[test]
    fn h_becomes_u2_0_pi() {
        let c = Circuit::from_gates("", 1, 0, [Gate::H(0)]).unwrap();
        let d = decompose_to_basis(&c).unwrap();
        assert_eq!(d.gates(), &[Gate::u2(0.0, PI, 0)]);
    }

    #[test]
    fn ccx_uses_six_cx() {
        let c = Circuit::from_gates("", 3, 0, [Gate::Ccx { c0: 0, c1: 1, target: 2 }]).unwrap();
        let d = decompose_to_basis(&c).unwrap();
        let n_cx = d.gates().iter().filter(|g| matches!(g, Gate::Cx { .. })).count();
        assert_eq!(n_cx, 6);
        assert!(d.is_basis());
        assert!(equivalent(&c, &d));
    }

    #[test]
    fn swap_is_three_cx_and_equivalent() {
        let c = Circuit::from_gates("", 3, 0, [Gate::Swap(0, 2)]).unwrap();
        let d = decompose_to_basis(&c).unwrap();
        assert_eq!(d.len(), 3);
        assert!(equivalent(&c, &d));
    }

    #[test]
    fn every_convenience_gate_is_preserved() {
        use Gate::*;
        let gates = [
            H(0),
            X(1),
            Y(2),
            Z(0),
            S(1),
            Sdg(2),
            T(0),
            Tdg(1),
            Gate::rz(0.37, 2),
            Cz(0, 2),
            Gate::cp(1.1, 2, 1),
            Swap(1, 0),
            Ccx { c0: 2, c1: 0, target: 1 },
        ];
        for g in gates {
            let c = Circuit::from_gates("", 3, 0, [Gate::u3(0.4, 0.2, 0.9, 0), Gate::H(1), g]).unwrap();
            assert!(equivalent(&c, &decompose_to_basis(&c).unwrap()), "{g:?}");
        }
    }

    #[test]
    fn inverse_rejects_measure() {
        let c = Circuit::from_gates("", 1, 1, [Gate::H(0), Gate::measure(0, 0)]).unwrap();
        assert_eq!(inverse(&c).unwrap_err(), CircuitError::ContainsMeasurement);
    }

    #[test]
    fn inverse_of_u1_and_cx() {
        let c = Circuit::from_gates("", 2, 0, [Gate::u1(0.5, 0), Gate::cx(0, 1)]).unwrap();
        let inv = inverse(&c).unwrap();
        assert_eq!(inv.gates(), &[Gate::cx(0, 1), Gate::u1(-0.5, 0)]);
    }

    #[test]
    fn merging_runs_keeps_unitary() {
        let c = Circuit::from_gates(
            "",
            2,
            0,
            [
                Gate::H(0),
                Gate::S(0),
                Gate::H(0),
                Gate::cx(0, 1),
                Gate::T(1),
                Gate::Tdg(1),
                Gate::X(0),
                Gate::Barrier,
                Gate::Y(1),
            ],
        )
        .unwrap();
        let m = merge_single_qubit_runs(&decompose_to_basis(&c).unwrap()).unwrap();
        assert!(equivalent(&c, &m));
        // T·T† vanishes; the H·S·H run becomes a single gate.
        assert_eq!(m.gates().iter().filter(|g| g.is_single_qubit()).count(), 3);
    }
}
