use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{Circuit, CircuitError, Gate, StateVector};

pub const MAX_UNITARY_QUBITS: usize = 10;

/// Dense `2ⁿ×2ⁿ` unitary of a measurement-free circuit, column `j` being the
/// image of basis state `j` (little-endian qubit order). Barriers are ignored.
pub fn unitary_of(c: &Circuit) -> Result<DMatrix<Complex64>, CircuitError> {
    let n = c.n_qubits();
    if n > MAX_UNITARY_QUBITS {
        return Err(CircuitError::TooManyQubits { got: n, limit: MAX_UNITARY_QUBITS });
    }
    if c.gates().iter().any(|g| matches!(g, Gate::Measure { .. })) {
        return Err(CircuitError::ContainsMeasurement);
    }
    let dim = 1usize << n;
    let mut u = DMatrix::<Complex64>::zeros(dim, dim);
    for col in 0..dim {
        let mut s = StateVector::basis(n, col);
        for g in c.gates() {
            s.apply_gate(g);
        }
        for (row, a) in s.amplitudes().iter().enumerate() {
            u[(row, col)] = *a;
        }
    }
    Ok(u)
}

/// `|tr(A†B)| / dim`: 1 exactly when `A` and `B` agree up to global phase.
pub fn phase_fidelity(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    assert_eq!(a.shape(), b.shape(), "matrix shapes differ");
    let tr: Complex64 = a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum();
    tr.norm() / a.ncols() as f64
}
