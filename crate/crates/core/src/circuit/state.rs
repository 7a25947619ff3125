use num_complex::Complex64;

use super::gate::{Gate, Mat2, Pauli};

/// Dense statevector over `n` qubits, little-endian: bit `q` of a basis
/// index is the value of qubit `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩` on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        StateVector { n_qubits, amps }
    }

    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[index] = Complex64::new(1.0, 0.0);
        StateVector { n_qubits, amps }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    /// Resets to `|0…0⟩` without reallocating.
    pub fn reset(&mut self) {
        self.amps.iter_mut().for_each(|a| *a = Complex64::new(0.0, 0.0));
        self.amps[0] = Complex64::new(1.0, 0.0);
    }

    pub fn copy_from(&mut self, other: &StateVector) {
        self.amps.copy_from_slice(&other.amps);
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn apply_1q(&mut self, q: usize, m: &Mat2) {
        let bit = 1usize << q;
        let len = self.amps.len();
        let mut base = 0;
        while base < len {
            for i in base..base + bit {
                let a0 = self.amps[i];
                let a1 = self.amps[i | bit];
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[i | bit] = m[1][0] * a0 + m[1][1] * a1;
            }
            base += 2 * bit;
        }
    }

    pub fn apply_cx(&mut self, control: usize, target: usize) {
        let cb = 1usize << control;
        let tb = 1usize << target;
        for i in 0..self.amps.len() {
            if i & cb != 0 && i & tb == 0 {
                self.amps.swap(i, i | tb);
            }
        }
    }

    pub fn apply_swap(&mut self, a: usize, b: usize) {
        let ab = 1usize << a;
        let bb = 1usize << b;
        for i in 0..self.amps.len() {
            if i & ab != 0 && i & bb == 0 {
                self.amps.swap(i, (i & !ab) | bb);
            }
        }
    }

    pub fn apply_ccx(&mut self, c0: usize, c1: usize, target: usize) {
        let mask = (1usize << c0) | (1usize << c1);
        let tb = 1usize << target;
        for i in 0..self.amps.len() {
            if i & mask == mask && i & tb == 0 {
                self.amps.swap(i, i | tb);
            }
        }
    }

    /// Multiplies amplitudes with both `a` and `b` set by `phase`.
    pub fn apply_controlled_phase(&mut self, a: usize, b: usize, phase: Complex64) {
        let mask = (1usize << a) | (1usize << b);
        for (i, amp) in self.amps.iter_mut().enumerate() {
            if i & mask == mask {
                *amp *= phase;
            }
        }
    }

    pub fn apply_pauli(&mut self, q: usize, p: Pauli) {
        let bit = 1usize << q;
        let i_unit = Complex64::new(0.0, 1.0);
        match p {
            Pauli::I => {}
            Pauli::X => {
                for i in 0..self.amps.len() {
                    if i & bit == 0 {
                        self.amps.swap(i, i | bit);
                    }
                }
            }
            Pauli::Z => {
                for (i, amp) in self.amps.iter_mut().enumerate() {
                    if i & bit != 0 {
                        *amp = -*amp;
                    }
                }
            }
            Pauli::Y => {
                // Y|0⟩ = i|1⟩, Y|1⟩ = -i|0⟩
                for i in 0..self.amps.len() {
                    if i & bit == 0 {
                        let a0 = self.amps[i];
                        let a1 = self.amps[i | bit];
                        self.amps[i] = -i_unit * a1;
                        self.amps[i | bit] = i_unit * a0;
                    }
                }
            }
        }
    }

    /// Applies any unitary gate. Measurement and barrier are no-ops here;
    /// sampling is the caller's business.
    pub fn apply_gate(&mut self, g: &Gate) {
        match *g {
            Gate::Cx { control, target } => self.apply_cx(control, target),
            Gate::Swap(a, b) => self.apply_swap(a, b),
            Gate::Ccx { c0, c1, target } => self.apply_ccx(c0, c1, target),
            Gate::Cz(a, b) => self.apply_controlled_phase(a, b, Complex64::new(-1.0, 0.0)),
            Gate::Cp { lambda, control, target } => {
                self.apply_controlled_phase(control, target, Complex64::from_polar(1.0, lambda))
            }
            Gate::Measure { .. } | Gate::Barrier => {}
            ref g1 => {
                let q = g1.qubits()[0];
                let m = g1.matrix_1q().expect("single-qubit gate has a matrix");
                self.apply_1q(q, &m);
            }
        }
    }

    /// Probability of each assignment of `qubits`, indexed so that bit `k`
    /// of the index is the value of `qubits[k]`.
    pub fn marginal(&self, qubits: &[usize]) -> Vec<f64> {
        let mut out = vec![0.0; 1 << qubits.len()];
        for (i, a) in self.amps.iter().enumerate() {
            let p = a.norm_sqr();
            if p == 0.0 {
                continue;
            }
            let mut key = 0usize;
            for (k, &q) in qubits.iter().enumerate() {
                key |= ((i >> q) & 1) << k;
            }
            out[key] += p;
        }
        out
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::gate::pauli_matrix;

    #[test]
    fn pauli_fast_paths_match_matrices() {
        let mut base = StateVector::zero(2);
        base.apply_gate(&Gate::u3(0.7, 0.3, -1.1, 0));
        base.apply_gate(&Gate::u3(1.9, -0.4, 0.5, 1));
        base.apply_cx(0, 1);
        for p in Pauli::NON_IDENTITY {
            for q in 0..2 {
                let mut fast = base.clone();
                fast.apply_pauli(q, p);
                let mut slow = base.clone();
                slow.apply_1q(q, &pauli_matrix(p));
                for (a, b) in fast.amplitudes().iter().zip(slow.amplitudes()) {
                    assert!((a - b).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn marginal_orders_bits_by_argument() {
        let mut s = StateVector::zero(3);
        s.apply_gate(&Gate::X(2));
        assert_eq!(s.marginal(&[2, 0]), vec![0.0, 1.0, 0.0, 0.0]);
        assert_eq!(s.marginal(&[0, 2]), vec![0.0, 0.0, 1.0, 0.0]);
    }
}
