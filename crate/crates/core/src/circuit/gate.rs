use std::f64::consts::PI;

use num_complex::Complex64;

/// 2×2 complex matrix in row-major order.
pub type Mat2 = [[Complex64; 2]; 2];

/// Maps an angle into `(-π, π]`.
pub fn normalize_angle(angle: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut a = angle % two_pi;
    if a <= -PI {
        a += two_pi;
    } else if a > PI {
        a -= two_pi;
    }
    // -0.0 and 0.0 must compare and print the same way.
    if a == 0.0 {
        0.0
    } else {
        a
    }
}

/// A single circuit instruction.
///
/// The basis set is `U1`, `U2`, `U3`, `Cx`, plus `Measure` and `Barrier`.
/// The remaining variants are convenience gates accepted on input and
/// removed by [`decompose_to_basis`](super::decompose_to_basis).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    U1 { lambda: f64, qubit: usize },
    U2 { phi: f64, lambda: f64, qubit: usize },
    U3 { theta: f64, phi: f64, lambda: f64, qubit: usize },
    Cx { control: usize, target: usize },
    Measure { qubit: usize, clbit: usize },
    Barrier,
    H(usize),
    X(usize),
    Y(usize),
    Z(usize),
    S(usize),
    Sdg(usize),
    T(usize),
    Tdg(usize),
    Rz { theta: f64, qubit: usize },
    Cz(usize, usize),
    /// Controlled phase, `diag(1, 1, 1, e^{iλ})`.
    Cp { lambda: f64, control: usize, target: usize },
    Swap(usize, usize),
    Ccx { c0: usize, c1: usize, target: usize },
}

impl Gate {
    pub fn u1(lambda: f64, qubit: usize) -> Self {
        Gate::U1 { lambda: normalize_angle(lambda), qubit }
    }

    pub fn u2(phi: f64, lambda: f64, qubit: usize) -> Self {
        Gate::U2 { phi: normalize_angle(phi), lambda: normalize_angle(lambda), qubit }
    }

    pub fn u3(theta: f64, phi: f64, lambda: f64, qubit: usize) -> Self {
        Gate::U3 {
            theta: normalize_angle(theta),
            phi: normalize_angle(phi),
            lambda: normalize_angle(lambda),
            qubit,
        }
    }

    pub fn cx(control: usize, target: usize) -> Self {
        Gate::Cx { control, target }
    }

    pub fn measure(qubit: usize, clbit: usize) -> Self {
        Gate::Measure { qubit, clbit }
    }

    pub fn rz(theta: f64, qubit: usize) -> Self {
        Gate::Rz { theta: normalize_angle(theta), qubit }
    }

    pub fn cp(lambda: f64, control: usize, target: usize) -> Self {
        Gate::Cp { lambda: normalize_angle(lambda), control, target }
    }

    /// Qubits touched by this gate, in operand order.
    pub fn qubits(&self) -> Vec<usize> {
        use Gate::*;
        match *self {
            U1 { qubit, .. } | U2 { qubit, .. } | U3 { qubit, .. } | Rz { qubit, .. } => {
                vec![qubit]
            }
            H(q) | X(q) | Y(q) | Z(q) | S(q) | Sdg(q) | T(q) | Tdg(q) => vec![q],
            Measure { qubit, .. } => vec![qubit],
            Cx { control, target } | Cp { control, target, .. } => vec![control, target],
            Cz(a, b) | Swap(a, b) => vec![a, b],
            Ccx { c0, c1, target } => vec![c0, c1, target],
            Barrier => Vec::new(),
        }
    }

    pub fn is_basis(&self) -> bool {
        matches!(
            self,
            Gate::U1 { .. }
                | Gate::U2 { .. }
                | Gate::U3 { .. }
                | Gate::Cx { .. }
                | Gate::Measure { .. }
                | Gate::Barrier
        )
    }

    /// True for every gate that acts unitarily on exactly one qubit.
    pub fn is_single_qubit(&self) -> bool {
        !matches!(self, Gate::Measure { .. } | Gate::Barrier) && self.qubits().len() == 1
    }

    pub fn is_multi_qubit(&self) -> bool {
        self.qubits().len() >= 2
    }

    /// Relabels every qubit operand through `map`.
    pub fn remap(&self, map: impl Fn(usize) -> usize) -> Gate {
        use Gate::*;
        match *self {
            U1 { lambda, qubit } => U1 { lambda, qubit: map(qubit) },
            U2 { phi, lambda, qubit } => U2 { phi, lambda, qubit: map(qubit) },
            U3 { theta, phi, lambda, qubit } => U3 { theta, phi, lambda, qubit: map(qubit) },
            Cx { control, target } => Cx { control: map(control), target: map(target) },
            Measure { qubit, clbit } => Measure { qubit: map(qubit), clbit },
            Barrier => Barrier,
            H(q) => H(map(q)),
            X(q) => X(map(q)),
            Y(q) => Y(map(q)),
            Z(q) => Z(map(q)),
            S(q) => S(map(q)),
            Sdg(q) => Sdg(map(q)),
            T(q) => T(map(q)),
            Tdg(q) => Tdg(map(q)),
            Rz { theta, qubit } => Rz { theta, qubit: map(qubit) },
            Cz(a, b) => Cz(map(a), map(b)),
            Cp { lambda, control, target } => {
                Cp { lambda, control: map(control), target: map(target) }
            }
            Swap(a, b) => Swap(map(a), map(b)),
            Ccx { c0, c1, target } => Ccx { c0: map(c0), c1: map(c1), target: map(target) },
        }
    }

    /// The inverse gate, or `None` for measurement.
    pub fn inverse(&self) -> Option<Gate> {
        use Gate::*;
        Some(match *self {
            U1 { lambda, qubit } => Gate::u1(-lambda, qubit),
            // U2(φ,λ)† = U3(-π/2, -λ, -φ) = U2(π - λ, π - φ)
            U2 { phi, lambda, qubit } => Gate::u2(PI - lambda, PI - phi, qubit),
            U3 { theta, phi, lambda, qubit } => Gate::u3(-theta, -lambda, -phi, qubit),
            Cx { .. } | Barrier | H(_) | X(_) | Y(_) | Z(_) | Cz(..) | Swap(..) | Ccx { .. } => {
                *self
            }
            S(q) => Sdg(q),
            Sdg(q) => S(q),
            T(q) => Tdg(q),
            Tdg(q) => T(q),
            Rz { theta, qubit } => Gate::rz(-theta, qubit),
            Cp { lambda, control, target } => Gate::cp(-lambda, control, target),
            Measure { .. } => return None,
        })
    }

    /// Same gate with every angle mapped into `(-π, π]`.
    pub fn normalized(&self) -> Gate {
        match *self {
            Gate::U1 { lambda, qubit } => Gate::u1(lambda, qubit),
            Gate::U2 { phi, lambda, qubit } => Gate::u2(phi, lambda, qubit),
            Gate::U3 { theta, phi, lambda, qubit } => Gate::u3(theta, phi, lambda, qubit),
            Gate::Rz { theta, qubit } => Gate::rz(theta, qubit),
            Gate::Cp { lambda, control, target } => Gate::cp(lambda, control, target),
            g => g,
        }
    }

    pub(crate) fn angles(&self) -> Vec<f64> {
        match *self {
            Gate::U1 { lambda, .. } => vec![lambda],
            Gate::U2 { phi, lambda, .. } => vec![phi, lambda],
            Gate::U3 { theta, phi, lambda, .. } => vec![theta, phi, lambda],
            Gate::Rz { theta, .. } => vec![theta],
            Gate::Cp { lambda, .. } => vec![lambda],
            _ => Vec::new(),
        }
    }

    /// Matrix of a single-qubit unitary gate.
    pub fn matrix_1q(&self) -> Option<Mat2> {
        use Gate::*;
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        Some(match *self {
            U1 { lambda, .. } => u3_matrix(0.0, 0.0, lambda),
            U2 { phi, lambda, .. } => u3_matrix(PI / 2.0, phi, lambda),
            U3 { theta, phi, lambda, .. } => u3_matrix(theta, phi, lambda),
            H(_) => [[c(r, 0.0), c(r, 0.0)], [c(r, 0.0), c(-r, 0.0)]],
            X(_) => pauli_matrix(Pauli::X),
            Y(_) => pauli_matrix(Pauli::Y),
            Z(_) => pauli_matrix(Pauli::Z),
            S(_) => u3_matrix(0.0, 0.0, PI / 2.0),
            Sdg(_) => u3_matrix(0.0, 0.0, -PI / 2.0),
            T(_) => u3_matrix(0.0, 0.0, PI / 4.0),
            Tdg(_) => u3_matrix(0.0, 0.0, -PI / 4.0),
            Rz { theta, .. } => [
                [Complex64::from_polar(1.0, -theta / 2.0), c(0.0, 0.0)],
                [c(0.0, 0.0), Complex64::from_polar(1.0, theta / 2.0)],
            ],
            _ => return None,
        })
    }
}

/// IBM's general single-qubit gate.
pub fn u3_matrix(theta: f64, phi: f64, lambda: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [
        [Complex64::new(c, 0.0), -Complex64::from_polar(s, lambda)],
        [Complex64::from_polar(s, phi), Complex64::from_polar(c, phi + lambda)],
    ]
}

/// ZYZ decomposition: returns `(θ, φ, λ)` with `u3_matrix(θ, φ, λ)` equal to `m`
/// up to global phase. `m` must be unitary.
pub fn u3_angles(m: &Mat2) -> (f64, f64, f64) {
    let a = m[0][0];
    let b = m[0][1];
    let c = m[1][0];
    let d = m[1][1];
    let theta = 2.0 * c.norm().atan2(a.norm());
    if c.norm() < 1e-12 {
        // Diagonal: only φ+λ is defined.
        return (0.0, 0.0, normalize_angle(d.arg() - a.arg()));
    }
    if a.norm() < 1e-12 {
        // Anti-diagonal: only φ-λ is defined.
        let phi = c.arg() - (-b).arg();
        return (PI, normalize_angle(phi), 0.0);
    }
    let phi = c.arg() - a.arg();
    let lambda = (-b).arg() - a.arg();
    (normalize_angle(theta), normalize_angle(phi), normalize_angle(lambda))
}

pub fn mat2_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const NON_IDENTITY: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    pub fn from_index(i: usize) -> Pauli {
        [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][i & 3]
    }
}

pub fn pauli_matrix(p: Pauli) -> Mat2 {
    let z = Complex64::new(0.0, 0.0);
    let o = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    match p {
        Pauli::I => [[o, z], [z, o]],
        Pauli::X => [[z, o], [o, z]],
        Pauli::Y => [[z, -i], [i, z]],
        Pauli::Z => [[o, z], [z, -o]],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close_up_to_phase(a: &Mat2, b: &Mat2) -> bool {
        let mut overlap = Complex64::new(0.0, 0.0);
        for i in 0..2 {
            for j in 0..2 {
                overlap += a[i][j].conj() * b[i][j];
            }
        }
        (overlap.norm() / 2.0 - 1.0).abs() < 1e-12
    }

    #[test]
    fn normalize_angle_range() {
        assert_eq!(normalize_angle(PI), PI);
        assert!((normalize_angle(-PI) - PI).abs() < 1e-15);
        assert!((normalize_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        assert_eq!(normalize_angle(0.0), 0.0);
        assert_eq!(normalize_angle(-0.0).to_bits(), 0.0f64.to_bits());
        assert!((normalize_angle(7.0 * PI) - PI).abs() < 1e-12);
    }

    #[test]
    fn h_is_u2_zero_pi() {
        let h = Gate::H(0).matrix_1q().unwrap();
        let u2 = Gate::u2(0.0, PI, 0).matrix_1q().unwrap();
        assert!(close_up_to_phase(&h, &u2));
    }

    #[test]
    fn zyz_roundtrip() {
        let cases = [
            (0.3, -1.2, 2.5),
            (PI, 0.0, PI),
            (0.0, 0.0, 0.7),
            (PI / 2.0, 0.0, PI),
            (2.9, 3.0, -3.0),
        ];
        for (t, p, l) in cases {
            let m = u3_matrix(t, p, l);
            let (t2, p2, l2) = u3_angles(&m);
            assert!(close_up_to_phase(&m, &u3_matrix(t2, p2, l2)), "{t} {p} {l}");
        }
        let y = pauli_matrix(Pauli::Y);
        let (t, p, l) = u3_angles(&y);
        assert!(close_up_to_phase(&y, &u3_matrix(t, p, l)));
    }

    #[test]
    fn gate_inverses_are_matrix_inverses() {
        let gates = [
            Gate::u1(0.4, 0),
            Gate::u2(0.1, -0.9, 0),
            Gate::u3(1.1, 0.2, -2.0, 0),
            Gate::S(0),
            Gate::T(0),
            Gate::rz(0.8, 0),
        ];
        for g in gates {
            let m = g.matrix_1q().unwrap();
            let inv = g.inverse().unwrap().matrix_1q().unwrap();
            let id = pauli_matrix(Pauli::I);
            assert!(close_up_to_phase(&mat2_mul(&inv, &m), &id), "{g:?}");
        }
    }
}
