//! Two-qubit Clifford group: stabilizer tableaux, canonical enumeration of
//! all 11,520 elements, uniform sampling and inversion.

use std::collections::HashMap;
use std::sync::OnceLock;

use rand::Rng;

use crate::circuit::{decompose_to_basis, merge_single_qubit_runs, Circuit, Gate};

/// Order of the two-qubit Clifford group modulo global phase.
pub const CLIFFORD2_ORDER: usize = 11_520;

/// Elementary Clifford generator on the local qubits 0 and 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CliffordOp {
    H(u8),
    S(u8),
    Cx(u8, u8),
}

impl CliffordOp {
    fn inverse_ops(self) -> Vec<CliffordOp> {
        match self {
            CliffordOp::S(q) => vec![CliffordOp::S(q); 3],
            op => vec![op],
        }
    }

    fn to_gate(self, q0: usize, q1: usize) -> Gate {
        let phys = |q: u8| if q == 0 { q0 } else { q1 };
        match self {
            CliffordOp::H(q) => Gate::H(phys(q)),
            CliffordOp::S(q) => Gate::S(phys(q)),
            CliffordOp::Cx(c, t) => Gate::cx(phys(c), phys(t)),
        }
    }
}

/// One Pauli row of a tableau: `(-1)^sign · X^x Z^z` on two qubits, with
/// `x`/`z` bit `k` referring to qubit `k` (a Y appears as `x = z = 1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliRow {
    pub x: u8,
    pub z: u8,
    pub sign: bool,
}

/// Images of `X0, Z0, X1, Z1` under conjugation by the Clifford.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Tableau {
    pub rows: [PauliRow; 4],
}

impl Tableau {
    pub fn identity() -> Self {
        let r = |x, z| PauliRow { x, z, sign: false };
        Tableau { rows: [r(1, 0), r(0, 1), r(2, 0), r(0, 2)] }
    }

    /// Composes `op` after the Clifford this tableau represents.
    pub fn apply(&mut self, op: CliffordOp) {
        for r in &mut self.rows {
            match op {
                CliffordOp::H(q) => {
                    let m = 1 << q;
                    let (xb, zb) = (r.x & m, r.z & m);
                    r.sign ^= xb != 0 && zb != 0;
                    r.x = (r.x & !m) | zb;
                    r.z = (r.z & !m) | xb;
                }
                CliffordOp::S(q) => {
                    let m = 1 << q;
                    let (xb, zb) = (r.x & m, r.z & m);
                    r.sign ^= xb != 0 && zb != 0;
                    r.z ^= xb;
                }
                CliffordOp::Cx(c, t) => {
                    let bit = |v: u8, q: u8| (v >> q) & 1 == 1;
                    let (xc, zc, xt, zt) = (bit(r.x, c), bit(r.z, c), bit(r.x, t), bit(r.z, t));
                    r.sign ^= xc && zt && (xt == zc);
                    if xc {
                        r.x ^= 1 << t;
                    }
                    if zt {
                        r.z ^= 1 << c;
                    }
                }
            }
        }
    }

    pub fn apply_all(&mut self, ops: &[CliffordOp]) {
        for &op in ops {
            self.apply(op);
        }
    }

    pub fn from_ops(ops: &[CliffordOp]) -> Self {
        let mut t = Tableau::identity();
        t.apply_all(ops);
        t
    }

    /// 20-bit packing used for canonical lookup.
    pub fn key(&self) -> u32 {
        self.rows.iter().fold(0u32, |acc, r| {
            (acc << 5) | ((r.x as u32) << 3) | ((r.z as u32) << 1) | r.sign as u32
        })
    }

    /// True when the rows satisfy the symplectic commutation relations of
    /// `X0, Z0, X1, Z1` and no row is the identity.
    pub fn is_symplectic(&self) -> bool {
        let anti = |a: &PauliRow, b: &PauliRow| ((a.x & b.z).count_ones() + (a.z & b.x).count_ones()) % 2 == 1;
        let r = &self.rows;
        for i in 0..4 {
            if r[i].x == 0 && r[i].z == 0 {
                return false;
            }
            for j in i + 1..4 {
                // X_k and Z_k anticommute; every other pair commutes.
                let expect = j == i + 1 && i % 2 == 0;
                if anti(&r[i], &r[j]) != expect {
                    return false;
                }
            }
        }
        true
    }
}

/// A two-qubit Clifford together with a generator word realizing it.
#[derive(Debug, Clone, PartialEq)]
pub struct Clifford2 {
    index: usize,
    tableau: Tableau,
    ops: Vec<CliffordOp>,
}

struct Group {
    elements: Vec<Clifford2>,
    by_key: HashMap<u32, usize>,
    inverse: Vec<usize>,
    /// Basis realization on local qubits 0 and 1.
    seqs: Vec<Vec<Gate>>,
}

fn word(s: &str, q: u8) -> Vec<CliffordOp> {
    s.chars()
        .map(|c| match c {
            'h' => CliffordOp::H(q),
            's' => CliffordOp::S(q),
            _ => unreachable!("word alphabet is h/s"),
        })
        .collect()
}

/// The 24 single-qubit Cliffords as shortest words over `{h, s}`, applied
/// left to right.
const ONE_QUBIT: [&str; 24] = [
    "", "h", "s", "hs", "sh", "ss", "hsh", "hss", "shs", "ssh", "sss", "hshs", "hssh", "hsss",
    "shss", "sshs", "hshss", "hsshs", "shssh", "shsss", "sshss", "hshssh", "hshsss", "hsshss",
];

/// Order-3 rotation cycling X → Y → Z → X.
const CYCLE: [&str; 3] = ["", "hshs", "hshshshs"];
/// Maps X → −Z, Z → X.
const HALF_Y: &str = "ssh";
/// Maps X → X, Z → −Y.
const HALF_X: &str = "hsh";

fn build_group() -> Group {
    let mut words: Vec<Vec<CliffordOp>> = Vec::with_capacity(CLIFFORD2_ORDER);
    let cyc_y: Vec<String> = CYCLE.iter().map(|c| format!("{c}{HALF_Y}")).collect();
    let cyc_x: Vec<String> = CYCLE.iter().map(|c| format!("{c}{HALF_X}")).collect();
    for a in ONE_QUBIT {
        for b in ONE_QUBIT {
            let mut local = word(a, 0);
            local.extend(word(b, 1));
            words.push(local.clone());
            for j in 0..3 {
                for k in 0..3 {
                    let mut w = local.clone();
                    w.push(CliffordOp::Cx(0, 1));
                    w.extend(word(CYCLE[j], 0));
                    w.extend(word(&cyc_y[k], 1));
                    words.push(w);
                }
            }
            for j in 0..3 {
                for k in 0..3 {
                    let mut w = local.clone();
                    w.push(CliffordOp::Cx(0, 1));
                    w.push(CliffordOp::Cx(1, 0));
                    w.extend(word(&cyc_y[j], 0));
                    w.extend(word(&cyc_x[k], 1));
                    words.push(w);
                }
            }
            let mut w = local;
            w.extend([CliffordOp::Cx(0, 1), CliffordOp::Cx(1, 0), CliffordOp::Cx(0, 1)]);
            words.push(w);
        }
    }
    let mut elements = Vec::with_capacity(CLIFFORD2_ORDER);
    let mut by_key = HashMap::with_capacity(CLIFFORD2_ORDER);
    for ops in words {
        let tableau = Tableau::from_ops(&ops);
        let index = elements.len();
        let prev = by_key.insert(tableau.key(), index);
        assert!(prev.is_none(), "canonical decomposition produced a repeated element");
        elements.push(Clifford2 { index, tableau, ops });
    }
    assert_eq!(elements.len(), CLIFFORD2_ORDER);
    let inverse = elements
        .iter()
        .map(|c| {
            let ops: Vec<_> = c.ops.iter().rev().flat_map(|op| op.inverse_ops()).collect();
            by_key[&Tableau::from_ops(&ops).key()]
        })
        .collect();
    let seqs = elements.iter().map(|c| local_seq(&c.ops)).collect();
    Group { elements, by_key, inverse, seqs }
}

fn local_seq(ops: &[CliffordOp]) -> Vec<Gate> {
    let mut c = Circuit::new(2, 0);
    c.extend(ops.iter().map(|op| op.to_gate(0, 1))).expect("valid clifford word");
    let basis = decompose_to_basis(&c).expect("convenience gates decompose");
    merge_single_qubit_runs(&basis).expect("merge keeps validity").gates().to_vec()
}

fn group() -> &'static Group {
    static GROUP: OnceLock<Group> = OnceLock::new();
    GROUP.get_or_init(build_group)
}

impl Clifford2 {
    /// Element by canonical index in `0..CLIFFORD2_ORDER`.
    pub fn by_index(index: usize) -> &'static Clifford2 {
        &group().elements[index]
    }

    pub fn from_tableau(t: &Tableau) -> Option<&'static Clifford2> {
        let g = group();
        g.by_key.get(&t.key()).map(|&i| &g.elements[i])
    }

    pub fn identity() -> &'static Clifford2 {
        Clifford2::by_index(0)
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn tableau(&self) -> &Tableau {
        &self.tableau
    }

    pub fn ops(&self) -> &[CliffordOp] {
        &self.ops
    }

    pub fn inverse(&self) -> &'static Clifford2 {
        Clifford2::by_index(group().inverse[self.index])
    }

    /// `other` applied after `self`.
    pub fn then(&self, other: &Clifford2) -> &'static Clifford2 {
        let mut t = self.tableau;
        t.apply_all(&other.ops);
        Clifford2::from_tableau(&t).expect("group is closed")
    }

    /// Basis-gate realization on physical qubits `(q0, q1)`, single-qubit
    /// runs fused.
    pub fn gate_seq(&self, q0: usize, q1: usize) -> Vec<Gate> {
        group().seqs[self.index].iter().map(|g| g.remap(|q| if q == 0 { q0 } else { q1 })).collect()
    }

    pub fn cx_count(&self) -> usize {
        self.ops.iter().filter(|op| matches!(op, CliffordOp::Cx(..))).count()
    }

    /// Single-qubit basis gates in [`Clifford2::gate_seq`].
    pub fn single_qubit_count(&self) -> usize {
        group().seqs[self.index].iter().filter(|g| g.is_single_qubit()).count()
    }
}

/// Uniform sample from the two-qubit Clifford group.
pub fn random_clifford2<R: Rng + ?Sized>(rng: &mut R) -> &'static Clifford2 {
    Clifford2::by_index(rng.random_range(0..CLIFFORD2_ORDER))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::StateVector;

    #[test]
    fn group_has_expected_order_and_inverses() {
        for i in (0..CLIFFORD2_ORDER).step_by(37) {
            let c = Clifford2::by_index(i);
            assert!(c.tableau().is_symplectic());
            assert_eq!(c.then(c.inverse()).tableau(), &Tableau::identity());
            assert_eq!(c.inverse().then(c).tableau(), &Tableau::identity());
        }
    }

    #[test]
    fn mean_cx_per_clifford_is_one_and_a_half() {
        let total: usize = (0..CLIFFORD2_ORDER).map(|i| Clifford2::by_index(i).cx_count()).sum();
        assert_eq!(total as f64 / CLIFFORD2_ORDER as f64, 1.5);
    }

    #[test]
    fn bell_preparation_tableau() {
        let t = Tableau::from_ops(&[CliffordOp::H(0), CliffordOp::Cx(0, 1)]);
        // X0 -> Z0, untouched by CX; Z0 -> X0 -> X0 X1; Z1 -> Z0 Z1.
        assert_eq!(t.rows[0], PauliRow { x: 0, z: 0b01, sign: false });
        assert_eq!(t.rows[3], PauliRow { x: 0, z: 0b11, sign: false });
        assert_eq!(t.rows[1], PauliRow { x: 0b11, z: 0, sign: false });
        // statevector check of the same word
        let mut s = StateVector::zero(2);
        s.apply_gate(&Gate::H(0));
        s.apply_gate(&Gate::cx(0, 1));
        let p = s.marginal(&[0, 1]);
        assert!((p[0] - 0.5).abs() < 1e-12 && (p[3] - 0.5).abs() < 1e-12);
    }
}
