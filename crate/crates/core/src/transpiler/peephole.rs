use crate::circuit::{merge_single_qubit_runs, normalize_angle, Circuit, CircuitError, Gate};

/// One left-to-right pass. Returns the rewritten gates and whether anything
/// changed.
fn pass(gates: &[Gate], n_qubits: usize) -> (Vec<Gate>, bool) {
    let mut out: Vec<Option<Gate>> = Vec::with_capacity(gates.len());
    // Index in `out` of the last live gate on each wire.
    let mut last: Vec<Option<usize>> = vec![None; n_qubits];
    let mut changed = false;
    for g in gates {
        match *g {
            Gate::Barrier => {
                out.push(Some(*g));
                let i = out.len() - 1;
                last.iter_mut().for_each(|l| *l = Some(i));
                continue;
            }
            Gate::U1 { lambda, qubit } => {
                if normalize_angle(lambda) == 0.0 {
                    changed = true;
                    continue;
                }
                if let Some(i) = last[qubit] {
                    if let Some(Gate::U1 { lambda: prev, .. }) = out[i] {
                        let sum = normalize_angle(prev + lambda);
                        changed = true;
                        if sum == 0.0 {
                            out[i] = None;
                            last[qubit] = None;
                        } else {
                            out[i] = Some(Gate::u1(sum, qubit));
                        }
                        continue;
                    }
                }
            }
            Gate::Cx { control, target } => {
                if let (Some(i), Some(j)) = (last[control], last[target]) {
                    if i == j && out[i] == Some(*g) {
                        out[i] = None;
                        last[control] = None;
                        last[target] = None;
                        changed = true;
                        continue;
                    }
                }
            }
            _ => {}
        }
        out.push(Some(*g));
        let i = out.len() - 1;
        for q in g.qubits() {
            last[q] = Some(i);
        }
    }
    (out.into_iter().flatten().collect(), changed)
}

/// Cancels adjacent identical CX pairs, merges consecutive `U1`s on a wire
/// and drops `U1(0)`, repeating until nothing changes.
pub fn peephole_optimize(c: &Circuit) -> Result<Circuit, CircuitError> {
    let mut gates = c.gates().to_vec();
    loop {
        let (next, changed) = pass(&gates, c.n_qubits());
        gates = next;
        if !changed {
            break;
        }
    }
    Circuit::from_gates(c.name(), c.n_qubits(), c.n_clbits(), gates)
}

/// Peephole rules plus fusion of every single-qubit run, iterated so that
/// fusions exposing new CX cancellations are picked up.
pub fn optimize_full(c: &Circuit) -> Result<Circuit, CircuitError> {
    let mut cur = peephole_optimize(c)?;
    loop {
        // Neither step ever adds gates, so length is a progress measure.
        let next = peephole_optimize(&merge_single_qubit_runs(&cur)?)?;
        if next.len() == cur.len() {
            return Ok(next);
        }
        cur = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cx_pair_cancels() {
        let c = Circuit::from_gates("", 2, 0, [Gate::cx(0, 1), Gate::cx(0, 1)]).unwrap();
        assert!(peephole_optimize(&c).unwrap().is_empty());
    }

    #[test]
    fn u1_runs_merge() {
        let c = Circuit::from_gates("", 1, 0, [Gate::u1(0.5, 0), Gate::u1(0.25, 0)]).unwrap();
        assert_eq!(peephole_optimize(&c).unwrap().gates(), &[Gate::u1(0.75, 0)]);
        let c = Circuit::from_gates("", 1, 0, [Gate::u1(0.5, 0), Gate::u1(-0.5, 0)]).unwrap();
        assert!(peephole_optimize(&c).unwrap().is_empty());
    }

    #[test]
    fn nested_cancellation() {
        // cx(0,1) cx(1,2) cx(1,2) cx(0,1) collapses completely
        let c = Circuit::from_gates("", 3, 0, [Gate::cx(0, 1), Gate::cx(1, 2), Gate::cx(1, 2), Gate::cx(0, 1)]).unwrap();
        assert!(peephole_optimize(&c).unwrap().is_empty());
    }

    #[test]
    fn reversed_cx_is_kept() {
        let c = Circuit::from_gates("", 2, 0, [Gate::cx(0, 1), Gate::cx(1, 0)]).unwrap();
        assert_eq!(peephole_optimize(&c).unwrap().len(), 2);
    }
}
