use super::layout::{dijkstra, CostModel, Layout};
use super::TranspileError;
use crate::circuit::{Circuit, Gate};
use crate::device::Topology;

/// Result of routing: the physical circuit, the layout after all swaps, and
/// the number of swaps inserted.
#[derive(Debug, Clone)]
pub struct Routed {
    pub circuit: Circuit,
    pub final_layout: Layout,
    pub swaps: usize,
}

/// Cheapest way to make `a` and `b` adjacent: the qubit that moves and the
/// swap path it follows (ending next to the other operand).
fn plan_move(topology: &Topology, model: &CostModel, a: usize, b: usize) -> Vec<usize> {
    let best_from = |from: usize, to: usize| {
        let (dist, hops, pred) = dijkstra(topology, &model.edge, from);
        let mut best: Option<(f64, usize, usize)> = None;
        for &m in topology.neighbors(to) {
            let cost = 3.0 * dist[m] + model.edge[topology.edge_index(m, to).unwrap()];
            let key = (cost, hops[m], m);
            let better = match &best {
                None => true,
                Some(bk) => key.0.total_cmp(&bk.0).then(key.1.cmp(&bk.1)).then(key.2.cmp(&bk.2)).is_lt(),
            };
            if better {
                best = Some(key);
            }
        }
        let (cost, _, mut m) = best.expect("connected topology");
        let mut path = vec![m];
        while m != from {
            m = pred[m];
            path.push(m);
        }
        path.reverse();
        (cost, path)
    };
    let (ca, pa) = best_from(a, b);
    let (cb, pb) = best_from(b, a);
    if cb.total_cmp(&ca).is_lt() {
        pb
    } else {
        pa
    }
}

/// Greedy per-gate routing of basis circuit `c` from `layout`.
///
/// A CX between non-adjacent qubits moves one operand by SWAPs (three CX
/// each) along the path that minimizes total cost under `model`. Measurements
/// are emitted at the end against the final layout.
pub fn route(c: &Circuit, layout: &Layout, topology: &Topology, model: &CostModel) -> Result<Routed, TranspileError> {
    if let Some(g) = c.gates().iter().find(|g| !g.is_basis()) {
        return Err(TranspileError::NonBasisGate(*g));
    }
    if layout.n_virtual() < c.n_qubits() {
        return Err(TranspileError::UncoveredQubit(layout.n_virtual()));
    }
    let np = topology.n_qubits();
    if layout.n_physical() != np {
        return Err(TranspileError::InvalidLayout(layout.as_slice().to_vec()));
    }
    let mut phys: Vec<usize> = layout.as_slice().to_vec();
    let mut virt: Vec<Option<usize>> = layout.inverse();
    let mut out = Circuit::new(np, c.n_clbits()).with_name(c.name());
    let mut measures = Vec::new();
    let mut swaps = 0;
    for g in c.gates() {
        match *g {
            Gate::Measure { qubit, clbit } => measures.push((qubit, clbit)),
            Gate::Cx { control, target } => {
                let (pc, pt) = (phys[control], phys[target]);
                if !topology.are_adjacent(pc, pt) {
                    let path = plan_move(topology, model, pc, pt);
                    for w in path.windows(2) {
                        let (x, y) = (w[0], w[1]);
                        out.extend([Gate::cx(x, y), Gate::cx(y, x), Gate::cx(x, y)])?;
                        virt.swap(x, y);
                        for p in [x, y] {
                            if let Some(v) = virt[p] {
                                phys[v] = p;
                            }
                        }
                        swaps += 1;
                    }
                }
                out.push(Gate::cx(phys[control], phys[target]))?;
            }
            ref other => {
                out.push(other.remap(|v| phys[v]))?;
            }
        }
    }
    for (v, k) in measures {
        out.push(Gate::measure(phys[v], k))?;
    }
    let final_layout = Layout::new(phys, np)?;
    Ok(Routed { circuit: out, final_layout, swaps })
}
