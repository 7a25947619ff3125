use std::collections::BTreeSet;
use std::fmt::Write;

use crate::calibration::CalibrationSnapshot;
use crate::circuit::Circuit;
use crate::device::Topology;
use crate::transpiler::Layout;

use super::HarnessError;

const GREEN: [f64; 3] = [0.0, 160.0, 0.0];
const BLUE: [f64; 3] = [0.0, 0.0, 255.0];
const RED: [f64; 3] = [255.0, 0.0, 0.0];

/// Colour for `t ∈ [0, 1]` on the green → blue → red ramp.
pub fn ramp_color(t: f64) -> String {
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    let (a, b, u) = if t <= 0.5 { (GREEN, BLUE, 2.0 * t) } else { (BLUE, RED, 2.0 * t - 1.0) };
    let ch = |i: usize| (a[i] + (b[i] - a[i]) * u).round() as u8;
    format!("#{:02x}{:02x}{:02x}", ch(0), ch(1), ch(2))
}

fn scale(values: &[f64]) -> (f64, f64) {
    values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

fn position(v: f64, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        (v - lo) / (hi - lo)
    } else {
        0.0
    }
}

/// DOT graph of the device with qubits coloured by readout error and
/// couplers by CX error, each on its own min/max scale.
///
/// Used qubits are drawn filled: with a layout, the images of the
/// circuit's active qubits (or of every virtual qubit if no circuit is
/// given); with only a circuit, its active qubits read as physical ids.
pub fn emit_heatmap(
    topology: &Topology,
    snapshot: &CalibrationSnapshot,
    layout: Option<&Layout>,
    circuit: Option<&Circuit>,
) -> Result<String, HarnessError> {
    snapshot.validate(topology)?;
    let n = topology.n_qubits();
    let used: BTreeSet<usize> = match (layout, circuit) {
        (Some(l), c) => {
            if let Some(&p) = l.as_slice().iter().find(|&&p| p >= n) {
                return Err(HarnessError::UnknownQubit(p));
            }
            let virt: Vec<usize> = match c {
                Some(c) => c.active_qubits().into_iter().collect(),
                None => (0..l.n_virtual()).collect(),
            };
            if let Some(&v) = virt.iter().find(|&&v| v >= l.n_virtual()) {
                return Err(HarnessError::UnknownQubit(v));
            }
            virt.into_iter().map(|v| l.physical(v)).collect()
        }
        (None, Some(c)) => {
            let active = c.active_qubits();
            if let Some(&q) = active.iter().find(|&&q| q >= n) {
                return Err(HarnessError::UnknownQubit(q));
            }
            active
        }
        (None, None) => BTreeSet::new(),
    };

    let readout: Vec<f64> = (0..n).map(|q| snapshot.qubit(q).expect("validated").readout_err).collect();
    let cx: Vec<f64> =
        topology.edges().iter().map(|&(a, b)| snapshot.edge(a, b).expect("validated").epc_2q).collect();
    let (qs, es) = (scale(&readout), scale(&cx));

    let mut out = String::new();
    let _ = writeln!(out, "// device {} snapshot t={} min", topology.name(), snapshot.timestamp_min);
    let _ = writeln!(out, "// readout_err scale [{:.6e}, {:.6e}] green -> blue -> red", qs.0, qs.1);
    if !cx.is_empty() {
        let _ = writeln!(out, "// epc_2q scale [{:.6e}, {:.6e}] green -> blue -> red", es.0, es.1);
    }
    let _ = writeln!(out, "graph \"{}\" {{", topology.name());
    let _ = writeln!(out, "  node [shape=circle, penwidth=3];");
    for q in 0..n {
        let color = ramp_color(position(readout[q], qs));
        if used.contains(&q) {
            let _ = writeln!(out, "  q{q} [label=\"{q}\", color=\"{color}\", style=filled, fillcolor=\"{color}\"];");
        } else {
            let _ = writeln!(out, "  q{q} [label=\"{q}\", color=\"{color}\"];");
        }
    }
    for (i, &(a, b)) in topology.edges().iter().enumerate() {
        let color = ramp_color(position(cx[i], es));
        let _ = writeln!(out, "  q{a} -- q{b} [color=\"{color}\", penwidth=4];");
    }
    out.push_str("}\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ramp_endpoints() {
        assert_eq!(ramp_color(0.0), "#00a000");
        assert_eq!(ramp_color(0.5), "#0000ff");
        assert_eq!(ramp_color(1.0), "#ff0000");
    }
}
