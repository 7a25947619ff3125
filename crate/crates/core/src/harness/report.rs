use std::fmt::Write;
use std::path::Path;
use std::str::FromStr;

use super::{ExperimentReport, HarnessError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Table,
    /// Pretty-printed JSON of the whole report.
    Structured,
}

impl FromStr for ReportFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "table" => Ok(ReportFormat::Table),
            "structured" | "json" => Ok(ReportFormat::Structured),
            _ => Err(format!("unknown format `{s}` (expected csv, table or structured)")),
        }
    }
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Table => "txt",
            ReportFormat::Structured => "json",
        }
    }
}

pub const CSV_HEADER: &str =
    "run_index,exec_time_min,benchmark,n,mode,snapshot_age_min,layout_id,accuracy_baseline,accuracy_jit,rel_improvement";

fn rel(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x:.6}"))
}

/// Renders `report`. CSV rows carry the just-in-time arm's snapshot age and
/// layout id; the structured form has both arms.
pub fn emit_report(report: &ExperimentReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Csv => {
            let mut out = String::from(CSV_HEADER);
            out.push('\n');
            for c in &report.cells {
                let _ = writeln!(
                    out,
                    "{},{:.1},{},{},{},{:.1},{},{:.6},{:.6},{}",
                    c.run_index,
                    c.exec_time_min,
                    c.benchmark,
                    c.n,
                    report.mode,
                    c.jit.snapshot_age_min,
                    c.jit.layout_id,
                    c.baseline.accuracy,
                    c.jit.accuracy,
                    rel(c.rel_improvement)
                );
            }
            out
        }
        ReportFormat::Table => table(report),
        ReportFormat::Structured => serde_json::to_string_pretty(report).expect("report serializes") + "\n",
    }
}

fn table(report: &ExperimentReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "device {}  mode {}  runs {}  shots {}  level {}  seed {}  stale age {:.0} min",
        report.device, report.mode, report.runs, report.shots, report.level, report.seed, report.cotd_age_min
    );
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{:>3} {:>8} {:<11} {:>7} {:>9} {:>9} {:>8} {:>8} {:>9}",
        "run", "t_min", "benchmark", "age_min", "stale_id", "jit_id", "stale", "jit", "rel"
    );
    for c in &report.cells {
        let _ = writeln!(
            out,
            "{:>3} {:>8.1} {:<11} {:>7.1} {:>9} {:>9} {:>8.4} {:>8.4} {:>9}",
            c.run_index,
            c.exec_time_min,
            c.benchmark,
            c.jit.snapshot_age_min,
            c.baseline.layout_id,
            c.jit.layout_id,
            c.baseline.accuracy,
            c.jit.accuracy,
            rel(c.rel_improvement)
        );
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "{:<11} {:>8} {:>8} {:>9} {:>6} {:>7}", "benchmark", "stale", "jit", "mean_rel", "wins", "layouts");
    for b in &report.benchmarks {
        let _ = writeln!(
            out,
            "{:<11} {:>8.4} {:>8.4} {:>9} {:>6.2} {:>7}",
            b.benchmark,
            b.mean_accuracy_baseline,
            b.mean_accuracy_jit,
            rel(b.mean_rel_improvement),
            b.win_rate,
            b.distinct_jit_layouts
        );
    }
    let t = &report.accuracy_test;
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "mean relative improvement {}  win rate {:.3}  paired t {}  one-sided p {}",
        rel(report.mean_rel_improvement),
        report.win_rate,
        t.t.map_or("NA".into(), |v| format!("{v:.3}")),
        t.p_one_sided.map_or("NA".into(), |v| format!("{v:.4}")),
    );
    out
}

/// Writes the rendered report to `path`.
pub fn write_report(report: &ExperimentReport, format: ReportFormat, path: &Path) -> Result<(), HarnessError> {
    std::fs::write(path, emit_report(report, format))
        .map_err(|e| HarnessError::Io { path: path.to_path_buf(), msg: e.to_string() })
}
