//! CSV writers for traces, sweeps and defect scans. Floats are written with
//! 17 significant digits so files round-trip bit-exactly.

use std::io::Write;

use crate::analysis::{DefectPoint, SweepPoint};
use crate::evolution::FidelityTrace;

pub const TRACE_HEADER: &str = "t,fidelity,norm,sample";
pub const SWEEP_HEADER: &str = "delta,mean_fidelity,std_fidelity,n_samples";
pub const DEFECT_HEADER: &str = "n_defect,mean_infidelity,std_infidelity,n_samples";

/// Formats `x` with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Long format, one row per recorded time per sample.
pub fn write_traces<W: Write>(mut w: W, traces: &[FidelityTrace]) -> std::io::Result<()> {
    writeln!(w, "{TRACE_HEADER}")?;
    for tr in traces {
        for ((t, f), n) in tr.times.iter().zip(&tr.fidelity).zip(&tr.norm) {
            writeln!(w, "{},{},{},{}", fmt_f64(*t), fmt_f64(*f), fmt_f64(*n), tr.sample_index)?;
        }
    }
    w.flush()
}

pub fn write_sweep<W: Write>(mut w: W, sweep: &[SweepPoint]) -> std::io::Result<()> {
    writeln!(w, "{SWEEP_HEADER}")?;
    for p in sweep {
        writeln!(
            w,
            "{},{},{},{}",
            fmt_f64(p.delta),
            fmt_f64(p.mean_avg_fidelity),
            fmt_f64(p.std_avg_fidelity),
            p.n_samples
        )?;
    }
    w.flush()
}

pub fn write_defects<W: Write>(mut w: W, points: &[DefectPoint]) -> std::io::Result<()> {
    writeln!(w, "{DEFECT_HEADER}")?;
    for p in points {
        writeln!(
            w,
            "{},{},{},{}",
            p.n_defect,
            fmt_f64(p.mean_infidelity),
            fmt_f64(p.std_infidelity),
            p.n_samples
        )?;
    }
    w.flush()
}
