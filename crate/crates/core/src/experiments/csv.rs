//! Per-trajectory CSV output.
//!
//! One row per recorded sample. Floats use Rust's shortest round-trip
//! formatting, so identical runs produce byte-identical files.

use std::fmt::Write as _;
use std::io::Write;

use crate::diagnostics::{DiagnosticsEvaluator, Probe};
use crate::dynamics::Trajectory;
use crate::error::Result;

pub fn header(m_x: usize, m_y: usize, probes: &[Probe]) -> String {
    let mut cols = vec!["t".to_string()];
    for j in 1..=m_y {
        for i in 1..=m_x {
            cols.push(format!("x{i}|{j}"));
        }
    }
    cols.extend((1..=m_y).map(|j| format!("y{j}")));
    cols.extend((1..=m_x).map(|i| format!("xst{i}")));
    cols.extend(["u_st", "D", "D_rate"].map(String::from));
    cols.extend(probes.iter().map(|p| format!("H[{}]", p.label)));
    cols.extend(probes.iter().map(|p| format!("H_rate[{}]", p.label)));
    cols.extend(["exploitability", "q1", "q2", "definiteness", "clamped"].map(String::from));
    cols.join(",")
}

/// Writes the header and one diagnostics row per sample of `traj`.
pub fn write_trajectory<W: Write>(
    out: &mut W,
    traj: &Trajectory,
    evaluator: &DiagnosticsEvaluator<'_>,
) -> Result<()> {
    let game = evaluator.game;
    writeln!(out, "{}", header(game.rows(), game.cols(), &evaluator.probes))?;
    let mut line = String::new();
    for sample in &traj.samples {
        let d = evaluator.evaluate(sample.t, &sample.state, sample.clamped)?;
        line.clear();
        let _ = write!(line, "{}", sample.t);
        let scalars = [d.u_st, d.d, d.d_rate];
        let values = sample
            .state
            .x
            .as_slice()
            .iter()
            .chain(sample.state.y.as_slice())
            .chain(d.x_st.as_slice())
            .chain(&scalars)
            .chain(d.h_values.iter().map(|(_, v)| v))
            .chain(d.h_rates.iter().map(|(_, v)| v))
            .chain(std::iter::once(&d.exploitability));
        for v in values {
            let _ = write!(line, ",{v}");
        }
        match d.q {
            Some((q1, q2)) => {
                let _ = write!(line, ",{q1},{q2}");
            }
            None => line.push_str(",,"),
        }
        let _ = write!(
            line,
            ",{},{}",
            d.definiteness.verdict.code(),
            u8::from(sample.clamped)
        );
        writeln!(out, "{line}")?;
    }
    Ok(())
}
