use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use super::convergence::ConvergenceReport;
use crate::Result;

/// Pretty-printed JSON followed by a newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// One line of the long-format checkpoint table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckpointRow {
    pub k: u64,
    pub statistic: String,
    pub value: f64,
    pub stderr: Option<f64>,
}

pub fn checkpoint_rows(report: &ConvergenceReport) -> Vec<CheckpointRow> {
    let mut rows = Vec::new();
    for c in &report.checkpoints {
        let mut push = |statistic: String, value: f64, stderr: Option<f64>| {
            rows.push(CheckpointRow {
                k: c.k,
                statistic,
                value,
                stderr,
            })
        };
        push("n".into(), c.n as f64, None);
        for (name, s) in [("f_gap", &c.f_gap), ("grad_norm", &c.grad_norm), ("grad_norm_sq", &c.grad_norm_sq)] {
            push(format!("{name}_mean"), s.mean, Some(s.stderr));
            push(format!("{name}_q25"), s.q25, None);
            push(format!("{name}_median"), s.median, None);
            push(format!("{name}_q75"), s.q75, None);
        }
        for m in &c.gamma_moments {
            push(format!("f_gap_pow_{}", m.gamma), m.mean, Some(m.stderr));
        }
    }
    rows
}

/// Columns `k, statistic, value, stderr` with a header row.
pub fn write_checkpoints_csv(path: &Path, report: &ConvergenceReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in checkpoint_rows(report) {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::{gradient_convergence_stats, simulate_ensemble, EnsembleSpec};
    use crate::engine::{ParameterVector, Schedule};
    use crate::objectives::{NoiseModel, Objective, StochasticOracle};

    #[test]
    fn csv_has_header_and_long_rows() {
        let spec = EnsembleSpec {
            oracle: StochasticOracle::new(Objective::quadratic(1), NoiseModel::AdditiveGaussian { sigma: 0.1 }).unwrap(),
            schedule: Schedule::scalar_power(1.0, 0.75, 1.0, 1).unwrap(),
            theta0: ParameterVector::new(vec![1.0]).unwrap(),
            horizon: 20,
            n_trajectories: 2,
            master_seed: 9,
            record_stride: 10,
            capture: None,
        };
        let rep = gradient_convergence_stats(&simulate_ensemble(&spec).unwrap(), &[0.5]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        write_checkpoints_csv(&path, &rep).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("k,statistic,value,stderr"));
        assert_eq!(text.lines().count(), 1 + 3 * 14);
        assert!(text.contains("0,f_gap_pow_0.5,"));
        write_json(&dir.path().join("r.json"), &rep).unwrap();
    }
}
