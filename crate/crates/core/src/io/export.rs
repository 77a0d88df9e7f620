//! Plot-ready outputs of a run. Agent and topic indices are 1-based in every
//! exported file, matching the DOT node labels.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::report::RunReport;
use super::IoError;
use crate::dynamics::{SignMatrix, SimulationOutcome};
use crate::graph::SignedGraph;

pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const INFLUENCE_FILE: &str = "influence.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const DOT_FILE: &str = "winf.dot";

fn create(path: &Path) -> Result<BufWriter<File>, IoError> {
    File::create(path).map(BufWriter::new).map_err(|e| IoError::io(path, e))
}

/// Long format `t,agent,topic,opinion`.
pub fn write_trajectory_csv(outcome: &SimulationOutcome, mut w: impl Write) -> std::io::Result<()> {
    writeln!(w, "t,agent,topic,opinion")?;
    for snap in &outcome.trajectory {
        for i in 0..snap.y.agents() {
            for j in 0..snap.y.topics() {
                writeln!(w, "{},{},{},{}", snap.t, i + 1, j + 1, snap.y.get(i, j))?;
            }
        }
    }
    Ok(())
}

/// Long format `t,i,j,sign` for `t >= 1`.
pub fn write_influence_csv(outcome: &SimulationOutcome, mut w: impl Write) -> std::io::Result<()> {
    let n = outcome.y_inf.agents();
    writeln!(w, "# influence W(t)[i][j] = sign / {n}")?;
    writeln!(w, "t,i,j,sign")?;
    for snap in &outcome.trajectory {
        if let Some(s) = &snap.w_signs {
            for i in 0..n {
                for j in 0..n {
                    writeln!(w, "{},{},{},{}", snap.t, i + 1, j + 1, s.get(i, j))?;
                }
            }
        }
    }
    Ok(())
}

pub fn dot_for_signs(signs: &SignMatrix, name: &str) -> Result<String, IoError> {
    let g = SignedGraph::from_sign_matrix(signs)
        .map_err(|e| IoError::Invalid(format!("limit influence pattern: {e}")))?;
    Ok(g.to_dot(name))
}

/// Writes all run artifacts into `dir`, creating it if needed. Returns the
/// written paths.
pub fn write_run(
    dir: &Path,
    report: &RunReport,
    outcome: &SimulationOutcome,
) -> Result<Vec<PathBuf>, IoError> {
    fs::create_dir_all(dir).map_err(|e| IoError::io(dir, e))?;
    let traj = dir.join(TRAJECTORY_FILE);
    let mut f = create(&traj)?;
    write_trajectory_csv(outcome, &mut f)
        .and_then(|()| f.flush())
        .map_err(|e| IoError::io(&traj, e))?;

    let infl = dir.join(INFLUENCE_FILE);
    let mut f = create(&infl)?;
    write_influence_csv(outcome, &mut f)
        .and_then(|()| f.flush())
        .map_err(|e| IoError::io(&infl, e))?;

    let summary = dir.join(SUMMARY_FILE);
    let json = serde_json::to_string_pretty(report).expect("report serializes");
    fs::write(&summary, json + "\n").map_err(|e| IoError::io(&summary, e))?;

    let dot = dir.join(DOT_FILE);
    fs::write(&dot, dot_for_signs(&outcome.w_inf, &report.scenario)?)
        .map_err(|e| IoError::io(&dot, e))?;
    Ok(vec![traj, infl, summary, dot])
}

pub fn read_summary(run_dir: &Path) -> Result<RunReport, IoError> {
    let path = run_dir.join(SUMMARY_FILE);
    let text = fs::read_to_string(&path).map_err(|e| IoError::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| IoError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

/// Regenerates the DOT graph of a finished run from its summary.
pub fn export_dot(run_dir: &Path) -> Result<(PathBuf, String), IoError> {
    let report = read_summary(run_dir)?;
    let signs = SignMatrix::from_rows(&report.w_inf_signs)?;
    let dot = dot_for_signs(&signs, &report.scenario)?;
    let path = run_dir.join(DOT_FILE);
    fs::write(&path, &dot).map_err(|e| IoError::io(&path, e))?;
    Ok((path, dot))
}
