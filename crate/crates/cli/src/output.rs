//! Output plumbing: staged file writes, the run manifest, and readers for
//! the CSV formats `analyze` consumes.
//!
//! Commands build every output file in memory first and commit them in one
//! pass, so a validation or numeric failure never leaves partial files
//! behind. All CSVs are comma-separated with a header row and `.` as the
//! decimal separator; floats use Rust's shortest round-trip formatting, so
//! identical runs produce byte-identical files.

use crate::{CliError, EXIT_IO};
use qladder::brw::{SnapshotRecord, TrajectoryRecord};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// One output file: path relative to the output directory, full contents.
pub struct OutFile {
    pub rel: PathBuf,
    pub text: String,
}

impl OutFile {
    pub fn new(rel: impl Into<PathBuf>, text: String) -> Self {
        Self {
            rel: rel.into(),
            text,
        }
    }
}

/// Write all staged files under `out_dir`, creating directories as needed,
/// and report each path on stdout.
pub fn commit(out_dir: &Path, files: &[OutFile]) -> Result<(), CliError> {
    for file in files {
        let path = out_dir.join(&file.rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| {
                CliError::io(format!("cannot create {}: {e}", parent.display()))
            })?;
        }
        std::fs::write(&path, &file.text)
            .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

/// Pretty-printed JSON with a trailing newline.
pub fn to_json(value: &impl Serialize) -> Result<String, CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError {
        code: EXIT_IO,
        message: format!("cannot serialize JSON: {e}"),
    })?;
    text.push('\n');
    Ok(text)
}

/// Manifest written next to `brw` outputs and consumed by `analyze`. It
/// echoes every parameter of the run plus the exact seeding scheme, so a run
/// is reproducible from its manifest alone.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub command: String,
    pub a: f64,
    pub mu: f64,
    pub policy: crate::config::PolicyBlock,
    pub steps: u64,
    pub initial_level: i64,
    pub initial_count: u64,
    pub snapshot_every: u64,
    pub base_seed: u64,
    pub replicas: u32,
    /// Per-replica ChaCha8 seeds: `splitmix64`-mixed from `base_seed`.
    pub replica_seeds: Vec<u64>,
    pub generator: String,
    pub seed_mixing: String,
}

/// Read and parse a run manifest. Any failure — missing file, malformed
/// JSON, wrong fields — is a manifest error (exit 3).
pub fn read_manifest(path: &Path) -> Result<RunManifest, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("cannot read manifest {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::io(format!("corrupt manifest {}: {e}", path.display())))
}

pub const TRAJECTORY_HEADER: &str = "step,y_max,y_min,N";
pub const SNAPSHOT_HEADER: &str = "step,z,count,h";

/// Render a trajectory as CSV. Row `i` describes the post-selection state
/// after step `i + 1`.
pub fn trajectory_csv(record: &TrajectoryRecord) -> String {
    let mut text = String::with_capacity(32 * record.steps());
    text.push_str(TRAJECTORY_HEADER);
    text.push('\n');
    for i in 0..record.steps() {
        text.push_str(&format!(
            "{},{},{},{}\n",
            i + 1,
            record.y_max[i],
            record.y_min[i],
            record.total[i]
        ));
    }
    text
}

/// Render all snapshots of a run as one CSV. `z` is the level offset above
/// that snapshot's minimum and `h` the fraction of firms at offset `z` or
/// higher; the `step` column tells snapshots apart.
pub fn snapshots_csv(record: &TrajectoryRecord) -> String {
    let mut text = String::from(SNAPSHOT_HEADER);
    text.push('\n');
    for snap in &record.snapshots {
        let h = snap.h();
        for (z, (&count, hz)) in snap.counts.iter().zip(&h).enumerate() {
            text.push_str(&format!("{},{z},{count},{hz}\n", snap.step));
        }
    }
    text
}

fn malformed(path: &Path, line_no: usize, why: &str) -> CliError {
    CliError::io(format!(
        "malformed CSV {} (line {line_no}): {why}",
        path.display()
    ))
}

fn read_csv_lines(path: &Path, header: &str) -> Result<Vec<String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(first) if first == header => {}
        _ => return Err(malformed(path, 1, &format!("expected header \"{header}\""))),
    }
    Ok(lines.map(str::to_owned).collect())
}

/// Parse a trajectory CSV back into a record (snapshots are kept separately).
pub fn read_trajectory(path: &Path) -> Result<TrajectoryRecord, CliError> {
    let mut record = TrajectoryRecord {
        y_max: Vec::new(),
        y_min: Vec::new(),
        total: Vec::new(),
        snapshots: Vec::new(),
    };
    for (i, line) in read_csv_lines(path, TRAJECTORY_HEADER)?.iter().enumerate() {
        let line_no = i + 2;
        let mut fields = line.split(',');
        let mut next = || fields.next().ok_or_else(|| malformed(path, line_no, "too few fields"));
        let step: u64 = parse_field(next()?, path, line_no)?;
        let y_max: i64 = parse_field(next()?, path, line_no)?;
        let y_min: i64 = parse_field(next()?, path, line_no)?;
        let total: u128 = parse_field(next()?, path, line_no)?;
        if step as usize != record.y_max.len() + 1 {
            return Err(malformed(path, line_no, "steps are not consecutive from 1"));
        }
        record.y_max.push(y_max);
        record.y_min.push(y_min);
        record.total.push(total);
    }
    Ok(record)
}

/// Parse a snapshots CSV into per-step profile records. The `h` column is
/// redundant (recomputed from the counts) and only checked for presence.
pub fn read_snapshots(path: &Path) -> Result<Vec<SnapshotRecord>, CliError> {
    let mut snapshots: Vec<SnapshotRecord> = Vec::new();
    for (i, line) in read_csv_lines(path, SNAPSHOT_HEADER)?.iter().enumerate() {
        let line_no = i + 2;
        let mut fields = line.split(',');
        let mut next = || fields.next().ok_or_else(|| malformed(path, line_no, "too few fields"));
        let step: u64 = parse_field(next()?, path, line_no)?;
        let z: usize = parse_field(next()?, path, line_no)?;
        let count: u128 = parse_field(next()?, path, line_no)?;
        let _h: f64 = parse_field(next()?, path, line_no)?;
        match snapshots.last_mut() {
            Some(s) if s.step == step => {
                if z != s.counts.len() {
                    return Err(malformed(path, line_no, "offsets are not consecutive"));
                }
                s.counts.push(count);
                s.total += count;
            }
            _ => {
                if z != 0 {
                    return Err(malformed(path, line_no, "snapshot does not start at z = 0"));
                }
                snapshots.push(SnapshotRecord {
                    step,
                    y_min: 0,
                    counts: vec![count],
                    total: count,
                });
            }
        }
    }
    Ok(snapshots)
}

fn parse_field<T: std::str::FromStr>(
    field: &str,
    path: &Path,
    line_no: usize,
) -> Result<T, CliError> {
    field
        .parse()
        .map_err(|_| malformed(path, line_no, &format!("cannot parse field \"{field}\"")))
}
