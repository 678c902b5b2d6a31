//! `analyze`: compare one or more `brw` output directories against the
//! deterministic predictions. For each run the manifest fixes the model, so
//! the critical exponent `gamma_c`, the asymptotic velocity `v_c`, and the
//! finite-size prediction (`v_N` for top-N selection, `v_L` for a window)
//! are computed fresh; the measured side is a least-squares velocity per
//! replica and, when enough snapshots exist, the pooled front profile and
//! its exponential decay slope (target `-gamma_c`).
//!
//! Outputs: `velocity.csv` (one row per replica), `shape.csv` (pooled mean
//! profile per run), and `verdict.json` with the prediction-vs-measurement
//! summary, including the headline `v_hat_below_v_c` flag per run.

use crate::config::{require_block, PolicyBlock, Resolved};
use crate::output::{commit, read_manifest, read_snapshots, read_trajectory, to_json, OutFile};
use crate::CliError;
use qladder::analysis::{estimate_front_profile, estimate_velocity, find_gamma_c, fit_decay_slope};
use qladder::brw::{BRWParams, SnapshotRecord};
use serde_json::{json, Value};
use std::fmt::Write as _;
use std::path::Path;

pub fn run(rc: &Resolved) -> Result<(), CliError> {
    let block = require_block(&rc.config.analyze, "analyze")?;
    let out_dir = rc.output_dir()?.to_owned();
    if block.runs.is_empty() {
        return Err(CliError::validation("analyze.runs must not be empty"));
    }
    let snapshot_burn_in = block.snapshot_burn_in.unwrap_or(0);

    let mut velocity_csv =
        String::from("run,replica,policy,n_or_l,v_predicted,v_measured,stderr\n");
    let mut shape_csv = String::from("run,z,h_mean\n");
    let mut run_reports = Vec::new();
    let mut all_below = true;

    for run_path in &block.runs {
        let manifest = read_manifest(&run_path.join("manifest.json"))?;
        if manifest.command != "brw" || manifest.replicas == 0 {
            return Err(CliError::io(format!(
                "manifest in {} does not describe a brw run",
                run_path.display()
            )));
        }
        let params = BRWParams::new(manifest.a, manifest.mu)?;
        let profile = find_gamma_c(&params)?;
        let (policy_name, n_or_l, v_predicted, l0, n0) = match manifest.policy {
            PolicyBlock::KeepTopN(n) => {
                if n < 2 {
                    return Err(CliError::validation(format!(
                        "finite-size prediction needs N >= 2 (run {} has N = {n})",
                        run_path.display()
                    )));
                }
                let n = n as f64;
                ("keep_top_n", n, profile.v_n(n), Some(profile.l0(n)), None)
            }
            PolicyBlock::WindowL(l) => {
                if l < 2 {
                    return Err(CliError::validation(format!(
                        "finite-size prediction needs L >= 2 (run {} has L = {l})",
                        run_path.display()
                    )));
                }
                let l = f64::from(l);
                ("window_l", l, profile.v_l(l), None, Some(profile.n0(l)))
            }
        };

        // Per-replica velocities and the pooled snapshot set, replicas
        // merged in index order.
        let mut measured: Vec<(u32, f64, f64)> = Vec::new();
        let mut pooled: Vec<SnapshotRecord> = Vec::new();
        for i in 0..manifest.replicas {
            let dir = run_path.join(format!("replica_{i:02}"));
            let record = read_trajectory(&dir.join("trajectory.csv"))?;
            if record.steps() as u64 != manifest.steps {
                return Err(CliError::io(format!(
                    "{}: trajectory has {} steps but the manifest says {}",
                    dir.display(),
                    record.steps(),
                    manifest.steps
                )));
            }
            let (v_hat, stderr) = estimate_velocity(&record, block.burn_in)?;
            measured.push((i, v_hat, stderr));
            let snapshots = read_snapshots(&dir.join("snapshots.csv"))?;
            pooled.extend(snapshots.into_iter().skip(snapshot_burn_in));
        }

        for &(i, v_hat, stderr) in &measured {
            writeln!(
                velocity_csv,
                "{},{i},{policy_name},{n_or_l},{v_predicted},{v_hat},{stderr}",
                run_path.display()
            )
            .unwrap();
        }

        let below = measured.iter().all(|&(_, v, _)| v < profile.v_c());
        all_below &= below;
        let v_hat_mean =
            measured.iter().map(|&(_, v, _)| v).sum::<f64>() / measured.len() as f64;
        let (shape, shape_note) = shape_report(
            &pooled,
            block.fit_window,
            profile.gamma_c(),
            &mut shape_csv,
            run_path,
        )?;

        run_reports.push(json!({
            "path": run_path.display().to_string(),
            "policy": manifest.policy,
            "n_or_l": n_or_l,
            "gamma_c": profile.gamma_c(),
            "v_c": profile.v_c(),
            "v_second": profile.v_second(),
            "l0": l0,
            "n0": n0,
            "v_predicted": v_predicted,
            "replicas": measured
                .iter()
                .map(|&(i, v_hat, stderr)| json!({
                    "replica": i,
                    "v_hat": v_hat,
                    "stderr": stderr,
                }))
                .collect::<Vec<_>>(),
            "v_hat_mean": v_hat_mean,
            "v_hat_below_v_c": below,
            "shape": shape,
            "shape_note": shape_note,
        }));
    }

    let verdict = to_json(&json!({
        "command": "analyze",
        "burn_in": block.burn_in,
        "snapshot_burn_in": snapshot_burn_in,
        "runs": run_reports,
        "all_below_v_c": all_below,
    }))?;

    commit(
        &out_dir,
        &[
            OutFile::new("velocity.csv", velocity_csv),
            OutFile::new("shape.csv", shape_csv),
            OutFile::new("verdict.json", verdict),
        ],
    )
}

/// Pooled front-profile analysis for one run. Returns the JSON fragment for
/// the verdict plus an optional note explaining why the shape fit was
/// skipped. An explicitly configured fit window propagates its errors; the
/// default window degrades gracefully when the front is too narrow to fit.
fn shape_report(
    pooled: &[SnapshotRecord],
    fit_window: Option<(f64, f64)>,
    gamma_c: f64,
    shape_csv: &mut String,
    run_path: &Path,
) -> Result<(Value, Option<String>), CliError> {
    if pooled.len() < 100 {
        return Ok((
            Value::Null,
            Some(format!(
                "shape fit skipped: {} snapshots after burn-in, profile averaging needs 100",
                pooled.len()
            )),
        ));
    }
    let profile = estimate_front_profile(pooled)?;
    for (z, h) in profile.h_mean().iter().enumerate() {
        writeln!(shape_csv, "{},{z},{h}", run_path.display()).unwrap();
    }
    let l_bar = profile.mean_support();
    let (window, is_default) = match fit_window {
        Some(w) => (w, false),
        None => ((0.25 * l_bar + 0.01, 0.75 * l_bar - 0.01), true),
    };
    match fit_decay_slope(&profile, window) {
        Ok(slope) => Ok((
            json!({
                "n_snapshots": profile.n_snapshots(),
                "mean_support": l_bar,
                "window": [window.0, window.1],
                "slope": slope,
                "target": -gamma_c,
            }),
            None,
        )),
        Err(qladder::Error::WindowError(why)) if is_default => Ok((
            Value::Null,
            Some(format!("shape fit skipped: {why}")),
        )),
        Err(e) => Err(e.into()),
    }
}
