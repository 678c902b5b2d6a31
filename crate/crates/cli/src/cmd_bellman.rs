//! `bellman`: leapfrog value iteration on the grid `{j_min, …, m}`. Without
//! `q_m` the laggard's only move is the jump to the frontier; with `q_m` the
//! solver closes the loop between the jump threshold and the stationary
//! density it induces, reporting the self-consistent support.
//!
//! Outputs: `value_function.csv` with the fixed point and both continuation
//! branches, a JSON summary with the threshold `j0` and support size, and —
//! in coupled mode — the stationary profile over the support.

use crate::config::{require_block, Resolved};
use crate::output::{commit, to_json, OutFile};
use crate::CliError;
use qladder::bellman::{solve_leapfrog_imitation, solve_leapfrog_only, EconomicParams, ValueSolution};
use std::fmt::Write as _;

const DEFAULT_TOL: f64 = 1e-10;
const DEFAULT_MAX_OUTER: usize = 64;

pub fn run(rc: &Resolved) -> Result<(), CliError> {
    let block = require_block(&rc.config.bellman, "bellman")?;
    let out_dir = rc.output_dir()?.to_owned();
    let params = EconomicParams::new(block.a, block.lambda, block.beta0, block.cost)?;
    let tol = block.tol.unwrap_or(DEFAULT_TOL);
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(CliError::validation(format!(
            "bellman.tol must be positive and finite (got {tol})"
        )));
    }
    let max_outer = block.max_outer.unwrap_or(DEFAULT_MAX_OUTER);

    let mut files = Vec::new();
    let summary = match block.q_m {
        None => {
            let sol = solve_leapfrog_only(&params, block.m, block.j_min, tol)?;
            files.push(OutFile::new("value_function.csv", value_csv(&sol)));
            to_json(&serde_json::json!({
                "command": "bellman",
                "mode": "leapfrog_only",
                "a": block.a,
                "lambda": block.lambda,
                "beta0": block.beta0,
                "cost": block.cost,
                "m": block.m,
                "j_min": block.j_min,
                "tol": tol,
                "j0": sol.j0(),
                "support_size": sol.support_size(),
                "sweeps": sol.sweeps(),
            }))?
        }
        Some(q_m) => {
            let coupled =
                solve_leapfrog_imitation(&params, block.m, block.j_min, q_m, tol, max_outer)?;
            let sol = coupled.value();
            let stationary = coupled.stationary();
            files.push(OutFile::new("value_function.csv", value_csv(sol)));

            // The stationary profile lives on the support, i.e. the top
            // `support_size` levels of the ladder.
            let s = sol.support_size();
            let mut profile = String::from("level,x\n");
            for (k, &x) in stationary.x().f().iter().enumerate() {
                let level = block.m - s as i64 + 1 + k as i64;
                writeln!(profile, "{level},{x}").unwrap();
            }
            files.push(OutFile::new("support_profile.csv", profile));

            to_json(&serde_json::json!({
                "command": "bellman",
                "mode": "coupled",
                "a": block.a,
                "lambda": block.lambda,
                "beta0": block.beta0,
                "cost": block.cost,
                "m": block.m,
                "j_min": block.j_min,
                "q_m": q_m,
                "tol": tol,
                "max_outer": max_outer,
                "j0": sol.j0(),
                "support_size": s,
                "sweeps": sol.sweeps(),
                "outer_path": coupled.outer_path(),
                "mu": stationary.mu(),
                "x1": stationary.x1(),
                "at_boundary": stationary.at_boundary(),
            }))?
        }
    };
    files.push(OutFile::new("bellman_summary.json", summary));
    commit(&out_dir, &files)
}

fn value_csv(sol: &ValueSolution) -> String {
    let mut csv = String::from("j,V,V_LF,V_NLF\n");
    for (idx, j) in sol.levels().enumerate() {
        writeln!(
            csv,
            "{j},{},{},{}",
            sol.v()[idx],
            sol.v_lf()[idx],
            sol.v_nlf()[idx]
        )
        .unwrap();
    }
    csv
}
