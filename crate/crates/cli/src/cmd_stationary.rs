//! `stationary`: stationary density of the ladder with an exogenous
//! imitation distribution, plus the mixing rate (second eigenvalue modulus)
//! and the upper-tail sums `Q_s` that generate the solution.

use crate::config::{require_block, Resolved};
use crate::output::{commit, to_json, OutFile};
use crate::CliError;
use qladder::ladder::{second_eigenvalue_modulus, stationary_exogenous, LadderConfig};
use std::fmt::Write as _;

pub fn run(rc: &Resolved) -> Result<(), CliError> {
    let block = require_block(&rc.config.stationary, "stationary")?;
    let out_dir = rc.output_dir()?.to_owned();
    let ladder = LadderConfig::new(block.m, block.a, block.q.clone())?;
    if ladder.renormalized() {
        eprintln!("note: q summed to 1 only within rounding error and was renormalized");
    }

    let stationary = stationary_exogenous(&ladder);
    let mixing = second_eigenvalue_modulus(&ladder)?;
    let q_upper_sums: Vec<f64> = (1..=ladder.m()).map(|s| ladder.q_upper_sum(s)).collect();

    let mut csv = String::from("level,density\n");
    for (i, &f) in stationary.f().iter().enumerate() {
        writeln!(csv, "{},{}", i + 1, f).unwrap();
    }

    let summary = to_json(&serde_json::json!({
        "command": "stationary",
        "m": ladder.m(),
        "a": ladder.a(),
        "q": ladder.q(),
        "renormalized": ladder.renormalized(),
        "second_eigenvalue_modulus": mixing,
        "q_upper_sums": q_upper_sums,
        "stationary_density": stationary.f(),
    }))?;

    commit(
        &out_dir,
        &[
            OutFile::new("stationary.csv", csv),
            OutFile::new("stationary_summary.json", summary),
        ],
    )
}
