//! `density`: stationary relative densities when laggards imitate the best
//! practice, swept over the frontier success probability `q_m`. One profile
//! CSV per `q_m` plus a sweep summary with the imitation intensity `mu` and
//! frontier share `x1`.

use crate::config::{require_block, Resolved};
use crate::output::{commit, OutFile};
use crate::CliError;
use qladder::density::{solve_stationary_density, DensityModelConfig, StationarySolution};
use std::fmt::Write as _;

pub fn run(rc: &Resolved) -> Result<(), CliError> {
    let block = require_block(&rc.config.density, "density")?;
    let out_dir = rc.output_dir()?.to_owned();
    if block.q_m_values.is_empty() {
        return Err(CliError::validation("density.q_m_values must not be empty"));
    }

    // Solve the whole sweep before writing anything, so one bad entry
    // (q_m = 0 has no stationary solution) aborts with no partial output.
    let mut solutions: Vec<(f64, StationarySolution)> = Vec::new();
    for &q_m in &block.q_m_values {
        let config = DensityModelConfig::new(block.m, block.a, q_m)?;
        solutions.push((q_m, solve_stationary_density(&config)?));
    }

    let mut files = Vec::new();
    let mut summary = String::from("q_m,mu,x1,at_boundary\n");
    for (q_m, sol) in &solutions {
        let mut csv = String::from("level,x\n");
        for (i, &x) in sol.x().f().iter().enumerate() {
            writeln!(csv, "{},{}", i + 1, x).unwrap();
        }
        files.push(OutFile::new(format!("profile_qm_{q_m}.csv"), csv));
        writeln!(summary, "{q_m},{},{},{}", sol.mu(), sol.x1(), sol.at_boundary()).unwrap();
    }
    files.push(OutFile::new("density_summary.csv", summary));
    commit(&out_dir, &files)
}
