//! `brw`: simulate the finite-population branching random walk with
//! selection. Each replica gets its own deterministic seed mixed from the
//! base seed, runs sequentially, and writes a trajectory CSV plus (when
//! snapshots are enabled) a profile CSV. A manifest echoing every parameter
//! and the exact seeding scheme makes the run reproducible and feeds
//! `analyze`.

use crate::config::{require_block, Resolved};
use crate::output::{commit, snapshots_csv, to_json, trajectory_csv, OutFile, RunManifest};
use crate::CliError;
use qladder::brw::{self, BRWParams, CullPolicy, ParticleState};
use qladder::seeding::{replica_seed, GENERATOR_ID, SEED_MIXING};

pub fn run(rc: &Resolved) -> Result<(), CliError> {
    let block = require_block(&rc.config.brw, "brw")?;
    let out_dir = rc.output_dir()?.to_owned();
    let base_seed = rc.base_seed()?;
    let replicas = rc.replica_count()?;
    let snapshot_every = rc.snapshot_every(block);
    let initial_level = block.initial_level.unwrap_or(0);
    let initial_count = block.initial_count.unwrap_or(1);

    let params = BRWParams::new(block.a, block.mu)?;
    let policy = CullPolicy::from(block.policy);
    let initial = ParticleState::point_mass(initial_level, u128::from(initial_count))?;

    // Simulate every replica before writing anything; replicas are merged
    // deterministically in index order.
    let replica_seeds: Vec<u64> = (0..replicas).map(|i| replica_seed(base_seed, i)).collect();
    let mut files = Vec::new();
    for (i, &seed) in replica_seeds.iter().enumerate() {
        let record = brw::run(&initial, &params, &policy, block.steps, seed, snapshot_every)?;
        files.push(OutFile::new(
            format!("replica_{i:02}/trajectory.csv"),
            trajectory_csv(&record),
        ));
        files.push(OutFile::new(
            format!("replica_{i:02}/snapshots.csv"),
            snapshots_csv(&record),
        ));
    }

    let manifest = RunManifest {
        command: "brw".into(),
        a: block.a,
        mu: block.mu,
        policy: block.policy,
        steps: block.steps,
        initial_level,
        initial_count,
        snapshot_every,
        base_seed,
        replicas,
        replica_seeds,
        generator: GENERATOR_ID.into(),
        seed_mixing: SEED_MIXING.into(),
    };
    files.push(OutFile::new("manifest.json", to_json(&manifest)?));
    commit(&out_dir, &files)
}
