//! Exact finite-population simulators: branching random walks with
//! selection.
//!
//! Each firm, independently each step, innovates with probability `a`
//! (moving up one level) and is imitated with probability `mu` (leaving a
//! copy of itself at its current level). The four outcomes per firm are
//!
//! | outcome              | probability    | offspring            |
//! |----------------------|----------------|----------------------|
//! | stay                 | (1-a)(1-mu)    | 1 at y               |
//! | imitated             | (1-a)mu        | 2 at y               |
//! | innovate             | a(1-mu)        | 1 at y+1             |
//! | innovate + imitated  | a·mu           | 1 at y, 1 at y+1     |
//!
//! so every firm leaves one or two offspring and the population can only
//! grow during the evolution phase. Selection then culls from the bottom:
//! either down to a fixed population `N` (N-BRW) or to a fixed window of
//! `L` levels below the leader (L-BRW).
//!
//! The state stores exact integer counts per level. Counts are `u128`
//! because the L-BRW equilibrates at a population of order `e^(gamma_c L)`,
//! which overflows `u64` already for moderate windows.

use rand::Rng;
use rand_distr::{Binomial, Distribution, Normal};

use crate::error::{Error, Result};
use crate::seeding::make_rng;

/// Per-firm step probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BRWParams {
    a: f64,
    mu: f64,
}

impl BRWParams {
    /// Requires `a ∈ (0,1)` (the endpoints are degenerate walks) and
    /// `mu ∈ [0,1]`. Supercritical branching — the regime the selection
    /// models are about — needs `mu > 0`; `mu = 0` is admitted as the pure
    /// displacement walk used to check the innovation marginal in
    /// isolation.
    pub fn new(a: f64, mu: f64) -> Result<Self> {
        if !(a > 0.0 && a < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "a must lie strictly in (0, 1) (got {a})"
            )));
        }
        if !(0.0..=1.0).contains(&mu) {
            return Err(Error::InvalidParameter(format!(
                "mu must lie in [0, 1] (got {mu})"
            )));
        }
        Ok(Self { a, mu })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }
}

/// Selection rule applied after each evolution phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CullPolicy {
    /// Keep exactly the `N` highest firms (once the population reaches `N`).
    KeepTopN(u64),
    /// Remove every firm lagging `L` or more levels behind the leader: the
    /// surviving window is `{y_max - L + 1, …, y_max}`.
    WindowL(u32),
}

impl CullPolicy {
    fn validate(&self) -> Result<()> {
        match self {
            CullPolicy::KeepTopN(n) if *n == 0 => Err(Error::InvalidParameter(
                "KeepTopN requires a positive population".into(),
            )),
            CullPolicy::WindowL(l) if *l == 0 => Err(Error::InvalidParameter(
                "WindowL requires a positive window".into(),
            )),
            _ => Ok(()),
        }
    }
}

/// Exact firm counts per absolute productivity level.
///
/// The representation is tight: `counts[0] > 0` and `counts[last] > 0`, so
/// `floor` is the lowest occupied level and `floor + counts.len() - 1` the
/// highest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParticleState {
    floor: i64,
    counts: Vec<u128>,
    total: u128,
    time: u64,
}

impl ParticleState {
    /// All `n` firms at a single level, at time 0.
    pub fn point_mass(level: i64, n: u128) -> Result<Self> {
        Self::from_counts(level, vec![n])
    }

    /// Build from per-level counts starting at `floor`; leading and trailing
    /// zeros are trimmed. At least one firm is required.
    pub fn from_counts(floor: i64, counts: Vec<u128>) -> Result<Self> {
        let lead = counts.iter().take_while(|&&c| c == 0).count();
        let trail = counts.iter().rev().take_while(|&&c| c == 0).count();
        if lead + trail >= counts.len() {
            return Err(Error::InvalidParameter(
                "particle state needs at least one firm".into(),
            ));
        }
        let tight: Vec<u128> = counts[lead..counts.len() - trail].to_vec();
        let total = tight.iter().sum();
        Ok(Self {
            floor: floor + lead as i64,
            counts: tight,
            total,
            time: 0,
        })
    }

    pub fn y_min(&self) -> i64 {
        self.floor
    }

    pub fn y_max(&self) -> i64 {
        self.floor + self.counts.len() as i64 - 1
    }

    /// Counts for levels `y_min(), …, y_max()`.
    pub fn counts(&self) -> &[u128] {
        &self.counts
    }

    pub fn total(&self) -> u128 {
        self.total
    }

    pub fn time(&self) -> u64 {
        self.time
    }
}

/// Largest `n` the exact integer sampler handles; above it `n` is no longer
/// exactly representable in an `f64` and we switch to a clamped normal
/// approximation, whose relative error at that scale (O(1/sqrt(n p (1-p))))
/// is far below any statistical resolution.
const EXACT_BINOMIAL_MAX: u128 = 1 << 53;

/// Draw Binomial(n, p) with `u128` support. Degenerate cases (`n = 0`,
/// `p = 0`, `p = 1`) are answered without consuming randomness.
fn binomial<R: Rng + ?Sized>(rng: &mut R, n: u128, p: f64) -> u128 {
    debug_assert!((0.0..=1.0).contains(&p));
    if n == 0 || p == 0.0 {
        return 0;
    }
    if p == 1.0 {
        return n;
    }
    if n <= EXACT_BINOMIAL_MAX {
        let dist = Binomial::new(n as u64, p).expect("valid binomial parameters");
        return u128::from(dist.sample(rng));
    }
    let nf = n as f64;
    let mean = nf * p;
    let sd = (nf * p * (1.0 - p)).sqrt();
    let draw = Normal::new(mean, sd)
        .expect("valid normal parameters")
        .sample(rng);
    if draw <= 0.0 {
        0
    } else if draw >= nf {
        n
    } else {
        draw.round() as u128
    }
}

/// One evolution phase: every firm draws its four-outcome fate.
///
/// Implemented per occupied level by the exact factorization
/// `k_innov ~ Bin(n, a)`, `k_both ~ Bin(k_innov, mu)`,
/// `k_imit ~ Bin(n - k_innov, mu)`: the level keeps
/// `(n - k_innov) + k_imit + k_both` firms and sends `k_innov` one level up.
/// The population never shrinks in this phase. Levels are visited from the
/// bottom upward, so the draw sequence — and hence the trajectory — is a
/// deterministic function of `(state, seed)`.
pub fn evolve_step<R: Rng + ?Sized>(
    state: &ParticleState,
    params: &BRWParams,
    rng: &mut R,
) -> ParticleState {
    let n_levels = state.counts.len();
    let mut new_counts = vec![0u128; n_levels + 1];
    for (i, &n) in state.counts.iter().enumerate() {
        if n == 0 {
            continue;
        }
        let k_innov = binomial(rng, n, params.a);
        let k_both = binomial(rng, k_innov, params.mu);
        let k_imit = binomial(rng, n - k_innov, params.mu);
        new_counts[i] += (n - k_innov) + k_imit + k_both;
        new_counts[i + 1] += k_innov;
    }
    let mut next = ParticleState::from_counts(state.floor, new_counts)
        .expect("evolution preserves at least one firm");
    next.time = state.time + 1;
    next
}

/// One selection phase. Returns the culled state and an `underfull` flag:
/// `true` when a `KeepTopN` cull found the population still below `N` and
/// removed nothing.
pub fn cull(state: &ParticleState, policy: &CullPolicy) -> (ParticleState, bool) {
    match *policy {
        CullPolicy::KeepTopN(n_keep) => {
            let n_keep = u128::from(n_keep);
            if state.total <= n_keep {
                return (state.clone(), state.total < n_keep);
            }
            let mut excess = state.total - n_keep;
            let mut counts = state.counts.clone();
            for c in counts.iter_mut() {
                if excess == 0 {
                    break;
                }
                let removed = (*c).min(excess);
                *c -= removed;
                excess -= removed;
            }
            let mut culled = ParticleState::from_counts(state.floor, counts)
                .expect("KeepTopN keeps at least one firm");
            culled.time = state.time;
            (culled, false)
        }
        CullPolicy::WindowL(l) => {
            let cutoff = state.y_max() - i64::from(l) + 1;
            if state.floor >= cutoff {
                return (state.clone(), false);
            }
            let drop = (cutoff - state.floor) as usize;
            let counts = state.counts[drop..].to_vec();
            let mut culled = ParticleState::from_counts(cutoff, counts)
                .expect("the leading level survives any window");
            culled.time = state.time;
            (culled, false)
        }
    }
}

/// Empirical profile captured during a run: exact counts at one time step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnapshotRecord {
    pub step: u64,
    pub y_min: i64,
    pub counts: Vec<u128>,
    pub total: u128,
}

impl SnapshotRecord {
    /// Cumulative profile `h(z)`: the fraction of firms at level
    /// `y_min + z` or higher, for `z = 0, …, support-1`. `h(0) = 1` and the
    /// sequence is non-increasing.
    pub fn h(&self) -> Vec<f64> {
        let mut tail = 0u128;
        let mut h = vec![0.0; self.counts.len()];
        for (z, &c) in self.counts.iter().enumerate().rev() {
            tail += c;
            h[z] = tail as f64 / self.total as f64;
        }
        h
    }
}

/// Per-step observables of one simulated trajectory, plus periodic
/// snapshots. Entry `i` of each vector describes the state after step
/// `i + 1` (post-cull).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrajectoryRecord {
    pub y_max: Vec<i64>,
    pub y_min: Vec<i64>,
    pub total: Vec<u128>,
    pub snapshots: Vec<SnapshotRecord>,
}

impl TrajectoryRecord {
    pub fn steps(&self) -> usize {
        self.y_max.len()
    }
}

/// Simulate `steps` alternations of evolution and culling.
///
/// Observables are recorded after every cull; full profiles every
/// `snapshot_every` steps (`0` disables snapshots). The trajectory is a
/// deterministic function of `(initial, params, policy, steps, seed)`; see
/// [`crate::seeding`] for the generator contract. Extinction is reported
/// defensively but is unreachable: every firm leaves at least one offspring
/// and the leading level always survives the cull.
pub fn run(
    initial: &ParticleState,
    params: &BRWParams,
    policy: &CullPolicy,
    steps: u64,
    seed: u64,
    snapshot_every: u64,
) -> Result<TrajectoryRecord> {
    if steps == 0 {
        return Err(Error::InvalidParameter("steps must be at least 1".into()));
    }
    policy.validate()?;
    let mut rng = make_rng(seed);
    let mut state = initial.clone();
    let mut record = TrajectoryRecord {
        y_max: Vec::with_capacity(steps as usize),
        y_min: Vec::with_capacity(steps as usize),
        total: Vec::with_capacity(steps as usize),
        snapshots: Vec::new(),
    };
    for t in 1..=steps {
        let evolved = evolve_step(&state, params, &mut rng);
        let (culled, _underfull) = cull(&evolved, policy);
        state = culled;
        if state.total == 0 {
            return Err(Error::Extinct { step: t });
        }
        record.y_max.push(state.y_max());
        record.y_min.push(state.y_min());
        record.total.push(state.total);
        if snapshot_every > 0 && t % snapshot_every == 0 {
            record.snapshots.push(SnapshotRecord {
                step: t,
                y_min: state.y_min(),
                counts: state.counts.clone(),
                total: state.total,
            });
        }
    }
    Ok(record)
}
