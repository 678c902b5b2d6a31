//! Mean-field ladder dynamics with exogenous imitation rates.
//!
//! Firms sit on a relabeled ladder `{1, …, m}`. Each step, a fraction `a`
//! innovates one level up; the rest of the turnover re-enters at level `i`
//! with probability `q_i` (taken from the bottom-level density). In the
//! relabeled frame the one-step map is
//!
//! ```text
//! f'_i = (1 - a) f_{i+1} + a f_i + (1 - a) f_1 q_i,      f_{m+1} := 0,
//! ```
//!
//! which is multiplication by a column-stochastic matrix `A` with diagonal
//! `a`, superdiagonal `1 - a`, and first column `a + q_1 (1-a),
//! q_2 (1-a), …, q_m (1-a)`. The stationary profile has the closed form
//! `f_s = Q_s * f_1` with `Q_s = Σ_{j≥s} q_j` and `f_1 = 1 / Σ_s Q_s`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Absolute tolerance for "sums to one" checks.
pub const NORMALIZATION_TOL: f64 = 1e-12;
/// Inputs whose sum is off by at most this much are renormalized (and the
/// result flagged); anything worse is rejected.
pub const RENORMALIZATION_LIMIT: f64 = 1e-9;

fn check_normalized(v: &[f64], what: &str) -> Result<bool> {
    if let Some(&bad) = v.iter().find(|x| !x.is_finite() || **x < 0.0) {
        return Err(Error::InvalidParameter(format!(
            "{what} entries must be finite and non-negative (found {bad})"
        )));
    }
    let sum: f64 = v.iter().sum();
    let off = (sum - 1.0).abs();
    if off <= NORMALIZATION_TOL {
        Ok(false)
    } else if off <= RENORMALIZATION_LIMIT {
        Ok(true)
    } else {
        Err(Error::InvalidParameter(format!(
            "{what} must sum to 1 (got {sum}, off by {off:.3e})"
        )))
    }
}

/// Ladder length, innovation probability, and imitation weights.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderConfig {
    m: usize,
    a: f64,
    q: Vec<f64>,
    renormalized: bool,
}

impl LadderConfig {
    /// Validate and build a configuration.
    ///
    /// Requires `m >= 2`, `a` strictly inside `(0, 1)` (the degenerate
    /// endpoints are rejected), `q.len() == m`, all `q_i >= 0`, and
    /// `Σ q_i = 1` within [`NORMALIZATION_TOL`]. A sum within
    /// [`RENORMALIZATION_LIMIT`] is renormalized and flagged.
    pub fn new(m: usize, a: f64, q: Vec<f64>) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidParameter(format!("m must be >= 2 (got {m})")));
        }
        if !(a > 0.0 && a < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "a must lie strictly in (0, 1) (got {a})"
            )));
        }
        if q.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: q.len(),
            });
        }
        let mut q = q;
        let renormalized = check_normalized(&q, "q")?;
        if renormalized {
            let sum: f64 = q.iter().sum();
            for qi in &mut q {
                *qi /= sum;
            }
        }
        Ok(Self {
            m,
            a,
            q,
            renormalized,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    /// Whether the input weights were renormalized during validation.
    pub fn renormalized(&self) -> bool {
        self.renormalized
    }

    /// Upper-tail weight `Q_s = Σ_{j=s}^{m} q_j` for `s` in `1..=m`.
    ///
    /// Summed from the top down so small tail weights are not swamped.
    pub fn q_upper_sum(&self, s: usize) -> f64 {
        assert!(
            (1..=self.m).contains(&s),
            "s must lie in 1..=m (got {s}, m = {})",
            self.m
        );
        self.q[s - 1..].iter().rev().sum()
    }
}

/// A normalized density of firms over the `m` ladder levels.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityVector {
    f: Vec<f64>,
    renormalized: bool,
}

impl DensityVector {
    /// Validate and build a density.
    ///
    /// Same normalization policy as [`LadderConfig::new`]: exact within
    /// `1e-12`, renormalize-and-flag within `1e-9`, reject beyond.
    pub fn new(f: Vec<f64>) -> Result<Self> {
        if f.is_empty() {
            return Err(Error::InvalidParameter("density must be non-empty".into()));
        }
        let mut f = f;
        let renormalized = check_normalized(&f, "density")?;
        if renormalized {
            let sum: f64 = f.iter().sum();
            for fi in &mut f {
                *fi /= sum;
            }
        }
        Ok(Self { f, renormalized })
    }

    /// The uniform density on `m` levels.
    pub fn uniform(m: usize) -> Self {
        Self {
            f: vec![1.0 / m as f64; m],
            renormalized: false,
        }
    }

    /// All mass on level `i` (1-indexed) of an `m`-level ladder.
    pub fn point_mass(m: usize, i: usize) -> Self {
        assert!((1..=m).contains(&i), "level {i} outside 1..={m}");
        let mut f = vec![0.0; m];
        f[i - 1] = 1.0;
        Self {
            f,
            renormalized: false,
        }
    }

    /// Internal constructor for outputs that are normalized by construction.
    pub(crate) fn from_normalized(f: Vec<f64>) -> Self {
        Self {
            f,
            renormalized: false,
        }
    }

    pub fn f(&self) -> &[f64] {
        &self.f
    }

    pub fn len(&self) -> usize {
        self.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }

    pub fn renormalized(&self) -> bool {
        self.renormalized
    }

    /// `Σ_i |f_i - g_i|`.
    pub fn l1_distance(&self, other: &Self) -> f64 {
        assert_eq!(self.len(), other.len(), "density lengths differ");
        self.f
            .iter()
            .zip(&other.f)
            .map(|(x, y)| (x - y).abs())
            .sum()
    }
}

/// The column-stochastic one-step matrix of the exogenous-rate model.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    a: DMatrix<f64>,
}

impl TransitionMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    /// `A · f` as a density (normalized by construction).
    pub fn apply(&self, f: &DensityVector) -> Result<DensityVector> {
        if f.len() != self.a.ncols() {
            return Err(Error::DimensionMismatch {
                expected: self.a.ncols(),
                got: f.len(),
            });
        }
        let x = nalgebra::DVector::from_column_slice(f.f());
        let y = &self.a * x;
        Ok(DensityVector::from_normalized(y.iter().copied().collect()))
    }
}

/// Build the transition matrix of the one-step map (infallible: the config
/// is validated at construction).
pub fn build_transition(config: &LadderConfig) -> TransitionMatrix {
    let m = config.m();
    let a = config.a();
    let q = config.q();
    let mut mat = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        mat[(i, i)] = a;
        if i + 1 < m {
            mat[(i, i + 1)] = 1.0 - a;
        }
        mat[(i, 0)] += q[i] * (1.0 - a);
    }
    TransitionMatrix { a: mat }
}

/// Shared update kernel `f'_i = (1-a) f_{i+1} + a f_i + (1-a) f_1 q_i`
/// (with `f_{m+1} = 0`), used by both the exogenous and density-dependent
/// steppers. Both `f` and `q` must have length `m`.
pub(crate) fn step_kernel(f: &[f64], a: f64, q: &[f64]) -> Vec<f64> {
    let m = f.len();
    let f1 = f[0];
    (0..m)
        .map(|i| {
            let up = if i + 1 < m { f[i + 1] } else { 0.0 };
            (1.0 - a) * up + a * f[i] + (1.0 - a) * f1 * q[i]
        })
        .collect()
}

/// One step of the exogenous-rate dynamics; equals `A · f`.
pub fn step_exogenous(f: &DensityVector, config: &LadderConfig) -> Result<DensityVector> {
    if f.len() != config.m() {
        return Err(Error::DimensionMismatch {
            expected: config.m(),
            got: f.len(),
        });
    }
    Ok(DensityVector::from_normalized(step_kernel(
        f.f(),
        config.a(),
        config.q(),
    )))
}

/// Closed-form stationary distribution: `f_s = Q_s / Σ_u Q_u`.
///
/// Independent of `a`, non-increasing in the level index.
pub fn stationary_exogenous(config: &LadderConfig) -> DensityVector {
    let m = config.m();
    // Tail sums accumulated from the top so tiny upper weights stay exact.
    let mut tails = vec![0.0; m];
    let mut acc = 0.0;
    for s in (0..m).rev() {
        acc += config.q()[s];
        tails[s] = acc;
    }
    let total: f64 = tails.iter().rev().sum();
    DensityVector::from_normalized(tails.into_iter().map(|t| t / total).collect())
}

/// Iterate the one-step map until the successive L1 distance drops below
/// `tol`; returns the iterate and the number of steps taken.
///
/// Fails with [`Error::PowerIterationDiverged`] (carrying the last iterate)
/// if `max_steps` is exhausted first.
pub fn power_iterate(
    f0: &DensityVector,
    config: &LadderConfig,
    tol: f64,
    max_steps: usize,
) -> Result<(DensityVector, usize)> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tol must be positive (got {tol})"
        )));
    }
    if max_steps == 0 {
        return Err(Error::InvalidParameter("max_steps must be positive".into()));
    }
    let mut current = f0.clone();
    let mut residual = f64::INFINITY;
    for step in 1..=max_steps {
        let next = step_exogenous(&current, config)?;
        residual = next.l1_distance(&current);
        current = next;
        if residual < tol {
            return Ok((current, step));
        }
    }
    Err(Error::PowerIterationDiverged {
        steps: max_steps,
        residual,
        last: current.f().to_vec(),
    })
}

/// Modulus of the second-largest eigenvalue of the transition matrix —
/// the convergence factor toward the stationary distribution.
///
/// For `m = 2` this equals `|2a - 1 + q_1 (1 - a)|` exactly.
pub fn second_eigenvalue_modulus(config: &LadderConfig) -> Result<f64> {
    let mat = build_transition(config).a;
    let schur = nalgebra::linalg::Schur::try_new(mat, 1e-14, 100_000).ok_or_else(|| {
        Error::NumericError("Schur decomposition of the transition matrix did not converge".into())
    })?;
    let mut moduli: Vec<f64> = schur.complex_eigenvalues().iter().map(|z| z.norm()).collect();
    moduli.sort_by(|x, y| y.total_cmp(x));
    // Column-stochastic: the leading eigenvalue is 1. Anything else means the
    // solver went off the rails.
    if (moduli[0] - 1.0).abs() > 1e-8 {
        return Err(Error::NumericError(format!(
            "leading eigenvalue modulus {} is not 1",
            moduli[0]
        )));
    }
    Ok(moduli[1])
}
