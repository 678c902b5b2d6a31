//! Mean-field ladder with density-dependent imitation rates.
//!
//! Imitation targets are drawn proportionally to the density one level above
//! the imitated firm: `q_j(f) = μ f^{j+1}` for `j < m` with the leapfrog
//! weight `q_m` exogenous, and `μ = (1 - q_m) / (1 - f^1)` chosen so the
//! weights are normalized. The stationary profile is the truncated power law
//!
//! ```text
//! x_i = q_m x_1 (1 + μ x_1)^{m-i},      (1 + μ x_1)^{m-1} q_m = 1,
//! ```
//!
//! with the closed forms `μ = q_m^{-1/(m-1)} - q_m` and
//! `x_1 = (q_m^{-1/(m-1)} - 1) / (q_m^{-1/(m-1)} - q_m)`.

use crate::error::{Error, Result};
use crate::ladder::{step_kernel, DensityVector, NORMALIZATION_TOL};

/// Parameters of the density-dependent model: ladder length, innovation
/// probability, and the exogenous leapfrog weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityModelConfig {
    m: usize,
    a: f64,
    q_m: f64,
}

impl DensityModelConfig {
    /// Requires `m >= 2`, `a` strictly in `(0, 1)`, and `q_m` in `[0, 1]`.
    /// (The stationary solver additionally requires `q_m > 0`.)
    pub fn new(m: usize, a: f64, q_m: f64) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidParameter(format!("m must be >= 2 (got {m})")));
        }
        if !(a > 0.0 && a < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "a must lie strictly in (0, 1) (got {a})"
            )));
        }
        if !(0.0..=1.0).contains(&q_m) {
            return Err(Error::InvalidParameter(format!(
                "q_m must lie in [0, 1] (got {q_m})"
            )));
        }
        Ok(Self { m, a, q_m })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn q_m(&self) -> f64 {
        self.q_m
    }
}

/// The stationary profile of the density-dependent model together with the
/// imitation intensity it induces.
#[derive(Debug, Clone, PartialEq)]
pub struct StationarySolution {
    x: DensityVector,
    mu: f64,
    x1: f64,
    at_boundary: bool,
}

impl StationarySolution {
    pub fn x(&self) -> &DensityVector {
        &self.x
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn x1(&self) -> f64 {
        self.x1
    }

    /// True when the solution was produced by a boundary rule (`q_m = 1`
    /// exact uniform limit, or the degenerate single-level profile) instead
    /// of the interior closed form.
    pub fn at_boundary(&self) -> bool {
        self.at_boundary
    }

    /// The degenerate one-level profile (all mass at the top). Used when an
    /// endogenous support collapses to a single level; `x1 = 1`, `mu = 0`.
    pub(crate) fn degenerate_single_level() -> Self {
        Self {
            x: DensityVector::from_normalized(vec![1.0]),
            mu: 0.0,
            x1: 1.0,
            at_boundary: true,
        }
    }
}

/// Imitation intensity closed form `μ = q_m^{-1/(m-1)} - q_m`.
pub fn mu_closed_form(m: usize, q_m: f64) -> Result<f64> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!("m must be >= 2 (got {m})")));
    }
    if !(q_m > 0.0 && q_m < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "q_m must lie strictly in (0, 1) (got {q_m})"
        )));
    }
    let (rm1, eps_q) = ratio_minus_one(m, q_m);
    // μ = r - q_m = (r - 1) + (1 - q_m), both terms positive.
    Ok(rm1 + eps_q)
}

/// `(r - 1, 1 - q_m)` with full relative precision, where
/// `r = q_m^{-1/(m-1)}`. Near `q_m = 1` both quantities vanish and the naive
/// `powf` route loses seven digits to cancellation; `ln_1p`/`exp_m1` keep
/// them exact to the ulp.
fn ratio_minus_one(m: usize, q_m: f64) -> (f64, f64) {
    let eps_q = 1.0 - q_m;
    let rm1 = (-(-eps_q).ln_1p() / (m as f64 - 1.0)).exp_m1();
    (rm1, eps_q)
}

/// Solve for the stationary profile.
///
/// * `q_m ∈ (0, 1)`: the truncated-power-law closed form.
/// * `q_m = 1`: the exact uniform limit, flagged `at_boundary`.
/// * `q_m = 0`: no stationary solution exists (the top level drains).
pub fn solve_stationary_density(config: &DensityModelConfig) -> Result<StationarySolution> {
    let m = config.m();
    let q_m = config.q_m();
    if q_m == 0.0 {
        return Err(Error::NoStationarySolution);
    }
    if q_m == 1.0 {
        return Ok(StationarySolution {
            x: DensityVector::uniform(m),
            mu: 0.0,
            x1: 1.0 / m as f64,
            at_boundary: true,
        });
    }
    // r = q_m^{-1/(m-1)} is the per-level ratio x_i / x_{i+1}.
    let (rm1, eps_q) = ratio_minus_one(m, q_m);
    let r = 1.0 + rm1;
    let x1 = rm1 / (rm1 + eps_q);
    let mu = rm1 + eps_q;
    // x_i = q_m * x1 * r^{m-i}; built top-down so the ratio is exact.
    let mut x = vec![0.0; m];
    x[m - 1] = q_m * x1;
    for i in (0..m - 1).rev() {
        x[i] = x[i + 1] * r;
    }
    // The closed form telescopes to a normalized profile; tidy the last
    // few ulps of drift so downstream invariants hold exactly.
    let sum: f64 = x.iter().sum();
    debug_assert!((sum - 1.0).abs() < 1e-9);
    for xi in &mut x {
        *xi /= sum;
    }
    Ok(StationarySolution {
        x: DensityVector::from_normalized(x),
        mu,
        x1,
        at_boundary: false,
    })
}

/// One step of the density-dependent dynamics: compute `μ_t`, assemble the
/// imitation weights from the current density, and apply the ladder update.
pub fn step_density(f: &DensityVector, config: &DensityModelConfig) -> Result<DensityVector> {
    let m = config.m();
    if f.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: f.len(),
        });
    }
    let f1 = f.f()[0];
    if 1.0 - f1 <= NORMALIZATION_TOL {
        return Err(Error::IllDefinedModel);
    }
    let q_m = config.q_m();
    let mu_t = (1.0 - q_m) / (1.0 - f1);
    let mut q = vec![0.0; m];
    for (q_j, &f_above) in q.iter_mut().zip(&f.f()[1..]) {
        *q_j = mu_t * f_above;
    }
    q[m - 1] = q_m;
    Ok(DensityVector::from_normalized(step_kernel(
        f.f(),
        config.a(),
        &q,
    )))
}

/// Closed-form top-level decay for the `m = 2`, `q_m = 0` model:
/// `f^2_t = f^2_0 · a^t`.
pub fn decay_trajectory_q0(f2_0: f64, a: f64, t: u32) -> f64 {
    debug_assert!((0.0..1.0).contains(&f2_0) && f2_0 > 0.0);
    debug_assert!(a > 0.0 && a < 1.0);
    f2_0 * a.powi(t as i32)
}
