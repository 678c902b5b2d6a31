//! Analytic front predictions and the estimators that confront them with
//! simulation output.
//!
//! The branching step has speed function
//!
//! ```text
//! v(gamma) = (1/gamma) * ln(1 + mu + a (e^gamma - 1)),
//! ```
//!
//! the exponential-tilt growth rate of the particle cloud. An infinite
//! population spreads at `v_c = min_gamma v(gamma) = v(gamma_c)`; selection
//! slows the front by the universal cutoff correction
//!
//! ```text
//! v_N = v_c - pi^2 v''(gamma_c) / (2 L0^2),     L0 = ln(N) / gamma_c,
//! ```
//!
//! and the window-`L` model obeys the same law with `L0` replaced by `L`
//! (equivalently `N0 = e^(gamma_c L)`). In between culls the front profile
//! hugs the cutoff shape `A L0 sin(pi z / L0) e^(-gamma_c z)`.

use std::f64::consts::PI;

use crate::brw::{BRWParams, SnapshotRecord, TrajectoryRecord};
use crate::error::{Error, Result};

/// The speed function's minimizer and local geometry for one parameter set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedProfile {
    gamma_c: f64,
    v_c: f64,
    v_second: f64,
    params: BRWParams,
}

impl SpeedProfile {
    pub fn gamma_c(&self) -> f64 {
        self.gamma_c
    }

    /// `v_c = v(gamma_c)`, the infinite-population front velocity.
    pub fn v_c(&self) -> f64 {
        self.v_c
    }

    /// `v''(gamma_c) > 0`.
    pub fn v_second(&self) -> f64 {
        self.v_second
    }

    pub fn params(&self) -> BRWParams {
        self.params
    }

    /// Natural front width for a population of size `n`: `ln(n) / gamma_c`.
    pub fn l0(&self, n: f64) -> f64 {
        debug_assert!(n > 1.0);
        n.ln() / self.gamma_c
    }

    /// Velocity of the `N`-BRW: `v_c - pi^2 v'' / (2 L0^2)`.
    pub fn v_n(&self, n: f64) -> f64 {
        let l0 = self.l0(n);
        self.v_c - PI * PI * self.v_second / (2.0 * l0 * l0)
    }

    /// Equilibrium population of the window-`L` model: `e^(gamma_c L)`.
    pub fn n0(&self, l: f64) -> f64 {
        debug_assert!(l > 0.0);
        (self.gamma_c * l).exp()
    }

    /// Velocity of the `L`-BRW: `v_c - pi^2 v'' / (2 L^2)`.
    pub fn v_l(&self, l: f64) -> f64 {
        debug_assert!(l > 0.0);
        self.v_c - PI * PI * self.v_second / (2.0 * l * l)
    }
}

/// `v(gamma) = (1/gamma) ln(1 + mu + a (e^gamma - 1))` for `gamma > 0`.
pub fn speed_function(gamma: f64, params: &BRWParams) -> Result<f64> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "gamma must be positive (got {gamma})"
        )));
    }
    let a = params.a();
    let mu = params.mu();
    // ln_1p/exp_m1 keep full relative precision as gamma -> 0 (where the
    // naive form collapses to 0/gamma below machine epsilon).
    Ok((mu + a * gamma.exp_m1()).ln_1p() / gamma)
}

/// The same quantity from its definition, `(1/gamma) ln E[sum_i
/// e^(gamma eps_i)]`, by enumerating the four per-firm outcomes. Used as an
/// independent oracle for [`speed_function`].
pub fn speed_function_enumerated(gamma: f64, params: &BRWParams) -> Result<f64> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "gamma must be positive (got {gamma})"
        )));
    }
    let a = params.a();
    let mu = params.mu();
    let up = gamma.exp();
    // stay: 1 firm at 0; imitated: 2 firms at 0; innovate: 1 firm at +1;
    // innovate+imitated: 1 firm at +1 and 1 at 0.
    let mgf = (1.0 - a) * (1.0 - mu) * 1.0
        + (1.0 - a) * mu * 2.0
        + a * (1.0 - mu) * up
        + a * mu * (up + 1.0);
    Ok(mgf.ln() / gamma)
}

const INVPHI: f64 = 0.618_033_988_749_894_9;
const INVPHI2: f64 = 1.0 - INVPHI;

fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut x1 = lo + INVPHI2 * (hi - lo);
    let mut x2 = lo + INVPHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > 1e-12 * hi.max(1.0) {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = lo + INVPHI2 * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INVPHI * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

/// Locate `gamma_c = argmin v(gamma)` and the curvature there.
///
/// Bracketing expands by factors of two from `gamma = 1` until a three-point
/// bracket exists, then golden-section refines it; `v''` comes from central
/// differences cross-checked at half step. Parameter regimes where `v` has
/// no interior minimum (e.g. `mu = 0`, where `v` increases from `a` toward
/// 1) are reported as [`Error::NoMinimum`].
pub fn find_gamma_c(params: &BRWParams) -> Result<SpeedProfile> {
    if params.mu() == 0.0 {
        // Without branching, v increases from the bare drift a toward 1:
        // the infimum sits at gamma -> 0 and there is no interior minimum.
        return Err(Error::NoMinimum(
            "v(gamma) has no interior minimum for mu = 0 (no branching)".into(),
        ));
    }
    let v = |g: f64| speed_function(g, params).expect("positive gamma");
    let (mut lo, mut mid, mut hi) = (0.5, 1.0, 2.0);
    let (mut f_lo, mut f_mid, mut f_hi) = (v(lo), v(mid), v(hi));
    loop {
        if f_mid <= f_lo && f_mid <= f_hi {
            break;
        }
        if f_lo < f_mid {
            hi = mid;
            f_hi = f_mid;
            mid = lo;
            f_mid = f_lo;
            lo /= 2.0;
            f_lo = v(lo);
            if lo < 1e-18 {
                return Err(Error::NoMinimum(
                    "v(gamma) decreases toward gamma -> 0; no interior minimum".into(),
                ));
            }
        } else {
            lo = mid;
            f_lo = f_mid;
            mid = hi;
            f_mid = f_hi;
            hi *= 2.0;
            f_hi = v(hi);
            if hi > 1e18 {
                return Err(Error::NoMinimum(
                    "v(gamma) decreases toward gamma -> infinity; no interior minimum".into(),
                ));
            }
        }
    }
    let mut gamma_c = golden_min(v, lo, hi);
    // v is flat at its minimum, so function values alone cannot locate
    // gamma_c below sqrt(machine epsilon). Polish the stationarity
    // condition gamma F'/F = ln F (equivalent to v'(gamma) = 0, with
    // F = 1 + mu + a (e^gamma - 1)) by Newton to full precision.
    let a = params.a();
    let mu = params.mu();
    for _ in 0..10 {
        let fe = a * gamma_c.exp(); // F' = F''
        let f = 1.0 + mu + a * gamma_c.exp_m1();
        let num = gamma_c * fe / f - (mu + a * gamma_c.exp_m1()).ln_1p();
        let den = gamma_c * fe * (f - fe) / (f * f);
        if den <= 0.0 {
            break;
        }
        let step = num / den;
        if !(gamma_c - step > 0.0) {
            break;
        }
        gamma_c -= step;
        if step.abs() < 1e-14 * gamma_c {
            break;
        }
    }
    let v_c = v(gamma_c);

    // Curvature by central differences; the step balances truncation
    // (O(h^2)) against cancellation (O(eps / h^2)) near 1e-6 relative error.
    let central = |h: f64| (v(gamma_c + h) - 2.0 * v_c + v(gamma_c - h)) / (h * h);
    let h = gamma_c * 2e-4;
    let d2_full = central(h);
    let d2_half = central(h / 2.0);
    if (d2_full - d2_half).abs() > 1e-3 * d2_half.abs() + 1e-12 {
        return Err(Error::NumericError(format!(
            "second derivative unstable at gamma_c: {d2_full} vs {d2_half}"
        )));
    }
    if !(d2_half > 0.0) {
        return Err(Error::NoMinimum(format!(
            "curvature at the stationary point is not positive ({d2_half})"
        )));
    }
    Ok(SpeedProfile {
        gamma_c,
        v_c,
        v_second: d2_half,
        params: *params,
    })
}

/// `L0 = ln(N) / gamma_c` for an `N`-firm population (`N >= 2`).
pub fn predict_l0(params: &BRWParams, n: u64) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("N must be >= 2 (got {n})")));
    }
    Ok(find_gamma_c(params)?.l0(n as f64))
}

/// `v_N = v_c - pi^2 v''(gamma_c) / (2 L0^2)` (`N >= 2`).
pub fn predict_vn(params: &BRWParams, n: u64) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("N must be >= 2 (got {n})")));
    }
    Ok(find_gamma_c(params)?.v_n(n as f64))
}

/// `N0 = e^(gamma_c L)` (`L >= 2`).
pub fn predict_n0(params: &BRWParams, l: u32) -> Result<f64> {
    if l < 2 {
        return Err(Error::InvalidParameter(format!("L must be >= 2 (got {l})")));
    }
    Ok(find_gamma_c(params)?.n0(f64::from(l)))
}

/// `v_L = v_c - pi^2 v''(gamma_c) / (2 L^2)` (`L >= 2`).
pub fn predict_vl(params: &BRWParams, l: u32) -> Result<f64> {
    if l < 2 {
        return Err(Error::InvalidParameter(format!("L must be >= 2 (got {l})")));
    }
    Ok(find_gamma_c(params)?.v_l(f64::from(l)))
}

/// Cutoff shape of the cumulative front profile:
/// `h(z) = A L0 sin(pi z / L0) e^(-gamma_c z)` for `z` in the bulk `(0, L0)`.
pub fn cutoff_shape(z: f64, l0: f64, gamma_c: f64, a: f64) -> Result<f64> {
    if !(l0 > 0.0) || !(gamma_c > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "l0 and gamma_c must be positive (got {l0}, {gamma_c})"
        )));
    }
    if !(z > 0.0 && z < l0) {
        return Err(Error::DomainError(format!(
            "cutoff shape is valid only for z in (0, {l0}) (got {z})"
        )));
    }
    Ok(a * l0 * (PI * z / l0).sin() * (-gamma_c * z).exp())
}

/// Density companion of [`cutoff_shape`]: the per-level fraction, with the
/// prefactor `A` replaced by `A (1 - e^(-gamma_c))`.
pub fn cutoff_shape_density(z: f64, l0: f64, gamma_c: f64, a: f64) -> Result<f64> {
    cutoff_shape(z, l0, gamma_c, a * (1.0 - (-gamma_c).exp()))
}

/// Ordinary least squares of `y` on `x`. Returns `(slope, intercept,
/// se_slope)`; the standard error assumes independent residuals.
fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    debug_assert!(xs.len() == ys.len() && xs.len() >= 2);
    let x_bar = xs.iter().sum::<f64>() / n;
    let y_bar = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - x_bar) * (x - x_bar);
        sxy += (x - x_bar) * (y - y_bar);
    }
    let slope = sxy / sxx;
    let intercept = y_bar - slope * x_bar;
    if xs.len() == 2 {
        return (slope, intercept, 0.0);
    }
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    let se = (rss / (n - 2.0) / sxx).sqrt();
    (slope, intercept, se)
}

/// Front velocity of a recorded trajectory: the least-squares slope of
/// `y_max` against time on the post-burn-in window, with the naive OLS
/// standard error (optimistic under autocorrelation — report it, do not
/// test against it). Requires more than 100 post-burn-in steps.
pub fn estimate_velocity(record: &TrajectoryRecord, burn_in: usize) -> Result<(f64, f64)> {
    let steps = record.steps();
    if steps <= burn_in + 100 {
        return Err(Error::InvalidParameter(format!(
            "velocity fit needs more than {} steps after burn-in (record has {steps})",
            burn_in + 100
        )));
    }
    let xs: Vec<f64> = (burn_in..steps).map(|i| (i + 1) as f64).collect();
    let ys: Vec<f64> = (burn_in..steps).map(|i| record.y_max[i] as f64).collect();
    let (slope, _, se) = linear_fit(&xs, &ys);
    Ok((slope, se))
}

/// Snapshot-averaged cumulative front profile, indexed by `z = y - y_min`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontProfile {
    h_mean: Vec<f64>,
    n_snapshots: usize,
    mean_total: f64,
    mean_support: f64,
}

impl FrontProfile {
    /// Mean of `h(z)` over snapshots; `h_mean()[0] = 1` and the sequence is
    /// non-increasing.
    pub fn h_mean(&self) -> &[f64] {
        &self.h_mean
    }

    pub fn n_snapshots(&self) -> usize {
        self.n_snapshots
    }

    /// Mean population over the snapshots.
    pub fn mean_total(&self) -> f64 {
        self.mean_total
    }

    /// Mean support length `y_max - y_min` over the snapshots.
    pub fn mean_support(&self) -> f64 {
        self.mean_support
    }
}

/// Average the cumulative profiles of at least 100 snapshots (levels beyond
/// a snapshot's support contribute zero).
pub fn estimate_front_profile(snapshots: &[SnapshotRecord]) -> Result<FrontProfile> {
    if snapshots.len() < 100 {
        return Err(Error::InvalidParameter(format!(
            "front profile needs at least 100 snapshots (got {})",
            snapshots.len()
        )));
    }
    let z_len = snapshots.iter().map(|s| s.counts.len()).max().unwrap();
    let mut h_sum = vec![0.0; z_len];
    let mut total_sum = 0.0;
    let mut support_sum = 0.0;
    for snap in snapshots {
        for (z, h) in snap.h().into_iter().enumerate() {
            h_sum[z] += h;
        }
        total_sum += snap.total as f64;
        support_sum += (snap.counts.len() - 1) as f64;
    }
    let n = snapshots.len() as f64;
    Ok(FrontProfile {
        h_mean: h_sum.into_iter().map(|s| s / n).collect(),
        n_snapshots: snapshots.len(),
        mean_total: total_sum / n,
        mean_support: support_sum / n,
    })
}

/// Least-squares slope of `ln h_mean(z)` over integer levels inside
/// `[z_lo, z_hi]`.
///
/// The window must sit inside the bulk `(0.25 L, 0.75 L)` of the mean
/// support (the shape formula holds only away from both edges), and every
/// bin it touches must hold at least `10 / mean_total` of the mass —
/// statistically empty bins would swamp the fit with noise. Violations
/// report [`Error::WindowError`].
pub fn fit_decay_slope(profile: &FrontProfile, window: (f64, f64)) -> Result<f64> {
    let (z_lo, z_hi) = window;
    let l_bar = profile.mean_support;
    if !(z_lo < z_hi) {
        return Err(Error::WindowError(format!(
            "empty window ({z_lo}, {z_hi})"
        )));
    }
    if z_lo < 0.25 * l_bar || z_hi > 0.75 * l_bar {
        return Err(Error::WindowError(format!(
            "window ({z_lo}, {z_hi}) not inside the bulk ({}, {}) of the mean support",
            0.25 * l_bar,
            0.75 * l_bar
        )));
    }
    let floor = 10.0 / profile.mean_total;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let z_first = z_lo.ceil() as usize;
    let z_last = z_hi.floor() as usize;
    for z in z_first..=z_last.min(profile.h_mean.len().saturating_sub(1)) {
        let h = profile.h_mean[z];
        if h < floor {
            return Err(Error::WindowError(format!(
                "h({z}) = {h} below the statistical floor {floor}"
            )));
        }
        xs.push(z as f64);
        ys.push(h.ln());
    }
    if xs.len() < 2 {
        return Err(Error::WindowError(format!(
            "window ({z_lo}, {z_hi}) contains fewer than two integer levels"
        )));
    }
    let (slope, _, _) = linear_fit(&xs, &ys);
    Ok(slope)
}

/// Sentinel for [`cutoff_front_velocity`] without a cutoff.
pub const NO_CUTOFF: f64 = f64::INFINITY;

/// Asymptotic front velocity of the deterministic cutoff iteration
///
/// ```text
/// h(y, t+1) = min[1, (1 - a + mu) h(y, t) + a h(y - 1, t)],
/// ```
///
/// where values below `1/N` are set to zero (the cutoff prescription for a
/// population of `N` firms; pass [`NO_CUTOFF`] for the bare map). Starts
/// from a step profile, defines the front as the largest `y` with
/// `h(y) >= 1/2`, and measures the advance rate over the second half of the
/// run. The two quarter-window rates must agree (within integer-rounding
/// slack) or the run reports [`Error::NoSteadyRate`].
///
/// Requires finite `n >= 10` (or infinite) and `max_steps >= 1000`.
pub fn cutoff_front_velocity(params: &BRWParams, n: f64, max_steps: u64) -> Result<f64> {
    let cutoff = if n == f64::INFINITY {
        // No cutoff: still flush vanishing tail entries, both to keep the
        // profile finite and to avoid subnormal arithmetic.
        1e-300
    } else if n.is_finite() && n >= 10.0 {
        1.0 / n
    } else {
        return Err(Error::InvalidParameter(format!(
            "N must be >= 10 or infinite (got {n})"
        )));
    };
    if max_steps < 1000 {
        return Err(Error::InvalidParameter(format!(
            "max_steps must be at least 1000 (got {max_steps})"
        )));
    }
    let a = params.a();
    let c_stay = 1.0 - a + params.mu();

    // h(y) = 1 for y < base; hs[i] = h(base + i); h = 0 above base + len.
    let mut base: i64 = 1;
    let mut hs: Vec<f64> = Vec::new();
    let mut next: Vec<f64> = Vec::new();

    let quarter = max_steps / 4;
    let mut marks = [0i64; 4];
    let front = |base: i64, hs: &[f64]| -> i64 {
        let lead = hs.iter().take_while(|&&h| h >= 0.5).count();
        base + lead as i64 - 1
    };

    for t in 1..=4 * quarter {
        next.clear();
        for i in 0..=hs.len() {
            let h_here = if i < hs.len() { hs[i] } else { 0.0 };
            let h_below = if i == 0 { 1.0 } else { hs[i - 1] };
            let mut h_new = (c_stay * h_here + a * h_below).min(1.0);
            if h_new < cutoff {
                h_new = 0.0;
            }
            next.push(h_new);
        }
        // Absorb any saturated prefix into the h = 1 bulk and trim the
        // vanished tail, keeping the representation tight.
        let saturated = next.iter().take_while(|&&h| h >= 1.0).count();
        base += saturated as i64;
        hs.clear();
        hs.extend(next.iter().skip(saturated).copied());
        while hs.last() == Some(&0.0) {
            hs.pop();
        }
        if t % quarter == 0 {
            marks[(t / quarter - 1) as usize] = front(base, &hs);
        }
    }

    let q = quarter as f64;
    let v_first = (marks[2] - marks[1]) as f64 / q;
    let v_second = (marks[3] - marks[2]) as f64 / q;
    // Integer front positions quantize each quarter-window rate to 1/q.
    let slack = (8.0 / q).max(1e-4);
    if (v_first - v_second).abs() > slack {
        return Err(Error::NoSteadyRate {
            steps: max_steps,
            v_first,
            v_second,
        });
    }
    Ok((marks[3] - marks[1]) as f64 / (2.0 * q))
}
