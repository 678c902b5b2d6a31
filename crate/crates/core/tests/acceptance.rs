//! Acceptance gate: ten numbered criteria, one test and one PASS/FAIL line
//! each. Tolerances are pinned in the assertions; a failing criterion
//! panics with the measured numbers.

use qladder::analysis::{
    cutoff_front_velocity, estimate_front_profile, estimate_velocity, find_gamma_c,
    fit_decay_slope, predict_vn,
};
use qladder::bellman::{delta_v, solve_leapfrog_only, EconomicParams};
use qladder::brw::{run, BRWParams, CullPolicy, ParticleState};
use qladder::density::{solve_stationary_density, step_density, DensityModelConfig};
use qladder::ladder::{
    power_iterate, second_eigenvalue_modulus, stationary_exogenous, DensityVector, LadderConfig,
};
use qladder::seeding::{make_rng, replica_seed};
use rand::Rng;

// Frozen oracle values for the reference parameters a = 0.25, mu = 1.
const GAMMA_C: f64 = 2.465387836697628;
const V_C: f64 = 0.6270256241061685;
const V_SECOND: f64 = 0.0948591079015375;
/// pi^2 v''(gamma_c) gamma_c^2 / 2: the predicted slope of v_c - v against
/// 1/(ln N)^2.
const VELOCITY_SLOPE: f64 = 2.845242477325691;

fn reference_params() -> BRWParams {
    BRWParams::new(0.25, 1.0).unwrap()
}

fn normalized(raw: Vec<f64>) -> Vec<f64> {
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / sum).collect()
}

/// Criterion 1 — closed-form density table: m=10, four q_m values, (mu, x1)
/// within +-5e-5 of the reference 4-decimal figures.
#[test]
fn c01_stationary_density_table() {
    let table = [
        (0.1, 1.1915, 0.2447),
        (0.3, 0.8431, 0.1698),
        (0.5, 0.5801, 0.1380),
        (0.99, 0.0111, 0.1005),
    ];
    for &(q_m, mu_ref, x1_ref) in &table {
        let config = DensityModelConfig::new(10, 0.5, q_m).unwrap();
        let sol = solve_stationary_density(&config).unwrap();
        assert!(
            (sol.mu() - mu_ref).abs() <= 5e-5,
            "c01 FAIL: q_m={q_m}: mu={} vs table {mu_ref}",
            sol.mu()
        );
        assert!(
            (sol.x1() - x1_ref).abs() <= 5e-5,
            "c01 FAIL: q_m={q_m}: x1={} vs table {x1_ref}",
            sol.x1()
        );
    }
    println!("c01 stationary-density table: PASS (4 rows within 5e-5)");
}

/// Criterion 2 — closed-form stationary distribution vs power iteration on
/// 100 random configurations (1e-10 L1), plus the exact uniform case.
#[test]
fn c02_stationary_oracle_equivalence() {
    let mut rng = make_rng(1_000_002);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let m = rng.random_range(2..=30usize);
        let a = rng.random_range(0.05..0.95);
        let raw: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..1.0)).collect();
        let config = LadderConfig::new(m, a, normalized(raw)).unwrap();
        let closed = stationary_exogenous(&config);
        let (iterated, _) =
            power_iterate(&DensityVector::uniform(m), &config, 1e-13, 500_000).unwrap();
        let d = closed.l1_distance(&iterated);
        worst = worst.max(d);
        assert!(d < 1e-10, "c02 FAIL: L1 distance {d} at m={m}, a={a}");
    }
    // All imitation mass on the top level: the stationary state is exactly
    // uniform.
    for m in [2usize, 7, 30] {
        let mut q = vec![0.0; m];
        q[m - 1] = 1.0;
        let config = LadderConfig::new(m, 0.3, q).unwrap();
        let d = stationary_exogenous(&config).l1_distance(&DensityVector::uniform(m));
        assert!(d < 1e-12, "c02 FAIL: uniform case off by {d} at m={m}");
    }
    println!("c02 stationary oracle equivalence: PASS (worst L1 {worst:.2e} over 100 configs)");
}

/// Criterion 3 — m=2 second eigenvalue equals |2a - 1 + q1 (1-a)| within
/// 1e-12 on a 20x20 grid.
#[test]
fn c03_spectral_formula_m2() {
    let mut worst: f64 = 0.0;
    for i in 0..20 {
        for j in 0..20 {
            let a = (i as f64 + 0.5) / 20.0;
            let q1 = (j as f64 + 0.5) / 20.0;
            let config = LadderConfig::new(2, a, vec![q1, 1.0 - q1]).unwrap();
            let modulus = second_eigenvalue_modulus(&config).unwrap();
            let formula = (2.0 * a - 1.0 + q1 * (1.0 - a)).abs();
            let err = (modulus - formula).abs();
            worst = worst.max(err);
            assert!(
                err < 1e-12,
                "c03 FAIL: |lambda_2|={modulus} vs formula {formula} at a={a}, q1={q1}"
            );
        }
    }
    println!("c03 m=2 spectral formula: PASS (worst error {worst:.2e} on 20x20 grid)");
}

/// Criterion 4 — q_m = 0 decay law: the top-level mass satisfies
/// f2(t) = f2(0) a^t to relative 1e-12 for t <= 100.
#[test]
fn c04_decay_law_qm_zero() {
    let a = 0.73;
    let f2_0 = 0.41;
    let config = DensityModelConfig::new(2, a, 0.0).unwrap();
    let mut f = DensityVector::new(vec![1.0 - f2_0, f2_0]).unwrap();
    for t in 1..=100u32 {
        f = step_density(&f, &config).unwrap();
        let expected = f2_0 * a.powi(t as i32);
        let rel = (f.f()[1] - expected).abs() / expected;
        assert!(
            rel < 1e-12,
            "c04 FAIL: relative error {rel} at t={t} (f2={}, expected {expected})",
            f.f()[1]
        );
    }
    println!("c04 q_m=0 decay law: PASS (relative error < 1e-12 through t=100)");
}

/// Criterion 5 — endogenous-support structure: single-crossing premiums,
/// m-invariance of the support size over 20 random draws, support collapse
/// at zero cost, and the uniform long-run state under the induced policy.
#[test]
fn c05_endogenous_support_properties() {
    let mut rng = make_rng(555_000);
    let mut draws = 0;
    let mut attempts = 0;
    while draws < 20 {
        attempts += 1;
        assert!(attempts < 500, "c05 FAIL: could not find 20 solvable draws");
        let a = rng.random_range(0.2..0.8);
        let lambda = rng.random_range(1.01..1.12);
        let beta0 = rng.random_range(0.75..(0.999 / lambda));
        let cost = rng.random_range(0.1..4.0);
        let params = EconomicParams::new(a, lambda, beta0, cost).unwrap();
        let (Ok(s40), Ok(s60)) = (
            solve_leapfrog_only(&params, 40, 40 - 600, 1e-10),
            solve_leapfrog_only(&params, 60, 60 - 600, 1e-10),
        ) else {
            continue; // no-leapfrog or out-of-grid regimes are legitimate
        };
        draws += 1;
        assert_eq!(
            s40.support_size(),
            s60.support_size(),
            "c05 FAIL: support size depends on m (draw {draws}: a={a}, lambda={lambda}, beta0={beta0}, C={cost})"
        );
        // Single crossing of the jump premium.
        let mut seen_nonpositive = false;
        for j in (40 - 599)..=40i64 {
            let dv = delta_v(&params, s40.v(), 40 - 600, j, None);
            if dv <= 0.0 {
                seen_nonpositive = true;
            } else {
                assert!(
                    !seen_nonpositive,
                    "c05 FAIL: premium sign pattern not single-crossing at j={j}"
                );
            }
        }
    }
    // Zero cost: everyone leapfrogs, the support collapses to the frontier.
    let free = EconomicParams::new(0.5, 1.05, 0.9, 0.0).unwrap();
    let sol = solve_leapfrog_only(&free, 40, 0, 1e-10).unwrap();
    assert_eq!(sol.support_size(), 1, "c05 FAIL: C=0 support != 1");

    // Induced policy on the endogenous support: everyone at j0 jumps to the
    // frontier, so the reduced ladder has a point-mass menu at the top and
    // its long-run state is uniform.
    let params = EconomicParams::new(0.5, 1.05, 0.9, 5.0).unwrap();
    let s = solve_leapfrog_only(&params, 40, 0, 1e-10)
        .unwrap()
        .support_size();
    let mut q = vec![0.0; s];
    q[s - 1] = 1.0;
    let reduced = LadderConfig::new(s, 0.5, q).unwrap();
    let (long_run, _) = power_iterate(
        &DensityVector::point_mass(s, s - 1),
        &reduced,
        1e-14,
        1_000_000,
    )
    .unwrap();
    let d = long_run.l1_distance(&DensityVector::uniform(s));
    assert!(d < 1e-8, "c05 FAIL: long-run state {d} from uniform in L1");
    println!(
        "c05 endogenous support: PASS (20 m-invariant draws, single crossing, C=0 collapse, uniform long run at L1 {d:.2e})"
    );
}

/// Criterion 6 — deterministic cutoff-front velocity scaling: the OLS slope
/// of (v_c - v) against 1/(ln N)^2 over N in {1e4..1e12} must fall within
/// 10% of pi^2 v'' gamma_c^2 / 2.
#[test]
fn c06_cutoff_velocity_scaling() {
    let params = reference_params();
    // The frozen constants must agree among themselves: the slope criterion
    // is pi^2 v'' gamma_c^2 / 2 assembled from the frozen curvature.
    let assembled = std::f64::consts::PI.powi(2) * V_SECOND * GAMMA_C * GAMMA_C / 2.0;
    assert!(
        (assembled - VELOCITY_SLOPE).abs() < 1e-12,
        "internally inconsistent frozen constants: {assembled} vs {VELOCITY_SLOPE}"
    );
    let ns = [1e4, 1e6, 1e8, 1e10, 1e12];
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut detail = String::new();
    for &n in &ns {
        let v = cutoff_front_velocity(&params, n, 400_000).unwrap();
        let x = 1.0 / n.ln().powi(2);
        xs.push(x);
        ys.push(V_C - v);
        detail.push_str(&format!(
            "\n  N=1e{:<2} v={v:.6} v_c-v={:.6} 1/ln^2N={x:.6}",
            n.log10() as i32,
            V_C - v
        ));
    }
    // OLS slope with intercept.
    let n = xs.len() as f64;
    let xb = xs.iter().sum::<f64>() / n;
    let yb = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xb) * (x - xb)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xb) * (y - yb)).sum();
    let slope = sxy / sxx;
    let rel = (slope - VELOCITY_SLOPE).abs() / VELOCITY_SLOPE;
    assert!(
        rel <= 0.10,
        "c06 FAIL: fitted slope {slope:.4} vs predicted {VELOCITY_SLOPE:.4} \
         (off by {:.1}%, tolerance 10%).{detail}\n  \
         The deficit follows v_c - v = {VELOCITY_SLOPE:.4}/(ln N + delta)^2 with a \
         constant offset delta ~ 1.7 (an O(1/ln^3 N) effect at these N), which \
         depresses the fitted 1/(ln N)^2 slope at every feasible N.",
        rel * 100.0
    );
    println!("c06 cutoff velocity scaling: PASS (slope {slope:.4}, predicted {VELOCITY_SLOPE:.4})");
}

/// Criterion 7 — N-BRW stochastic velocity at N in {1e2, 1e3, 1e4}, ten
/// replicas of 2e5 steps each: (i) every estimate below v_c; (ii) sample
/// means strictly increasing in N; (iii) the N=1e4 mean within half the
/// predicted correction of predict_vN.
#[test]
fn c07_nbrw_stochastic_velocity() {
    let params = reference_params();
    let steps = 200_000u64;
    let burn_in = 20_000usize;
    let mut means = Vec::new();
    for (k, &n) in [100u64, 1_000, 10_000].iter().enumerate() {
        let mut sum = 0.0;
        for rep in 0..10u32 {
            let seed = replica_seed(7_000_000 + k as u64, rep);
            let initial = ParticleState::point_mass(0, 1).unwrap();
            let rec = run(
                &initial,
                &params,
                &CullPolicy::KeepTopN(n),
                steps,
                seed,
                0,
            )
            .unwrap();
            let (v_hat, _se) = estimate_velocity(&rec, burn_in).unwrap();
            assert!(
                v_hat < V_C,
                "c07 FAIL (i): v_hat={v_hat} >= v_c={V_C} at N={n}, replica {rep}"
            );
            sum += v_hat;
        }
        means.push(sum / 10.0);
    }
    assert!(
        means[0] < means[1] && means[1] < means[2],
        "c07 FAIL (ii): sample means not strictly increasing in N: {means:?}"
    );
    let v_n_pred = predict_vn(&params, 10_000).unwrap();
    let band = 0.5 * (V_C - v_n_pred);
    let dev = (means[2] - v_n_pred).abs();
    assert!(
        dev <= band,
        "c07 FAIL (iii): |v_hat - predict_vN| = {dev:.6} exceeds the band {band:.6} \
         (v_hat mean = {:.6}, predict_vN(1e4) = {v_n_pred:.6}, v_c = {V_C:.6}; \
         parts (i) and (ii) passed: means = {means:?}). The measured velocity sits \
         above the 1/(ln N)^2 prediction by a slowly-vanishing ln ln N correction, \
         which at N=1e4 is ~58% of the full correction.",
        means[2]
    );
    println!(
        "c07 N-BRW stochastic velocity: PASS (means {means:?}, band check |{:.4}-{v_n_pred:.4}| <= {band:.4})",
        means[2]
    );
}

/// Criterion 8 — stationary N-BRW front shape at N=1e4: log-slope of the
/// mean cumulative profile on the bulk window within 15% of -gamma_c, from
/// at least 500 post-burn-in snapshots.
#[test]
fn c08_front_shape_decay() {
    let params = reference_params();
    let initial = ParticleState::point_mass(0, 1).unwrap();
    let rec = run(
        &initial,
        &params,
        &CullPolicy::KeepTopN(10_000),
        60_000,
        808_080,
        100,
    )
    .unwrap();
    // 600 snapshots; the first 100 (first 10_000 steps) are burn-in.
    let snaps = &rec.snapshots[100..];
    assert!(snaps.len() >= 500, "c08 FAIL: only {} snapshots", snaps.len());
    let profile = estimate_front_profile(snaps).unwrap();
    let l_bar = profile.mean_support();
    let window = (0.25 * l_bar + 0.01, 0.75 * l_bar - 0.01);
    let slope = fit_decay_slope(&profile, window).unwrap();
    let rel = (slope - (-GAMMA_C)).abs() / GAMMA_C;
    assert!(
        rel <= 0.15,
        "c08 FAIL: log-slope {slope:.4} vs -gamma_c {:.4} (off by {:.1}%, window {window:?}, mean support {l_bar:.2})",
        -GAMMA_C,
        rel * 100.0
    );
    println!(
        "c08 front-shape decay: PASS (slope {slope:.4} vs -gamma_c {:.4}, {:.1}% off, {} snapshots)",
        -GAMMA_C,
        rel * 100.0,
        snaps.len()
    );
}

/// Criterion 9 — L-BRW population law: ln(mean N)/L within 25% of gamma_c
/// for L in {10, 15, 20}, with the deviation tightening as L grows.
#[test]
fn c09_lbrw_population_law() {
    let params = reference_params();
    let mut devs = Vec::new();
    let mut detail = String::new();
    for (k, &l) in [10u32, 15, 20].iter().enumerate() {
        let initial = ParticleState::point_mass(0, 1).unwrap();
        let rec = run(
            &initial,
            &params,
            &CullPolicy::WindowL(l),
            30_000,
            replica_seed(909_000, k as u32),
            0,
        )
        .unwrap();
        let half = rec.total.len() / 2;
        let mean_n = rec.total[half..].iter().map(|&n| n as f64).sum::<f64>()
            / (rec.total.len() - half) as f64;
        let rate = mean_n.ln() / f64::from(l);
        let dev = (rate - GAMMA_C).abs() / GAMMA_C;
        devs.push(dev);
        detail.push_str(&format!(
            "\n  L={l}: mean N = {mean_n:.3e}, ln(mean N)/L = {rate:.4} ({:.1}% from gamma_c)",
            dev * 100.0
        ));
        assert!(
            dev <= 0.25,
            "c09 FAIL: ln(mean N)/L = {rate:.4} deviates {:.1}% from gamma_c = {GAMMA_C:.4} at L={l}{detail}",
            dev * 100.0
        );
    }
    assert!(
        devs[0] > devs[1] && devs[1] > devs[2],
        "c09 FAIL: deviations do not tighten with L: {devs:?}{detail}"
    );
    println!(
        "c09 L-BRW population law: PASS (deviations {:.3} > {:.3} > {:.3}, all within 25%)",
        devs[0], devs[1], devs[2]
    );
}

/// Criterion 10 — support-size stability: mean(y_max - y_min) - L0 stays in
/// an N-independent band across N in {1e3, 1e4, 1e5}.
#[test]
fn c10_support_size_stability() {
    let params = reference_params();
    let profile = find_gamma_c(&params).unwrap();
    let mut ds = Vec::new();
    let mut detail = String::new();
    for (k, &n) in [1_000u64, 10_000, 100_000].iter().enumerate() {
        let initial = ParticleState::point_mass(0, 1).unwrap();
        let rec = run(
            &initial,
            &params,
            &CullPolicy::KeepTopN(n),
            30_000,
            replica_seed(1_010_000, k as u32),
            0,
        )
        .unwrap();
        let burn = 5_000usize;
        let mean_support = (burn..rec.steps())
            .map(|t| (rec.y_max[t] - rec.y_min[t]) as f64)
            .sum::<f64>()
            / (rec.steps() - burn) as f64;
        let d = mean_support - profile.l0(n as f64);
        ds.push(d);
        detail.push_str(&format!(
            "\n  N=1e{}: mean support {mean_support:.3}, L0 {:.3}, d {d:+.3}",
            (n as f64).log10() as i32,
            profile.l0(n as f64)
        ));
    }
    let spread = ds.iter().cloned().fold(f64::MIN, f64::max)
        - ds.iter().cloned().fold(f64::MAX, f64::min);
    for (&d, n) in ds.iter().zip(["1e3", "1e4", "1e5"]) {
        assert!(
            d.abs() <= 2.0,
            "c10 FAIL: |mean support - L0| = {:.3} exceeds 2.0 at N={n}{detail}",
            d.abs()
        );
    }
    assert!(
        spread <= 0.5,
        "c10 FAIL: band spread {spread:.3} exceeds 0.5 across N{detail}"
    );
    println!(
        "c10 support-size stability: PASS (offsets {:+.3}/{:+.3}/{:+.3}, spread {spread:.3})",
        ds[0], ds[1], ds[2]
    );
}
