//! Acceptance gate: one test per criterion, each printing a PASS line with
//! the measured quantity next to its pinned tolerance (run with
//! `cargo test --test acceptance -- --nocapture` to see them). Statistical
//! criteria run on fixed seeds; the asserted margins are the ones stated,
//! not tuned to the seed.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};
use std::time::Instant;

use volterra_core::convolution::{
    convolve_direct, convolve_reformulated, mild_identity_residual_bounded,
};
use volterra_core::kernel::check_complete_positivity;
use volterra_core::regularity::{
    interpolation_norms, maximal_regularity_norms, path_modulus, skewness_z, spatial_regularity,
};
use volterra_core::resolvent::{
    build_resolvent_family, scalar_resolvent, yosida_resolvent_convergence, ResolventFamily,
};
use volterra_core::wiener::{covariance_check, sample_wiener, QCovariance};
use volterra_core::{HilbertPath, Kernel, ScalarPath, SpectralOperator, TimeGrid};

fn grid(horizon: f64, steps: usize) -> TimeGrid {
    TimeGrid::new(horizon, steps).unwrap()
}

/// Families are deterministic in (kernel, operator, grid) and several
/// criteria share them; build each once.
fn family(kernel: &Kernel, op: &SpectralOperator, g: &TimeGrid) -> Arc<ResolventFamily> {
    type Key = (String, String, usize, u64);
    static CACHE: OnceLock<Mutex<HashMap<Key, Arc<ResolventFamily>>>> = OnceLock::new();
    let key = (
        format!("{kernel:?}"),
        format!("{}#{}", op.label(), op.dimension()),
        g.steps(),
        g.horizon().to_bits(),
    );
    let mut map = CACHE.get_or_init(|| Mutex::new(HashMap::new())).lock().unwrap();
    map.entry(key)
        .or_insert_with(|| Arc::new(build_resolvent_family(op, kernel, g).unwrap()))
        .clone()
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

#[test]
fn criterion_01_scalar_resolvent_oracle() {
    let started = Instant::now();
    let g = grid(2.0, 2000);
    let s = scalar_resolvent(&Kernel::exponential(), 1.0, &g).unwrap();
    let exact = ScalarPath::from_fn(g, |t| 0.5 + 0.5 * (-2.0 * t).exp());
    let err = s.sup_distance(&exact).unwrap();
    let elapsed = started.elapsed().as_secs_f64();
    assert!(err <= 1e-5, "sup error {err:.3e} > 1e-5");
    assert!(elapsed < 1.0, "runtime {elapsed:.2} s >= 1 s");
    println!(
        "PASS  criterion 01  scalar resolvent oracle: sup error {err:.3e} <= 1.0e-5  ({elapsed:.3} s < 1 s)"
    );
}

#[test]
fn criterion_02_semigroup_reduction() {
    let op = SpectralOperator::laplacian_1d(8).unwrap();
    let g = grid(1.0, 1000);
    let fam = family(&Kernel::constant(), &op, &g);
    let mut err = 0.0_f64;
    for (k, &lambda) in op.eigenvalues().iter().enumerate() {
        for (i, t) in g.times().enumerate() {
            err = err.max((fam.value(k, i) - (-lambda * t).exp()).abs());
        }
    }
    assert!(err <= 1e-4, "sup error {err:.3e} > 1e-4");
    println!("PASS  criterion 02  semigroup reduction: sup error over 8 modes {err:.3e} <= 1.0e-4");
}

#[test]
fn criterion_03_complete_positivity() {
    let started = Instant::now();
    let mus = [0.0, 0.5, 1.0, 10.0];
    let mut worst = f64::INFINITY;
    for kernel in [Kernel::exponential(), Kernel::fractional(0.5, 0.01).unwrap()] {
        for steps in [500usize, 1000] {
            let report = check_complete_positivity(&kernel, &mus, &grid(1.0, steps)).unwrap();
            assert!(
                report.all_nonnegative,
                "kernel {kernel:?}, N = {steps}: negativity beyond tolerance"
            );
            for entry in &report.entries {
                worst = worst.min(entry.min_s.min(entry.min_r));
            }
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    assert!(worst >= -1e-10, "min scalar solution {worst:.3e} < -1e-10");
    assert!(elapsed < 5.0, "runtime {elapsed:.2} s >= 5 s");
    println!(
        "PASS  criterion 03  complete positivity: min(s, r) = {worst:.3e} >= -1.0e-10 over 2 kernels x 4 couplings x 2 grids  ({elapsed:.3} s < 5 s)"
    );
}

#[test]
fn criterion_04_yosida_resolvent_convergence() {
    let started = Instant::now();
    let op = SpectralOperator::laplacian_1d(4).unwrap();
    let report = yosida_resolvent_convergence(
        &op,
        &Kernel::exponential(),
        &grid(1.0, 1000),
        &[1e2, 1e3, 1e4, 1e5],
    )
    .unwrap();
    let elapsed = started.elapsed().as_secs_f64();
    assert!(report.strictly_decreasing, "{:?}", report.levels);
    let ratios = report.contraction_ratios();
    for (j, r) in ratios.iter().enumerate() {
        assert!(
            (5.0..=15.0).contains(r),
            "ratio {j}: {r:.2} outside [5, 15]; all: {ratios:?}"
        );
    }
    assert!(elapsed < 10.0, "runtime {elapsed:.2} s >= 10 s");
    let pretty: Vec<String> = ratios.iter().map(|r| format!("{r:.1}")).collect();
    println!(
        "PASS  criterion 04  Yosida convergence: sup differences strictly decreasing, ratios [{}] within [5, 15]  ({elapsed:.3} s < 10 s)",
        pretty.join(", ")
    );
}

#[test]
fn criterion_05_cross_method_equivalence() {
    let started = Instant::now();
    let op = SpectralOperator::laplacian_1d(8).unwrap();
    let kernel = Kernel::exponential();
    let cov = QCovariance::power_decay(8, 2.0).unwrap();
    let levels = [500usize, 1000, 2000];
    let seeds: Vec<u64> = (0..20).map(|s| 500_000 + s).collect();
    let mut per_seed: Vec<[f64; 3]> = Vec::new();
    for &seed in &seeds {
        let mut gaps = [0.0_f64; 3];
        for (l, &steps) in levels.iter().enumerate() {
            let g = grid(1.0, steps);
            let noise = sample_wiener(&cov, &g, seed).unwrap();
            let fam = family(&kernel, &op, &g);
            let direct = convolve_direct(&fam, &noise).unwrap();
            let (reform, _, _) = convolve_reformulated(&op, &kernel, &noise).unwrap();
            gaps[l] = direct.w_s.sup_distance(&reform.w_s).unwrap();
        }
        per_seed.push(gaps);
    }
    let monotone = per_seed
        .iter()
        .filter(|g| g[0] > g[1] && g[1] > g[2])
        .count();
    let med_coarse = median(per_seed.iter().map(|g| g[0]).collect());
    let med_fine = median(per_seed.iter().map(|g| g[2]).collect());
    let elapsed = started.elapsed().as_secs_f64();
    assert!(monotone >= 18, "only {monotone}/20 seeds strictly decreasing");
    assert!(
        med_fine <= 0.5 * med_coarse,
        "median at N=2000 {med_fine:.3e} > half of median at N=500 {med_coarse:.3e}"
    );
    assert!(elapsed < 60.0, "runtime {elapsed:.2} s >= 60 s");
    println!(
        "PASS  criterion 05  cross-method equivalence: {monotone}/20 seeds strictly decreasing (>= 18), median gap {med_coarse:.3e} -> {med_fine:.3e} (ratio {:.2} <= 0.5)  ({elapsed:.1} s < 60 s)",
        med_fine / med_coarse
    );
}

#[test]
fn criterion_06_bounded_identity_residual_halves() {
    let base = SpectralOperator::laplacian_1d(4).unwrap();
    let op_n = base.yosida(1e3).unwrap();
    let kernel = Kernel::exponential();
    let cov = QCovariance::power_decay(4, 2.0).unwrap();
    let levels = [250usize, 500, 1000];
    let mut ratio_sets: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    for seed in 0..10u64 {
        let mut residuals = [0.0_f64; 3];
        for (l, &steps) in levels.iter().enumerate() {
            let g = grid(1.0, steps);
            let noise = sample_wiener(&cov, &g, 600_000 + seed).unwrap();
            let fam = family(&kernel, &op_n, &g);
            let ws = convolve_direct(&fam, &noise).unwrap();
            residuals[l] = mild_identity_residual_bounded(&op_n, &kernel, &ws, &noise).unwrap();
        }
        ratio_sets[0].push(residuals[0] / residuals[1]);
        ratio_sets[1].push(residuals[1] / residuals[2]);
    }
    for (j, set) in ratio_sets.iter().enumerate() {
        let med = median(set.clone());
        assert!(
            (1.4..=2.6).contains(&med),
            "level pair {j}: median halving ratio {med:.2} outside [1.4, 2.6] (seeds: {set:?})"
        );
    }
    println!(
        "PASS  criterion 06  identity residual halving: median ratios {:.2} and {:.2} within [1.4, 2.6] over 10 seeds",
        median(ratio_sets[0].clone()),
        median(ratio_sets[1].clone())
    );
}

#[test]
fn criterion_07_wiener_covariance() {
    let started = Instant::now();
    let cov = QCovariance::power_decay(16, 4.0).unwrap();
    let g = grid(1.0, 64);
    let paths: Vec<_> = (0..2000)
        .map(|s| sample_wiener(&cov, &g, 700_000 + s).unwrap())
        .collect();
    let report = covariance_check(&paths, &cov, 64).unwrap();
    let elapsed = started.elapsed().as_secs_f64();
    assert!(
        report.norm_z.abs() <= 3.0,
        "norm z {:.2} beyond 3 standard errors (mean {:.5} vs {:.5})",
        report.norm_z,
        report.mean_norm_sq,
        report.expected_norm_sq
    );
    assert!(
        report.max_abs_cross_z <= 3.0,
        "cross-covariance z {:.2} beyond 3 standard errors",
        report.max_abs_cross_z
    );
    assert!(elapsed < 10.0, "runtime {elapsed:.2} s >= 10 s");
    println!(
        "PASS  criterion 07  Wiener covariance: |z| = {:.2} for E|W(T)|^2 and {:.2} max over 120 cross-moments, both <= 3  ({elapsed:.2} s < 10 s)",
        report.norm_z.abs(),
        report.max_abs_cross_z
    );
}

/// W^S paths for criteria 08/09: same kernel, operator, covariance, seeds.
fn convolution_refinement_paths() -> &'static Vec<(u64, Vec<HilbertPath>)> {
    static PATHS: OnceLock<Vec<(u64, Vec<HilbertPath>)>> = OnceLock::new();
    PATHS.get_or_init(|| {
        let op = SpectralOperator::laplacian_1d(16).unwrap();
        let kernel = Kernel::exponential();
        let cov = QCovariance::power_decay(16, 4.0).unwrap();
        (0..20u64)
            .map(|s| {
                let seed = 800_000 + s;
                let paths = [500usize, 1000, 2000]
                    .iter()
                    .map(|&steps| {
                        let g = grid(1.0, steps);
                        let noise = sample_wiener(&cov, &g, seed).unwrap();
                        let fam = family(&kernel, &op, &g);
                        convolve_direct(&fam, &noise).unwrap().w_s
                    })
                    .collect();
                (seed, paths)
            })
            .collect()
    })
}

#[test]
fn criterion_08_continuity_diagnostic() {
    let mut monotone = 0usize;
    let mut exponents = Vec::new();
    for (_, paths) in convolution_refinement_paths() {
        let report = path_modulus(paths).unwrap();
        if report.strictly_decreasing {
            monotone += 1;
        }
        if let Some(e) = report.exponent {
            exponents.push(e);
        }
    }
    assert!(monotone >= 18, "only {monotone}/20 seeds strictly decreasing");
    // Reported, never asserted: the empirical roughness of W^S trajectories.
    println!(
        "PASS  criterion 08  continuity diagnostic: max increment of W^S decreases across 3 coupled levels for {monotone}/20 seeds (>= 18); empirical exponent median {:.3} (diagnostic only)",
        median(exponents)
    );
}

#[test]
fn criterion_09_spatial_regularity() {
    let op = SpectralOperator::laplacian_1d(16).unwrap();
    let cov = QCovariance::power_decay(16, 4.0).unwrap();
    let gamma = 0.5;
    let mut monotone = 0usize;
    for (_, paths) in convolution_refinement_paths() {
        let mut increments = Vec::new();
        for ws in paths {
            let report = spatial_regularity(&op, gamma, ws, &cov).unwrap();
            assert!(report.all_finite, "non-finite fractional norm");
            increments.push(report.max_increment);
        }
        if increments[0] > increments[1] && increments[1] > increments[2] {
            monotone += 1;
        }
    }
    assert!(monotone >= 18, "only {monotone}/20 seeds strictly decreasing");
    // Gaussianity of the modes: (-A)^gamma scales each mode by a positive
    // constant, which leaves skewness untouched, so test the modes of W^S
    // at the endpoint over a fresh ensemble.
    let kernel = Kernel::exponential();
    let g = grid(1.0, 500);
    let fam = family(&kernel, &op, &g);
    let m = 200;
    let mut endpoint = vec![Vec::with_capacity(m); 16];
    for s in 0..m as u64 {
        let noise = sample_wiener(&cov, &g, 900_000 + s).unwrap();
        let ws = convolve_direct(&fam, &noise).unwrap().w_s;
        for (k, row) in endpoint.iter_mut().enumerate() {
            row.push(ws.value(k, 500));
        }
    }
    let zs: Vec<f64> = endpoint.iter().map(|row| skewness_z(row).unwrap()).collect();
    let passing = zs.iter().filter(|z| z.abs() <= 3.0).count();
    assert!(
        passing as f64 >= 0.95 * 16.0,
        "only {passing}/16 modes pass 3-sigma Gaussianity (z: {zs:?})"
    );
    let max_z = zs.iter().fold(0.0_f64, |m, z| m.max(z.abs()));
    println!(
        "PASS  criterion 09  spatial regularity: (-A)^0.5 W^S finite everywhere, increments decrease for {monotone}/20 seeds (>= 18), Gaussianity {passing}/16 modes (max |z| = {max_z:.2})"
    );
}

#[test]
fn criterion_10_interpolation_and_maximal_surrogates() {
    let op = SpectralOperator::laplacian_1d(8).unwrap();
    let kernel = Kernel::exponential();
    let cov = QCovariance::power_decay(8, 2.0).unwrap();
    let gamma = 0.5;
    let mut worst_m_drift = 0.0_f64;
    let mut worst_w_drift = 0.0_f64;
    for seed in 0..10u64 {
        let mut m_hats = Vec::new();
        let mut w_norms = Vec::new();
        for steps in [500usize, 1000, 2000] {
            let g = grid(1.0, steps);
            let noise = sample_wiener(&cov, &g, 1_000_000 + seed).unwrap();
            let (_, state, memory) = convolve_reformulated(&op, &kernel, &noise).unwrap();
            let w = noise.to_hilbert_path();
            let forcing = w.add_scaled(1.0, &memory.w_tilde).unwrap();
            let interp = interpolation_norms(&state.y, &op, gamma, &forcing).unwrap();
            let maximal = maximal_regularity_norms(&state.y, &op).unwrap();
            m_hats.push(interp.m_hat);
            w_norms.push(maximal.w12_norm + maximal.ay_l2_norm);
        }
        // Stability between the two finest levels, per seed.
        let m_drift = (m_hats[2] / m_hats[1] - 1.0).abs();
        let w_drift = (w_norms[2] / w_norms[1] - 1.0).abs();
        assert!(
            m_drift < 0.2,
            "seed {seed}: M-hat drifts {:.1}% between finest levels ({m_hats:?})",
            m_drift * 100.0
        );
        assert!(
            w_drift < 0.2,
            "seed {seed}: W^{{1,2}}+|AY| drifts {:.1}% between finest levels ({w_norms:?})",
            w_drift * 100.0
        );
        worst_m_drift = worst_m_drift.max(m_drift);
        worst_w_drift = worst_w_drift.max(w_drift);
    }
    println!(
        "PASS  criterion 10  regularity surrogates: across 10 seeds, M-hat drift <= {:.1}% and W^{{1,2}}+|AY| drift <= {:.1}% between the two finest of 3 levels (< 20%)",
        worst_m_drift * 100.0,
        worst_w_drift * 100.0
    );
}

#[test]
fn criterion_11_semigroup_estimates() {
    let op = SpectralOperator::laplacian_1d(16).unwrap();
    let tol = 1e-12;
    let mut worst = f64::NEG_INFINITY;
    for steps in [1000usize, 4096] {
        let g = grid(1.0, steps);
        for gamma in [0.25, 0.5, 0.75] {
            let b = op.semigroup_norm_bounds(&g, gamma).unwrap();
            assert!(
                b.respected(tol),
                "gamma {gamma}, N = {steps}: grid supremum exceeds analytic bound"
            );
            worst = worst
                .max(b.grid_sup_t_a - b.analytic_t_a)
                .max(b.grid_sup_frac - b.analytic_frac)
                .max(b.grid_sup_frac_a - b.analytic_frac_a);
        }
    }
    assert!(worst <= tol);
    println!(
        "PASS  criterion 11  semigroup estimates: max(grid sup - analytic bound) = {worst:.2e} <= 1e-12 across t|AT(t)|, t^g|(-A)^g T(t)|, t^(1+g)|A^(1+g) T(t)|"
    );
}
