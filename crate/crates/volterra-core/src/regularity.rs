//! Temporal and spatial regularity diagnostics.
//!
//! Everything here is a diagnostic over discretely sampled paths: moduli of
//! continuity across coupled refinement levels, fractional-power norms in
//! space, Sobolev-Slobodeckij and maximal-regularity norms in time. Empirical
//! exponents are reported with their regression quality and never asserted
//! against theoretical values; the continuity and boundedness claims that
//! are testable appear as monotonicity/stability of the reported numbers
//! under refinement, which is what the acceptance suite pins down.

use alloc::vec::Vec;

use crate::wiener::{QCovariance, MIN_ENSEMBLE};
use crate::{Error, HilbertPath, Result, ScalarPath, SpectralOperator};

/// One refinement level of a modulus-of-continuity study.
#[derive(Debug, Clone, Copy)]
pub struct ModulusLevel {
    pub dt: f64,
    /// `max_i |X(t_i) - X(t_{i-1})|_H` on this level's grid.
    pub max_increment: f64,
}

/// Modulus of continuity across refinement levels of one process.
#[derive(Debug, Clone)]
pub struct ModulusReport {
    pub levels: Vec<ModulusLevel>,
    /// Max increments strictly decrease from level to level.
    pub strictly_decreasing: bool,
    /// Log-log regression slope of max increment against dt: an empirical
    /// roughness diagnostic only (no Holder claim is made or checked).
    /// `None` when some level has zero increment.
    pub exponent: Option<f64>,
    /// Root-mean-square residual of the log-log fit.
    pub regression_rms: Option<f64>,
}

/// Max-increment table and empirical exponent for the same process sampled
/// on successively refined grids (coupled noise upstream makes the levels
/// comparable pathwise).
pub fn path_modulus(paths: &[HilbertPath]) -> Result<ModulusReport> {
    if paths.len() < 2 {
        return Err(Error::TooFewLevels(paths.len()));
    }
    for pair in paths.windows(2) {
        if !pair[1].grid().refines(pair[0].grid()) {
            return Err(Error::NotARefinement);
        }
    }
    let levels: Vec<ModulusLevel> = paths
        .iter()
        .map(|p| ModulusLevel {
            dt: p.grid().dt(),
            max_increment: p.max_increment(),
        })
        .collect();
    let strictly_decreasing = levels
        .windows(2)
        .all(|w| w[1].max_increment < w[0].max_increment);
    let (exponent, regression_rms) = if levels.iter().any(|l| l.max_increment == 0.0) {
        (None, None)
    } else {
        let xs: Vec<f64> = levels.iter().map(|l| libm::log(l.dt)).collect();
        let ys: Vec<f64> = levels.iter().map(|l| libm::log(l.max_increment)).collect();
        let n = xs.len() as f64;
        let xbar = xs.iter().sum::<f64>() / n;
        let ybar = ys.iter().sum::<f64>() / n;
        let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
        let sxy: f64 = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (x - xbar) * (y - ybar))
            .sum();
        let slope = sxy / sxx;
        let rms = libm::sqrt(
            xs.iter()
                .zip(&ys)
                .map(|(x, y)| {
                    let fit = ybar + slope * (x - xbar);
                    (y - fit) * (y - fit)
                })
                .sum::<f64>()
                / n,
        );
        (Some(slope), Some(rms))
    };
    Ok(ModulusReport {
        levels,
        strictly_decreasing,
        exponent,
        regression_rms,
    })
}

/// Fractional-power norms of one path, plus the covariance-side summability
/// surrogate.
#[derive(Debug, Clone)]
pub struct SpatialReport {
    pub gamma: f64,
    /// `t_i -> |(-A)^gamma X(t_i)|_H`.
    pub norm_path: ScalarPath,
    /// `max_i |(-A)^gamma (X(t_i) - X(t_{i-1}))|_H`.
    pub max_increment: f64,
    pub all_finite: bool,
    /// Partial sums `sum_{k<=K} q_k lambda_k^{2 gamma}` for `K = 1..modes`;
    /// flattening with `K` indicates the retained modes capture the norm,
    /// growth indicates a divergence trend at this `gamma`.
    pub partial_sums: Vec<f64>,
}

/// Apply `(-A)^gamma` mode-wise and report the resulting norms.
pub fn spatial_regularity(
    operator: &SpectralOperator,
    gamma: f64,
    path: &HilbertPath,
    covariance: &QCovariance,
) -> Result<SpatialReport> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidGamma(gamma));
    }
    if path.modes() != operator.dimension() || covariance.modes() != path.modes() {
        return Err(Error::LengthMismatch {
            expected: operator.dimension(),
            got: path.modes(),
        });
    }
    let scaled_rows: Vec<Vec<f64>> = (0..path.modes())
        .map(|k| {
            let factor = libm::pow(operator.eigenvalue(k), gamma);
            path.row(k).iter().map(|v| factor * v).collect()
        })
        .collect();
    let scaled = HilbertPath::from_rows(*path.grid(), scaled_rows)?;
    let norms: Vec<f64> = (0..path.grid().len()).map(|i| scaled.norm_at(i)).collect();
    let all_finite = norms.iter().all(|v| v.is_finite());
    let mut partial_sums = Vec::with_capacity(path.modes());
    let mut acc = 0.0;
    for k in 0..path.modes() {
        acc += covariance.rate(k) * libm::pow(operator.eigenvalue(k), 2.0 * gamma);
        partial_sums.push(acc);
    }
    Ok(SpatialReport {
        gamma,
        norm_path: ScalarPath::new(*path.grid(), norms)?,
        max_increment: scaled.max_increment(),
        all_finite,
        partial_sums,
    })
}

/// Interpolation-scale norms of a trajectory against its forcing.
#[derive(Debug, Clone, Copy)]
pub struct InterpolationReport {
    pub gamma: f64,
    /// Sobolev-Slobodeckij seminorm: square root of the double sum
    /// `sum_{i != j} |Y_i - Y_j|^2 / |t_i - t_j|^{1 + 2 gamma} dt^2`
    /// (diagonal excluded; the integrand is singular there).
    pub slobodeckij_seminorm: f64,
    /// `|Y|_{L^2((0,T);H)}` by trapezoid.
    pub l2_norm: f64,
    /// Full fractional Sobolev norm: `sqrt(L2^2 + seminorm^2)`.
    pub w_gamma_norm: f64,
    /// `L^2` in time of the interpolation-space norm, realized by the
    /// spectral proxy `|x|_H + |(-A)^gamma x|_H` (norm-equivalent to the
    /// real interpolation norm for this diagonal self-adjoint class).
    pub da_gamma_l2_norm: f64,
    pub forcing_l2_norm: f64,
    /// `(w_gamma_norm + da_gamma_l2_norm) / forcing_l2_norm`; 0 when the
    /// forcing vanishes. Finiteness and refinement stability are the
    /// testable content; no specific value is meaningful alone.
    pub m_hat: f64,
}

fn trapezoid_l2(values: impl Iterator<Item = f64>, dt: f64, len: usize) -> f64 {
    let mut acc = 0.0;
    for (i, v) in values.enumerate() {
        let weight = if i == 0 || i + 1 == len { 0.5 } else { 1.0 };
        acc += weight * v;
    }
    libm::sqrt(acc * dt)
}

/// Fractional Sobolev and interpolation norms of `y`, normalized by the
/// `L^2` norm of `forcing`.
pub fn interpolation_norms(
    y: &HilbertPath,
    operator: &SpectralOperator,
    gamma: f64,
    forcing: &HilbertPath,
) -> Result<InterpolationReport> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidGamma(gamma));
    }
    if y.grid() != forcing.grid() {
        return Err(Error::GridMismatch);
    }
    if y.modes() != operator.dimension() || forcing.modes() != y.modes() {
        return Err(Error::LengthMismatch {
            expected: operator.dimension(),
            got: y.modes(),
        });
    }
    let grid = y.grid();
    let n = grid.steps();
    let dt = grid.dt();
    let modes = y.modes();

    let mut double_sum = 0.0;
    for i in 0..=n {
        for j in (i + 1)..=n {
            let mut sq = 0.0;
            for k in 0..modes {
                let d = y.value(k, i) - y.value(k, j);
                sq += d * d;
            }
            let gap = grid.time(j) - grid.time(i);
            double_sum += sq / libm::pow(gap, 1.0 + 2.0 * gamma);
        }
    }
    let slobodeckij_seminorm = libm::sqrt(2.0 * double_sum * dt * dt);

    let l2_norm = trapezoid_l2(
        (0..=n).map(|i| y.norm_at(i) * y.norm_at(i)),
        dt,
        n + 1,
    );
    let w_gamma_norm = libm::sqrt(l2_norm * l2_norm + slobodeckij_seminorm * slobodeckij_seminorm);

    let da_gamma_l2_norm = trapezoid_l2(
        (0..=n).map(|i| {
            let mut frac_sq = 0.0;
            for k in 0..modes {
                let factor = libm::pow(operator.eigenvalue(k), gamma);
                let v = factor * y.value(k, i);
                frac_sq += v * v;
            }
            let total = y.norm_at(i) + libm::sqrt(frac_sq);
            total * total
        }),
        dt,
        n + 1,
    );

    let forcing_l2_norm = trapezoid_l2(
        (0..=n).map(|i| forcing.norm_at(i) * forcing.norm_at(i)),
        dt,
        n + 1,
    );
    let m_hat = if forcing_l2_norm == 0.0 {
        0.0
    } else {
        (w_gamma_norm + da_gamma_l2_norm) / forcing_l2_norm
    };
    Ok(InterpolationReport {
        gamma,
        slobodeckij_seminorm,
        l2_norm,
        w_gamma_norm,
        da_gamma_l2_norm,
        forcing_l2_norm,
        m_hat,
    })
}

/// First-order Sobolev and graph norms of a trajectory.
#[derive(Debug, Clone, Copy)]
pub struct MaximalReport {
    /// `sqrt(sum_i |Y(t_i) - Y(t_{i-1})|^2 / dt)`: the difference-quotient
    /// `L^2` norm of the derivative.
    pub difference_quotient_l2: f64,
    pub l2_norm: f64,
    /// `sqrt(L2^2 + difference quotient^2)`.
    pub w12_norm: f64,
    /// `|A Y|_{L^2((0,T);H)}` by trapezoid.
    pub ay_l2_norm: f64,
}

/// Discrete `W^{1,2}` norm of `y` and the `L^2` norm of `A y`; boundedness
/// of both under refinement is the computable surrogate for maximal
/// regularity.
pub fn maximal_regularity_norms(
    y: &HilbertPath,
    operator: &SpectralOperator,
) -> Result<MaximalReport> {
    if y.modes() != operator.dimension() {
        return Err(Error::LengthMismatch {
            expected: operator.dimension(),
            got: y.modes(),
        });
    }
    let grid = y.grid();
    let n = grid.steps();
    let dt = grid.dt();
    let mut dq_sq = 0.0;
    for i in 0..n {
        let inc = y.increment_norm(i);
        dq_sq += inc * inc / dt;
    }
    let difference_quotient_l2 = libm::sqrt(dq_sq);
    let l2_norm = trapezoid_l2(
        (0..=n).map(|i| y.norm_at(i) * y.norm_at(i)),
        dt,
        n + 1,
    );
    let ay_l2_norm = trapezoid_l2(
        (0..=n).map(|i| {
            let mut sq = 0.0;
            for (k, &lambda) in operator.eigenvalues().iter().enumerate() {
                let v = lambda * y.value(k, i);
                sq += v * v;
            }
            sq
        }),
        dt,
        n + 1,
    );
    Ok(MaximalReport {
        difference_quotient_l2,
        l2_norm,
        w12_norm: libm::sqrt(l2_norm * l2_norm + dq_sq),
        ay_l2_norm,
    })
}

/// Standardized sample skewness `g1 / sqrt(6/M)`: a large-sample z-test of
/// Gaussian symmetry. Degenerate (constant) samples score 0.
pub fn skewness_z(samples: &[f64]) -> Result<f64> {
    let m = samples.len();
    if m < MIN_ENSEMBLE {
        return Err(Error::EnsembleTooSmall {
            got: m,
            min: MIN_ENSEMBLE,
        });
    }
    let mf = m as f64;
    let mean = samples.iter().sum::<f64>() / mf;
    let m2 = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / mf;
    if m2 == 0.0 {
        return Ok(0.0);
    }
    let m3 = samples
        .iter()
        .map(|x| (x - mean) * (x - mean) * (x - mean))
        .sum::<f64>()
        / mf;
    let g1 = m3 / libm::pow(m2, 1.5);
    Ok(g1 / libm::sqrt(6.0 / mf))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convolution::evolve_cauchy;
    use crate::wiener::sample_wiener;
    use crate::TimeGrid;
    use alloc::vec;

    fn grid(horizon: f64, steps: usize) -> TimeGrid {
        TimeGrid::new(horizon, steps).unwrap()
    }

    fn ramp(g: TimeGrid, modes: usize) -> HilbertPath {
        let mut rows = vec![vec![0.0; g.len()]; modes];
        for (i, t) in g.times().enumerate() {
            rows[0][i] = t;
        }
        HilbertPath::from_rows(g, rows).unwrap()
    }

    #[test]
    fn ramp_has_exponent_one() {
        let paths: Vec<HilbertPath> = [250usize, 500, 1000]
            .iter()
            .map(|&n| ramp(grid(1.0, n), 2))
            .collect();
        let report = path_modulus(&paths).unwrap();
        assert!(report.strictly_decreasing);
        let e = report.exponent.unwrap();
        assert!((e - 1.0).abs() <= 1e-9, "exponent {e}");
        assert!(report.regression_rms.unwrap() <= 1e-9);
        assert!((report.levels[0].max_increment - 1.0 / 250.0).abs() <= 1e-15);
    }

    #[test]
    fn constant_path_has_zero_modulus() {
        let paths: Vec<HilbertPath> = [100usize, 200]
            .iter()
            .map(|&n| {
                HilbertPath::from_rows(grid(1.0, n), vec![vec![4.0; n + 1]]).unwrap()
            })
            .collect();
        let report = path_modulus(&paths).unwrap();
        assert_eq!(report.levels[0].max_increment, 0.0);
        assert!(report.exponent.is_none());
        assert!(!report.strictly_decreasing);
    }

    #[test]
    fn modulus_validates_levels() {
        let single = vec![ramp(grid(1.0, 100), 1)];
        assert!(matches!(
            path_modulus(&single),
            Err(Error::TooFewLevels(1))
        ));
        let not_nested = vec![ramp(grid(1.0, 100), 1), ramp(grid(1.0, 150), 1)];
        assert!(matches!(path_modulus(&not_nested), Err(Error::NotARefinement)));
    }

    #[test]
    fn brownian_modulus_shrinks_under_coupling() {
        let cov = QCovariance::uniform(2, 1.0).unwrap();
        let paths: Vec<HilbertPath> = [500usize, 1000, 2000]
            .iter()
            .map(|&n| {
                sample_wiener(&cov, &grid(1.0, n), 424_242)
                    .unwrap()
                    .to_hilbert_path()
            })
            .collect();
        let report = path_modulus(&paths).unwrap();
        assert!(report.strictly_decreasing, "{:?}", report.levels);
        let e = report.exponent.unwrap();
        // Roughness diagnostic lands near 1/2 for Brownian paths; wide band,
        // no Holder assertion intended.
        assert!(e > 0.25 && e < 0.75, "exponent {e}");
    }

    #[test]
    fn spatial_norms_scale_single_mode_exactly() {
        let op = SpectralOperator::laplacian_1d(1).unwrap();
        let g = grid(1.0, 128);
        let cov = QCovariance::uniform(1, 1.0).unwrap();
        let w = sample_wiener(&cov, &g, 8).unwrap().to_hilbert_path();
        let report = spatial_regularity(&op, 0.5, &w, &cov).unwrap();
        let pi = core::f64::consts::PI;
        for i in 0..=128 {
            let expected = pi * w.value(0, i).abs();
            assert!((report.norm_path.value(i) - expected).abs() <= 1e-12 * (1.0 + expected));
        }
        assert!(report.all_finite);
    }

    #[test]
    fn spatial_norms_approach_plain_norm_as_gamma_vanishes() {
        let op = SpectralOperator::laplacian_1d(3).unwrap();
        let g = grid(1.0, 64);
        let cov = QCovariance::power_decay(3, 2.0).unwrap();
        let w = sample_wiener(&cov, &g, 21).unwrap().to_hilbert_path();
        let report = spatial_regularity(&op, 1e-9, &w, &cov).unwrap();
        for i in 0..=64 {
            assert!((report.norm_path.value(i) - w.norm_at(i)).abs() <= 1e-6 * (1.0 + w.norm_at(i)));
        }
    }

    #[test]
    fn partial_sums_flatten_for_summable_covariance() {
        let op = SpectralOperator::laplacian_1d(8).unwrap();
        let g = grid(1.0, 16);
        let cov = QCovariance::power_decay(8, 4.0).unwrap();
        let w = sample_wiener(&cov, &g, 1).unwrap().to_hilbert_path();
        let report = spatial_regularity(&op, 0.5, &w, &cov).unwrap();
        let pi2 = core::f64::consts::PI * core::f64::consts::PI;
        let exact: f64 = (1..=8).map(|k| pi2 / (k * k) as f64).sum();
        assert!((report.partial_sums[7] - exact).abs() <= 1e-12 * exact);
        let tail = report.partial_sums[7] - report.partial_sums[6];
        assert!(tail <= 0.02 * report.partial_sums[7], "tail {tail}");
        assert!(spatial_regularity(&op, 0.0, &w, &cov).is_err());
        assert!(spatial_regularity(&op, 1.0, &w, &cov).is_err());
    }

    #[test]
    fn slobodeckij_oracle_for_linear_path() {
        // |t - s|^2 / |t - s|^2 = 1: the double sum counts ordered pairs,
        // (N+1) N dt^2 = T^2 (1 + 1/N).
        let n = 400;
        let g = grid(1.0, n);
        let y = ramp(g, 1);
        let forcing = HilbertPath::zeros(g, 1);
        let report = interpolation_norms(&y, &SpectralOperator::laplacian_1d(1).unwrap(), 0.5, &forcing).unwrap();
        let exact = 1.0 + 1.0 / n as f64;
        let got = report.slobodeckij_seminorm * report.slobodeckij_seminorm;
        assert!((got - exact).abs() <= 1e-10 * exact, "{got} vs {exact}");
        // L2 of the ramp: sqrt(1/3), trapezoid is O(dt^2) accurate.
        assert!((report.l2_norm - libm::sqrt(1.0 / 3.0)).abs() <= 1e-5);
        assert_eq!(report.m_hat, 0.0);
    }

    #[test]
    fn zero_path_has_zero_norms() {
        let g = grid(1.0, 50);
        let op = SpectralOperator::laplacian_1d(2).unwrap();
        let zero = HilbertPath::zeros(g, 2);
        let r = interpolation_norms(&zero, &op, 0.5, &zero).unwrap();
        assert_eq!(r.w_gamma_norm, 0.0);
        assert_eq!(r.da_gamma_l2_norm, 0.0);
        assert_eq!(r.m_hat, 0.0);
        let m = maximal_regularity_norms(&zero, &op).unwrap();
        assert_eq!(m.w12_norm, 0.0);
        assert_eq!(m.ay_l2_norm, 0.0);
    }

    #[test]
    fn norms_are_homogeneous_and_m_hat_invariant() {
        let op = SpectralOperator::laplacian_1d(2).unwrap();
        let g = grid(1.0, 200);
        let cov = QCovariance::uniform(2, 1.0).unwrap();
        let y = sample_wiener(&cov, &g, 77).unwrap().to_hilbert_path();
        let f = sample_wiener(&cov, &g, 78).unwrap().to_hilbert_path();
        let base = interpolation_norms(&y, &op, 0.5, &f).unwrap();
        let scaled = interpolation_norms(&y.scaled(-3.0), &op, 0.5, &f.scaled(-3.0)).unwrap();
        for (a, b) in [
            (scaled.slobodeckij_seminorm, base.slobodeckij_seminorm),
            (scaled.l2_norm, base.l2_norm),
            (scaled.w_gamma_norm, base.w_gamma_norm),
            (scaled.da_gamma_l2_norm, base.da_gamma_l2_norm),
            (scaled.forcing_l2_norm, base.forcing_l2_norm),
        ] {
            assert!((a - 3.0 * b).abs() <= 1e-12 * (1.0 + a.abs()));
        }
        assert!((scaled.m_hat - base.m_hat).abs() <= 1e-12 * base.m_hat);
        let mb = maximal_regularity_norms(&y, &op).unwrap();
        let ms = maximal_regularity_norms(&y.scaled(-3.0), &op).unwrap();
        assert!((ms.w12_norm - 3.0 * mb.w12_norm).abs() <= 1e-12 * ms.w12_norm);
        assert!((ms.ay_l2_norm - 3.0 * mb.ay_l2_norm).abs() <= 1e-12 * ms.ay_l2_norm);
    }

    #[test]
    fn fractional_norms_increase_with_gamma_when_spectrum_above_one() {
        // lambda_1 = pi^2 > 1, so lambda^gamma grows with gamma mode-wise.
        let op = SpectralOperator::laplacian_1d(3).unwrap();
        let g = grid(1.0, 64);
        let cov = QCovariance::power_decay(3, 2.0).unwrap();
        let w = sample_wiener(&cov, &g, 5).unwrap().to_hilbert_path();
        let lo = spatial_regularity(&op, 0.25, &w, &cov).unwrap();
        let hi = spatial_regularity(&op, 0.75, &w, &cov).unwrap();
        for i in 0..=64 {
            assert!(lo.norm_path.value(i) <= hi.norm_path.value(i) + 1e-15);
        }
    }

    #[test]
    fn graph_norm_oracle_for_constant_forcing() {
        // Y' = -lambda Y + 1, Y(0) = 0: exponential Euler reproduces
        // Y(t) = (1 - e^{-lambda t})/lambda at the nodes up to rounding, and
        // |AY|^2 integrates in closed form.
        let op = SpectralOperator::laplacian_1d(1).unwrap();
        let lambda = op.eigenvalue(0);
        let g = grid(1.0, 1000);
        let forcing = HilbertPath::from_rows(g, vec![vec![1.0; g.len()]]).unwrap();
        let y = evolve_cauchy(&op, 1.0, &forcing).unwrap().y;
        for (i, t) in g.times().enumerate() {
            let exact = -libm::expm1(-lambda * t) / lambda;
            assert!((y.value(0, i) - exact).abs() <= 1e-12);
        }
        let report = maximal_regularity_norms(&y, &op).unwrap();
        let t = 1.0;
        let exact_sq = t + 2.0 * libm::expm1(-lambda * t) / lambda
            - libm::expm1(-2.0 * lambda * t) / (2.0 * lambda);
        let got_sq = report.ay_l2_norm * report.ay_l2_norm;
        assert!(
            (got_sq - exact_sq).abs() <= 0.02 * exact_sq,
            "{got_sq} vs {exact_sq}"
        );
    }

    #[test]
    fn skewness_detects_asymmetry() {
        let cov = QCovariance::uniform(1, 1.0).unwrap();
        let g = grid(1.0, 16);
        let gaussian: Vec<f64> = (0..400)
            .map(|s| sample_wiener(&cov, &g, 600 + s).unwrap().value(0, 16))
            .collect();
        let z = skewness_z(&gaussian).unwrap();
        assert!(z.abs() <= 3.5, "z = {z}");
        let skewed: Vec<f64> = gaussian.iter().map(|x| libm::exp(*x)).collect();
        assert!(skewness_z(&skewed).unwrap() >= 5.0);
        assert_eq!(skewness_z(&vec![2.0; 200]).unwrap(), 0.0);
        assert!(skewness_z(&gaussian[..50]).is_err());
    }
}
