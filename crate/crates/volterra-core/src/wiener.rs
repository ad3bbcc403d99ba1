//! Q-Wiener process sampling with coupled resolutions.
//!
//! Modes are independent scalar Brownian motions with variance rates `q_k`.
//! Sampling is hierarchical: a working grid with `N = b * 2^L` steps (`b`
//! odd) is filled level by level, starting from `b` coarse increments and
//! bisecting each increment with an independent bridge midpoint. Every
//! `(mode, level)` pair draws from its own counter-based stream keyed by the
//! run seed, so two grids over the same horizon whose step counts share the
//! odd factor `b` consume identical streams on their common levels. The
//! coarse path then IS the fine path seen at the shared nodes (up to
//! floating-point reassociation, ~1e-13), which is what makes refinement
//! studies measure the scheme and not the noise.
//!
//! Increments are the primitive data; cumulative values are stored prefix
//! sums, so `W(0) = 0` holds exactly and discrete stochastic integrals can
//! consume increments without differencing.

use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::{Error, HilbertPath, Result, TimeGrid};

/// Ensemble statistics below this sample count are too noisy to report.
pub const MIN_ENSEMBLE: usize = 100;

/// Diagonal covariance of the driving noise: variance rates `q_k >= 0`
/// per mode.
#[derive(Debug, Clone, PartialEq)]
pub struct QCovariance {
    rates: Vec<f64>,
}

impl QCovariance {
    pub fn from_values(rates: Vec<f64>) -> Result<Self> {
        if rates.is_empty() {
            return Err(Error::EmptySpectrum);
        }
        for &q in &rates {
            if !(q.is_finite() && q >= 0.0) {
                return Err(Error::InvalidCovariance(q));
            }
        }
        Ok(QCovariance { rates })
    }

    /// `q_k = k^{-decay}` for `k = 1..=modes`; `decay = 0` is white in the
    /// retained modes.
    pub fn power_decay(modes: usize, decay: f64) -> Result<Self> {
        if modes == 0 {
            return Err(Error::EmptySpectrum);
        }
        if !decay.is_finite() {
            return Err(Error::InvalidCovariance(decay));
        }
        let rates = (1..=modes)
            .map(|k| libm::pow(k as f64, -decay))
            .collect();
        Ok(QCovariance { rates })
    }

    pub fn uniform(modes: usize, q: f64) -> Result<Self> {
        if modes == 0 {
            return Err(Error::EmptySpectrum);
        }
        if !(q.is_finite() && q >= 0.0) {
            return Err(Error::InvalidCovariance(q));
        }
        Ok(QCovariance {
            rates: vec![q; modes],
        })
    }

    pub fn modes(&self) -> usize {
        self.rates.len()
    }

    pub fn rate(&self, mode: usize) -> f64 {
        self.rates[mode]
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    /// `Tr Q = sum_k q_k`, the variance rate of `|W(t)|^2`'s mean.
    pub fn trace(&self) -> f64 {
        self.rates.iter().sum()
    }
}

/// Sampled noise on a working grid: increments per mode plus their prefix
/// sums.
#[derive(Debug, Clone)]
pub struct NoisePath {
    grid: TimeGrid,
    modes: usize,
    /// Row-major `[mode][step]`, `steps` entries per mode.
    increments: Vec<f64>,
    /// Row-major `[mode][node]`, `steps + 1` entries per mode, row starts 0.
    cumulative: Vec<f64>,
}

impl NoisePath {
    /// Wrap externally supplied increments (tests, file replay).
    pub fn from_increments(grid: TimeGrid, rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptySpectrum);
        }
        let n = grid.steps();
        let modes = rows.len();
        let mut increments = Vec::with_capacity(modes * n);
        for row in &rows {
            if row.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
            increments.extend_from_slice(row);
        }
        Ok(Self::assemble(grid, modes, increments))
    }

    fn assemble(grid: TimeGrid, modes: usize, increments: Vec<f64>) -> Self {
        let n = grid.steps();
        let mut cumulative = Vec::with_capacity(modes * (n + 1));
        for k in 0..modes {
            let mut acc = 0.0;
            cumulative.push(acc);
            for &dw in &increments[k * n..(k + 1) * n] {
                acc += dw;
                cumulative.push(acc);
            }
        }
        NoisePath {
            grid,
            modes,
            increments,
            cumulative,
        }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// `W_k(t_{j+1}) - W_k(t_j)` for `j = 0..steps`.
    pub fn increments(&self, mode: usize) -> &[f64] {
        let n = self.grid.steps();
        &self.increments[mode * n..(mode + 1) * n]
    }

    /// `W_k(t_i)`.
    pub fn value(&self, mode: usize, i: usize) -> f64 {
        self.cumulative[mode * (self.grid.steps() + 1) + i]
    }

    pub fn values(&self, mode: usize) -> &[f64] {
        let len = self.grid.steps() + 1;
        &self.cumulative[mode * len..(mode + 1) * len]
    }

    pub fn to_hilbert_path(&self) -> HilbertPath {
        let rows = (0..self.modes)
            .map(|k| self.values(k).to_vec())
            .collect();
        HilbertPath::from_rows(self.grid, rows).expect("rows match the grid")
    }
}

/// `N = b * 2^levels` with `b` odd.
fn decompose(steps: usize) -> (usize, u32) {
    let levels = steps.trailing_zeros();
    (steps >> levels, levels)
}

/// Stream key for one `(mode, level)` pair. SplitMix64 finalizer chain; the
/// constants are the standard increment/mix constants. Stability of this
/// derivation is part of the reproducibility contract and pinned by tests.
fn stream_seed(seed: u64, mode: usize, level: u32) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    let golden = 0x9E37_79B9_7F4A_7C15_u64;
    let a = mix(seed.wrapping_add(golden.wrapping_mul(1 + mode as u64)));
    mix(a.wrapping_add(golden.wrapping_mul(0x1000_0000 + level as u64)))
}

/// Sample one path of the Q-Wiener process on `grid`.
///
/// Same `(covariance, grid, seed)` always reproduces the same path bit for
/// bit, across platforms and across unrelated code changes elsewhere in the
/// run.
pub fn sample_wiener(
    covariance: &QCovariance,
    grid: &TimeGrid,
    seed: u64,
) -> Result<NoisePath> {
    let n = grid.steps();
    let (b, levels) = decompose(n);
    let horizon = grid.horizon();
    let mut increments = Vec::with_capacity(covariance.modes() * n);
    for (mode, &q) in covariance.rates().iter().enumerate() {
        // Level 0: b independent increments over panels of width T/b.
        let mut rng = ChaCha12Rng::seed_from_u64(stream_seed(seed, mode, 0));
        let sd0 = libm::sqrt(q * horizon / b as f64);
        let mut row: Vec<f64> = (0..b)
            .map(|_| sd0 * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng))
            .collect();
        // Each level bisects every increment: D -> (D/2 + eta, D/2 - eta)
        // with eta ~ N(0, q h / 4) and h the parent width, which preserves
        // the joint law and leaves parent sums unchanged.
        for level in 1..=levels {
            let mut rng = ChaCha12Rng::seed_from_u64(stream_seed(seed, mode, level));
            let parent_width = horizon / row.len() as f64;
            let sd = libm::sqrt(q * parent_width / 4.0);
            let mut next = Vec::with_capacity(row.len() * 2);
            for &d in &row {
                let eta =
                    sd * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng);
                next.push(d / 2.0 + eta);
                next.push(d / 2.0 - eta);
            }
            row = next;
        }
        increments.append(&mut row);
    }
    Ok(NoisePath::assemble(*grid, covariance.modes(), increments))
}

/// Ensemble test of the marginal law at one grid node.
#[derive(Debug, Clone)]
pub struct CovarianceReport {
    pub ensemble: usize,
    pub time: f64,
    /// Per-mode z-scores of the sample variance against `q_k t` (0 for
    /// modes with `q_k = 0`).
    pub mode_z: Vec<f64>,
    pub max_abs_mode_z: f64,
    /// Largest |z| of the sample cross-moment `E W_j W_k`, `j != k`,
    /// against 0.
    pub max_abs_cross_z: f64,
    /// z-score of the sample mean of `|W(t)|^2` against `t Tr Q`.
    pub norm_z: f64,
    pub expected_norm_sq: f64,
    pub mean_norm_sq: f64,
}

impl CovarianceReport {
    /// All statistics within `bound` standard deviations.
    pub fn within(&self, bound: f64) -> bool {
        self.max_abs_mode_z <= bound
            && self.max_abs_cross_z <= bound
            && self.norm_z.abs() <= bound
    }
}

/// Compare ensemble second moments at node `i` with the exact law
/// `W_k(t) ~ N(0, q_k t)`, modes independent.
pub fn covariance_check(
    paths: &[NoisePath],
    covariance: &QCovariance,
    node: usize,
) -> Result<CovarianceReport> {
    let m = paths.len();
    if m < MIN_ENSEMBLE {
        return Err(Error::EnsembleTooSmall {
            got: m,
            min: MIN_ENSEMBLE,
        });
    }
    let grid = *paths[0].grid();
    let modes = covariance.modes();
    for p in paths {
        if *p.grid() != grid {
            return Err(Error::GridMismatch);
        }
        if p.modes() != modes {
            return Err(Error::LengthMismatch {
                expected: modes,
                got: p.modes(),
            });
        }
    }
    if node == 0 || node > grid.steps() {
        return Err(Error::NodeOutOfRange {
            node,
            nodes: grid.len(),
        });
    }
    let t = grid.time(node);
    let mf = m as f64;

    // Sample variance per mode (mean known to be zero). Under the exact law
    // it is (q t / m) chi^2_m, so sd = q t sqrt(2/m).
    let mut mode_z = Vec::with_capacity(modes);
    let mut max_abs_mode_z = 0.0_f64;
    for k in 0..modes {
        let q = covariance.rate(k);
        let second: f64 = paths
            .iter()
            .map(|p| {
                let v = p.value(k, node);
                v * v
            })
            .sum::<f64>()
            / mf;
        let z = if q == 0.0 {
            // Degenerate mode: the path is exactly zero, nothing to score.
            0.0
        } else {
            (second - q * t) / (q * t * libm::sqrt(2.0 / mf))
        };
        mode_z.push(z);
        max_abs_mode_z = max_abs_mode_z.max(z.abs());
    }

    // Cross moments vanish for independent modes; sd of the estimator under
    // the exact law is sqrt(q_j q_k) t / sqrt(m).
    let mut max_abs_cross_z = 0.0_f64;
    for j in 0..modes {
        for k in (j + 1)..modes {
            let qj = covariance.rate(j);
            let qk = covariance.rate(k);
            if qj == 0.0 || qk == 0.0 {
                continue;
            }
            let cross: f64 = paths
                .iter()
                .map(|p| p.value(j, node) * p.value(k, node))
                .sum::<f64>()
                / mf;
            let z = cross / (libm::sqrt(qj * qk) * t / libm::sqrt(mf));
            max_abs_cross_z = max_abs_cross_z.max(z.abs());
        }
    }

    // |W(t)|^2 has mean t Tr Q and variance 2 t^2 sum q_k^2.
    let expected_norm_sq = t * covariance.trace();
    let mean_norm_sq: f64 = paths
        .iter()
        .map(|p| {
            (0..modes)
                .map(|k| {
                    let v = p.value(k, node);
                    v * v
                })
                .sum::<f64>()
        })
        .sum::<f64>()
        / mf;
    let var_norm: f64 = 2.0 * t * t * covariance.rates().iter().map(|q| q * q).sum::<f64>();
    let norm_z = if var_norm == 0.0 {
        0.0
    } else {
        (mean_norm_sq - expected_norm_sq) / libm::sqrt(var_norm / mf)
    };

    Ok(CovarianceReport {
        ensemble: m,
        time: t,
        mode_z,
        max_abs_mode_z,
        max_abs_cross_z,
        norm_z,
        expected_norm_sq,
        mean_norm_sq,
    })
}
