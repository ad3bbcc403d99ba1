//! Scalar resolvent families `s_k + lambda_k (a * s_k) = 1`.
//!
//! The family `S(t)` acting diagonally by `s_k(t)` is the solution operator
//! of the deterministic Volterra equation: `X(t) = S(t) X(0)` and the
//! stochastic convolution integrates `s_k` against noise increments.
//!
//! Stiffness. The working grids used in experiments put `lambda_k * dt` well
//! past 0.5 for the top Laplacian modes, where the trapezoid-panel scheme is
//! stable but visibly inaccurate (its one-step map `(1 - z/2)/(1 + z/2)`
//! departs from `e^{-z}` by ~1e-2 at z = 0.6). Each row is therefore solved
//! on an internally refined grid, halving the step until the per-step kernel
//! mass `lambda * \int_0^h a` drops below [`STIFFNESS_TARGET`], then
//! restricted to the working grid. Restriction is exact (the fine grid
//! contains the working nodes), and the row keeps its fine solution so the
//! discrete-equation residual can be certified on the grid actually solved.

use alloc::vec::Vec;

use crate::kernel::{solve_with_quadrature, ProductQuadrature};
use crate::{Error, HilbertPath, Kernel, Result, ScalarPath, SpectralOperator, TimeGrid};

/// Refine a row until `lambda * \int_0^h a(s) ds <=` this target; `0.02`
/// keeps the scheme's amplification error around `1e-5` per row.
pub const STIFFNESS_TARGET: f64 = 0.02;

/// Upper bound on internal fine steps per row; the quadratic solve cost makes
/// unbounded refinement unaffordable, and past this point accuracy degrades
/// gracefully instead.
pub const FINE_STEPS_CAP: usize = 32_768;

/// One mode of the family: the solution on its solving grid plus the
/// restriction to the working grid.
#[derive(Debug, Clone)]
pub struct ResolventRow {
    refinement: usize,
    fine: ScalarPath,
    working: Vec<f64>,
}

impl ResolventRow {
    /// Internal step-halving factor this row was solved with.
    pub fn refinement(&self) -> usize {
        self.refinement
    }

    /// Solution on the solving grid (working grid refined `refinement`-fold).
    pub fn fine(&self) -> &ScalarPath {
        &self.fine
    }

    /// Values on the working grid.
    pub fn values(&self) -> &[f64] {
        &self.working
    }
}

/// Diagonal resolvent family on a working grid.
#[derive(Debug, Clone)]
pub struct ResolventFamily {
    operator: SpectralOperator,
    kernel: Kernel,
    grid: TimeGrid,
    rows: Vec<ResolventRow>,
}

impl ResolventFamily {
    pub fn operator(&self) -> &SpectralOperator {
        &self.operator
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn modes(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, mode: usize) -> &ResolventRow {
        &self.rows[mode]
    }

    /// `s_k(t_i)` on the working grid.
    pub fn value(&self, mode: usize, i: usize) -> f64 {
        self.rows[mode].working[i]
    }

    /// Sup over the grid of the diagonal operator norm `max_k |s_k(t)|`.
    ///
    /// For completely positive kernels this is the empirical growth bound:
    /// `|S(t)| <= M e^{0 t}` with `M = norm_sup()`, expected `<= 1`.
    pub fn norm_sup(&self) -> f64 {
        self.rows
            .iter()
            .flat_map(|r| r.working.iter())
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Working-grid values as a mode-by-time path (for export).
    pub fn to_path(&self) -> HilbertPath {
        let rows = self.rows.iter().map(|r| r.working.clone()).collect();
        HilbertPath::from_rows(self.grid, rows).expect("rows built on the working grid")
    }

    #[cfg(test)]
    fn perturb(&mut self, mode: usize, i: usize, delta: f64) {
        self.rows[mode].fine.values_mut()[i] += delta;
    }
}

/// Smallest power-of-two step-halving that tames the per-step kernel mass,
/// capped so a row never exceeds [`FINE_STEPS_CAP`] fine steps.
fn refinement_factor(kernel: &Kernel, lambda: f64, grid: &TimeGrid) -> Result<usize> {
    let max_r = largest_power_of_two(FINE_STEPS_CAP / grid.steps().max(1));
    let dt = grid.dt();
    let mut r = 1usize;
    while r < max_r && lambda * kernel.integral(0.0, dt / r as f64)? > STIFFNESS_TARGET {
        r *= 2;
    }
    Ok(r)
}

fn largest_power_of_two(x: usize) -> usize {
    if x == 0 {
        1
    } else {
        usize::pow(2, usize::BITS - 1 - x.leading_zeros())
    }
}

/// Scalar resolvent `s + lambda (a * s) = 1` solved directly on `grid`.
pub fn scalar_resolvent(kernel: &Kernel, lambda: f64, grid: &TimeGrid) -> Result<ScalarPath> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::InvalidMu(lambda));
    }
    let quad = ProductQuadrature::new(kernel, grid)?;
    solve_with_quadrature(&quad, lambda, &ScalarPath::constant(*grid, 1.0))
}

/// Solve every mode of the operator, refining stiff rows internally.
///
/// Complete positivity of the kernel is not enforced here; run the
/// positivity certificate separately and surface it in reports when the
/// kernel is unvetted.
pub fn build_resolvent_family(
    operator: &SpectralOperator,
    kernel: &Kernel,
    grid: &TimeGrid,
) -> Result<ResolventFamily> {
    let n = grid.steps();
    // Weights are shared between rows with the same refinement; with the
    // power-of-two rule there are only a handful of distinct grids.
    let mut cache: Vec<(usize, ProductQuadrature)> = Vec::new();
    let mut rows = Vec::with_capacity(operator.dimension());
    for &lambda in operator.eigenvalues() {
        let r = refinement_factor(kernel, lambda, grid)?;
        let quad = match cache.iter().find(|(cr, _)| *cr == r) {
            Some((_, q)) => q.clone(),
            None => {
                let q = ProductQuadrature::new(kernel, &grid.refined(r)?)?;
                cache.push((r, q.clone()));
                q
            }
        };
        let one = ScalarPath::constant(*quad.grid(), 1.0);
        let fine = solve_with_quadrature(&quad, lambda, &one)?;
        let working = (0..=n).map(|i| fine.value(i * r)).collect();
        rows.push(ResolventRow {
            refinement: r,
            fine,
            working,
        });
    }
    Ok(ResolventFamily {
        operator: operator.clone(),
        kernel: kernel.clone(),
        grid: *grid,
        rows,
    })
}

/// Max over modes of the discrete-equation residual, each row checked on the
/// grid it was solved on. Freshly built families sit at rounding level;
/// anything larger means the rows no longer solve their equations.
pub fn resolvent_residual(family: &ResolventFamily) -> Result<f64> {
    let mut cache: Vec<(usize, ProductQuadrature)> = Vec::new();
    let mut worst = 0.0_f64;
    for (row, &lambda) in family.rows.iter().zip(family.operator.eigenvalues()) {
        let quad = match cache.iter().find(|(cr, _)| *cr == row.refinement) {
            Some((_, q)) => q.clone(),
            None => {
                let q = ProductQuadrature::new(&family.kernel, row.fine.grid())?;
                cache.push((row.refinement, q.clone()));
                q
            }
        };
        let u = row.fine.values();
        for i in 0..u.len() {
            let r = u[i] + lambda * quad.convolve_at(u, i) - 1.0;
            worst = worst.max(r.abs());
        }
    }
    Ok(worst)
}

/// One Yosida approximation level in a convergence study.
#[derive(Debug, Clone, Copy)]
pub struct YosidaLevel {
    pub n: f64,
    /// `sup_{k, t_i} |s^n_k(t_i) - s_k(t_i)|`, the uniform distance between
    /// the approximated family and the base family on basis vectors.
    pub sup_difference: f64,
    /// Empirical growth constant `sup_t |S_n(t)|` of the level's family.
    pub norm_sup: f64,
}

/// Result of approximating the generator by Yosida operators of increasing
/// `n` and rebuilding the family each time.
#[derive(Debug, Clone)]
pub struct YosidaConvergence {
    pub levels: Vec<YosidaLevel>,
    pub base_norm_sup: f64,
    pub strictly_decreasing: bool,
}

impl YosidaConvergence {
    /// Ratios `sup_diff(n_j) / sup_diff(n_{j+1})` between consecutive levels;
    /// an O(1/n) rate shows up as ratios near `n_{j+1}/n_j`.
    pub fn contraction_ratios(&self) -> Vec<f64> {
        self.levels
            .windows(2)
            .map(|w| w[0].sup_difference / w[1].sup_difference)
            .collect()
    }
}

/// Build the family for `A` and for each Yosida approximation `A_n`, and
/// measure the uniform distance between them on the grid.
pub fn yosida_resolvent_convergence(
    operator: &SpectralOperator,
    kernel: &Kernel,
    grid: &TimeGrid,
    ns: &[f64],
) -> Result<YosidaConvergence> {
    if ns.is_empty() {
        return Err(Error::InvalidYosidaParameter(f64::NAN));
    }
    let mut prev = 0.0;
    for &n in ns {
        if !(n.is_finite() && n > prev) {
            return Err(Error::InvalidYosidaParameter(n));
        }
        prev = n;
    }
    let base = build_resolvent_family(operator, kernel, grid)?;
    let mut levels = Vec::with_capacity(ns.len());
    for &n in ns {
        let approx = build_resolvent_family(&operator.yosida(n)?, kernel, grid)?;
        let mut sup = 0.0_f64;
        for k in 0..base.modes() {
            for (a, b) in approx.row(k).values().iter().zip(base.row(k).values()) {
                sup = sup.max((a - b).abs());
            }
        }
        levels.push(YosidaLevel {
            n,
            sup_difference: sup,
            norm_sup: approx.norm_sup(),
        });
    }
    let strictly_decreasing = levels
        .windows(2)
        .all(|w| w[1].sup_difference < w[0].sup_difference);
    Ok(YosidaConvergence {
        levels,
        base_norm_sup: base.norm_sup(),
        strictly_decreasing,
    })
}
