//! Convolution kernels, product quadrature and the linear Volterra solver.
//!
//! The scalar equation solved here,
//!
//! ```text
//! u(t) + mu * \int_0^t a(t - tau) u(tau) dtau = f(t),
//! ```
//!
//! is what every eigenmode of the operator equation reduces to. The solver
//! uses product quadrature: `u` is interpolated linearly on the grid and the
//! kernel is integrated against the interpolant panel by panel. For the
//! regular kernels the panel integrals use the trapezoid rule on the kernel
//! values; for the fractional kernel they are computed from the closed-form
//! antiderivative, which is what keeps second-order behavior despite the
//! `t^(alpha-1)` singularity.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result, ScalarPath, TimeGrid};

/// Negativity is flagged below `-NEGATIVITY_TOLERANCE * max(1, max |u|)`.
pub const NEGATIVITY_TOLERANCE: f64 = 1e-10;

/// Convolution kernel `a: (0, T] -> R`, with `a(0)` possibly unbounded.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    kind: Kind,
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    /// `a(t) = 1`.
    Constant,
    /// `a(t) = exp(-t)`.
    Exponential,
    /// `a(t) = (t + epsilon)^(alpha - 1) / Gamma(alpha)`, `alpha` in (0, 1].
    Fractional { alpha: f64, epsilon: f64 },
    /// Linear interpolation of measured values on `[0, t_max]`.
    Tabulated(Table),
}

#[derive(Debug, Clone, PartialEq)]
struct Table {
    times: Vec<f64>,
    values: Vec<f64>,
    /// Derivative estimates at the nodes: centered differences inside,
    /// one-sided at the ends.
    slopes: Vec<f64>,
}

impl Kernel {
    pub fn constant() -> Kernel {
        Kernel {
            kind: Kind::Constant,
        }
    }

    pub fn exponential() -> Kernel {
        Kernel {
            kind: Kind::Exponential,
        }
    }

    /// Fractional kernel `(t + epsilon)^(alpha-1) / Gamma(alpha)`.
    ///
    /// `epsilon = 0` with `alpha < 1` is the weakly singular case: it stays
    /// integrable, but `a(0)` is unbounded, so operations needing `a(0)`
    /// reject it.
    pub fn fractional(alpha: f64, epsilon: f64) -> Result<Kernel> {
        if !(alpha.is_finite() && alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidAlpha(alpha));
        }
        if !(epsilon.is_finite() && epsilon >= 0.0) {
            return Err(Error::InvalidEpsilon(epsilon));
        }
        Ok(Kernel {
            kind: Kind::Fractional { alpha, epsilon },
        })
    }

    /// Kernel given by values at strictly increasing nodes starting at 0.
    pub fn tabulated(times: Vec<f64>, values: Vec<f64>) -> Result<Kernel> {
        if times.len() < 2 || times.len() != values.len() {
            return Err(Error::InvalidTable);
        }
        if times[0] != 0.0 {
            return Err(Error::InvalidTable);
        }
        for w in times.windows(2) {
            if !(w[1].is_finite() && w[1] > w[0]) {
                return Err(Error::InvalidTable);
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidTable);
        }
        let n = times.len();
        let mut slopes = vec![0.0; n];
        slopes[0] = (values[1] - values[0]) / (times[1] - times[0]);
        slopes[n - 1] = (values[n - 1] - values[n - 2]) / (times[n - 1] - times[n - 2]);
        for i in 1..n - 1 {
            slopes[i] = (values[i + 1] - values[i - 1]) / (times[i + 1] - times[i - 1]);
        }
        Ok(Kernel {
            kind: Kind::Tabulated(Table {
                times,
                values,
                slopes,
            }),
        })
    }

    /// `c = a(0)`, or `None` when the kernel is unbounded at the origin.
    pub fn value_at_zero(&self) -> Option<f64> {
        match &self.kind {
            Kind::Constant => Some(1.0),
            Kind::Exponential => Some(1.0),
            Kind::Fractional { alpha, epsilon } => {
                if *alpha == 1.0 {
                    Some(1.0)
                } else if *epsilon > 0.0 {
                    Some(libm::pow(*epsilon, alpha - 1.0) / libm::tgamma(*alpha))
                } else {
                    None
                }
            }
            Kind::Tabulated(t) => Some(t.values[0]),
        }
    }

    /// Kernel value at `t >= 0`; `t = 0` needs a finite `a(0)`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::KernelUndefinedAt(t));
        }
        match &self.kind {
            Kind::Constant => Ok(1.0),
            Kind::Exponential => Ok(libm::exp(-t)),
            Kind::Fractional { alpha, epsilon } => {
                if t + epsilon == 0.0 && *alpha < 1.0 {
                    return Err(Error::KernelUndefinedAt(t));
                }
                Ok(libm::pow(t + epsilon, alpha - 1.0) / libm::tgamma(*alpha))
            }
            Kind::Tabulated(table) => table.interpolate(t, &table.values),
        }
    }

    /// Kernel derivative at `t`; the weakly singular cases reject `t = 0`.
    pub fn derivative(&self, t: f64) -> Result<f64> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::DerivativeUndefinedAt(t));
        }
        match &self.kind {
            Kind::Constant => Ok(0.0),
            Kind::Exponential => Ok(-libm::exp(-t)),
            Kind::Fractional { alpha, epsilon } => {
                if *alpha == 1.0 {
                    return Ok(0.0);
                }
                if t + epsilon == 0.0 {
                    return Err(Error::DerivativeUndefinedAt(t));
                }
                Ok((alpha - 1.0) * libm::pow(t + epsilon, alpha - 2.0) / libm::tgamma(*alpha))
            }
            Kind::Tabulated(table) => table.interpolate(t, &table.slopes),
        }
    }

    /// `\int_lo^hi a(sigma) dsigma`, closed form except for tables.
    ///
    /// Finite for every kernel in the family, including the weakly singular
    /// one (that is what makes the equation solvable at all).
    pub fn integral(&self, lo: f64, hi: f64) -> Result<f64> {
        debug_assert!(lo <= hi);
        if !(lo.is_finite() && lo >= 0.0 && hi.is_finite()) {
            return Err(Error::KernelUndefinedAt(lo.min(hi)));
        }
        match &self.kind {
            Kind::Constant => Ok(hi - lo),
            Kind::Exponential => Ok(libm::exp(-lo) - libm::exp(-hi)),
            Kind::Fractional { alpha, epsilon } => {
                let g1 = libm::tgamma(alpha + 1.0);
                Ok((libm::pow(hi + epsilon, *alpha) - libm::pow(lo + epsilon, *alpha)) / g1)
            }
            Kind::Tabulated(table) => table.integral(lo, hi, false),
        }
    }

    /// `\int_lo^hi sigma * a(sigma) dsigma`, needed for the rising-hat
    /// product weights.
    pub fn first_moment(&self, lo: f64, hi: f64) -> Result<f64> {
        debug_assert!(lo <= hi);
        if !(lo.is_finite() && lo >= 0.0 && hi.is_finite()) {
            return Err(Error::KernelUndefinedAt(lo.min(hi)));
        }
        match &self.kind {
            Kind::Constant => Ok((hi * hi - lo * lo) / 2.0),
            Kind::Exponential => {
                Ok((1.0 + lo) * libm::exp(-lo) - (1.0 + hi) * libm::exp(-hi))
            }
            Kind::Fractional { alpha, epsilon } => {
                let ga = libm::tgamma(*alpha);
                let g1 = libm::tgamma(alpha + 1.0);
                let (a, b) = (lo + epsilon, hi + epsilon);
                let t1 = (libm::pow(b, alpha + 1.0) - libm::pow(a, alpha + 1.0))
                    / ((alpha + 1.0) * ga);
                let t2 = epsilon * (libm::pow(b, *alpha) - libm::pow(a, *alpha)) / g1;
                Ok(t1 - t2)
            }
            Kind::Tabulated(table) => table.integral(lo, hi, true),
        }
    }

    fn is_fractional(&self) -> bool {
        matches!(self.kind, Kind::Fractional { .. })
    }
}

impl Table {
    /// Linear interpolation of `data` (values or slopes) at `t` in range.
    fn interpolate(&self, t: f64, data: &[f64]) -> Result<f64> {
        let last = *self.times.last().unwrap();
        if t > last {
            return Err(Error::OutsideTable(t));
        }
        let j = match self.times.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
            Ok(j) => return Ok(data[j]),
            Err(j) => j, // first node beyond t; t strictly between j-1 and j
        };
        let (t0, t1) = (self.times[j - 1], self.times[j]);
        let w = (t - t0) / (t1 - t0);
        Ok(data[j - 1] * (1.0 - w) + data[j] * w)
    }

    /// Exact integral of the interpolant over `[lo, hi]`; with
    /// `weighted = true` integrates `sigma * a(sigma)` instead.
    fn integral(&self, lo: f64, hi: f64, weighted: bool) -> Result<f64> {
        let last = *self.times.last().unwrap();
        if hi > last {
            return Err(Error::OutsideTable(hi));
        }
        if lo == hi {
            return Ok(0.0);
        }
        // Piece between consecutive clip points of {lo, hi} and the nodes.
        let mut acc = 0.0;
        let mut x0 = lo;
        let mut v0 = self.interpolate(lo, &self.values)?;
        for (&tn, &vn) in self.times.iter().zip(&self.values) {
            if tn <= lo {
                continue;
            }
            let (x1, v1) = if tn >= hi {
                (hi, self.interpolate(hi, &self.values)?)
            } else {
                (tn, vn)
            };
            acc += panel_integral(x0, x1, v0, v1, weighted);
            x0 = x1;
            v0 = v1;
            if tn >= hi {
                break;
            }
        }
        if x0 < hi {
            let v1 = self.interpolate(hi, &self.values)?;
            acc += panel_integral(x0, hi, v0, v1, weighted);
        }
        Ok(acc)
    }
}

/// Integral of the linear function through `(x0, v0)`, `(x1, v1)`, optionally
/// weighted by `sigma`.
fn panel_integral(x0: f64, x1: f64, v0: f64, v1: f64, weighted: bool) -> f64 {
    let h = x1 - x0;
    if !weighted {
        return 0.5 * h * (v0 + v1);
    }
    // \int sigma (v0 + (v1-v0)(sigma-x0)/h) dsigma over [x0, x1]
    let lin = 0.5 * v0 * (x1 * x1 - x0 * x0);
    let quad = (v1 - v0) / h * ((x1 * x1 * x1 - x0 * x0 * x0) / 3.0 - 0.5 * x0 * (x1 * x1 - x0 * x0));
    lin + quad
}

/// Product-quadrature panel weights for `(a * u)(t_i)` on a uniform grid:
///
/// ```text
/// Q_i[u] = sum_{m=0}^{i-1}  near[m] * u_{i-m}  +  far[m] * u_{i-m-1}
/// ```
///
/// where panel `m` covers lag `[t_m, t_{m+1}]`, `near[m] + far[m]` equals the
/// kernel mass of the panel, and `near[0]` is the diagonal weight of `u_i`.
#[derive(Debug, Clone)]
pub struct ProductQuadrature {
    grid: TimeGrid,
    near: Vec<f64>,
    far: Vec<f64>,
    /// `far[d-1] + near[d]` (zero-padded), the weight of `u_{i-d}` for
    /// `0 < d < i`; hoisted out of the solver's inner loop.
    combined: Vec<f64>,
}

impl ProductQuadrature {
    pub fn new(kernel: &Kernel, grid: &TimeGrid) -> Result<Self> {
        let n = grid.steps();
        let dt = grid.dt();
        let mut near = Vec::with_capacity(n);
        let mut far = Vec::with_capacity(n);
        if kernel.is_fractional() {
            // Exact moments of the kernel against the linear hats.
            for m in 0..n {
                let (lo, hi) = (grid.time(m), grid.time(m + 1));
                let mass = kernel.integral(lo, hi)?;
                let rising = (kernel.first_moment(lo, hi)? - lo * mass) / dt;
                near.push(mass - rising);
                far.push(rising);
            }
        } else {
            // Trapezoid on the kernel values; needs a(0) finite, which all
            // regular kernels have.
            for m in 0..n {
                near.push(0.5 * dt * kernel.eval(grid.time(m))?);
                far.push(0.5 * dt * kernel.eval(grid.time(m + 1))?);
            }
        }
        let mut combined = vec![0.0; n + 1];
        for d in 1..=n {
            combined[d] = far[d - 1] + if d < n { near[d] } else { 0.0 };
        }
        Ok(ProductQuadrature {
            grid: *grid,
            near,
            far,
            combined,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    /// Weight of `u_i` itself in `Q_i[u]`.
    pub fn diagonal_weight(&self) -> f64 {
        self.near[0]
    }

    /// `Q_i[u]` for a full value slice (length `steps + 1`).
    pub fn convolve_at(&self, u: &[f64], i: usize) -> f64 {
        debug_assert_eq!(u.len(), self.grid.len());
        debug_assert!(i < u.len());
        if i == 0 {
            return 0.0;
        }
        let mut acc = self.far[i - 1] * u[0] + self.near[0] * u[i];
        for (w, v) in self.combined[1..i].iter().zip(u[1..i].iter().rev()) {
            acc += w * v;
        }
        acc
    }

    /// All of `Q_0[u] .. Q_N[u]`; quadratic cost.
    pub fn convolve_all(&self, u: &[f64]) -> Vec<f64> {
        (0..u.len()).map(|i| self.convolve_at(u, i)).collect()
    }
}

/// Solve `u + mu (a * u) = f` on the grid of `f` by product quadrature.
///
/// The discrete equation is solved exactly (one forward substitution), so the
/// residual reported by [`volterra_residual`] is at rounding level.
pub fn solve_linear_volterra(kernel: &Kernel, mu: f64, f: &ScalarPath) -> Result<ScalarPath> {
    let quad = ProductQuadrature::new(kernel, f.grid())?;
    solve_with_quadrature(&quad, mu, f)
}

/// Solver core, reusing precomputed weights (the resolvent family builder
/// calls this once per mode on a shared quadrature).
pub fn solve_with_quadrature(
    quad: &ProductQuadrature,
    mu: f64,
    f: &ScalarPath,
) -> Result<ScalarPath> {
    if !(mu.is_finite() && mu >= 0.0) {
        return Err(Error::InvalidMu(mu));
    }
    if quad.grid != *f.grid() {
        return Err(Error::GridMismatch);
    }
    let n = quad.grid.steps();
    let denom = 1.0 + mu * quad.diagonal_weight();
    if denom.abs() <= 1e-14 * (1.0 + (mu * quad.diagonal_weight()).abs()) {
        return Err(Error::SingularStep(1));
    }
    let mut u = vec![0.0; n + 1];
    u[0] = f.value(0);
    for i in 1..=n {
        let mut acc = quad.far[i - 1] * u[0];
        for (w, v) in quad.combined[1..i].iter().zip(u[1..i].iter().rev()) {
            acc += w * v;
        }
        u[i] = (f.value(i) - mu * acc) / denom;
    }
    ScalarPath::new(quad.grid, u)
}

/// Max-norm residual `max_i |u_i + mu Q_i[u] - f_i|` of the discrete
/// equation.
pub fn volterra_residual(
    kernel: &Kernel,
    mu: f64,
    u: &ScalarPath,
    f: &ScalarPath,
) -> Result<f64> {
    if u.grid() != f.grid() {
        return Err(Error::GridMismatch);
    }
    let quad = ProductQuadrature::new(kernel, u.grid())?;
    let mut worst = 0.0_f64;
    for i in 0..u.len() {
        let r = u.value(i) + mu * quad.convolve_at(u.values(), i) - f.value(i);
        worst = worst.max(r.abs());
    }
    Ok(worst)
}

/// Outcome of the nonnegativity certificate for one coupling constant.
#[derive(Debug, Clone)]
pub struct PositivityEntry {
    pub mu: f64,
    /// Solution of `s + mu (a * s) = 1`.
    pub s: ScalarPath,
    /// Solution of `r + mu (a * r) = a`.
    pub r: ScalarPath,
    pub min_s: f64,
    pub min_r: f64,
    /// `NEGATIVITY_TOLERANCE * max(1, max |path|)`, per path.
    pub tolerance_s: f64,
    pub tolerance_r: f64,
    pub nonnegative: bool,
}

/// Certificate that the kernel behaves completely positively on this grid:
/// for each `mu`, the discrete solutions of `s + mu (a*s) = 1` and
/// `r + mu (a*r) = a` stay above the negativity tolerance.
#[derive(Debug, Clone)]
pub struct PositivityReport {
    pub grid: TimeGrid,
    pub entries: Vec<PositivityEntry>,
    pub all_nonnegative: bool,
}

/// Run the nonnegativity certificate for every coupling constant in `mus`.
///
/// A pass on a grid (and ideally a refinement of it) is evidence, not proof:
/// the defining property quantifies over all `mu >= 0` and all of `[0, T]`.
pub fn check_complete_positivity(
    kernel: &Kernel,
    mus: &[f64],
    grid: &TimeGrid,
) -> Result<PositivityReport> {
    if mus.is_empty() {
        return Err(Error::EmptyMuList);
    }
    let one = ScalarPath::constant(*grid, 1.0);
    let mut a_values = Vec::with_capacity(grid.len());
    for t in grid.times() {
        a_values.push(kernel.eval(t)?);
    }
    let a_path = ScalarPath::new(*grid, a_values)?;
    let quad = ProductQuadrature::new(kernel, grid)?;
    let mut entries = Vec::with_capacity(mus.len());
    let mut all = true;
    for &mu in mus {
        let s = solve_with_quadrature(&quad, mu, &one)?;
        let r = solve_with_quadrature(&quad, mu, &a_path)?;
        let min_s = s.values().iter().fold(f64::INFINITY, |m, v| m.min(*v));
        let min_r = r.values().iter().fold(f64::INFINITY, |m, v| m.min(*v));
        let tolerance_s = NEGATIVITY_TOLERANCE * s.max_abs().max(1.0);
        let tolerance_r = NEGATIVITY_TOLERANCE * r.max_abs().max(1.0);
        let nonnegative = min_s >= -tolerance_s && min_r >= -tolerance_r;
        all &= nonnegative;
        entries.push(PositivityEntry {
            mu,
            s,
            r,
            min_s,
            min_r,
            tolerance_s,
            tolerance_r,
            nonnegative,
        });
    }
    Ok(PositivityReport {
        grid: *grid,
        entries,
        all_nonnegative: all,
    })
}
