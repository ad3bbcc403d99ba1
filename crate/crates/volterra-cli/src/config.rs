//! Config file schema and validation. The file is TOML with one section per
//! component plus a `[run]` section selecting the experiment; unknown keys
//! are rejected so typos fail loudly instead of silently using defaults.

use serde::Deserialize;
use volterra_core::wiener::QCovariance;
use volterra_core::{Kernel, SpectralOperator, TimeGrid};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub grid: GridSection,
    pub operator: OperatorSection,
    pub kernel: KernelSection,
    pub covariance: CovarianceSection,
    pub run: RunSection,
    pub output: Option<OutputSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub horizon: f64,
    pub steps: usize,
    /// Number of coupled grids: level l has `steps * 2^l` steps.
    pub refinement_levels: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorSection {
    pub kind: String,
    pub modes: Option<usize>,
    pub eigenvalues: Option<Vec<f64>>,
    /// Optional bounded regularization: replaces each eigenvalue by
    /// n*lambda/(n+lambda), which enables the strong-form identity checks.
    pub yosida: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSection {
    pub kind: String,
    pub alpha: Option<f64>,
    pub epsilon: Option<f64>,
    pub times: Option<Vec<f64>>,
    pub values: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CovarianceSection {
    pub kind: String,
    pub decay: Option<f64>,
    pub rate: Option<f64>,
    pub values: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub experiment: String,
    pub seed: Option<u64>,
    pub ensemble: Option<usize>,
    pub gammas: Option<Vec<f64>>,
    pub yosida_n: Option<Vec<f64>>,
    pub mu: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    CompletePositivity,
    ResolventBuild,
    YosidaConvergence,
    ConvolutionCompare,
    Identities,
    Regularity,
    All,
}

impl Experiment {
    pub const NAMES: [&'static str; 7] = [
        "complete-positivity",
        "resolvent-build",
        "yosida-convergence",
        "convolution-compare",
        "identities",
        "regularity",
        "all",
    ];

    pub fn parse(name: &str) -> Option<Experiment> {
        match name {
            "complete-positivity" => Some(Experiment::CompletePositivity),
            "resolvent-build" => Some(Experiment::ResolventBuild),
            "yosida-convergence" => Some(Experiment::YosidaConvergence),
            "convolution-compare" => Some(Experiment::ConvolutionCompare),
            "identities" => Some(Experiment::Identities),
            "regularity" => Some(Experiment::Regularity),
            "all" => Some(Experiment::All),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Experiment::CompletePositivity => "complete-positivity",
            Experiment::ResolventBuild => "resolvent-build",
            Experiment::YosidaConvergence => "yosida-convergence",
            Experiment::ConvolutionCompare => "convolution-compare",
            Experiment::Identities => "identities",
            Experiment::Regularity => "regularity",
            Experiment::All => "all",
        }
    }
}

/// Everything an experiment needs, validated and constructed once.
pub struct Resolved {
    pub experiment: Experiment,
    pub operator: SpectralOperator,
    pub kernel: Kernel,
    pub kernel_label: String,
    pub covariance: QCovariance,
    pub covariance_label: String,
    /// Coupled grids, coarsest first.
    pub grids: Vec<TimeGrid>,
    pub seed: u64,
    pub ensemble: usize,
    pub gammas: Vec<f64>,
    pub yosida_n: Vec<f64>,
    pub mu: Vec<f64>,
    pub out_dir: Option<String>,
}

fn fail(msg: impl Into<String>) -> String {
    msg.into()
}

pub fn resolve(raw: &RawConfig) -> Result<Resolved, String> {
    let experiment = Experiment::parse(&raw.run.experiment).ok_or_else(|| {
        fail(format!(
            "unknown experiment {:?} (expected one of: {})",
            raw.run.experiment,
            Experiment::NAMES.join(", ")
        ))
    })?;

    let base = make_operator(&raw.operator)?;
    let operator = match raw.operator.yosida {
        Some(n) => base
            .yosida(n)
            .map_err(|e| fail(format!("operator.yosida: {e}")))?,
        None => base,
    };

    let (kernel, kernel_label) = make_kernel(&raw.kernel)?;
    let (covariance, covariance_label) = make_covariance(&raw.covariance, operator.dimension())?;

    let levels = raw.grid.refinement_levels.unwrap_or(1);
    if levels == 0 || levels > 12 {
        return Err(fail("grid.refinement_levels must be in 1..=12"));
    }
    if matches!(experiment, Experiment::Regularity | Experiment::All) && levels < 2 {
        return Err(fail(
            "the regularity experiment compares refinement levels; set grid.refinement_levels >= 2",
        ));
    }
    let mut grids = Vec::with_capacity(levels);
    for l in 0..levels {
        let steps = raw
            .grid
            .steps
            .checked_mul(1usize << l)
            .ok_or_else(|| fail("grid too fine: steps * 2^levels overflows"))?;
        grids.push(
            TimeGrid::new(raw.grid.horizon, steps).map_err(|e| fail(format!("grid: {e}")))?,
        );
    }

    let gammas = raw.run.gammas.clone().unwrap_or_else(|| vec![0.5]);
    for &g in &gammas {
        if !(g.is_finite() && g > 0.0 && g < 1.0) {
            return Err(fail(format!("run.gammas entries must lie in (0, 1), got {g}")));
        }
    }

    let yosida_n = raw
        .run
        .yosida_n
        .clone()
        .unwrap_or_else(|| vec![1e2, 1e3, 1e4, 1e5]);
    let mut prev = 0.0;
    for &n in &yosida_n {
        if !(n.is_finite() && n > prev) {
            return Err(fail("run.yosida_n must be positive and strictly increasing"));
        }
        prev = n;
    }

    let mu = raw
        .run
        .mu
        .clone()
        .unwrap_or_else(|| vec![0.0, 0.5, 1.0, 10.0]);
    for &m in &mu {
        if !(m.is_finite() && m >= 0.0) {
            return Err(fail(format!("run.mu entries must be finite and >= 0, got {m}")));
        }
    }

    Ok(Resolved {
        experiment,
        operator,
        kernel,
        kernel_label,
        covariance,
        covariance_label,
        grids,
        seed: raw.run.seed.unwrap_or(0),
        ensemble: raw.run.ensemble.unwrap_or(200),
        gammas,
        yosida_n,
        mu,
        out_dir: raw.output.as_ref().and_then(|o| o.dir.clone()),
    })
}

fn make_operator(sec: &OperatorSection) -> Result<SpectralOperator, String> {
    match sec.kind.as_str() {
        "laplacian" => {
            let modes = sec
                .modes
                .ok_or_else(|| fail("operator.modes is required for kind = \"laplacian\""))?;
            SpectralOperator::laplacian_1d(modes).map_err(|e| fail(format!("operator: {e}")))
        }
        "diagonal" => {
            let eigs = sec
                .eigenvalues
                .clone()
                .ok_or_else(|| fail("operator.eigenvalues is required for kind = \"diagonal\""))?;
            SpectralOperator::from_eigenvalues(eigs, "diagonal")
                .map_err(|e| fail(format!("operator: {e}")))
        }
        other => Err(fail(format!(
            "unknown operator kind {other:?} (expected \"laplacian\" or \"diagonal\")"
        ))),
    }
}

fn make_kernel(sec: &KernelSection) -> Result<(Kernel, String), String> {
    match sec.kind.as_str() {
        "constant" => Ok((Kernel::constant(), "constant".into())),
        "exponential" => Ok((Kernel::exponential(), "exponential".into())),
        "fractional" => {
            let alpha = sec
                .alpha
                .ok_or_else(|| fail("kernel.alpha is required for kind = \"fractional\""))?;
            let epsilon = sec.epsilon.unwrap_or(0.0);
            let k = Kernel::fractional(alpha, epsilon)
                .map_err(|e| fail(format!("kernel: {e}")))?;
            Ok((k, format!("fractional(alpha = {alpha}, epsilon = {epsilon})")))
        }
        "tabulated" => {
            let times = sec
                .times
                .clone()
                .ok_or_else(|| fail("kernel.times is required for kind = \"tabulated\""))?;
            let values = sec
                .values
                .clone()
                .ok_or_else(|| fail("kernel.values is required for kind = \"tabulated\""))?;
            let n = times.len();
            let k = Kernel::tabulated(times, values)
                .map_err(|e| fail(format!("kernel: {e}")))?;
            Ok((k, format!("tabulated ({n} nodes)")))
        }
        other => Err(fail(format!(
            "unknown kernel kind {other:?} (expected \"constant\", \"exponential\", \"fractional\", or \"tabulated\")"
        ))),
    }
}

fn make_covariance(
    sec: &CovarianceSection,
    modes: usize,
) -> Result<(QCovariance, String), String> {
    match sec.kind.as_str() {
        "power" => {
            let decay = sec
                .decay
                .ok_or_else(|| fail("covariance.decay is required for kind = \"power\""))?;
            let q = QCovariance::power_decay(modes, decay)
                .map_err(|e| fail(format!("covariance: {e}")))?;
            Ok((q, format!("power decay k^-{decay} over {modes} modes")))
        }
        "uniform" => {
            let rate = sec.rate.unwrap_or(1.0);
            let q = QCovariance::uniform(modes, rate)
                .map_err(|e| fail(format!("covariance: {e}")))?;
            Ok((q, format!("uniform rate {rate} over {modes} modes")))
        }
        "values" => {
            let values = sec
                .values
                .clone()
                .ok_or_else(|| fail("covariance.values is required for kind = \"values\""))?;
            if values.len() != modes {
                return Err(fail(format!(
                    "covariance.values has {} entries but the operator has {modes} modes",
                    values.len()
                )));
            }
            let q = QCovariance::from_values(values)
                .map_err(|e| fail(format!("covariance: {e}")))?;
            Ok((q, format!("explicit rates over {modes} modes")))
        }
        other => Err(fail(format!(
            "unknown covariance kind {other:?} (expected \"power\", \"uniform\", or \"values\")"
        ))),
    }
}
