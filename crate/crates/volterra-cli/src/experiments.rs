//! The experiment runners. Each returns an `ExperimentOutput` (report lines,
//! CSV artifacts, checks) or an error string when the run cannot proceed at
//! all; a failed check is not an error, it is a FAIL row in the summary.

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use volterra_core::convolution::{
    cauchy_derivative_residual, convolve_direct, convolve_reformulated,
    mild_identity_residual_bounded, weak_identity_residual,
};
use volterra_core::kernel::check_complete_positivity;
use volterra_core::regularity::{
    interpolation_norms, maximal_regularity_norms, path_modulus, skewness_z, spatial_regularity,
};
use volterra_core::resolvent::{
    build_resolvent_family, resolvent_residual, yosida_resolvent_convergence, ResolventFamily,
};
use volterra_core::wiener::{sample_wiener, NoisePath, MIN_ENSEMBLE};
use volterra_core::{HilbertPath, TimeGrid};

use crate::config::{Experiment, Resolved};
use crate::output::{fmt_f, Csv, ExperimentOutput};

const RESIDUAL_THRESHOLD: f64 = 1e-9;
const DRIFT_THRESHOLD: f64 = 0.2;
const SKEWNESS_THRESHOLD: f64 = 3.0;

/// One `run` invocation: caches resolvent families per grid, since several
/// experiments of an `all` run need the same family.
pub struct Session<'a> {
    pub cfg: &'a Resolved,
    families: RefCell<HashMap<usize, Rc<ResolventFamily>>>,
}

impl<'a> Session<'a> {
    pub fn new(cfg: &'a Resolved) -> Session<'a> {
        Session {
            cfg,
            families: RefCell::new(HashMap::new()),
        }
    }

    fn family(&self, grid: &TimeGrid) -> Result<Rc<ResolventFamily>, String> {
        let mut map = self.families.borrow_mut();
        if let Some(f) = map.get(&grid.steps()) {
            return Ok(f.clone());
        }
        let fam = build_resolvent_family(&self.cfg.operator, &self.cfg.kernel, grid)
            .map_err(|e| format!("resolvent family: {e}"))?;
        let fam = Rc::new(fam);
        map.insert(grid.steps(), fam.clone());
        Ok(fam)
    }

    fn noise(&self, grid: &TimeGrid, seed: u64) -> Result<NoisePath, String> {
        sample_wiener(&self.cfg.covariance, grid, seed).map_err(|e| format!("noise: {e}"))
    }
}

/// `a(0)` for the Cauchy reformulation, or why it is unavailable.
fn reformulation_coefficient(cfg: &Resolved) -> Result<f64, String> {
    match cfg.kernel.value_at_zero() {
        Some(c) if c != 0.0 => Ok(c),
        Some(_) => Err(format!(
            "kernel {} has a(0) = 0, and the Cauchy reformulation divides by a(0); \
             use the direct method",
            cfg.kernel_label
        )),
        None => Err(format!(
            "kernel {} leaves a(0) undefined (singular at zero), and the Cauchy \
             reformulation needs a finite a(0); use the direct method",
            cfg.kernel_label
        )),
    }
}

fn hilbert_csv(path: &HilbertPath) -> String {
    let mut header = String::from("mode");
    for t in path.grid().times() {
        header.push(',');
        header.push_str(&fmt_f(t));
    }
    let mut csv = Csv::new(&header);
    for k in 0..path.modes() {
        let cells = core::iter::once(k.to_string()).chain(path.row(k).iter().map(|&v| fmt_f(v)));
        csv.row(cells);
    }
    csv.finish()
}

pub fn run(experiment: Experiment, session: &Session) -> Result<ExperimentOutput, String> {
    match experiment {
        Experiment::CompletePositivity => complete_positivity(session),
        Experiment::ResolventBuild => resolvent_build(session),
        Experiment::YosidaConvergence => yosida_convergence(session),
        Experiment::ConvolutionCompare => convolution_compare(session),
        Experiment::Identities => identities(session),
        Experiment::Regularity => regularity(session),
        Experiment::All => unreachable!("expanded by the caller"),
    }
}

fn complete_positivity(session: &Session) -> Result<ExperimentOutput, String> {
    let cfg = session.cfg;
    let mut out = ExperimentOutput::new("complete-positivity");
    let working = cfg.grids[0];
    let refined = TimeGrid::new(working.horizon(), working.steps() * 2)
        .map_err(|e| format!("refined grid: {e}"))?;

    let mut csv = Csv::new("steps,mu,min_s,min_r,tolerance_s,tolerance_r,status");
    for grid in [working, refined] {
        let report = check_complete_positivity(&cfg.kernel, &cfg.mu, &grid)
            .map_err(|e| format!("positivity check: {e}"))?;
        let mut worst = f64::INFINITY;
        let mut tol = 0.0_f64;
        for e in &report.entries {
            csv.row([
                grid.steps().to_string(),
                fmt_f(e.mu),
                fmt_f(e.min_s),
                fmt_f(e.min_r),
                fmt_f(e.tolerance_s),
                fmt_f(e.tolerance_r),
                if e.nonnegative { "OK" } else { "NEG" }.to_string(),
            ]);
            worst = worst.min(e.min_s.min(e.min_r));
            tol = tol.max(e.tolerance_s.max(e.tolerance_r));
        }
        out.line(format!(
            "N = {}: min over {} couplings of min(s, r) = {}",
            grid.steps(),
            report.entries.len(),
            fmt_f(worst)
        ));
        out.check(
            format!("nonnegative-N{}", grid.steps()),
            worst,
            -tol,
            report.all_nonnegative,
        );
    }
    out.csv("positivity.csv", csv.finish());
    Ok(out)
}

fn resolvent_build(session: &Session) -> Result<ExperimentOutput, String> {
    let cfg = session.cfg;
    let mut out = ExperimentOutput::new("resolvent-build");
    let grid = cfg.grids[0];
    let fam = session.family(&grid)?;

    let mut header = String::from("mode");
    for t in grid.times() {
        header.push(',');
        header.push_str(&fmt_f(t));
    }
    let mut csv = Csv::new(&header);
    for k in 0..fam.modes() {
        let cells =
            core::iter::once(k.to_string()).chain(fam.row(k).values().iter().map(|&v| fmt_f(v)));
        csv.row(cells);
    }
    out.csv("resolvent.csv", csv.finish());

    for k in 0..fam.modes() {
        out.line(format!(
            "mode {k}: eigenvalue {}, internal refinement x{}",
            fmt_f(cfg.operator.eigenvalue(k)),
            fam.row(k).refinement()
        ));
    }
    out.line(format!("family sup norm: {}", fmt_f(fam.norm_sup())));

    let residual = resolvent_residual(&fam).map_err(|e| format!("residual: {e}"))?;
    out.check(
        "defining-equation-residual",
        residual,
        RESIDUAL_THRESHOLD,
        residual <= RESIDUAL_THRESHOLD,
    );
    Ok(out)
}

fn yosida_convergence(session: &Session) -> Result<ExperimentOutput, String> {
    let cfg = session.cfg;
    let mut out = ExperimentOutput::new("yosida-convergence");
    let grid = cfg.grids[0];
    let report = yosida_resolvent_convergence(&cfg.operator, &cfg.kernel, &grid, &cfg.yosida_n)
        .map_err(|e| format!("convergence study: {e}"))?;

    let mut csv = Csv::new("n,sup_difference,norm_sup");
    let mut max_norm = report.base_norm_sup;
    for level in &report.levels {
        csv.row([
            fmt_f(level.n),
            fmt_f(level.sup_difference),
            fmt_f(level.norm_sup),
        ]);
        out.line(format!(
            "n = {}: sup |regularized - base| = {}",
            level.n,
            fmt_f(level.sup_difference)
        ));
        max_norm = max_norm.max(level.norm_sup);
    }
    out.csv("yosida.csv", csv.finish());
    out.line(format!(
        "empirical growth bound: sup norm {} across base and all regularizations",
        fmt_f(max_norm)
    ));

    out.check(
        "uniformly-decreasing",
        if report.strictly_decreasing { 1.0 } else { 0.0 },
        1.0,
        report.strictly_decreasing,
    );
    out.check("growth-bound", max_norm, 1.0 + 1e-9, max_norm <= 1.0 + 1e-9);
    Ok(out)
}

fn convolution_compare(session: &Session) -> Result<ExperimentOutput, String> {
    let cfg = session.cfg;
    let mut out = ExperimentOutput::new("convolution-compare");
    reformulation_coefficient(cfg)?;

    out.line(format!(
        "kernel {}, K = {}, seed {}",
        cfg.kernel_label,
        cfg.operator.dimension(),
        cfg.seed
    ));

    let mut gaps = Vec::with_capacity(cfg.grids.len());
    let mut csv = Csv::new("level,steps,dt,sup_discrepancy");
    let mut finest = None;
    for (l, grid) in cfg.grids.iter().enumerate() {
        let noise = session.noise(grid, cfg.seed)?;
        let fam = session.family(grid)?;
        let direct = convolve_direct(&fam, &noise).map_err(|e| format!("direct: {e}"))?;
        let (reform, _, _) = convolve_reformulated(&cfg.operator, &cfg.kernel, &noise)
            .map_err(|e| format!("reformulated: {e}"))?;
        let gap = direct
            .w_s
            .sup_distance(&reform.w_s)
            .map_err(|e| e.to_string())?;
        csv.row([
            l.to_string(),
            grid.steps().to_string(),
            fmt_f(grid.dt()),
            fmt_f(gap),
        ]);
        out.line(format!(
            "level {l}: N = {}, dt = {}, sup discrepancy = {}",
            grid.steps(),
            fmt_f(grid.dt()),
            fmt_f(gap)
        ));
        gaps.push(gap);
        finest = Some((direct.w_s, reform.w_s));
    }
    out.csv("discrepancy.csv", csv.finish());

    let (dw, rw) = finest.expect("at least one level");
    out.csv("ws_direct.csv", hilbert_csv(&dw));
    out.csv("ws_reformulated.csv", hilbert_csv(&rw));
    let mut trace = Csv::new("t,discrepancy");
    for (i, t) in dw.grid().times().enumerate() {
        let sq: f64 = (0..dw.modes())
            .map(|k| {
                let d = dw.value(k, i) - rw.value(k, i);
                d * d
            })
            .sum();
        trace.row([fmt_f(t), fmt_f(sq.sqrt())]);
    }
    out.csv("discrepancy_trace.csv", trace.finish());

    for (l, &gap) in gaps.iter().enumerate() {
        out.check(format!("sup-discrepancy-level-{l}"), gap, gaps[0], gap <= gaps[0]);
    }
    if gaps.len() >= 2 {
        let worst_ratio = gaps
            .windows(2)
            .map(|w| w[1] / w[0])
            .fold(f64::NEG_INFINITY, f64::max);
        out.check("discrepancy-decreases", worst_ratio, 1.0, worst_ratio < 1.0);
    }
    Ok(out)
}

fn identities(session: &Session) -> Result<ExperimentOutput, String> {
    let cfg = session.cfg;
    let mut out = ExperimentOutput::new("identities");
    let reform_c = match reformulation_coefficient(cfg) {
        Ok(c) => Some(c),
        Err(why) => {
            out.line(format!("derivative check skipped: {why}"));
            None
        }
    };
    if !cfg.operator.is_bounded() {
        out.line(
            "norm-form residual skipped: operator is unbounded (set operator.yosida to enable)"
                .to_string(),
        );
    }

    let mut weak = Vec::new();
    let mut mild = Vec::new();
    let mut cauchy = Vec::new();
    let mut csv = Csv::new("level,steps,weak_residual,norm_residual,derivative_residual");
    for (l, grid) in cfg.grids.iter().enumerate() {
        let noise = session.noise(grid, cfg.seed)?;
        let fam = session.family(grid)?;
        let direct = convolve_direct(&fam, &noise).map_err(|e| format!("direct: {e}"))?;

        let mut w = 0.0_f64;
        for k in 0..cfg.operator.dimension() {
            w = w.max(
                weak_identity_residual(&cfg.operator, &cfg.kernel, &direct, &noise, k)
                    .map_err(|e| format!("weak residual: {e}"))?,
            );
        }
        weak.push(w);

        let m = if cfg.operator.is_bounded() {
            let r = mild_identity_residual_bounded(&cfg.operator, &cfg.kernel, &direct, &noise)
                .map_err(|e| format!("norm residual: {e}"))?;
            mild.push(r);
            fmt_f(r)
        } else {
            String::new()
        };

        let c = if let Some(a0) = reform_c {
            let (_, state, memory) = convolve_reformulated(&cfg.operator, &cfg.kernel, &noise)
                .map_err(|e| format!("reformulated: {e}"))?;
            let r = cauchy_derivative_residual(&state, &cfg.operator, &memory, &noise, a0)
                .map_err(|e| format!("derivative residual: {e}"))?;
            cauchy.push(r);
            fmt_f(r)
        } else {
            String::new()
        };

        csv.row([l.to_string(), grid.steps().to_string(), fmt_f(w), m, c]);
        out.line(format!(
            "level {l}: N = {}, max weak residual over modes = {}",
            grid.steps(),
            fmt_f(w)
        ));
    }
    out.csv("identities.csv", csv.finish());

    let decrease = |name: &str, values: &[f64], out: &mut ExperimentOutput| {
        if values.len() >= 2 {
            let first = values[0];
            let last = values[values.len() - 1];
            out.check(
                format!("{name}-decreases"),
                last / first,
                1.0,
                last < first,
            );
        } else if let Some(&only) = values.first() {
            out.check(format!("{name}-finite"), only, f64::INFINITY, only.is_finite());
        }
    };
    decrease("weak-residual", &weak, &mut out);
    if !mild.is_empty() {
        decrease("norm-residual", &mild, &mut out);
    }
    if !cauchy.is_empty() {
        decrease("derivative-residual", &cauchy, &mut out);
    }
    Ok(out)
}

fn regularity(session: &Session) -> Result<ExperimentOutput, String> {
    let cfg = session.cfg;
    let mut out = ExperimentOutput::new("regularity");

    let mut paths = Vec::with_capacity(cfg.grids.len());
    for grid in &cfg.grids {
        let noise = session.noise(grid, cfg.seed)?;
        let fam = session.family(grid)?;
        paths.push(
            convolve_direct(&fam, &noise)
                .map_err(|e| format!("direct: {e}"))?
                .w_s,
        );
    }

    let modulus = path_modulus(&paths).map_err(|e| format!("modulus: {e}"))?;
    let mut csv = Csv::new("level,steps,dt,max_increment");
    for (l, level) in modulus.levels.iter().enumerate() {
        csv.row([
            l.to_string(),
            cfg.grids[l].steps().to_string(),
            fmt_f(level.dt),
            fmt_f(level.max_increment),
        ]);
    }
    out.csv("modulus.csv", csv.finish());
    match (modulus.exponent, modulus.regression_rms) {
        (Some(e), Some(rms)) => out.line(format!(
            "empirical modulus exponent: {e:.4} (regression rms {rms:.2e}); diagnostic only, never asserted"
        )),
        _ => out.line("empirical modulus exponent: undefined (a level had zero increment)".to_string()),
    }
    out.check(
        "modulus-decreasing",
        if modulus.strictly_decreasing { 1.0 } else { 0.0 },
        1.0,
        modulus.strictly_decreasing,
    );

    let finest = paths.last().expect("at least two levels");
    let mut spatial_csv = Csv::new("gamma,max_increment,endpoint_norm,all_finite");
    let mut sums_csv = Csv::new("gamma,modes,partial_sum");
    for &gamma in &cfg.gammas {
        let report = spatial_regularity(&cfg.operator, gamma, finest, &cfg.covariance)
            .map_err(|e| format!("spatial: {e}"))?;
        spatial_csv.row([
            fmt_f(gamma),
            fmt_f(report.max_increment),
            fmt_f(report.norm_path.value(report.norm_path.len() - 1)),
            report.all_finite.to_string(),
        ]);
        for (k, &s) in report.partial_sums.iter().enumerate() {
            sums_csv.row([fmt_f(gamma), (k + 1).to_string(), fmt_f(s)]);
        }
        out.check(
            format!("spatial-finite-gamma-{gamma}"),
            if report.all_finite { 1.0 } else { 0.0 },
            1.0,
            report.all_finite,
        );
    }
    out.csv("spatial.csv", spatial_csv.finish());
    out.csv("spatial_partial_sums.csv", sums_csv.finish());

    match reformulation_coefficient(cfg) {
        Err(why) => out.line(format!("trajectory norm checks skipped: {why}")),
        Ok(_) => {
            let mut interp_csv = Csv::new(
                "gamma,level,steps,slobodeckij,l2,w_gamma,da_gamma_l2,forcing_l2,m_hat",
            );
            let mut maximal_csv = Csv::new("level,steps,difference_quotient_l2,l2,w12,ay_l2");
            let mut m_hats: HashMap<u64, Vec<f64>> = HashMap::new();
            let mut w_norms = Vec::new();
            for (l, grid) in cfg.grids.iter().enumerate() {
                let noise = session.noise(grid, cfg.seed)?;
                let (_, state, memory) =
                    convolve_reformulated(&cfg.operator, &cfg.kernel, &noise)
                        .map_err(|e| format!("reformulated: {e}"))?;
                let forcing = noise
                    .to_hilbert_path()
                    .add_scaled(1.0, &memory.w_tilde)
                    .map_err(|e| e.to_string())?;
                for &gamma in &cfg.gammas {
                    let r = interpolation_norms(&state.y, &cfg.operator, gamma, &forcing)
                        .map_err(|e| format!("interpolation: {e}"))?;
                    interp_csv.row([
                        fmt_f(gamma),
                        l.to_string(),
                        grid.steps().to_string(),
                        fmt_f(r.slobodeckij_seminorm),
                        fmt_f(r.l2_norm),
                        fmt_f(r.w_gamma_norm),
                        fmt_f(r.da_gamma_l2_norm),
                        fmt_f(r.forcing_l2_norm),
                        fmt_f(r.m_hat),
                    ]);
                    m_hats.entry(gamma.to_bits()).or_default().push(r.m_hat);
                }
                let m = maximal_regularity_norms(&state.y, &cfg.operator)
                    .map_err(|e| format!("maximal: {e}"))?;
                maximal_csv.row([
                    l.to_string(),
                    grid.steps().to_string(),
                    fmt_f(m.difference_quotient_l2),
                    fmt_f(m.l2_norm),
                    fmt_f(m.w12_norm),
                    fmt_f(m.ay_l2_norm),
                ]);
                w_norms.push(m.w12_norm + m.ay_l2_norm);
            }
            out.csv("interpolation.csv", interp_csv.finish());
            out.csv("maximal.csv", maximal_csv.finish());

            let drift = |values: &[f64]| {
                let a = values[values.len() - 2];
                let b = values[values.len() - 1];
                if a == 0.0 && b == 0.0 {
                    0.0
                } else {
                    (b / a - 1.0).abs()
                }
            };
            for &gamma in &cfg.gammas {
                let series = &m_hats[&gamma.to_bits()];
                let d = drift(series);
                out.check(
                    format!("m-hat-drift-gamma-{gamma}"),
                    d,
                    DRIFT_THRESHOLD,
                    d < DRIFT_THRESHOLD,
                );
            }
            let d = drift(&w_norms);
            out.check("maximal-drift", d, DRIFT_THRESHOLD, d < DRIFT_THRESHOLD);
        }
    }

    if cfg.ensemble >= MIN_ENSEMBLE {
        let grid = cfg.grids[0];
        let fam = session.family(&grid)?;
        let modes = cfg.operator.dimension();
        let mut endpoint = vec![Vec::with_capacity(cfg.ensemble); modes];
        for i in 0..cfg.ensemble {
            let noise = session.noise(&grid, cfg.seed.wrapping_add(1 + i as u64))?;
            let ws = convolve_direct(&fam, &noise)
                .map_err(|e| format!("direct: {e}"))?
                .w_s;
            for (k, row) in endpoint.iter_mut().enumerate() {
                row.push(ws.value(k, grid.steps()));
            }
        }
        let mut gauss_csv = Csv::new("mode,skewness_z");
        let mut max_z = 0.0_f64;
        for (k, row) in endpoint.iter().enumerate() {
            let z = skewness_z(row).map_err(|e| format!("skewness: {e}"))?;
            gauss_csv.row([k.to_string(), fmt_f(z)]);
            max_z = max_z.max(z.abs());
        }
        out.csv("gaussianity.csv", gauss_csv.finish());
        out.line(format!(
            "endpoint skewness over {} samples: max |z| = {}",
            cfg.ensemble,
            fmt_f(max_z)
        ));
        out.check(
            "gaussianity-3sigma",
            max_z,
            SKEWNESS_THRESHOLD,
            max_z <= SKEWNESS_THRESHOLD,
        );
    } else {
        out.line(format!(
            "gaussianity check skipped: run.ensemble = {} is below the minimum {}",
            cfg.ensemble, MIN_ENSEMBLE
        ));
    }
    Ok(out)
}
