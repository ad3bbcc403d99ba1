//! Artifact writing: report.txt, per-experiment CSVs, and the machine
//! readable summary.csv. Everything except the timestamp line is a pure
//! function of the config, so identical configs reproduce identical bytes.

use std::fs;
use std::io;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

/// 17 significant digits: enough to round-trip an f64 exactly.
pub fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, threshold: f64, pass: bool) -> Check {
        Check {
            name: name.into(),
            value,
            threshold,
            pass,
        }
    }

    pub fn status(&self) -> &'static str {
        if self.pass {
            "PASS"
        } else {
            "FAIL"
        }
    }
}

#[derive(Debug, Default)]
pub struct ExperimentOutput {
    pub name: &'static str,
    pub lines: Vec<String>,
    /// (file name, file content) pairs, written verbatim.
    pub csvs: Vec<(String, String)>,
    pub checks: Vec<Check>,
}

impl ExperimentOutput {
    pub fn new(name: &'static str) -> ExperimentOutput {
        ExperimentOutput {
            name,
            ..ExperimentOutput::default()
        }
    }

    pub fn line(&mut self, text: impl Into<String>) {
        self.lines.push(text.into());
    }

    pub fn check(&mut self, name: impl Into<String>, value: f64, threshold: f64, pass: bool) {
        self.checks.push(Check::new(name, value, threshold, pass));
    }

    pub fn csv(&mut self, file: impl Into<String>, content: String) {
        self.csvs.push((file.into(), content));
    }
}

/// Incremental CSV builder; rows are joined with commas, lines with \n.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &str) -> Csv {
        let mut text = String::from(header);
        text.push('\n');
        Csv { text }
    }

    pub fn row<I: IntoIterator<Item = String>>(&mut self, cells: I) {
        let mut first = true;
        for cell in cells {
            if !first {
                self.text.push(',');
            }
            self.text.push_str(&cell);
            first = false;
        }
        self.text.push('\n');
    }

    pub fn finish(self) -> String {
        self.text
    }
}

pub struct RunHeader {
    pub config_path: String,
    pub experiment: String,
    pub operator: String,
    pub kernel: String,
    pub covariance: String,
    pub grid: String,
    pub seed: u64,
    pub ensemble: usize,
}

/// Writes all artifacts and returns the number of failed checks.
pub fn write_artifacts(
    dir: &Path,
    header: &RunHeader,
    outputs: &[ExperimentOutput],
) -> io::Result<usize> {
    fs::create_dir_all(dir)?;

    let mut report = String::new();
    report.push_str("volterra run report\n");
    let stamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    report.push_str(&format!("timestamp: {stamp} (unix seconds)\n"));
    report.push_str(&format!("config: {}\n", header.config_path));
    report.push_str(&format!("experiment: {}\n", header.experiment));
    report.push_str(&format!("operator: {}\n", header.operator));
    report.push_str(&format!("kernel: {}\n", header.kernel));
    report.push_str(&format!("covariance: {}\n", header.covariance));
    report.push_str(&format!("grid: {}\n", header.grid));
    report.push_str(&format!("seed: {}\n", header.seed));
    report.push_str(&format!("ensemble: {}\n", header.ensemble));

    let mut summary = Csv::new("experiment,check,value,threshold,status");
    let mut failures = 0usize;
    for out in outputs {
        report.push_str(&format!("\n== {} ==\n", out.name));
        for line in &out.lines {
            report.push_str(line);
            report.push('\n');
        }
        for check in &out.checks {
            report.push_str(&format!(
                "check {}: {} (value {}, threshold {})\n",
                check.name,
                check.status(),
                fmt_f(check.value),
                fmt_f(check.threshold)
            ));
            summary.row([
                out.name.to_string(),
                check.name.clone(),
                fmt_f(check.value),
                fmt_f(check.threshold),
                check.status().to_string(),
            ]);
            if !check.pass {
                failures += 1;
            }
        }
        for (file, content) in &out.csvs {
            fs::write(dir.join(file), content)?;
        }
    }

    let total: usize = outputs.iter().map(|o| o.checks.len()).sum();
    report.push_str(&format!(
        "\nsummary: {total} checks, {} PASS, {failures} FAIL\n",
        total - failures
    ));

    fs::write(dir.join("report.txt"), report)?;
    fs::write(dir.join("summary.csv"), summary.finish())?;
    Ok(failures)
}
