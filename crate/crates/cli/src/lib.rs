//! Batch front end: reads a potential config, runs one command and writes CSV.
//!
//! Every CSV starts with `# key=value` metadata lines followed by a header row.
//! Real-axis sweeps are evaluated at `k + i·1e-9`. Output is deterministic.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use lowk_core::expansion::{green_coeffs, MAX_GREEN_ORDER};
use lowk_core::generic::{generic_green_coeffs, SchrodingerProfile, MAX_GENERIC_ORDER};
use lowk_core::potential::PotentialProfile;
use lowk_core::scattering::{band_edges, bloch, exact_green, real_k_warnings};
use num_complex::Complex64;

/// Imaginary offset for real-axis evaluation (limit from above).
pub const K_IMAG_OFFSET: f64 = 1e-9;
/// `||Y| − 1|` below this flags a k-point as close to a band edge.
pub const BAND_EDGE_WARNING: f64 = 1e-3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Potential { path: String, source: lowk_core::error::Error },
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] lowk_core::error::Error),
    #[error("cannot write output: {0}")]
    Write(#[from] std::io::Error),
    #[error("cannot write CSV: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Expand,
    Exact,
    Compare,
    Bands,
    Generic,
}

impl FromStr for Command {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "expand" => Ok(Self::Expand),
            "exact" => Ok(Self::Exact),
            "compare" => Ok(Self::Compare),
            "bands" => Ok(Self::Bands),
            "generic" => Ok(Self::Generic),
            other => Err(CliError::Config(format!(
                "unknown command '{other}' (expected expand, exact, compare, bands or generic)"
            ))),
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Expand => "expand",
            Self::Exact => "exact",
            Self::Compare => "compare",
            Self::Bands => "bands",
            Self::Generic => "generic",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub potential_path: PathBuf,
    pub x: Option<f64>,
    pub y: Option<f64>,
    pub k_min: f64,
    pub k_max: f64,
    pub k_steps: usize,
    pub order: i32,
    /// `None` writes to stdout.
    pub output_path: Option<PathBuf>,
}

impl RunConfig {
    fn points(&self) -> Result<(f64, f64)> {
        let (x, y) = match (self.x, self.y) {
            (Some(x), Some(y)) => (x, y),
            _ => return Err(CliError::Config(format!("'{}' needs --x and --y", self.command))),
        };
        if !(x.is_finite() && y.is_finite()) || x < y {
            return Err(CliError::Config(format!("needs finite x >= y (got x = {x}, y = {y})")));
        }
        Ok((x, y))
    }

    fn sweep(&self) -> Result<()> {
        if !(self.k_min < self.k_max) {
            return Err(CliError::Config(format!("needs k_min < k_max (got {} and {})", self.k_min, self.k_max)));
        }
        if self.k_steps < 2 {
            return Err(CliError::Config(format!("needs k_steps >= 2 (got {})", self.k_steps)));
        }
        Ok(())
    }

    /// Checks the invariants that apply to the chosen command.
    pub fn validate(&self) -> Result<()> {
        match self.command {
            Command::Expand | Command::Generic => {
                self.points()?;
                let (lo, hi) =
                    if self.command == Command::Expand { (-1, MAX_GREEN_ORDER) } else { (0, MAX_GENERIC_ORDER) };
                if !(lo..=hi).contains(&self.order) {
                    return Err(CliError::Config(format!(
                        "'{}' supports orders {lo}..={hi} (got {})",
                        self.command, self.order
                    )));
                }
            }
            Command::Exact => {
                self.points()?;
                self.sweep()?;
            }
            Command::Compare => {
                self.points()?;
                self.sweep()?;
                if !(self.k_min > 0.0) {
                    return Err(CliError::Config("'compare' uses a logarithmic sweep and needs k_min > 0".into()));
                }
                if !(-1..=MAX_GREEN_ORDER).contains(&self.order) {
                    return Err(CliError::Config(format!(
                        "'compare' supports orders -1..={MAX_GREEN_ORDER} (got {})",
                        self.order
                    )));
                }
            }
            Command::Bands => {
                if !(self.k_max > 0.0) {
                    return Err(CliError::Config("'bands' needs k_max > 0".into()));
                }
            }
        }
        Ok(())
    }
}

pub fn load_potential(path: &Path) -> Result<PotentialProfile> {
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read { path: shown.clone(), source })?;
    text.parse().map_err(|source| CliError::Potential { path: shown, source })
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// A CSV document: metadata, header and rows.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), ..Self::default() }
    }

    fn meta(&mut self, key: &str, value: impl ToString) {
        self.meta.push((key.to_string(), value.to_string()));
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut out = String::new();
        for (k, v) in &self.meta {
            out.push_str(&format!("# {k}={v}\n"));
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        let body = w.into_inner().map_err(|e| CliError::Write(e.into_error()))?;
        out.push_str(&String::from_utf8(body).expect("CSV is UTF-8"));
        Ok(out)
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    linspace(a.ln(), b.ln(), n).into_iter().map(f64::exp).collect()
}

/// Warnings for a real-axis point: band-edge proximity in either tail.
fn k_warnings(profile: &PotentialProfile, k: Complex64) -> Vec<String> {
    let mut out = real_k_warnings(profile, k);
    for (name, tail) in [("left", profile.left_tail()), ("right", profile.right_tail())] {
        if let Ok(b) = bloch(tail, k) {
            let gap = (b.y.re.abs() - 1.0).abs();
            let msg = format!("{name} tail within {BAND_EDGE_WARNING:e} of a band edge");
            if gap < BAND_EDGE_WARNING && !out.contains(&msg) {
                out.push(msg);
            }
        }
    }
    out
}

fn common_meta(t: &mut Table, config: &RunConfig) {
    t.meta("command", config.command);
    t.meta("potential", config.potential_path.display());
    if let (Some(x), Some(y)) = (config.x, config.y) {
        t.meta("x", num(x));
        t.meta("y", num(y));
    }
}

fn expand(config: &RunConfig, profile: &PotentialProfile) -> Result<Table> {
    let (x, y) = config.points()?;
    let r = green_coeffs(profile, x, y, config.order)?;
    let mut t = Table::new(&["order", "g", "provenance", "warnings"]);
    common_meta(&mut t, config);
    t.meta("max_order", config.order);
    for (n, g) in &r.g {
        let prov = r.provenance.get(n).map(|p| format!("{p:?}")).unwrap_or_default();
        t.rows.push(vec![n.to_string(), num(*g), prov, String::new()]);
    }
    Ok(t)
}

fn exact(config: &RunConfig, profile: &PotentialProfile) -> Result<Table> {
    let (x, y) = config.points()?;
    let mut t = Table::new(&["k", "re_g", "im_g", "warnings"]);
    common_meta(&mut t, config);
    t.meta("k_imag_offset", format!("{K_IMAG_OFFSET:e}"));
    for k in linspace(config.k_min, config.k_max, config.k_steps) {
        let kc = Complex64::new(k, K_IMAG_OFFSET);
        let mut warnings = k_warnings(profile, kc);
        let g = exact_green(profile, x, y, kc).unwrap_or_else(|e| {
            warnings.push(e.to_string());
            Complex64::new(f64::NAN, f64::NAN)
        });
        t.rows.push(vec![num(k), num(g.re), num(g.im), warnings.join("; ")]);
    }
    Ok(t)
}

/// Least-squares slope of `log r` against `log k` over finite, positive residuals.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        points.iter().filter(|(k, r)| *k > 0.0 && *r > 0.0 && r.is_finite()).map(|(k, r)| (k.ln(), r.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx)
}

fn compare(config: &RunConfig, profile: &PotentialProfile) -> Result<Table> {
    let (x, y) = config.points()?;
    let r = green_coeffs(profile, x, y, config.order)?;
    let mut t = Table::new(&["k", "re_exact", "im_exact", "re_partial", "im_partial", "residual", "warnings"]);
    let mut rows = Vec::new();
    let mut pts = Vec::new();
    for k in logspace(config.k_min, config.k_max, config.k_steps) {
        let kc = Complex64::new(k, K_IMAG_OFFSET);
        let mut warnings = k_warnings(profile, kc);
        let g = exact_green(profile, x, y, kc).unwrap_or_else(|e| {
            warnings.push(e.to_string());
            Complex64::new(f64::NAN, f64::NAN)
        });
        let s = r.partial_sum(kc);
        let res = (g - s).norm();
        pts.push((k, res));
        rows.push(vec![num(k), num(g.re), num(g.im), num(s.re), num(s.im), num(res), warnings.join("; ")]);
    }
    common_meta(&mut t, config);
    t.meta("k_imag_offset", format!("{K_IMAG_OFFSET:e}"));
    t.meta("max_order", config.order);
    t.meta("remainder_slope", log_log_slope(&pts).map(num).unwrap_or_else(|| "nan".into()));
    t.meta("expected_slope", config.order + 1);
    t.rows = rows;
    Ok(t)
}

fn bands(config: &RunConfig, profile: &PotentialProfile) -> Result<Table> {
    let mut t = Table::new(&["tail", "index", "k_edge", "warnings"]);
    common_meta(&mut t, config);
    t.meta("k_max", num(config.k_max));
    let tails = if profile.left_tail() == profile.right_tail() {
        vec![("both", profile.left_tail())]
    } else {
        vec![("left", profile.left_tail()), ("right", profile.right_tail())]
    };
    for (name, tail) in tails {
        for (i, k) in band_edges(tail, config.k_max)?.into_iter().enumerate() {
            t.rows.push(vec![name.to_string(), (i + 1).to_string(), num(k), String::new()]);
        }
    }
    Ok(t)
}

fn generic(config: &RunConfig, profile: &PotentialProfile) -> Result<Table> {
    let (x, y) = config.points()?;
    let sp = SchrodingerProfile::new(profile.clone())?;
    let r = generic_green_coeffs(&sp, x, y, config.order)?;
    let mut t = Table::new(&["quantity", "value", "provenance", "warnings"]);
    common_meta(&mut t, config);
    t.meta("max_order", config.order);
    t.rows.push(vec!["e0".into(), num(sp.energy_offset()), "BandBottom".into(), String::new()]);
    for (n, g) in &r.g {
        let prov = r.provenance.get(n).map(|p| format!("{p:?}")).unwrap_or_default();
        t.rows.push(vec![format!("g{n}"), num(*g), prov, String::new()]);
    }
    Ok(t)
}

/// Runs a validated configuration and returns the table it produces.
pub fn execute(config: &RunConfig) -> Result<Table> {
    config.validate()?;
    let profile = load_potential(&config.potential_path)?;
    match config.command {
        Command::Expand => expand(config, &profile),
        Command::Exact => exact(config, &profile),
        Command::Compare => compare(config, &profile),
        Command::Bands => bands(config, &profile),
        Command::Generic => generic(config, &profile),
    }
}

/// Runs a configuration and writes its CSV to the output path or stdout.
pub fn run(config: &RunConfig) -> Result<()> {
    let csv = execute(config)?.to_csv()?;
    match &config.output_path {
        Some(p) => std::fs::write(p, csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}
