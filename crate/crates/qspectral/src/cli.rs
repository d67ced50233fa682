//! Command-line front end. Every subcommand reads an optional JSON config file
//! and lets flags override it. Exit codes: 0 pass, 1 verification failure,
//! 2 usage or domain error.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::eigenfunctions::{c_fn, d_fn, f_k, u_k, v_k, EigenParams, SpectralParam};
use crate::jacobi::{JacobiOperator, Regime};
use crate::qcore::theta;
use crate::quadratic::{phi_gamma, quadratic_suite, BigQJacobiParams};
use crate::spectrum::{discrete_mass, fit_quadratic_grids, locate_discrete, GridFit, RegimeSummary, SpectralMeasure};
use crate::transforms::{orthogonality_matrix, psi_at, q_exponential, q_limit_grid, MeasureOptions, QExponentialParams};
use crate::verify::{self, SuiteReport};
use crate::{Complex, QBase};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Library(#[from] crate::Error),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("config: {0}")]
    Config(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Debug, Parser)]
#[command(name = "qspectral", version, about = "Spectral computations for a q-hypergeometric Jacobi operator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one function (u, v, F, c, d, theta, qexp, phi_gamma, psi).
    Eval(EvalArgs),
    /// Density CSV over a chi grid and the spectral-measure JSON.
    Spectrum(SpectrumArgs),
    /// Orthogonality matrix G_kl as CSV.
    Orthogonality(OrthogonalityArgs),
    /// Mass points and masses in an x window, as JSON.
    Masspoints(MasspointsArgs),
    /// Residuals of the quadratic-transformation identities, as CSV.
    Quadcheck(QuadcheckArgs),
    /// q-exponential against exp(lambda z) for q -> 1, as CSV.
    #[command(name = "qexp-limit")]
    QexpLimit(QexpLimitArgs),
    /// Run a verification suite and write {suite, cases, max_residual, pass}.
    Verify(VerifyArgs),
}

/// Options shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// JSON config file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Symmetrization regime, 1 or 2.
    #[arg(long)]
    pub case: Option<u8>,
    #[arg(long, allow_hyphen_values = true)]
    pub psi: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub r: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub s: Option<f64>,
    /// Complex, written as "re+imi".
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<String>,
    #[arg(long)]
    pub q: Option<f64>,
    /// Extension angle.
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<f64>,
    /// Output file; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// u, v, F, c, d, theta, qexp, phi_gamma or psi.
    #[arg(long = "fn")]
    pub function: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub k: Option<i32>,
    #[arg(long, allow_hyphen_values = true)]
    pub y: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub z: Option<String>,
    /// Real spectral variable of psi.
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<f64>,
    /// Parameter a, used instead of a regime.
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<String>,
    /// phi_gamma at the even or odd specialization of the regime parameters.
    #[arg(long)]
    pub specialization: Option<String>,
    #[arg(long = "jacobi-a", allow_hyphen_values = true)]
    pub jacobi_a: Option<String>,
    #[arg(long = "jacobi-b", allow_hyphen_values = true)]
    pub jacobi_b: Option<String>,
    #[arg(long = "jacobi-c", allow_hyphen_values = true)]
    pub jacobi_c: Option<String>,
    #[arg(long = "jacobi-x", allow_hyphen_values = true)]
    pub jacobi_x: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<String>,
    /// csv or json.
    #[arg(long)]
    pub format: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Number of chi samples in (0, pi).
    #[arg(long)]
    pub resolution: Option<usize>,
    /// Mass points are searched in 1 < |x| <= x_max.
    #[arg(long)]
    pub x_max: Option<f64>,
    /// Index k of the reported mass m_kk.
    #[arg(long, allow_hyphen_values = true)]
    pub mass_index: Option<i32>,
    /// Directory for density.csv and spectrum.json.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct OrthogonalityArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub k_lo: Option<i32>,
    #[arg(long, allow_hyphen_values = true)]
    pub k_hi: Option<i32>,
    /// Absolute tolerance of the continuous part.
    #[arg(long)]
    pub quad_tol: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct MasspointsArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub x_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub x_max: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub k: Option<i32>,
    #[arg(long, allow_hyphen_values = true)]
    pub l: Option<i32>,
}

#[derive(Debug, Clone, Args)]
pub struct QuadcheckArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct QexpLimitArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Comma-separated bases; default 0.9,0.99.
    #[arg(long)]
    pub bases: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// recurrence, connection, wronskian, extension, quadratic, orthogonality,
    /// inversion, discrete, resolvent, qexp-limit, boundary, oracle or all.
    pub suite: Option<String>,
    #[command(flatten)]
    pub common: CommonArgs,
    /// Also write the report here.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub draws: Option<usize>,
    /// List every check on stderr, not only failures.
    #[arg(long)]
    pub verbose: bool,
}

/// Config file contents. Every entry is optional; complex values are numbers or
/// "re+imi" strings.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub case: Option<u8>,
    pub psi: Option<f64>,
    pub r: Option<f64>,
    pub s: Option<f64>,
    pub t: Option<ComplexValue>,
    pub q: Option<f64>,
    pub theta: Option<f64>,
    pub output: Option<PathBuf>,
    #[serde(rename = "fn")]
    pub function: Option<String>,
    pub k: Option<i32>,
    pub l: Option<i32>,
    pub y: Option<ComplexValue>,
    pub z: Option<ComplexValue>,
    pub x: Option<f64>,
    pub a: Option<ComplexValue>,
    pub specialization: Option<String>,
    pub jacobi_a: Option<ComplexValue>,
    pub jacobi_b: Option<ComplexValue>,
    pub jacobi_c: Option<ComplexValue>,
    pub jacobi_x: Option<ComplexValue>,
    pub gamma: Option<ComplexValue>,
    pub format: Option<String>,
    pub resolution: Option<usize>,
    pub x_min: Option<f64>,
    pub x_max: Option<f64>,
    pub mass_index: Option<i32>,
    pub out_dir: Option<PathBuf>,
    pub k_lo: Option<i32>,
    pub k_hi: Option<i32>,
    pub quad_tol: Option<f64>,
    pub bases: Option<Vec<f64>>,
    pub suite: Option<String>,
    pub report: Option<PathBuf>,
    pub seed: Option<u64>,
    pub draws: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ComplexValue {
    Real(f64),
    Text(String),
}

impl ComplexValue {
    fn resolve(&self) -> CliResult<Complex> {
        match self {
            ComplexValue::Real(v) => Ok(Complex::new(*v, 0.0)),
            ComplexValue::Text(s) => parse_complex(s).map_err(usage),
        }
    }
}

/// Parses "1.5", "-0.4", "0.3+0.2i", "2e-3-1e-1i", "i" or "-2i".
pub fn parse_complex(text: &str) -> Result<Complex, String> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("cannot parse complex number {text:?}; expected re+imi");
    let num = |p: &str| p.parse::<f64>().map_err(|_| bad());
    let Some(body) = s.strip_suffix(['i', 'j']) else {
        return Ok(Complex::new(num(&s)?, 0.0));
    };
    // The sign that separates the parts is the last one not opening an exponent.
    let bytes = body.as_bytes();
    let split = (1..bytes.len()).rev().find(|&i| matches!(bytes[i], b'+' | b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(i) => (num(&body[..i])?, &body[i..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        other => num(other)?,
    };
    Ok(Complex::new(re, im))
}

/// `x` with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

fn load_config(path: Option<&Path>) -> CliResult<RunConfig> {
    let Some(path) = path else { return Ok(RunConfig::default()) };
    let text = fs::read_to_string(path).map_err(|e| CliError::Io { path: path.display().to_string(), source: e })?;
    Ok(serde_json::from_str(&text)?)
}

fn complex_opt(flag: &Option<String>, cfg: &Option<ComplexValue>) -> CliResult<Option<Complex>> {
    match (flag, cfg) {
        (Some(s), _) => parse_complex(s).map(Some).map_err(usage),
        (None, Some(v)) => v.resolve().map(Some),
        (None, None) => Ok(None),
    }
}

/// Regime and base after merging flags over the config.
struct Setting {
    cfg: RunConfig,
    common: CommonArgs,
}

const DEFAULT_Q: f64 = 0.5;

impl Setting {
    fn new(common: &CommonArgs) -> CliResult<Self> {
        Ok(Setting { cfg: load_config(common.config.as_deref())?, common: common.clone() })
    }

    fn q(&self) -> CliResult<QBase> {
        Ok(QBase::new(self.common.q.or(self.cfg.q).unwrap_or(DEFAULT_Q))?)
    }

    fn theta(&self) -> Option<f64> {
        self.common.theta.or(self.cfg.theta)
    }

    fn t(&self) -> CliResult<Option<Complex>> {
        complex_opt(&self.common.t, &self.cfg.t)
    }

    fn output(&self) -> Option<PathBuf> {
        self.common.output.clone().or_else(|| self.cfg.output.clone())
    }

    fn regime_given(&self) -> bool {
        let (c, f) = (&self.common, &self.cfg);
        c.case.or(f.case).is_some() || c.psi.or(f.psi).or(c.r).or(f.r).or(c.s).or(f.s).is_some()
    }

    /// Case 1 defaults to `ψ = 0.4, r = 3`, case 2 to `s = 1.5, t = −0.4`.
    fn regime(&self) -> CliResult<Regime> {
        let (c, f) = (&self.common, &self.cfg);
        let (psi, r, s) = (c.psi.or(f.psi), c.r.or(f.r), c.s.or(f.s));
        let t = self.t()?;
        let case = match c.case.or(f.case) {
            Some(n) => n,
            None if psi.is_some() || r.is_some() => 1,
            None if s.is_some() => 2,
            None => return Err(usage("no regime given: pass --case 1 (psi, r) or --case 2 (s, t)")),
        };
        let regime = match case {
            1 => match (psi, r, t) {
                (Some(psi), Some(r), _) => Regime::case1(psi, r)?,
                // t = i r e^{−iψ}, so −i t e^{iψ} = r must come out real.
                (_, None, Some(t)) if t.im == 0.0 && t.re > 0.0 => {
                    return Err(crate::Error::InvalidRegime(format!(
                        "case 1 needs t = i r e^(-i psi) not in (0, inf), got t = {}",
                        t.re
                    ))
                    .into())
                }
                (psi, None, Some(t)) => {
                    let psi = psi.unwrap_or_else(|| -(-Complex::i() * t).arg());
                    let r = -Complex::i() * t * Complex::from_polar(1.0, psi);
                    if r.im.abs() > 1e-12 * r.norm() {
                        return Err(crate::Error::InvalidRegime(format!(
                            "case 1 needs t = i r e^(-i psi) with real r; t = {t} does not fit psi = {psi}"
                        ))
                        .into());
                    }
                    Regime::case1(psi, r.re)?
                }
                (psi, r, _) => Regime::case1(psi.unwrap_or(0.4), r.unwrap_or(3.0))?,
            },
            2 => {
                let t = match t {
                    Some(t) if t.im != 0.0 => {
                        return Err(crate::Error::InvalidRegime(format!("case 2 needs real t < 0, got t = {t}")).into())
                    }
                    Some(t) => t.re,
                    None => -0.4,
                };
                Regime::case2(s.unwrap_or(1.5), t)?
            }
            n => return Err(usage(format!("--case must be 1 or 2, got {n}"))),
        };
        Ok(regime)
    }

    fn operator(&self) -> CliResult<JacobiOperator> {
        Ok(JacobiOperator::new(self.regime()?, self.q()?)?)
    }
}

fn open_output(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(fs::File::create(p).map_err(|e| CliError::Io { path: p.display().to_string(), source: e })?),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_text(path: Option<&Path>, text: &str) -> CliResult<()> {
    let mut out = open_output(path)?;
    let name = path.map_or("stdout".to_string(), |p| p.display().to_string());
    out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(|e| CliError::Io { path: name, source: e })
}

fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn csv_writer(path: Option<&Path>) -> CliResult<csv::Writer<Box<dyn Write>>> {
    Ok(csv::Writer::from_writer(open_output(path)?))
}

#[derive(Serialize)]
struct EvalOutput {
    #[serde(rename = "fn")]
    function: String,
    re: f64,
    im: f64,
}

fn cmd_eval(args: &EvalArgs) -> CliResult<()> {
    let set = Setting::new(&args.common)?;
    let cfg = &set.cfg;
    let function = args.function.clone().or_else(|| cfg.function.clone()).ok_or_else(|| usage("--fn is required"))?;
    let k = args.k.or(cfg.k).unwrap_or(0);
    let y = complex_opt(&args.y, &cfg.y)?;
    let z = complex_opt(&args.z, &cfg.z)?;
    let a = complex_opt(&args.a, &cfg.a)?;
    let q = set.q()?;
    let need = |v: Option<Complex>, name: &str| v.ok_or_else(|| usage(format!("--fn {function} needs --{name}")));

    // (a, t) from the regime, or raw when --a is given without a regime.
    let params = || -> CliResult<EigenParams> {
        if let (Some(a), false) = (a, set.regime_given()) {
            let t = need(set.t()?, "t")?;
            return Ok(EigenParams::new(a, t, q)?);
        }
        Ok(set.operator()?.params().clone())
    };
    let spectral = || -> CliResult<SpectralParam> {
        match (y, z) {
            (Some(y), _) => Ok(SpectralParam::from_y(y)?),
            (None, Some(z)) => Ok(SpectralParam::from_z(z)),
            (None, None) => Err(usage(format!("--fn {function} needs --y or --z"))),
        }
    };

    let value = match function.as_str() {
        "u" => u_k(&params()?, &spectral()?, k)?,
        "v" => v_k(&params()?, &spectral()?, k)?,
        "F" | "f" => f_k(&params()?, spectral()?.y(), k)?,
        "c" | "d" => {
            let p = params()?;
            let y = need(y, "y")?;
            if function == "c" {
                c_fn(y, p.a(), p.t(), q)?
            } else {
                d_fn(y, p.a(), p.t(), q)?
            }
        }
        "theta" => theta(need(z, "z")?, q)?,
        "qexp" => q_exponential(QExponentialParams { q, z: need(z, "z")?, t: need(set.t()?, "t")? })?,
        "phi_gamma" => {
            let spec = args.specialization.clone().or_else(|| cfg.specialization.clone());
            let (jp, base) = match spec.as_deref() {
                Some(kind @ ("even" | "odd")) => {
                    let p = params()?;
                    let y = need(y, "y")?;
                    let jp = if kind == "even" {
                        BigQJacobiParams::even_specialization(&p, y)
                    } else {
                        BigQJacobiParams::odd_specialization(&p, y)
                    };
                    (jp, q.squared())
                }
                Some(other) => return Err(usage(format!("--specialization must be even or odd, got {other}"))),
                None => {
                    let get = |f: &Option<String>, c: &Option<ComplexValue>, name: &str| -> CliResult<Complex> {
                        complex_opt(f, c)?.ok_or_else(|| usage(format!("phi_gamma needs --{name} or --specialization")))
                    };
                    let jp = BigQJacobiParams {
                        a: get(&args.jacobi_a, &cfg.jacobi_a, "jacobi-a")?,
                        b: get(&args.jacobi_b, &cfg.jacobi_b, "jacobi-b")?,
                        c: get(&args.jacobi_c, &cfg.jacobi_c, "jacobi-c")?,
                        x: get(&args.jacobi_x, &cfg.jacobi_x, "jacobi-x")?,
                        gamma: get(&args.gamma, &cfg.gamma, "gamma")?,
                    };
                    (jp, q)
                }
            };
            phi_gamma(&jp, base, k)?
        }
        "psi" => {
            let op = set.operator()?;
            let x = args.x.or(cfg.x).ok_or_else(|| usage("--fn psi needs --x"))?;
            let ext = op.extension(set.theta().unwrap_or(0.0));
            psi_at(&op, &ext, x, k, k)?.get(k)
        }
        other => {
            return Err(usage(format!("unknown --fn {other}; expected u, v, F, c, d, theta, qexp, phi_gamma or psi")))
        }
    };

    let out = set.output();
    match args.format.clone().or_else(|| cfg.format.clone()).as_deref().unwrap_or("json") {
        "json" => write_text(out.as_deref(), &to_json(&EvalOutput { function, re: value.re, im: value.im })?),
        "csv" => {
            let mut w = csv_writer(out.as_deref())?;
            w.write_record(["fn", "re", "im"])?;
            w.write_record([function, fmt17(value.re), fmt17(value.im)])?;
            w.flush().map_err(|e| CliError::Io { path: "output".into(), source: e })
        }
        other => Err(usage(format!("--format must be csv or json, got {other}"))),
    }
}

fn cmd_spectrum(args: &SpectrumArgs) -> CliResult<()> {
    let set = Setting::new(&args.common)?;
    let cfg = &set.cfg;
    let op = set.operator()?;
    let ext = op.extension(set.theta().unwrap_or(0.0));
    let resolution = args.resolution.or(cfg.resolution).unwrap_or(200);
    if resolution == 0 {
        return Err(usage("--resolution must be positive"));
    }
    let x_max = args.x_max.or(cfg.x_max).unwrap_or(100.0);
    let mass_index = args.mass_index.or(cfg.mass_index).unwrap_or(0);
    let measure = SpectralMeasure::sample(&op, &ext, resolution, x_max, mass_index)?;

    let dir = args.out_dir.clone().or_else(|| cfg.out_dir.clone()).unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).map_err(|e| CliError::Io { path: dir.display().to_string(), source: e })?;
    let density = dir.join("density.csv");
    let mut w = csv_writer(Some(&density))?;
    w.write_record(["chi", "x", "density"])?;
    for s in &measure.continuous {
        w.write_record([fmt17(s.chi), fmt17(s.chi.cos()), fmt17(s.density)])?;
    }
    w.flush().map_err(|e| CliError::Io { path: density.display().to_string(), source: e })?;
    let json = dir.join("spectrum.json");
    write_text(Some(&json), &to_json(&measure)?)?;

    let mut summary = format!(
        "density: {} rows -> {}\nmass points: {} in 1 < |x| <= {x_max} -> {}\n",
        measure.continuous.len(),
        density.display(),
        measure.discrete.len(),
        json.display()
    );
    if let Some(fit) = &measure.grid_fit {
        summary += &format!("q^2-grid fit: {} grid(s), max residual {:e}\n", fit.grids.len(), fit.max_residual);
    }
    write_text(None, &summary)
}

#[derive(Serialize)]
struct OrthogonalityEcho {
    regime: RegimeSummary,
    theta: f64,
    k_lo: i32,
    k_hi: i32,
    mass_points: usize,
    max_deviation: f64,
}

fn cmd_orthogonality(args: &OrthogonalityArgs) -> CliResult<()> {
    let set = Setting::new(&args.common)?;
    let cfg = &set.cfg;
    let op = set.operator()?;
    let theta = set.theta().unwrap_or(0.0);
    let (lo, hi) = (args.k_lo.or(cfg.k_lo).unwrap_or(-4), args.k_hi.or(cfg.k_hi).unwrap_or(4));
    let mut opts = MeasureOptions::default();
    if let Some(tol) = args.quad_tol.or(cfg.quad_tol) {
        opts.quad_tol = tol;
    }
    let m = orthogonality_matrix(&op, &op.extension(theta), lo, hi, &opts)?;
    let out = set.output();
    let mut w = csv_writer(out.as_deref())?;
    w.write_record(["k", "l", "re", "im", "abs_err"])?;
    for e in m.rows() {
        w.write_record([e.k.to_string(), e.l.to_string(), fmt17(e.re), fmt17(e.im), fmt17(e.abs_err)])?;
    }
    w.flush().map_err(|e| CliError::Io { path: "output".into(), source: e })?;
    let echo = OrthogonalityEcho {
        regime: RegimeSummary::new(op.regime(), op.q()),
        theta,
        k_lo: lo,
        k_hi: hi,
        mass_points: m.mass_points,
        max_deviation: m.max_deviation(),
    };
    // With the matrix on stdout the echo goes to stderr.
    let echo = to_json(&echo)?;
    if out.is_some() {
        write_text(None, &echo)
    } else {
        eprint!("{echo}");
        Ok(())
    }
}

#[derive(Serialize)]
struct MassEntry {
    x0: f64,
    y0: f64,
    mass_re: f64,
    mass_im: f64,
}

#[derive(Serialize)]
struct MassPointsOutput {
    regime: RegimeSummary,
    theta: f64,
    window: [f64; 2],
    k: i32,
    l: i32,
    points: Vec<MassEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    grid_fit: Option<GridFit>,
}

fn cmd_masspoints(args: &MasspointsArgs) -> CliResult<()> {
    let set = Setting::new(&args.common)?;
    let cfg = &set.cfg;
    let op = set.operator()?;
    let theta = set.theta().unwrap_or(0.0);
    let ext = op.extension(theta);
    let x_max = args.x_max.or(cfg.x_max).unwrap_or(100.0);
    let x_min = args.x_min.or(cfg.x_min).unwrap_or(-x_max);
    let (k, l) = (args.k.or(cfg.k).unwrap_or(0), args.l.or(cfg.l).unwrap_or(0));
    // A window straddling the band is split into its two outer pieces.
    let edge = 1.0 + 1e-9;
    let mut points = Vec::new();
    if x_min < -edge && x_max > edge {
        points.extend(locate_discrete(&op, &ext, x_min, -edge)?);
        points.extend(locate_discrete(&op, &ext, edge, x_max)?);
    } else {
        points = locate_discrete(&op, &ext, x_min, x_max)?;
    }
    let entries = points
        .iter()
        .map(|p| {
            let m = discrete_mass(&op, p, k, l)?;
            Ok(MassEntry { x0: p.x0, y0: p.y0, mass_re: m.re, mass_im: m.im })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let grid_fit = op.regime().is_exponential_case().then(|| fit_quadratic_grids(&points, op.q()));
    let doc = MassPointsOutput {
        regime: RegimeSummary::new(op.regime(), op.q()),
        theta,
        window: [x_min, x_max],
        k,
        l,
        points: entries,
        grid_fit,
    };
    write_text(set.output().as_deref(), &to_json(&doc)?)
}

fn cmd_quadcheck(args: &QuadcheckArgs) -> CliResult<()> {
    let set = Setting::new(&args.common)?;
    let rows = quadratic_suite(set.q()?)?;
    let mut w = csv_writer(set.output().as_deref())?;
    w.write_record(["case", "params", "residual"])?;
    for r in rows {
        w.write_record([r.case, r.params, fmt17(r.residual)])?;
    }
    w.flush().map_err(|e| CliError::Io { path: "output".into(), source: e })
}

fn cmd_qexp_limit(args: &QexpLimitArgs) -> CliResult<()> {
    let set = Setting::new(&args.common)?;
    let bases: Vec<f64> = match (&args.bases, &set.cfg.bases) {
        (Some(s), _) => s
            .split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|_| usage(format!("bad base {p:?} in --bases"))))
            .collect::<CliResult<_>>()?,
        (None, Some(b)) => b.clone(),
        (None, None) => vec![0.9, 0.99],
    };
    let mut w = csv_writer(set.output().as_deref())?;
    w.write_record(["q", "lambda", "z", "value", "exact", "rel_err"])?;
    for qv in bases {
        let q = QBase::new(qv)?;
        for (lambda, z) in q_limit_grid() {
            let t = Complex::new(0.5 * (1.0 - qv) * lambda, 0.0);
            let v = q_exponential(QExponentialParams { q, z: Complex::new(z, 0.0), t })?;
            let exact = (lambda * z).exp();
            let err = (v - exact).norm() / exact;
            w.write_record([fmt17(qv), fmt17(lambda), fmt17(z), fmt17(v.re), fmt17(exact), fmt17(err)])?;
        }
    }
    w.flush().map_err(|e| CliError::Io { path: "output".into(), source: e })
}

/// Runs the suite; `Ok(false)` is a verification failure.
fn cmd_verify(args: &VerifyArgs) -> CliResult<bool> {
    let set = Setting::new(&args.common)?;
    let cfg = &set.cfg;
    let suite = args.suite.clone().or_else(|| cfg.suite.clone()).ok_or_else(|| usage("verify needs a suite name"))?;
    let custom_cases = set.regime_given() || set.theta().is_some();
    let report: SuiteReport = match suite.as_str() {
        "orthogonality" if custom_cases => {
            let ops = if set.regime_given() { vec![set.operator()?] } else { verify::measure_operators() };
            let thetas = set.theta().map_or(vec![0.3, 1.9], |t| vec![t]);
            let cases: Vec<_> = ops.into_iter().flat_map(|op| thetas.iter().map(move |&t| (op.clone(), t))).collect();
            verify::orthogonality(&cases, &MeasureOptions::default())
        }
        "recurrence" => verify::recurrence(args.draws.or(cfg.draws).unwrap_or(5), args.seed.or(cfg.seed).unwrap_or(20261016)),
        name => verify::run_suite(name).ok_or_else(|| {
            usage(format!("unknown suite {name}; expected one of {} or all", verify::SUITES.join(", ")))
        })?,
    };
    for c in &report.checks {
        if args.verbose || !c.passed() {
            let status = if c.passed() { "ok" } else { "FAILED" };
            let err = c.error.as_deref().map(|e| format!(" ({e})")).unwrap_or_default();
            eprintln!("{status:<6} {}: {:e} vs {:e}{err}", c.name, c.value, c.tolerance);
        }
    }
    let json = to_json(&report)?;
    if let Some(path) = args.report.clone().or_else(|| cfg.report.clone()) {
        write_text(Some(&path), &json)?;
    }
    write_text(set.output().as_deref(), &json)?;
    Ok(report.pass)
}

/// Dispatches a parsed command line and maps the outcome to an exit code.
pub fn run(cli: &Cli) -> ExitCode {
    let outcome = match &cli.command {
        Command::Eval(a) => cmd_eval(a).map(|_| true),
        Command::Spectrum(a) => cmd_spectrum(a).map(|_| true),
        Command::Orthogonality(a) => cmd_orthogonality(a).map(|_| true),
        Command::Masspoints(a) => cmd_masspoints(a).map(|_| true),
        Command::Quadcheck(a) => cmd_quadcheck(a).map(|_| true),
        Command::QexpLimit(a) => cmd_qexp_limit(a).map(|_| true),
        Command::Verify(a) => cmd_verify(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

/// Entry point of the binary.
pub fn main() -> ExitCode {
    match Cli::try_parse() {
        Ok(cli) => run(&cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
    }
}
