//! Command-line front end: config ingestion, orchestration, report emission.
//!
//! All outputs are plain CSV or JSON, embed the schema version and the
//! config fingerprint, and are byte-stable across runs in sequential mode.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Deserialize;
use serde_json::json;

use crate::cell::{chi1_closed_form, solve_cell_1d, PeriodicProfile};
use crate::error::{Error, Result};
use crate::laminate::build_stack;
use crate::measure::{
    sweep, vacuum_spectrum, ConvergenceRow, DtnSpectrum, ExperimentConfig, SweepParam,
    WeightScheme, SCHEMA_VERSION,
};
use crate::params::{HiddenObject, InnerShellMode, ObjectShell, RadialMedium};

#[derive(Debug, Parser)]
#[command(name = "isocloak", version, about = "Layered approximate EM cloak experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON experiment configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Disable the mode-level worker pool; guarantees bitwise reproducibility.
    #[arg(long, global = true)]
    pub sequential: bool,
    /// Override the inner-shell scalar convention of the config.
    #[arg(long, global = true, value_enum)]
    pub inner_shell: Option<InnerShellArg>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Dump the reference media profiles over a radius grid as CSV.
    Params,
    /// Serialize the laminate layer stack as JSON.
    Stack,
    /// Run the periodic cell solver against its closed form over a
    /// refinement ladder.
    CellVerify,
    /// Emit the modal impedance spectrum of the configured medium.
    Dtn,
    /// Vary one parameter and report spectral distances to its limit.
    Sweep {
        #[arg(long, value_enum)]
        vary: VaryArg,
        /// Comma-separated parameter values; a standard ladder when omitted.
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum InnerShellArg {
    Paper,
    Pushforward,
}

impl From<InnerShellArg> for InnerShellMode {
    fn from(a: InnerShellArg) -> Self {
        match a {
            InnerShellArg::Paper => InnerShellMode::PaperLiteral,
            InnerShellArg::Pushforward => InnerShellMode::ComputedPushforward,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum VaryArg {
    N,
    Delta,
    Rho,
}

impl From<VaryArg> for SweepParam {
    fn from(v: VaryArg) -> Self {
        match v {
            VaryArg::N => SweepParam::N,
            VaryArg::Delta => SweepParam::Delta,
            VaryArg::Rho => SweepParam::Rho,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    schema_version: u32,
    rho: f64,
    delta: f64,
    n: u32,
    omega: Option<f64>,
    inner_shell_mode: Option<InnerShellMode>,
    l_max: Option<u32>,
    tol: Option<f64>,
    object: Option<Vec<RawShell>>,
    weights: Option<WeightScheme>,
    /// Force identity media everywhere; for reference spectra and golden
    /// files only.
    vacuum: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawShell {
    r_outer: f64,
    eps: [f64; 2],
    mu: [f64; 2],
}

/// A parsed configuration plus the vacuum override flag.
#[derive(Debug, Clone)]
pub struct ParsedConfig {
    pub experiment: ExperimentConfig,
    pub vacuum: bool,
}

/// Parse and validate a JSON configuration document, applying defaults for
/// absent optional fields. Validation failures report every offending field
/// at once.
pub fn parse_config(text: &str) -> Result<ParsedConfig> {
    let raw: RawConfig = serde_json::from_str(text)
        .map_err(|e| Error::Config(format!("malformed config JSON: {e}")))?;

    let mut problems = Vec::new();
    if raw.schema_version != SCHEMA_VERSION {
        problems.push(format!(
            "schema_version: expected {SCHEMA_VERSION}, got {}",
            raw.schema_version
        ));
    }
    if !(raw.rho > 0.0 && raw.rho <= 0.5) {
        problems.push(format!(
            "rho: must lie in (0, 1/2] for the laminate phases to stay feasible, got {}",
            raw.rho
        ));
    }
    if !(raw.delta >= 0.0 && raw.delta <= 0.5) {
        problems.push(format!("delta: must lie in [0, 0.5], got {}", raw.delta));
    }
    let omega = raw.omega.unwrap_or(1.0);
    if !(omega > 0.0 && omega.is_finite()) {
        problems.push(format!("omega: must be positive and finite, got {omega}"));
    }
    let l_max = raw.l_max.unwrap_or(20);
    if !(1..=crate::special::L_MAX).contains(&l_max) {
        problems.push(format!(
            "l_max: must lie in [1, {}], got {l_max}",
            crate::special::L_MAX
        ));
    }
    let tol = raw.tol.unwrap_or(1e-10);
    if !(tol > 0.0 && tol <= 1e-4) {
        problems.push(format!("tol: must lie in (0, 1e-4], got {tol}"));
    }
    let mut shells = Vec::new();
    for (i, sh) in raw.object.unwrap_or_default().iter().enumerate() {
        if sh.r_outer > 0.5 {
            problems.push(format!(
                "object[{i}].r_outer: hidden objects live in the core ball of radius 1/2, got {}",
                sh.r_outer
            ));
        }
        shells.push(ObjectShell {
            r_outer: sh.r_outer,
            eps: Complex64::new(sh.eps[0], sh.eps[1]),
            mu: Complex64::new(sh.mu[0], sh.mu[1]),
        });
    }
    let object = HiddenObject { shells };
    if let Err(e) = object.validate() {
        problems.push(format!("object: {e}"));
    }
    if !problems.is_empty() {
        return Err(Error::Config(format!(
            "invalid config ({} problem{}):\n  {}",
            problems.len(),
            if problems.len() == 1 { "" } else { "s" },
            problems.join("\n  ")
        )));
    }

    Ok(ParsedConfig {
        experiment: ExperimentConfig {
            omega,
            rho: raw.rho,
            delta: raw.delta,
            n: raw.n,
            inner_shell_mode: raw
                .inner_shell_mode
                .unwrap_or(InnerShellMode::ComputedPushforward),
            object,
            l_max,
            tol,
            weights: raw.weights.unwrap_or(WeightScheme::Sobolev),
        },
        vacuum: raw.vacuum.unwrap_or(false),
    })
}

fn load_config(cli: &Cli) -> Result<ParsedConfig> {
    let mut parsed = match &cli.config {
        Some(path) => parse_config(&std::fs::read_to_string(path)?)?,
        None => ParsedConfig {
            experiment: ExperimentConfig::new(0.25, 0.05, 0),
            vacuum: false,
        },
    };
    if let Some(mode) = cli.inner_shell {
        parsed.experiment.inner_shell_mode = mode.into();
    }
    parsed.experiment.validate()?;
    Ok(parsed)
}

fn emit(out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, content)?,
        None => print!("{content}"),
    }
    Ok(())
}

fn fmt_c(v: Complex64) -> String {
    format!("{:e},{:e}", v.re, v.im)
}

/// CSV dump of the gamma-star / eps / mu profiles of the reference medium:
/// 600 uniform radii on (0, 3], with every interior segment boundary added
/// as a two-sided pair.
fn cmd_params(cfg: &ExperimentConfig) -> Result<String> {
    let medium = {
        let mut c = cfg.clone();
        c.n = 0;
        c.build_medium()?
    };
    // mu of the cloak with an empty core and the same inner-shell convention
    // is exactly the gamma-star profile.
    let gamma_medium = {
        let mut c = cfg.clone();
        c.n = 0;
        c.delta = 0.0;
        c.object = HiddenObject::vacuum();
        c.build_medium()?
    };

    // (radius, side): side -1/+1 select the adjacent segment at a boundary,
    // 0 is the left-continuous default.
    let boundaries: Vec<f64> = medium
        .segments
        .iter()
        .map(|s| s.r_lo)
        .filter(|&r| r > 0.0)
        .collect();
    let mut samples: Vec<(f64, i8)> = (1..=600)
        .map(|i| (3.0 * i as f64 / 600.0, 0))
        .filter(|(r, _)| !boundaries.contains(r))
        .collect();
    for &r in &boundaries {
        samples.push((r, -1));
        samples.push((r, 1));
    }
    samples.sort_by(|a, b| a.partial_cmp(b).expect("finite radii"));

    let side_eval = |med: &RadialMedium, r: f64, side: i8| {
        let seg = med
            .segments
            .iter()
            .find(|s| if side > 0 { r < s.r_hi } else { r <= s.r_hi })
            .unwrap_or_else(|| med.segments.last().expect("nonempty medium"));
        (seg.eps.eval(r), seg.mu.eval(r))
    };

    let mut csv = String::new();
    writeln!(csv, "# schema_version={SCHEMA_VERSION}").unwrap();
    writeln!(csv, "# fingerprint={}", cfg.fingerprint()).unwrap();
    writeln!(
        csv,
        "r,side,gamma_r,gamma_t,eps_r_re,eps_r_im,eps_t_re,eps_t_im,mu_r_re,mu_r_im,mu_t_re,mu_t_im"
    )
    .unwrap();
    for &(r, side) in &samples {
        let (_, gamma) = side_eval(&gamma_medium, r, side);
        let (eps, mu) = side_eval(&medium, r, side);
        writeln!(
            csv,
            "{r:e},{side},{:e},{:e},{},{},{},{}",
            gamma.radial.re,
            gamma.tangential.re,
            fmt_c(eps.radial),
            fmt_c(eps.tangential),
            fmt_c(mu.radial),
            fmt_c(mu.tangential)
        )
        .unwrap();
    }
    Ok(csv)
}

fn cmd_stack(cfg: &ExperimentConfig) -> Result<String> {
    if cfg.n < 1 {
        return Err(Error::Config("stack requires n >= 1".into()));
    }
    let geom = cfg.geometry()?;
    let stack = build_stack(cfg.n, &geom, cfg.delta, cfg.omega, &cfg.object, cfg.inner_shell_mode)?;
    let shells: Vec<_> = stack
        .shells
        .iter()
        .map(|sh| {
            json!({
                "r_inner": sh.r_inner,
                "r_outer": sh.r_outer,
                "eps_re": sh.eps.re,
                "eps_im": sh.eps.im,
                "mu_re": sh.mu.re,
                "mu_im": sh.mu.im,
            })
        })
        .collect();
    let doc = json!({
        "schema_version": SCHEMA_VERSION,
        "fingerprint": cfg.fingerprint(),
        "n": stack.n,
        "rho": cfg.rho,
        "delta": cfg.delta,
        "omega": cfg.omega,
        "shells": shells,
    });
    Ok(format!("{}\n", serde_json::to_string_pretty(&doc).expect("stack serializes")))
}

fn cmd_cell_verify(cfg: &ExperimentConfig) -> Result<String> {
    let mut csv = String::new();
    writeln!(csv, "# schema_version={SCHEMA_VERSION}").unwrap();
    writeln!(csv, "# fingerprint={}", cfg.fingerprint()).unwrap();
    writeln!(csv, "# profile: 2 + sin(2 pi t), error vs -1 + HM/gamma at nodes").unwrap();
    writeln!(csv, "n_samples,sup_error,order").unwrap();
    let mut prev: Option<f64> = None;
    for k in 7..=12 {
        let n = 1usize << k;
        let profile =
            PeriodicProfile::from_fn(n, |t| 2.0 + (2.0 * std::f64::consts::PI * t).sin())?;
        let sol = solve_cell_1d(&profile)?;
        let exact = chi1_closed_form(&profile);
        let err = sol
            .dchi_nodes
            .iter()
            .zip(&exact)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0_f64, f64::max);
        match prev {
            Some(p) => writeln!(csv, "{n},{err:e},{:.3}", (p / err).log2()).unwrap(),
            None => writeln!(csv, "{n},{err:e},").unwrap(),
        }
        prev = Some(err);
    }
    Ok(csv)
}

fn spectrum_json(spec: &DtnSpectrum, l_max: u32) -> String {
    let entries: Vec<_> = spec
        .entries
        .iter()
        .map(|e| {
            json!({
                "pol": e.mode.pol.to_string(),
                "l": e.mode.l,
                "zeta": [e.zeta.re, e.zeta.im],
            })
        })
        .collect();
    let doc = json!({
        "schema_version": SCHEMA_VERSION,
        "fingerprint": spec.fingerprint,
        "omega": spec.omega,
        "l_max": l_max,
        "entries": entries,
    });
    format!("{}\n", serde_json::to_string_pretty(&doc).expect("spectrum serializes"))
}

fn cmd_dtn(parsed: &ParsedConfig, sequential: bool) -> Result<String> {
    let cfg = &parsed.experiment;
    let spec = if parsed.vacuum {
        vacuum_spectrum(cfg.omega, cfg.l_max)?
    } else {
        cfg.spectrum(sequential)?
    };
    Ok(spectrum_json(&spec, cfg.l_max))
}

fn default_values(param: SweepParam) -> Vec<f64> {
    match param {
        SweepParam::N => vec![8.0, 16.0, 32.0, 64.0, 128.0],
        SweepParam::Delta => vec![0.1, 0.05, 0.025, 0.0125],
        SweepParam::Rho => vec![0.2, 0.1, 0.05, 0.025],
    }
}

/// The spectrum each sweep converges to: n = 0 reference for the n-sweep,
/// the delta = 0 medium for the delta-sweep, vacuum for the rho-sweep.
fn sweep_reference(
    base: &ExperimentConfig,
    param: SweepParam,
    sequential: bool,
) -> Result<DtnSpectrum> {
    match param {
        SweepParam::N => {
            let mut c = base.clone();
            c.n = 0;
            c.spectrum(sequential)
        }
        SweepParam::Delta => {
            let mut c = base.clone();
            c.delta = 0.0;
            c.spectrum(sequential)
        }
        SweepParam::Rho => vacuum_spectrum(base.omega, base.l_max),
    }
}

fn sweep_csv(rows: &[ConvergenceRow], fingerprint: &str) -> String {
    let mut csv = String::new();
    writeln!(csv, "# schema_version={SCHEMA_VERSION}").unwrap();
    writeln!(csv, "# fingerprint={fingerprint}").unwrap();
    writeln!(csv, "param,value,distance_sup,distance_l2,worst_pol,worst_l,runtime_s").unwrap();
    for r in rows {
        writeln!(
            csv,
            "{},{},{:e},{:e},{},{},{:.3}",
            r.param.name(),
            r.value,
            r.distance_sup,
            r.distance_l2,
            r.worst.pol,
            r.worst.l,
            r.runtime_s
        )
        .unwrap();
    }
    csv
}

fn sweep_json(rows: &[ConvergenceRow], fingerprint: &str) -> String {
    let entries: Vec<_> = rows
        .iter()
        .map(|r| {
            json!({
                "param": r.param.name(),
                "value": r.value,
                "distance_sup": r.distance_sup,
                "distance_l2": r.distance_l2,
                "worst_pol": r.worst.pol.to_string(),
                "worst_l": r.worst.l,
                "runtime_s": r.runtime_s,
                "monotone_ok": r.monotone_ok,
            })
        })
        .collect();
    let doc = json!({
        "schema_version": SCHEMA_VERSION,
        "fingerprint": fingerprint,
        "rows": entries,
    });
    format!("{}\n", serde_json::to_string_pretty(&doc).expect("sweep serializes"))
}

fn cmd_sweep(
    cli: &Cli,
    cfg: &ExperimentConfig,
    vary: VaryArg,
    values: Option<&[f64]>,
) -> Result<i32> {
    let param: SweepParam = vary.into();
    let values = match values {
        Some(v) => v.to_vec(),
        None => default_values(param),
    };
    let reference = sweep_reference(cfg, param, cli.sequential)?;
    let outcome = sweep(cfg, param, &values, &reference, cli.sequential)?;
    let fingerprint = cfg.fingerprint();
    emit(cli.out.as_deref(), &sweep_csv(&outcome.rows, &fingerprint))?;
    if let Some(path) = &cli.out {
        let json_path = path.with_extension("json");
        std::fs::write(json_path, sweep_json(&outcome.rows, &fingerprint))?;
    }
    for (value, err) in &outcome.failures {
        eprintln!("{} = {value}: {err}", param.name());
    }
    if !outcome.failures.is_empty() {
        return Ok(3);
    }
    if !outcome.trend_ok() {
        eprintln!("trend violation: distances are not monotone along the sweep");
        return Ok(2);
    }
    Ok(0)
}

/// Execute one command; the returned code is the process exit code.
pub fn run(cli: &Cli) -> Result<i32> {
    let parsed = load_config(cli)?;
    let cfg = &parsed.experiment;
    match &cli.command {
        Command::Params => {
            emit(cli.out.as_deref(), &cmd_params(cfg)?)?;
            Ok(0)
        }
        Command::Stack => {
            emit(cli.out.as_deref(), &cmd_stack(cfg)?)?;
            Ok(0)
        }
        Command::CellVerify => {
            emit(cli.out.as_deref(), &cmd_cell_verify(cfg)?)?;
            Ok(0)
        }
        Command::Dtn => {
            emit(cli.out.as_deref(), &cmd_dtn(&parsed, cli.sequential)?)?;
            Ok(0)
        }
        Command::Sweep { vary, values } => cmd_sweep(cli, cfg, *vary, values.as_deref()),
    }
}

/// Entry point used by the binary: parse, run, map errors to exit codes.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
