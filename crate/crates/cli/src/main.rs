//! `mourre-lab`: threshold sequences, catalogs, interpolation coefficients,
//! band certification and convergence studies from the command line.
//!
//! Output goes to `--out` (written atomically) or to stdout. Failures print
//! a JSON object on stderr and exit with 2 (configuration), 3 (solver) or
//! 4 (certification).

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mourre_lab::catalog::build_catalog;
use mourre_lab::export::{catalog_csv, fmt_f64, plot_csv, thresholds_csv, to_json};
use mourre_lab::interpolation::{default_pool, search_sigma, solve_coefficients, InterpolationProblem};
use mourre_lab::pingpong::{sequence, solve, PingPongProblem, ThresholdSolution, Variant};
use mourre_lab::symbol::Combination;
use mourre_lab::verifier::{
    band_energies, certify_band_between, convergence_study, plot_data, scan_band, ScanConfig, ScanReport,
};
use mourre_lab::MourreError;
use serde_json::json;

/// Environment variable capping the worker thread count.
const THREADS_ENV: &str = "MOURRE_LAB_THREADS";
const SOLVER_TOL: f64 = 1e-13;

#[derive(Parser)]
#[command(name = "mourre-lab", version, about = "Threshold energies and Mourre positivity scans")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a ping-pong threshold sequence for n = 1..=n-max.
    Thresholds(ThresholdsArgs),
    /// Build the merged threshold catalog.
    Catalog(CatalogArgs),
    /// Solve the interpolation system for a band's coefficients.
    Interpolate(InterpolateArgs),
    /// Scan a band for strict positivity and emit the report and plot data.
    Verify(VerifyArgs),
    /// Estimate the convergence rate of the J2 sequence.
    Converge(ConvergeArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct Output {
    /// Output format.
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ThresholdsArgs {
    #[arg(long)]
    kappa: u32,
    /// One of j2, f, g, well-dec, well-inc (or well-dec(j), well-inc(j)).
    #[arg(long, default_value = "j2")]
    variant: String,
    /// Well index for well-dec / well-inc.
    #[arg(long)]
    well: Option<u32>,
    #[arg(long, default_value_t = 6)]
    n_max: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct CatalogArgs {
    #[arg(long)]
    kappa: u32,
    #[arg(long, default_value_t = 2)]
    dim: u32,
    /// Deepest ping-pong construction included.
    #[arg(long, default_value_t = 4)]
    n_max: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct BandArgs {
    /// J2 band index n: the band (E_n, E_{n-1}).
    #[arg(long = "band", conflicts_with_all = ["band_left", "band_right"])]
    band_index: Option<usize>,
    /// Left threshold reference, e.g. "j2:n=2", "g:n=2", "well-dec(3):n=1".
    #[arg(long, requires = "band_right")]
    band_left: Option<String>,
    /// Right threshold reference.
    #[arg(long, requires = "band_left")]
    band_right: Option<String>,
}

#[derive(Args)]
struct InterpolateArgs {
    #[arg(long)]
    kappa: u32,
    #[command(flatten)]
    band: BandArgs,
    /// Comma-separated index set; defaults to 1..=2n (or 1..=rows+1).
    #[arg(long, value_delimiter = ',', conflicts_with = "search")]
    sigma: Option<Vec<u32>>,
    /// Search for the first certified index set.
    #[arg(long)]
    search: bool,
    /// Candidate sets for --search, one comma-separated set per line.
    #[arg(long, requires = "search")]
    pool: Option<PathBuf>,
    /// Maximum number of candidates tried by --search.
    #[arg(long, default_value_t = 32)]
    budget: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    kappa: u32,
    /// Numeric band "a:b".
    #[arg(long = "band", conflicts_with_all = ["band_left", "band_right"])]
    band: Option<String>,
    /// Left threshold reference; enables the endpoint zero check.
    #[arg(long, requires = "band_right")]
    band_left: Option<String>,
    #[arg(long, requires = "band_left")]
    band_right: Option<String>,
    /// Comma-separated coefficients. Any scaling is accepted, so a negated
    /// combination can be scanned directly.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    rho: Vec<f64>,
    /// Index set matching --rho; defaults to 1..=len(rho).
    #[arg(long, value_delimiter = ',')]
    sigma: Option<Vec<u32>>,
    #[arg(long, default_value_t = 256)]
    e_samples: usize,
    #[arg(long, default_value_t = 512)]
    x_samples: usize,
    #[arg(long, default_value_t = 1e-6)]
    margin: f64,
    /// Report JSON path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Plot CSV path; defaults to the report path with a `.plot.csv` suffix.
    #[arg(long)]
    plot: Option<PathBuf>,
    /// Energies sampled for the plot data.
    #[arg(long, default_value_t = 64)]
    plot_energies: usize,
    /// x samples per plot energy.
    #[arg(long, default_value_t = 128)]
    plot_x: usize,
}

#[derive(Args)]
struct ConvergeArgs {
    #[arg(long)]
    kappa: u32,
    #[arg(long, default_value_t = 400)]
    n_max: usize,
    #[command(flatten)]
    output: Output,
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    kind: &'static str,
    message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            kind: "config",
            message: message.into(),
        }
    }
}

impl From<MourreError> for Failure {
    fn from(e: MourreError) -> Self {
        let mut root = &e;
        while let MourreError::SequenceFailure { source, .. } = root {
            root = source;
        }
        let (code, kind) = match root {
            MourreError::Domain(_) | MourreError::InvalidInput(_) => (2, "config"),
            MourreError::CertificationFailure { .. } | MourreError::SearchExhausted { .. } => (4, "certification"),
            _ => (3, "solver"),
        };
        Self {
            code,
            kind,
            message: e.to_string(),
        }
    }
}

type CmdResult = Result<(), Failure>;

/// Writes `contents` to `path` through a temporary file in the same
/// directory, or to stdout when `path` is `None`.
fn emit(path: Option<&Path>, contents: &str) -> CmdResult {
    let io = |e: std::io::Error| Failure {
        code: 2,
        kind: "io",
        message: e.to_string(),
    };
    match path {
        None => std::io::stdout().write_all(contents.as_bytes()).map_err(io),
        Some(p) => {
            let dir = p.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
            let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
            tmp.write_all(contents.as_bytes()).map_err(io)?;
            #[cfg(unix)]
            {
                use std::os::unix::fs::PermissionsExt;
                tmp.as_file()
                    .set_permissions(std::fs::Permissions::from_mode(0o644))
                    .map_err(io)?;
            }
            tmp.persist(p).map_err(|e| io(e.error))?;
            Ok(())
        }
    }
}

fn parse_variant(name: &str, well: Option<u32>) -> Result<Variant, Failure> {
    let name = name.trim().to_ascii_lowercase();
    let spelled = match (name.as_str(), well) {
        ("well-dec" | "well-inc", Some(j)) => format!("{name}({j})"),
        ("well-dec" | "well-inc", None) => {
            return Err(Failure::config(format!("variant {name} needs --well")));
        }
        (_, Some(_)) if !name.starts_with("well-") => {
            return Err(Failure::config("--well only applies to well-dec / well-inc"));
        }
        _ => name,
    };
    Ok(spelled.parse()?)
}

/// Resolves a threshold reference `variant:n=N`; `n=0` is the zeroth-order
/// anchor of the variant.
fn resolve_threshold(kappa: u32, reference: &str) -> Result<ThresholdSolution, Failure> {
    let (variant, n) = reference
        .rsplit_once(":n=")
        .ok_or_else(|| Failure::config(format!("threshold reference '{reference}' is not of the form variant:n=N")))?;
    let n: usize = n
        .trim()
        .parse()
        .map_err(|_| Failure::config(format!("bad depth in '{reference}'")))?;
    let variant = parse_variant(variant, None)?;
    if n == 0 {
        return Ok(ThresholdSolution::zeroth_order(kappa, variant)?);
    }
    Ok(solve(&PingPongProblem::new(kappa, n, variant)?, SOLVER_TOL)?)
}

fn j2_band(kappa: u32, n: usize) -> Result<(ThresholdSolution, ThresholdSolution), Failure> {
    if n == 0 {
        return Err(Failure::config("--band must be at least 1"));
    }
    Ok((
        resolve_threshold(kappa, &format!("j2:n={n}"))?,
        resolve_threshold(kappa, &format!("j2:n={}", n - 1))?,
    ))
}

fn band_endpoints(kappa: u32, band: &BandArgs) -> Result<(ThresholdSolution, ThresholdSolution), Failure> {
    match (band.band_index, &band.band_left, &band.band_right) {
        (Some(n), _, _) => j2_band(kappa, n),
        (None, Some(l), Some(r)) => Ok((resolve_threshold(kappa, l)?, resolve_threshold(kappa, r)?)),
        _ => Err(Failure::config("give --band N or both --band-left and --band-right")),
    }
}

fn cmd_thresholds(a: &ThresholdsArgs) -> CmdResult {
    let variant = parse_variant(&a.variant, a.well)?;
    let sols = sequence(a.kappa, variant, a.n_max, SOLVER_TOL)?;
    let text = match a.output.format {
        Format::Json => to_json(&sols)?,
        Format::Csv => thresholds_csv(&sols)?,
    };
    emit(a.output.out.as_deref(), &text)
}

fn cmd_catalog(a: &CatalogArgs) -> CmdResult {
    let cat = build_catalog(a.kappa, a.dim, a.n_max)?;
    for d in &cat.diagnostics {
        eprintln!("{}", json!({ "warning": d }));
    }
    let text = match a.output.format {
        Format::Json => to_json(&cat)?,
        Format::Csv => catalog_csv(&cat.entries)?,
    };
    emit(a.output.out.as_deref(), &text)
}

fn read_pool(path: &Path) -> Result<Vec<Vec<u32>>, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            l.split(',')
                .map(|v| v.trim().parse::<u32>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| Failure::config(format!("bad pool line '{l}'")))
        })
        .collect()
}

fn rho_csv(sigma: &[u32], rho: &[f64]) -> String {
    let mut s = String::from("j,rho\n");
    for (j, r) in sigma.iter().zip(rho) {
        s.push_str(&format!("{j},{}\n", fmt_f64(*r)));
    }
    s
}

fn cmd_interpolate(a: &InterpolateArgs) -> CmdResult {
    let (left, right) = band_endpoints(a.kappa, &a.band)?;
    if a.search {
        let pool = match &a.pool {
            Some(p) => read_pool(p)?,
            None => default_pool(left.n, a.budget),
        };
        let outcome = search_sigma(&left, &right, &pool, a.budget, &ScanConfig::default())?;
        let c = &outcome.report.combination;
        let text = match a.output.format {
            Format::Json => to_json(&outcome)?,
            Format::Csv => rho_csv(&c.sigma(), &c.rho()),
        };
        return emit(a.output.out.as_deref(), &text);
    }
    let sigma = match &a.sigma {
        Some(s) => s.clone(),
        None => {
            let rows = InterpolationProblem::new(left.clone(), right.clone(), vec![1])?
                .constraints()
                .len();
            (1..=rows as u32 + 1).collect()
        }
    };
    let report = solve_coefficients(&InterpolationProblem::new(left, right, sigma)?)?;
    let text = match a.output.format {
        Format::Json => to_json(&report)?,
        Format::Csv => rho_csv(&report.combination.sigma(), &report.combination.rho()),
    };
    emit(a.output.out.as_deref(), &text)
}

fn parse_band(s: &str) -> Result<(f64, f64), Failure> {
    let bad = || Failure::config(format!("band '{s}' is not of the form a:b"));
    let (l, r) = s.split_once(':').ok_or_else(bad)?;
    Ok((l.trim().parse().map_err(|_| bad())?, r.trim().parse().map_err(|_| bad())?))
}

fn plot_path(a: &VerifyArgs) -> Option<PathBuf> {
    a.plot.clone().or_else(|| {
        a.out.as_ref().map(|p| {
            let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            p.with_file_name(format!("{stem}.plot.csv"))
        })
    })
}

fn cmd_verify(a: &VerifyArgs) -> CmdResult {
    let sigma = a.sigma.clone().unwrap_or_else(|| (1..=a.rho.len() as u32).collect());
    if sigma.len() != a.rho.len() {
        return Err(Failure::config(format!(
            "--sigma has {} entries but --rho has {}",
            sigma.len(),
            a.rho.len()
        )));
    }
    let c = Combination::from_sigma_rho(a.kappa, &sigma, &a.rho)?;
    let config = ScanConfig {
        e_samples: a.e_samples,
        x_samples: a.x_samples,
        margin: a.margin,
    };
    let (band, endpoints) = match (&a.band, &a.band_left, &a.band_right) {
        (Some(b), _, _) => (parse_band(b)?, None),
        (None, Some(l), Some(r)) => {
            let (l, r) = (resolve_threshold(a.kappa, l)?, resolve_threshold(a.kappa, r)?);
            ((l.e, r.e), Some((l, r)))
        }
        _ => return Err(Failure::config("give --band a:b or both --band-left and --band-right")),
    };
    let report: ScanReport = scan_band(&c, band, &config)?;
    emit(a.out.as_deref(), &to_json(&report)?)?;
    if let Some(p) = plot_path(a) {
        let energies = band_energies(band, a.plot_energies, a.margin);
        emit(Some(&p), &plot_csv(&plot_data(&c, &energies, a.plot_x))?)?;
    }
    if let Some(bad) = report.first_failure() {
        return Err(MourreError::CertificationFailure {
            e: bad.e,
            x: bad.argmin[0],
            value: bad.min_value,
        }
        .into());
    }
    if let Some((l, r)) = endpoints {
        certify_band_between(&c, &l, &r, &config).map_err(|e| match e {
            MourreError::DegenerateSolution(m) => Failure {
                code: 4,
                kind: "certification",
                message: m,
            },
            other => other.into(),
        })?;
    }
    Ok(())
}

fn cmd_converge(a: &ConvergeArgs) -> CmdResult {
    let r = convergence_study(a.kappa, a.n_max)?;
    let text = match a.output.format {
        Format::Json => to_json(&r)?,
        Format::Csv => {
            let mut s = String::from("n,E\n");
            for (n, e) in &r.data {
                s.push_str(&format!("{n},{}\n", fmt_f64(*e)));
            }
            s
        }
    };
    emit(a.output.out.as_deref(), &text)
}

fn configure_threads() -> CmdResult {
    let Ok(v) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Failure::config(format!("{THREADS_ENV} must be a positive integer, got '{v}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::config(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match &cli.command {
        Command::Thresholds(a) => cmd_thresholds(a),
        Command::Catalog(a) => cmd_catalog(a),
        Command::Interpolate(a) => cmd_interpolate(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Converge(a) => cmd_converge(a),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!(
                "{}",
                json!({ "error": f.kind, "message": f.message, "exit_code": f.code })
            );
            ExitCode::from(f.code)
        }
    }
}
