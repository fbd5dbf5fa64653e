//! Command-line harness: convergence tables, verification runs, density
//! dumps and coefficient inspection.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::error::Error;
use crate::families::{
    family_dual_hahn, family_jacobi_growing, family_laguerre_growing, family_mab_perturbed,
    family_rescaled_power, family_wall, numeric_limit, DualHahnMode, DualHahnScaling, LimitData,
    MeasureFamily, RescaledBase, DEFAULT_PROBE,
};
use crate::spectral::{density_matrix, DEFAULT_EPSILON};
use crate::weak::{convergence_table, TestFunction};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

/// Cap on `n` for CI runs.
pub const MAX_N_ENV: &str = "WEAKLIMIT_MAX_N";

/// Spread between extrapolants above which `coeffs` reports a limit as unsettled.
const LIMIT_SPREAD: f64 = 1e-4;

#[derive(Debug, Parser)]
#[command(
    name = "weaklimit",
    version,
    about = "Weak limits of orthogonal polynomials in varying measure families"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a convergence table and check the final error and trend.
    Verify {
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        run: RunArgs,
        /// Largest admissible abs_error at the final n.
        #[arg(long, default_value_t = 1e-2)]
        threshold: f64,
    },
    /// Print a convergence table.
    Table {
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Densities of the limiting matrix measure on a grid.
    Density {
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        grid: DensityArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Coefficients a_{n+k,n}, b_{n+k,n} and their limits.
    Coeffs {
        #[command(flatten)]
        family: FamilyArgs,
        #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
        k: i64,
        #[arg(long, value_delimiter = ',', default_value = "10,100,1000")]
        ns: Vec<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyName {
    Mab,
    Rescaled,
    Wall,
    Jacobi,
    Laguerre,
    DualHahn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeName {
    Laguerre,
    Hermite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScalingName {
    Linear,
    Hermite,
}

/// How densities are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DensityMethod {
    /// Stieltjes inversion for constant limits, closed forms otherwise.
    Auto,
    Stieltjes,
    ClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct FamilyArgs {
    #[arg(long, value_enum)]
    pub family: FamilyName,
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub b: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub c: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    /// Dual Hahn limit: fixed beta (laguerre) or beta = k/2 (hermite).
    #[arg(long, value_enum)]
    pub mode: Option<ModeName>,
    /// Dual Hahn variable scaling; defaults to the one paired with --mode.
    #[arg(long, value_enum)]
    pub scaling: Option<ScalingName>,
    /// Base sequence of the rescaled family.
    #[arg(long, value_enum, default_value = "laguerre")]
    pub base: ModeName,
    /// Rescaled family: c_k = k^power.
    #[arg(long)]
    pub power: Option<f64>,
    /// M(a, b) member a_n = a/2 + perturbation / n.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub perturbation: f64,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    pub k: i64,
    #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
    pub l: i64,
    /// Test function: 1, x, x^m, cos, sin, atan, abs, gauss, sech.
    #[arg(long, default_value = "x")]
    pub f: String,
    #[arg(long, value_delimiter = ',', default_value = "50,100,200,400")]
    pub ns: Vec<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct DensityArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub xmin: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub xmax: Option<f64>,
    #[arg(long, default_value_t = 201)]
    pub points: usize,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    pub eps: f64,
    #[arg(long, value_enum, default_value = "auto")]
    pub method: DensityMethod,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

/// Failure with its exit status.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidParameter(_) | Error::DegenerateLimit(_) => EXIT_CONFIG,
            _ => EXIT_FAILURE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn config(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_CONFIG,
        message: message.into(),
    }
}

pub fn build_family(args: &FamilyArgs) -> crate::Result<(MeasureFamily, LimitData)> {
    let missing = |flag: &str| Error::InvalidParameter(format!("this family needs --{flag}"));
    match args.family {
        FamilyName::Mab => family_mab_perturbed(
            args.a.unwrap_or(1.0),
            args.b.unwrap_or(0.0),
            args.perturbation,
        ),
        FamilyName::Rescaled => {
            let base = match args.base {
                ModeName::Laguerre => RescaledBase::Laguerre {
                    alpha: args.alpha.unwrap_or(0.0),
                },
                ModeName::Hermite => RescaledBase::Hermite,
            };
            let default_power = if base == RescaledBase::Hermite {
                0.5
            } else {
                1.0
            };
            family_rescaled_power(base, args.power.unwrap_or(default_power))
        }
        FamilyName::Wall => family_wall(args.b.ok_or(missing("b"))?, args.c.ok_or(missing("c"))?),
        FamilyName::Jacobi => family_jacobi_growing(
            args.a.ok_or(missing("a"))?,
            args.b.ok_or(missing("b"))?,
            args.alpha.unwrap_or(0.0),
            args.beta.unwrap_or(0.0),
        ),
        FamilyName::Laguerre => {
            family_laguerre_growing(args.a.ok_or(missing("a"))?, args.alpha.unwrap_or(0.0))
        }
        FamilyName::DualHahn => {
            let mode = match args.mode.unwrap_or(ModeName::Laguerre) {
                ModeName::Laguerre => DualHahnMode::Laguerre {
                    beta: args.beta.ok_or(missing("beta"))?,
                },
                ModeName::Hermite => DualHahnMode::Hermite,
            };
            let scaling = match (args.scaling, mode) {
                (Some(ScalingName::Linear), _) => DualHahnScaling::Linear,
                (Some(ScalingName::Hermite), _) => DualHahnScaling::Hermite,
                (None, DualHahnMode::Laguerre { .. }) => DualHahnScaling::Linear,
                (None, DualHahnMode::Hermite) => DualHahnScaling::Hermite,
            };
            family_dual_hahn(args.alpha.unwrap_or(0.0), mode, scaling)
        }
    }
}

fn capped_ns(ns: &[usize]) -> Result<Vec<usize>, Failure> {
    let cap = match std::env::var(MAX_N_ENV) {
        Ok(v) => Some(v.trim().parse::<usize>().map_err(|_| {
            config(format!(
                "{MAX_N_ENV} must be a non-negative integer, got '{v}'"
            ))
        })?),
        Err(_) => None,
    };
    let kept: Vec<usize> = ns
        .iter()
        .copied()
        .filter(|&n| cap.is_none_or(|c| n <= c))
        .collect();
    if kept.is_empty() {
        return Err(config(format!("no n left after applying {MAX_N_ENV}")));
    }
    Ok(kept)
}

fn emit(output: &OutputArgs, text: &str, stdout: &mut dyn std::io::Write) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure {
        code: EXIT_FAILURE,
        message: format!("cannot write output: {e}"),
    };
    match &output.out {
        Some(path) => std::fs::write(path, text).map_err(io),
        None => stdout.write_all(text.as_bytes()).map_err(io),
    }
}

fn table_command(
    family: &FamilyArgs,
    run: &RunArgs,
    threshold: Option<f64>,
    stdout: &mut dyn std::io::Write,
    stderr: &mut dyn std::io::Write,
) -> Result<i32, Failure> {
    let f = TestFunction::parse(&run.f)?;
    if threshold.is_some_and(|t| !(t > 0.0)) {
        return Err(config("--threshold must be positive"));
    }
    let ns = capped_ns(&run.ns)?;
    let (fam, limit) = build_family(family)?;
    for w in &limit.warnings {
        let _ = writeln!(stderr, "warning: {w}");
    }
    let table = convergence_table(&fam, &limit, run.k, run.l, &f, &ns)?;
    for row in &table.rows {
        if let crate::weak::TableRow::Failed { n, error } = row {
            let _ = writeln!(stderr, "row n = {n} failed: {error}");
        }
    }
    let body = match run.output.format {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json() + "\n",
    };
    emit(&run.output, &body, stdout)?;
    let Some(threshold) = threshold else {
        return Ok(EXIT_OK);
    };
    let passed = table.passes(threshold);
    let final_error = table
        .last()
        .and_then(|r| r.record())
        .map_or("failed".to_string(), |r| format!("{:e}", r.abs_error));
    let _ = writeln!(
        stderr,
        "trend: {}; final abs_error: {final_error}; threshold: {threshold:e}; {}",
        table.trend,
        if passed { "PASS" } else { "FAIL" }
    );
    Ok(if passed { EXIT_OK } else { EXIT_FAILURE })
}

fn density_command(
    family: &FamilyArgs,
    grid: &DensityArgs,
    output: &OutputArgs,
    stdout: &mut dyn std::io::Write,
) -> Result<i32, Failure> {
    let DensityArgs {
        xmin,
        xmax,
        points,
        eps,
        method,
    } = *grid;
    if points < 2 {
        return Err(config("--points must be at least 2"));
    }
    if !(eps > 0.0) {
        return Err(config("--eps must be positive"));
    }
    let (_, limit) = build_family(family)?;
    let (lo, hi) = limit.density_window();
    let (lo, hi) = (xmin.unwrap_or(lo), xmax.unwrap_or(hi));
    if !(lo < hi) {
        return Err(config("--xmin must be below --xmax"));
    }
    // the continued fraction of an unbounded half-line limit does not
    // settle this close to its spectrum
    let closed = match method {
        DensityMethod::Stieltjes => None,
        DensityMethod::Auto if limit.bilateral.as_constant().is_some() => None,
        DensityMethod::Auto | DensityMethod::ClosedForm => match &limit.measure {
            Some(m) if m.density(0.0).is_some() => Some(m),
            _ if method == DensityMethod::Auto => None,
            _ => return Err(config("no closed-form density is known for this limit")),
        },
    };
    let mut rows = Vec::with_capacity(points);
    for i in 0..points {
        let x = lo + (hi - lo) * i as f64 / (points - 1) as f64;
        let d = match closed {
            Some(measure) => measure.density(x).expect("closed form checked above"),
            None => density_matrix(&limit.bilateral, x, eps)?,
        };
        rows.push((x, d));
    }
    let body = match output.format {
        Format::Csv => {
            let mut s = String::from("x,mu11,mu12,mu22\n");
            for (x, d) in &rows {
                let _ = writeln!(s, "{x:e},{:e},{:e},{:e}", d[0], d[1], d[2]);
            }
            s
        }
        Format::Json => {
            let list: Vec<_> = rows
                .iter()
                .map(|(x, d)| json!({"x": x, "mu11": d[0], "mu12": d[1], "mu22": d[2]}))
                .collect();
            serde_json::to_string_pretty(&list).expect("density rows serialize") + "\n"
        }
    };
    emit(output, &body, stdout)?;
    Ok(EXIT_OK)
}

fn coeffs_command(
    family: &FamilyArgs,
    k: i64,
    ns: &[usize],
    output: &OutputArgs,
    stdout: &mut dyn std::io::Write,
) -> Result<i32, Failure> {
    let ns = capped_ns(ns)?;
    let (fam, limit) = build_family(family)?;
    let mut rows = Vec::with_capacity(ns.len());
    for &n in &ns {
        let index = n as i64 + k;
        if index < 0 || n < fam.first_member() {
            return Err(config(format!(
                "n = {n} with k = {k} is outside the family's index range"
            )));
        }
        let (a, b) = fam.coefficient(index as usize, n);
        rows.push((n, a, b));
    }
    let numeric = numeric_limit(&fam, k, &DEFAULT_PROBE, LIMIT_SPREAD)?;
    let closed = (limit.bilateral.a(k), limit.bilateral.b(k));
    let body = match output.format {
        Format::Csv => {
            let mut s = String::from("n,a,b\n");
            for (n, a, b) in &rows {
                let _ = writeln!(s, "{n},{a:e},{b:e}");
            }
            s.push_str("limit,a,b\n");
            let _ = writeln!(s, "numeric,{:e},{:e}", numeric.a, numeric.b);
            let _ = writeln!(s, "closed_form,{:e},{:e}", closed.0, closed.1);
            if let Some(p) = limit.printed {
                let _ = writeln!(s, "printed,{:e},{:e}", p.off_diagonal, p.diagonal);
            }
            for w in &limit.warnings {
                let _ = writeln!(s, "flag,\"{}\"", w.replace('"', "'"));
            }
            s
        }
        Format::Json => {
            let value = json!({
                "family": fam.descriptor(),
                "k": k,
                "rows": rows.iter().map(|(n, a, b)| json!({"n": n, "a": a, "b": b})).collect::<Vec<_>>(),
                "numeric": numeric,
                "closed_form": {"a": closed.0, "b": closed.1},
                "printed": limit.printed,
                "note": limit.closed_form_note,
                "flags": limit.warnings,
            });
            serde_json::to_string_pretty(&value).expect("coefficient report serializes") + "\n"
        }
    };
    emit(output, &body, stdout)?;
    if !numeric.converged {
        return Err(Failure {
            code: EXIT_FAILURE,
            message: format!(
                "numeric limit did not settle (spreads {:e}, {:e})",
                numeric.a_spread, numeric.b_spread
            ),
        });
    }
    Ok(EXIT_OK)
}

/// Execute a parsed command; diagnostics go to `stderr`.
pub fn execute(cli: &Cli, stdout: &mut dyn std::io::Write, stderr: &mut dyn std::io::Write) -> i32 {
    let outcome = match &cli.command {
        Command::Verify {
            family,
            run,
            threshold,
        } => table_command(family, run, Some(*threshold), stdout, stderr),
        Command::Table { family, run } => table_command(family, run, None, stdout, stderr),
        Command::Density {
            family,
            grid,
            output,
        } => density_command(family, grid, output, stdout),
        Command::Coeffs {
            family,
            k,
            ns,
            output,
        } => coeffs_command(family, *k, ns, output, stdout),
    };
    match outcome {
        Ok(code) => code,
        Err(failure) => {
            let _ = writeln!(stderr, "error: {}", failure.message);
            failure.code
        }
    }
}

/// Parse `args` (including the program name) and run.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    execute(&cli, &mut stdout.lock(), &mut stderr.lock())
}
