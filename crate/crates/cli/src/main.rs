mod demos;
mod output;

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use qdk_core::campaign::{run_suite, SUITES};
use qdk_core::measurement::OptimizerConfig;
use qdk_core::report::{measure_report, MeasureReport, ReportOptions};
use qdk_core::states::{
    named_state, parse_state_json, random_density, random_pure, state_to_json, CATALOG,
};
use qdk_core::{DensityMatrix, Subsystem};

use output::{columns_or_all, render_report, Cell, Column, Format, Table};

/// Bipartite quantum correlation measures, in bits.
///
/// Exit codes: 0 success, 1 parse or validation error, 2 assertion failure,
/// 3 optimizer non-convergence (with --strict).
#[derive(Parser, Debug)]
#[command(name = "qdk", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

/// Shared options; each can also be set through a `QDK_`-prefixed
/// environment variable, which a flag overrides.
#[derive(Args, Debug)]
struct Global {
    /// Random starts for the relative-entropy searches
    #[arg(long, global = true, env = "QDK_RESTARTS", default_value_t = 30)]
    restarts: usize,
    /// Polar points of the measurement seeding grid (azimuth gets twice as many)
    #[arg(long, global = true, env = "QDK_GRID", default_value_t = 12)]
    grid: usize,
    /// Simplex convergence tolerance on objective values
    #[arg(long, global = true, env = "QDK_TOL", default_value_t = 1e-8)]
    tol: f64,
    /// Simplex iteration budget per start for measurement searches
    #[arg(long, global = true, env = "QDK_MAX_ITER", default_value_t = 200)]
    max_iter: usize,
    /// Seed for every random choice
    #[arg(long, global = true, env = "QDK_SEED", default_value_t = 0)]
    seed: u64,
    /// Worker threads [default: available parallelism]
    #[arg(long, global = true, env = "QDK_THREADS")]
    threads: Option<usize>,
    #[arg(long, global = true, env = "QDK_FORMAT", value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Measured subsystem for conditional entropy, C and discord
    #[arg(long, global = true, env = "QDK_ORIENTATION", value_enum, default_value_t = Side::B)]
    orientation: Side,
    /// Exit with code 3 when an optimizer did not converge
    #[arg(long, global = true, env = "QDK_STRICT")]
    strict: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Side {
    #[value(name = "A", alias = "a")]
    A,
    #[value(name = "B", alias = "b")]
    B,
}

impl From<Side> for Subsystem {
    fn from(s: Side) -> Self {
        match s {
            Side::A => Subsystem::A,
            Side::B => Subsystem::B,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Report every measure for one state
    Compute {
        #[command(flatten)]
        source: StateSource,
        /// Restrict output to these measures (repeatable)
        #[arg(long = "measure", value_enum)]
        measures: Vec<Column>,
    },
    /// Run a scripted scenario; exit 0 iff its assertions hold
    Demo {
        #[arg(value_enum)]
        name: demos::Demo,
        /// Sample count for demos that draw random states
        #[arg(long, default_value_t = 20)]
        count: usize,
    },
    /// Sweep a one-parameter family and tabulate measures
    Scan {
        #[arg(value_enum)]
        family: Family,
        #[arg(long, default_value_t = 0.0)]
        from: f64,
        #[arg(long, default_value_t = 1.0)]
        to: f64,
        #[arg(long, default_value_t = 0.05)]
        step: f64,
        /// Columns to report (repeatable) [default: iq, classical, discord]
        #[arg(long = "measure", value_enum)]
        measures: Vec<Column>,
    },
    /// Run a named invariant suite; exit 0 iff there are no violations
    Property {
        /// One of the suites listed by `qdk property --help`
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(SUITES))]
        suite: String,
        #[arg(default_value_t = 200)]
        count: usize,
    },
    /// Sample a random state and report on it
    Random {
        #[arg(long, default_value_t = 2)]
        dim_a: usize,
        #[arg(long, default_value_t = 2)]
        dim_b: usize,
        /// Rank of the sampled mixed state [default: full]
        #[arg(long)]
        rank: Option<usize>,
        /// Sample a pure state instead
        #[arg(long, conflicts_with = "rank")]
        pure: bool,
        #[arg(long = "measure", value_enum)]
        measures: Vec<Column>,
    },
}

#[derive(Args, Debug)]
struct StateSource {
    /// Catalog state name
    #[arg(long, required_unless_present = "file", conflicts_with = "file", value_parser = clap::builder::PossibleValuesParser::new(CATALOG.iter().copied().chain(["bell"])))]
    state: Option<String>,
    /// JSON state file with dimA, dimB and matrix of [re, im] entries
    #[arg(long)]
    file: Option<PathBuf>,
    /// State parameter, e.g. p=0.5 (repeatable)
    #[arg(long = "param", value_parser = parse_param, requires = "state")]
    params: Vec<(String, f64)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Family {
    Werner,
    Pure,
}

impl Family {
    fn parameter(self) -> &'static str {
        match self {
            Family::Werner => "p",
            Family::Pure => "a",
        }
    }
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected key=value, got '{s}'"))?;
    let v: f64 = v
        .trim()
        .parse()
        .map_err(|e| format!("bad value in '{s}': {e}"))?;
    Ok((k.trim().to_string(), v))
}

/// Failures, each mapped to an exit code.
#[derive(Debug)]
enum Failure {
    Input(String),
    Assertion(String),
    NonConvergence(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 1,
            Failure::Assertion(_) => 2,
            Failure::NonConvergence(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Assertion(m) | Failure::NonConvergence(m) => m,
        }
    }
}

impl From<qdk_core::Error> for Failure {
    fn from(e: qdk_core::Error) -> Self {
        match e {
            qdk_core::Error::InconsistentDiscord(_) | qdk_core::Error::EigenNoConvergence(_) => {
                Failure::NonConvergence(e.to_string())
            }
            other => Failure::Input(other.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

struct Context {
    cfg: OptimizerConfig,
    format: Format,
    orientation: Subsystem,
    strict: bool,
}

impl Context {
    fn report_options(&self, geometry: bool) -> ReportOptions {
        ReportOptions {
            orientation: self.orientation,
            geometry,
            ..ReportOptions::default()
        }
    }

    fn check_report(&self, r: &MeasureReport) -> Outcome {
        let defects = r.consistency_defects();
        if !defects.is_empty() {
            return Err(Failure::Assertion(format!(
                "inconsistent report: {}",
                defects.join("; ")
            )));
        }
        self.check_converged(r.converged(), &r.state)
    }

    fn check_converged(&self, converged: bool, what: &str) -> Outcome {
        if self.strict && !converged {
            return Err(Failure::NonConvergence(format!(
                "optimizer did not converge for {what}"
            )));
        }
        Ok(())
    }
}

fn load_state(source: &StateSource) -> Result<(String, DensityMatrix), Failure> {
    if let Some(path) = &source.file {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        let rho = parse_state_json(&text)
            .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        return Ok((path.display().to_string(), rho));
    }
    let name = source.state.as_deref().expect("clap enforces one source");
    let params: BTreeMap<String, f64> = source.params.iter().cloned().collect();
    let rho = named_state(name, &params)?;
    let label = if params.is_empty() {
        name.to_string()
    } else {
        let ps: Vec<String> = params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("{name}({})", ps.join(","))
    };
    Ok((label, rho))
}

fn compute(ctx: &Context, source: &StateSource, measures: &[Column]) -> Outcome {
    let (label, rho) = load_state(source)?;
    let columns = columns_or_all(measures);
    let geometry = columns.iter().any(|c| c.needs_geometry());
    let r = measure_report(&label, &rho, &ctx.report_options(geometry), &ctx.cfg)?;
    print!("{}", render_report(&r, &columns, ctx.format));
    ctx.check_report(&r)
}

fn scan_values(from: f64, to: f64, step: f64) -> Result<Vec<f64>, Failure> {
    let bad = |m: &str| Err(Failure::Input(m.to_string()));
    if step.is_nan() || step <= 0.0 || !step.is_finite() {
        return bad("--step must be positive");
    }
    if !(0.0..=1.0).contains(&from) || !(0.0..=1.0).contains(&to) || from > to {
        return bad("range must satisfy 0 <= from <= to <= 1");
    }
    let n = ((to - from) / step + 1e-9).floor() as usize;
    if n > 100_000 {
        return bad("range/step gives too many rows");
    }
    let mut v: Vec<f64> = (0..=n).map(|i| from + i as f64 * step).collect();
    // Snap the last point onto the endpoint when the step divides the range.
    if let Some(last) = v.last_mut() {
        if (*last - to).abs() < 1e-9 {
            *last = to;
        }
    }
    Ok(v)
}

fn scan(
    ctx: &Context,
    family: Family,
    from: f64,
    to: f64,
    step: f64,
    measures: &[Column],
) -> Outcome {
    let values = scan_values(from, to, step)?;
    let columns = if measures.is_empty() {
        vec![Column::Iq, Column::Classical, Column::Discord]
    } else {
        columns_or_all(measures)
    };
    let geometry = columns.iter().any(|c| c.needs_geometry());
    let opts = ctx.report_options(geometry);
    let name = match family {
        Family::Werner => "werner",
        Family::Pure => "pure",
    };
    let reports: Vec<Result<MeasureReport, Failure>> = values
        .par_iter()
        .map(|&x| {
            let params = BTreeMap::from([(family.parameter().to_string(), x)]);
            let rho = named_state(name, &params)?;
            Ok(measure_report(
                &format!("{name}({}={x})", family.parameter()),
                &rho,
                &opts,
                &ctx.cfg,
            )?)
        })
        .collect();
    let mut table = Table::new(
        [family.parameter()]
            .into_iter()
            .chain(columns.iter().map(|c| c.header())),
    );
    let mut checked = Ok(());
    for (x, r) in values.iter().zip(reports) {
        let r = r?;
        let mut row = vec![Cell::Num(*x)];
        row.extend(columns.iter().map(|c| c.cell(&r)));
        table.push(row);
        if checked.is_ok() {
            checked = ctx.check_report(&r);
        }
    }
    print!("{}", table.render(ctx.format));
    checked
}

fn property(ctx: &Context, suite: &str, count: usize, seed: u64) -> Outcome {
    let out = run_suite(suite, count, seed, &ctx.cfg)?;
    match ctx.format {
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(&out).expect("serializable")
        ),
        _ => {
            let mut t = Table::new(["suite", "samples", "seed", "violations"]);
            t.push(vec![
                suite.into(),
                count.into(),
                Cell::Text(seed.to_string()),
                out.violations.into(),
            ]);
            print!("{}", t.render(ctx.format));
            if let Some(v) = &out.first_violation {
                eprintln!("first violation: {v}");
            }
        }
    }
    if out.passed() {
        Ok(())
    } else {
        Err(Failure::Assertion(format!(
            "{} of {count} samples violated {suite}",
            out.violations
        )))
    }
}

fn random(
    ctx: &Context,
    dim_a: usize,
    dim_b: usize,
    rank: Option<usize>,
    pure: bool,
    measures: &[Column],
) -> Outcome {
    let rho = if pure {
        random_pure(dim_a, dim_b, ctx.cfg.seed)?.density()
    } else {
        random_density(dim_a, dim_b, rank.unwrap_or(dim_a * dim_b), ctx.cfg.seed)?
    };
    let label = format!("random(seed={})", ctx.cfg.seed);
    let columns = columns_or_all(measures);
    let geometry = columns.iter().any(|c| c.needs_geometry());
    let r = measure_report(&label, &rho, &ctx.report_options(geometry), &ctx.cfg)?;
    if ctx.format == Format::Json {
        let state: serde_json::Value =
            serde_json::from_str(&state_to_json(&rho)).expect("own output parses");
        let both = serde_json::json!({ "state": state, "report": r });
        println!(
            "{}",
            serde_json::to_string_pretty(&both).expect("serializable")
        );
    } else {
        println!("{}", state_to_json(&rho));
        println!();
        print!("{}", render_report(&r, &columns, ctx.format));
    }
    ctx.check_report(&r)
}

fn run(cli: Cli) -> Outcome {
    let g = &cli.global;
    if let Some(n) = g.threads {
        if n == 0 {
            return Err(Failure::Input("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Input(e.to_string()))?;
    }
    let cfg = OptimizerConfig {
        grid: g.grid,
        restarts: g.restarts,
        tol: g.tol,
        max_iter: g.max_iter,
        seed: g.seed,
        ..OptimizerConfig::default()
    };
    cfg.validate()?;
    let ctx = Context {
        cfg,
        format: g.format,
        orientation: g.orientation.into(),
        strict: g.strict,
    };
    match &cli.command {
        Command::Compute { source, measures } => compute(&ctx, source, measures),
        Command::Demo { name, count } => demos::run(&ctx, *name, *count),
        Command::Scan {
            family,
            from,
            to,
            step,
            measures,
        } => scan(&ctx, *family, *from, *to, *step, measures),
        Command::Property { suite, count } => property(&ctx, suite, *count, ctx.cfg.seed),
        Command::Random {
            dim_a,
            dim_b,
            rank,
            pure,
            measures,
        } => random(&ctx, *dim_a, *dim_b, *rank, *pure, measures),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scan_grid() {
        let v = scan_values(0.0, 1.0, 0.05).unwrap();
        assert_eq!(v.len(), 21);
        assert_eq!(v[20], 1.0);
        assert_eq!(scan_values(0.0, 1.0, 0.1).unwrap().len(), 11);
        assert!(scan_values(0.0, 1.0, 0.0).is_err());
        assert!(scan_values(0.5, 0.2, 0.1).is_err());
        assert!(scan_values(0.0, 2.0, 0.1).is_err());
    }

    #[test]
    fn params() {
        assert_eq!(parse_param("p=0.5").unwrap(), ("p".into(), 0.5));
        assert!(parse_param("p").is_err());
        assert!(parse_param("p=x").is_err());
    }

    #[test]
    fn cli_definition_is_valid() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
