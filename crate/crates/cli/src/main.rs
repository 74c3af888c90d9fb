//! `vinecop` command-line tool: fit, sample, density, schedule, export-dot.
//!
//! Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric failure.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use vinecop::io::{load_from_path, read_csv, save, write_csv, CsvData};
use vinecop::scheduler::traversal_stats;
use vinecop::{
    build, export_dot, get_source, log_density, sample, sample_conditional, schedule,
    to_pseudo_obs, BuildConfig, CopulaFamily, Error, FitMethod, FitOptions, PseudoObs,
    SamplingOrder, StructureKind, VarSet, VineModel,
};

#[derive(Parser, Debug)]
#[command(name = "vinecop", version, about = "Vine copula fitting, scheduling and sampling")]
struct Cli {
    /// Seed for sampling.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Suppress summaries and warnings on standard error.
    #[arg(long, global = true)]
    quiet: bool,
    /// Output file; standard output when absent.
    #[arg(long, short = 'o', global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Select a vine structure on CSV data and fit its pair-copulas.
    Fit {
        #[arg(long)]
        data: PathBuf,
        /// Variables to condition on when sampling, e.g. "0,3".
        #[arg(long)]
        cond: Option<String>,
        #[arg(long, value_enum, default_value_t = Structure::Rvine)]
        structure: Structure,
        /// Comma-separated family names.
        #[arg(long, default_value = "independence,gaussian,clayton,gumbel,frank")]
        families: String,
        #[arg(long, value_enum, default_value_t = Method::Itau)]
        method: Method,
        /// Level of the Kendall's tau independence test used for truncation.
        #[arg(long, default_value_t = 0.01)]
        indep_threshold: f64,
    },
    /// Draw samples from a model.
    Sample {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        n: usize,
        /// Fixed values of conditioning variables, e.g. "0=0.3,2=0.9".
        #[arg(long)]
        cond_values: Option<String>,
        /// Map samples to the data scale with the empirical quantiles of this CSV.
        #[arg(long)]
        raw: Option<PathBuf>,
    },
    /// Log copula density of each data row.
    Density {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
    },
    /// Choose a sampling order and report its h-function cost.
    Schedule {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        cond: Option<String>,
        /// Pick the most expensive order instead of the cheapest.
        #[arg(long)]
        worst: bool,
    },
    /// Write the computational graph as Graphviz DOT.
    ExportDot {
        #[arg(long)]
        model: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Structure {
    Rvine,
    Cvine,
    Dvine,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Method {
    Itau,
    Mle,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Data(String),
    Numeric(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Data(_) => 3,
            Failure::Numeric(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) | Failure::Numeric(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NonConvergence { .. } | Error::Domain { .. } | Error::TauOutOfRange { .. } => {
                Failure::Numeric(e.to_string())
            }
            _ => Failure::Data(e.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

struct Ctx {
    seed: u64,
    quiet: bool,
    output: Option<PathBuf>,
}

impl Ctx {
    fn note(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }

    fn emit(&self, bytes: &[u8]) -> CliResult<()> {
        let res = match &self.output {
            Some(p) => std::fs::write(p, bytes),
            None => std::io::stdout().lock().write_all(bytes),
        };
        res.map_err(|e| Failure::Data(format!("cannot write output: {e}")))
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn parse_indices(flag: &str, text: &str, d: usize) -> CliResult<VarSet> {
    let mut set = VarSet::EMPTY;
    for tok in text.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let i: usize = tok
            .parse()
            .map_err(|_| usage(format!("{flag}: `{tok}` is not a variable index")))?;
        if i >= d {
            return Err(usage(format!("{flag}: index {i} is out of range for {d} variables")));
        }
        set = set.with(i);
    }
    Ok(set)
}

fn parse_cond_values(text: &str, d: usize) -> CliResult<Vec<(usize, f64)>> {
    let mut out: Vec<(usize, f64)> = Vec::new();
    for tok in text.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let bad = || usage(format!("--cond-values: expected `index=value`, got `{tok}`"));
        let (k, v) = tok.split_once('=').ok_or_else(bad)?;
        let k: usize = k.trim().parse().map_err(|_| bad())?;
        let v: f64 = v.trim().parse().map_err(|_| bad())?;
        if k >= d {
            return Err(usage(format!("--cond-values: index {k} is out of range for {d} variables")));
        }
        if !(v > 0.0 && v < 1.0) {
            return Err(usage(format!("--cond-values: value {v} for variable {k} is outside (0, 1)")));
        }
        if out.iter().any(|p| p.0 == k) {
            return Err(usage(format!("--cond-values: variable {k} is given twice")));
        }
        out.push((k, v));
    }
    Ok(out)
}

fn parse_families(text: &str) -> CliResult<Vec<CopulaFamily>> {
    let fams = text
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|e: Error| usage(format!("--families: {e}"))))
        .collect::<CliResult<Vec<_>>>()?;
    if fams.is_empty() {
        return Err(usage("--families: no family given"));
    }
    Ok(fams)
}

/// Uses the data as pseudo-observations when it already lies in (0, 1),
/// otherwise rank-transforms it.
fn uniform_scale(ctx: &Ctx, data: &CsvData, path: &Path) -> CliResult<PseudoObs<f64>> {
    let inside = data.rows.iter().flatten().all(|&x| x > 0.0 && x < 1.0);
    if inside {
        return Ok(PseudoObs::from_rows(&data.rows)?);
    }
    ctx.note(format!(
        "warning: {} has values outside (0, 1); using rank-transformed pseudo-observations",
        path.display()
    ));
    Ok(to_pseudo_obs(&data.rows)?)
}

fn fmt_num(x: f64) -> String {
    format!("{x}")
}

fn load_model(path: &Path) -> CliResult<VineModel<f64>> {
    load_from_path(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn read_data(path: &Path) -> CliResult<CsvData> {
    read_csv(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

#[allow(clippy::too_many_arguments)]
fn cmd_fit(
    ctx: &Ctx,
    data: &Path,
    cond: Option<&str>,
    structure: Structure,
    families: &str,
    method: Method,
    indep_threshold: f64,
) -> CliResult<()> {
    let families = parse_families(families)?;
    if !(0.0..=1.0).contains(&indep_threshold) {
        return Err(usage("--indep-threshold: must lie in [0, 1]"));
    }
    let csv = read_data(data)?;
    let d = csv.ncols();
    let cond_set = match cond {
        Some(c) => parse_indices("--cond", c, d)?,
        None => VarSet::EMPTY,
    };
    if d >= 2 && cond_set.len() >= d {
        return Err(usage("--cond: conditioning on every variable leaves nothing to sample"));
    }
    let obs = uniform_scale(ctx, &csv, data)?;
    let cfg = BuildConfig {
        cond_set,
        kind: match structure {
            Structure::Rvine => StructureKind::RVine,
            Structure::Cvine => StructureKind::CVine,
            Structure::Dvine => StructureKind::DVine,
        },
        families,
        fit: FitOptions {
            method: match method {
                Method::Itau => FitMethod::Itau,
                Method::Mle => FitMethod::Mle,
            },
            independence_threshold: indep_threshold,
        },
        ..BuildConfig::default()
    };
    let model = build(&obs, &cfg)?.with_provenance(Some(format!(
        "vinecop fit: {structure:?} structure, {method:?} method, {} rows",
        obs.n()
    ).to_lowercase()));

    if !ctx.quiet {
        for (k, level) in model.structure().levels().iter().enumerate() {
            eprintln!("level {k}:");
            for (i, e) in level.iter().enumerate() {
                let c = model.copula(k, i);
                eprintln!(
                    "  {e:<12} {:<12} rot {:>3}  theta {:>10.4}  |tau| {:.4}",
                    c.family().name(),
                    c.rotation(),
                    c.theta(),
                    c.tau().abs()
                );
            }
        }
        let ll: f64 = log_density(&model, &obs)?.iter().sum();
        eprintln!("log-likelihood: {ll:.6}");
        if let Some(o) = model.default_order() {
            eprintln!("default order: {o:?}");
        }
    }
    ctx.emit(save(&model).as_bytes())
}

/// Inverse empirical CDF of each column of `data`.
fn empirical_quantiles(data: &CsvData, u: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = data.rows.len();
    let sorted: Vec<Vec<f64>> = (0..data.ncols())
        .map(|j| {
            let mut c: Vec<f64> = data.rows.iter().map(|r| r[j]).collect();
            c.sort_by(f64::total_cmp);
            c
        })
        .collect();
    u.iter()
        .map(|row| {
            row.iter()
                .zip(&sorted)
                .map(|(&p, col)| {
                    let k = ((p * n as f64).ceil() as usize).clamp(1, n);
                    col[k - 1]
                })
                .collect()
        })
        .collect()
}

fn cmd_sample(
    ctx: &Ctx,
    model_path: &Path,
    n: usize,
    cond_values: Option<&str>,
    raw: Option<&Path>,
) -> CliResult<()> {
    if n == 0 {
        return Err(usage("--n: must be at least 1"));
    }
    let model = load_model(model_path)?;
    let d = model.d();
    let raw_data = match raw {
        Some(p) => {
            let data = read_data(p)?;
            if data.ncols() != d {
                return Err(usage(format!(
                    "--raw: {} has {} columns, model has {d}",
                    p.display(),
                    data.ncols()
                )));
            }
            Some(data)
        }
        None => None,
    };
    let values = match cond_values {
        Some(t) => parse_cond_values(t, d)?,
        None => Vec::new(),
    };
    let keys: VarSet = values.iter().map(|p| p.0).collect();
    if let Some(cs) = model.cond_set() {
        if !values.is_empty() && keys != cs {
            return Err(usage(format!(
                "--cond-values: keys {{{keys}}} do not match the model's conditioning set {{{cs}}}"
            )));
        }
    }
    if keys.len() >= d {
        return Err(usage("--cond-values: every variable is fixed"));
    }

    let stored = model
        .default_order()
        .filter(|_| model.cond_set().unwrap_or(VarSet::EMPTY) == keys)
        .map(|o| SamplingOrder::new(d, o.to_vec(), keys))
        .transpose()?
        .filter(|o| o.rest().len() <= 1);
    let order = match stored {
        Some(o) => o,
        None => schedule(model.structure(), keys, false)?,
    };
    let batch = if values.is_empty() {
        sample(&model, n, &order, ctx.seed)?
    } else {
        sample_conditional(&model, n, &values, &order, ctx.seed)?
    };
    let mut rows = batch.rows();
    let headers: Vec<String> = match &raw_data {
        Some(data) => {
            rows = empirical_quantiles(data, &rows);
            data.headers.clone()
        }
        None => (0..d).map(|j| format!("u{j}")).collect(),
    };
    ctx.note(format!("sampled {n} rows with order {order}"));
    let text: Vec<Vec<String>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| fmt_num(x)).collect())
        .collect();
    let mut buf = Vec::new();
    write_csv(&mut buf, &headers, &text)?;
    ctx.emit(&buf)
}

fn cmd_density(ctx: &Ctx, model_path: &Path, data_path: &Path) -> CliResult<()> {
    let model = load_model(model_path)?;
    let data = read_data(data_path)?;
    if data.ncols() != model.d() {
        return Err(Failure::Data(format!(
            "{} has {} columns, model has {}",
            data_path.display(),
            data.ncols(),
            model.d()
        )));
    }
    let obs = uniform_scale(ctx, &data, data_path)?;
    let ld = log_density(&model, &obs)?;
    let total: f64 = ld.iter().sum();
    let mut rows: Vec<Vec<String>> = ld
        .iter()
        .enumerate()
        .map(|(i, &x)| vec![(i + 1).to_string(), fmt_num(x)])
        .collect();
    rows.push(vec!["total".into(), fmt_num(total)]);
    ctx.note(format!("total log-density: {total}"));
    let mut buf = Vec::new();
    write_csv(&mut buf, &["row".to_string(), "log_density".to_string()], &rows)?;
    ctx.emit(&buf)
}

fn cmd_schedule(ctx: &Ctx, model_path: &Path, cond: Option<&str>, worst: bool) -> CliResult<()> {
    let model = load_model(model_path)?;
    let d = model.d();
    let cond = match cond {
        Some(c) => parse_indices("--cond", c, d)?,
        None => VarSet::EMPTY,
    };
    if cond.len() >= d {
        return Err(usage("--cond: conditioning on every variable leaves nothing to sample"));
    }
    let order = schedule(model.structure(), cond, worst)?;
    let stats = traversal_stats(&order, model.structure())?;
    let sources = get_source(&order, model.structure())?;
    let listed: Vec<String> = order
        .order()
        .iter()
        .map(|&j| format!("{{{}}}", sources[j]))
        .collect();
    let text = format!(
        "{order}, h-calls: {}\nsources: {}\nhinv-calls: {}\n",
        stats.h_calls,
        listed.join(" "),
        stats.hinv_calls
    );
    ctx.emit(text.as_bytes())
}

fn cmd_export_dot(ctx: &Ctx, model_path: &Path) -> CliResult<()> {
    let model = load_model(model_path)?;
    ctx.emit(export_dot(model.structure()).as_bytes())
}

fn run(cli: Cli) -> CliResult<()> {
    let ctx = Ctx {
        seed: cli.seed,
        quiet: cli.quiet,
        output: cli.output,
    };
    match &cli.command {
        Command::Fit {
            data,
            cond,
            structure,
            families,
            method,
            indep_threshold,
        } => cmd_fit(
            &ctx,
            data,
            cond.as_deref(),
            *structure,
            families,
            *method,
            *indep_threshold,
        ),
        Command::Sample {
            model,
            n,
            cond_values,
            raw,
        } => cmd_sample(&ctx, model, *n, cond_values.as_deref(), raw.as_deref()),
        Command::Density { model, data } => cmd_density(&ctx, model, data),
        Command::Schedule { model, cond, worst } => {
            cmd_schedule(&ctx, model, cond.as_deref(), *worst)
        }
        Command::ExportDot { model } => cmd_export_dot(&ctx, model),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
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
    fn index_lists() {
        assert_eq!(parse_indices("--cond", "0, 2", 3).unwrap().to_vec(), [0, 2]);
        assert_eq!(parse_indices("--cond", "", 3).unwrap(), VarSet::EMPTY);
        let e = parse_indices("--cond", "3", 3).unwrap_err();
        assert_eq!(e.code(), 2);
        assert!(e.message().contains("--cond"));
    }

    #[test]
    fn cond_value_lists() {
        assert_eq!(parse_cond_values("0=0.5,2=0.25", 3).unwrap(), [(0, 0.5), (2, 0.25)]);
        assert!(parse_cond_values("0=1.5", 3).is_err());
        assert!(parse_cond_values("0=0.5,0=0.4", 3).is_err());
        assert!(parse_cond_values("x", 3).is_err());
    }

    #[test]
    fn empirical_quantile_steps() {
        let data = CsvData {
            headers: vec!["a".into()],
            rows: vec![vec![3.0], vec![1.0], vec![2.0], vec![4.0]],
        };
        let q = empirical_quantiles(&data, &[vec![0.1], vec![0.25], vec![0.26], vec![0.99]]);
        assert_eq!(q, vec![vec![1.0], vec![1.0], vec![2.0], vec![4.0]]);
    }

    #[test]
    fn error_classes_map_to_exit_codes() {
        let numeric = Error::NonConvergence {
            family: CopulaFamily::Gumbel,
            p: 0.5,
            v: 0.5,
        };
        assert_eq!(Failure::from(numeric).code(), 4);
        let data = Error::Csv {
            line: Some(3),
            message: "ragged".into(),
        };
        assert_eq!(Failure::from(data).code(), 3);
        assert_eq!(Failure::from(Error::Infeasible("x".into())).code(), 3);
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
