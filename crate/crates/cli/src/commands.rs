use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use marec::estimators::{VarStage1Fit, VmaEstimateReport};
use marec::{
    ar_to_ma, durbin_with, fit_ar_ols, fit_var_ols, ma_to_ar, restricted_ols_from_stage1,
    restricted_ols_multivariate_from_stage1, run_grid, simulate_ar, simulate_ma, simulate_vma, suggest_ar_order,
    unrestricted_ols_from_stage1, unrestricted_ols_multivariate_from_stage1, ArModel, DurbinSequence, EstimateReport,
    GridSpec, MaModel, Region, RestrictedConfig, TimeSeries, VmaModel,
};
use nalgebra::DMatrix;
use serde_json::{json, Value};

use crate::formats::{
    parse_matrix, parse_range, parse_reals, read_grid, read_observations, render_heatmap, write_grid,
    write_observations, Metric,
};
use crate::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "marec",
    version,
    about = "Moving-average estimation via the AR coefficient recursion"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print MA(∞) or AR(∞) coefficients as index,value rows.
    #[command(subcommand)]
    Recursion(RecursionCommand),
    /// Simulate a process and write headerless CSV observations.
    Simulate(SimulateArgs),
    /// Estimate MA coefficients from an observation file.
    Estimate(EstimateArgs),
    /// Run the Monte Carlo grid experiment.
    Grid(GridArgs),
    /// Render a grid result as an SVG heatmap.
    Heatmap(HeatmapArgs),
}

#[derive(Debug, Subcommand)]
pub enum RecursionCommand {
    ArToMa {
        #[arg(long, allow_hyphen_values = true)]
        phi: String,
        #[arg(long)]
        n: usize,
    },
    MaToAr {
        #[arg(long, allow_hyphen_values = true)]
        psi: String,
        #[arg(long)]
        n: usize,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModelKind {
    Ma,
    Ar,
    Vma,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub model: ModelKind,
    /// MA coefficients, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub psi: Option<String>,
    /// AR coefficients, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub phi: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    pub sigma2: f64,
    /// One VMA coefficient matrix per occurrence, rows separated by ';'.
    #[arg(long, allow_hyphen_values = true)]
    pub vma: Vec<String>,
    /// VMA innovation covariance (identity if absent).
    #[arg(long, allow_hyphen_values = true)]
    pub sigma: Option<String>,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Durbin,
    Restricted,
    Unrestricted,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SequenceArg {
    EstimatesOnly,
    WithLeadingUnit,
}

impl From<SequenceArg> for DurbinSequence {
    fn from(s: SequenceArg) -> Self {
        match s {
            SequenceArg::EstimatesOnly => DurbinSequence::EstimatesOnly,
            SequenceArg::WithLeadingUnit => DurbinSequence::WithLeadingUnit,
        }
    }
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub q: usize,
    /// Stage-1 order, or `auto` for a quarter of the sample per coefficient.
    #[arg(long, default_value = "auto")]
    pub l: String,
    #[arg(long, value_enum, default_value_t = MethodArg::Restricted)]
    pub method: MethodArg,
    #[arg(long, value_enum, default_value_t = SequenceArg::EstimatesOnly)]
    pub durbin_sequence: SequenceArg,
    /// Responses dropped from stage 2 (defaults to q).
    #[arg(long)]
    pub drop: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum RegionArg {
    Invertible,
    Noninvertible,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long, allow_hyphen_values = true, default_value = "-2.2,2.2")]
    pub psi1: String,
    #[arg(long, allow_hyphen_values = true, default_value = "-2.2,2.2")]
    pub psi2: String,
    #[arg(long, default_value_t = 23)]
    pub points: usize,
    #[arg(long, value_enum, default_value_t = RegionArg::Invertible)]
    pub region: RegionArg,
    #[arg(long, default_value_t = 400)]
    pub t: usize,
    #[arg(long, default_value_t = 100)]
    pub l: usize,
    #[arg(long, default_value_t = 500)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = SequenceArg::EstimatesOnly)]
    pub durbin_sequence: SequenceArg,
    /// Worker threads (defaults to the available parallelism).
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HeatmapArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "ratio")]
    pub metric: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn open_input(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::Usage(format!("cannot open {}: {e}", path.display())))
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Recursion(cmd) => recursion(cmd),
        Command::Simulate(args) => simulate(args),
        Command::Estimate(args) => estimate(args),
        Command::Grid(args) => grid(args),
        Command::Heatmap(args) => heatmap(args),
    }
}

fn recursion(cmd: RecursionCommand) -> Result<(), CliError> {
    let values = match cmd {
        RecursionCommand::ArToMa { phi, n } => ar_to_ma(&ArModel::new(parse_reals(&phi)?)?, n)?,
        RecursionCommand::MaToAr { psi, n } => ma_to_ar(&MaModel::new(parse_reals(&psi)?)?, n)?,
    };
    let mut out = open_output(None)?;
    writeln!(out, "index,value")?;
    for (j, v) in values.iter().enumerate() {
        writeln!(out, "{},{v}", j + 1)?;
    }
    out.flush()?;
    Ok(())
}

fn required<'a>(flag: &str, value: &'a Option<String>) -> Result<&'a str, CliError> {
    value
        .as_deref()
        .ok_or_else(|| CliError::Usage(format!("--{flag} is required for this model")))
}

fn simulate(args: SimulateArgs) -> Result<(), CliError> {
    let series = match args.model {
        ModelKind::Ma => {
            let model = MaModel::with_variance(parse_reals(required("psi", &args.psi)?)?, args.sigma2)?;
            simulate_ma(&model, args.n, args.seed)?
        }
        ModelKind::Ar => {
            let model = ArModel::with_variance(parse_reals(required("phi", &args.phi)?)?, args.sigma2)?;
            simulate_ar(&model, args.n, args.seed)?
        }
        ModelKind::Vma => {
            if args.vma.is_empty() {
                return Err(CliError::Usage("--vma is required for this model".into()));
            }
            let psi = args
                .vma
                .iter()
                .map(|m| parse_matrix(m))
                .collect::<Result<Vec<_>, _>>()?;
            let model = match &args.sigma {
                Some(s) => VmaModel::with_covariance(psi, parse_matrix(s)?)?,
                None => VmaModel::new(psi)?,
            };
            simulate_vma(&model, args.n, args.seed)?
        }
    };
    let mut out = open_output(args.out.as_deref())?;
    write_observations(&series, &mut out)?;
    out.flush()?;
    Ok(())
}

fn stage1_order(args: &EstimateArgs, series: &TimeSeries<f64>) -> Result<usize, CliError> {
    if args.l == "auto" {
        // four observations per coefficient of each equation
        Ok(suggest_ar_order(series.len() / series.dim(), None)?)
    } else {
        args.l
            .parse()
            .map_err(|_| CliError::Usage(format!("--l must be a positive integer or 'auto', got '{}'", args.l)))
    }
}

fn finite_or_null(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

fn matrix_json(m: &DMatrix<f64>) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|r| json!(m.row(r).iter().copied().collect::<Vec<_>>()))
            .collect(),
    )
}

fn method_name(method: MethodArg) -> &'static str {
    match method {
        MethodArg::Durbin => "durbin",
        MethodArg::Restricted => "restricted-ols",
        MethodArg::Unrestricted => "unrestricted-ols",
    }
}

fn estimate(args: EstimateArgs) -> Result<(), CliError> {
    let series = read_observations(open_input(&args.input)?)?;
    let l = stage1_order(&args, &series)?;
    let config = RestrictedConfig { drop: args.drop };
    let mut out = open_output(None)?;
    if series.dim() == 1 {
        let report = match args.method {
            MethodArg::Durbin => durbin_with(&series, args.q, l, args.durbin_sequence.into())?,
            MethodArg::Restricted => restricted_ols_from_stage1(fit_ar_ols(&series, l)?, args.q, &config)?,
            MethodArg::Unrestricted => unrestricted_ols_from_stage1(fit_ar_ols(&series, l)?, args.q, &config)?,
        };
        match args.format {
            Format::Json => writeln!(out, "{}", univariate_json(&args, &series, &report))?,
            Format::Text => write_univariate_text(&mut out, &args, &series, &report)?,
        }
    } else {
        let stage1: VarStage1Fit<f64> = fit_var_ols(&series, l)?;
        let report = match args.method {
            MethodArg::Durbin => {
                return Err(CliError::Usage(
                    "Durbin's method is univariate; use restricted or unrestricted".into(),
                ))
            }
            MethodArg::Restricted => restricted_ols_multivariate_from_stage1(stage1, args.q, &config)?,
            MethodArg::Unrestricted => unrestricted_ols_multivariate_from_stage1(stage1, args.q, &config)?,
        };
        match args.format {
            Format::Json => writeln!(out, "{}", multivariate_json(&args, &series, &report))?,
            Format::Text => write_multivariate_text(&mut out, &args, &series, &report)?,
        }
    }
    out.flush()?;
    Ok(())
}

fn univariate_json(args: &EstimateArgs, series: &TimeSeries<f64>, r: &EstimateReport<f64>) -> Value {
    json!({
        "method": method_name(args.method),
        "durbin_sequence": matches!(args.method, MethodArg::Durbin)
            .then(|| DurbinSequence::from(args.durbin_sequence).as_str()),
        "q": r.psi_hat.len(),
        "l": r.stage1.order(),
        "n_obs": series.len(),
        "dim": 1,
        "psi_hat": r.psi_hat,
        "stderr": r.stderr,
        "stage1": {
            "phi": r.stage1.phi,
            "resid_var": finite_or_null(r.stage1.resid_var),
            "cond": finite_or_null(r.stage1.cond),
        },
        "diagnostics": {
            "resid_var": finite_or_null(r.diagnostics.resid_var),
            "cond": finite_or_null(r.diagnostics.cond),
            "rows": r.diagnostics.rows,
        },
    })
}

fn multivariate_json(args: &EstimateArgs, series: &TimeSeries<f64>, r: &VmaEstimateReport<f64>) -> Value {
    json!({
        "method": method_name(args.method),
        "q": r.psi_hat.len(),
        "l": r.stage1.order(),
        "n_obs": series.len(),
        "dim": series.dim(),
        "psi_hat": r.psi_hat.iter().map(matrix_json).collect::<Vec<_>>(),
        "stderr": r.stderr.as_ref().map(|s| s.iter().map(matrix_json).collect::<Vec<_>>()),
        "stage1": {
            "resid_var": r.stage1.resid_var.iter().copied().map(finite_or_null).collect::<Vec<_>>(),
            "cond": finite_or_null(r.stage1.cond),
        },
        "diagnostics": r.diagnostics.iter().map(|d| json!({
            "resid_var": finite_or_null(d.resid_var),
            "cond": finite_or_null(d.cond),
            "rows": d.rows,
        })).collect::<Vec<_>>(),
    })
}

fn write_header(out: &mut dyn Write, args: &EstimateArgs, series: &TimeSeries<f64>, l: usize) -> io::Result<()> {
    writeln!(out, "{:<22}{}", "method", method_name(args.method))?;
    if matches!(args.method, MethodArg::Durbin) {
        writeln!(
            out,
            "{:<22}{}",
            "durbin sequence",
            DurbinSequence::from(args.durbin_sequence).as_str()
        )?;
    }
    writeln!(out, "{:<22}{}", "observations", series.len())?;
    writeln!(out, "{:<22}{}", "dimension", series.dim())?;
    writeln!(out, "{:<22}{}", "MA order", args.q)?;
    writeln!(out, "{:<22}{}", "stage-1 order", l)
}

fn write_univariate_text(
    out: &mut dyn Write,
    args: &EstimateArgs,
    series: &TimeSeries<f64>,
    r: &EstimateReport<f64>,
) -> io::Result<()> {
    write_header(out, args, series, r.stage1.order())?;
    writeln!(out)?;
    writeln!(out, "{:<8}{:>14}{:>14}", "coef", "estimate", "std.err")?;
    for (i, v) in r.psi_hat.iter().enumerate() {
        let se = r.stderr.as_ref().map_or("-".to_string(), |s| format!("{:.6}", s[i]));
        writeln!(out, "{:<8}{:>14.6}{:>14}", format!("psi{}", i + 1), v, se)?;
    }
    writeln!(out)?;
    writeln!(out, "{:<28}{:.6e}", "stage-1 residual variance", r.stage1.resid_var)?;
    writeln!(
        out,
        "{:<28}{:.6e}",
        "stage-2 residual variance", r.diagnostics.resid_var
    )?;
    writeln!(out, "{:<28}{:.6e}", "stage-2 condition number", r.diagnostics.cond)?;
    writeln!(out, "{:<28}{}", "stage-2 rows", r.diagnostics.rows)
}

fn write_multivariate_text(
    out: &mut dyn Write,
    args: &EstimateArgs,
    series: &TimeSeries<f64>,
    r: &VmaEstimateReport<f64>,
) -> io::Result<()> {
    write_header(out, args, series, r.stage1.order())?;
    let k = series.dim();
    for (i, m) in r.psi_hat.iter().enumerate() {
        writeln!(out)?;
        writeln!(out, "Psi{} (std.err in parentheses)", i + 1)?;
        for row in 0..k {
            let cells: Vec<String> = (0..k)
                .map(|c| {
                    let se = r.stderr.as_ref().map_or(f64::NAN, |s| s[i][(row, c)]);
                    format!("{:>12.6} ({:.6})", m[(row, c)], se)
                })
                .collect();
            writeln!(out, "{}", cells.join("  "))?;
        }
    }
    writeln!(out)?;
    for (j, d) in r.diagnostics.iter().enumerate() {
        writeln!(
            out,
            "column {:<3} stage-2 residual variance {:.6e}  condition number {:.6e}  rows {}",
            j + 1,
            d.resid_var,
            d.cond,
            d.rows
        )?;
    }
    Ok(())
}

fn grid(args: GridArgs) -> Result<(), CliError> {
    let spec = GridSpec {
        psi1_range: parse_range(&args.psi1)?,
        psi2_range: parse_range(&args.psi2)?,
        points_per_axis: args.points,
        region: match args.region {
            RegionArg::Invertible => Region::Invertible,
            RegionArg::Noninvertible => Region::Noninvertible,
        },
        t: args.t,
        l: args.l,
        reps: args.reps,
        base_seed: args.seed,
        durbin: args.durbin_sequence.into(),
    };
    let workers = args
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let result = run_grid(&spec, workers)?;
    let mut out = open_output(args.out.as_deref())?;
    write_grid(&result, &mut out)?;
    out.flush()?;
    Ok(())
}

fn heatmap(args: HeatmapArgs) -> Result<(), CliError> {
    let metric: Metric = args.metric.parse()?;
    let result = read_grid(open_input(&args.input)?)?;
    let mut out = open_output(args.out.as_deref())?;
    out.write_all(render_heatmap(&result, metric).as_bytes())?;
    out.flush()?;
    Ok(())
}
