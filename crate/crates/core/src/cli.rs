//! Command-line front end. Every command renders its result as a string so
//! the binary only has to route it to stdout or a file.

use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::circuit::{decompose_triangular, fmt_f64};
use crate::config::ConfigMap;
use crate::detection::{DetectorModel, DolinarConfig, FeedbackLaw};
use crate::hadamard::{self, construct, HadamardMatrix, SUPPORTED_ORDERS};
use crate::infotheory::{
    capacity_asymptote, holevo_bpsk, holevo_bpsk_asymptotic, optimize_lambda,
    optimize_lambda_continuous, rate_hybrid, rate_hybrid_asymptotic, rate_individual,
    rate_individual_asymptotic, rate_ppm, rate_ppm_asymptotic, ChannelParams,
};
use crate::simulation::{compare_report, dolinar_error_rate};

#[derive(Debug, Parser)]
#[command(
    name = "superadditive",
    version,
    about = "Superadditive BPSK decoding: rates, circuits, Monte Carlo"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Analytic rates for one (n̄, L, λ).
    Analytic(AnalyticArgs),
    /// Rate ratios over n̄ and L, discrete Hadamard orders plus a continuous L grid.
    Sweep(SweepArgs),
    /// Monte Carlo run from a config file and/or flags.
    Simulate(SimulateArgs),
    /// Beam-splitter plan for the rescaled Hadamard matrix of order L.
    Decompose(DecomposeArgs),
    /// Dolinar receiver error against the number of time slices.
    Dolinar(DolinarArgs),
    /// Hadamard matrix export, import and validation.
    #[command(subcommand)]
    Hadamard(HadamardCommand),
}

#[derive(Debug, Args)]
pub struct Output {
    /// Write the result here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct AnalyticArgs {
    #[arg(long)]
    pub nbar: f64,
    #[arg(long = "L")]
    pub length: usize,
    /// Hybrid mixing weight; the optimum is reported regardless.
    #[arg(long, default_value_t = 0.0)]
    pub lambda: f64,
    /// Overall power transmission η; rates are evaluated at η·n̄.
    #[arg(long, default_value_t = 1.0)]
    pub transmission: f64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [2e-4, 2e-2])]
    pub nbar: Vec<f64>,
    /// Discrete sequence lengths; each must be a supported Hadamard order.
    #[arg(long = "L", value_delimiter = ',', default_values_t = [2usize, 4, 8, 12, 16, 20, 24, 28, 32])]
    pub lengths: Vec<usize>,
    /// Number of log-spaced points on the continuous L grid (0 disables it).
    #[arg(long, default_value_t = 100)]
    pub continuous: usize,
    #[arg(long, default_value_t = 2.0)]
    pub continuous_min: f64,
    #[arg(long, default_value_t = 32.0)]
    pub continuous_max: f64,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = SweepScheme::all())]
    pub schemes: Vec<SweepScheme>,
    /// Emit raw bits-per-bin columns only, without ratios to individual detection.
    #[arg(long)]
    pub raw: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// `key = value` file; flags below override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub scheme: Option<String>,
    #[arg(long)]
    pub nbar: Option<f64>,
    #[arg(long = "L")]
    pub length: Option<usize>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub slices: Option<u32>,
    #[arg(long)]
    pub efficiency: Option<f64>,
    #[arg(long)]
    pub dark: Option<f64>,
    /// Transmission of each beam splitter; the circuit is loss-equalized.
    #[arg(long)]
    pub transmission: Option<f64>,
    /// Writes `<out>.json` (report) and `<out>.csv` (confusion matrix).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[arg(long = "L")]
    pub length: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DolinarArgs {
    /// Mean photon number of the pulse seen by the receiver.
    #[arg(long)]
    pub nbar: f64,
    #[arg(long, value_delimiter = ',', default_values_t = [1u32, 10, 100, 10_000])]
    pub slices: Vec<u32>,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1.0)]
    pub efficiency: f64,
    #[arg(long, default_value_t = 0.0)]
    pub dark: f64,
    #[arg(long, value_enum, default_value_t = Feedback::Scheduled)]
    pub feedback: Feedback,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Feedback {
    Scheduled,
    Posterior,
}

#[derive(Debug, Subcommand)]
pub enum HadamardCommand {
    /// Print the normalized matrix of order L.
    Export {
        #[arg(long = "L")]
        length: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Read a matrix file and summarize it.
    Import { path: PathBuf },
    /// Check whether a file holds a Hadamard matrix; exits nonzero if not.
    Validate { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepScheme {
    Individual,
    DirectPpm,
    Hybrid,
    Holevo,
    CapacityAsymptote,
}

impl SweepScheme {
    fn all() -> Vec<SweepScheme> {
        vec![
            SweepScheme::Individual,
            SweepScheme::DirectPpm,
            SweepScheme::Hybrid,
            SweepScheme::Holevo,
            SweepScheme::CapacityAsymptote,
        ]
    }

    pub fn name(self) -> &'static str {
        match self {
            SweepScheme::Individual => "individual",
            SweepScheme::DirectPpm => "direct_ppm",
            SweepScheme::Hybrid => "hybrid",
            SweepScheme::Holevo => "holevo",
            SweepScheme::CapacityAsymptote => "capacity_asymptote",
        }
    }

    fn depends_on_length(self) -> bool {
        matches!(self, SweepScheme::DirectPpm | SweepScheme::Hybrid)
    }
}

/// What a command produced: text for stdout or its `--out` file.
#[derive(Debug, Clone, PartialEq)]
pub struct Rendered {
    pub text: String,
    pub out: Option<PathBuf>,
    /// Nonzero status to exit with after writing, for verdict-style commands.
    pub failure: bool,
}

impl Rendered {
    fn ok(text: String, out: Option<PathBuf>) -> Self {
        Self {
            text,
            out,
            failure: false,
        }
    }
}

fn check_order(length: usize) -> Result<()> {
    if length < 2 || !SUPPORTED_ORDERS.contains(&length) {
        bail!(
            "no Hadamard matrix of order {length} is available; supported orders >= 2: {:?}",
            &SUPPORTED_ORDERS[1..]
        );
    }
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyticRow {
    pub quantity: &'static str,
    pub value: f64,
    pub ratio_to_individual: Option<f64>,
}

pub fn analytic_rows(args: &AnalyticArgs) -> Result<Vec<AnalyticRow>> {
    check_order(args.length)?;
    let params = ChannelParams {
        n_bar: args.nbar,
        length: args.length,
        lambda: args.lambda,
        transmission: args.transmission,
    };
    params.validate()?;
    let n = params.effective_n_bar();
    let l = args.length as f64;
    let individual = rate_individual(n)?;
    let (lambda_opt, hybrid_opt) = optimize_lambda(n, args.length)?;
    let rate = |quantity, value: f64| AnalyticRow {
        quantity,
        value,
        ratio_to_individual: (individual > 0.0).then(|| value / individual),
    };
    let mut rows = vec![
        rate("individual", individual),
        rate("individual_asymptotic", rate_individual_asymptotic(n)),
        rate("holevo", holevo_bpsk(n)?),
    ];
    if n < 1.0 {
        rows.push(rate("capacity_asymptote", capacity_asymptote(n)?));
    }
    rows.extend([
        rate("direct_ppm", rate_ppm(n, l)?),
        rate("direct_ppm_asymptotic", rate_ppm_asymptotic(n, l)),
        rate(
            "hybrid",
            rate_hybrid(&ChannelParams {
                n_bar: n,
                transmission: 1.0,
                ..params
            })?,
        ),
        rate("hybrid_optimal", hybrid_opt),
        rate("hybrid_asymptotic", rate_hybrid_asymptotic(n, l)?),
        AnalyticRow {
            quantity: "lambda_optimal",
            value: lambda_opt,
            ratio_to_individual: None,
        },
    ]);
    Ok(rows)
}

pub fn cmd_analytic(args: &AnalyticArgs) -> Result<String> {
    let rows = analytic_rows(args)?;
    Ok(match args.output.format {
        Format::Json => serde_json::to_string_pretty(&rows)? + "\n",
        Format::Csv => {
            let mut out = String::from("quantity,value,ratio_to_individual\n");
            for r in &rows {
                writeln!(
                    out,
                    "{},{},{}",
                    r.quantity,
                    fmt_f64(r.value),
                    fmt_opt(r.ratio_to_individual)
                )?;
            }
            out
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub scheme: &'static str,
    /// `discrete` for Hadamard orders, `continuous` for the log-spaced grid.
    pub grid: &'static str,
    pub n_bar: f64,
    #[serde(rename = "L")]
    pub length: f64,
    /// Optimal mixing weight, hybrid rows only.
    pub lambda: Option<f64>,
    pub exact_rate: f64,
    pub asymptotic_rate: f64,
    pub individual_rate: f64,
    pub individual_asymptotic: f64,
    pub ratio_exact: Option<f64>,
    pub ratio_asymptotic: Option<f64>,
}

fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => vec![],
        1 => vec![lo],
        _ => (0..points)
            .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (points - 1) as f64).exp())
            .collect(),
    }
}

fn sweep_row(
    scheme: SweepScheme,
    grid: &'static str,
    n: f64,
    l: f64,
    normalize: bool,
) -> Result<SweepRow> {
    let individual = rate_individual(n)?;
    let individual_asymptotic = rate_individual_asymptotic(n);
    let (lambda, exact, asymptotic) = match scheme {
        SweepScheme::Individual => (None, individual, individual_asymptotic),
        SweepScheme::Holevo => (None, holevo_bpsk(n)?, holevo_bpsk_asymptotic(n)),
        SweepScheme::CapacityAsymptote => {
            let c = capacity_asymptote(n)?;
            (None, c, c)
        }
        SweepScheme::DirectPpm => (None, rate_ppm(n, l)?, rate_ppm_asymptotic(n, l)),
        SweepScheme::Hybrid => {
            let (lam, rate) = if grid == "discrete" {
                optimize_lambda(n, l as usize)?
            } else {
                optimize_lambda_continuous(n, l)?
            };
            (Some(lam), rate, rate_hybrid_asymptotic(n, l)?)
        }
    };
    Ok(SweepRow {
        scheme: scheme.name(),
        grid,
        n_bar: n,
        length: l,
        lambda,
        exact_rate: exact,
        asymptotic_rate: asymptotic,
        individual_rate: individual,
        individual_asymptotic,
        ratio_exact: normalize.then(|| exact / individual),
        ratio_asymptotic: normalize.then(|| asymptotic / individual_asymptotic),
    })
}

pub fn sweep_rows(args: &SweepArgs) -> Result<Vec<SweepRow>> {
    if args.nbar.is_empty() || args.lengths.is_empty() || args.schemes.is_empty() {
        bail!("sweep needs at least one n̄, one L and one scheme");
    }
    for &n in &args.nbar {
        if !(n > 0.0 && n.is_finite()) {
            bail!("n̄ values must be positive, got {n}");
        }
    }
    for &l in &args.lengths {
        check_order(l)?;
    }
    if args.continuous > 0
        && !(args.continuous_min >= 2.0 && args.continuous_max >= args.continuous_min)
    {
        bail!("continuous L grid must satisfy 2 <= min <= max");
    }
    let normalize = !args.raw;
    let mut rows = Vec::new();
    for &scheme in &args.schemes {
        for &n in &args.nbar {
            for &l in &args.lengths {
                rows.push(sweep_row(scheme, "discrete", n, l as f64, normalize)?);
            }
            if scheme.depends_on_length() {
                for l in log_grid(args.continuous_min, args.continuous_max, args.continuous) {
                    rows.push(sweep_row(scheme, "continuous", n, l, normalize)?);
                }
            }
        }
    }
    Ok(rows)
}

pub fn sweep_csv(rows: &[SweepRow], normalize: bool) -> String {
    let mut out =
        String::from("scheme,grid,n_bar,L,lambda,exact_rate,asymptotic_rate,individual_rate,individual_asymptotic");
    if normalize {
        out.push_str(",ratio_exact,ratio_asymptotic");
    }
    out.push('\n');
    for r in rows {
        let _ = write!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.scheme,
            r.grid,
            fmt_f64(r.n_bar),
            fmt_f64(r.length),
            fmt_opt(r.lambda),
            fmt_f64(r.exact_rate),
            fmt_f64(r.asymptotic_rate),
            fmt_f64(r.individual_rate),
            fmt_f64(r.individual_asymptotic)
        );
        if normalize {
            let _ = write!(
                out,
                ",{},{}",
                fmt_opt(r.ratio_exact),
                fmt_opt(r.ratio_asymptotic)
            );
        }
        out.push('\n');
    }
    out
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<String> {
    let rows = sweep_rows(args)?;
    Ok(match args.output.format {
        Format::Json => serde_json::to_string_pretty(&rows)? + "\n",
        Format::Csv => sweep_csv(&rows, !args.raw),
    })
}

/// Report JSON and confusion-matrix CSV of a Monte Carlo run.
pub fn cmd_simulate(args: &SimulateArgs) -> Result<(String, String)> {
    let mut map = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            ConfigMap::parse(&text).with_context(|| format!("in {}", path.display()))?
        }
        None => ConfigMap::default(),
    };
    if let Some(v) = &args.scheme {
        map.set("scheme", v);
    }
    if let Some(v) = args.nbar {
        map.set("nbar", v);
    }
    if let Some(v) = args.length {
        map.set("L", v);
    }
    if let Some(v) = args.lambda {
        map.set("lambda", v);
    }
    if let Some(v) = args.trials {
        map.set("trials", v);
    }
    if let Some(v) = args.seed {
        map.set("seed", v);
    }
    if let Some(v) = args.slices {
        map.set("slices", v);
    }
    if let Some(v) = args.efficiency {
        map.set("efficiency", v);
    }
    if let Some(v) = args.dark {
        map.set("dark", v);
    }
    if let Some(v) = args.transmission {
        map.set("transmission", v);
    }
    let config = map.to_scheme_config()?;
    let (report, cm) = compare_report(&config)?;
    Ok((serde_json::to_string_pretty(&report)? + "\n", cm.to_csv()))
}

pub fn cmd_decompose(length: usize) -> Result<String> {
    let h = construct(length)?;
    let w = h.rescaled();
    let plan = decompose_triangular(&w)?;
    let error = (plan.compose() - &w).amax();
    let mut out = format!(
        "# triangular plan for the rescaled Hadamard matrix of order {length}, {} beam splitters\n",
        plan.num_beam_splitters()
    );
    out.push_str("# mode_a mode_b power_reflectivity s00 s01 s10 s11 transmission\n");
    out.push_str(&plan.to_text());
    writeln!(out, "# max_reconstruction_error = {}", fmt_f64(error))?;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DolinarRow {
    pub slices: u32,
    pub trials: u64,
    pub errors: u64,
    pub error_rate: f64,
    pub binomial_stderr: f64,
    pub helstrom: f64,
}

pub fn dolinar_rows(args: &DolinarArgs) -> Result<Vec<DolinarRow>> {
    let helstrom = crate::infotheory::helstrom_error(args.nbar)?;
    let detector = DetectorModel {
        efficiency: args.efficiency,
        dark_click_probability: args.dark,
    };
    let feedback = match args.feedback {
        Feedback::Scheduled => FeedbackLaw::Scheduled,
        Feedback::Posterior => FeedbackLaw::Posterior,
    };
    args.slices
        .iter()
        .map(|&slices| {
            let config = DolinarConfig {
                num_slices: slices,
                amplitude_cap: None,
                feedback,
                rng_seed: args.seed,
            };
            let (rate, errors) =
                dolinar_error_rate(args.nbar, &config, &detector, args.trials, args.seed)?;
            Ok(DolinarRow {
                slices,
                trials: args.trials,
                errors,
                error_rate: rate,
                binomial_stderr: (rate * (1.0 - rate) / args.trials as f64).sqrt(),
                helstrom,
            })
        })
        .collect()
}

pub fn cmd_dolinar(args: &DolinarArgs) -> Result<String> {
    let rows = dolinar_rows(args)?;
    Ok(match args.output.format {
        Format::Json => serde_json::to_string_pretty(&rows)? + "\n",
        Format::Csv => {
            let mut out =
                String::from("slices,trials,errors,error_rate,binomial_stderr,helstrom\n");
            for r in &rows {
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    r.slices,
                    r.trials,
                    r.errors,
                    fmt_f64(r.error_rate),
                    fmt_f64(r.binomial_stderr),
                    fmt_f64(r.helstrom)
                )?;
            }
            out
        }
    })
}

/// Reads an integer matrix leniently: optional order line, then rows.
fn read_integer_matrix(text: &str) -> Result<Vec<Vec<i64>>> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|t| t.parse::<i64>())
            .collect::<Result<Vec<_>, _>>()
            .with_context(|| format!("line {}: not a row of integers", i + 1))?;
        rows.push(row);
    }
    if rows
        .first()
        .is_some_and(|r| r.len() == 1 && rows.len() > 1 && r[0] as usize == rows.len() - 1)
    {
        rows.remove(0);
    }
    Ok(rows)
}

pub fn cmd_hadamard(command: &HadamardCommand) -> Result<Rendered> {
    Ok(match command {
        HadamardCommand::Export { length, out } => {
            Rendered::ok(construct(*length)?.to_text(), out.clone())
        }
        HadamardCommand::Import { path } => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            let h = HadamardMatrix::from_text(&text)
                .with_context(|| format!("in {}", path.display()))?;
            Rendered::ok(
                format!(
                    "order = {}\nnormalized = {}\nsymmetric = {}\n",
                    h.order(),
                    h.is_normalized(),
                    h.is_symmetric()
                ),
                None,
            )
        }
        HadamardCommand::Validate { path } => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            let rows = read_integer_matrix(&text)?;
            let valid = hadamard::validate(&rows);
            Rendered {
                text: format!("{}\n", if valid { "valid" } else { "invalid" }),
                out: None,
                failure: !valid,
            }
        }
    })
}

/// Executes a parsed command line.
pub fn run(cli: &Cli) -> Result<Vec<Rendered>> {
    Ok(match &cli.command {
        Command::Analytic(a) => vec![Rendered::ok(cmd_analytic(a)?, a.output.out.clone())],
        Command::Sweep(a) => vec![Rendered::ok(cmd_sweep(a)?, a.output.out.clone())],
        Command::Simulate(a) => {
            let (json, csv) = cmd_simulate(a)?;
            match &a.out {
                Some(prefix) => vec![
                    Rendered::ok(json, Some(prefix.with_extension("json"))),
                    Rendered::ok(csv, Some(prefix.with_extension("csv"))),
                ],
                None => vec![Rendered::ok(json, None), Rendered::ok(csv, None)],
            }
        }
        Command::Decompose(a) => vec![Rendered::ok(cmd_decompose(a.length)?, a.out.clone())],
        Command::Dolinar(a) => vec![Rendered::ok(cmd_dolinar(a)?, a.output.out.clone())],
        Command::Hadamard(h) => vec![cmd_hadamard(h)?],
    })
}
