//! `risdas` command-line front end.
//!
//! Exit codes: 0 success, 2 usage or parse error, 3 runtime failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use risdas::bench::{write_csv, write_jsonl, CellSummary};
use risdas::channels::{default_noise_dbm, default_power_dbm};
use risdas::input::parse_instance;
use risdas::{
    aggregate, branch_and_bound, codebook_solution, continuous_bound, dehomogenize, exhaustive,
    quantized_alignment, run_plan, solve_binary, solve_das, BaselineKind, BenchMethod,
    ChannelModel, CodebookGrid, Error, ExperimentPlan, PhaseConfig, QuantizationScheme, Solution,
};
use serde_json::json;

#[derive(Parser)]
#[command(name = "risdas", version, about = "Discrete RIS phase configuration")]
struct Cli {
    /// Worker threads for bench (defaults to all cores).
    #[arg(long, global = true, env = "RISDAS_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance read from a file.
    Solve(SolveArgs),
    /// Run a Monte-Carlo comparison and write per-trial records.
    Bench(BenchArgs),
    /// Export a 1-bit configuration as a 0/1 control grid.
    Codebook(CodebookArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// CSV `re,im` lines, a JSON pair array, or a JSON channel spec.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 1)]
    bits: u32,
    /// das, binary, exhaustive, bnb, qa, random or zeros.
    #[arg(long, default_value = "das")]
    method: String,
    /// Seed for the random codebook.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write the result as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Gaussian,
    Model1,
    Model2,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Jsonl,
}

#[derive(Args)]
struct BenchArgs {
    /// Plan file (JSON); replaces the grid flags below.
    #[arg(long, conflicts_with_all = ["model", "n", "bits", "methods", "trials", "seed"])]
    plan: Option<PathBuf>,
    #[arg(long, value_enum, required_unless_present = "plan")]
    model: Option<ModelArg>,
    /// Cell counts, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "8")]
    n: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    bits: Vec<u32>,
    #[arg(long, value_delimiter = ',', default_value = "das")]
    methods: Vec<String>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Per-entry variance of the gaussian model.
    #[arg(long, default_value_t = 1.0)]
    variance: f64,
    /// Model 2 carrier wavelength in meters.
    #[arg(long, default_value_t = 0.0625)]
    wavelength: f64,
    /// Model 2 cell spacing in meters.
    #[arg(long, default_value_t = 0.03125)]
    spacing: f64,
    /// Model 2 arrival paths.
    #[arg(long, default_value_t = 1)]
    paths: usize,
    #[arg(long, default_value_t = default_power_dbm(), allow_hyphen_values = true)]
    power_dbm: f64,
    #[arg(long, default_value_t = default_noise_dbm(), allow_hyphen_values = true)]
    noise_dbm: f64,
    /// Record wall-clock solve times (makes output non-reproducible).
    #[arg(long)]
    timing: bool,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct CodebookArgs {
    /// Solution JSON written by `solve --json`, or a bare `{bits, indices}` config.
    #[arg(long, required_unless_present = "input", conflicts_with = "input")]
    solution: Option<PathBuf>,
    /// Instance to solve at 1 bit before exporting.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    rows: usize,
    #[arg(long)]
    cols: usize,
    #[arg(long)]
    out: PathBuf,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. }
            | Error::InvalidPlan(_)
            | Error::Empty(_)
            | Error::Domain(_)
            | Error::Dimension { .. }
            | Error::Geometry(_)
            | Error::UnsupportedScheme(_) => Failure::Usage(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn write(path: &Path, body: &[u8]) -> Result<(), Failure> {
    fs::write(path, body).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
}

fn solve_with(
    method: BenchMethod,
    obj: &risdas::RankOneObjective,
    scheme: QuantizationScheme,
    seed: u64,
) -> Result<Solution, Failure> {
    Ok(match method {
        BenchMethod::Das => solve_das(obj, scheme)?,
        BenchMethod::Binary => {
            if scheme.bits() != 1 {
                return Err(Failure::Usage("method binary needs --bits 1".into()));
            }
            solve_binary(obj)?
        }
        BenchMethod::Exhaustive => exhaustive(obj, scheme)?,
        BenchMethod::BranchAndBound => branch_and_bound(obj, scheme)?,
        BenchMethod::QuantizedAlignment => quantized_alignment(obj, scheme),
        BenchMethod::Random => codebook_solution(obj, BaselineKind::Random(seed), scheme)?,
        BenchMethod::AllZeros => codebook_solution(obj, BaselineKind::AllZeros, scheme)?,
        BenchMethod::Continuous => {
            return Err(Failure::Usage("continuous is a bound, not a solver".into()))
        }
    })
}

fn gap_db(bound: f64, value: f64) -> Option<f64> {
    (value > 0.0).then(|| 20.0 * (bound / value).log10())
}

fn cmd_solve(a: SolveArgs) -> Result<(), Failure> {
    let obj = parse_instance(&read(&a.input)?)?;
    let scheme = QuantizationScheme::new(a.bits)?;
    let method = BenchMethod::parse(&a.method)?;
    let mut sol = solve_with(method, &obj, scheme, a.seed)?;
    if sol.augmented {
        sol = dehomogenize(&sol)?;
    }
    let bound = continuous_bound(&obj);
    let gap = gap_db(bound, sol.value);
    println!("method      {}", sol.method);
    println!("bits        {}", a.bits);
    println!("value       {:.12}", sol.value);
    println!("bound       {:.12}", bound);
    match gap {
        Some(g) => println!("gap_db      {g:.6}"),
        None => println!("gap_db      inf"),
    }
    println!("candidates  {}", sol.candidate_count);
    println!("indices     {}", sol.config);
    if let Some(path) = a.json {
        let body = json!({
            "method": sol.method,
            "value": sol.value,
            "bound": bound,
            "gap_db": gap,
            "candidate_count": sol.candidate_count,
            "direct_link": obj.is_augmented(),
            "config": sol.config,
        });
        let mut text = serde_json::to_string_pretty(&body).expect("json values serialize");
        text.push('\n');
        write(&path, text.as_bytes())?;
    }
    Ok(())
}

fn plan_from_flags(a: &BenchArgs) -> Result<ExperimentPlan, Failure> {
    let model = match a.model.expect("clap enforces --model without --plan") {
        ModelArg::Gaussian => ChannelModel::Gaussian {
            variance: a.variance,
        },
        ModelArg::Model1 => ChannelModel::model1_reference(),
        ModelArg::Model2 => ChannelModel::Model2 {
            wavelength: a.wavelength,
            spacing: a.spacing,
            paths: a.paths,
        },
    };
    let methods = a
        .methods
        .iter()
        .map(|m| BenchMethod::parse(m))
        .collect::<Result<_, _>>()?;
    Ok(ExperimentPlan {
        model,
        n: a.n.clone(),
        bits: a.bits.clone(),
        methods,
        trials: a.trials,
        seed: a.seed,
        power_dbm: a.power_dbm,
        noise_dbm: a.noise_dbm,
        timing: a.timing,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.3}"))
}

fn print_table(cells: &[CellSummary]) {
    println!(
        "{:>6} {:>2} {:<20} {:>6} {:>14} {:>9} {:>9} {:>9} {:>9} {:>8} {:>10}",
        "N",
        "B",
        "method",
        "trials",
        "mean_value",
        "snr_mean",
        "snr_p10",
        "snr_p50",
        "snr_p90",
        "gap_db",
        "time_s"
    );
    for c in cells {
        println!(
            "{:>6} {:>2} {:<20} {:>6} {:>14.6e} {:>9} {:>9} {:>9} {:>9} {:>8} {:>10.3e}",
            c.n,
            c.bits,
            c.method.name(),
            c.trials,
            c.mean_value,
            opt(c.mean_snr_db),
            opt(c.p10_snr_db),
            opt(c.median_snr_db),
            opt(c.p90_snr_db),
            opt(c.mean_gap_db),
            c.mean_time_s
        );
    }
}

fn cmd_bench(a: BenchArgs) -> Result<(), Failure> {
    let mut plan = match &a.plan {
        Some(path) => serde_json::from_str::<ExperimentPlan>(&read(path)?)
            .map_err(|e| Failure::Usage(format!("{}: line {}: {e}", path.display(), e.line())))?,
        None => plan_from_flags(&a)?,
    };
    plan.timing |= a.timing;
    plan.validate()?;
    let records = run_plan(&plan)?;
    let summary = aggregate(&records)?;

    fs::create_dir_all(&a.out_dir)
        .map_err(|e| Failure::Runtime(format!("{}: {e}", a.out_dir.display())))?;
    let mut body = Vec::new();
    let name = match a.format {
        Format::Csv => {
            write_csv(&records, &mut body)?;
            "records.csv"
        }
        Format::Jsonl => {
            write_jsonl(&records, &mut body)?;
            "records.jsonl"
        }
    };
    write(&a.out_dir.join(name), &body)?;
    let mut text = serde_json::to_string_pretty(&json!({"plan": plan, "summary": summary}))
        .expect("summary serializes");
    text.push('\n');
    write(&a.out_dir.join("summary.json"), text.as_bytes())?;
    print_table(&summary.cells);
    Ok(())
}

fn load_config(text: &str, path: &Path) -> Result<PhaseConfig, Failure> {
    let bad = |e: serde_json::Error| {
        Failure::Usage(format!("{}: line {}: {e}", path.display(), e.line()))
    };
    let v: serde_json::Value = serde_json::from_str(text).map_err(bad)?;
    let cfg = v.get("config").cloned().unwrap_or(v);
    serde_json::from_value(cfg).map_err(bad)
}

fn cmd_codebook(a: CodebookArgs) -> Result<(), Failure> {
    let cfg = match (&a.solution, &a.input) {
        (Some(path), _) => load_config(&read(path)?, path)?,
        (None, Some(path)) => {
            let obj = parse_instance(&read(path)?)?;
            let mut sol = solve_das(&obj, QuantizationScheme::new(1)?)?;
            if sol.augmented {
                sol = dehomogenize(&sol)?;
            }
            sol.config
        }
        (None, None) => unreachable!("clap requires one source"),
    };
    let grid = CodebookGrid::from_config(&cfg, a.rows, a.cols)?;
    write(&a.out, grid.to_string().as_bytes())?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        // Ignored if a pool already exists; only bench is parallel.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global();
    }
    let result = match cli.cmd {
        Command::Solve(a) => cmd_solve(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Codebook(a) => cmd_codebook(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}
