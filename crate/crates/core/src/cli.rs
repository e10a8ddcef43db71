//! Command-line front end: `rank`, `eval` and `compare`.
//!
//! Exit codes: 0 success, 2 unreadable or malformed input, 3 invalid or
//! unsatisfiable configuration, 1 internal numerical failure.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::config::{AlphaChoice, PreprocessChoice, SelectorConfig, SelectorKind, DEFAULT_C, DEFAULT_N_GRID};
use crate::data::{load_csv, load_libsvm, Dataset};
use crate::eval::{evaluate_selector, EvalReport};
use crate::select::select_features;
use crate::stats::{BinningKind, BinningPolicy};
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "INFINISEL_THREADS";

#[derive(Debug, Parser)]
#[command(name = "infinisel", version, about = "Infinite feature selection: rank, evaluate and compare selectors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rank every feature of one dataset.
    Rank {
        input: PathBuf,
        #[command(flatten)]
        selector: SelectorArgs,
        /// Alpha in [0, 1].
        #[arg(long, default_value = "0.5")]
        alpha: String,
        /// Ranking file to write; standard output when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Select on a training split and score top-N classifiers on a test split.
    Eval {
        train: PathBuf,
        test: PathBuf,
        #[command(flatten)]
        selector: SelectorArgs,
        /// Alpha in [0, 1], or "cv" to pick it by 5-fold cross-validation.
        #[arg(long, default_value = "cv")]
        alpha: String,
        #[command(flatten)]
        eval: EvalArgs,
        /// Report file; `.json` and `.ranking.csv` siblings are written next to it.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Evaluate several selectors on the same split and summarize.
    Compare {
        train: PathBuf,
        test: PathBuf,
        /// Comma-separated selector names.
        #[arg(long, default_value = "ifs,mifs,sifs,mrmr")]
        variants: String,
        #[command(flatten)]
        selector: SelectorArgs,
        /// Alpha in [0, 1], or "cv".
        #[arg(long, default_value = "cv")]
        alpha: String,
        #[command(flatten)]
        eval: EvalArgs,
        /// Directory receiving one report per selector plus `summary.txt`.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Libsvm,
}

#[derive(Debug, Args)]
struct SelectorArgs {
    /// One of ifs, mifs, sifs, mrmr.
    #[arg(long, default_value = "sifs")]
    variant: String,
    /// Fraction c in (0, 1) of the convergence radius.
    #[arg(long, default_value_t = DEFAULT_C)]
    c: f64,
    /// none, normalize, standardize or auto.
    #[arg(long, default_value = "auto")]
    preprocess: String,
    #[arg(long, default_value_t = 10)]
    bins: usize,
    /// width or frequency.
    #[arg(long, default_value = "frequency")]
    binning: String,
    /// Header name of the CSV label column.
    #[arg(long)]
    label_column: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Comma-separated feature counts.
    #[arg(long)]
    n_grid: Option<String>,
}

/// A failure with its exit code.
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_input() {
            EXIT_INPUT
        } else if e.is_config() {
            EXIT_CONFIG
        } else {
            EXIT_INTERNAL
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn config_error(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_CONFIG,
        message: message.into(),
    }
}

fn io_error(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message: format!("{}: {e}", path.display()),
    }
}

impl SelectorArgs {
    fn config(&self, kind: SelectorKind, alpha: &str) -> Result<SelectorConfig, Failure> {
        let alpha: AlphaChoice = alpha.parse().map_err(config_error)?;
        let preprocessing: PreprocessChoice = self.preprocess.parse().map_err(config_error)?;
        let kind_of_binning: BinningKind = self.binning.parse().map_err(config_error)?;
        let binning = BinningPolicy::new(kind_of_binning, self.bins).map_err(|e| config_error(e.to_string()))?;
        let config = SelectorConfig {
            alpha,
            c: self.c,
            preprocessing,
            binning,
            seed: self.seed,
            ..SelectorConfig::new(kind)
        };
        config.validate()?;
        Ok(config)
    }

    fn kind(&self) -> Result<SelectorKind, Failure> {
        self.variant.parse().map_err(config_error)
    }

    fn load(&self, path: &Path) -> Result<Dataset, Failure> {
        let d = match self.format {
            Format::Csv => load_csv(path, self.label_column.as_deref()),
            Format::Libsvm => load_libsvm(path),
        };
        Ok(d.map_err(Error::from)?)
    }
}

fn parse_n_grid(arg: Option<&str>) -> Result<Vec<usize>, Failure> {
    match arg {
        None => Ok(DEFAULT_N_GRID.to_vec()),
        Some(s) => s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .ok()
                    .filter(|&n| n > 0)
                    .ok_or_else(|| config_error(format!("invalid feature count {t:?} in --n-grid")))
            })
            .collect(),
    }
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure {
        code: EXIT_INPUT,
        message: format!("cannot write {}: {e}", path.display()),
    })
}

fn cmd_rank(input: &Path, args: &SelectorArgs, alpha: &str, output: Option<&Path>) -> Result<(), Failure> {
    let config = args.config(args.kind()?, alpha)?;
    if config.alpha == AlphaChoice::Cv {
        return Err(config_error("rank needs a numeric --alpha; cross-validation is available in eval"));
    }
    let d = args.load(input)?;
    let selection = select_features(&d, &config, d.n_features())?;
    let csv = selection.to_csv(&d);
    match output {
        Some(path) => write(path, &csv),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn load_pair(args: &SelectorArgs, train: &Path, test: &Path) -> Result<(Dataset, Dataset), Failure> {
    let train = args.load(train)?;
    let test = args.load(test)?;
    if train.n_features() != test.n_features() {
        return Err(config_error(format!(
            "training data has {} features but test data has {}",
            train.n_features(),
            test.n_features()
        )));
    }
    Ok((train, test))
}

/// Writes `<stem>.txt`-style report, its JSON twin and the training ranking.
fn write_report(path: &Path, report: &EvalReport, train: &Dataset) -> Result<(), Failure> {
    write(path, &report.to_text())?;
    write(&path.with_extension("json"), &report.to_json())?;
    write(&path.with_extension("ranking.csv"), &report.selection.to_csv(train))
}

fn cmd_eval(
    train: &Path,
    test: &Path,
    args: &SelectorArgs,
    alpha: &str,
    n_grid: Option<&str>,
    output: Option<&Path>,
) -> Result<(), Failure> {
    let config = args.config(args.kind()?, alpha)?;
    let n_grid = parse_n_grid(n_grid)?;
    let (train, test) = load_pair(args, train, test)?;
    let report = evaluate_selector(&train, &test, &config, &n_grid, args.seed)?;
    match output {
        Some(path) => write_report(path, &report, &train)?,
        None => print!("{}", report.to_text()),
    }
    println!("avg={}", report.avg);
    println!("max={}", report.max);
    Ok(())
}

fn summary_table(reports: &[EvalReport]) -> String {
    let mut out = String::from("variant,avg,max\n");
    for r in reports {
        let _ = writeln!(out, "{},{},{}", r.selector, r.avg, r.max);
    }
    out
}

fn cmd_compare(
    train: &Path,
    test: &Path,
    variants: &str,
    args: &SelectorArgs,
    alpha: &str,
    n_grid: Option<&str>,
    output: Option<&Path>,
) -> Result<(), Failure> {
    let kinds = variants
        .split(',')
        .map(|v| v.trim().parse::<SelectorKind>().map_err(config_error))
        .collect::<Result<Vec<_>, _>>()?;
    let configs = kinds
        .iter()
        .map(|&k| args.config(k, alpha))
        .collect::<Result<Vec<_>, _>>()?;
    let n_grid = parse_n_grid(n_grid)?;
    let (train, test) = load_pair(args, train, test)?;

    let reports = configs
        .par_iter()
        .map(|c| evaluate_selector(&train, &test, c, &n_grid, args.seed))
        .collect::<Result<Vec<_>, _>>()?;
    let summary = summary_table(&reports);

    if let Some(dir) = output {
        fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
        for r in &reports {
            write_report(&dir.join(format!("{}.txt", r.selector)), r, &train)?;
        }
        write(&dir.join("summary.txt"), &summary)?;
    }
    print!("{summary}");
    Ok(())
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| config_error(format!("{THREADS_ENV} must be a positive integer, got {value:?}")))?;
    // a pool that already exists (tests calling run twice) is left as is
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    match &cli.command {
        Command::Rank {
            input,
            selector,
            alpha,
            output,
        } => cmd_rank(input, selector, alpha, output.as_deref()),
        Command::Eval {
            train,
            test,
            selector,
            alpha,
            eval,
            output,
        } => cmd_eval(train, test, selector, alpha, eval.n_grid.as_deref(), output.as_deref()),
        Command::Compare {
            train,
            test,
            variants,
            selector,
            alpha,
            eval,
            output,
        } => cmd_compare(train, test, variants, selector, alpha, eval.n_grid.as_deref(), output.as_deref()),
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}
