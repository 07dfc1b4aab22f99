use std::path::PathBuf;
use std::process::ExitCode;

use clap::{error::ErrorKind, Parser, Subcommand};

use singbern::blend::solve_psi;
use singbern::combinations::{build_scheme, LadderRule};
use singbern::lab::{self, corpus, Experiment, ExperimentConfig, OutputFormat, RateReport};
use singbern::Error;

#[derive(Parser, Debug)]
#[command(name = "singbern", version, about = "Modified Bernstein combinations near an inner singularity")]
struct Cli {
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Report format.
    #[arg(long, global = true, value_parser = ["csv", "json"])]
    format: Option<String>,
    /// Worker threads for the experiment (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the cutoff polynomial coefficients.
    Psi {
        #[arg(long)]
        r: usize,
    },
    /// Print the ladder degrees and combination coefficients.
    Scheme {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: usize,
        #[arg(long, default_value = "doubling")]
        ladder: String,
    },
    /// Run an experiment described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Inspect the builtin function corpus.
    Corpus {
        #[command(subcommand)]
        action: CorpusAction,
    },
}

#[derive(Subcommand, Debug)]
enum CorpusAction {
    /// List builtin functions.
    List,
}

/// Console form: integers when within rounding of one, else 12 significant digits.
fn fmt_coeff(v: f64) -> String {
    let r = v.round();
    if (v - r).abs() <= 1e-9 * v.abs().max(1.0) {
        format!("{}", r as i64)
    } else {
        let short: f64 = format!("{v:.11e}").parse().unwrap_or(v);
        format!("{short}")
    }
}

fn join(values: impl IntoIterator<Item = String>) -> String {
    values.into_iter().collect::<Vec<_>>().join(" ")
}

fn format_of(cli: &Cli, fallback: OutputFormat) -> Result<OutputFormat, Error> {
    cli.format.as_deref().map_or(Ok(fallback), str::parse)
}

fn emit(report: &RateReport, out: Option<&PathBuf>, format: OutputFormat) -> Result<(), Error> {
    match out {
        Some(path) => report.write(path, format),
        None => {
            print!("{}", report.render(format));
            Ok(())
        }
    }
}

fn execute(cli: &Cli) -> Result<(), Error> {
    match &cli.command {
        Command::Psi { r } => {
            let psi = solve_psi(*r)?;
            println!("a: {}", join(psi.coeffs().iter().map(|&a| fmt_coeff(a))));
            if let Some(out) = &cli.out {
                let cfg = ExperimentConfig { experiment: Experiment::Psi, r: *r, ..Default::default() };
                lab::run(&cfg)?.write(out, format_of(cli, OutputFormat::Csv)?)?;
            }
        }
        Command::Scheme { n, r, ladder } => {
            let rule: LadderRule = ladder.parse()?;
            let scheme = build_scheme(*n, *r, rule)?;
            println!("n_i: {}", join(scheme.ladder().iter().map(|n| n.to_string())));
            println!("C_i: {}", join(scheme.coeffs().iter().map(|&c| fmt_coeff(c))));
            if let Some(out) = &cli.out {
                let cfg = ExperimentConfig {
                    experiment: Experiment::Scheme,
                    r: *r,
                    n_list: vec![*n],
                    ladder_rule: rule,
                    ..Default::default()
                };
                lab::run(&cfg)?.write(out, format_of(cli, OutputFormat::Csv)?)?;
            }
        }
        Command::Run { config } => {
            let cfg = ExperimentConfig::load(config)?;
            let format = format_of(cli, cfg.format)?;
            let out = cli.out.clone().or_else(|| cfg.out.clone());
            let report = match cli.threads {
                Some(threads) => rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build()
                    .map_err(|e| Error::Config(format!("cannot build thread pool: {e}")))?
                    .install(|| lab::run(&cfg))?,
                None => lab::run(&cfg)?,
            };
            emit(&report, out.as_ref(), format)?;
        }
        Command::Corpus { action: CorpusAction::List } => {
            for (name, description) in corpus::BUILTINS {
                println!("{name}\t{description}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 1 } else { 2 })
        }
    }
}
