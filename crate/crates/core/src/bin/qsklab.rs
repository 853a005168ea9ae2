use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use qsklab::config::{write_atomic, ExperimentFile};
use qsklab::ensemble::{
    derive_seed, run_ensemble_streaming, stream, sweep, sweep_csv, EnsembleConfig, EnsembleMode,
};
use qsklab::model::{sample_couplings, DisorderSpec, ModelParams};
use qsklab::observables::{sample_report, Provenance, ReportOptions};
use qsklab::par::Workers;
use qsklab::verify::{run_suite, Suite, VerifyOptions};
use qsklab::{Error, VERSION};

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_CAP: u8 = 3;

#[derive(Parser)]
#[command(
    name = "qsklab",
    version,
    about = "Exact-diagonalization checks for the transverse-field SK model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an invariant suite: algebra, duhamel, lemmas or theorem.
    Verify {
        suite: String,
        #[command(flatten)]
        flags: Flags,
    },
    /// Run a (beta, h) sweep described by an experiment file.
    Sweep {
        file: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
        /// Overrides the file's CSV path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Diagnostic dump of one disorder sample.
    Sample {
        #[command(flatten)]
        flags: Flags,
        /// Also compute every pair's connected Duhamel function.
        #[arg(long)]
        pair_terms: bool,
    },
    /// Ensemble run: one JSON line per sample, then the statistics.
    Ensemble {
        #[command(flatten)]
        flags: Flags,
        #[arg(long)]
        pair_terms: bool,
    },
    /// Print the couplings of one sample in canonical text form.
    Couplings {
        #[command(flatten)]
        flags: Flags,
    },
}

#[derive(Args, Clone, Default)]
struct Flags {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    j: Option<f64>,
    /// gaussian, rademacher or uniform.
    #[arg(long)]
    law: Option<String>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// monte_carlo, enumerate, gauge_paired or quadrature.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Check(String),
    Lib(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn workers(n: Option<usize>) -> Workers {
    Workers(n.filter(|&w| w > 0))
}

impl Flags {
    fn law(&self) -> Result<Option<DisorderSpec>, Error> {
        self.law.as_deref().map(DisorderSpec::by_name).transpose()
    }

    fn mode(&self) -> Result<Option<EnsembleMode>, Error> {
        self.mode.as_deref().map(str::parse).transpose()
    }

    fn params(&self, defaults: (usize, f64, f64, f64)) -> Result<ModelParams, Error> {
        let p = ModelParams::new(
            self.n.unwrap_or(defaults.0),
            self.beta.unwrap_or(defaults.1),
            self.h.unwrap_or(defaults.2),
            self.j.unwrap_or(defaults.3),
        )?;
        p.require_pairs()?;
        Ok(p)
    }

    fn verify_options(&self) -> Result<VerifyOptions, Error> {
        Ok(VerifyOptions {
            n: self.n,
            beta: self.beta,
            h: self.h,
            j: self.j,
            law: self.law()?,
            samples: self.samples,
            seed: self.seed,
            mode: self.mode()?,
            workers: workers(self.workers),
        })
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => write_atomic(path, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

fn cmd_verify(suite: &str, flags: &Flags) -> Result<(), Failure> {
    let suite: Suite = suite.parse()?;
    let report = run_suite(suite, &flags.verify_options()?)?;
    {
        let mut stdout = std::io::stdout().lock();
        writeln!(stdout, "{VERSION} verify {suite}")?;
        for c in &report.checks {
            writeln!(stdout, "{c}")?;
        }
        for (name, value) in &report.notes {
            writeln!(stdout, "note {name} = {value:.9}")?;
        }
        if !report.passed() {
            for b in &report.bounds {
                if !b.satisfied {
                    writeln!(stdout, "{}", b.to_json_line())?;
                }
            }
        }
        let passed = report.checks.iter().filter(|c| c.passed).count();
        writeln!(stdout, "{passed}/{} checks passed", report.checks.len())?;
    }
    if let Some(path) = &flags.out {
        write_atomic(path, &report.to_json())?;
    }
    if report.passed() {
        Ok(())
    } else {
        let names: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
        Err(Failure::Check(format!("failed: {}", names.join(", "))))
    }
}

fn cmd_sweep(
    file: &Path,
    workers_flag: Option<usize>,
    out: Option<PathBuf>,
) -> Result<(), Failure> {
    let experiment = ExperimentFile::load(file)?;
    let csv_path = out.unwrap_or_else(|| experiment.output.csv.clone());
    let configs: Vec<EnsembleConfig> = experiment
        .configs()?
        .into_iter()
        .map(|c| c.with_workers(workers(workers_flag)))
        .collect();
    let records = sweep(&configs)?;
    let comments = vec![VERSION.to_string(), experiment.to_toml()];
    write_atomic(&csv_path, &sweep_csv(&records, &comments))?;
    if let Some(json_path) = &experiment.output.json {
        let doc = json!({
            "version": VERSION,
            "experiment": experiment,
            "records": records,
        });
        write_atomic(
            json_path,
            &(serde_json::to_string_pretty(&doc).expect("json") + "\n"),
        )?;
    }
    let failed: Vec<_> = records.iter().filter(|r| r.error.is_some()).collect();
    let mut stdout = std::io::stdout().lock();
    writeln!(
        stdout,
        "{} grid points, {} failed; wrote {}",
        records.len(),
        failed.len(),
        csv_path.display()
    )?;
    for r in &failed {
        writeln!(
            stdout,
            "point {} (beta={}, h={}): {}",
            r.index,
            r.params.beta,
            r.params.h,
            r.error.as_deref().unwrap_or("")
        )?;
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(format!(
            "{} grid points failed",
            failed.len()
        )))
    }
}

fn cmd_sample(flags: &Flags, pair_terms: bool) -> Result<(), Failure> {
    let params = flags.params((4, 1.0, 0.5, 1.0))?;
    let spec = flags.law()?.unwrap_or_else(DisorderSpec::gaussian);
    let master = flags.seed.unwrap_or(0);
    let seed = derive_seed(master, 0);
    let sample = sample_couplings(&spec, params.n_sites, &mut stream(seed))?;
    let report = sample_report(
        &params,
        &sample,
        ReportOptions {
            pair_terms,
            third_cumulant: false,
        },
        Provenance::new(&spec, master, 0, seed, &sample),
    )?;
    let doc = json!({
        "version": VERSION,
        "law": spec.name(),
        "couplings": sample.gamma(),
        "report": report,
    });
    emit(
        &flags.out,
        &(serde_json::to_string_pretty(&doc).expect("json") + "\n"),
    )
}

fn cmd_ensemble(flags: &Flags, pair_terms: bool) -> Result<(), Failure> {
    let params = flags.params((4, 1.0, 0.5, 1.0))?;
    let spec = flags.law()?.unwrap_or_else(DisorderSpec::gaussian);
    let mode = flags.mode()?.unwrap_or(EnsembleMode::MonteCarlo);
    let config = EnsembleConfig::new(
        params,
        spec,
        flags.samples.unwrap_or(100),
        flags.seed.unwrap_or(0),
        mode,
    )
    .with_options(ReportOptions {
        pair_terms,
        third_cumulant: false,
    })
    .with_workers(workers(flags.workers));
    let mut text = json!({"kind": "config", "version": VERSION, "config": config}).to_string();
    text.push('\n');
    let stats = run_ensemble_streaming(&config, |r, _, _| {
        text.push_str(&r.to_json_line());
        text.push('\n');
    })?;
    let mut last = serde_json::to_value(&stats).expect("json");
    last["kind"] = json!("stats");
    text.push_str(&last.to_string());
    text.push('\n');
    emit(&flags.out, &text)
}

fn cmd_couplings(flags: &Flags) -> Result<(), Failure> {
    let params = flags.params((4, 1.0, 0.5, 1.0))?;
    let spec = flags.law()?.unwrap_or_else(DisorderSpec::gaussian);
    let master = flags.seed.unwrap_or(0);
    let sample = sample_couplings(&spec, params.n_sites, &mut stream(derive_seed(master, 0)))?;
    emit(&flags.out, &sample.to_canonical_text(spec.name(), master))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Verify { suite, flags } => cmd_verify(suite, flags),
        Command::Sweep { file, workers, out } => cmd_sweep(file, *workers, out.clone()),
        Command::Sample { flags, pair_terms } => cmd_sample(flags, *pair_terms),
        Command::Ensemble { flags, pair_terms } => cmd_ensemble(flags, *pair_terms),
        Command::Couplings { flags } => cmd_couplings(flags),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("qsklab: {msg}");
            ExitCode::from(EXIT_FAIL)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("qsklab: error: {e}");
            match e {
                Error::TooManySites { .. } | Error::ResourceCap(_) => ExitCode::from(EXIT_CAP),
                _ => ExitCode::from(EXIT_USAGE),
            }
        }
        Err(Failure::Io(msg)) => {
            eprintln!("qsklab: io error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
