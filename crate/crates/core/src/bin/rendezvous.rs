use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rendezvous_core::harness::{self, ExperimentSpec, Mode, TraceLine};
use rendezvous_core::Error;

#[derive(Parser)]
#[command(name = "rendezvous", version, about = "RSS-driven rendezvous simulator and bound calculator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by the config (two_player by default).
    Run(Common),
    /// Metric M against step length for each policy.
    SweepDelta(Common),
    /// Full-merge time against player count for each policy.
    SweepPlayers(Common),
    /// Closed-form meeting-time bounds for each scenario.
    Bounds(Common),
    /// Probability of a positive averaged reward against the averaging length.
    Figure1(Common),
}

#[derive(Args)]
struct Common {
    /// key = value experiment file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed
    #[arg(long)]
    seed: Option<u64>,
    /// Trials per configuration
    #[arg(long)]
    trials: Option<u64>,
    /// CSV output path (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write per-turn line-delimited JSON records
    #[arg(long)]
    trace: bool,
    /// Override any config key, e.g. `--set sigma=3`
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn build_spec(mode: Option<Mode>, c: &Common) -> Result<ExperimentSpec, Error> {
    let mut spec = match &c.config {
        Some(p) => ExperimentSpec::from_file(p)?,
        None => ExperimentSpec::default(),
    };
    for o in &c.overrides {
        let (k, v) =
            o.split_once('=').ok_or_else(|| Error::Config { key: o.clone(), reason: "expected KEY=VALUE".into() })?;
        spec.set(k.trim(), v)?;
    }
    if let Some(m) = mode {
        spec.mode = m;
    }
    if let Some(s) = c.seed {
        spec.seed = s;
    }
    if let Some(t) = c.trials {
        spec.trials = t;
    }
    if let Some(o) = &c.out {
        spec.out = Some(o.clone());
    }
    if c.trace {
        spec.trace = true;
    }
    Ok(spec)
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> Error + '_ {
    move |source| Error::Io { path: path.display().to_string(), source }
}

fn trace_path(spec: &ExperimentSpec) -> PathBuf {
    if let Some(p) = &spec.trace_out {
        return p.clone();
    }
    match &spec.out {
        Some(out) => out.with_extension("trace.jsonl"),
        None => PathBuf::from("trace.jsonl"),
    }
}

fn write_trace(path: &Path, lines: &[TraceLine]) -> Result<(), Error> {
    let mut w = BufWriter::new(File::create(path).map_err(io_err(path))?);
    for l in lines {
        serde_json::to_writer(&mut w, l)
            .map_err(|e| Error::Io { path: path.display().to_string(), source: e.into() })?;
        w.write_all(b"\n").map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

fn execute(spec: &ExperimentSpec) -> Result<(), Error> {
    let outcome = harness::run_experiment(spec)?;
    match &spec.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path).map_err(io_err(path))?);
            outcome.table.write_csv(&mut w).map_err(io_err(path))?;
            w.flush().map_err(io_err(path))?;
        }
        None => {
            let stdout = io::stdout();
            match outcome.table.write_csv(stdout.lock()) {
                // a closed reader (e.g. `| head`) is not a failure
                Err(e) if e.kind() == io::ErrorKind::BrokenPipe => {}
                r => r.map_err(io_err(Path::new("<stdout>")))?,
            }
        }
    }
    if spec.trace {
        let path = trace_path(spec);
        write_trace(&path, &outcome.trace)?;
        log::info!("wrote {} trace records to {}", outcome.trace.len(), path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (mode, common) = match &cli.command {
        Command::Run(c) => (None, c),
        Command::SweepDelta(c) => (Some(Mode::SweepDelta), c),
        Command::SweepPlayers(c) => (Some(Mode::SweepPlayers), c),
        Command::Bounds(c) => (Some(Mode::Bounds), c),
        Command::Figure1(c) => (Some(Mode::Figure1), c),
    };
    match build_spec(mode, common).and_then(|spec| execute(&spec)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config { .. } | Error::InvalidParameter { .. } => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
