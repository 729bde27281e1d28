use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use freqgate::par::Exec;
use freqgate_cli::config::{ScenarioConfig, ScenarioKind};
use freqgate_cli::error::{exit, CliError};
use freqgate_cli::{bundle_path, execute, report, OUTPUT_ROOT_VAR};

#[derive(Debug, Parser)]
#[command(name = "freqgate", version, about = "Design and simulate electro-optic frequency-bin gates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads for restarts and Monte Carlo repeats (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Scenario file (JSON); defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Bundle directory; defaults to `$FREQGATE_OUT/<scenario>-seed<seed>`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides every seed in the config.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Optimize a cascade for a target gate.
    Design(RunArgs),
    /// Reconstruct a gate from simulated spectrum-analyzer measurements.
    Characterize(RunArgs),
    /// Crosstalk between two gates versus their separation.
    Guardband(RunArgs),
    /// Single-photon interference visibilities from simulated counting.
    Visibility(RunArgs),
    /// DFT designs for increasing dimension.
    Scaling(RunArgs),
    /// Single-modulator success probability against its analytic ceiling.
    BoundCheck(RunArgs),
    /// Modulator sidebands against direct quadrature.
    BesselCheck(RunArgs),
    /// Compare a bundle with published values and export figure tables.
    Report {
        bundle: PathBuf,
        /// Report directory; defaults to `<bundle>/report`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(kind: ScenarioKind, args: &RunArgs) -> Result<(ScenarioConfig, Option<Vec<u8>>), CliError> {
    let (mut config, input) = match &args.config {
        Some(path) => {
            let bytes =
                std::fs::read(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            let text = std::str::from_utf8(&bytes)
                .map_err(|_| CliError::Config(format!("{} is not UTF-8", path.display())))?;
            (ScenarioConfig::parse(text)?, Some(bytes))
        }
        None => (ScenarioConfig::new(kind), None),
    };
    if config.scenario != kind {
        return Err(CliError::Config(format!(
            "config describes a {} scenario, not {}",
            config.scenario.name(),
            kind.name()
        )));
    }
    if let Some(seed) = args.seed {
        config = config.with_seed(seed);
    }
    config.validate()?;
    Ok((config, input))
}

fn configure_threads(threads: Option<usize>) -> Result<Exec, CliError> {
    match threads {
        Some(0) => Err(CliError::Config("--threads must be at least 1".into())),
        Some(1) => Ok(Exec::Sequential),
        #[cfg(feature = "parallel")]
        Some(n) => {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| CliError::Config(format!("cannot start {n} threads: {e}")))?;
            Ok(Exec::Parallel)
        }
        #[cfg(not(feature = "parallel"))]
        Some(_) => {
            eprintln!("warning: built without the `parallel` feature; running sequentially");
            Ok(Exec::Sequential)
        }
        None => Ok(Exec::default()),
    }
}

fn run_scenario(kind: ScenarioKind, args: &RunArgs, exec: Exec) -> Result<u8, CliError> {
    let (config, input) = load(kind, args)?;
    let root = std::env::var_os(OUTPUT_ROOT_VAR).map(PathBuf::from);
    let dest = bundle_path(&config, args.out.as_deref(), root.as_deref());
    let manifest = execute(&config, input.as_deref(), &dest, exec)?;
    println!("{} bundle written to {}", manifest.scenario, dest.display());
    for f in &manifest.files {
        println!("  {:<28} {:>10} bytes", f.name, f.bytes);
    }
    if manifest.converged == Some(false) {
        eprintln!("warning: optimization did not reach the fidelity floor");
        return Ok(exit::UNCONVERGED);
    }
    Ok(exit::OK)
}

fn run_report(bundle: &Path, out: Option<&Path>) -> Result<u8, CliError> {
    let written = report::write_report(bundle, out)?;
    print!("{}", report::render_text(&written.comparison));
    println!("report tables written to {}: {}", written.dir.display(), written.files.join(", "));
    Ok(exit::OK)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads(cli.threads).and_then(|exec| match &cli.command {
        Command::Design(a) => run_scenario(ScenarioKind::Design, a, exec),
        Command::Characterize(a) => run_scenario(ScenarioKind::Characterize, a, exec),
        Command::Guardband(a) => run_scenario(ScenarioKind::GuardbandSweep, a, exec),
        Command::Visibility(a) => run_scenario(ScenarioKind::Visibility, a, exec),
        Command::Scaling(a) => run_scenario(ScenarioKind::Scaling, a, exec),
        Command::BoundCheck(a) => run_scenario(ScenarioKind::BoundCheck, a, exec),
        Command::BesselCheck(a) => run_scenario(ScenarioKind::BesselCheck, a, exec),
        Command::Report { bundle, out } => run_report(bundle, out.as_deref()),
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
