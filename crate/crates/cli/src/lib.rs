//! Scenario runner behind the `freqgate` command: declarative configs in,
//! checksummed result bundles out.

pub mod bundle;
pub mod config;
pub mod error;
pub mod report;
pub mod run;

use std::path::{Path, PathBuf};
use std::time::Instant;

use freqgate::par::Exec;

use bundle::{sha256_hex, unix_now, Manifest, CONFIG};
use config::ScenarioConfig;
use error::CliError;

/// Environment variable naming the default root for result bundles.
pub const OUTPUT_ROOT_VAR: &str = "FREQGATE_OUT";

/// Where a bundle goes: `--out`, then the config's `output_dir`, then
/// `<root>/<scenario>-seed<seed>` under [`OUTPUT_ROOT_VAR`] or `results/`.
pub fn bundle_path(config: &ScenarioConfig, out: Option<&Path>, root: Option<&Path>) -> PathBuf {
    if let Some(out) = out {
        return out.to_path_buf();
    }
    if let Some(dir) = &config.output_dir {
        return dir.clone();
    }
    let root = root.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("results"));
    root.join(format!("{}-seed{}", config.scenario.name(), config.seed()))
}

/// Runs a validated scenario and writes its bundle to `dest`. Returns the
/// manifest that was written.
pub fn execute(config: &ScenarioConfig, input: Option<&[u8]>, dest: &Path, exec: Exec) -> Result<Manifest, CliError> {
    config.validate()?;
    let started_unix = unix_now();
    let clock = Instant::now();
    let outcome = run::run(config, exec)?;

    let mut files = outcome.files;
    let config_text = format!("{}\n", config.to_json());
    let manifest = Manifest {
        tool: "freqgate".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        scenario: config.scenario.name().into(),
        config_sha256: sha256_hex(config_text.as_bytes()),
        input_sha256: input.map(sha256_hex),
        seed: config.seed(),
        converged: outcome.converged,
        started_unix,
        finished_unix: unix_now(),
        elapsed_seconds: clock.elapsed().as_secs_f64(),
        files: Vec::new(),
    };
    files.add_text(CONFIG, config_text);
    files.write(dest, manifest)?;
    bundle::LoadedBundle::open(dest).map(|b| b.manifest)
}
