//! `spinrot`: figure data, sweeps and reports for the rotating-diamond
//! Berry-phase magnetometer.
//!
//! Every run writes its outputs plus `<command>.manifest.json`, which holds
//! the resolved scenario and checksums; `spinrot rerun --manifest FILE`
//! repeats the run and verifies the outputs byte for byte.

mod commands;
mod grid;
mod output;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use commands::{execute, Command, Format, Status};
use spinrot::config::ConfigDocument;
use spinrot::{validate_scenario, ScenarioConfig};

#[derive(Parser)]
#[command(
    name = "spinrot",
    version,
    about = "Rotation-induced Berry-phase magnetometry of a spin-1 in a levitated diamond"
)]
struct Cli {
    /// Scenario document (JSON, frequencies in Hz). Defaults to the 14N preset.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides steps per period.
    #[arg(long, global = true)]
    steps: Option<usize>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Read bare angles as degrees.
    #[arg(long, global = true)]
    degrees: bool,
    #[command(subcommand)]
    command: Top,
}

#[derive(Subcommand)]
enum Top {
    #[command(flatten)]
    Run(Command),
    /// Repeat a recorded run and compare checksums.
    Rerun {
        #[arg(long)]
        manifest: PathBuf,
    },
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    tool: String,
    version: String,
    command: Command,
    format: Option<Format>,
    degrees: bool,
    seed: u64,
    config: ScenarioConfig,
    status: Status,
    outputs: BTreeMap<String, String>,
}

fn load_scenario(cli: &Cli) -> Result<ScenarioConfig> {
    let doc = match &cli.config {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            ConfigDocument::from_json(&text)?
        }
        None => ConfigDocument::default(),
    };
    let (mut s, _) = doc.resolve(cli.degrees)?;
    if let Some(seed) = cli.seed {
        s.seed = seed;
    }
    if let Some(n) = cli.steps {
        s.steps_per_period = n;
    }
    for w in validate_scenario(&s)? {
        eprintln!("warning: {w}");
    }
    Ok(s)
}

fn write_run(dir: &Path, cmd: &Command, s: &ScenarioConfig, format: Option<Format>, degrees: bool) -> Result<Manifest> {
    let outcome = execute(cmd, s, format, degrees)?;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut outputs = BTreeMap::new();
    for (name, bytes) in &outcome.files {
        let path = dir.join(name);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        outputs.insert(name.clone(), output::sha256_hex(bytes));
        println!("{}", path.display());
    }
    let manifest = Manifest {
        tool: "spinrot".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: cmd.clone(),
        format,
        degrees,
        seed: s.seed,
        config: s.clone(),
        status: outcome.status,
        outputs,
    };
    let path = dir.join(format!("{}.manifest.json", cmd.stem()));
    fs::write(&path, output::json_bytes(&manifest)?).with_context(|| format!("writing {}", path.display()))?;
    Ok(manifest)
}

fn exit_for(status: Status) -> ExitCode {
    match status {
        Status::Complete => ExitCode::SUCCESS,
        Status::Partial => ExitCode::from(2),
        Status::Failed => ExitCode::FAILURE,
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match &cli.command {
        Top::Run(cmd) => {
            let s = load_scenario(&cli)?;
            let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
            let m = write_run(&dir, cmd, &s, cli.format, cli.degrees)?;
            if m.status != Status::Complete {
                eprintln!("{}: some rows failed; see the error column", cmd.stem());
            }
            Ok(exit_for(m.status))
        }
        Top::Rerun { manifest } => {
            if cli.config.is_some() || cli.seed.is_some() || cli.steps.is_some() || cli.format.is_some() {
                bail!("rerun takes everything from the manifest; only --out may be given");
            }
            let text = fs::read_to_string(manifest).with_context(|| format!("reading {}", manifest.display()))?;
            let old: Manifest = serde_json::from_str(&text).context("parsing manifest")?;
            let dir = match &cli.out {
                Some(d) => d.clone(),
                None => manifest.parent().map(Path::to_path_buf).unwrap_or_default(),
            };
            let new = write_run(&dir, &old.command, &old.config, old.format, old.degrees)?;
            let mut same = new.outputs.len() == old.outputs.len();
            for (name, digest) in &old.outputs {
                let ok = new.outputs.get(name) == Some(digest);
                same &= ok;
                eprintln!("{name}: {}", if ok { "identical" } else { "DIFFERS" });
            }
            if !same {
                bail!("rerun did not reproduce the recorded outputs");
            }
            Ok(exit_for(new.status))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
