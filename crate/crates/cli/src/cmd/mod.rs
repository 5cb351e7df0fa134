//! Command dispatch and the plumbing every command shares.

mod bench;
mod calibrate;
mod compare;
mod presets;
mod select;
mod sweep;
mod train;

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};

use idxsel_core::bench::{cost::CostModel, BenchMode, Bencher};
use idxsel_core::index::StructureRegistry;
use idxsel_core::workload::{self, OpKind, WorkloadSpec};

use crate::opts::{Cli, Command, CommonArgs};

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Bench(args) => bench::run(args),
        Command::Compare(args) => compare::run(args),
        Command::Train(args) => train::run(args),
        Command::Select(args) => select::run(args),
        Command::OpcountSweep(args) => sweep::run(args),
        Command::Presets(args) => presets::run(args),
        Command::Calibrate(args) => calibrate::run(args),
    }
}

pub fn registry() -> Arc<StructureRegistry> {
    Arc::new(StructureRegistry::with_defaults())
}

pub fn bencher(registry: &Arc<StructureRegistry>) -> Bencher {
    Bencher::new(
        Arc::clone(registry),
        Arc::new(CostModel::embedded().clone()),
    )
}

pub fn parse_mode(common: &CommonArgs) -> Result<BenchMode> {
    Ok(BenchMode::parse(&common.mode)?)
}

/// Seed precedence: --seed flag, then IDXSEL_SEED, then none.
pub fn seed_override(common: &CommonArgs) -> Result<Option<u64>> {
    if common.seed.is_some() {
        return Ok(common.seed);
    }
    match std::env::var("IDXSEL_SEED") {
        Ok(text) => {
            let seed = text
                .parse::<u64>()
                .context("IDXSEL_SEED must be an unsigned integer")?;
            Ok(Some(seed))
        }
        Err(_) => Ok(None),
    }
}

/// A workload argument names a pure mix, a preset, or a TOML file.
pub fn resolve_workload(text: &str) -> Result<(String, WorkloadSpec)> {
    for kind in OpKind::ALL {
        if kind.name() == text {
            return Ok((text.to_string(), WorkloadSpec::pure(kind)));
        }
    }
    if let Some(spec) = workload::presets::by_name(text) {
        return Ok((text.to_string(), spec));
    }
    let path = Path::new(text);
    if path.exists() {
        let label = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| text.to_string());
        let spec =
            workload::parse_file(path).with_context(|| format!("loading workload file {text}"))?;
        return Ok((label, spec));
    }
    bail!(
        "unknown workload {text:?}: expected one of {}, a preset ({}), or a TOML file path",
        OpKind::ALL.map(|k| k.name()).join("/"),
        workload::presets::NAMES.join("/"),
    )
}

pub fn ensure_out_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)
        .with_context(|| format!("creating output directory {}", dir.display()))
}

pub fn write_artifact(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}
