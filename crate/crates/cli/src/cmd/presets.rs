//! `idxsel presets`: list the built-in workload mixes, or write them as
//! TOML files usable with `--workload <file>`.

use anyhow::Result;

use idxsel_core::workload::{self, OpKind};

use crate::manifest::Manifest;
use crate::opts::PresetsArgs;

use super::{ensure_out_dir, write_artifact};

pub fn run(args: PresetsArgs) -> Result<()> {
    match args.write {
        None => {
            for name in workload::presets::NAMES {
                let spec = workload::presets::by_name(name).expect("built-in preset");
                let mix = OpKind::ALL
                    .iter()
                    .zip(spec.vector())
                    .filter(|(_, p)| *p > 0.0)
                    .map(|(k, p)| format!("{} {:.0}%", k.name(), p * 100.0))
                    .collect::<Vec<_>>()
                    .join(", ");
                println!("{name}: {mix} ({} ops, seed {})", spec.op_count, spec.seed);
            }
            Ok(())
        }
        Some(dir) => {
            ensure_out_dir(&dir)?;
            let mut manifest = Manifest::start("presets");
            for name in workload::presets::NAMES {
                let text = workload::presets::toml_for(name).expect("built-in preset");
                let path = write_artifact(&dir, &format!("{name}.toml"), text)?;
                manifest.output(&path);
                println!("wrote {}", path.display());
            }
            manifest.write(&dir)?;
            Ok(())
        }
    }
}
