//! `idxsel train`: run the trainer and write checkpoint, per-episode
//! CSV, and manifest.

use anyhow::{bail, Result};

use idxsel_core::report::train_csv;
use idxsel_core::rl::checkpoint;
use idxsel_core::trainer::{train, train_curriculum, TrainConfig};

use crate::manifest::Manifest;
use crate::opts::TrainArgs;

use super::{
    ensure_out_dir, parse_mode, registry, resolve_workload, seed_override, write_artifact,
};

pub fn run(args: TrainArgs) -> Result<()> {
    let mut cfg = match args.scale.as_str() {
        "desk" => TrainConfig::desk(),
        "paper" => TrainConfig::paper(),
        other => bail!("unknown scale {other:?}, expected \"desk\" or \"paper\""),
    };
    cfg.env.mode = parse_mode(&args.common)?;
    if let Some(seed) = seed_override(&args.common)? {
        cfg.seed = seed;
    }

    let registry = registry();
    let mut manifest = Manifest::start("train");
    manifest.set("scale", &args.scale);
    manifest.set("mode", cfg.env.mode.name());
    manifest.seed("train", cfg.seed);

    let (net, report) = match &args.workload {
        Some(text) => {
            let (label, spec) = resolve_workload(text)?;
            manifest.set("workload", &label);
            manifest.set("episodes", args.episodes);
            manifest.seed("workload", spec.seed);
            train(registry.clone(), &spec, args.episodes, &cfg)?
        }
        None => {
            manifest.set("curriculum", true);
            manifest.set(
                "episodes",
                format!(
                    "{}x5 + {}x{}",
                    cfg.phase1_episodes, cfg.phase2_random_workloads, cfg.phase2_episodes
                ),
            );
            train_curriculum(registry.clone(), &cfg)?
        }
    };

    ensure_out_dir(&args.common.out)?;
    let checkpoint_path = args
        .checkpoint
        .unwrap_or_else(|| args.common.out.join("checkpoint.qnet"));
    checkpoint::save(&checkpoint_path, &net, &cfg.hyper)?;
    manifest.output(&checkpoint_path);

    let csv = train_csv(&report, &registry)?;
    let csv_path = write_artifact(&args.common.out, "train.csv", &csv)?;
    manifest.output(&csv_path);
    let manifest_path = manifest.write(&args.common.out)?;

    let mean_loss = if report.losses.is_empty() {
        f64::NAN
    } else {
        report.losses.iter().sum::<f64>() / report.losses.len() as f64
    };
    println!(
        "trained {} episodes ({} steps, {} updates, mean loss {:.4}) in {:.1?}",
        report.episodes.len(),
        report.total_steps,
        report.total_updates,
        mean_loss,
        report.wall,
    );
    println!(
        "wrote {}, {}, and {}",
        checkpoint_path.display(),
        csv_path.display(),
        manifest_path.display()
    );
    Ok(())
}
