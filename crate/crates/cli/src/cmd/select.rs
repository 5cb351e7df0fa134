//! `idxsel select`: drive the trained policy over rollouts and report
//! the best configuration found. `--presets` additionally scores the
//! selection against the mean of choosing a configuration at random.

use anyhow::Result;

use idxsel_core::bench::BenchMode;
use idxsel_core::report::{baseline_csv, selected_vs_random_csv, selection_csv, SelectedVsRandom};
use idxsel_core::rl::checkpoint;
use idxsel_core::selector::{select_optimal, select_report, SelectConfig};
use idxsel_core::workload::{self, WorkloadSpec};

use crate::manifest::Manifest;
use crate::opts::SelectArgs;

use super::{
    bencher, ensure_out_dir, parse_mode, registry, resolve_workload, seed_override, write_artifact,
};

pub fn run(args: SelectArgs) -> Result<()> {
    let mode = parse_mode(&args.common)?;
    let registry = registry();
    let (net, hyper) = checkpoint::load(&args.checkpoint)?;

    let mut cfg = SelectConfig::default();
    cfg.episodes = args
        .episodes
        .unwrap_or_else(|| SelectConfig::default_episodes(&registry));
    cfg.gamma = hyper.gamma;
    cfg.undiscounted = args.undiscounted;
    cfg.env.mode = mode;
    if let Some(seed) = seed_override(&args.common)? {
        cfg.seed = seed;
    }

    let mut manifest = Manifest::start("select");
    manifest.set("checkpoint", args.checkpoint.display());
    manifest.set("mode", mode.name());
    manifest.set("episodes", cfg.episodes);
    manifest.set("undiscounted", cfg.undiscounted);
    manifest.seed("select", cfg.seed);
    ensure_out_dir(&args.common.out)?;

    if args.presets {
        run_presets(args, net, cfg, manifest, mode)
    } else {
        run_single(args, net, cfg, manifest, mode)
    }
}

fn run_single(
    args: SelectArgs,
    net: idxsel_core::rl::QNetwork,
    cfg: SelectConfig,
    mut manifest: Manifest,
    mode: BenchMode,
) -> Result<()> {
    let registry = registry();
    let (label, spec) = resolve_workload(args.workload.as_deref().expect("required flag"))?;
    manifest.set("workload", &label);
    manifest.seed("workload", spec.seed);

    let result = select_optimal(&net, registry.clone(), &spec, &cfg)?;
    let baselines = registry
        .kinds()
        .into_iter()
        .map(|k| registry.default_config(k))
        .collect::<idxsel_core::Result<Vec<_>>>()?;
    let rows = select_report(&result, registry.clone(), &spec, &baselines, mode)?;

    let selection_path = write_artifact(
        &args.common.out,
        "selection.csv",
        &selection_csv(&result, &registry)?,
    )?;
    let baselines_path = write_artifact(
        &args.common.out,
        "baselines.csv",
        &baseline_csv(&rows, &registry)?,
    )?;
    manifest.output(&selection_path);
    manifest.output(&baselines_path);
    let manifest_path = manifest.write(&args.common.out)?;

    println!(
        "selected {} for {label}: {:.1} ops/s ({} episodes, return {:.3})",
        registry.format_config(&result.optimal_config)?,
        rows[0].throughput,
        result.episodes_run,
        result.max_return,
    );
    for row in &rows[1..] {
        println!(
            "  vs {} {}: {:+.1}%",
            row.label,
            registry.format_config(&row.config)?,
            row.selected_gain_pct,
        );
    }
    println!(
        "wrote {}, {}, and {}",
        selection_path.display(),
        baselines_path.display(),
        manifest_path.display()
    );
    Ok(())
}

fn run_presets(
    args: SelectArgs,
    net: idxsel_core::rl::QNetwork,
    cfg: SelectConfig,
    mut manifest: Manifest,
    mode: BenchMode,
) -> Result<()> {
    let registry = registry();
    let bencher = bencher(&registry);
    let all = registry.all_configs();
    let mut rows = Vec::new();

    for name in workload::presets::NAMES {
        let spec: WorkloadSpec = workload::presets::by_name(name).expect("built-in preset");
        manifest.seed(&format!("workload.{name}"), spec.seed);
        let result = select_optimal(&net, registry.clone(), &spec, &cfg)?;

        // One stream scores the selection and the whole grid, so the
        // random-choice mean is the exact expectation under this stream.
        let mut configs = vec![result.optimal_config.clone()];
        configs.extend(all.iter().cloned());
        let scores = bencher.compare(&configs, &spec, mode)?;
        let selected = scores[0].throughput;
        let random_mean = scores[1..].iter().map(|r| r.throughput).sum::<f64>() / all.len() as f64;

        println!(
            "{name}: selected {} at {:.1} ops/s (random mean {:.1})",
            registry.format_config(&result.optimal_config)?,
            selected,
            random_mean,
        );
        rows.push(SelectedVsRandom {
            workload: name.to_string(),
            selected_config: registry.format_config(&result.optimal_config)?,
            selected_throughput: selected,
            random_mean_throughput: random_mean,
        });
    }

    let csv_path = write_artifact(
        &args.common.out,
        "selected_vs_random.csv",
        &selected_vs_random_csv(&rows)?,
    )?;
    manifest.output(&csv_path);
    let manifest_path = manifest.write(&args.common.out)?;
    println!(
        "wrote {} and {}",
        csv_path.display(),
        manifest_path.display()
    );
    Ok(())
}
