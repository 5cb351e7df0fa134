//! `idxsel compare`: a workload-by-configuration throughput matrix.
//! Workloads score independently, so they fan out across a bounded
//! worker pool; each workload reuses one operation stream for every
//! configuration column.

use std::sync::atomic::{AtomicUsize, Ordering};

use anyhow::{bail, Result};

use idxsel_core::index::IndexConfig;
use idxsel_core::report::matrix_csv;
use idxsel_core::workload::{self, OpKind, WorkloadSpec};

use crate::manifest::Manifest;
use crate::opts::CompareArgs;

use super::{
    bencher, ensure_out_dir, parse_mode, registry, resolve_workload, seed_override, write_artifact,
};

pub fn run(args: CompareArgs) -> Result<()> {
    let mode = parse_mode(&args.common)?;
    let registry = registry();

    let mut workloads: Vec<(String, WorkloadSpec)> = match args.workloads.as_str() {
        "pure" => OpKind::ALL
            .iter()
            .map(|&k| (k.name().to_string(), WorkloadSpec::pure(k)))
            .collect(),
        "presets" => workload::presets::NAMES
            .iter()
            .map(|name| {
                let spec = workload::presets::by_name(name).expect("built-in preset");
                (name.to_string(), spec)
            })
            .collect(),
        list => list
            .split(',')
            .map(resolve_workload)
            .collect::<Result<Vec<_>>>()?,
    };
    if let Some(seed) = seed_override(&args.common)? {
        for (_, spec) in &mut workloads {
            spec.seed = seed;
        }
    }

    let configs: Vec<IndexConfig> = match args.configs.as_str() {
        "defaults" => registry
            .kinds()
            .into_iter()
            .map(|k| registry.default_config(k))
            .collect::<idxsel_core::Result<Vec<_>>>()?,
        "all" => registry.all_configs(),
        list => list
            .split(',')
            .map(|text| registry.parse_config(text))
            .collect::<idxsel_core::Result<Vec<_>>>()?,
    };
    if configs.is_empty() || workloads.is_empty() {
        bail!("compare needs at least one workload and one configuration");
    }

    let jobs = args
        .jobs
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
                .min(4)
        })
        .max(1);

    let bencher = bencher(&registry);
    let mut cells: Vec<Vec<f64>> = vec![Vec::new(); workloads.len()];
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..jobs)
            .map(|_| {
                scope.spawn(|| {
                    let mut done = Vec::new();
                    loop {
                        let i = next.fetch_add(1, Ordering::Relaxed);
                        let Some((_, spec)) = workloads.get(i) else {
                            break;
                        };
                        let row = bencher
                            .compare(&configs, spec, mode)
                            .map(|results| results.iter().map(|r| r.throughput).collect());
                        done.push((i, row));
                    }
                    done
                })
            })
            .collect();
        for handle in handles {
            for (i, row) in handle.join().expect("bench worker panicked") {
                cells[i] = row?;
            }
        }
        anyhow::Ok(())
    })?;

    let row_labels: Vec<String> = workloads.iter().map(|(label, _)| label.clone()).collect();
    let col_labels = configs
        .iter()
        .map(|c| registry.format_config(c))
        .collect::<idxsel_core::Result<Vec<_>>>()?;
    let csv = matrix_csv(&row_labels, &col_labels, &cells)?;

    let mut manifest = Manifest::start("compare");
    manifest.set("workloads", row_labels.join(","));
    manifest.set("configs", col_labels.join(" "));
    manifest.set("mode", mode.name());
    manifest.set("jobs", jobs);
    for (label, spec) in &workloads {
        manifest.seed(&format!("workload.{label}"), spec.seed);
    }

    ensure_out_dir(&args.common.out)?;
    let csv_path = write_artifact(&args.common.out, "compare.csv", &csv)?;
    manifest.output(&csv_path);
    let manifest_path = manifest.write(&args.common.out)?;

    for (label, row) in row_labels.iter().zip(&cells) {
        let best = row
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty row");
        println!(
            "{label}: best {} at {:.1} ops/s",
            col_labels[best.0], best.1
        );
    }
    println!(
        "wrote {} and {}",
        csv_path.display(),
        manifest_path.display()
    );
    Ok(())
}
