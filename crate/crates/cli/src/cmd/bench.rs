//! `idxsel bench`: one workload, one configuration, one CSV row.

use anyhow::Result;

use idxsel_core::report::{bench_csv, BenchRecord};

use crate::manifest::Manifest;
use crate::opts::BenchArgs;

use super::{
    bencher, ensure_out_dir, parse_mode, registry, resolve_workload, seed_override, write_artifact,
};

pub fn run(args: BenchArgs) -> Result<()> {
    let mode = parse_mode(&args.common)?;
    let (label, mut spec) = resolve_workload(&args.workload)?;
    if let Some(op_count) = args.op_count {
        spec.op_count = op_count;
    }
    if let Some(seed) = seed_override(&args.common)? {
        spec.seed = seed;
    }
    spec.validate()?;

    let registry = registry();
    let config = registry.parse_config(&args.config)?;
    let result = bencher(&registry).run_spec(&config, &spec, mode)?;

    let mut manifest = Manifest::start("bench");
    manifest.set("workload", &label);
    manifest.set("config", registry.format_config(&config)?);
    manifest.set("mode", mode.name());
    manifest.set("op_count", spec.op_count);
    manifest.seed("workload", spec.seed);

    ensure_out_dir(&args.common.out)?;
    let csv = bench_csv(&[BenchRecord {
        workload: label.clone(),
        config: registry.format_config(&config)?,
        result: result.clone(),
    }])?;
    let csv_path = write_artifact(&args.common.out, "bench.csv", &csv)?;
    manifest.output(&csv_path);
    let manifest_path = manifest.write(&args.common.out)?;

    println!(
        "{label} x {}: {:.1} ops/s over {} ops ({})",
        registry.format_config(&config)?,
        result.throughput,
        result.op_count,
        mode.name(),
    );
    println!(
        "wrote {} and {}",
        csv_path.display(),
        manifest_path.display()
    );
    Ok(())
}
