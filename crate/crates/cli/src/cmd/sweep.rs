//! `idxsel opcount-sweep`: hold the workload shape fixed and vary only
//! the operation count. Simulated throughput is per-op and should stay
//! flat; measured mode also prints the run-to-run spread.

use anyhow::{bail, Result};

use idxsel_core::bench::BenchMode;
use idxsel_core::index::StructureKind;
use idxsel_core::report::sweep_csv;

use crate::manifest::Manifest;
use crate::opts::SweepArgs;

use super::{
    bencher, ensure_out_dir, parse_mode, registry, resolve_workload, seed_override, write_artifact,
};

pub fn run(args: SweepArgs) -> Result<()> {
    if args.op_counts.is_empty() {
        bail!("opcount-sweep needs at least one op count");
    }
    let mode = parse_mode(&args.common)?;
    let registry = registry();
    let (label, mut spec) = resolve_workload(&args.workload)?;
    if let Some(seed) = seed_override(&args.common)? {
        spec.seed = seed;
    }
    let config = match &args.config {
        Some(text) => registry.parse_config(text)?,
        None => registry.default_config(StructureKind::LsmTree)?,
    };

    let bencher = bencher(&registry);
    let mut rows = Vec::with_capacity(args.op_counts.len());
    for &op_count in &args.op_counts {
        spec.op_count = op_count;
        spec.validate()?;
        rows.push((op_count, bencher.run_spec(&config, &spec, mode)?));
    }

    let mut manifest = Manifest::start("opcount-sweep");
    manifest.set("workload", &label);
    manifest.set("config", registry.format_config(&config)?);
    manifest.set("mode", mode.name());
    manifest.set(
        "op_counts",
        args.op_counts
            .iter()
            .map(u64::to_string)
            .collect::<Vec<_>>()
            .join(","),
    );
    manifest.seed("workload", spec.seed);

    ensure_out_dir(&args.common.out)?;
    let csv_path = write_artifact(&args.common.out, "sweep.csv", &sweep_csv(&rows)?)?;
    manifest.output(&csv_path);
    let manifest_path = manifest.write(&args.common.out)?;

    for (op_count, result) in &rows {
        println!("{op_count} ops: {:.1} ops/s", result.throughput);
    }
    if mode == BenchMode::Measured && rows.len() > 1 {
        let xs: Vec<f64> = rows.iter().map(|(_, r)| r.throughput).collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
        println!("coefficient of variation: {:.4}", var.sqrt() / mean);
    }
    println!(
        "wrote {} and {}",
        csv_path.display(),
        manifest_path.display()
    );
    Ok(())
}
