//! `idxsel calibrate`: run every pure workload against every default
//! configuration in both modes and report measured/simulated ratios, so
//! the cost model's constants can be fitted to the current machine.

use anyhow::Result;

use idxsel_core::bench::BenchMode;
use idxsel_core::report::matrix_csv;
use idxsel_core::workload::{OpKind, WorkloadSpec};

use crate::manifest::Manifest;
use crate::opts::CalibrateArgs;

use super::{bencher, ensure_out_dir, registry, seed_override, write_artifact};

pub fn run(args: CalibrateArgs) -> Result<()> {
    let registry = registry();
    let bencher = bencher(&registry);
    let configs = registry
        .kinds()
        .into_iter()
        .map(|k| registry.default_config(k))
        .collect::<idxsel_core::Result<Vec<_>>>()?;
    let col_labels = configs
        .iter()
        .map(|c| registry.format_config(c))
        .collect::<idxsel_core::Result<Vec<_>>>()?;
    let seed = seed_override(&args.common)?;

    let mut manifest = Manifest::start("calibrate");
    manifest.set("op_count", args.op_count);

    let mut row_labels = Vec::new();
    let mut cells = Vec::new();
    for kind in OpKind::ALL {
        let mut spec = WorkloadSpec::pure(kind);
        spec.op_count = args.op_count;
        if let Some(seed) = seed {
            spec.seed = seed;
        }
        spec.validate()?;
        manifest.seed(&format!("workload.{}", kind.name()), spec.seed);

        let sim = bencher.compare(&configs, &spec, BenchMode::Simulated)?;
        let meas = bencher.compare(&configs, &spec, BenchMode::Measured)?;
        // Three rows per workload: both throughputs, then their ratio.
        for (suffix, values) in [
            ("sim", sim.iter().map(|r| r.throughput).collect::<Vec<_>>()),
            ("meas", meas.iter().map(|r| r.throughput).collect()),
            (
                "ratio",
                meas.iter()
                    .zip(&sim)
                    .map(|(m, s)| m.throughput / s.throughput)
                    .collect(),
            ),
        ] {
            row_labels.push(format!("{}/{suffix}", kind.name()));
            cells.push(values);
        }
    }

    ensure_out_dir(&args.common.out)?;
    let csv = matrix_csv(&row_labels, &col_labels, &cells)?;
    let csv_path = write_artifact(&args.common.out, "calibrate.csv", &csv)?;
    manifest.output(&csv_path);
    let manifest_path = manifest.write(&args.common.out)?;

    for (label, row) in row_labels.iter().zip(&cells) {
        if label.ends_with("/ratio") {
            let line = col_labels
                .iter()
                .zip(row)
                .map(|(c, v)| format!("{c} {v:.3}"))
                .collect::<Vec<_>>()
                .join(", ");
            println!("{label}: {line}");
        }
    }
    println!(
        "wrote {} and {}",
        csv_path.display(),
        manifest_path.display()
    );
    Ok(())
}
