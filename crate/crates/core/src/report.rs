//! Plot-ready CSV emission.
//!
//! Every builder returns the complete file contents as a string; callers
//! own file placement. Output is RFC 4180: CRLF record ends, a header
//! row, quoting only where a field requires it. Floats print in Rust's
//! shortest round-trip form, so identical inputs yield identical bytes.

use csv::{Terminator, WriterBuilder};

use crate::bench::BenchResult;
use crate::error::{Error, Result};
use crate::index::StructureRegistry;
use crate::selector::{ComparisonRow, SelectionResult};
use crate::trainer::TrainReport;

fn writer() -> csv::Writer<Vec<u8>> {
    WriterBuilder::new()
        .terminator(Terminator::CRLF)
        .from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Report(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Report(e.to_string()))
}

fn write_row(w: &mut csv::Writer<Vec<u8>>, fields: &[String]) -> Result<()> {
    w.write_record(fields)
        .map_err(|e| Error::Report(e.to_string()))
}

/// One benchmark measurement tied to the workload and config it scored.
#[derive(Clone, Debug)]
pub struct BenchRecord {
    pub workload: String,
    pub config: String,
    pub result: BenchResult,
}

/// `workload,config,mode,op_count,elapsed_s,throughput`
pub fn bench_csv(records: &[BenchRecord]) -> Result<String> {
    let mut w = writer();
    write_row(
        &mut w,
        &[
            "workload",
            "config",
            "mode",
            "op_count",
            "elapsed_s",
            "throughput",
        ]
        .map(String::from),
    )?;
    for r in records {
        write_row(
            &mut w,
            &[
                r.workload.clone(),
                r.config.clone(),
                r.result.mode.name().to_string(),
                r.result.op_count.to_string(),
                r.result.elapsed.as_secs_f64().to_string(),
                r.result.throughput.to_string(),
            ],
        )?;
    }
    finish(w)
}

/// Rectangular throughput table: one row per workload, one column per
/// config. `cells[i][j]` scores row i under column j.
pub fn matrix_csv(
    row_labels: &[String],
    col_labels: &[String],
    cells: &[Vec<f64>],
) -> Result<String> {
    if cells.len() != row_labels.len() {
        return Err(Error::Report(format!(
            "expected {} rows, got {}",
            row_labels.len(),
            cells.len()
        )));
    }
    let mut w = writer();
    let mut header = vec!["workload".to_string()];
    header.extend(col_labels.iter().cloned());
    write_row(&mut w, &header)?;
    for (label, row) in row_labels.iter().zip(cells) {
        if row.len() != col_labels.len() {
            return Err(Error::Report(format!(
                "row {label} has {} cells, expected {}",
                row.len(),
                col_labels.len()
            )));
        }
        let mut fields = vec![label.clone()];
        fields.extend(row.iter().map(|v| v.to_string()));
        write_row(&mut w, &fields)?;
    }
    finish(w)
}

/// `episode,phase,workload,length,total_reward,mean_loss,final_config`;
/// `mean_loss` is empty for episodes that ran no updates.
pub fn train_csv(report: &TrainReport, registry: &StructureRegistry) -> Result<String> {
    let mut w = writer();
    write_row(
        &mut w,
        &[
            "episode",
            "phase",
            "workload",
            "length",
            "total_reward",
            "mean_loss",
            "final_config",
        ]
        .map(String::from),
    )?;
    for (i, e) in report.episodes.iter().enumerate() {
        write_row(
            &mut w,
            &[
                i.to_string(),
                e.phase.to_string(),
                e.workload.clone(),
                e.length.to_string(),
                e.total_reward.to_string(),
                e.mean_loss.map(|l| l.to_string()).unwrap_or_default(),
                registry.format_config(&e.final_config)?,
            ],
        )?;
    }
    finish(w)
}

/// `config,best_return,optimal`: every visited config with its best
/// recorded return, the selected one flagged. Row order follows the
/// visited map, so identical runs emit identical bytes.
pub fn selection_csv(result: &SelectionResult, registry: &StructureRegistry) -> Result<String> {
    let mut w = writer();
    write_row(
        &mut w,
        &["config", "best_return", "optimal"].map(String::from),
    )?;
    for (config, ret) in &result.visited {
        write_row(
            &mut w,
            &[
                registry.format_config(config)?,
                ret.to_string(),
                (*config == result.optimal_config).to_string(),
            ],
        )?;
    }
    finish(w)
}

/// `label,config,throughput,selected_gain_pct` over a selected-first
/// comparison run.
pub fn baseline_csv(rows: &[ComparisonRow], registry: &StructureRegistry) -> Result<String> {
    let mut w = writer();
    write_row(
        &mut w,
        &["label", "config", "throughput", "selected_gain_pct"].map(String::from),
    )?;
    for r in rows {
        write_row(
            &mut w,
            &[
                r.label.clone(),
                registry.format_config(&r.config)?,
                r.throughput.to_string(),
                r.selected_gain_pct.to_string(),
            ],
        )?;
    }
    finish(w)
}

/// One workload's selection outcome against the uniform-random-choice
/// baseline over the config grid.
#[derive(Clone, Debug)]
pub struct SelectedVsRandom {
    pub workload: String,
    pub selected_config: String,
    pub selected_throughput: f64,
    pub random_mean_throughput: f64,
}

/// `workload,selected_config,selected_throughput,random_mean_throughput,gain_pct`
pub fn selected_vs_random_csv(rows: &[SelectedVsRandom]) -> Result<String> {
    let mut w = writer();
    write_row(
        &mut w,
        &[
            "workload",
            "selected_config",
            "selected_throughput",
            "random_mean_throughput",
            "gain_pct",
        ]
        .map(String::from),
    )?;
    for r in rows {
        let gain =
            (r.selected_throughput - r.random_mean_throughput) / r.random_mean_throughput * 100.0;
        write_row(
            &mut w,
            &[
                r.workload.clone(),
                r.selected_config.clone(),
                r.selected_throughput.to_string(),
                r.random_mean_throughput.to_string(),
                gain.to_string(),
            ],
        )?;
    }
    finish(w)
}

/// `op_count,mode,throughput,elapsed_s` for an operation-count sweep of
/// a fixed workload shape and config.
pub fn sweep_csv(rows: &[(u64, BenchResult)]) -> Result<String> {
    let mut w = writer();
    write_row(
        &mut w,
        &["op_count", "mode", "throughput", "elapsed_s"].map(String::from),
    )?;
    for (op_count, result) in rows {
        write_row(
            &mut w,
            &[
                op_count.to_string(),
                result.mode.name().to_string(),
                result.throughput.to_string(),
                result.elapsed.as_secs_f64().to_string(),
            ],
        )?;
    }
    finish(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;
    use std::time::Duration;

    use crate::bench::{cost::CostModel, BenchMode, Bencher};
    use crate::workload::{OpKind, WorkloadSpec};

    fn registry() -> StructureRegistry {
        StructureRegistry::with_defaults()
    }

    fn result(throughput: f64) -> BenchResult {
        BenchResult {
            mode: BenchMode::Simulated,
            throughput,
            elapsed: Duration::from_secs_f64(0.25),
            op_count: 2_000,
            kind_counts: [2_000, 0, 0, 0, 0],
        }
    }

    #[test]
    fn bench_csv_has_header_and_one_row_per_record() {
        let records = vec![BenchRecord {
            workload: "read".into(),
            config: "btree:fanout=64".into(),
            result: result(8_000.0),
        }];
        let csv = bench_csv(&records).unwrap();
        let lines: Vec<&str> = csv.split("\r\n").filter(|l| !l.is_empty()).collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(
            lines[0],
            "workload,config,mode,op_count,elapsed_s,throughput"
        );
        assert_eq!(lines[1], "read,btree:fanout=64,simulated,2000,0.25,8000");
    }

    #[test]
    fn fields_with_commas_are_quoted() {
        let records = vec![BenchRecord {
            workload: "insert".into(),
            config: "lsm:memtable_bytes=262144,size_ratio=10".into(),
            result: result(1.5),
        }];
        let csv = bench_csv(&records).unwrap();
        assert!(csv.contains("\"lsm:memtable_bytes=262144,size_ratio=10\""));
    }

    #[test]
    fn records_end_with_crlf() {
        let csv = bench_csv(&[]).unwrap();
        assert!(csv.ends_with("\r\n"));
        assert_eq!(csv.matches("\r\n").count(), 1);
    }

    #[test]
    fn matrix_csv_is_rectangular_or_rejected() {
        let rows = vec!["read".to_string(), "insert".to_string()];
        let cols = vec!["btree".to_string(), "hash".to_string()];
        let csv = matrix_csv(&rows, &cols, &[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let lines: Vec<&str> = csv.split("\r\n").filter(|l| !l.is_empty()).collect();
        assert_eq!(lines, vec!["workload,btree,hash", "read,1,2", "insert,3,4"]);

        assert!(matrix_csv(&rows, &cols, &[vec![1.0, 2.0]]).is_err());
        assert!(matrix_csv(&rows, &cols, &[vec![1.0], vec![3.0, 4.0]]).is_err());
    }

    #[test]
    fn train_csv_leaves_missing_loss_empty() {
        let registry = Arc::new(registry());
        let cfg = crate::trainer::TrainConfig::desk();
        let spec = WorkloadSpec::pure(OpKind::Read);
        let (_, report) = crate::trainer::train(Arc::clone(&registry), &spec, 3, &cfg).unwrap();
        let csv = train_csv(&report, &registry).unwrap();
        let lines: Vec<&str> = csv.split("\r\n").filter(|l| !l.is_empty()).collect();
        assert_eq!(lines.len(), 1 + report.episodes.len());
        // Warm-up episodes run no updates, so the loss field is empty.
        assert!(
            lines[1].contains(",,"),
            "expected empty mean_loss in {:?}",
            lines[1]
        );
    }

    #[test]
    fn selection_csv_flags_exactly_one_optimal_row() {
        let registry = Arc::new(registry());
        let net = crate::rl::QNetwork::zeroed(12, 8, &[4]).unwrap();
        let mut cfg = crate::selector::SelectConfig::default();
        cfg.episodes = 4;
        let spec = WorkloadSpec::pure(OpKind::Read);
        let result =
            crate::selector::select_optimal(&net, Arc::clone(&registry), &spec, &cfg).unwrap();
        let csv = selection_csv(&result, &registry).unwrap();
        assert_eq!(csv.matches(",true").count(), 1);
        assert_eq!(
            csv.split("\r\n").filter(|l| !l.is_empty()).count(),
            1 + result.visited.len()
        );
    }

    #[test]
    fn identical_inputs_yield_identical_bytes() {
        let registry = Arc::new(registry());
        let bencher = Bencher::new(
            Arc::clone(&registry),
            Arc::new(CostModel::embedded().clone()),
        );
        let spec = WorkloadSpec::pure(OpKind::Scan);
        let configs: Vec<_> = registry
            .kinds()
            .into_iter()
            .map(|k| registry.default_config(k).unwrap())
            .collect();
        let make = || {
            let results = bencher
                .compare(&configs, &spec, BenchMode::Simulated)
                .unwrap();
            let records: Vec<BenchRecord> = configs
                .iter()
                .zip(&results)
                .map(|(c, r)| BenchRecord {
                    workload: spec.label(),
                    config: registry.format_config(c).unwrap(),
                    result: r.clone(),
                })
                .collect();
            bench_csv(&records).unwrap()
        };
        assert_eq!(make(), make());
    }
}
