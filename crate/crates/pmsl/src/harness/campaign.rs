//! Fold-by-fold execution of an experiment: split, train, simulate, score,
//! and append one CSV row per fold plus aggregate rows.
//!
//! Runs are resumable: every fold writes its finished row (and timing) to
//! its own file under `rows/`, and a rerun with the same configuration
//! skips folds whose files already exist. The assembled `results.csv`
//! contains no wall-clock data, so rerunning a campaign — at any worker
//! count, resumed or not — reproduces it byte for byte. Timings live in a
//! separate `timings.csv`.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::log::{build_prefix_dataset, Trace};
use crate::lstm::SequenceModel;
use crate::metrics::evaluate;
use crate::sim::{default_max_len, simulate_log, SimConfig};
use crate::split::split_log;

use super::{
    fold_seeds, resolve, ExperimentConfig, FoldManifest, HpProfile, ResolvedExperiment,
    RunManifest, Timings,
};

/// Header of `results.csv` and of every per-fold row file.
pub const FOLD_CSV_HEADER: &str =
    "model,fold_id,hp_profile,seed,variants_held_out,F,P,G,F_A,P_A,G_A,size_tr,size_te,size_sim,rescaled";

/// Header of `timings.csv`.
pub const TIMINGS_CSV_HEADER: &str = "fold_id,epochs,train_secs,sim_secs";

/// What a finished (possibly partially failed) campaign produced.
#[derive(Debug)]
pub struct CampaignSummary {
    pub manifest_path: PathBuf,
    pub results_csv: PathBuf,
    pub timings_csv: PathBuf,
    /// Folds with a row in `results.csv`.
    pub completed: usize,
    /// `(fold_id, error)` for folds that failed; they are absent from
    /// `results.csv`.
    pub failed: Vec<(String, String)>,
    /// Mean `[F, P, G, F_A, P_A, G_A]` over completed folds.
    pub mean: Option<[f64; 6]>,
}

fn fold_id(index: usize) -> String {
    format!("fold-{index:03}")
}

/// `workers` is execution layout, not an experimental input, so it never
/// invalidates a resume.
fn same_experiment(a: &ExperimentConfig, b: &ExperimentConfig) -> bool {
    let mut a = a.clone();
    let mut b = b.clone();
    a.workers = 1;
    b.workers = 1;
    a == b
}

struct FoldPaths {
    row: PathBuf,
    time: PathBuf,
    err: PathBuf,
    history: PathBuf,
}

impl FoldPaths {
    fn new(out_dir: &Path, id: &str) -> Self {
        FoldPaths {
            row: out_dir.join("rows").join(format!("{id}.csv")),
            time: out_dir.join("rows").join(format!("{id}.time")),
            err: out_dir.join("rows").join(format!("{id}.err")),
            history: out_dir.join("history").join(format!("{id}.csv")),
        }
    }

    fn is_complete(&self) -> bool {
        self.row.is_file() && self.time.is_file()
    }

    fn clear(&self) -> Result<()> {
        for p in [&self.row, &self.time, &self.err] {
            if p.exists() {
                std::fs::remove_file(p).map_err(|e| Error::io(p, e))?;
            }
        }
        Ok(())
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Trains and scores one fold; returns its result row and timing row.
fn run_fold(
    resolved: &ResolvedExperiment,
    profile: &HpProfile,
    fm: &FoldManifest,
    paths: &FoldPaths,
) -> Result<(String, String)> {
    let held: BTreeSet<Trace> = resolved.plan.folds[fm.index].iter().cloned().collect();
    let split = split_log(&resolved.log, &held)?;
    let (tr_ds, val_ds) = build_prefix_dataset(&split.training_log, resolved.prefix_len, fm.split_seed)?;
    let hp = profile.instantiate(resolved.prefix_len, fm.hp_seed)?;

    let mut model = SequenceModel::init(&hp, tr_ds.vocabulary())?;
    let t0 = Instant::now();
    let history = model.train(&tr_ds, &val_ds)?;
    let train_secs = t0.elapsed().as_secs_f64();
    history.write_csv(&paths.history)?;

    let sim_cfg = SimConfig {
        n_traces: split.training_log.len() + split.test_log.len(),
        max_len: default_max_len(&split.training_log),
        seed: fm.sim_seed,
    };
    let t1 = Instant::now();
    let sim = simulate_log(&model, split.training_log.vocabulary(), &sim_cfg)?;
    let sim_secs = t1.elapsed().as_secs_f64();

    let report = evaluate(&split.training_log, &split.test_log, &sim, true)?;
    let row = format!(
        "{},{},{},{},{},{}",
        resolved.model_name,
        fm.fold_id,
        profile.label(),
        fm.hp_seed,
        fm.variants_held_out,
        report.csv_cells()
    );
    let time = format!(
        "{},{},{},{}",
        fm.fold_id,
        history.epochs.len(),
        train_secs,
        sim_secs
    );
    Ok((row, time))
}

/// Splits a result row into its cells and parses the numeric tail
/// (`variants_held_out` through `rescaled`, the boolean as 0/1).
fn numeric_cells(row: &str) -> Result<Vec<f64>> {
    let cells: Vec<&str> = row.trim_end().split(',').collect();
    let want = FOLD_CSV_HEADER.split(',').count();
    if cells.len() != want {
        return Err(Error::InvalidConfig(format!(
            "result row has {} cells, expected {want}: {row:?}",
            cells.len()
        )));
    }
    let mut out = Vec::with_capacity(11);
    for cell in &cells[4..14] {
        out.push(cell.parse::<f64>().map_err(|_| {
            Error::InvalidConfig(format!("non-numeric cell {cell:?} in result row {row:?}"))
        })?);
    }
    out.push(match cells[14] {
        "true" => 1.0,
        "false" => 0.0,
        other => {
            return Err(Error::InvalidConfig(format!(
                "rescaled cell must be true/false, got {other:?}"
            )))
        }
    });
    Ok(out)
}

fn mean_and_sample_stddev(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Runs (or resumes) a fold campaign into `out_dir`.
///
/// `fresh` wipes the directory first; otherwise an existing directory must
/// carry a manifest for the same experiment, and folds that already have a
/// row file are skipped. Fold failures are recorded in the summary and in
/// `rows/<fold>.err` but do not abort the remaining folds.
pub fn run_campaign(
    cfg: &ExperimentConfig,
    out_dir: impl AsRef<Path>,
    fresh: bool,
) -> Result<CampaignSummary> {
    let out_dir = out_dir.as_ref();
    let wall0 = Instant::now();
    cfg.validate()?;
    if matches!(cfg.profile, HpProfile::Grid) {
        return Err(Error::InvalidConfig(
            "the grid profile runs through the grid command, not a campaign".into(),
        ));
    }

    if fresh && out_dir.exists() {
        std::fs::remove_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    }
    let manifest_path = out_dir.join("manifest.json");
    if manifest_path.exists() {
        let prior = RunManifest::read_json(&manifest_path)?;
        if !same_experiment(&prior.config, cfg) {
            return Err(Error::InvalidConfig(format!(
                "{} holds a different experiment; use a fresh output directory or pass fresh=true",
                out_dir.display()
            )));
        }
    }
    for sub in ["rows", "history"] {
        let dir = out_dir.join(sub);
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    }

    let resolved = resolve(cfg)?;
    let folds: Vec<FoldManifest> = resolved
        .fold_indices
        .iter()
        .map(|&index| {
            let id = fold_id(index);
            let (split_seed, hp_seed, sim_seed) = fold_seeds(resolved.seed, index);
            FoldManifest {
                fold_id: id.clone(),
                index,
                variants_held_out: resolved.plan.folds[index].len(),
                split_seed,
                hp_seed,
                sim_seed,
                row_file: PathBuf::from(format!("rows/{id}.csv")),
                history_file: PathBuf::from(format!("history/{id}.csv")),
            }
        })
        .collect();

    let mut manifest = RunManifest {
        config: cfg.clone(),
        model_name: resolved.model_name.clone(),
        prefix_len: resolved.prefix_len,
        master_seed: resolved.seed,
        log_traces: resolved.log.len(),
        log_variants: resolved.log.variant_table().len(),
        fold_plan: resolved.plan.clone(),
        folds: folds.clone(),
        results_csv: PathBuf::from("results.csv"),
        timings_csv: PathBuf::from("timings.csv"),
        timings: None,
    };
    manifest.write_json(&manifest_path)?;

    let pending: Vec<&FoldManifest> = folds
        .iter()
        .filter(|fm| !FoldPaths::new(out_dir, &fm.fold_id).is_complete())
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot build worker pool: {e}")))?;
    let outcomes: Vec<(String, Result<()>)> = pool.install(|| {
        pending
            .par_iter()
            .map(|fm| {
                let paths = FoldPaths::new(out_dir, &fm.fold_id);
                let outcome = paths
                    .clear()
                    .and_then(|()| run_fold(&resolved, &cfg.profile, fm, &paths))
                    .and_then(|(row, time)| {
                        write_text(&paths.time, &format!("{time}\n"))?;
                        write_text(&paths.row, &format!("{row}\n"))
                    });
                if let Err(e) = &outcome {
                    let _ = write_text(&paths.err, &format!("{e}\n"));
                }
                (fm.fold_id.clone(), outcome.map(|_| ()))
            })
            .collect()
    });

    let mut failed: Vec<(String, String)> = outcomes
        .into_iter()
        .filter_map(|(id, r)| r.err().map(|e| (id, e.to_string())))
        .collect();
    failed.sort();

    // Assemble results.csv and timings.csv in fold-plan order from the
    // per-fold files, so the output is independent of completion order.
    let mut rows = Vec::new();
    let mut times = Vec::new();
    for fm in &folds {
        let paths = FoldPaths::new(out_dir, &fm.fold_id);
        if paths.is_complete() {
            rows.push(read_text(&paths.row)?.trim_end().to_owned());
            times.push(read_text(&paths.time)?.trim_end().to_owned());
        }
    }

    let mut mean = None;
    let mut results = String::from(FOLD_CSV_HEADER);
    results.push('\n');
    for row in &rows {
        results.push_str(row);
        results.push('\n');
    }
    if !rows.is_empty() {
        let table: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| numeric_cells(r))
            .collect::<Result<_>>()?;
        let mut means = Vec::new();
        let mut stds = Vec::new();
        for col in 0..11 {
            let column: Vec<f64> = table.iter().map(|r| r[col]).collect();
            let (m, s) = mean_and_sample_stddev(&column);
            means.push(m);
            stds.push(s);
        }
        mean = Some([means[1], means[2], means[3], means[4], means[5], means[6]]);
        for (tag, cells) in [("aggregate-mean", &means), ("aggregate-stddev", &stds)] {
            let tail: Vec<String> = cells.iter().map(|v| v.to_string()).collect();
            results.push_str(&format!(
                "{},{},{},{},{}\n",
                resolved.model_name,
                tag,
                cfg.profile.label(),
                resolved.seed,
                tail.join(",")
            ));
        }
    }
    let results_csv = out_dir.join("results.csv");
    write_text(&results_csv, &results)?;

    let mut timing_text = String::from(TIMINGS_CSV_HEADER);
    timing_text.push('\n');
    let mut train_total = 0.0;
    let mut sim_total = 0.0;
    for t in &times {
        timing_text.push_str(t);
        timing_text.push('\n');
        let cells: Vec<&str> = t.split(',').collect();
        if cells.len() == 4 {
            train_total += cells[2].parse::<f64>().unwrap_or(0.0);
            sim_total += cells[3].parse::<f64>().unwrap_or(0.0);
        }
    }
    let timings_csv = out_dir.join("timings.csv");
    write_text(&timings_csv, &timing_text)?;

    manifest.timings = Some(Timings {
        playout_secs: resolved.playout_secs,
        train_secs_total: train_total,
        sim_secs_total: sim_total,
        wall_secs: wall0.elapsed().as_secs_f64(),
    });
    manifest.write_json(&manifest_path)?;

    Ok(CampaignSummary {
        manifest_path,
        results_csv,
        timings_csv,
        completed: rows.len(),
        failed,
        mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{FoldSpec, ModelSource};
    use crate::lstm::HyperParams;
    use crate::metrics::MetricReport;

    fn tiny_config(seed: u64, workers: usize) -> ExperimentConfig {
        ExperimentConfig {
            model: ModelSource::Builtin(6),
            log_size_multiplier: 1,
            folds: FoldSpec::K(2),
            profile: HpProfile::Explicit(HyperParams {
                bidirectional: false,
                hidden_size: 8,
                batch_size: 32,
                max_epochs: 2,
                ..HyperParams::default()
            }),
            prefix_len: None,
            seed: Some(seed),
            workers,
        }
    }

    #[test]
    fn header_extends_the_metric_fields() {
        assert!(FOLD_CSV_HEADER.ends_with(MetricReport::CSV_FIELDS));
    }

    #[test]
    fn campaign_outputs_are_worker_count_invariant_and_resumable() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a");
        let b = dir.path().join("b");

        let summary = run_campaign(&tiny_config(5, 1), &a, false).unwrap();
        assert!(summary.failed.is_empty());
        assert_eq!(summary.completed, 2);
        let first = std::fs::read_to_string(&summary.results_csv).unwrap();
        assert_eq!(first.lines().count(), 1 + 2 + 2, "{first}");
        assert!(first.starts_with(FOLD_CSV_HEADER));
        assert!(first.contains("aggregate-mean") && first.contains("aggregate-stddev"));

        // Same experiment at a different worker count: byte-identical CSV.
        let other = run_campaign(&tiny_config(5, 2), &b, false).unwrap();
        let second = std::fs::read_to_string(&other.results_csv).unwrap();
        assert_eq!(first, second);

        // Resuming skips completed folds and reassembles the same file.
        let t0 = std::time::Instant::now();
        let resumed = run_campaign(&tiny_config(5, 1), &a, false).unwrap();
        assert!(t0.elapsed().as_secs_f64() < 30.0);
        assert_eq!(resumed.completed, 2);
        assert_eq!(std::fs::read_to_string(&resumed.results_csv).unwrap(), first);

        // A different experiment refuses to reuse the directory.
        let err = run_campaign(&tiny_config(6, 1), &a, false).unwrap_err();
        assert!(err.to_string().contains("different experiment"), "{err}");

        // Timings stay out of results.csv.
        assert!(!first.contains("secs"));
        let times = std::fs::read_to_string(&summary.timings_csv).unwrap();
        assert!(times.starts_with(TIMINGS_CSV_HEADER));
        assert_eq!(times.lines().count(), 1 + 2);
    }

    #[test]
    fn grid_profile_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig {
            profile: HpProfile::Grid,
            ..tiny_config(1, 1)
        };
        assert!(run_campaign(&cfg, dir.path().join("g"), false).is_err());
    }
}
