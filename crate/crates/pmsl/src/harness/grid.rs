//! The hyperparameter grid: every combination of direction, depth, width,
//! shared l1 = l2 strength and dropout, trained on one shared prefix split
//! of the full log (no trace holdout — the grid compares training setups,
//! not generalization to unseen variants).
//!
//! Same persistence scheme as campaigns: one row file per cell under
//! `rows/`, resumable, and `grid.csv` free of wall-clock data.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::log::build_prefix_dataset;
use crate::lstm::{
    HyperParams, SequenceModel, GRID_DROPOUTS, GRID_HIDDEN_SIZES, GRID_REG_VALUES,
};
use crate::rng::{derive_seed, Phase};

use super::{ExperimentConfig, HpProfile, Timings};

/// Header of `grid.csv` and of every per-cell row file.
pub const GRID_CSV_HEADER: &str =
    "cell,bidirectional,layers,hidden,reg,dropout,seed,epochs,best_epoch,best_val_acc,final_val_loss,final_val_acc";

/// One grid cell: the axes that vary; everything else stays at the
/// training defaults.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub index: usize,
    pub bidirectional: bool,
    pub num_layers: usize,
    pub hidden_size: usize,
    /// Shared l1 = l2 penalty weight.
    pub reg: f64,
    pub dropout: f64,
}

impl GridCell {
    pub fn to_hyperparams(self, prefix_len: usize, seed: u64) -> HyperParams {
        HyperParams {
            bidirectional: self.bidirectional,
            num_layers: self.num_layers,
            hidden_size: self.hidden_size,
            l1: self.reg,
            l2: self.reg,
            dropout: self.dropout,
            prefix_len,
            seed,
            ..HyperParams::default()
        }
    }
}

/// All 192 cells in a fixed nesting order (direction, depth, width,
/// penalty, dropout), indexed 0..191.
pub fn expand_grid() -> Vec<GridCell> {
    let mut cells = Vec::with_capacity(192);
    for bidirectional in [false, true] {
        for num_layers in [1, 2] {
            for hidden_size in GRID_HIDDEN_SIZES {
                for reg in GRID_REG_VALUES {
                    for dropout in GRID_DROPOUTS {
                        let cell = GridCell {
                            index: cells.len(),
                            bidirectional,
                            num_layers,
                            hidden_size,
                            reg,
                            dropout,
                        };
                        debug_assert!(cell.to_hyperparams(6, 0).grid_legal());
                        cells.push(cell);
                    }
                }
            }
        }
    }
    cells
}

/// Optional per-axis restrictions: a `Some` axis keeps only matching cells.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridFilter {
    pub bidirectional: Option<bool>,
    pub num_layers: Option<usize>,
    pub hidden_size: Option<usize>,
    pub reg: Option<f64>,
    pub dropout: Option<f64>,
}

impl GridFilter {
    pub fn matches(&self, cell: &GridCell) -> bool {
        self.bidirectional.map_or(true, |v| v == cell.bidirectional)
            && self.num_layers.map_or(true, |v| v == cell.num_layers)
            && self.hidden_size.map_or(true, |v| v == cell.hidden_size)
            && self.reg.map_or(true, |v| v == cell.reg)
            && self.dropout.map_or(true, |v| v == cell.dropout)
    }
}

/// The reproduction record for a grid run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridManifest {
    pub config: ExperimentConfig,
    pub filter: GridFilter,
    pub model_name: String,
    pub prefix_len: usize,
    pub master_seed: u64,
    pub log_traces: usize,
    pub log_variants: usize,
    pub split_seed: u64,
    pub cells: Vec<GridCell>,
    pub grid_csv: PathBuf,
    pub timings_csv: PathBuf,
    pub timings: Option<Timings>,
}

impl GridManifest {
    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let json = serde_json::to_string_pretty(self)?;
        std::fs::write(path, json).map_err(|e| Error::io(path, e))
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// What a grid run produced.
#[derive(Debug)]
pub struct GridSummary {
    pub manifest_path: PathBuf,
    pub grid_csv: PathBuf,
    pub timings_csv: PathBuf,
    pub completed: usize,
    pub failed: Vec<(String, String)>,
    /// `(cell, best_val_acc)` of the best completed cell.
    pub best: Option<(usize, f64)>,
}

fn cell_id(index: usize) -> String {
    format!("cell-{index:03}")
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Runs (or resumes) the grid into `out_dir`. The configuration's profile
/// must be [`HpProfile::Grid`]; its fold spec is ignored because the grid
/// holds no traces out.
pub fn run_grid(
    cfg: &ExperimentConfig,
    filter: &GridFilter,
    out_dir: impl AsRef<Path>,
    fresh: bool,
) -> Result<GridSummary> {
    let out_dir = out_dir.as_ref();
    let wall0 = Instant::now();
    cfg.validate()?;
    if !matches!(cfg.profile, HpProfile::Grid) {
        return Err(Error::InvalidConfig(
            "grid runs need profile = \"grid\"".into(),
        ));
    }

    if fresh && out_dir.exists() {
        std::fs::remove_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    }
    let manifest_path = out_dir.join("grid-manifest.json");
    if manifest_path.exists() {
        let prior = GridManifest::read_json(&manifest_path)?;
        let mut a = prior.config.clone();
        let mut b = cfg.clone();
        a.workers = 1;
        b.workers = 1;
        if a != b || prior.filter != *filter {
            return Err(Error::InvalidConfig(format!(
                "{} holds a different grid run; use a fresh output directory or pass fresh=true",
                out_dir.display()
            )));
        }
    }
    let rows_dir = out_dir.join("rows");
    std::fs::create_dir_all(&rows_dir).map_err(|e| Error::io(&rows_dir, e))?;

    let resolved = super::resolve(cfg)?;
    let split_seed = derive_seed(resolved.seed, Phase::PrefixSplit, 0);
    let (tr_ds, val_ds) = build_prefix_dataset(&resolved.log, resolved.prefix_len, split_seed)?;

    let cells: Vec<GridCell> = expand_grid()
        .into_iter()
        .filter(|c| filter.matches(c))
        .collect();
    if cells.is_empty() {
        return Err(Error::InvalidConfig(
            "the grid filter excludes every cell".into(),
        ));
    }

    let mut manifest = GridManifest {
        config: cfg.clone(),
        filter: *filter,
        model_name: resolved.model_name.clone(),
        prefix_len: resolved.prefix_len,
        master_seed: resolved.seed,
        log_traces: resolved.log.len(),
        log_variants: resolved.log.variant_table().len(),
        split_seed,
        cells: cells.clone(),
        grid_csv: PathBuf::from("grid.csv"),
        timings_csv: PathBuf::from("grid-timings.csv"),
        timings: None,
    };
    manifest.write_json(&manifest_path)?;

    let pending: Vec<&GridCell> = cells
        .iter()
        .filter(|c| {
            let id = cell_id(c.index);
            !(rows_dir.join(format!("{id}.csv")).is_file()
                && rows_dir.join(format!("{id}.time")).is_file())
        })
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot build worker pool: {e}")))?;
    let outcomes: Vec<(String, Result<()>)> = pool.install(|| {
        pending
            .par_iter()
            .map(|cell| {
                let id = cell_id(cell.index);
                let row_path = rows_dir.join(format!("{id}.csv"));
                let time_path = rows_dir.join(format!("{id}.time"));
                let err_path = rows_dir.join(format!("{id}.err"));
                let seed = derive_seed(resolved.seed, Phase::Train, cell.index as u64);
                let hp = cell.to_hyperparams(resolved.prefix_len, seed);
                let outcome = (|| -> Result<()> {
                    for p in [&row_path, &time_path, &err_path] {
                        if p.exists() {
                            std::fs::remove_file(p).map_err(|e| Error::io(p, e))?;
                        }
                    }
                    let mut model = SequenceModel::init(&hp, tr_ds.vocabulary())?;
                    let t0 = Instant::now();
                    let history = model.train(&tr_ds, &val_ds)?;
                    let train_secs = t0.elapsed().as_secs_f64();
                    let last = history
                        .epochs
                        .last()
                        .ok_or(Error::EmptyInput("training history"))?;
                    let row = format!(
                        "{},{},{},{},{},{},{},{},{},{},{},{}\n",
                        id,
                        cell.bidirectional,
                        cell.num_layers,
                        cell.hidden_size,
                        cell.reg,
                        cell.dropout,
                        seed,
                        history.epochs.len(),
                        history.best_epoch,
                        history.best_val_acc,
                        last.val_loss,
                        last.val_acc
                    );
                    write_text(&time_path, &format!("{id},{train_secs}\n"))?;
                    write_text(&row_path, &row)
                })();
                if let Err(e) = &outcome {
                    let _ = write_text(&err_path, &format!("{e}\n"));
                }
                (id, outcome)
            })
            .collect()
    });

    let mut failed: Vec<(String, String)> = outcomes
        .into_iter()
        .filter_map(|(id, r)| r.err().map(|e| (id, e.to_string())))
        .collect();
    failed.sort();

    let mut grid_text = String::from(GRID_CSV_HEADER);
    grid_text.push('\n');
    let mut timing_text = String::from("cell,train_secs\n");
    let mut completed = 0usize;
    let mut best: Option<(usize, f64)> = None;
    let mut train_total = 0.0;
    for cell in &cells {
        let id = cell_id(cell.index);
        let row_path = rows_dir.join(format!("{id}.csv"));
        let time_path = rows_dir.join(format!("{id}.time"));
        if !(row_path.is_file() && time_path.is_file()) {
            continue;
        }
        let row = std::fs::read_to_string(&row_path).map_err(|e| Error::io(&row_path, e))?;
        let acc = row
            .trim_end()
            .split(',')
            .nth(9)
            .and_then(|c| c.parse::<f64>().ok())
            .ok_or_else(|| Error::InvalidConfig(format!("malformed grid row {row:?}")))?;
        if best.map_or(true, |(_, b)| acc > b) {
            best = Some((cell.index, acc));
        }
        grid_text.push_str(&row);
        let time = std::fs::read_to_string(&time_path).map_err(|e| Error::io(&time_path, e))?;
        if let Some(secs) = time.trim_end().split(',').nth(1) {
            train_total += secs.parse::<f64>().unwrap_or(0.0);
        }
        timing_text.push_str(&time);
        completed += 1;
    }
    let grid_csv = out_dir.join("grid.csv");
    write_text(&grid_csv, &grid_text)?;
    let timings_csv = out_dir.join("grid-timings.csv");
    write_text(&timings_csv, &timing_text)?;

    manifest.timings = Some(Timings {
        playout_secs: resolved.playout_secs,
        train_secs_total: train_total,
        sim_secs_total: 0.0,
        wall_secs: wall0.elapsed().as_secs_f64(),
    });
    manifest.write_json(&manifest_path)?;

    Ok(GridSummary {
        manifest_path,
        grid_csv,
        timings_csv,
        completed,
        failed,
        best,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{FoldSpec, ModelSource};

    #[test]
    fn grid_has_192_distinct_legal_cells() {
        let cells = expand_grid();
        assert_eq!(cells.len(), 192);
        assert!(cells.iter().enumerate().all(|(i, c)| c.index == i));
        let distinct: std::collections::BTreeSet<String> = cells
            .iter()
            .map(|c| {
                format!(
                    "{},{},{},{},{}",
                    c.bidirectional, c.num_layers, c.hidden_size, c.reg, c.dropout
                )
            })
            .collect();
        assert_eq!(distinct.len(), 192);
        assert!(cells.iter().all(|c| c.to_hyperparams(6, 0).grid_legal()));
    }

    #[test]
    fn filters_select_axis_slices() {
        let cells = expand_grid();
        let width16 = GridFilter {
            hidden_size: Some(16),
            ..GridFilter::default()
        };
        assert_eq!(cells.iter().filter(|c| width16.matches(c)).count(), 64);
        let corner = GridFilter {
            bidirectional: Some(true),
            num_layers: Some(2),
            hidden_size: Some(64),
            reg: Some(0.01),
            dropout: Some(0.6),
        };
        assert_eq!(cells.iter().filter(|c| corner.matches(c)).count(), 1);
        assert!(GridFilter::default().matches(&cells[0]));
    }

    #[test]
    fn tiny_filtered_grid_runs_and_resumes() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = ExperimentConfig {
            model: ModelSource::Builtin(6),
            log_size_multiplier: 1,
            folds: FoldSpec::K(2),
            profile: HpProfile::Grid,
            prefix_len: None,
            seed: Some(9),
            workers: 2,
        };
        // One cell: every axis pinned to its smallest setting.
        let filter = GridFilter {
            bidirectional: Some(false),
            num_layers: Some(1),
            hidden_size: Some(16),
            reg: Some(0.0),
            dropout: Some(0.0),
        };
        let summary = run_grid(&cfg, &filter, dir.path().join("g"), false).unwrap();
        assert!(summary.failed.is_empty());
        assert_eq!(summary.completed, 1);
        let text = std::fs::read_to_string(&summary.grid_csv).unwrap();
        assert!(text.starts_with(GRID_CSV_HEADER));
        assert_eq!(text.lines().count(), 2);
        assert!(summary.best.is_some());

        let again = run_grid(&cfg, &filter, dir.path().join("g"), false).unwrap();
        assert_eq!(std::fs::read_to_string(&again.grid_csv).unwrap(), text);
    }
}
