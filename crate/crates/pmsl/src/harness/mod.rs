//! Experiment orchestration: declarative configs, fold campaigns over a
//! played-out log, the hyperparameter grid, and SVG reporting.
//!
//! Every random decision derives from one master seed and a fixed stream
//! tag, so campaigns produce identical numbers for any worker count and
//! can resume after interruption without drifting.

mod campaign;
mod grid;
mod report;

pub use campaign::{run_campaign, CampaignSummary, FOLD_CSV_HEADER, TIMINGS_CSV_HEADER};
pub use grid::{expand_grid, run_grid, GridCell, GridFilter, GridSummary, GRID_CSV_HEADER};
pub use report::{emit_report, ReportSummary};

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::log::EventLog;
use crate::lstm::HyperParams;
use crate::model::{builtin_model, builtin_stats, EnumerationConfig, ProcessModel, ProcessTree};
use crate::rng::{derive_seed, Phase};
use crate::split::{make_folds, FoldPlan};

/// Fold counts the k-fold mode accepts.
pub const LEGAL_FOLD_COUNTS: [usize; 9] = [2, 3, 4, 5, 6, 8, 10, 15, 20];

/// Where the process model under study comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSource {
    /// One of the six built-in reference models.
    Builtin(usize),
    /// A process tree in the textual format.
    TreeFile(PathBuf),
}

impl ModelSource {
    /// Loads the model, its display name, and (for builtins) the
    /// recommended prediction window length.
    pub fn load(&self) -> Result<(ProcessModel, String, Option<usize>)> {
        match self {
            ModelSource::Builtin(id) => {
                let net = builtin_model(*id)?;
                let prefix = builtin_stats()
                    .iter()
                    .find(|s| s.id == *id)
                    .map(|s| s.prefix_len);
                Ok((ProcessModel::Net(net), format!("builtin-{id}"), prefix))
            }
            ModelSource::TreeFile(path) => {
                let tree = ProcessTree::read_text(path)?;
                let name = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "tree".to_owned());
                Ok((ProcessModel::Tree(tree), name, None))
            }
        }
    }
}

/// How variants are dealt into folds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FoldSpec {
    /// One fold per variant (leave-one-variant-out).
    Lovocv,
    /// Classic k-fold over variants; k must be a legal fold count.
    K(usize),
    /// A random subset of the leave-one-variant-out folds.
    Subsample(usize),
}

impl FoldSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            FoldSpec::Lovocv => Ok(()),
            FoldSpec::K(k) if LEGAL_FOLD_COUNTS.contains(k) => Ok(()),
            FoldSpec::K(k) => Err(Error::InvalidConfig(format!(
                "fold count {k} not in the supported set {LEGAL_FOLD_COUNTS:?}"
            ))),
            FoldSpec::Subsample(m) if *m >= 1 => Ok(()),
            FoldSpec::Subsample(_) => Err(Error::InvalidConfig(
                "subsample size must be at least 1".into(),
            )),
        }
    }
}

/// Which hyperparameter setting each fold trains with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum HpProfile {
    /// The plain setting tuned for validation accuracy: no penalties, no
    /// dropout.
    AccuracyBased,
    /// The regularized setting: l1 = l2 = 0.001, dropout 0.4.
    PostHoc,
    /// Explicit hyperparameters; window length and seed are overridden
    /// per fold.
    Explicit(HyperParams),
    /// The full grid — only valid for grid runs.
    Grid,
}

impl HpProfile {
    /// Stable label used in CSV rows and report legends.
    pub fn label(&self) -> &'static str {
        match self {
            HpProfile::AccuracyBased => "accuracy_based",
            HpProfile::PostHoc => "post_hoc",
            HpProfile::Explicit(_) => "explicit",
            HpProfile::Grid => "grid",
        }
    }

    /// Concrete hyperparameters for one fold.
    pub fn instantiate(&self, prefix_len: usize, seed: u64) -> Result<HyperParams> {
        match self {
            HpProfile::AccuracyBased => Ok(HyperParams::accuracy_based(prefix_len, seed)),
            HpProfile::PostHoc => Ok(HyperParams::post_hoc(prefix_len, seed)),
            HpProfile::Explicit(hp) => {
                let mut hp = hp.clone();
                hp.prefix_len = prefix_len;
                hp.seed = seed;
                hp.validate()?;
                Ok(hp)
            }
            HpProfile::Grid => Err(Error::InvalidConfig(
                "the grid profile runs through the grid command, not a campaign".into(),
            )),
        }
    }
}

fn default_multiplier() -> usize {
    100
}
fn default_workers() -> usize {
    1
}

/// A complete experiment declaration, loadable from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSource,
    /// Play-out size = multiplier × number of language variants.
    #[serde(default = "default_multiplier")]
    pub log_size_multiplier: usize,
    pub folds: FoldSpec,
    pub profile: HpProfile,
    /// Prediction window length; defaults to the builtin recommendation
    /// and is mandatory for tree files.
    #[serde(default)]
    pub prefix_len: Option<usize>,
    /// Master seed; may be injected from the command line instead.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_workers")]
    pub workers: usize,
}

impl ExperimentConfig {
    pub fn from_toml_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: ExperimentConfig =
            toml::from_str(&text).map_err(|e| Error::Toml(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.log_size_multiplier == 0 {
            return Err(Error::InvalidConfig(
                "log_size_multiplier must be positive".into(),
            ));
        }
        if self.workers == 0 {
            return Err(Error::InvalidConfig("workers must be at least 1".into()));
        }
        if let Some(p) = self.prefix_len {
            if p == 0 {
                return Err(Error::InvalidConfig("prefix_len must be positive".into()));
            }
        }
        self.folds.validate()?;
        if let HpProfile::Explicit(hp) = &self.profile {
            hp.validate()?;
        }
        Ok(())
    }

    /// The master seed, which campaigns require.
    pub fn require_seed(&self) -> Result<u64> {
        self.seed.ok_or_else(|| {
            Error::InvalidConfig("a master seed is required (pass --seed)".into())
        })
    }
}

/// Everything a campaign needs in memory: the model, its played-out log,
/// and the resolved fold plan.
pub struct ResolvedExperiment {
    pub model: ProcessModel,
    pub model_name: String,
    pub prefix_len: usize,
    pub seed: u64,
    pub log: EventLog,
    pub plan: FoldPlan,
    /// Original plan indices of the folds this run executes (the whole
    /// plan unless subsampled), in ascending order.
    pub fold_indices: Vec<usize>,
    pub playout_secs: f64,
}

/// Plays out the log and deals the folds. Pure function of the config and
/// master seed.
pub fn resolve(cfg: &ExperimentConfig) -> Result<ResolvedExperiment> {
    cfg.validate()?;
    let seed = cfg.require_seed()?;
    let enum_cfg = EnumerationConfig::default();
    let (model, model_name, builtin_prefix) = cfg.model.load()?;
    let prefix_len = cfg
        .prefix_len
        .or(builtin_prefix)
        .ok_or_else(|| {
            Error::InvalidConfig("prefix_len is required for tree-file models".into())
        })?;

    let language = model.enumerate_variants(&enum_cfg)?;
    let n_traces = cfg.log_size_multiplier * language.len();
    let t0 = std::time::Instant::now();
    let log = model.playout_log(n_traces, derive_seed(seed, Phase::Playout, 0), &enum_cfg)?;
    let playout_secs = t0.elapsed().as_secs_f64();

    let table = log.variant_table();
    let k = match cfg.folds {
        FoldSpec::Lovocv | FoldSpec::Subsample(_) => table.len(),
        FoldSpec::K(k) => k,
    };
    let plan = make_folds(&table, k, derive_seed(seed, Phase::FoldPlan, 0))?;

    let fold_indices = match cfg.folds {
        FoldSpec::Subsample(m) => {
            if m > plan.folds.len() {
                return Err(Error::InvalidConfig(format!(
                    "cannot subsample {m} folds from {}",
                    plan.folds.len()
                )));
            }
            use rand::seq::SliceRandom;
            let mut rng = crate::rng::rng_from_seed(derive_seed(seed, Phase::FoldPlan, 1));
            let mut all: Vec<usize> = (0..plan.folds.len()).collect();
            all.shuffle(&mut rng);
            let mut picked: Vec<usize> = all.into_iter().take(m).collect();
            picked.sort_unstable();
            picked
        }
        _ => (0..plan.folds.len()).collect(),
    };

    Ok(ResolvedExperiment {
        model,
        model_name,
        prefix_len,
        seed,
        log,
        plan,
        fold_indices,
        playout_secs,
    })
}

/// Per-fold bookkeeping the manifest records ahead of training.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FoldManifest {
    pub fold_id: String,
    /// Index into the fold plan.
    pub index: usize,
    pub variants_held_out: usize,
    pub split_seed: u64,
    pub hp_seed: u64,
    pub sim_seed: u64,
    pub row_file: PathBuf,
    pub history_file: PathBuf,
}

/// Wall-clock phase timings, filled in when a run completes.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Timings {
    pub playout_secs: f64,
    pub train_secs_total: f64,
    pub sim_secs_total: f64,
    pub wall_secs: f64,
}

/// The reproduction record written to `manifest.json` before any training
/// starts: config, resolved plan, and every derived seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: ExperimentConfig,
    pub model_name: String,
    pub prefix_len: usize,
    pub master_seed: u64,
    pub log_traces: usize,
    pub log_variants: usize,
    pub fold_plan: FoldPlan,
    pub folds: Vec<FoldManifest>,
    pub results_csv: PathBuf,
    pub timings_csv: PathBuf,
    /// Present once the run has finished.
    pub timings: Option<Timings>,
}

impl RunManifest {
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

/// Derived per-fold seeds: the split, training, and simulation streams are
/// independent of each other and of every other fold.
pub fn fold_seeds(master: u64, fold_index: usize) -> (u64, u64, u64) {
    (
        derive_seed(master, Phase::PrefixSplit, fold_index as u64),
        derive_seed(master, Phase::Train, fold_index as u64),
        derive_seed(master, Phase::Simulate, fold_index as u64),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_config() -> ExperimentConfig {
        ExperimentConfig {
            model: ModelSource::Builtin(1),
            log_size_multiplier: 100,
            folds: FoldSpec::Subsample(8),
            profile: HpProfile::AccuracyBased,
            prefix_len: None,
            seed: Some(7),
            workers: 1,
        }
    }

    #[test]
    fn toml_round_trip_covers_every_field() {
        let cfg = ExperimentConfig {
            model: ModelSource::TreeFile(PathBuf::from("m.ptree")),
            log_size_multiplier: 50,
            folds: FoldSpec::K(8),
            profile: HpProfile::PostHoc,
            prefix_len: Some(9),
            seed: Some(13),
            workers: 2,
        };
        let text = toml::to_string(&cfg).unwrap();
        let back: ExperimentConfig = toml::from_str(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn toml_defaults_fill_in() {
        let text = r#"
            model = { builtin = 2 }
            folds = "lovocv"
            profile = "accuracy_based"
        "#;
        let cfg: ExperimentConfig = toml::from_str(text).unwrap();
        assert_eq!(cfg.log_size_multiplier, 100);
        assert_eq!(cfg.workers, 1);
        assert_eq!(cfg.seed, None);
        assert_eq!(cfg.prefix_len, None);
        assert!(cfg.require_seed().is_err());
    }

    #[test]
    fn illegal_fold_counts_are_rejected() {
        for k in [0, 1, 7, 9, 21, 100] {
            assert!(FoldSpec::K(k).validate().is_err(), "k={k} accepted");
        }
        for k in LEGAL_FOLD_COUNTS {
            assert!(FoldSpec::K(k).validate().is_ok());
        }
    }

    #[test]
    fn profiles_expand_to_the_named_configurations() {
        let acc = HpProfile::AccuracyBased.instantiate(6, 3).unwrap();
        assert_eq!(acc, HyperParams::accuracy_based(6, 3));
        let post = HpProfile::PostHoc.instantiate(6, 3).unwrap();
        assert_eq!(post, HyperParams::post_hoc(6, 3));
        assert!(HpProfile::Grid.instantiate(6, 3).is_err());

        let explicit = HpProfile::Explicit(HyperParams::default());
        let hp = explicit.instantiate(9, 17).unwrap();
        assert_eq!(hp.prefix_len, 9);
        assert_eq!(hp.seed, 17);
    }

    #[test]
    fn resolve_sizes_the_log_and_subsamples_folds() {
        let cfg = ExperimentConfig {
            model: ModelSource::Builtin(6),
            log_size_multiplier: 10,
            folds: FoldSpec::Subsample(5),
            seed: Some(11),
            ..base_config()
        };
        let r = resolve(&cfg).unwrap();
        assert_eq!(r.model_name, "builtin-6");
        assert_eq!(r.prefix_len, 12);
        assert_eq!(r.log.len(), 10 * 27);
        assert_eq!(r.fold_indices.len(), 5);
        assert!(r.fold_indices.windows(2).all(|w| w[0] < w[1]));
        assert!(r.fold_indices.iter().all(|&i| i < r.plan.folds.len()));

        let again = resolve(&cfg).unwrap();
        assert_eq!(r.fold_indices, again.fold_indices);
        assert_eq!(r.plan, again.plan);
    }

    #[test]
    fn fold_seeds_are_pairwise_distinct() {
        let mut seen = std::collections::BTreeSet::new();
        for ix in 0..50 {
            let (a, b, c) = fold_seeds(42, ix);
            assert!(seen.insert(a) && seen.insert(b) && seen.insert(c));
        }
    }
}
