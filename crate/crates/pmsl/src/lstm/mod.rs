//! Next-activity sequence model: a from-scratch LSTM with training loop.
//!
//! The model maps a fixed-width window of input codes (one-hot activities,
//! front-padded with zero vectors) to a probability row over the target
//! labels (activities + EOS). Architecture: one or two (optionally
//! bidirectional) LSTM layers, the last step of the final layer feeding a
//! dense softmax head.
//!
//! Everything is 64-bit and deterministic: parameter initialization, epoch
//! shuffles and dropout masks all derive from [`HyperParams::seed`], so a
//! training run reproduces bit-for-bit on any machine and worker schedule.
//!
//! Submodules:
//! - [`model`]: parameter schema, initialization, checkpoints;
//! - [`forward`]: batched forward pass (training caches / streaming eval);
//! - [`backward`]: loss and backpropagation through time;
//! - [`train`]: Adam, the epoch loop with LR decay and early stopping;
//! - [`gradcheck`]: finite-difference validation of the analytic gradients.

mod backward;
mod forward;
mod gradcheck;
mod model;
mod train;

pub use gradcheck::{check_architecture, GradCheckOutcome};
pub use model::{Gradients, SequenceModel};

use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hidden sizes explored by the hyperparameter grid.
pub const GRID_HIDDEN_SIZES: [usize; 3] = [16, 32, 64];
/// Shared l1 = l2 strengths explored by the grid.
pub const GRID_REG_VALUES: [f64; 4] = [0.0, 0.0001, 0.001, 0.01];
/// Dropout rates explored by the grid.
pub const GRID_DROPOUTS: [f64; 4] = [0.0, 0.2, 0.4, 0.6];

/// Everything that parametrizes one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HyperParams {
    /// Run a backward-reading LSTM next to the forward one and concatenate
    /// their outputs.
    pub bidirectional: bool,
    /// Stacked LSTM layers (the grid uses 1 or 2).
    pub num_layers: usize,
    /// Units per LSTM layer and direction.
    pub hidden_size: usize,
    /// L1 penalty weight on all weight matrices (biases exempt).
    pub l1: f64,
    /// L2 penalty weight on all weight matrices (biases exempt).
    pub l2: f64,
    /// Inverted-dropout rate on LSTM layer outputs, training only.
    pub dropout: f64,
    /// Starting learning rate.
    pub learning_rate_init: f64,
    /// Mini-batch size (the last batch of an epoch may be short).
    pub batch_size: usize,
    /// Multiplier applied to the learning rate on a patience plateau.
    pub lr_decay_factor: f64,
    /// Epochs without validation-accuracy improvement before the LR drops.
    pub lr_patience: usize,
    /// Epochs without validation-accuracy improvement before training stops.
    pub stop_patience: usize,
    /// Hard epoch cap.
    pub max_epochs: usize,
    /// Input window width; shorter prefixes are front-padded, longer ones
    /// left-truncated.
    pub prefix_len: usize,
    /// Master seed for init, shuffles and dropout masks.
    pub seed: u64,
    /// Restore the parameters of the best-validation-accuracy epoch after
    /// training (disable to keep the final-epoch weights).
    pub restore_best: bool,
}

impl Default for HyperParams {
    fn default() -> Self {
        HyperParams {
            bidirectional: true,
            num_layers: 1,
            hidden_size: 64,
            l1: 0.0,
            l2: 0.0,
            dropout: 0.0,
            learning_rate_init: 0.005,
            batch_size: 128,
            lr_decay_factor: 0.5,
            lr_patience: 3,
            stop_patience: 6,
            max_epochs: 600,
            prefix_len: 6,
            seed: 0,
            restore_best: true,
        }
    }
}

impl HyperParams {
    /// The configuration selected by plain validation-accuracy tuning:
    /// bidirectional, one layer of 64 units, no regularization, no dropout.
    pub fn accuracy_based(prefix_len: usize, seed: u64) -> Self {
        HyperParams {
            prefix_len,
            seed,
            ..HyperParams::default()
        }
    }

    /// The configuration selected by tuning on the structural metrics
    /// themselves: bidirectional, one layer of 64 units, l1 = l2 = 0.001,
    /// dropout 0.4.
    pub fn post_hoc(prefix_len: usize, seed: u64) -> Self {
        HyperParams {
            l1: 0.001,
            l2: 0.001,
            dropout: 0.4,
            prefix_len,
            seed,
            ..HyperParams::default()
        }
    }

    /// Structural sanity checks shared by every consumer.
    pub fn validate(&self) -> Result<()> {
        fn bad(msg: String) -> Result<()> {
            Err(Error::InvalidConfig(msg))
        }
        if self.num_layers == 0 {
            return bad("num_layers must be at least 1".into());
        }
        if self.hidden_size == 0 {
            return bad("hidden_size must be at least 1".into());
        }
        if !(self.l1 >= 0.0 && self.l1.is_finite()) || !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return bad(format!("l1/l2 must be finite and >= 0, got {}/{}", self.l1, self.l2));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad(format!("dropout must lie in [0, 1), got {}", self.dropout));
        }
        if !(self.learning_rate_init > 0.0 && self.learning_rate_init.is_finite()) {
            return bad(format!("learning rate must be positive, got {}", self.learning_rate_init));
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1".into());
        }
        if !(self.lr_decay_factor > 0.0 && self.lr_decay_factor <= 1.0) {
            return bad(format!("lr_decay_factor must lie in (0, 1], got {}", self.lr_decay_factor));
        }
        if self.lr_patience == 0 || self.stop_patience == 0 {
            return bad("patience values must be at least 1".into());
        }
        if self.max_epochs == 0 {
            return bad("max_epochs must be at least 1".into());
        }
        if self.prefix_len == 0 {
            return bad("prefix_len must be at least 1".into());
        }
        Ok(())
    }

    /// Whether this configuration is one of the 192 grid cells:
    /// {uni, bi} x {1, 2 layers} x {16, 32, 64} x four shared l1 = l2
    /// strengths x four dropout rates, everything else at its default.
    pub fn grid_legal(&self) -> bool {
        let defaults = HyperParams::default();
        self.num_layers <= 2
            && GRID_HIDDEN_SIZES.contains(&self.hidden_size)
            && GRID_REG_VALUES.contains(&self.l1)
            && self.l1 == self.l2
            && GRID_DROPOUTS.contains(&self.dropout)
            && self.learning_rate_init == defaults.learning_rate_init
            && self.batch_size == defaults.batch_size
            && self.lr_decay_factor == defaults.lr_decay_factor
            && self.lr_patience == defaults.lr_patience
            && self.stop_patience == defaults.stop_patience
            && self.max_epochs == defaults.max_epochs
    }

    /// Directions per layer: 2 when bidirectional.
    pub(crate) fn n_dirs(&self) -> usize {
        if self.bidirectional {
            2
        } else {
            1
        }
    }
}

/// One epoch row of a training run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpochStats {
    /// 1-based epoch number.
    pub epoch: usize,
    /// Mean training loss (cross-entropy + penalties) over the epoch.
    pub train_loss: f64,
    /// Argmax match rate on the training batches (dropout active).
    pub train_acc: f64,
    /// Validation loss (cross-entropy + penalties), dropout off.
    pub val_loss: f64,
    /// Argmax match rate on the validation set.
    pub val_acc: f64,
    /// Learning rate in effect during this epoch.
    pub lr: f64,
}

/// Complete record of a training run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainHistory {
    pub epochs: Vec<EpochStats>,
    /// 1-based epoch with the best validation accuracy (ties keep the
    /// earliest).
    pub best_epoch: usize,
    pub best_val_acc: f64,
    /// True when the stop-patience rule ended training before `max_epochs`.
    pub stopped_early: bool,
}

impl TrainHistory {
    /// Writes the per-epoch table as CSV
    /// (`epoch,train_loss,train_acc,val_loss,val_acc,lr`).
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        writeln!(w, "epoch,train_loss,train_acc,val_loss,val_acc,lr").map_err(|e| Error::io(path, e))?;
        for row in &self.epochs {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                row.epoch, row.train_loss, row.train_acc, row.val_loss, row.val_acc, row.lr
            )
            .map_err(|e| Error::io(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}
