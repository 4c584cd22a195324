//! Adam updates and the epoch loop.
//!
//! Schedule: after every epoch the validation argmax accuracy is measured;
//! strict improvement resets both patience counters and snapshots the
//! parameters. `lr_patience` non-improving epochs in a row multiply the
//! learning rate by `lr_decay_factor` (and restart that counter), while
//! `stop_patience` epochs without a new best halt training. The best-epoch
//! snapshot is restored at the end unless `restore_best` is off.

use ndarray::Array2;
use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::log::{PrefixDataset, PAD_CODE};
use crate::rng::{derive_seed, rng_from_seed, Phase};

use super::model::{Gradients, SequenceModel};
use super::{EpochStats, TrainHistory};

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-7;

/// Copies dataset rows into a dense batch.
fn gather_batch(ds: &PrefixDataset, idxs: &[usize]) -> (Array2<u16>, Vec<u16>) {
    let w = ds.prefix_len();
    let mut codes = Array2::from_elem((idxs.len(), w), PAD_CODE);
    for (mut row, &i) in codes.rows_mut().into_iter().zip(idxs) {
        for (dst, &src) in row.iter_mut().zip(ds.input(i)) {
            *dst = src;
        }
    }
    let targets = idxs.iter().map(|&i| ds.target(i)).collect();
    (codes, targets)
}

/// Index of the largest entry, first maximum winning ties.
pub(super) fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (j, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = j;
        }
    }
    best
}

impl SequenceModel {
    /// One Adam update at the current learning rate
    /// (`beta1 = 0.9, beta2 = 0.999, eps = 1e-7`, bias-corrected moments).
    pub fn adam_step(&mut self, grads: &Gradients) {
        self.opt.t += 1;
        let bc1 = 1.0 - ADAM_BETA1.powi(self.opt.t as i32);
        let bc2 = 1.0 - ADAM_BETA2.powi(self.opt.t as i32);
        let lr = self.lr;
        for (k, g) in grads.0.iter().enumerate() {
            let gs = g.as_slice().expect("standard layout");
            let ws = self.tensors[k].as_slice_mut().expect("standard layout");
            let ms = self.opt.m[k].as_slice_mut().expect("standard layout");
            let vs = self.opt.v[k].as_slice_mut().expect("standard layout");
            for idx in 0..ws.len() {
                let gv = gs[idx];
                ms[idx] = ADAM_BETA1 * ms[idx] + (1.0 - ADAM_BETA1) * gv;
                vs[idx] = ADAM_BETA2 * vs[idx] + (1.0 - ADAM_BETA2) * gv * gv;
                let m_hat = ms[idx] / bc1;
                let v_hat = vs[idx] / bc2;
                ws[idx] -= lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
            }
        }
    }

    /// Mean cross-entropy + penalty and argmax accuracy on a dataset,
    /// dropout off.
    pub fn evaluate(&self, ds: &PrefixDataset) -> Result<(f64, f64)> {
        self.check_dataset(ds, "evaluation")?;
        let n = ds.len();
        let bs = self.hp.batch_size;
        let mut ce_sum = 0.0;
        let mut correct = 0usize;
        for start in (0..n).step_by(bs) {
            let idxs: Vec<usize> = (start..(start + bs).min(n)).collect();
            let (codes, targets) = gather_batch(ds, &idxs);
            let probs = self.predict_probs(&codes.view());
            for (b, &y) in targets.iter().enumerate() {
                let row = probs.row(b);
                let r = row.as_slice().expect("standard layout row");
                ce_sum -= r[y as usize].ln();
                if argmax(r) == y as usize {
                    correct += 1;
                }
            }
        }
        Ok((ce_sum / n as f64 + self.penalty(), correct as f64 / n as f64))
    }

    /// Runs the full training schedule. Deterministic given `hp.seed`: epoch
    /// shuffles and dropout masks come from dedicated streams of that seed.
    pub fn train(
        &mut self,
        train_ds: &PrefixDataset,
        val_ds: &PrefixDataset,
    ) -> Result<TrainHistory> {
        self.check_dataset(train_ds, "training")?;
        self.check_dataset(val_ds, "validation")?;

        let mut shuffle_rng = rng_from_seed(derive_seed(self.hp.seed, Phase::Train, 0));
        let mut dropout_rng = rng_from_seed(derive_seed(self.hp.seed, Phase::Train, 1));
        let n = train_ds.len();
        let mut order: Vec<usize> = (0..n).collect();

        let mut epochs = Vec::new();
        let mut best_acc = f64::NEG_INFINITY;
        let mut best_epoch = 0usize;
        let mut best_tensors: Option<Vec<Array2<f64>>> = None;
        let mut plateau = 0usize;
        let mut stall = 0usize;
        let mut stopped_early = false;

        for epoch in 1..=self.hp.max_epochs {
            let lr_in_effect = self.lr;
            order.shuffle(&mut shuffle_rng);
            let mut loss_sum = 0.0;
            let mut correct = 0usize;
            for chunk in order.chunks(self.hp.batch_size) {
                let (codes, targets) = gather_batch(train_ds, chunk);
                let rng = (self.hp.dropout > 0.0).then_some(&mut dropout_rng);
                let (loss, hits, grads) = self.loss_and_grads(&codes.view(), &targets, rng)?;
                if !loss.is_finite() {
                    return Err(Error::NonFiniteLoss { epoch });
                }
                loss_sum += loss * chunk.len() as f64;
                correct += hits;
                self.adam_step(&grads);
            }
            let (val_loss, val_acc) = self.evaluate(val_ds)?;
            if !val_loss.is_finite() {
                return Err(Error::NonFiniteLoss { epoch });
            }
            epochs.push(EpochStats {
                epoch,
                train_loss: loss_sum / n as f64,
                train_acc: correct as f64 / n as f64,
                val_loss,
                val_acc,
                lr: lr_in_effect,
            });

            if val_acc > best_acc {
                best_acc = val_acc;
                best_epoch = epoch;
                best_tensors = Some(self.tensors.clone());
                plateau = 0;
                stall = 0;
            } else {
                plateau += 1;
                stall += 1;
                if plateau == self.hp.lr_patience {
                    self.lr *= self.hp.lr_decay_factor;
                    plateau = 0;
                }
                if stall >= self.hp.stop_patience {
                    stopped_early = true;
                    break;
                }
            }
        }
        if self.hp.restore_best {
            if let Some(best) = best_tensors {
                self.tensors = best;
            }
        }
        Ok(TrainHistory {
            epochs,
            best_epoch,
            best_val_acc: best_acc,
            stopped_early,
        })
    }

    fn check_dataset(&self, ds: &PrefixDataset, role: &str) -> Result<()> {
        if ds.is_empty() {
            return Err(Error::InvalidConfig(format!("{role} dataset is empty")));
        }
        if ds.vocabulary() != &self.vocab {
            return Err(Error::VocabMismatch(format!(
                "{role} dataset vocabulary differs from the model's"
            )));
        }
        if ds.prefix_len() != self.hp.prefix_len {
            return Err(Error::InvalidConfig(format!(
                "{role} dataset window width {} does not match prefix_len {}",
                ds.prefix_len(),
                self.hp.prefix_len
            )));
        }
        Ok(())
    }
}
