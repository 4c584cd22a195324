//! Loss and gradients: categorical cross-entropy plus weight penalties,
//! backpropagated through time.
//!
//! The backward sweep mirrors the forward one: the dense head's gradient is
//! split into per-direction injections at each direction's final processed
//! slot, every layer walks its steps in reverse processing order carrying
//! hidden/cell gradients, and (for stacked layers) the input gradients of a
//! layer become per-slot injections for the layer below after passing through
//! the inter-layer dropout mask.

use ndarray::linalg::general_mat_mul;
use ndarray::{s, Array2, ArrayView2, Axis};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::log::PAD_CODE;

use super::forward::{DirRun, LayerInput};
use super::model::{Gradients, SequenceModel};

impl SequenceModel {
    /// Computes the batch loss (mean cross-entropy over the rows plus the
    /// weight penalty) together with the number of argmax hits and the
    /// gradient of every parameter. `dropout_rng` drives this batch's dropout
    /// masks and is required when `hp.dropout > 0`.
    ///
    /// A non-finite loss is returned as-is; the training loop turns it into
    /// an abort with epoch context.
    pub fn loss_and_grads(
        &self,
        codes: &ArrayView2<'_, u16>,
        targets: &[u16],
        dropout_rng: Option<&mut ChaCha8Rng>,
    ) -> Result<(f64, usize, Gradients)> {
        let (bsz, t_len) = codes.dim();
        if targets.len() != bsz {
            return Err(Error::InvalidConfig(format!(
                "{} targets for a batch of {bsz} rows",
                targets.len()
            )));
        }
        let n_targets = self.vocab.n_targets();
        if let Some(&bad) = targets.iter().find(|&&y| y as usize >= n_targets) {
            return Err(Error::InvalidConfig(format!(
                "target index {bad} is outside the {n_targets}-label target space"
            )));
        }

        let pass = self.forward_pass(codes, true, dropout_rng);
        let cache = pass.cache.expect("training forward keeps its cache");
        let mut probs = pass.probs;

        // Cross-entropy and accuracy; then probs becomes dlogits in place.
        let mut ce = 0.0;
        let mut correct = 0;
        for (b, &y) in targets.iter().enumerate() {
            let row = probs.row(b);
            let r = row.as_slice().expect("standard layout row");
            ce -= r[y as usize].ln();
            let mut best = 0;
            for (j, &v) in r.iter().enumerate().skip(1) {
                if v > r[best] {
                    best = j;
                }
            }
            if best == y as usize {
                correct += 1;
            }
        }
        let loss = ce / bsz as f64 + self.penalty();

        let scale = 1.0 / bsz as f64;
        probs *= scale;
        for (b, &y) in targets.iter().enumerate() {
            probs[[b, y as usize]] -= scale;
        }
        let dlogits = probs;

        let mut grads = Gradients::zeros_like(&self.schema);
        let hidden = self.hp.hidden_size;
        let dirs = self.hp.n_dirs();
        let layers = self.hp.num_layers;
        let rep_width = hidden * dirs;

        // Dense head.
        let (wi, bi) = self.dense_block();
        general_mat_mul(1.0, &cache.rep.t(), &dlogits, 1.0, &mut grads.0[wi]);
        let db = dlogits.sum_axis(Axis(0));
        grads.0[bi].row_mut(0).assign(&db);
        let mut drep = Array2::zeros((bsz, rep_width));
        general_mat_mul(1.0, &dlogits, &self.tensors[wi].t(), 0.0, &mut drep);
        if let Some(mask) = &cache.rep_mask {
            drep *= mask;
        }

        // Gradient injections into the top layer: each direction's final
        // processed slot receives its share of the head gradient.
        let mut inject: Vec<Vec<Option<Array2<f64>>>> =
            (0..dirs).map(|_| vec![None; t_len]).collect();
        for (d, inj) in inject.iter_mut().enumerate() {
            let slot = if d == 0 { t_len - 1 } else { 0 };
            inj[slot] = Some(drep.slice(s![.., d * hidden..(d + 1) * hidden]).to_owned());
        }

        for layer in (0..layers).rev() {
            let input = if layer == 0 {
                LayerInput::OneHot(codes.view())
            } else {
                LayerInput::Dense(&cache.layer_inputs[layer - 1])
            };
            let mut dseq: Option<Vec<Array2<f64>>> = (layer > 0).then(|| {
                (0..t_len)
                    .map(|_| Array2::zeros((bsz, rep_width)))
                    .collect()
            });
            for (d, inj) in inject.iter().enumerate() {
                let (ix, _, _) = self.lstm_block(layer, d);
                let [d_wx, d_wh, d_b] = &mut grads.0[ix..ix + 3] else {
                    unreachable!("lstm blocks are three consecutive tensors");
                };
                backward_direction(
                    &self.tensors[ix],
                    &self.tensors[ix + 1],
                    &cache.dir_runs[layer][d],
                    &input,
                    inj,
                    d == 1,
                    hidden,
                    d_wx,
                    d_wh,
                    d_b,
                    dseq.as_mut(),
                );
            }
            if let Some(mut dseq) = dseq {
                if let Some(Some(masks)) = cache.inter_masks.get(layer - 1) {
                    for (dsq, mask) in dseq.iter_mut().zip(masks) {
                        *dsq *= mask;
                    }
                }
                inject = (0..dirs)
                    .map(|d| {
                        dseq.iter()
                            .map(|row| {
                                Some(row.slice(s![.., d * hidden..(d + 1) * hidden]).to_owned())
                            })
                            .collect()
                    })
                    .collect();
            }
        }

        self.add_penalty_grads(&mut grads);
        Ok((loss, correct, grads))
    }
}

/// Reverse sweep of one direction of one layer, accumulating its parameter
/// gradients and (for stacked layers) the gradient w.r.t. its input rows.
#[allow(clippy::too_many_arguments)]
fn backward_direction(
    w_x: &Array2<f64>,
    w_h: &Array2<f64>,
    run: &DirRun,
    input: &LayerInput<'_>,
    inject: &[Option<Array2<f64>>],
    reverse: bool,
    hidden: usize,
    d_wx: &mut Array2<f64>,
    d_wh: &mut Array2<f64>,
    d_b: &mut Array2<f64>,
    mut dseq: Option<&mut Vec<Array2<f64>>>,
) {
    let t_len = inject.len();
    let bsz = run.h_last.nrows();
    let zeros = Array2::zeros((bsz, hidden));
    let mut dh_carry: Array2<f64> = Array2::zeros((bsz, hidden));
    let mut dc_carry: Array2<f64> = Array2::zeros((bsz, hidden));
    let mut dz = Array2::zeros((bsz, 4 * hidden));

    for k in (0..t_len).rev() {
        let slot = if reverse { t_len - 1 - k } else { k };
        let (c_prev, h_prev) = if k == 0 {
            (&zeros, &zeros)
        } else {
            let prev_slot = if reverse { t_len - k } else { k - 1 };
            (&run.c[prev_slot], &run.h_slots[prev_slot])
        };
        if let Some(inj) = &inject[slot] {
            dh_carry += inj;
        }

        // Cell backward: fills dz (pre-activation gate gradients) and turns
        // dc_carry into the cell gradient for the previous step.
        {
            let g = run.gates[slot].as_slice().expect("standard layout");
            let tc = run.tc[slot].as_slice().expect("standard layout");
            let cp = c_prev.as_slice().expect("standard layout");
            let dh = dh_carry.as_slice().expect("standard layout");
            let dc = dc_carry.as_slice_mut().expect("standard layout");
            let dzs = dz.as_slice_mut().expect("standard layout");
            for b in 0..bsz {
                let zb = b * 4 * hidden;
                let off = b * hidden;
                for u in 0..hidden {
                    let i = g[zb + u];
                    let f = g[zb + hidden + u];
                    let gg = g[zb + 2 * hidden + u];
                    let o = g[zb + 3 * hidden + u];
                    let t = tc[off + u];
                    let dh_v = dh[off + u];
                    let dc_v = dc[off + u] + dh_v * o * (1.0 - t * t);
                    dzs[zb + u] = dc_v * gg * i * (1.0 - i);
                    dzs[zb + hidden + u] = dc_v * cp[off + u] * f * (1.0 - f);
                    dzs[zb + 2 * hidden + u] = dc_v * i * (1.0 - gg * gg);
                    dzs[zb + 3 * hidden + u] = dh_v * t * o * (1.0 - o);
                    dc[off + u] = dc_v * f;
                }
            }
        }

        let mut d_b_row = d_b.row_mut(0);
        d_b_row += &dz.sum_axis(Axis(0));
        general_mat_mul(1.0, &h_prev.t(), &dz, 1.0, d_wh);
        general_mat_mul(1.0, &dz, &w_h.t(), 0.0, &mut dh_carry);

        match input {
            LayerInput::OneHot(codes) => {
                for (b, code) in codes.column(slot).iter().enumerate() {
                    if *code != PAD_CODE {
                        let mut row = d_wx.row_mut(*code as usize);
                        row += &dz.row(b);
                    }
                }
            }
            LayerInput::Dense(seq) => {
                general_mat_mul(1.0, &seq[slot].t(), &dz, 1.0, d_wx);
                if let Some(ds) = dseq.as_deref_mut() {
                    general_mat_mul(1.0, &dz, &w_x.t(), 1.0, &mut ds[slot]);
                }
            }
        }
    }
}
