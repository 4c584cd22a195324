//! Batched forward pass.
//!
//! Inputs arrive as a `batch x window` matrix of input codes ([`PAD_CODE`]
//! rows contribute nothing — the one-hot of padding is the zero vector, so
//! there is no masking, the cell simply sees zero input). Each direction of
//! each layer runs a standard LSTM sweep (forward direction left-to-right,
//! backward direction right-to-left); per-slot outputs of both directions are
//! concatenated to feed the next layer, and the dense head reads the
//! concatenation of each direction's final state.
//!
//! During training, inverted dropout is applied to LSTM layer outputs: to the
//! per-slot sequence handed to the next layer and to the final representation
//! handed to the dense head. Mask draw order is fixed (layer boundaries in
//! order, slots ascending, entries row-major, then the head mask), keeping
//! training trajectories reproducible.

use ndarray::linalg::general_mat_mul;
use ndarray::{s, Array2, ArrayView2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::log::PAD_CODE;

use super::model::SequenceModel;

/// What a layer reads: the code matrix (layer 0) or the previous layer's
/// per-slot output rows.
pub(super) enum LayerInput<'a> {
    OneHot(ArrayView2<'a, u16>),
    Dense(&'a [Array2<f64>]),
}

impl LayerInput<'_> {
    /// Adds the input contribution of `slot` to the pre-activation `z`.
    fn add_into(&self, slot: usize, w_x: &Array2<f64>, z: &mut Array2<f64>) {
        match self {
            LayerInput::OneHot(codes) => {
                for (b, code) in codes.column(slot).iter().enumerate() {
                    if *code != PAD_CODE {
                        let row = w_x.row(*code as usize);
                        let mut out = z.row_mut(b);
                        out += &row;
                    }
                }
            }
            LayerInput::Dense(seq) => {
                general_mat_mul(1.0, &seq[slot], w_x, 1.0, z);
            }
        }
    }
}

/// One direction's sweep over a batch.
pub(super) struct DirRun {
    /// Hidden state per slot (empty unless slots were stored).
    pub h_slots: Vec<Array2<f64>>,
    /// State after the direction's last processed step — slot `T-1` for the
    /// forward direction, slot `0` for the backward one.
    pub h_last: Array2<f64>,
    /// Activated gates `[input | forget | cell | output]` per slot (training only).
    pub gates: Vec<Array2<f64>>,
    /// Cell state per slot (training only).
    pub c: Vec<Array2<f64>>,
    /// `tanh` of the cell state per slot (training only).
    pub tc: Vec<Array2<f64>>,
}

/// Everything the backward pass needs to replay one batch.
pub(super) struct Cache {
    /// Per layer, per direction.
    pub dir_runs: Vec<Vec<DirRun>>,
    /// Post-dropout input sequences of layers `1..` (index `l - 1`).
    pub layer_inputs: Vec<Vec<Array2<f64>>>,
    /// Dropout masks between layers (`None` entries: dropout inactive).
    pub inter_masks: Vec<Option<Vec<Array2<f64>>>>,
    /// Post-dropout input of the dense head.
    pub rep: Array2<f64>,
    /// Dropout mask on the head input, when active.
    pub rep_mask: Option<Array2<f64>>,
}

pub(super) struct ForwardPass {
    pub probs: Array2<f64>,
    pub cache: Option<Cache>,
}

/// Numerically stable in-place row softmax.
pub(super) fn softmax_rows(logits: &mut Array2<f64>) {
    for mut row in logits.rows_mut() {
        let r = row.as_slice_mut().expect("standard layout row");
        let max = r.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for x in r.iter_mut() {
            *x = (*x - max).exp();
            sum += *x;
        }
        for x in r.iter_mut() {
            *x /= sum;
        }
    }
}

/// Applies the LSTM cell to pre-activations `z` (overwritten with the
/// activated gates) and writes the new cell/hidden state.
fn activate_cell(
    z: &mut Array2<f64>,
    c_prev: &Array2<f64>,
    c_new: &mut Array2<f64>,
    tc_new: &mut Array2<f64>,
    h_new: &mut Array2<f64>,
    hidden: usize,
) {
    fn sigmoid(x: f64) -> f64 {
        1.0 / (1.0 + (-x).exp())
    }
    let bsz = z.nrows();
    let zs = z.as_slice_mut().expect("standard layout");
    let cp = c_prev.as_slice().expect("standard layout");
    let cn = c_new.as_slice_mut().expect("standard layout");
    let tn = tc_new.as_slice_mut().expect("standard layout");
    let hn = h_new.as_slice_mut().expect("standard layout");
    for b in 0..bsz {
        let zr = &mut zs[b * 4 * hidden..(b + 1) * 4 * hidden];
        let off = b * hidden;
        for k in 0..hidden {
            let i = sigmoid(zr[k]);
            let f = sigmoid(zr[hidden + k]);
            let g = zr[2 * hidden + k].tanh();
            let o = sigmoid(zr[3 * hidden + k]);
            zr[k] = i;
            zr[hidden + k] = f;
            zr[2 * hidden + k] = g;
            zr[3 * hidden + k] = o;
            let c = f * cp[off + k] + i * g;
            let tc = c.tanh();
            cn[off + k] = c;
            tn[off + k] = tc;
            hn[off + k] = o * tc;
        }
    }
}

/// Runs one direction of one layer over the whole batch.
#[allow(clippy::too_many_arguments)]
fn run_direction(
    w_x: &Array2<f64>,
    w_h: &Array2<f64>,
    bias: &Array2<f64>,
    input: &LayerInput<'_>,
    t_len: usize,
    bsz: usize,
    hidden: usize,
    reverse: bool,
    store_slots: bool,
    train: bool,
) -> DirRun {
    let empty = || vec![Array2::zeros((0, 0)); if train { t_len } else { 0 }];
    let mut run = DirRun {
        h_slots: if store_slots {
            vec![Array2::zeros((0, 0)); t_len]
        } else {
            Vec::new()
        },
        h_last: Array2::zeros((bsz, hidden)),
        gates: empty(),
        c: empty(),
        tc: empty(),
    };
    let mut h_prev = Array2::zeros((bsz, hidden));
    let mut c_prev = Array2::zeros((bsz, hidden));
    for k in 0..t_len {
        let slot = if reverse { t_len - 1 - k } else { k };
        let mut z = bias
            .broadcast((bsz, 4 * hidden))
            .expect("bias broadcast")
            .to_owned();
        input.add_into(slot, w_x, &mut z);
        general_mat_mul(1.0, &h_prev, w_h, 1.0, &mut z);
        let mut c_new = Array2::zeros((bsz, hidden));
        let mut tc_new = Array2::zeros((bsz, hidden));
        let mut h_new = Array2::zeros((bsz, hidden));
        activate_cell(&mut z, &c_prev, &mut c_new, &mut tc_new, &mut h_new, hidden);
        if train {
            run.gates[slot] = z;
            run.tc[slot] = tc_new;
        }
        if store_slots {
            run.h_slots[slot] = h_new.clone();
        }
        if k + 1 == t_len {
            run.h_last = h_new.clone();
        }
        h_prev = h_new;
        if train {
            c_prev = c_new.clone();
            run.c[slot] = c_new;
        } else {
            c_prev = c_new;
        }
    }
    run
}

/// Draws an inverted-dropout mask: entries are `0` with probability `p`,
/// otherwise `1 / (1 - p)`.
fn sample_mask(rng: &mut ChaCha8Rng, p: f64, rows: usize, cols: usize) -> Array2<f64> {
    let keep_scale = 1.0 / (1.0 - p);
    let mut mask = Array2::zeros((rows, cols));
    for x in mask.iter_mut() {
        *x = if rng.gen::<f64>() < p { 0.0 } else { keep_scale };
    }
    mask
}

impl SequenceModel {
    /// Full forward pass over a code matrix. `train` enables dropout (when
    /// `hp.dropout > 0`, which then requires `dropout_rng`) and retains the
    /// caches the backward pass replays.
    pub(super) fn forward_pass(
        &self,
        codes: &ArrayView2<'_, u16>,
        train: bool,
        mut dropout_rng: Option<&mut ChaCha8Rng>,
    ) -> ForwardPass {
        let (bsz, t_len) = codes.dim();
        debug_assert!(bsz > 0 && t_len > 0, "empty batch");
        debug_assert!(
            codes
                .iter()
                .all(|&c| c == PAD_CODE || (c as usize) < self.vocab.n_inputs()),
            "input code out of vocabulary range"
        );
        let hidden = self.hp.hidden_size;
        let dirs = self.hp.n_dirs();
        let layers = self.hp.num_layers;
        let dropout_active = train && self.hp.dropout > 0.0;
        if dropout_active {
            assert!(dropout_rng.is_some(), "dropout requires an RNG");
        }

        let mut dir_runs: Vec<Vec<DirRun>> = Vec::with_capacity(layers);
        let mut layer_inputs: Vec<Vec<Array2<f64>>> = Vec::new();
        let mut inter_masks: Vec<Option<Vec<Array2<f64>>>> = Vec::new();
        for layer in 0..layers {
            let input = if layer == 0 {
                LayerInput::OneHot(codes.view())
            } else {
                LayerInput::Dense(&layer_inputs[layer - 1])
            };
            let store_slots = train || layer + 1 < layers;
            let mut runs = Vec::with_capacity(dirs);
            for dir in 0..dirs {
                let (ix, hx, bx) = self.lstm_block(layer, dir);
                runs.push(run_direction(
                    &self.tensors[ix],
                    &self.tensors[hx],
                    &self.tensors[bx],
                    &input,
                    t_len,
                    bsz,
                    hidden,
                    dir == 1,
                    store_slots,
                    train,
                ));
            }
            if layer + 1 < layers {
                // Concatenate directions per slot and apply inter-layer dropout.
                let mut seq: Vec<Array2<f64>> = (0..t_len)
                    .map(|t| {
                        let mut out = Array2::zeros((bsz, hidden * dirs));
                        for (d, run) in runs.iter().enumerate() {
                            out.slice_mut(s![.., d * hidden..(d + 1) * hidden])
                                .assign(&run.h_slots[t]);
                        }
                        out
                    })
                    .collect();
                if dropout_active {
                    let rng = dropout_rng.as_deref_mut().expect("dropout RNG");
                    let masks: Vec<Array2<f64>> = (0..t_len)
                        .map(|_| sample_mask(rng, self.hp.dropout, bsz, hidden * dirs))
                        .collect();
                    for (row, mask) in seq.iter_mut().zip(&masks) {
                        *row *= mask;
                    }
                    inter_masks.push(Some(masks));
                } else {
                    inter_masks.push(None);
                }
                layer_inputs.push(seq);
            }
            dir_runs.push(runs);
        }

        // Final representation: each direction's last processed state.
        let mut rep = Array2::zeros((bsz, hidden * dirs));
        for (d, run) in dir_runs[layers - 1].iter().enumerate() {
            rep.slice_mut(s![.., d * hidden..(d + 1) * hidden])
                .assign(&run.h_last);
        }
        let mut rep_mask = None;
        if dropout_active {
            let rng = dropout_rng.as_deref_mut().expect("dropout RNG");
            let mask = sample_mask(rng, self.hp.dropout, bsz, hidden * dirs);
            rep *= &mask;
            rep_mask = Some(mask);
        }

        let (wi, bi) = self.dense_block();
        let mut logits = self.tensors[bi]
            .broadcast((bsz, self.vocab.n_targets()))
            .expect("bias broadcast")
            .to_owned();
        general_mat_mul(1.0, &rep, &self.tensors[wi], 1.0, &mut logits);
        softmax_rows(&mut logits);

        let cache = train.then_some(Cache {
            dir_runs,
            layer_inputs,
            inter_masks,
            rep,
            rep_mask,
        });
        ForwardPass {
            probs: logits,
            cache,
        }
    }

    /// Probability rows for a batch of code rows, dropout off.
    pub fn predict_probs(&self, codes: &ArrayView2<'_, u16>) -> Array2<f64> {
        self.forward_pass(codes, false, None).probs
    }

    /// Probability row for a single window, dropout off. The window must
    /// already be padded/truncated to `prefix_len`.
    pub fn predict_next(&self, window: &[u16]) -> Result<Vec<f64>> {
        if window.len() != self.hp.prefix_len {
            return Err(Error::InvalidConfig(format!(
                "window length {} does not match prefix_len {}",
                window.len(),
                self.hp.prefix_len
            )));
        }
        if let Some(&bad) = window
            .iter()
            .find(|&&c| c != PAD_CODE && c as usize >= self.vocab.n_inputs())
        {
            return Err(Error::InvalidConfig(format!(
                "input code {bad} is outside the vocabulary"
            )));
        }
        let codes =
            Array2::from_shape_vec((1, window.len()), window.to_vec()).expect("1-row matrix");
        let probs = self.predict_probs(&codes.view());
        Ok(probs.row(0).to_vec())
    }
}
