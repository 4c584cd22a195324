//! Parameter storage for [`SequenceModel`]: a flat list of matrices described
//! by a schema, plus initialization and the checkpoint format.
//!
//! Schema order (also the checkpoint block order): for every layer, for every
//! direction (forward first), the input weights `w_x`, the recurrent weights
//! `w_h` and the bias `b`; then the dense head weights and bias. Gate columns
//! inside every `4 * hidden` block are packed `[input | forget | cell |
//! output]`.

use std::io::{BufReader, BufWriter, Read as _, Write as _};
use std::path::Path;

use ndarray::Array2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::log::{Activity, Vocabulary};
use crate::rng::{derive_seed, rng_from_seed, Phase};

use super::HyperParams;

/// How a tensor is initialized and whether regularization sees it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(super) enum TensorKind {
    /// Dense or gate weights: fan-in-scaled uniform init, regularized.
    Weight,
    /// LSTM bias: zeros with the forget-gate block at 1, never regularized.
    LstmBias,
    /// Dense head bias: zeros, never regularized.
    DenseBias,
}

/// Shape and role of one parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub(super) struct TensorSpec {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub kind: TensorKind,
}

impl TensorSpec {
    fn len(&self) -> usize {
        self.rows * self.cols
    }
}

/// Builds the schema for a given architecture over `n_inputs` input codes and
/// `n_targets` output classes.
pub(super) fn build_schema(hp: &HyperParams, n_inputs: usize, n_targets: usize) -> Vec<TensorSpec> {
    let h = hp.hidden_size;
    let dirs = hp.n_dirs();
    let mut schema = Vec::with_capacity(hp.num_layers * dirs * 3 + 2);
    for layer in 0..hp.num_layers {
        let in_width = if layer == 0 { n_inputs } else { h * dirs };
        for dir in 0..dirs {
            let tag = if dirs == 2 {
                if dir == 0 {
                    "fwd"
                } else {
                    "bwd"
                }
            } else {
                "fwd"
            };
            schema.push(TensorSpec {
                name: format!("layer{layer}.{tag}.w_x"),
                rows: in_width,
                cols: 4 * h,
                kind: TensorKind::Weight,
            });
            schema.push(TensorSpec {
                name: format!("layer{layer}.{tag}.w_h"),
                rows: h,
                cols: 4 * h,
                kind: TensorKind::Weight,
            });
            schema.push(TensorSpec {
                name: format!("layer{layer}.{tag}.b"),
                rows: 1,
                cols: 4 * h,
                kind: TensorKind::LstmBias,
            });
        }
    }
    schema.push(TensorSpec {
        name: "dense.w".into(),
        rows: h * dirs,
        cols: n_targets,
        kind: TensorKind::Weight,
    });
    schema.push(TensorSpec {
        name: "dense.b".into(),
        rows: 1,
        cols: n_targets,
        kind: TensorKind::DenseBias,
    });
    schema
}

/// Gradient tensors, index-parallel to a model's parameter tensors.
#[derive(Debug, Clone)]
pub struct Gradients(pub(super) Vec<Array2<f64>>);

impl Gradients {
    pub(super) fn zeros_like(schema: &[TensorSpec]) -> Self {
        Gradients(
            schema
                .iter()
                .map(|s| Array2::zeros((s.rows, s.cols)))
                .collect(),
        )
    }
}

/// Adam accumulators.
#[derive(Debug, Clone)]
pub(super) struct AdamState {
    pub m: Vec<Array2<f64>>,
    pub v: Vec<Array2<f64>>,
    /// Update steps taken so far (drives bias correction).
    pub t: u64,
}

/// A trainable next-activity model bound to one vocabulary.
#[derive(Debug, Clone)]
pub struct SequenceModel {
    pub(super) hp: HyperParams,
    pub(super) vocab: Vocabulary,
    pub(super) schema: Vec<TensorSpec>,
    pub(super) tensors: Vec<Array2<f64>>,
    pub(super) opt: AdamState,
    pub(super) lr: f64,
}

impl SequenceModel {
    /// Initializes a model: weights uniform in `±1/sqrt(fan_in)` (fan-in =
    /// rows of the matrix), biases zero except the forget-gate block of every
    /// LSTM bias, which starts at 1 to keep early memory open. All draws come
    /// from the init stream of `hp.seed`, in schema order, row-major.
    pub fn init(hp: &HyperParams, vocab: &Vocabulary) -> Result<Self> {
        hp.validate()?;
        if vocab.n_activities() == 0 {
            return Err(Error::InvalidConfig(
                "vocabulary has no activities to model".into(),
            ));
        }
        let schema = build_schema(hp, vocab.n_inputs(), vocab.n_targets());
        let mut rng = rng_from_seed(derive_seed(hp.seed, Phase::Init, 0));
        let h = hp.hidden_size;
        let tensors: Vec<Array2<f64>> = schema
            .iter()
            .map(|spec| match spec.kind {
                TensorKind::Weight => {
                    let bound = 1.0 / (spec.rows as f64).sqrt();
                    let mut t = Array2::zeros((spec.rows, spec.cols));
                    for x in t.iter_mut() {
                        *x = rng.gen_range(-bound..bound);
                    }
                    t
                }
                TensorKind::LstmBias => {
                    let mut t = Array2::zeros((spec.rows, spec.cols));
                    t.slice_mut(ndarray::s![.., h..2 * h]).fill(1.0);
                    t
                }
                TensorKind::DenseBias => Array2::zeros((spec.rows, spec.cols)),
            })
            .collect();
        let opt = AdamState {
            m: schema.iter().map(|s| Array2::zeros((s.rows, s.cols))).collect(),
            v: schema.iter().map(|s| Array2::zeros((s.rows, s.cols))).collect(),
            t: 0,
        };
        Ok(SequenceModel {
            hp: hp.clone(),
            vocab: vocab.clone(),
            schema,
            tensors,
            opt,
            lr: hp.learning_rate_init,
        })
    }

    pub fn hyperparams(&self) -> &HyperParams {
        &self.hp
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    /// Learning rate the next update step would use.
    pub fn current_lr(&self) -> f64 {
        self.lr
    }

    /// Total number of scalar parameters.
    pub fn param_count(&self) -> usize {
        self.schema.iter().map(TensorSpec::len).sum()
    }

    /// Scalar parameters in LSTM layers only (excludes the dense head).
    pub fn recurrent_param_count(&self) -> usize {
        self.schema
            .iter()
            .filter(|s| s.name.starts_with("layer"))
            .map(TensorSpec::len)
            .sum()
    }

    /// The parameter tensor with the given schema name (see module docs).
    pub fn tensor(&self, name: &str) -> Option<&Array2<f64>> {
        let idx = self.schema.iter().position(|s| s.name == name)?;
        Some(&self.tensors[idx])
    }

    /// Visits every tensor mutably; lets tests hand-build models with exact
    /// output distributions.
    #[cfg(test)]
    pub(crate) fn for_each_tensor_mut(&mut self, mut f: impl FnMut(&str, &mut Array2<f64>)) {
        for (spec, tensor) in self.schema.iter().zip(&mut self.tensors) {
            f(&spec.name, tensor);
        }
    }

    /// Tensor indices of the lstm block `(w_x, w_h, b)` for a layer/direction.
    pub(super) fn lstm_block(&self, layer: usize, dir: usize) -> (usize, usize, usize) {
        let base = (layer * self.hp.n_dirs() + dir) * 3;
        (base, base + 1, base + 2)
    }

    /// Tensor indices of the dense head `(w, b)`.
    pub(super) fn dense_block(&self) -> (usize, usize) {
        let base = self.hp.num_layers * self.hp.n_dirs() * 3;
        (base, base + 1)
    }

    /// The penalty term `l1 * sum|w| + l2 * sum(w^2)` over all weight
    /// matrices (biases exempt).
    pub fn penalty(&self) -> f64 {
        if self.hp.l1 == 0.0 && self.hp.l2 == 0.0 {
            return 0.0;
        }
        let mut abs_sum = 0.0;
        let mut sq_sum = 0.0;
        for (spec, t) in self.schema.iter().zip(&self.tensors) {
            if spec.kind == TensorKind::Weight {
                for &x in t.iter() {
                    abs_sum += x.abs();
                    sq_sum += x * x;
                }
            }
        }
        self.hp.l1 * abs_sum + self.hp.l2 * sq_sum
    }

    /// Adds the penalty's gradient (`l1 * sign(w) + 2 * l2 * w` on weight
    /// matrices) onto `grads`.
    pub(super) fn add_penalty_grads(&self, grads: &mut Gradients) {
        if self.hp.l1 == 0.0 && self.hp.l2 == 0.0 {
            return;
        }
        let (l1, l2) = (self.hp.l1, self.hp.l2);
        for ((spec, t), g) in self.schema.iter().zip(&self.tensors).zip(&mut grads.0) {
            if spec.kind == TensorKind::Weight {
                ndarray::Zip::from(g).and(t).for_each(|g, &w| {
                    *g += l1 * w.signum() + 2.0 * l2 * w;
                });
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

/// File magic of model checkpoints; the trailing digit is the format version.
const CHECKPOINT_MAGIC: &[u8; 8] = b"PMSLSEQ1";

/// JSON header stored after the magic.
#[derive(Serialize, Deserialize)]
struct CheckpointHeader {
    hp: HyperParams,
    /// Model activities in index order (BOS/EOS are implicit).
    activities: Vec<String>,
    lr: f64,
    adam_t: u64,
}

impl SequenceModel {
    /// Writes a checkpoint: magic, little-endian u64 header length, JSON
    /// header (hyperparameters + activity labels + learning-rate state), then
    /// every parameter tensor in schema order as row-major little-endian f64.
    /// Adam moments are not persisted; a loaded model predicts but restarts
    /// optimization from scratch if trained further.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let header = CheckpointHeader {
            hp: self.hp.clone(),
            activities: self
                .vocab
                .activities()
                .iter()
                .map(|a| a.as_str().to_owned())
                .collect(),
            lr: self.lr,
            adam_t: self.opt.t,
        };
        let header_bytes = serde_json::to_vec(&header)?;
        let io = |e| Error::io(path, e);
        w.write_all(CHECKPOINT_MAGIC).map_err(io)?;
        w.write_all(&(header_bytes.len() as u64).to_le_bytes()).map_err(io)?;
        w.write_all(&header_bytes).map_err(io)?;
        for t in &self.tensors {
            for &x in t.iter() {
                w.write_all(&x.to_le_bytes()).map_err(io)?;
            }
        }
        w.flush().map_err(io)
    }

    /// Loads a checkpoint written by [`SequenceModel::save`], validating the
    /// magic, the header and every tensor length.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut r = BufReader::new(file);

        let mut magic = [0u8; 8];
        read_exact(&mut r, &mut magic, "file magic")?;
        if &magic != CHECKPOINT_MAGIC {
            return Err(Error::Checkpoint(format!(
                "bad magic {:?} (expected {:?})",
                String::from_utf8_lossy(&magic),
                String::from_utf8_lossy(CHECKPOINT_MAGIC),
            )));
        }
        let mut len_bytes = [0u8; 8];
        read_exact(&mut r, &mut len_bytes, "header length")?;
        let header_len = u64::from_le_bytes(len_bytes) as usize;
        if header_len > 1 << 20 {
            return Err(Error::Checkpoint(format!(
                "header length {header_len} is implausibly large"
            )));
        }
        let mut header_bytes = vec![0u8; header_len];
        read_exact(&mut r, &mut header_bytes, "header")?;
        let header: CheckpointHeader = serde_json::from_slice(&header_bytes)
            .map_err(|e| Error::Checkpoint(format!("header does not parse: {e}")))?;
        header
            .hp
            .validate()
            .map_err(|e| Error::Checkpoint(format!("stored hyperparameters invalid: {e}")))?;

        let vocab = Vocabulary::from_activities(header.activities.iter().map(Activity::new))
            .map_err(|e| Error::Checkpoint(format!("stored vocabulary invalid: {e}")))?;
        if vocab.n_activities() != header.activities.len() {
            return Err(Error::Checkpoint(
                "stored vocabulary contains duplicate or reordered labels".into(),
            ));
        }
        let mut model = SequenceModel::init(&header.hp, &vocab)?;
        for (spec, tensor) in model.schema.iter().zip(&mut model.tensors) {
            let mut buf = vec![0u8; spec.len() * 8];
            read_exact(&mut r, &mut buf, &spec.name)?;
            for (x, chunk) in tensor.iter_mut().zip(buf.chunks_exact(8)) {
                *x = f64::from_le_bytes(chunk.try_into().expect("8-byte chunk"));
                if !x.is_finite() {
                    return Err(Error::Checkpoint(format!(
                        "tensor {} contains a non-finite value",
                        spec.name
                    )));
                }
            }
        }
        let mut trailer = [0u8; 1];
        if r.read(&mut trailer).map_err(|e| Error::io(path, e))? != 0 {
            return Err(Error::Checkpoint("trailing bytes after last tensor".into()));
        }
        model.lr = header.lr;
        model.opt.t = header.adam_t;
        Ok(model)
    }
}

/// `read_exact` with checkpoint-flavored error reporting.
fn read_exact(r: &mut impl std::io::Read, buf: &mut [u8], what: &str) -> Result<()> {
    r.read_exact(buf)
        .map_err(|e| Error::Checkpoint(format!("truncated while reading {what}: {e}")))
}
