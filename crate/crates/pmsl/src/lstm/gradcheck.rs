//! Finite-difference validation of the analytic gradients.
//!
//! Every scalar parameter is perturbed by `±h` and the central difference of
//! the batch loss is compared against the backpropagated gradient. Dropout
//! must be zero (a stochastic mask cannot be differenced); everything else —
//! both directions, stacked layers, padding rows, the penalty terms — goes
//! through the exact production code path.

use ndarray::Array2;

use crate::log::{Activity, Vocabulary, PAD_CODE};

use super::model::SequenceModel;
use super::HyperParams;

/// Central-difference step.
const STEP: f64 = 1e-5;

/// Result of checking one architecture.
#[derive(Debug, Clone)]
pub struct GradCheckOutcome {
    /// Largest relative error over all parameters.
    pub max_rel_err: f64,
    /// Tensor holding the worst entry.
    pub worst_tensor: String,
    /// Scalar parameters compared.
    pub params_checked: usize,
}

/// Checks one architecture corner on a tiny fixed problem: 3 activities
/// (5 input codes including the start/end bookkeeping), hidden size 4,
/// window 3, a 2-row batch with one padded row. Relative error uses
/// `|a - n| / max(|a|, |n|, 1e-6)` so exact-zero gradients compare cleanly.
///
/// # Panics
/// Panics when called with `dropout > 0` semantics (the caller fixes dropout
/// to zero) or when the tiny model fails to build, which cannot happen for
/// valid inputs.
pub fn check_architecture(
    bidirectional: bool,
    num_layers: usize,
    l1l2: f64,
    seed: u64,
) -> GradCheckOutcome {
    let hp = HyperParams {
        bidirectional,
        num_layers,
        hidden_size: 4,
        l1: l1l2,
        l2: l1l2,
        dropout: 0.0,
        prefix_len: 3,
        seed,
        ..HyperParams::default()
    };
    let vocab = Vocabulary::from_activities(["t1", "t2", "t3"].map(Activity::new))
        .expect("tiny vocabulary");
    let mut model = SequenceModel::init(&hp, &vocab).expect("tiny model");

    let bos = vocab.bos_input();
    let codes = Array2::from_shape_vec(
        (2, 3),
        vec![
            PAD_CODE, bos, 0, // [PAD, BOS, t1]
            0, 1, 2, // [t1, t2, t3]
        ],
    )
    .expect("2x3 batch");
    let targets = vec![1u16, vocab.eos_target()];

    let (_, _, grads) = model
        .loss_and_grads(&codes.view(), &targets, None)
        .expect("analytic gradients");

    let mut outcome = GradCheckOutcome {
        max_rel_err: 0.0,
        worst_tensor: String::new(),
        params_checked: 0,
    };
    for k in 0..model.tensors.len() {
        let name = model.schema[k].name.clone();
        let len = model.tensors[k].len();
        for idx in 0..len {
            let orig = model.tensors[k].as_slice().expect("standard layout")[idx];
            let loss_at = |model: &mut SequenceModel, value: f64| {
                model.tensors[k].as_slice_mut().expect("standard layout")[idx] = value;
                let (loss, _, _) = model
                    .loss_and_grads(&codes.view(), &targets, None)
                    .expect("perturbed loss");
                loss
            };
            let plus = loss_at(&mut model, orig + STEP);
            let minus = loss_at(&mut model, orig - STEP);
            model.tensors[k].as_slice_mut().expect("standard layout")[idx] = orig;

            let numeric = (plus - minus) / (2.0 * STEP);
            let analytic = grads.0[k].as_slice().expect("standard layout")[idx];
            let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6);
            outcome.params_checked += 1;
            if rel > outcome.max_rel_err {
                outcome.max_rel_err = rel;
                outcome.worst_tensor = name.clone();
            }
        }
    }
    outcome
}
