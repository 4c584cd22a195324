//! Autoregressive generation of event logs from a trained sequence model.
//!
//! Each trace starts from a window holding only the begin token, repeatedly
//! samples the next activity from the model's full predicted distribution
//! (temperature 1 — no argmax, no truncation), and stops at the end token or
//! a length cap. Traces draw from their own seeded streams, so output is
//! identical regardless of how generation is batched or scheduled.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::log::{EventLog, Trace, Vocabulary, PAD_CODE};
use crate::lstm::SequenceModel;
use crate::rng::{derive_seed, rng_from_seed, sample_weighted, Phase};

/// How many traces advance in lockstep per forward pass.
const CHUNK: usize = 2048;

/// Bound on consecutive end-token draws for a still-empty trace before the
/// run is declared degenerate.
const MAX_EMPTY_REDRAWS: usize = 256;

/// Sizing and seeding for one generation run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    /// Number of traces to generate.
    pub n_traces: usize,
    /// Hard cap on activities per trace; traces that hit it are kept.
    pub max_len: usize,
    /// Master seed; trace `i` draws from a stream derived from `(seed, i)`.
    pub seed: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_traces == 0 {
            return Err(Error::InvalidConfig("n_traces must be positive".into()));
        }
        if self.max_len == 0 {
            return Err(Error::InvalidConfig("max_len must be positive".into()));
        }
        Ok(())
    }
}

/// Default generation cap: twice the longest trace of the training log.
pub fn default_max_len(training_log: &EventLog) -> usize {
    training_log
        .entries()
        .iter()
        .map(|e| e.activities.len())
        .max()
        .unwrap_or(0)
        .saturating_mul(2)
        .max(1)
}

/// Samples `cfg.n_traces` traces from the model. `vocab` must be the
/// vocabulary the model was trained with; case ids are `sim-<index>`.
pub fn simulate_log(
    model: &SequenceModel,
    vocab: &Vocabulary,
    cfg: &SimConfig,
) -> Result<EventLog> {
    simulate_chunked(model, vocab, cfg, CHUNK)
}

/// [`simulate_log`] with an explicit lockstep width. Output is independent
/// of `chunk`; the public wrapper fixes it for cache-friendly batching.
pub(crate) fn simulate_chunked(
    model: &SequenceModel,
    vocab: &Vocabulary,
    cfg: &SimConfig,
    chunk: usize,
) -> Result<EventLog> {
    cfg.validate()?;
    if model.vocabulary().labels() != vocab.labels() {
        return Err(Error::VocabMismatch(format!(
            "model was trained on {} activities, caller supplied {}",
            model.vocabulary().n_activities(),
            vocab.n_activities()
        )));
    }
    let prefix_len = model.hyperparams().prefix_len;
    let eos = vocab.eos_target();

    let mut traces: Vec<Trace> = Vec::with_capacity(cfg.n_traces);
    for chunk_start in (0..cfg.n_traces).step_by(chunk.max(1)) {
        let width = chunk.max(1).min(cfg.n_traces - chunk_start);

        // One sliding window, RNG stream, and code buffer per trace.
        let mut windows = Array2::<u16>::from_elem((width, prefix_len), PAD_CODE);
        for mut row in windows.rows_mut() {
            row[prefix_len - 1] = vocab.bos_input();
        }
        let mut rngs: Vec<_> = (0..width)
            .map(|i| {
                rng_from_seed(derive_seed(
                    cfg.seed,
                    Phase::Simulate,
                    (chunk_start + i) as u64,
                ))
            })
            .collect();
        let mut codes: Vec<Vec<u16>> = vec![Vec::new(); width];
        let mut active: Vec<usize> = (0..width).collect();

        while !active.is_empty() {
            let batch = Array2::from_shape_fn((active.len(), prefix_len), |(r, c)| {
                windows[(active[r], c)]
            });
            let probs = model.predict_probs(&batch.view());

            let mut still_active = Vec::with_capacity(active.len());
            for (r, &t) in active.iter().enumerate() {
                let row = probs.row(r);
                let row = row.as_slice().expect("probability rows are contiguous");
                let mut drawn = sample_weighted(&mut rngs[t], row) as u16;

                // An end token before any activity would make an empty
                // trace; reject and redraw from the same distribution.
                let mut redraws = 0;
                while drawn == eos && codes[t].is_empty() {
                    redraws += 1;
                    if redraws > MAX_EMPTY_REDRAWS {
                        return Err(Error::InvalidConfig(format!(
                            "trace {} drew the end token {MAX_EMPTY_REDRAWS} \
                             times in a row from the begin-only window; the \
                             model terminates immediately",
                            chunk_start + t
                        )));
                    }
                    drawn = sample_weighted(&mut rngs[t], row) as u16;
                }
                if drawn == eos {
                    continue; // trace complete, drops out of the batch
                }

                codes[t].push(drawn);
                if codes[t].len() == cfg.max_len {
                    continue; // cap hit; trace is kept as-is
                }
                let row = windows.row_mut(t);
                let w = row.into_slice().expect("window rows are contiguous");
                w.copy_within(1.., 0);
                w[prefix_len - 1] = drawn; // activity input code == target code
                still_active.push(t);
            }
            active = still_active;
        }

        traces.extend(codes.into_iter().map(|cs| {
            cs.into_iter()
                .map(|c| vocab.activities()[c as usize].clone())
                .collect::<Trace>()
        }));
    }
    EventLog::from_traces(traces, "sim")
}
