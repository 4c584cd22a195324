//! Variant-level cross-validation: deals the distinct control-flow variants
//! of a log into folds, then splits the log so that every occurrence of a
//! test variant lands in the test log.
//!
//! With `k` equal to the number of variants this is leave-one-variant-out
//! cross-validation; smaller `k` gives classic k-fold plans over variants.

use std::collections::BTreeSet;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::log::{format_variant, EventLog, Trace, VariantTable};
use crate::rng::rng_from_seed;

/// A complete dealing of all variants into disjoint test sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    /// `folds[i]` is the set of variants held out by fold `i`.
    pub folds: Vec<Vec<Trace>>,
}

impl FoldPlan {
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

/// One training/test split of a log.
#[derive(Debug)]
pub struct SplitResult {
    pub training_log: EventLog,
    pub test_log: EventLog,
}

/// Shuffles the variants by `seed` and deals them into `k` folds of
/// ⌊n/k⌋; each of the `n mod k` remainder variants is appended to a distinct
/// fold chosen uniformly at random without replacement.
pub fn make_folds(variants: &VariantTable, k: usize, seed: u64) -> Result<FoldPlan> {
    let n = variants.len();
    if k < 2 || k > n {
        return Err(Error::InvalidFoldCount { k, variants: n });
    }
    let mut rng = rng_from_seed(seed);
    let mut vs: Vec<Trace> = variants.variants().cloned().collect();
    vs.shuffle(&mut rng);

    let base = n / k;
    let remainder = n % k;
    let mut folds: Vec<Vec<Trace>> = vs[..k * base].chunks(base).map(<[Trace]>::to_vec).collect();

    // Partial Fisher–Yates: the first `remainder` entries of `targets` are a
    // uniform draw of distinct fold indices.
    let mut targets: Vec<usize> = (0..k).collect();
    for j in 0..remainder {
        let pick = rng.gen_range(j..k);
        targets.swap(j, pick);
    }
    for (extra, &fold) in vs[k * base..].iter().zip(targets.iter()) {
        folds[fold].push(extra.clone());
    }
    Ok(FoldPlan { k, seed, folds })
}

/// Splits `log` into a training log (everything else) and a test log (all
/// occurrences of the given variants). Case ids and relative order survive.
pub fn split_log(log: &EventLog, test_variants: &BTreeSet<Trace>) -> Result<SplitResult> {
    if test_variants.is_empty() {
        return Err(Error::EmptyInput("test variant set"));
    }
    let log_variants: BTreeSet<&Trace> = log.traces().collect();
    for v in test_variants {
        if !log_variants.contains(v) {
            return Err(Error::UnknownTestVariant(format_variant(v)));
        }
    }
    if test_variants.len() == log_variants.len() {
        return Err(Error::TestCoversAllVariants);
    }
    let mut training = Vec::new();
    let mut test = Vec::new();
    for entry in log.entries() {
        if test_variants.contains(&entry.activities) {
            test.push(entry.clone());
        } else {
            training.push(entry.clone());
        }
    }
    Ok(SplitResult {
        training_log: EventLog::from_entries(training)?,
        test_log: EventLog::from_entries(test)?,
    })
}
