//! Event-log core: activities, traces, logs, variant tables, vocabularies and
//! prefix datasets.
//!
//! An event log is a finite multiset of traces; a trace is a non-empty
//! sequence of activity labels. Everything downstream (play-out, training,
//! simulation, metrics) works purely on control flow, so this module carries
//! no timestamps or resources.
//!
//! Logs are stored on disk as JSON Lines — one object per trace:
//!
//! ```text
//! {"case_id": "c-0", "activities": ["a01", "a02", "a03"]}
//! ```
//!
//! Variant tables export to CSV as `variant;count` rows with the activities
//! of a variant joined by `|`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Label appended in front of every trace when building prefix datasets.
pub const BOS_LABEL: &str = "BOS";
/// Label marking trace completion; the final prediction target of a trace.
pub const EOS_LABEL: &str = "EOS";

/// Code used in [`PrefixDataset`] rows for padding positions. Padding has no
/// vocabulary index: it encodes as an all-zero input vector.
pub const PAD_CODE: u16 = u16::MAX;

// ---------------------------------------------------------------------------
// Activity and Trace
// ---------------------------------------------------------------------------

/// An activity label. Cheap to clone; compared, ordered and hashed by its
/// string value.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Activity(Arc<str>);

impl Activity {
    pub fn new(label: impl AsRef<str>) -> Self {
        Activity(Arc::from(label.as_ref()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Activity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Activity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", &*self.0)
    }
}

impl From<&str> for Activity {
    fn from(s: &str) -> Self {
        Activity::new(s)
    }
}

impl From<String> for Activity {
    fn from(s: String) -> Self {
        Activity(Arc::from(s))
    }
}

impl Serialize for Activity {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Activity {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        if s.is_empty() {
            return Err(D::Error::custom("activity label must not be empty"));
        }
        Ok(Activity::from(s))
    }
}

/// A control-flow variant / trace body: the sequence of activities of a case.
pub type Trace = Vec<Activity>;

/// Renders a trace in the compact `A|B|C` form used by variant CSVs and
/// error messages.
pub fn format_variant(trace: &[Activity]) -> String {
    trace
        .iter()
        .map(Activity::as_str)
        .collect::<Vec<_>>()
        .join("|")
}

// ---------------------------------------------------------------------------
// Vocabulary
// ---------------------------------------------------------------------------

/// Fixed activity universe of a log plus the BOS/EOS bookkeeping tokens.
///
/// Input side: one-hot vectors over `activities + BOS + EOS` (BOS opens every
/// prefix; EOS never appears in an input). Padding is virtual — an all-zero
/// row, consuming no index.
///
/// Target side: `activities + EOS` (a model never predicts BOS or padding).
/// Activity `i` keeps target index `i`; EOS gets the last target index.
#[derive(Clone, PartialEq, Eq)]
pub struct Vocabulary {
    /// Model activities sorted lexicographically, then BOS, then EOS.
    labels: Vec<Activity>,
    n_activities: usize,
    index: HashMap<Activity, u16>,
}

impl fmt::Debug for Vocabulary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Vocabulary")
            .field("n_activities", &self.n_activities)
            .field("labels", &self.labels)
            .finish()
    }
}

impl Vocabulary {
    /// Builds a vocabulary from the distinct activities of a log. Labels are
    /// deduplicated and sorted; the reserved BOS/EOS labels are appended.
    pub fn from_activities<I: IntoIterator<Item = Activity>>(activities: I) -> Result<Self> {
        let mut labels: Vec<Activity> = activities.into_iter().collect();
        labels.sort_unstable();
        labels.dedup();
        for label in &labels {
            if label.as_str() == BOS_LABEL || label.as_str() == EOS_LABEL {
                return Err(Error::ReservedLabel(label.as_str().to_owned()));
            }
        }
        let n_activities = labels.len();
        if n_activities + 2 > PAD_CODE as usize {
            return Err(Error::InvalidConfig(format!(
                "vocabulary too large: {n_activities} activities"
            )));
        }
        labels.push(Activity::new(BOS_LABEL));
        labels.push(Activity::new(EOS_LABEL));
        let index = labels
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), i as u16))
            .collect();
        Ok(Vocabulary {
            labels,
            n_activities,
            index,
        })
    }

    /// Number of model activities (excluding BOS/EOS).
    pub fn n_activities(&self) -> usize {
        self.n_activities
    }

    /// Width of input one-hot vectors: activities + BOS + EOS.
    pub fn n_inputs(&self) -> usize {
        self.labels.len()
    }

    /// Width of the prediction target space: activities + EOS.
    pub fn n_targets(&self) -> usize {
        self.n_activities + 1
    }

    /// Input index of the BOS token.
    pub fn bos_input(&self) -> u16 {
        self.n_activities as u16
    }

    /// Input index of the EOS token (present for completeness; EOS is never
    /// fed to a model).
    pub fn eos_input(&self) -> u16 {
        self.n_activities as u16 + 1
    }

    /// Target index standing for "the trace ends here".
    pub fn eos_target(&self) -> u16 {
        self.n_activities as u16
    }

    /// Input index of a label (activities and BOS/EOS all have one).
    pub fn input_index(&self, label: &Activity) -> Result<u16> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| Error::UnknownLabel(label.as_str().to_owned()))
    }

    /// Target index of a model activity.
    pub fn target_index(&self, label: &Activity) -> Result<u16> {
        match self.index.get(label) {
            Some(&i) if (i as usize) < self.n_activities => Ok(i),
            _ => Err(Error::UnknownLabel(label.as_str().to_owned())),
        }
    }

    /// The activity behind a target index, or `None` for the EOS target.
    pub fn activity_of_target(&self, target: u16) -> Option<&Activity> {
        if (target as usize) < self.n_activities {
            Some(&self.labels[target as usize])
        } else {
            None
        }
    }

    /// All labels in index order (activities, then BOS, then EOS).
    pub fn labels(&self) -> &[Activity] {
        &self.labels
    }

    /// Model activities in index order.
    pub fn activities(&self) -> &[Activity] {
        &self.labels[..self.n_activities]
    }

    /// One-hot encodes a label into a fresh `f64` row of width
    /// [`Self::n_inputs`]. Unknown labels are reported by name.
    pub fn one_hot(&self, label: &Activity) -> Result<Vec<f64>> {
        let mut row = vec![0.0; self.n_inputs()];
        row[self.input_index(label)? as usize] = 1.0;
        Ok(row)
    }

    /// Writes the one-hot encoding of an input code into `row` (zeroing it
    /// first). [`PAD_CODE`] yields the all-zero row.
    pub fn encode_into(&self, code: u16, row: &mut [f64]) {
        debug_assert_eq!(row.len(), self.n_inputs());
        row.fill(0.0);
        if code != PAD_CODE {
            row[code as usize] = 1.0;
        }
    }
}

// ---------------------------------------------------------------------------
// Event logs
// ---------------------------------------------------------------------------

/// One case of an event log: an identifier plus its trace.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LogEntry {
    pub case_id: String,
    pub activities: Trace,
}

impl LogEntry {
    pub fn new(case_id: impl Into<String>, activities: Trace) -> Self {
        Self {
            case_id: case_id.into(),
            activities,
        }
    }
}

/// A finite multiset of traces with the vocabulary they range over.
///
/// Entry order is preserved through round-trips, and case ids carry no
/// semantics beyond identity.
#[derive(Debug, Clone)]
pub struct EventLog {
    entries: Vec<LogEntry>,
    vocab: Vocabulary,
}

impl EventLog {
    /// Builds a log from entries, deriving the vocabulary from the traces.
    /// Empty logs and empty traces are rejected.
    pub fn from_entries(entries: Vec<LogEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyLog);
        }
        for entry in &entries {
            if entry.activities.is_empty() {
                return Err(Error::InvalidConfig(format!(
                    "trace {:?} has no activities",
                    entry.case_id
                )));
            }
        }
        let vocab = Vocabulary::from_activities(
            entries
                .iter()
                .flat_map(|e| e.activities.iter().cloned()),
        )?;
        Ok(EventLog { entries, vocab })
    }

    /// Builds a log from bare traces, assigning case ids `<prefix>-<i>`.
    pub fn from_traces(traces: Vec<Trace>, case_prefix: &str) -> Result<Self> {
        let entries = traces
            .into_iter()
            .enumerate()
            .map(|(i, activities)| LogEntry {
                case_id: format!("{case_prefix}-{i}"),
                activities,
            })
            .collect();
        Self::from_entries(entries)
    }

    /// Number of traces (multiset size, counting duplicates).
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[LogEntry] {
        &self.entries
    }

    pub fn traces(&self) -> impl Iterator<Item = &Trace> {
        self.entries.iter().map(|e| &e.activities)
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    /// Length of the longest trace.
    pub fn max_trace_len(&self) -> usize {
        self.traces().map(Vec::len).max().unwrap_or(0)
    }

    /// Counts each distinct variant.
    pub fn variant_table(&self) -> VariantTable {
        let mut counts: BTreeMap<Trace, u64> = BTreeMap::new();
        for trace in self.traces() {
            *counts.entry(trace.clone()).or_insert(0) += 1;
        }
        VariantTable {
            total: self.len() as u64,
            counts,
        }
    }

    /// Reads a JSON-Lines log. Malformed lines are reported with their line
    /// number; whitespace-only lines are skipped; an empty log is an error.
    pub fn read_jsonl(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let reader = BufReader::new(file);
        let mut entries = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let entry: LogEntry = serde_json::from_str(&line).map_err(|e| Error::Parse {
                path: path.to_owned(),
                line: idx + 1,
                msg: e.to_string(),
            })?;
            if entry.activities.is_empty() {
                return Err(Error::Parse {
                    path: path.to_owned(),
                    line: idx + 1,
                    msg: "trace has an empty activities array".to_owned(),
                });
            }
            entries.push(entry);
        }
        Self::from_entries(entries)
    }

    /// Writes the log as JSON Lines, preserving entry order and case ids.
    pub fn write_jsonl(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut writer = BufWriter::new(file);
        for entry in &self.entries {
            serde_json::to_writer(&mut writer, entry)?;
            writer.write_all(b"\n").map_err(|e| Error::io(path, e))?;
        }
        writer.flush().map_err(|e| Error::io(path, e))
    }
}

// ---------------------------------------------------------------------------
// Variant tables
// ---------------------------------------------------------------------------

/// Distinct variants of a log with their occurrence counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariantTable {
    counts: BTreeMap<Trace, u64>,
    total: u64,
}

impl VariantTable {
    /// Builds a table directly from counts (used by model enumeration, where
    /// every variant occurs once). `total` is the underlying multiset size.
    pub fn from_counts(counts: BTreeMap<Trace, u64>, total: u64) -> Self {
        debug_assert_eq!(counts.values().sum::<u64>(), total);
        VariantTable { counts, total }
    }

    /// Occurrence count of a variant (0 when absent).
    pub fn occ(&self, variant: &[Activity]) -> u64 {
        self.counts.get(variant).copied().unwrap_or(0)
    }

    /// Number of distinct variants.
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Total trace count behind the table (multiset size).
    pub fn total(&self) -> u64 {
        self.total
    }

    /// Variants in lexicographic order with their counts.
    pub fn iter(&self) -> impl Iterator<Item = (&Trace, u64)> {
        self.counts.iter().map(|(t, &c)| (t, c))
    }

    /// The variants alone, lexicographically ordered.
    pub fn variants(&self) -> impl Iterator<Item = &Trace> {
        self.counts.keys()
    }

    /// Exports `variant;count` CSV, variants joined by `|`.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut writer = BufWriter::new(file);
        writeln!(writer, "variant;count").map_err(|e| Error::io(path, e))?;
        for (variant, count) in self.iter() {
            writeln!(writer, "{};{}", format_variant(variant), count)
                .map_err(|e| Error::io(path, e))?;
        }
        writer.flush().map_err(|e| Error::io(path, e))
    }
}

/// Convenience: the variant table of a log.
pub fn variants_of(log: &EventLog) -> VariantTable {
    log.variant_table()
}

// ---------------------------------------------------------------------------
// Prefix datasets
// ---------------------------------------------------------------------------

/// Fixed-width prefix/next-token pairs for supervised next-activity training.
///
/// Every trace `[e1..en]` is augmented to `[BOS, e1..en, EOS]` and yields the
/// `n + 1` pairs `([BOS..ei], e(i+1))` — one per proper prefix that starts at
/// BOS. Prefixes are left-truncated to the window length and front-padded
/// with [`PAD_CODE`]; the real tokens always sit at the right edge of a row.
/// Targets are target-space indices (activities + EOS).
#[derive(Debug, Clone)]
pub struct PrefixDataset {
    vocab: Vocabulary,
    prefix_len: usize,
    /// Row-major `len() x prefix_len` input codes.
    inputs: Vec<u16>,
    targets: Vec<u16>,
}

impl PrefixDataset {
    pub fn new(vocab: Vocabulary, prefix_len: usize) -> Self {
        PrefixDataset {
            vocab,
            prefix_len,
            inputs: Vec::new(),
            targets: Vec::new(),
        }
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn prefix_len(&self) -> usize {
        self.prefix_len
    }

    /// Number of prefix/target pairs.
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    /// The `i`-th input row (length [`Self::prefix_len`]).
    pub fn input(&self, i: usize) -> &[u16] {
        &self.inputs[i * self.prefix_len..(i + 1) * self.prefix_len]
    }

    pub fn target(&self, i: usize) -> u16 {
        self.targets[i]
    }

    /// Appends one pair. `prefix` holds input codes of the un-truncated
    /// prefix (BOS first); `target` is a target-space index.
    pub fn push(&mut self, prefix: &[u16], target: u16) {
        let w = self.prefix_len;
        let start = prefix.len().saturating_sub(w);
        let window = &prefix[start..];
        for _ in 0..w - window.len() {
            self.inputs.push(PAD_CODE);
        }
        self.inputs.extend_from_slice(window);
        self.targets.push(target);
    }
}

/// Expands a log into prefix pairs and deals them into a seeded random
/// 80/20 train/validation split (train share = `floor(0.8 * pairs)`).
///
/// The pair multiset is the union over traces of all BOS-anchored proper
/// prefixes, so a log with traces of lengths `n_i` yields `sum(n_i + 1)`
/// pairs before splitting.
pub fn build_prefix_dataset(
    log: &EventLog,
    prefix_len: usize,
    seed: u64,
) -> Result<(PrefixDataset, PrefixDataset)> {
    use rand::seq::SliceRandom;

    if log.is_empty() {
        return Err(Error::EmptyLog);
    }
    if prefix_len == 0 {
        return Err(Error::InvalidConfig("prefix_len must be positive".into()));
    }
    let vocab = log.vocabulary().clone();

    // Materialize every pair as (trace index, prefix end) first so the
    // shuffle acts on the full pair multiset.
    let mut pair_refs: Vec<(u32, u32)> = Vec::new();
    for (t, trace) in log.traces().enumerate() {
        for end in 0..=trace.len() {
            pair_refs.push((t as u32, end as u32));
        }
    }
    let n = pair_refs.len();
    let n_train = n * 4 / 5;
    if n_train == 0 || n_train == n {
        return Err(Error::InvalidConfig(format!(
            "{n} prefix pairs cannot be split 80/20 into non-empty parts"
        )));
    }
    let mut rng = rng_from_seed(seed);
    pair_refs.shuffle(&mut rng);

    let traces: Vec<&Trace> = log.traces().collect();
    let mut encoded: HashMap<u32, Vec<u16>> = HashMap::new();
    let mut train = PrefixDataset::new(vocab.clone(), prefix_len);
    let mut val = PrefixDataset::new(vocab.clone(), prefix_len);
    for (i, &(t, end)) in pair_refs.iter().enumerate() {
        let trace = traces[t as usize];
        let codes = encoded.entry(t).or_insert_with(|| {
            let mut c = Vec::with_capacity(trace.len() + 1);
            c.push(vocab.bos_input());
            for a in trace.iter() {
                // The vocabulary was built from this log, so lookups succeed.
                c.push(vocab.input_index(a).expect("trace activity in vocabulary"));
            }
            c
        });
        let end = end as usize;
        let target = if end == trace.len() {
            vocab.eos_target()
        } else {
            vocab.target_index(&trace[end]).expect("activity target")
        };
        let dataset = if i < n_train { &mut train } else { &mut val };
        dataset.push(&codes[..end + 1], target);
    }
    Ok((train, val))
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    fn act(s: &str) -> Activity {
        Activity::new(s)
    }

    fn trace(labels: &[&str]) -> Trace {
        labels.iter().map(|l| act(l)).collect()
    }

    fn toy_log() -> EventLog {
        EventLog::from_traces(
            vec![
                trace(&["b", "a"]),
                trace(&["a"]),
                trace(&["b", "a"]),
                trace(&["c", "a", "b"]),
            ],
            "case",
        )
        .unwrap()
    }

    #[test]
    fn vocabulary_orders_activities_then_bos_eos() {
        let log = toy_log();
        let v = log.vocabulary();
        let labels: Vec<&str> = v.labels().iter().map(Activity::as_str).collect();
        assert_eq!(labels, vec!["a", "b", "c", "BOS", "EOS"]);
        assert_eq!(v.n_activities(), 3);
        assert_eq!(v.n_inputs(), 5);
        assert_eq!(v.n_targets(), 4);
        assert_eq!(v.bos_input(), 3);
        assert_eq!(v.eos_input(), 4);
        assert_eq!(v.eos_target(), 3);
        assert_eq!(v.input_index(&act("b")).unwrap(), 1);
        assert_eq!(v.target_index(&act("c")).unwrap(), 2);
        assert!(v.target_index(&act("BOS")).is_err());
    }

    #[test]
    fn reserved_labels_are_rejected() {
        let err = EventLog::from_traces(vec![trace(&["a", "EOS"])], "case").unwrap_err();
        assert!(matches!(err, Error::ReservedLabel(l) if l == "EOS"));
    }

    #[test]
    fn one_hot_reports_unknown_labels_by_name() {
        let v = toy_log().vocabulary().clone();
        let row = v.one_hot(&act("b")).unwrap();
        assert_eq!(row, vec![0.0, 1.0, 0.0, 0.0, 0.0]);
        let err = v.one_hot(&act("zz")).unwrap_err();
        assert!(matches!(&err, Error::UnknownLabel(l) if l == "zz"), "{err}");
    }

    #[test]
    fn pad_encodes_as_zero_row() {
        let v = toy_log().vocabulary().clone();
        let mut row = vec![1.0; v.n_inputs()];
        v.encode_into(PAD_CODE, &mut row);
        assert!(row.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn variant_table_counts_and_orders() {
        let table = toy_log().variant_table();
        assert_eq!(table.len(), 3);
        assert_eq!(table.total(), 4);
        assert_eq!(table.occ(&trace(&["b", "a"])), 2);
        assert_eq!(table.occ(&trace(&["a"])), 1);
        assert_eq!(table.occ(&trace(&["nope"])), 0);
        let variants: Vec<String> = table.variants().map(|v| format_variant(v)).collect();
        assert_eq!(variants, vec!["a", "b|a", "c|a|b"]);
    }

    #[test]
    fn variant_csv_golden() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("variants.csv");
        toy_log().variant_table().write_csv(&path).unwrap();
        let got = std::fs::read_to_string(&path).unwrap();
        assert_eq!(got, "variant;count\na;1\nb|a;2\nc|a|b;1\n");
    }

    #[test]
    fn prefix_pairs_enumerate_every_bos_prefix() {
        // Trace [x, y] must yield exactly ([BOS]->x), ([BOS,x]->y),
        // ([BOS,x,y]->EOS).
        let log = EventLog::from_traces(
            vec![trace(&["x", "y"]), trace(&["x", "y"]), trace(&["y"])],
            "c",
        )
        .unwrap();
        let (train, val) = build_prefix_dataset(&log, 4, 9).unwrap();
        assert_eq!(train.len() + val.len(), 3 + 3 + 2);
        assert_eq!(train.len(), 8 * 4 / 5);

        let v = log.vocabulary();
        let (x, y) = (
            v.input_index(&act("x")).unwrap(),
            v.input_index(&act("y")).unwrap(),
        );
        let bos = v.bos_input();
        let mut seen: Vec<(Vec<u16>, u16)> = Vec::new();
        for ds in [&train, &val] {
            for i in 0..ds.len() {
                seen.push((ds.input(i).to_vec(), ds.target(i)));
            }
        }
        seen.sort();
        let p = PAD_CODE;
        let mut expected = vec![
            (vec![p, p, p, bos], v.target_index(&act("x")).unwrap()),
            (vec![p, p, bos, x], v.target_index(&act("y")).unwrap()),
            (vec![p, bos, x, y], v.eos_target()),
            (vec![p, p, p, bos], v.target_index(&act("x")).unwrap()),
            (vec![p, p, bos, x], v.target_index(&act("y")).unwrap()),
            (vec![p, bos, x, y], v.eos_target()),
            (vec![p, p, p, bos], v.target_index(&act("y")).unwrap()),
            (vec![p, p, bos, y], v.eos_target()),
        ];
        expected.sort();
        assert_eq!(seen, expected);
    }

    #[test]
    fn prefix_windows_left_truncate() {
        let log = EventLog::from_traces(vec![trace(&["a", "b", "c"])], "c").unwrap();
        let (train, val) = build_prefix_dataset(&log, 2, 1).unwrap();
        let v = log.vocabulary();
        let (a, b, c) = (
            v.input_index(&act("a")).unwrap(),
            v.input_index(&act("b")).unwrap(),
            v.input_index(&act("c")).unwrap(),
        );
        let mut rows: Vec<(Vec<u16>, u16)> = Vec::new();
        for ds in [&train, &val] {
            for i in 0..ds.len() {
                rows.push((ds.input(i).to_vec(), ds.target(i)));
            }
        }
        rows.sort();
        let mut expected = vec![
            (vec![PAD_CODE, v.bos_input()], v.target_index(&act("a")).unwrap()),
            (vec![v.bos_input(), a], v.target_index(&act("b")).unwrap()),
            (vec![a, b], v.target_index(&act("c")).unwrap()),
            (vec![b, c], v.eos_target()),
        ];
        expected.sort();
        assert_eq!(rows, expected);
    }

    #[test]
    fn split_is_seed_deterministic() {
        let log = toy_log();
        let (t1, v1) = build_prefix_dataset(&log, 5, 123).unwrap();
        let (t2, v2) = build_prefix_dataset(&log, 5, 123).unwrap();
        assert_eq!(t1.inputs, t2.inputs);
        assert_eq!(t1.targets, t2.targets);
        assert_eq!(v1.inputs, v2.inputs);
        let (t3, _) = build_prefix_dataset(&log, 5, 124).unwrap();
        assert!(t1.inputs != t3.inputs || t1.targets != t3.targets);
    }

    #[test]
    fn jsonl_round_trip_preserves_everything() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("log.jsonl");
        let log = toy_log();
        log.write_jsonl(&path).unwrap();
        let back = EventLog::read_jsonl(&path).unwrap();
        assert_eq!(back.len(), log.len());
        assert_eq!(back.variant_table(), log.variant_table());
        let ids: Vec<&str> = back.entries().iter().map(|e| e.case_id.as_str()).collect();
        assert_eq!(ids, vec!["case-0", "case-1", "case-2", "case-3"]);
    }

    #[test]
    fn jsonl_parse_errors_carry_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.jsonl");
        std::fs::write(
            &path,
            "{\"case_id\": \"a\", \"activities\": [\"x\"]}\nnot json\n",
        )
        .unwrap();
        let err = EventLog::read_jsonl(&path).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");

        std::fs::write(
            &path,
            "{\"case_id\": \"a\", \"activities\": [\"x\"]}\n{\"case_id\": \"b\", \"activities\": []}\n",
        )
        .unwrap();
        let err = EventLog::read_jsonl(&path).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn empty_log_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.jsonl");
        std::fs::write(&path, "").unwrap();
        assert!(matches!(EventLog::read_jsonl(&path), Err(Error::EmptyLog)));
    }
}
