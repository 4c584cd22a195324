//! Six built-in reference nets exercising one control-flow pattern each:
//!
//! | id | pattern                                   | variants | activities | trace length |
//! |----|-------------------------------------------|----------|------------|--------------|
//! | 1  | five-way concurrency inside a flow        | 120      | 13         | 13           |
//! | 2  | seven independent binary choices          | 128      | 26         | 19           |
//! | 3  | eight binary choices, last mirrors first  | 128      | 27         | 19           |
//! | 4  | three one-or-both splits                  | 64       | 18         | 15–18        |
//! | 5  | two concurrent chains (4 and 5 steps)     | 126      | 24         | 24           |
//! | 6  | three loops, each run one to three times  | 27       | 16         | 16–28        |
//!
//! Each model also carries a recommended prediction window (`prefix_len`)
//! sized so that a window covers everything a next-step predictor needs —
//! model 3 deliberately needs a long window because its final choice is
//! decided 14 events earlier.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::net::{NetBuilder, WorkflowNet};

/// Valid arguments to [`builtin_model`].
pub const BUILTIN_MODEL_IDS: [usize; 6] = [1, 2, 3, 4, 5, 6];

/// Frozen reference statistics for one built-in model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BuiltinStats {
    pub id: usize,
    /// Short structural description.
    pub pattern: &'static str,
    /// Number of distinct complete traces under the default caps.
    pub variant_count: u64,
    /// Distinct activity labels occurring in the language.
    pub activity_count: usize,
    pub min_trace_len: usize,
    pub max_trace_len: usize,
    /// Recommended sliding-window length for next-activity prediction.
    pub prefix_len: usize,
}

/// The frozen statistics table for all six models.
pub fn builtin_stats() -> [BuiltinStats; 6] {
    [
        BuiltinStats {
            id: 1,
            pattern: "five-way concurrency inside a flow",
            variant_count: 120,
            activity_count: 13,
            min_trace_len: 13,
            max_trace_len: 13,
            prefix_len: 6,
        },
        BuiltinStats {
            id: 2,
            pattern: "seven independent binary choices",
            variant_count: 128,
            activity_count: 26,
            min_trace_len: 19,
            max_trace_len: 19,
            prefix_len: 6,
        },
        BuiltinStats {
            id: 3,
            pattern: "eight binary choices, last mirrors first",
            variant_count: 128,
            activity_count: 27,
            min_trace_len: 19,
            max_trace_len: 19,
            prefix_len: 18,
        },
        BuiltinStats {
            id: 4,
            pattern: "three one-or-both splits",
            variant_count: 64,
            activity_count: 18,
            min_trace_len: 15,
            max_trace_len: 18,
            prefix_len: 6,
        },
        BuiltinStats {
            id: 5,
            pattern: "two concurrent chains (4 and 5 steps)",
            variant_count: 126,
            activity_count: 24,
            min_trace_len: 24,
            max_trace_len: 24,
            prefix_len: 12,
        },
        BuiltinStats {
            id: 6,
            pattern: "three loops, each run one to three times",
            variant_count: 27,
            activity_count: 16,
            min_trace_len: 16,
            max_trace_len: 28,
            prefix_len: 12,
        },
    ]
}

/// Builds built-in model `id` (1 through 6).
pub fn builtin_model(id: usize) -> Result<WorkflowNet> {
    match id {
        1 => Ok(model_1()),
        2 => Ok(model_2()),
        3 => Ok(model_3()),
        4 => Ok(model_4()),
        5 => Ok(model_5()),
        6 => Ok(model_6()),
        other => Err(Error::InvalidConfig(format!(
            "unknown built-in model id {other} (valid: 1..=6)"
        ))),
    }
}

/// One labeled step `label` from `from` to a fresh place; returns that place.
fn step(b: &mut NetBuilder, label: String, from: usize) -> usize {
    let to = b.place();
    b.activity(label, &[from], &[to]);
    to
}

/// A run of labeled steps; returns the final place.
fn run(b: &mut NetBuilder, labels: impl IntoIterator<Item = String>, from: usize) -> usize {
    let mut cur = from;
    for label in labels {
        cur = step(b, label, cur);
    }
    cur
}

/// Binary choice: either `la` or `lb` moves from `from` to a fresh place.
fn choice(b: &mut NetBuilder, la: String, lb: String, from: usize) -> usize {
    let to = b.place();
    b.activity(la, &[from], &[to]);
    b.activity(lb, &[from], &[to]);
    to
}

/// One-or-both split: `la` alone, `lb` alone, or both concurrently.
fn one_or_both(b: &mut NetBuilder, la: String, lb: String, from: usize) -> usize {
    let out = b.place();
    let only_a = b.place();
    b.tau(&[from], &[only_a]);
    b.activity(la.clone(), &[only_a], &[out]);
    let only_b = b.place();
    b.tau(&[from], &[only_b]);
    b.activity(lb.clone(), &[only_b], &[out]);
    let (qa, qb) = (b.place(), b.place());
    let (ra, rb) = (b.place(), b.place());
    b.tau(&[from], &[qa, qb]);
    b.activity(la, &[qa], &[ra]);
    b.activity(lb, &[qb], &[rb]);
    b.tau(&[ra, rb], &[out]);
    out
}

/// Loop whose body is `la` then `lb`, re-entered via a silent redo step.
/// Under the default marking-visit cap of 3 the body runs one to three times,
/// and play-out flips a fair coin between redo and exit while both are open.
fn loop_pair(b: &mut NetBuilder, la: String, lb: String, from: usize) -> usize {
    let mid = b.place();
    let after = b.place();
    let out = b.place();
    b.activity(la, &[from], &[mid]);
    b.activity(lb, &[mid], &[after]);
    b.tau(&[after], &[out]); // exit
    b.tau(&[after], &[from]); // redo
    out
}

fn s(i: usize) -> String {
    format!("s{i:02}")
}

/// 13 steps a01..a13; a05..a09 run concurrently between the fork `a04` and
/// the join `a10`, so the language is the 5! orderings of the middle block.
fn model_1() -> WorkflowNet {
    let mut b = NetBuilder::new();
    let src = b.place();
    let head = run(&mut b, (1..=3).map(|i| format!("a{i:02}")), src);
    let starts: Vec<usize> = (0..5).map(|_| b.place()).collect();
    let ends: Vec<usize> = (0..5).map(|_| b.place()).collect();
    b.activity("a04", &[head], &starts);
    for (i, (&q, &r)) in starts.iter().zip(ends.iter()).enumerate() {
        b.activity(format!("a{:02}", 5 + i), &[q], &[r]);
    }
    let join = b.place();
    b.activity("a10", &ends, &[join]);
    let snk = run(&mut b, (11..=13).map(|i| format!("a{i:02}")), join);
    b.build(src, snk)
}

/// s01 x01 s02 x02 … s07 x07 s08..s12 — seven independent fair choices
/// between `x..a` and `x..b`, giving 2^7 equally likely variants.
fn model_2() -> WorkflowNet {
    let mut b = NetBuilder::new();
    let src = b.place();
    let mut cur = src;
    for i in 1..=7 {
        cur = step(&mut b, s(i), cur);
        cur = choice(&mut b, format!("x{i:02}a"), format!("x{i:02}b"), cur);
    }
    let snk = run(&mut b, (8..=12).map(s), cur);
    b.build(src, snk)
}

/// Like model 2 but with an eighth choice whose outcome is forced to mirror
/// the first: `x01a` stores a token that only `x08a` can consume (same for
/// the `b` side), a dependency spanning 14 intermediate events.
fn model_3() -> WorkflowNet {
    let mut b = NetBuilder::new();
    let src = b.place();
    let mut cur = step(&mut b, s(1), src);
    let memory_a = b.place();
    let memory_b = b.place();
    {
        let to = b.place();
        b.activity("x01a", &[cur], &[to, memory_a]);
        b.activity("x01b", &[cur], &[to, memory_b]);
        cur = to;
    }
    for i in 2..=7 {
        cur = step(&mut b, s(i), cur);
        cur = choice(&mut b, format!("x{i:02}a"), format!("x{i:02}b"), cur);
    }
    cur = step(&mut b, s(8), cur);
    {
        let to = b.place();
        b.activity("x08a", &[cur, memory_a], &[to]);
        b.activity("x08b", &[cur, memory_b], &[to]);
        cur = to;
    }
    let snk = run(&mut b, (9..=11).map(s), cur);
    b.build(src, snk)
}

/// Twelve steps with three one-or-both splits (y1, y2, y3) mixed in; each
/// split contributes `a`, `b`, `ab` or `ba`, so 4^3 variants of length 15–18.
fn model_4() -> WorkflowNet {
    let mut b = NetBuilder::new();
    let src = b.place();
    let mut cur = run(&mut b, (1..=4).map(s), src);
    cur = one_or_both(&mut b, "y1a".into(), "y1b".into(), cur);
    cur = run(&mut b, (5..=8).map(s), cur);
    cur = one_or_both(&mut b, "y2a".into(), "y2b".into(), cur);
    cur = run(&mut b, (9..=10).map(s), cur);
    cur = one_or_both(&mut b, "y3a".into(), "y3b".into(), cur);
    let snk = run(&mut b, (11..=12).map(s), cur);
    b.build(src, snk)
}

/// s01..s08, then a 4-step chain d01..d04 concurrent with a 5-step chain
/// e01..e05 (fork `s08`, join `s09`), then s10..s15: C(9,4) = 126 shuffles.
fn model_5() -> WorkflowNet {
    let mut b = NetBuilder::new();
    let src = b.place();
    let head = run(&mut b, (1..=7).map(s), src);
    let d0 = b.place();
    let e0 = b.place();
    b.activity("s08", &[head], &[d0, e0]);
    let d_end = run(&mut b, (1..=4).map(|i| format!("d{i:02}")), d0);
    let e_end = run(&mut b, (1..=5).map(|i| format!("e{i:02}")), e0);
    let join = b.place();
    b.activity("s09", &[d_end, e_end], &[join]);
    let snk = run(&mut b, (10..=15).map(s), join);
    b.build(src, snk)
}

/// Ten steps with three two-activity loops (l1, l2, l3) mixed in; each loop
/// body runs one to three times under the default cap, giving 3^3 variants.
fn model_6() -> WorkflowNet {
    let mut b = NetBuilder::new();
    let src = b.place();
    let mut cur = run(&mut b, (1..=3).map(s), src);
    cur = loop_pair(&mut b, "l1a".into(), "l1b".into(), cur);
    cur = run(&mut b, (4..=6).map(s), cur);
    cur = loop_pair(&mut b, "l2a".into(), "l2b".into(), cur);
    cur = run(&mut b, (7..=8).map(s), cur);
    cur = loop_pair(&mut b, "l3a".into(), "l3b".into(), cur);
    let snk = run(&mut b, (9..=10).map(s), cur);
    b.build(src, snk)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::log::Activity;
    use crate::model::net::playout_net;
    use crate::model::EnumerationConfig;
    use std::collections::BTreeSet;

    #[test]
    fn frozen_stats_match_enumerated_language() {
        let cfg = EnumerationConfig::default();
        for stats in builtin_stats() {
            let net = builtin_model(stats.id).unwrap();
            net.check_workflow_structure().unwrap();
            let table = net.enumerate_variants(&cfg).unwrap();
            assert_eq!(table.len() as u64, stats.variant_count, "model {}", stats.id);
            let labels: BTreeSet<&Activity> = table.variants().flatten().collect();
            assert_eq!(labels.len(), stats.activity_count, "model {}", stats.id);
            let lens: Vec<usize> = table.variants().map(Vec::len).collect();
            assert_eq!(*lens.iter().min().unwrap(), stats.min_trace_len, "model {}", stats.id);
            assert_eq!(*lens.iter().max().unwrap(), stats.max_trace_len, "model {}", stats.id);
        }
    }

    #[test]
    fn unknown_id_is_rejected() {
        assert!(builtin_model(0).is_err());
        assert!(builtin_model(7).is_err());
    }

    #[test]
    fn concurrent_block_playout_is_uniform_over_orders() {
        let cfg = EnumerationConfig::default();
        let net = builtin_model(1).unwrap();
        let lang = net.enumerate_variants(&cfg).unwrap();
        let log = playout_net(&net, 12_000, 41, &cfg).unwrap();
        let observed = log.variant_table();
        assert_eq!(observed.len(), 120, "all orderings should appear");
        // Each of the 120 orderings has probability 1/120; with n = 12000 the
        // expected count is 100 with σ ≈ 10. Four sigma on a fixed seed.
        for (variant, count) in observed.iter() {
            assert!(lang.occ(variant) == 1);
            assert!(
                (60..=140).contains(&count),
                "ordering frequency {count} outside 100 ± 40"
            );
        }
    }

    #[test]
    fn loop_rounds_follow_coin_flip_distribution() {
        let cfg = EnumerationConfig::default();
        let net = builtin_model(6).unwrap();
        let lang = net.enumerate_variants(&cfg).unwrap();
        let log = playout_net(&net, 2_700, 17, &cfg).unwrap();
        let observed = log.variant_table();
        for variant in observed.variants() {
            assert!(lang.occ(variant) == 1, "play-out escaped the language");
        }
        assert_eq!(observed.len(), 27, "all loop-count combinations appear");
        // Shortest variant = every loop exits immediately: probability
        // (1/2)^3 = 1/8, so 337.5 expected of 2700, σ ≈ 17.2; three sigma.
        let shortest = observed
            .iter()
            .min_by_key(|(v, _)| v.len())
            .map(|(v, _)| v.clone())
            .unwrap();
        assert_eq!(shortest.len(), 16);
        let count = observed.occ(&shortest);
        assert!(
            (286..=389).contains(&count),
            "all-exit-first frequency {count} outside 337.5 ± 51.6"
        );
    }

    #[test]
    fn late_choice_mirrors_early_choice() {
        let cfg = EnumerationConfig::default();
        let net = builtin_model(3).unwrap();
        let table = net.enumerate_variants(&cfg).unwrap();
        for variant in table.variants() {
            let first = variant.iter().find(|a| a.as_str().starts_with("x01")).unwrap();
            let last = variant.iter().find(|a| a.as_str().starts_with("x08")).unwrap();
            assert_eq!(
                first.as_str().ends_with('a'),
                last.as_str().ends_with('a'),
                "variant breaks the long-range dependency"
            );
        }
    }

    #[test]
    fn playout_stays_in_language_for_every_model() {
        let cfg = EnumerationConfig::default();
        for id in BUILTIN_MODEL_IDS {
            let net = builtin_model(id).unwrap();
            let lang = net.enumerate_variants(&cfg).unwrap();
            let log = playout_net(&net, 300, 7, &cfg).unwrap();
            for trace in log.traces() {
                assert_eq!(lang.occ(trace), 1, "model {id} play-out escaped");
            }
        }
    }
}
