//! Exact-match quality metrics comparing a simulated log against the
//! training/test logs it was learned from.
//!
//! Three frequency-aware scores work on occurrence counts:
//!
//! - fitness `F`: how much of the training log's behaviour the simulation
//!   replicates, `Σ_{v∈Var(tr)} min(Occ(v,sim), Occ(v,tr)) / |tr|`;
//! - precision `P`: how much of the simulation is behaviour seen in training
//!   or test, `Σ_{v∈Var(sim)} min(Occ(v,sim), Occ(v,tr⊎te)) / |sim|`;
//! - generalization `G`: how much held-out behaviour the simulation produces,
//!   `Σ_{v∈Var(te)} min(Occ(v,sim), Occ(v,te)) / |te|`.
//!
//! Their absolute counterparts `F_A`, `P_A`, `G_A` replace counts by presence
//! indicators over variant sets. Frequency metrics require the simulated log
//! to have exactly `|tr| + |te|` traces; alternatively occurrence counts can
//! be linearly rescaled by `(|tr|+|te|)/|sim|` (flagged in the report).

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::log::{EventLog, Trace, VariantTable};

/// All six scores plus the context needed to interpret them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricReport {
    pub f: f64,
    pub p: f64,
    pub g: f64,
    pub f_a: f64,
    pub p_a: f64,
    pub g_a: f64,
    pub size_tr: usize,
    pub size_te: usize,
    pub size_sim: usize,
    pub variants_tr: usize,
    pub variants_te: usize,
    pub variants_sim: usize,
    /// Whether frequency scores were computed on rescaled occurrence counts.
    pub rescaled: bool,
}

impl MetricReport {
    /// The metric portion of a results CSV row (comma-joined), matching
    /// [`MetricReport::CSV_FIELDS`].
    pub fn csv_cells(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.f,
            self.p,
            self.g,
            self.f_a,
            self.p_a,
            self.g_a,
            self.size_tr,
            self.size_te,
            self.size_sim,
            self.rescaled
        )
    }

    pub const CSV_FIELDS: &'static str = "F,P,G,F_A,P_A,G_A,size_tr,size_te,size_sim,rescaled";
}

fn merged_counts(a: &VariantTable, b: &VariantTable) -> BTreeMap<Trace, u64> {
    let mut counts: BTreeMap<Trace, u64> = a.iter().map(|(v, c)| (v.clone(), c)).collect();
    for (v, c) in b.iter() {
        *counts.entry(v.clone()).or_insert(0) += c;
    }
    counts
}

/// Frequency-aware (fitness, precision, generalization).
///
/// Unless `allow_rescale` is set, `|sim|` must equal `|tr| + |te|`. With it,
/// mismatched sizes linearly rescale every simulated occurrence count by
/// `(|tr|+|te|)/|sim|` (precision then also normalizes by the rescaled
/// total). Logs are non-empty by construction, which rules out the undefined
/// empty-input cases.
pub fn freq_metrics(
    tr: &EventLog,
    te: &EventLog,
    sim: &EventLog,
    allow_rescale: bool,
) -> Result<(f64, f64, f64)> {
    let reference = tr.len() + te.len();
    if sim.len() != reference && !allow_rescale {
        return Err(Error::SizeMismatch {
            simulated: sim.len(),
            reference,
        });
    }
    let scale = if sim.len() == reference {
        1.0
    } else {
        reference as f64 / sim.len() as f64
    };

    let var_tr = tr.variant_table();
    let var_te = te.variant_table();
    let var_sim = sim.variant_table();
    let occ_sim = |v: &Trace| var_sim.occ(v) as f64 * scale;

    let f = var_tr
        .iter()
        .map(|(v, c)| occ_sim(v).min(c as f64))
        .sum::<f64>()
        / tr.len() as f64;

    let both = merged_counts(&var_tr, &var_te);
    let p = var_sim
        .iter()
        .map(|(v, _)| occ_sim(v).min(both.get(v).copied().unwrap_or(0) as f64))
        .sum::<f64>()
        / (sim.len() as f64 * scale);

    let g = var_te
        .iter()
        .map(|(v, c)| occ_sim(v).min(c as f64))
        .sum::<f64>()
        / te.len() as f64;

    Ok((f, p, g))
}

/// Absolute (fitness, precision, generalization): presence indicators over
/// variant sets, with no size precondition.
pub fn abs_metrics(tr: &EventLog, te: &EventLog, sim: &EventLog) -> (f64, f64, f64) {
    let var_tr = tr.variant_table();
    let var_te = te.variant_table();
    let var_sim = sim.variant_table();

    let f_a = var_tr.variants().filter(|v| var_sim.occ(v) > 0).count() as f64
        / var_tr.len() as f64;
    let p_a = var_sim
        .variants()
        .filter(|v| var_tr.occ(v) > 0 || var_te.occ(v) > 0)
        .count() as f64
        / var_sim.len() as f64;
    let g_a = var_te.variants().filter(|v| var_sim.occ(v) > 0).count() as f64
        / var_te.len() as f64;
    (f_a, p_a, g_a)
}

/// Computes all six metrics and the report context in one pass.
pub fn evaluate(
    tr: &EventLog,
    te: &EventLog,
    sim: &EventLog,
    allow_rescale: bool,
) -> Result<MetricReport> {
    let (f, p, g) = freq_metrics(tr, te, sim, allow_rescale)?;
    let (f_a, p_a, g_a) = abs_metrics(tr, te, sim);
    Ok(MetricReport {
        f,
        p,
        g,
        f_a,
        p_a,
        g_a,
        size_tr: tr.len(),
        size_te: te.len(),
        size_sim: sim.len(),
        variants_tr: tr.variant_table().len(),
        variants_te: te.variant_table().len(),
        variants_sim: sim.variant_table().len(),
        rescaled: sim.len() != tr.len() + te.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::log::{Activity, Trace};
    use proptest::prelude::*;

    fn log_of(spec: &[(&str, u64)]) -> EventLog {
        let mut traces: Vec<Trace> = Vec::new();
        for &(variant, count) in spec {
            let trace: Trace = variant.split('|').map(Activity::new).collect();
            for _ in 0..count {
                traces.push(trace.clone());
            }
        }
        EventLog::from_traces(traces, "case").unwrap()
    }

    #[test]
    fn worked_example_is_exact() {
        let tr = log_of(&[("a|a", 3), ("b", 1)]); // v1:3, v2:1
        let te = log_of(&[("c", 1)]); // v3:1
        let sim = log_of(&[("a|a", 2), ("d", 3)]); // v1:2, v4:3
        let (f, p, g) = freq_metrics(&tr, &te, &sim, false).unwrap();
        assert_eq!(f, 0.5); // min(2,3)/4
        assert_eq!(p, 0.4); // (min(2,3) + min(3,0))/5
        assert_eq!(g, 0.0);
        let (f_a, p_a, g_a) = abs_metrics(&tr, &te, &sim);
        assert_eq!(f_a, 0.5); // v1 present, v2 absent
        assert_eq!(p_a, 0.5); // v1 known, v4 unknown
        assert_eq!(g_a, 0.0);
    }

    #[test]
    fn replaying_the_training_log_is_perfectly_fit() {
        let tr = log_of(&[("a|b", 4), ("a|c", 2)]);
        let te = log_of(&[("a|d", 1)]);
        let sim = tr.clone(); // |sim| = 6 ≠ 7, needs rescaling
        let report = evaluate(&tr, &te, &sim, true).unwrap();
        assert_eq!(report.f, 1.0, "rescaling only inflates simulated counts");
        assert_eq!(report.g, 0.0);
        assert_eq!(report.f_a, 1.0);
        assert_eq!(report.p_a, 1.0);
        assert_eq!(report.g_a, 0.0);
        assert!(report.rescaled);
        // Inflated counts clip at the training counts, so precision is the
        // training share of the reference size: 6/7.
        assert!((report.p - 6.0 / 7.0).abs() < 1e-12, "P = {}", report.p);
    }

    #[test]
    fn size_mismatch_is_rejected_without_rescale() {
        let tr = log_of(&[("a", 2)]);
        let te = log_of(&[("b", 1)]);
        let sim = log_of(&[("a", 5)]);
        let err = freq_metrics(&tr, &te, &sim, false).unwrap_err();
        assert!(
            matches!(err, Error::SizeMismatch { simulated: 5, reference: 3 }),
            "{err}"
        );
    }

    #[test]
    fn rescaling_is_invariant_to_duplicating_the_simulation() {
        let tr = log_of(&[("a|b", 5), ("b|a", 3)]);
        let te = log_of(&[("a|a", 2)]);
        let sim = log_of(&[("a|b", 4), ("a|a", 1), ("z", 5)]);
        let doubled = log_of(&[("a|b", 8), ("a|a", 2), ("z", 10)]);
        let base = freq_metrics(&tr, &te, &sim, false).unwrap();
        let scaled = freq_metrics(&tr, &te, &doubled, true).unwrap();
        assert!((base.0 - scaled.0).abs() < 1e-12);
        assert!((base.1 - scaled.1).abs() < 1e-12);
        assert!((base.2 - scaled.2).abs() < 1e-12);
    }

    #[test]
    fn single_variant_test_log_scores_zero_or_one_absolute() {
        let tr = log_of(&[("a|b", 9)]);
        let te = log_of(&[("a|c", 1)]);
        let hit = log_of(&[("a|b", 8), ("a|c", 2)]);
        let miss = log_of(&[("a|b", 10)]);
        assert_eq!(abs_metrics(&tr, &te, &hit).2, 1.0);
        assert_eq!(abs_metrics(&tr, &te, &miss).2, 0.0);
    }

    #[test]
    fn csv_cells_are_stable() {
        let tr = log_of(&[("a|a", 3), ("b", 1)]);
        let te = log_of(&[("c", 1)]);
        let sim = log_of(&[("a|a", 2), ("d", 3)]);
        let report = evaluate(&tr, &te, &sim, false).unwrap();
        assert_eq!(report.csv_cells(), "0.5,0.4,0,0.5,0.5,0,4,1,5,false");
    }

    /// A small random log: 1–30 traces over up to five activities, each
    /// trace 1–4 events.
    fn arb_log(max_traces: usize) -> impl Strategy<Value = EventLog> {
        prop::collection::vec(
            prop::collection::vec(0u8..5, 1..=4),
            1..=max_traces,
        )
        .prop_map(|raw| {
            let traces: Vec<Trace> = raw
                .into_iter()
                .map(|t| {
                    t.into_iter()
                        .map(|i| Activity::new(["a", "b", "c", "d", "e"][i as usize]))
                        .collect()
                })
                .collect();
            EventLog::from_traces(traces, "case").unwrap()
        })
    }

    proptest! {
        #[test]
        fn scores_stay_in_unit_interval(
            tr in arb_log(30),
            te in arb_log(10),
            sim in arb_log(45),
        ) {
            let report = evaluate(&tr, &te, &sim, true).unwrap();
            for (name, value) in [
                ("F", report.f), ("P", report.p), ("G", report.g),
                ("F_A", report.f_a), ("P_A", report.p_a), ("G_A", report.g_a),
            ] {
                prop_assert!((0.0..=1.0).contains(&value), "{name} = {value}");
            }
            // Full absolute fitness means every training variant is simulated,
            // which forces strictly positive frequency fitness.
            if report.f_a == 1.0 {
                prop_assert!(report.f > 0.0);
            }
        }

        #[test]
        fn foreign_simulated_variants_only_touch_precision(
            tr in arb_log(20),
            te in arb_log(8),
            sim in arb_log(25),
        ) {
            // Swapping one simulated trace for a variant foreign to tr and te
            // keeps the size fixed, so F and G are untouched (they only read
            // counts of tr/te variants); the absolute scores agree.
            let mut swapped: Vec<Trace> = sim.traces().cloned().collect();
            swapped.pop();
            swapped.push(vec![Activity::new("zzz")]);
            let swapped = EventLog::from_traces(swapped, "case").unwrap();
            let (f0, _, g0) = freq_metrics(&tr, &te, &sim, true).unwrap();
            let (f1, _, g1) = freq_metrics(&tr, &te, &swapped, true).unwrap();
            let dropped = sim.traces().last().unwrap();
            let drop_matters_tr = tr.variant_table().occ(dropped) > 0;
            let drop_matters_te = te.variant_table().occ(dropped) > 0;
            if !drop_matters_tr {
                prop_assert!((f0 - f1).abs() < 1e-12);
            }
            if !drop_matters_te {
                prop_assert!((g0 - g1).abs() < 1e-12);
            }
            let (f_a0, _, g_a0) = abs_metrics(&tr, &te, &sim);
            let (f_a1, _, g_a1) = abs_metrics(&tr, &te, &swapped);
            if !drop_matters_tr {
                prop_assert_eq!(f_a0, f_a1);
            }
            if !drop_matters_te {
                prop_assert_eq!(g_a0, g_a1);
            }
        }
    }
}
