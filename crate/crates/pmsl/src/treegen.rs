//! Random process-tree generation with an operator-probability dial, plus a
//! generate-filter-select loop that hunts for a tree whose realized operator
//! mix best matches the requested one.
//!
//! Growth works by leaf replacement: starting from a single leaf, a uniformly
//! chosen leaf is replaced by a binary operator node (sequence, parallel or
//! choice, drawn by the configured probabilities) holding two fresh leaves,
//! until the tree carries a target number of visible activities drawn from
//! `activity_range`. Leaves then independently turn silent with probability
//! `p_silent`, and the visible leaves receive distinct labels `a01`, `a02`, …
//! in left-to-right order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::log::Activity;
use crate::model::{tree_stats, EnumerationConfig, ProcessTree};
use crate::rng::{derive_seed, rng_from_seed, Phase};
use rand::Rng;

/// Dials for random tree growth.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GenSettings {
    /// Probability that a growth step inserts a sequence node.
    pub p_seq: f64,
    /// Probability that a growth step inserts a parallel node.
    pub p_and: f64,
    /// Probability that a growth step inserts a choice node.
    pub p_xor: f64,
    /// Probability that a finished leaf turns silent.
    pub p_silent: f64,
    /// Inclusive range the per-tree visible-activity target is drawn from.
    pub activity_range: (usize, usize),
    pub seed: u64,
}

impl GenSettings {
    /// The half-sequence regime: sequence probability pinned at 0.5 and the
    /// remaining mass split between parallel (`p_and`) and choice.
    pub fn half_seq(p_and: f64, seed: u64) -> Self {
        GenSettings {
            p_seq: 0.5,
            p_and,
            p_xor: 0.5 - p_and,
            p_silent: 0.0,
            activity_range: (10, 25),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ps = [self.p_seq, self.p_and, self.p_xor];
        if ps.iter().any(|&p| !(0.0..=1.0).contains(&p) || p.is_nan()) {
            return Err(Error::InvalidConfig(
                "operator probabilities must lie in [0, 1]".into(),
            ));
        }
        if (ps.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!(
                "operator probabilities must sum to 1, got {}",
                ps.iter().sum::<f64>()
            )));
        }
        if !(0.0..=1.0).contains(&self.p_silent) {
            return Err(Error::InvalidConfig("p_silent must lie in [0, 1]".into()));
        }
        let (lo, hi) = self.activity_range;
        if lo < 1 || hi < lo {
            return Err(Error::InvalidConfig(format!(
                "activity range [{lo}, {hi}] is empty or starts below 1"
            )));
        }
        Ok(())
    }
}

/// Acceptance window applied to generated trees.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ModelFilter {
    /// Inclusive bounds on the number of distinct variants.
    pub variant_range: (u64, u64),
    /// Shortest variant must be strictly longer than this.
    pub min_trace_len_exceeds: usize,
}

impl Default for ModelFilter {
    fn default() -> Self {
        ModelFilter {
            variant_range: (80, 160),
            min_trace_len_exceeds: 5,
        }
    }
}

impl ModelFilter {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.variant_range;
        if lo < 1 || hi < lo {
            return Err(Error::InvalidConfig(format!(
                "variant range [{lo}, {hi}] is empty or starts below 1"
            )));
        }
        Ok(())
    }
}

/// A selected tree plus the bookkeeping the selection was based on.
#[derive(Debug, Clone, Serialize)]
pub struct SelectedModel {
    #[serde(serialize_with = "serialize_tree_as_text")]
    pub tree: ProcessTree,
    /// Realized (sequence, parallel, choice) node proportions.
    pub realized_proportions: [f64; 3],
    pub variant_count: u64,
    pub min_trace_len: usize,
    pub max_trace_len: usize,
    /// Which candidate (by generation order) won.
    pub candidate_index: usize,
}

fn serialize_tree_as_text<S: serde::Serializer>(
    tree: &ProcessTree,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&tree.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum OpKind {
    Seq,
    And,
    Xor,
}

/// Grows one random tree according to `settings` (leaf-replacement growth;
/// see the module docs). Deterministic per `settings.seed`.
pub fn generate_tree(settings: &GenSettings) -> Result<ProcessTree> {
    settings.validate()?;
    let mut rng = rng_from_seed(settings.seed);
    let (lo, hi) = settings.activity_range;
    let target = rng.gen_range(lo..=hi);

    // Arena of nodes; leaves are replaceable in place.
    enum Node {
        Leaf,
        Op(OpKind, usize, usize),
    }
    let mut arena: Vec<Node> = vec![Node::Leaf];
    let mut leaves: Vec<usize> = vec![0];
    while leaves.len() < target {
        let slot = rng.gen_range(0..leaves.len());
        let node = leaves.swap_remove(slot);
        let kind = {
            let u: f64 = rng.gen();
            if u < settings.p_seq {
                OpKind::Seq
            } else if u < settings.p_seq + settings.p_and {
                OpKind::And
            } else {
                OpKind::Xor
            }
        };
        let left = arena.len();
        arena.push(Node::Leaf);
        let right = arena.len();
        arena.push(Node::Leaf);
        arena[node] = Node::Op(kind, left, right);
        leaves.push(left);
        leaves.push(right);
    }

    // Materialize left-to-right: silence flips, then labels in visit order.
    fn build(
        arena: &[Node],
        node: usize,
        rng: &mut impl Rng,
        p_silent: f64,
        next_label: &mut usize,
    ) -> ProcessTree {
        match arena[node] {
            Node::Leaf => {
                if p_silent > 0.0 && rng.gen::<f64>() < p_silent {
                    ProcessTree::Tau
                } else {
                    *next_label += 1;
                    ProcessTree::Leaf(Activity::new(format!("a{:02}", *next_label)))
                }
            }
            Node::Op(kind, l, r) => {
                let left = build(arena, l, rng, p_silent, next_label);
                let right = build(arena, r, rng, p_silent, next_label);
                match kind {
                    OpKind::Seq => ProcessTree::Seq(vec![left, right]),
                    OpKind::And => ProcessTree::And(vec![left, right]),
                    OpKind::Xor => ProcessTree::Xor(vec![left, right]),
                }
            }
        }
    }
    let mut next_label = 0;
    Ok(build(&arena, 0, &mut rng, settings.p_silent, &mut next_label))
}

fn realized_proportions(tree: &ProcessTree) -> [f64; 3] {
    let (seq, xor, and, _) = tree.operator_counts();
    let total = (seq + xor + and).max(1) as f64;
    [seq as f64 / total, and as f64 / total, xor as f64 / total]
}

/// Why a candidate was rejected.
#[derive(Debug, Default, Clone, Copy)]
struct Rejections {
    too_few_variants: usize,
    too_many_variants: usize,
    too_short: usize,
    intractable: usize,
}

/// Generates `n_candidates` trees (candidate `i` reseeded via the `Candidate`
/// stream of `seed`), keeps those passing `filter`, and returns the survivor
/// whose realized operator proportions lie closest (Euclidean) to the
/// settings; ties break by lower variant count, then generation order.
pub fn select_model(
    settings: &GenSettings,
    filter: &ModelFilter,
    n_candidates: usize,
    seed: u64,
) -> Result<SelectedModel> {
    settings.validate()?;
    filter.validate()?;
    if n_candidates == 0 {
        return Err(Error::EmptyInput("candidate budget"));
    }

    struct Survivor {
        distance: f64,
        variant_count: u64,
        index: usize,
        tree: ProcessTree,
        realized: [f64; 3],
        min_len: usize,
        max_len: usize,
    }

    let want = [settings.p_seq, settings.p_and, settings.p_xor];
    let cfg = EnumerationConfig::default();
    if filter.variant_range.1 > cfg.variant_ceiling as u64 {
        return Err(Error::InvalidConfig(format!(
            "variant range upper bound {} exceeds the enumeration ceiling {}; \
             the winner could not be certified by enumeration",
            filter.variant_range.1, cfg.variant_ceiling
        )));
    }
    let verdicts: Vec<std::result::Result<Survivor, &'static str>> = (0..n_candidates)
        .into_par_iter()
        .map(|i| {
            let mut candidate_settings = *settings;
            candidate_settings.seed = derive_seed(seed, Phase::Candidate, i as u64);
            let tree = generate_tree(&candidate_settings).expect("settings validated above");
            let stats = match tree_stats(&tree) {
                Some(s) => s,
                // Closed-form counting only fails on loops (never generated),
                // duplicate labels (never assigned) or astronomic counts.
                None => return Err("intractable"),
            };
            if stats.variant_count < filter.variant_range.0 as u128 {
                return Err("too_few");
            }
            if stats.variant_count > filter.variant_range.1 as u128 {
                return Err("too_many");
            }
            if stats.min_len <= filter.min_trace_len_exceeds {
                return Err("too_short");
            }
            let realized = realized_proportions(&tree);
            let distance = want
                .iter()
                .zip(realized.iter())
                .map(|(w, r)| (w - r) * (w - r))
                .sum::<f64>()
                .sqrt();
            Ok(Survivor {
                distance,
                variant_count: stats.variant_count as u64,
                index: i,
                tree,
                realized,
                min_len: stats.min_len,
                max_len: stats.max_len,
            })
        })
        .collect();

    let mut rejections = Rejections::default();
    let mut best: Option<Survivor> = None;
    for verdict in verdicts {
        match verdict {
            Err("too_few") => rejections.too_few_variants += 1,
            Err("too_many") => rejections.too_many_variants += 1,
            Err("too_short") => rejections.too_short += 1,
            Err(_) => rejections.intractable += 1,
            Ok(s) => {
                let better = match &best {
                    None => true,
                    Some(b) => {
                        (s.distance, s.variant_count, s.index)
                            < (b.distance, b.variant_count, b.index)
                    }
                };
                if better {
                    best = Some(s);
                }
            }
        }
    }

    let best = best.ok_or_else(|| {
        Error::NoCandidate(format!(
            "no tree passed the filter in {n_candidates} candidates \
             (variants below range: {}, above range: {}, min length ≤ {}: {}, intractable: {})",
            rejections.too_few_variants,
            rejections.too_many_variants,
            filter.min_trace_len_exceeds,
            rejections.too_short,
            rejections.intractable,
        ))
    })?;

    // The filter worked from closed-form statistics; re-enumerate the winner
    // to certify them.
    let enumerated = best.tree.enumerate_variants(&cfg)?;
    assert_eq!(
        enumerated.len() as u64,
        best.variant_count,
        "closed-form variant count disagrees with enumeration"
    );

    Ok(SelectedModel {
        tree: best.tree,
        realized_proportions: best.realized,
        variant_count: best.variant_count,
        min_trace_len: best.min_len,
        max_trace_len: best.max_len,
        candidate_index: best.index,
    })
}
