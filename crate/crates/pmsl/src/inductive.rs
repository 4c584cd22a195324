//! Baseline process discovery: the basic inductive algorithm with no
//! frequency filtering. A directly-follows graph is split by the first cut
//! that applies — exclusive, sequence, parallel, then loop — recursing on
//! projected sub-logs; when nothing applies the result is the maximally
//! permissive "flower" (a loop over a choice of every activity).
//!
//! Sub-log projection keeps empty projected traces: they are the evidence
//! that a part is optional and become a choice with the silent leaf.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use crate::error::Result;
use crate::log::{Activity, EventLog};
use crate::metrics::{evaluate, MetricReport};
use crate::model::{EnumerationConfig, ProcessModel, ProcessTree};
use crate::rng::{derive_seed, Phase};
use crate::split::{split_log, FoldPlan};

// ---------------------------------------------------------------------------
// Directly-follows graphs
// ---------------------------------------------------------------------------

/// Adjacency counts of a log: who directly follows whom, and which
/// activities open and close traces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectlyFollowsGraph {
    /// All activities of the log, sorted.
    pub nodes: Vec<Activity>,
    /// `(a, b) -> n`: `b` directly followed `a` in `n` adjacent pairs.
    pub edges: BTreeMap<(Activity, Activity), u64>,
    /// First activities of traces, with occurrence counts.
    pub starts: BTreeMap<Activity, u64>,
    /// Last activities of traces, with occurrence counts.
    pub ends: BTreeMap<Activity, u64>,
}

/// Counts adjacent activity pairs and trace boundary activities.
pub fn build_dfg(log: &EventLog) -> DirectlyFollowsGraph {
    let labels: Vec<Activity> = log.vocabulary().activities().to_vec();
    let (sub, _) = sublog_of(log);
    let dfg = Dfg::of(&sub);
    DirectlyFollowsGraph {
        nodes: labels.clone(),
        edges: dfg
            .edges
            .iter()
            .map(|(&(a, b), &n)| ((labels[a].clone(), labels[b].clone()), n))
            .collect(),
        starts: dfg
            .starts
            .iter()
            .map(|(&a, &n)| (labels[a].clone(), n))
            .collect(),
        ends: dfg
            .ends
            .iter()
            .map(|(&a, &n)| (labels[a].clone(), n))
            .collect(),
    }
}

// ---------------------------------------------------------------------------
// Discovery
// ---------------------------------------------------------------------------

/// Discovers a process tree for the log. Never fails: when no cut applies
/// the flower fall-through accepts any ordering of the activities seen.
pub fn discover(log: &EventLog) -> ProcessTree {
    let (sub, labels) = sublog_of(log);
    discover_rec(&sub, &labels)
}

/// Traces as global activity ids with occurrence counts. Unlike a full
/// event log this may hold empty traces.
type SubLog = BTreeMap<Vec<usize>, u64>;

fn sublog_of(log: &EventLog) -> (SubLog, Vec<Activity>) {
    let vocab = log.vocabulary();
    let labels: Vec<Activity> = vocab.activities().to_vec();
    let mut sub = SubLog::new();
    for entry in log.entries() {
        let ids: Vec<usize> = entry
            .activities
            .iter()
            .map(|a| vocab.target_index(a).expect("log label in own vocabulary") as usize)
            .collect();
        *sub.entry(ids).or_default() += 1;
    }
    (sub, labels)
}

fn discover_rec(sub: &SubLog, labels: &[Activity]) -> ProcessTree {
    if sub.is_empty() {
        return ProcessTree::Tau;
    }

    // Empty traces: the rest of the behaviour is optional.
    let n_empty: u64 = sub.get(&Vec::new()).copied().unwrap_or(0);
    let total: u64 = sub.values().sum();
    if n_empty == total {
        return ProcessTree::Tau;
    }
    if n_empty > 0 {
        let mut rest = sub.clone();
        rest.remove(&Vec::new());
        return ProcessTree::Xor(vec![ProcessTree::Tau, discover_rec(&rest, labels)]);
    }

    // Single activity, each trace exactly one occurrence.
    let alphabet: BTreeSet<usize> = sub.keys().flatten().copied().collect();
    if alphabet.len() == 1 {
        let a = *alphabet.first().expect("non-empty alphabet");
        if sub.keys().all(|t| t.len() == 1) {
            return ProcessTree::Leaf(labels[a].clone());
        }
    }

    let dfg = Dfg::of(sub);
    if let Some(classes) = exclusive_cut(&dfg) {
        let parts = project_exclusive(sub, &classes);
        return ProcessTree::Xor(
            parts.iter().map(|p| discover_rec(p, labels)).collect(),
        );
    }
    if let Some(parts) = sequence_cut(&dfg) {
        let logs = project_filtering(sub, &parts);
        return ProcessTree::Seq(
            logs.iter().map(|p| discover_rec(p, labels)).collect(),
        );
    }
    if let Some(classes) = parallel_cut(&dfg) {
        let logs = project_filtering(sub, &classes);
        return ProcessTree::And(
            logs.iter().map(|p| discover_rec(p, labels)).collect(),
        );
    }
    if let Some((do_part, redo_parts)) = loop_cut(&dfg) {
        let (do_log, redo_logs) = project_loop(sub, &do_part, &redo_parts);
        let redo_children: Vec<ProcessTree> =
            redo_logs.iter().map(|p| discover_rec(p, labels)).collect();
        let redo = if redo_children.len() == 1 {
            redo_children.into_iter().next().expect("one child")
        } else {
            ProcessTree::Xor(redo_children)
        };
        return ProcessTree::Loop(
            Box::new(discover_rec(&do_log, labels)),
            Box::new(redo),
        );
    }

    flower(&alphabet, labels)
}

/// The maximally permissive fall-through: loop over a choice of every
/// activity, so any non-empty ordering replays (up to the loop cap).
fn flower(alphabet: &BTreeSet<usize>, labels: &[Activity]) -> ProcessTree {
    let mut leaves: Vec<ProcessTree> = alphabet
        .iter()
        .map(|&a| ProcessTree::Leaf(labels[a].clone()))
        .collect();
    let choice = if leaves.len() == 1 {
        leaves.pop().expect("one leaf")
    } else {
        ProcessTree::Xor(leaves)
    };
    ProcessTree::Loop(Box::new(choice), Box::new(ProcessTree::Tau))
}

// ---------------------------------------------------------------------------
// The directly-follows graph in id space, plus the four cuts
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Default)]
struct Dfg {
    nodes: BTreeSet<usize>,
    edges: BTreeMap<(usize, usize), u64>,
    starts: BTreeMap<usize, u64>,
    ends: BTreeMap<usize, u64>,
}

impl Dfg {
    /// Ignores empty traces; cut detection never sees them.
    fn of(sub: &SubLog) -> Dfg {
        let mut dfg = Dfg::default();
        for (trace, &n) in sub {
            if trace.is_empty() {
                continue;
            }
            dfg.nodes.extend(trace.iter().copied());
            *dfg.starts.entry(trace[0]).or_default() += n;
            *dfg.ends.entry(*trace.last().expect("non-empty")).or_default() += n;
            for pair in trace.windows(2) {
                *dfg.edges.entry((pair[0], pair[1])).or_default() += n;
            }
        }
        dfg
    }

    fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains_key(&(a, b))
    }
}

/// Connected components over an arbitrary symmetric adjacency relation,
/// ordered by smallest member.
fn components(
    nodes: &BTreeSet<usize>,
    adjacent: impl Fn(usize, usize) -> bool,
) -> Vec<BTreeSet<usize>> {
    let mut unseen: BTreeSet<usize> = nodes.clone();
    let mut out = Vec::new();
    while let Some(&root) = unseen.first() {
        let mut comp = BTreeSet::new();
        let mut stack = vec![root];
        unseen.remove(&root);
        while let Some(u) = stack.pop() {
            comp.insert(u);
            let next: Vec<usize> = unseen
                .iter()
                .copied()
                .filter(|&v| adjacent(u, v) || adjacent(v, u))
                .collect();
            for v in next {
                unseen.remove(&v);
                stack.push(v);
            }
        }
        out.push(comp);
    }
    out
}

/// Weakly disconnected parts of the graph; `None` unless there are ≥ 2.
fn exclusive_cut(dfg: &Dfg) -> Option<Vec<BTreeSet<usize>>> {
    let comps = components(&dfg.nodes, |a, b| dfg.has_edge(a, b));
    (comps.len() >= 2).then_some(comps)
}

/// Strongly connected components, as sets ordered by smallest member.
fn sccs(dfg: &Dfg) -> Vec<BTreeSet<usize>> {
    // Kosaraju: forward DFS finish order, then reverse-graph sweeps.
    let nodes: Vec<usize> = dfg.nodes.iter().copied().collect();
    let mut finished = Vec::new();
    let mut seen = BTreeSet::new();
    for &root in &nodes {
        if seen.contains(&root) {
            continue;
        }
        // Iterative DFS recording exit order.
        let mut stack = vec![(root, false)];
        while let Some((u, expanded)) = stack.pop() {
            if expanded {
                finished.push(u);
                continue;
            }
            if !seen.insert(u) {
                continue;
            }
            stack.push((u, true));
            for &v in &nodes {
                if dfg.has_edge(u, v) && !seen.contains(&v) {
                    stack.push((v, false));
                }
            }
        }
    }
    let mut assigned = BTreeSet::new();
    let mut comps = Vec::new();
    for &root in finished.iter().rev() {
        if assigned.contains(&root) {
            continue;
        }
        let mut comp = BTreeSet::new();
        let mut stack = vec![root];
        while let Some(u) = stack.pop() {
            if !assigned.insert(u) {
                continue;
            }
            comp.insert(u);
            for &v in &nodes {
                if dfg.has_edge(v, u) && !assigned.contains(&v) {
                    stack.push(v);
                }
            }
        }
        comps.push(comp);
    }
    comps.sort_by_key(|c| *c.first().expect("non-empty component"));
    comps
}

/// Orders the graph into parts where every edge points forward. Parts start
/// as strongly connected components; incomparable or mutually reachable
/// parts merge until what remains is a strict chain.
fn sequence_cut(dfg: &Dfg) -> Option<Vec<BTreeSet<usize>>> {
    let mut parts = sccs(dfg);
    if parts.len() < 2 {
        return None;
    }

    // Transitive reachability between parts, refreshed after each merge.
    loop {
        let n = parts.len();
        let mut reach = vec![vec![false; n]; n];
        for i in 0..n {
            for j in 0..n {
                if i != j
                    && parts[i]
                        .iter()
                        .any(|&a| parts[j].iter().any(|&b| dfg.has_edge(a, b)))
                {
                    reach[i][j] = true;
                }
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if reach[i][k] && reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }

        let mut merge = None;
        'search: for i in 0..n {
            for j in i + 1..n {
                if reach[i][j] == reach[j][i] {
                    merge = Some((i, j));
                    break 'search;
                }
            }
        }
        match merge {
            Some((i, j)) => {
                let absorbed = parts.remove(j);
                parts[i].extend(absorbed);
                if parts.len() < 2 {
                    return None;
                }
            }
            None => {
                // Strict chain: order by how many parts each one reaches.
                let mut order: Vec<usize> = (0..n).collect();
                order.sort_by_key(|&i| n - reach[i].iter().filter(|&&r| r).count());
                return Some(order.into_iter().map(|i| parts[i].clone()).collect());
            }
        }
    }
}

/// Groups activities so that every cross-group pair is connected in both
/// directions and every group sees a trace start and a trace end.
fn parallel_cut(dfg: &Dfg) -> Option<Vec<BTreeSet<usize>>> {
    // Two activities must share a group unless mutually connected.
    let mut classes = components(&dfg.nodes, |a, b| {
        !(dfg.has_edge(a, b) && dfg.has_edge(b, a))
    });
    if classes.len() < 2 {
        return None;
    }

    // Groups without a boundary activity cannot stand alone; fold each into
    // the first group that has both.
    let has_boundary = |c: &BTreeSet<usize>| {
        c.iter().any(|a| dfg.starts.contains_key(a))
            && c.iter().any(|a| dfg.ends.contains_key(a))
    };
    classes.iter().position(has_boundary)?;
    let mut merged: Vec<BTreeSet<usize>> = Vec::new();
    let mut host_slot = None;
    let mut deficient: Vec<BTreeSet<usize>> = Vec::new();
    for class in classes.drain(..) {
        if has_boundary(&class) {
            host_slot.get_or_insert(merged.len());
            merged.push(class);
        } else {
            deficient.push(class);
        }
    }
    let host_slot = host_slot.expect("position() found a boundary class");
    for class in deficient {
        merged[host_slot].extend(class);
    }
    merged.sort_by_key(|c| *c.first().expect("non-empty class"));
    (merged.len() >= 2).then_some(merged)
}

/// Splits into a body holding every start and end activity plus redo parts
/// that leave from ends and re-enter at starts. Violating redo candidates
/// are folded into the body until the boundary conditions hold.
fn loop_cut(dfg: &Dfg) -> Option<(BTreeSet<usize>, Vec<BTreeSet<usize>>)> {
    let starts: BTreeSet<usize> = dfg.starts.keys().copied().collect();
    let ends: BTreeSet<usize> = dfg.ends.keys().copied().collect();
    let mut do_part: BTreeSet<usize> = starts.union(&ends).copied().collect();

    loop {
        let rest: BTreeSet<usize> = dfg.nodes.difference(&do_part).copied().collect();
        if rest.is_empty() {
            return None;
        }
        let comps = components(&rest, |a, b| dfg.has_edge(a, b));

        let violates = |comp: &BTreeSet<usize>| -> bool {
            let mut entries = BTreeSet::new();
            let mut exits = BTreeSet::new();
            for &c in comp {
                for &d in &do_part {
                    if dfg.has_edge(d, c) {
                        if !ends.contains(&d) {
                            return true; // leaves the body from a non-end
                        }
                        entries.insert(c);
                    }
                    if dfg.has_edge(c, d) {
                        if !starts.contains(&d) {
                            return true; // re-enters at a non-start
                        }
                        exits.insert(c);
                    }
                }
            }
            // Redo boundaries must connect to every end and every start,
            // otherwise the loop would forbid observed combinations.
            entries
                .iter()
                .any(|&c| ends.iter().any(|&e| !dfg.has_edge(e, c)))
                || exits
                    .iter()
                    .any(|&c| starts.iter().any(|&s| !dfg.has_edge(c, s)))
        };

        let bad: Vec<BTreeSet<usize>> =
            comps.iter().filter(|c| violates(c)).cloned().collect();
        if bad.is_empty() {
            return Some((do_part, comps));
        }
        for comp in bad {
            do_part.extend(comp);
        }
    }
}

// ---------------------------------------------------------------------------
// Projections
// ---------------------------------------------------------------------------

/// Each trace belongs wholly to one class; empty traces cannot reach here.
fn project_exclusive(sub: &SubLog, classes: &[BTreeSet<usize>]) -> Vec<SubLog> {
    let mut out = vec![SubLog::new(); classes.len()];
    for (trace, &n) in sub {
        let class = classes
            .iter()
            .position(|c| c.contains(&trace[0]))
            .expect("trace activity in some class");
        debug_assert!(trace.iter().all(|a| classes[class].contains(a)));
        *out[class].entry(trace.clone()).or_default() += n;
    }
    out
}

/// Projects every trace onto each part by filtering; empty projections are
/// kept as optionality evidence.
fn project_filtering(sub: &SubLog, parts: &[BTreeSet<usize>]) -> Vec<SubLog> {
    let mut out = vec![SubLog::new(); parts.len()];
    for (trace, &n) in sub {
        for (part, log) in parts.iter().zip(&mut out) {
            let projected: Vec<usize> = trace
                .iter()
                .copied()
                .filter(|a| part.contains(a))
                .collect();
            *log.entry(projected).or_default() += n;
        }
    }
    out
}

/// Splits traces into maximal segments per part: body segments feed the do
/// log, redo segments feed their component's log.
fn project_loop(
    sub: &SubLog,
    do_part: &BTreeSet<usize>,
    redo_parts: &[BTreeSet<usize>],
) -> (SubLog, Vec<SubLog>) {
    let mut do_log = SubLog::new();
    let mut redo_logs = vec![SubLog::new(); redo_parts.len()];
    let part_of = |a: usize| -> usize {
        if do_part.contains(&a) {
            0
        } else {
            1 + redo_parts
                .iter()
                .position(|p| p.contains(&a))
                .expect("activity in some part")
        }
    };
    for (trace, &n) in sub {
        let mut segment = Vec::new();
        let mut current = part_of(trace[0]);
        for &a in trace {
            let p = part_of(a);
            if p != current {
                let log = if current == 0 {
                    &mut do_log
                } else {
                    &mut redo_logs[current - 1]
                };
                *log.entry(std::mem::take(&mut segment)).or_default() += n;
                current = p;
            }
            segment.push(a);
        }
        let log = if current == 0 {
            &mut do_log
        } else {
            &mut redo_logs[current - 1]
        };
        *log.entry(segment).or_default() += n;
    }
    (do_log, redo_logs)
}

// ---------------------------------------------------------------------------
// Baseline experiment
// ---------------------------------------------------------------------------

/// One fold of the discovery baseline: the tree found on the training log
/// and its scores after play-out.
#[derive(Debug, Clone)]
pub struct BaselineRow {
    pub fold_id: String,
    pub tree: ProcessTree,
    pub report: MetricReport,
}

/// For each fold: discover on the training log, play out as many traces as
/// the whole log holds, and score. Loops re-enter with probability 1/2 at
/// each round up to the configured cap.
pub fn baseline_run(
    log: &EventLog,
    plan: &FoldPlan,
    cfg: &EnumerationConfig,
    seed: u64,
) -> Result<Vec<BaselineRow>> {
    let mut rows = Vec::with_capacity(plan.folds.len());
    for (i, fold) in plan.folds.iter().enumerate() {
        let held: BTreeSet<_> = fold.iter().cloned().collect();
        let split = split_log(log, &held)?;
        let tree = discover(&split.training_log);
        let n = split.training_log.len() + split.test_log.len();
        let sim = ProcessModel::Tree(tree.clone()).playout_log(
            n,
            derive_seed(seed, Phase::Playout, i as u64),
            cfg,
        )?;
        let report = evaluate(&split.training_log, &split.test_log, &sim, true)?;
        rows.push(BaselineRow {
            fold_id: format!("fold-{i}"),
            tree,
            report,
        });
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use crate::log::Trace;
    use crate::model::builtin_model;
    use crate::split::make_folds;

    fn act(s: &str) -> Activity {
        Activity::new(s)
    }

    /// A log from labelled traces given as space-separated strings.
    fn log_of(traces: &[&str]) -> EventLog {
        let traces: Vec<Trace> = traces
            .iter()
            .map(|t| t.split_whitespace().map(act).collect())
            .collect();
        EventLog::from_traces(traces, "case").unwrap()
    }

    #[test]
    fn dfg_counts_adjacent_pairs_and_boundaries() {
        let dfg = build_dfg(&log_of(&["A B", "A B"]));
        assert_eq!(dfg.edges.len(), 1);
        assert_eq!(dfg.edges[&(act("A"), act("B"))], 2);
        assert_eq!(dfg.starts[&act("A")], 2);
        assert_eq!(dfg.ends[&act("B")], 2);
    }

    #[test]
    fn single_activity_trace_has_no_edges() {
        let dfg = build_dfg(&log_of(&["A"]));
        assert!(dfg.edges.is_empty());
        assert_eq!(dfg.starts[&act("A")], 1);
        assert_eq!(dfg.ends[&act("A")], 1);
    }

    #[test]
    fn concurrent_block_is_pairwise_bidirectional_in_the_dfg() {
        let net = builtin_model(1).unwrap();
        let log = ProcessModel::Net(net)
            .playout_log(2000, 5, &EnumerationConfig::default())
            .unwrap();
        let dfg = build_dfg(&log);
        let block: Vec<Activity> = (5..=9).map(|i| act(&format!("a{i:02}"))).collect();
        for a in &block {
            for b in &block {
                if a != b {
                    assert!(
                        dfg.edges.contains_key(&(a.clone(), b.clone())),
                        "missing {a:?} -> {b:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn pure_sequence_is_discovered_as_a_sequence() {
        let tree = discover(&log_of(&["A B C"]));
        assert_eq!(
            tree,
            ProcessTree::Seq(vec![
                ProcessTree::Leaf(act("A")),
                ProcessTree::Leaf(act("B")),
                ProcessTree::Leaf(act("C")),
            ])
        );
    }

    #[test]
    fn interleaved_pair_is_discovered_as_parallel() {
        let tree = discover(&log_of(&["A B", "B A"]));
        assert_eq!(
            tree,
            ProcessTree::And(vec![
                ProcessTree::Leaf(act("A")),
                ProcessTree::Leaf(act("B")),
            ])
        );
    }

    #[test]
    fn disjoint_variants_are_discovered_as_a_choice() {
        let tree = discover(&log_of(&["A", "B"]));
        assert_eq!(
            tree,
            ProcessTree::Xor(vec![
                ProcessTree::Leaf(act("A")),
                ProcessTree::Leaf(act("B")),
            ])
        );
    }

    #[test]
    fn skippable_middle_becomes_optional() {
        let tree = discover(&log_of(&["A C", "A B C"]));
        assert_eq!(
            tree,
            ProcessTree::Seq(vec![
                ProcessTree::Leaf(act("A")),
                ProcessTree::Xor(vec![ProcessTree::Tau, ProcessTree::Leaf(act("B"))]),
                ProcessTree::Leaf(act("C")),
            ])
        );
    }

    #[test]
    fn returning_activity_is_discovered_as_a_loop() {
        let tree = discover(&log_of(&["A B A"]));
        assert_eq!(
            tree,
            ProcessTree::Loop(
                Box::new(ProcessTree::Leaf(act("A"))),
                Box::new(ProcessTree::Leaf(act("B"))),
            )
        );
    }

    #[test]
    fn uncuttable_log_falls_through_to_the_flower() {
        let tree = discover(&log_of(&["A A"]));
        assert_eq!(
            tree,
            ProcessTree::Loop(
                Box::new(ProcessTree::Leaf(act("A"))),
                Box::new(ProcessTree::Tau),
            )
        );
    }

    #[test]
    fn flower_playout_replays_its_training_log() {
        // No cut applies, so discovery falls through; the flower must still
        // reproduce every training variant given a generous play-out.
        let log = log_of(&["A A", "A"]);
        let tree = discover(&log);
        assert_eq!(
            tree,
            ProcessTree::Loop(
                Box::new(ProcessTree::Leaf(act("A"))),
                Box::new(ProcessTree::Tau),
            )
        );
        let cfg = EnumerationConfig::default();
        let n = 100 * log.variant_table().len();
        let sim = ProcessModel::Tree(tree).playout_log(n, 11, &cfg).unwrap();
        let report = evaluate(&log, &log, &sim, true).unwrap();
        assert_eq!(report.f_a, 1.0);
    }

    #[test]
    fn discovered_tree_replays_the_concurrent_model_exactly() {
        let net = builtin_model(1).unwrap();
        let cfg = EnumerationConfig::default();
        let reference = net.enumerate_variants(&cfg).unwrap();
        let traces: Vec<Trace> = reference.variants().cloned().collect();
        assert_eq!(traces.len(), 120);

        let log = EventLog::from_traces(traces, "case").unwrap();
        let tree = discover(&log);
        let found = tree.enumerate_variants(&cfg).unwrap();
        assert_eq!(found.len(), 120);
        for v in reference.variants() {
            assert!(found.occ(v) > 0, "variant missing from discovery");
        }
    }

    #[test]
    fn baseline_rows_cover_every_fold_and_are_seed_deterministic() {
        let log = log_of(&["A B", "A C", "A D", "B C", "B D", "C D"]);
        let plan = make_folds(&log.variant_table(), 3, 5).unwrap();
        let rows = baseline_run(&log, &plan, &EnumerationConfig::default(), 9).unwrap();
        assert_eq!(rows.len(), 3);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.fold_id, format!("fold-{i}"));
            for x in [row.report.f, row.report.p, row.report.g, row.report.f_a] {
                assert!((0.0..=1.0).contains(&x), "score {x} out of range");
            }
        }
        let again = baseline_run(&log, &plan, &EnumerationConfig::default(), 9).unwrap();
        for (a, b) in rows.iter().zip(&again) {
            assert_eq!(a.tree, b.tree);
            assert_eq!(a.report, b.report);
        }
    }
}
