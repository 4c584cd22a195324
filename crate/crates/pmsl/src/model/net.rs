//! Workflow nets: Petri nets with a single source and sink place, labeled or
//! silent transitions, exhaustive variant enumeration and stochastic
//! play-out.
//!
//! Runs respect a marking-visit cap: along one execution, any marking may
//! occur at most [`EnumerationConfig::marking_visit_cap`] times, which keeps
//! cyclic nets finite (a structural loop's entry marking is occupied once per
//! body execution, so the default cap of 3 allows one to three iterations).

use std::collections::{BTreeSet, HashMap};
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::log::{Activity, EventLog, Trace, VariantTable};
use crate::model::EnumerationConfig;
use crate::rng::{derive_seed, rng_from_seed, Phase};

/// Token counts per place, indexed like [`WorkflowNet::place_names`].
pub type Marking = Vec<u16>;

/// A net transition: fires by consuming one token per input place and
/// producing one per output place. `label: None` marks a silent (tau) step.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Transition {
    pub name: String,
    pub label: Option<Activity>,
    pub inputs: Vec<usize>,
    pub outputs: Vec<usize>,
}

/// A place/transition net with designated initial and final markings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WorkflowNet {
    pub place_names: Vec<String>,
    pub transitions: Vec<Transition>,
    pub initial: Marking,
    pub final_marking: Marking,
}

impl WorkflowNet {
    pub fn n_places(&self) -> usize {
        self.place_names.len()
    }

    /// Indices of transitions enabled at `marking`.
    pub fn enabled(&self, marking: &Marking) -> Vec<usize> {
        self.transitions
            .iter()
            .enumerate()
            .filter(|(_, t)| t.inputs.iter().all(|&p| marking[p] > 0))
            .map(|(i, _)| i)
            .collect()
    }

    /// Marking after firing transition `t` (which must be enabled).
    pub fn fire(&self, marking: &Marking, t: usize) -> Marking {
        let mut next = marking.clone();
        for &p in &self.transitions[t].inputs {
            debug_assert!(next[p] > 0, "firing a disabled transition");
            next[p] -= 1;
        }
        for &p in &self.transitions[t].outputs {
            next[p] += 1;
        }
        next
    }

    /// Checks the single-source / single-sink shape: exactly one place
    /// without incoming arcs (carrying the initial token) and one without
    /// outgoing arcs (carrying the final token).
    pub fn check_workflow_structure(&self) -> Result<()> {
        let mut has_in = vec![false; self.n_places()];
        let mut has_out = vec![false; self.n_places()];
        for t in &self.transitions {
            for &p in &t.inputs {
                has_out[p] = true;
            }
            for &p in &t.outputs {
                has_in[p] = true;
            }
        }
        let sources: Vec<usize> = (0..self.n_places()).filter(|&p| !has_in[p]).collect();
        let sinks: Vec<usize> = (0..self.n_places()).filter(|&p| !has_out[p]).collect();
        if sources.len() != 1 || sinks.len() != 1 {
            return Err(Error::InvalidConfig(format!(
                "not a workflow net: {} source place(s), {} sink place(s)",
                sources.len(),
                sinks.len()
            )));
        }
        let mut want_initial = vec![0u16; self.n_places()];
        want_initial[sources[0]] = 1;
        let mut want_final = vec![0u16; self.n_places()];
        want_final[sinks[0]] = 1;
        if self.initial != want_initial || self.final_marking != want_final {
            return Err(Error::InvalidConfig(
                "initial/final marking must be exactly one token on the source/sink place".into(),
            ));
        }
        Ok(())
    }

    /// Exhaustively enumerates the distinct complete visible traces reachable
    /// under `cfg`, each reported with count 1.
    pub fn enumerate_variants(&self, cfg: &EnumerationConfig) -> Result<VariantTable> {
        let mut out: BTreeSet<Trace> = BTreeSet::new();
        let mut visits: HashMap<Marking, usize> = HashMap::new();
        visits.insert(self.initial.clone(), 1);
        let mut trace: Vec<Activity> = Vec::new();
        let mut steps: usize = 0;
        self.dfs(
            &self.initial.clone(),
            &mut visits,
            &mut trace,
            &mut out,
            cfg,
            &mut steps,
        )?;
        let counts = out.into_iter().map(|t| (t, 1u64)).collect::<std::collections::BTreeMap<_, _>>();
        let total = counts.len() as u64;
        Ok(VariantTable::from_counts(counts, total))
    }

    fn dfs(
        &self,
        marking: &Marking,
        visits: &mut HashMap<Marking, usize>,
        trace: &mut Vec<Activity>,
        out: &mut BTreeSet<Trace>,
        cfg: &EnumerationConfig,
        steps: &mut usize,
    ) -> Result<()> {
        if *marking == self.final_marking {
            if out.insert(trace.clone()) && out.len() > cfg.variant_ceiling {
                return Err(Error::VariantCeiling(cfg.variant_ceiling));
            }
            return Ok(());
        }
        for t in self.enabled(marking) {
            *steps += 1;
            if *steps > STATE_SPACE_GUARD {
                return Err(Error::StateSpaceGuard(STATE_SPACE_GUARD));
            }
            let next = self.fire(marking, t);
            let seen = visits.entry(next.clone()).or_insert(0);
            if *seen >= cfg.marking_visit_cap {
                continue;
            }
            *seen += 1;
            let visible = self.transitions[t].label.clone();
            if let Some(a) = visible.clone() {
                trace.push(a);
            }
            self.dfs(&next, visits, trace, out, cfg, steps)?;
            if visible.is_some() {
                trace.pop();
            }
            *visits.get_mut(&next).unwrap() -= 1;
        }
        Ok(())
    }

    /// Serializes the net structure (places, transitions with arcs, initial
    /// and final markings) as pretty JSON.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("net serialization cannot fail")
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    /// Renders the net in Graphviz DOT: circles for places, boxes for
    /// transitions, filled boxes for silent steps.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph workflow_net {\n  rankdir=LR;\n");
        for (i, name) in self.place_names.iter().enumerate() {
            let decor = if self.initial[i] > 0 {
                ", penwidth=2"
            } else if self.final_marking[i] > 0 {
                ", peripheries=2"
            } else {
                ""
            };
            s.push_str(&format!("  p{i} [shape=circle, label=\"{name}\"{decor}];\n"));
        }
        for (i, t) in self.transitions.iter().enumerate() {
            match &t.label {
                Some(a) => s.push_str(&format!("  t{i} [shape=box, label=\"{a}\"];\n")),
                None => s.push_str(&format!(
                    "  t{i} [shape=box, style=filled, fillcolor=black, label=\"\"];\n"
                )),
            }
        }
        for (i, t) in self.transitions.iter().enumerate() {
            for &p in &t.inputs {
                s.push_str(&format!("  p{p} -> t{i};\n"));
            }
            for &p in &t.outputs {
                s.push_str(&format!("  t{i} -> p{p};\n"));
            }
        }
        s.push_str("}\n");
        s
    }

    pub fn write_dot(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        file.write_all(self.to_dot().as_bytes())
            .map_err(|e| Error::io(path, e))
    }
}

/// Bail-out bound on move explorations per enumeration / play-out walk, an
/// insurance policy against pathological nets beyond the variant ceiling.
const STATE_SPACE_GUARD: usize = 50_000_000;

/// Retries allowed when a single play-out walk dead-ends or produces an
/// invisible (all-silent) trace.
const PLAYOUT_RETRIES: usize = 1_000;

/// Samples `n_traces` complete traces from the net: at every marking one of
/// the enabled, cap-respecting transitions is chosen uniformly at random.
/// Case ids are `case-<index>`; each trace draws from its own derived RNG
/// stream, so the log is independent of evaluation order.
pub fn playout_net(
    net: &WorkflowNet,
    n_traces: usize,
    seed: u64,
    cfg: &EnumerationConfig,
) -> Result<EventLog> {
    if n_traces == 0 {
        return Err(Error::InvalidConfig("cannot play out zero traces".into()));
    }
    let traces: Result<Vec<Trace>> = (0..n_traces)
        .into_par_iter()
        .map(|i| playout_one(net, derive_seed(seed, Phase::Playout, i as u64), cfg))
        .collect();
    EventLog::from_traces(traces?, "case")
}

fn playout_one(net: &WorkflowNet, seed: u64, cfg: &EnumerationConfig) -> Result<Trace> {
    let mut rng = rng_from_seed(seed);
    'attempt: for _ in 0..PLAYOUT_RETRIES {
        let mut marking = net.initial.clone();
        let mut visits: HashMap<Marking, usize> = HashMap::new();
        visits.insert(marking.clone(), 1);
        let mut trace: Trace = Vec::new();
        let mut steps = 0usize;
        while marking != net.final_marking {
            steps += 1;
            if steps > STATE_SPACE_GUARD {
                return Err(Error::StateSpaceGuard(STATE_SPACE_GUARD));
            }
            let mut moves: Vec<(usize, Marking)> = Vec::new();
            for t in net.enabled(&marking) {
                let next = net.fire(&marking, t);
                if visits.get(&next).copied().unwrap_or(0) < cfg.marking_visit_cap {
                    moves.push((t, next));
                }
            }
            if moves.is_empty() {
                // Dead end under the caps; restart this walk.
                continue 'attempt;
            }
            let pick = if moves.len() == 1 {
                0
            } else {
                use rand::Rng;
                rng.gen_range(0..moves.len())
            };
            let (t, next) = moves.swap_remove(pick);
            if let Some(a) = &net.transitions[t].label {
                trace.push(a.clone());
            }
            *visits.entry(next.clone()).or_insert(0) += 1;
            marking = next;
        }
        if trace.is_empty() {
            continue 'attempt; // logs carry no empty traces
        }
        return Ok(trace);
    }
    Err(Error::InvalidConfig(
        "play-out kept dead-ending or producing empty traces".into(),
    ))
}

// ---------------------------------------------------------------------------
// Builder
// ---------------------------------------------------------------------------

/// Incremental construction helper used by the built-in models and the
/// tree-to-net conversion.
#[derive(Debug, Default)]
pub struct NetBuilder {
    place_names: Vec<String>,
    transitions: Vec<Transition>,
}

impl NetBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a place named `p<i>` and returns its index.
    pub fn place(&mut self) -> usize {
        let i = self.place_names.len();
        self.place_names.push(format!("p{i}"));
        i
    }

    /// Adds a labeled transition.
    pub fn activity(&mut self, label: impl Into<Activity>, inputs: &[usize], outputs: &[usize]) {
        let label = label.into();
        self.transitions.push(Transition {
            name: format!("t{}", self.transitions.len()),
            label: Some(label),
            inputs: inputs.to_vec(),
            outputs: outputs.to_vec(),
        });
    }

    /// Adds a silent transition.
    pub fn tau(&mut self, inputs: &[usize], outputs: &[usize]) {
        self.transitions.push(Transition {
            name: format!("t{}", self.transitions.len()),
            label: None,
            inputs: inputs.to_vec(),
            outputs: outputs.to_vec(),
        });
    }

    /// Finalizes with one token on `source` (initial) and `sink` (final).
    pub fn build(self, source: usize, sink: usize) -> WorkflowNet {
        let n = self.place_names.len();
        let mut initial = vec![0u16; n];
        initial[source] = 1;
        let mut final_marking = vec![0u16; n];
        final_marking[sink] = 1;
        WorkflowNet {
            place_names: self.place_names,
            transitions: self.transitions,
            initial,
            final_marking,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::log::format_variant;

    /// `a` then a choice of `b` or `c`.
    fn xor_net() -> WorkflowNet {
        let mut b = NetBuilder::new();
        let p0 = b.place();
        let p1 = b.place();
        let p2 = b.place();
        b.activity("a", &[p0], &[p1]);
        b.activity("b", &[p1], &[p2]);
        b.activity("c", &[p1], &[p2]);
        b.build(p0, p2)
    }

    #[test]
    fn enumerates_choice_language() {
        let net = xor_net();
        net.check_workflow_structure().unwrap();
        let table = net.enumerate_variants(&EnumerationConfig::default()).unwrap();
        let variants: Vec<String> = table.variants().map(|v| format_variant(v)).collect();
        assert_eq!(variants, vec!["a|b", "a|c"]);
    }

    #[test]
    fn playout_stays_inside_language_and_is_seeded() {
        let net = xor_net();
        let cfg = EnumerationConfig::default();
        let lang = net.enumerate_variants(&cfg).unwrap();
        let log = playout_net(&net, 200, 9, &cfg).unwrap();
        for trace in log.traces() {
            assert!(lang.occ(trace) == 1, "escaped language: {}", format_variant(trace));
        }
        let again = playout_net(&net, 200, 9, &cfg).unwrap();
        assert_eq!(log.variant_table(), again.variant_table());
        let ids: Vec<&str> = log.entries().iter().take(2).map(|e| e.case_id.as_str()).collect();
        assert_eq!(ids, vec!["case-0", "case-1"]);
    }

    #[test]
    fn marking_visit_cap_bounds_loops() {
        // a, then loop body (b c) one or more times, exit with d.
        let mut b = NetBuilder::new();
        let p0 = b.place();
        let p1 = b.place();
        let p2 = b.place();
        let p3 = b.place();
        let p4 = b.place();
        b.activity("a", &[p0], &[p1]);
        b.activity("b", &[p1], &[p2]);
        b.activity("c", &[p2], &[p3]);
        b.tau(&[p3], &[p1]); // redo
        b.activity("d", &[p3], &[p4]); // exit
        let net = b.build(p0, p4);
        net.check_workflow_structure().unwrap();

        let mut cfg = EnumerationConfig::default();
        let table = net.enumerate_variants(&cfg).unwrap();
        let variants: Vec<String> = table.variants().map(|v| format_variant(v)).collect();
        assert_eq!(
            variants,
            vec!["a|b|c|b|c|b|c|d", "a|b|c|b|c|d", "a|b|c|d"],
            "cap 3 allows one to three body executions"
        );

        cfg.marking_visit_cap = 1;
        let table = net.enumerate_variants(&cfg).unwrap();
        assert_eq!(table.len(), 1);
    }

    #[test]
    fn variant_ceiling_guards_explosions() {
        // Nine parallel activities have 9! = 362,880 interleavings.
        let mut b = NetBuilder::new();
        let src = b.place();
        let snk = b.place();
        let mut starts = Vec::new();
        let mut ends = Vec::new();
        for i in 0..9 {
            let q = b.place();
            let r = b.place();
            b.activity(format!("x{i}"), &[q], &[r]);
            starts.push(q);
            ends.push(r);
        }
        b.tau(&[src], &starts);
        b.tau(&ends, &[snk]);
        let net = b.build(src, snk);
        let err = net.enumerate_variants(&EnumerationConfig::default()).unwrap_err();
        assert!(matches!(err, Error::VariantCeiling(100_000)), "{err}");
    }
}
