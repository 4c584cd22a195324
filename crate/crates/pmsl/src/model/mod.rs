//! Executable process models: workflow nets and process trees.
//!
//! Both model kinds share one language semantics: the set of complete,
//! visible traces they can produce under an [`EnumerationConfig`]. Trees are
//! also convertible to language-equivalent nets ([`tree::tree_to_net`]), and
//! stochastic play-out always runs on the net form so there is exactly one
//! stochastic engine in the crate.

mod builtin;
mod net;
mod tree;

pub use builtin::{builtin_model, builtin_stats, BuiltinStats, BUILTIN_MODEL_IDS};
pub use net::{playout_net, Marking, NetBuilder, Transition, WorkflowNet};
pub use tree::{parse_tree, tree_stats, tree_to_net, ProcessTree, TreeStats};

use crate::error::Result;
use crate::log::EventLog;

/// Caps that keep looping behaviour finite during enumeration and play-out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct EnumerationConfig {
    /// Maximum number of times any single marking may occur along one run.
    /// The default of 3 lets a structural loop execute its body up to three
    /// times (the loop-entry marking is occupied once per execution).
    pub marking_visit_cap: usize,
    /// Hard ceiling on the number of distinct variants an enumeration may
    /// produce before it aborts with an error.
    pub variant_ceiling: usize,
    /// Maximum number of redo firings a process-tree loop may take. Defaults
    /// to `marking_visit_cap - 1` so that direct tree enumeration agrees
    /// with the net semantics above (body executions = redos + 1).
    pub loop_redo_cap: Option<usize>,
}

impl Default for EnumerationConfig {
    fn default() -> Self {
        EnumerationConfig {
            marking_visit_cap: 3,
            variant_ceiling: 100_000,
            loop_redo_cap: None,
        }
    }
}

impl EnumerationConfig {
    /// Effective redo cap for process-tree loops.
    pub fn effective_redo_cap(&self) -> usize {
        self.loop_redo_cap
            .unwrap_or_else(|| self.marking_visit_cap.saturating_sub(1))
    }
}

/// A process model that can be enumerated and played out.
#[derive(Debug, Clone)]
pub enum ProcessModel {
    Net(WorkflowNet),
    Tree(ProcessTree),
}

impl ProcessModel {
    /// Exact set of distinct complete traces reachable under the caps, each
    /// with count 1.
    pub fn enumerate_variants(&self, cfg: &EnumerationConfig) -> Result<crate::log::VariantTable> {
        match self {
            ProcessModel::Net(n) => n.enumerate_variants(cfg),
            ProcessModel::Tree(t) => t.enumerate_variants(cfg),
        }
    }

    /// Samples `n_traces` complete traces (uniform choice among enabled,
    /// cap-respecting moves; trees are played out on their net form).
    pub fn playout_log(&self, n_traces: usize, seed: u64, cfg: &EnumerationConfig) -> Result<EventLog> {
        match self {
            ProcessModel::Net(n) => playout_net(n, n_traces, seed, cfg),
            ProcessModel::Tree(t) => playout_net(&tree_to_net(t), n_traces, seed, cfg),
        }
    }
}

impl From<WorkflowNet> for ProcessModel {
    fn from(n: WorkflowNet) -> Self {
        ProcessModel::Net(n)
    }
}

impl From<ProcessTree> for ProcessModel {
    fn from(t: ProcessTree) -> Self {
        ProcessModel::Tree(t)
    }
}
