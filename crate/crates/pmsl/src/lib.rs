//! A laboratory for studying how sequence models capture the structure of
//! business processes.
//!
//! The pieces fit together as a pipeline:
//!
//! 1. [`model`] holds executable process models (workflow nets and process
//!    trees), six built-in reference models, exhaustive variant enumeration,
//!    and stochastic play-out of event logs.
//! 2. [`log`] is the event-log core: traces, variant tables, vocabularies and
//!    the prefix datasets used to train next-activity models.
//! 3. [`treegen`] grows random process trees under operator-mix settings and
//!    filters them into usable models.
//! 4. [`split`] deals control-flow variants into cross-validation folds.
//! 5. [`lstm`] is a from-scratch LSTM next-activity model (f64 throughout)
//!    with Adam, LR scheduling and early stopping.
//! 6. [`sim`] plays a trained model out into a simulated event log.
//! 7. [`metrics`] compares simulated logs against training/test logs with
//!    frequency-aware and absolute fitness / precision / generalization.
//! 8. [`inductive`] contains a directly-follows based process-tree miner used
//!    as a non-learned baseline.
//! 9. [`harness`] wires everything into reproducible campaigns, grid
//!    searches and SVG reports.

pub mod error;
pub mod harness;
pub mod inductive;
pub mod log;
pub mod lstm;
pub mod metrics;
pub mod model;
pub mod rng;
pub mod sim;
pub mod split;
pub mod treegen;

pub use error::{Error, Result};
