//! End-to-end smoke run of the full pipeline: play out a builtin model,
//! expand prefix windows, train a small sequence model, round-trip a
//! checkpoint, predict, and score one log against another.
//!
//! Run with `cargo run -p pmsl --release --example pipeline_smoke`.
//! Exits non-zero if any stage produces an implausible result, so it can
//! gate commits.

use pmsl::log::build_prefix_dataset;
use pmsl::lstm::{HyperParams, SequenceModel};
use pmsl::metrics::evaluate;
use pmsl::model::{builtin_model, EnumerationConfig, ProcessModel};

fn main() {
    let cfg = EnumerationConfig::default();
    let model = ProcessModel::Net(builtin_model(2).expect("builtin model 2"));

    let tr = model.playout_log(1000, 101, &cfg).expect("train play-out");
    let te = model.playout_log(250, 202, &cfg).expect("test play-out");
    let sim = model.playout_log(1250, 303, &cfg).expect("sim play-out");
    println!(
        "play-out: {} train / {} test traces, {} train variants",
        tr.len(),
        te.len(),
        tr.variant_table().len()
    );

    let (train_ds, val_ds) = build_prefix_dataset(&tr, 6, 7).expect("prefix split");
    println!(
        "prefix windows: {} train / {} validation",
        train_ds.len(),
        val_ds.len()
    );

    let hp = HyperParams {
        bidirectional: false,
        hidden_size: 16,
        prefix_len: 6,
        max_epochs: 4,
        seed: 9,
        ..HyperParams::default()
    };
    let mut m = SequenceModel::init(&hp, train_ds.vocabulary()).expect("init");
    let history = m.train(&train_ds, &val_ds).expect("train");
    let last = history.epochs.last().expect("at least one epoch");
    println!(
        "trained {} epochs: val_loss {:.4}, val_acc {:.3}",
        history.epochs.len(),
        last.val_loss,
        last.val_acc
    );
    if !(last.val_acc > 0.4) {
        eprintln!("FAIL: validation accuracy {:.3} <= 0.4", last.val_acc);
        std::process::exit(1);
    }

    let path = std::env::temp_dir().join("pmsl_pipeline_smoke.ckpt");
    m.save(&path).expect("save checkpoint");
    let reloaded = SequenceModel::load(&path).expect("load checkpoint");
    let _ = std::fs::remove_file(&path);
    let window = val_ds.input(0);
    let a = m.predict_next(window).expect("predict");
    let b = reloaded.predict_next(window).expect("predict reloaded");
    if a != b {
        eprintln!("FAIL: reloaded checkpoint predicts differently");
        std::process::exit(1);
    }
    println!(
        "checkpoint round-trip ok; first window max prob {:.3}",
        a.iter().cloned().fold(f64::MIN, f64::max)
    );

    let report = evaluate(&tr, &te, &sim, true).expect("metrics");
    println!(
        "self-play-out scores: F {:.3} P {:.3} G {:.3} (F_A {:.3} P_A {:.3} G_A {:.3})",
        report.f, report.p, report.g, report.f_a, report.p_a, report.g_a
    );
    if !(report.f > 0.7 && report.p > 0.7) {
        eprintln!("FAIL: a model's own play-out should score high against itself");
        std::process::exit(1);
    }
    println!("pipeline smoke passed");
}
