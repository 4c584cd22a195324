//! Acceptance gate: one test per numbered criterion in the project's
//! acceptance checklist. `cargo test --test acceptance` therefore prints one
//! pass/fail line per criterion; on failure the assertion message carries
//! every measured value so the miss is auditable from the test output alone.
//!
//! Criteria 4-6 and 8 evaluate full training campaigns. Those tests read the
//! result CSVs from `runs/` when present (the directories are produced by
//! `scripts/run-campaigns.sh` with the exact seeds hard-coded below) and
//! otherwise run the campaign in-process, which takes minutes to hours per
//! campaign. Everything is seeded: the numbers below are reproducible
//! bit-for-bit on any machine and worker count.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;

use pmsl::harness::{
    expand_grid, run_campaign, ExperimentConfig, FoldSpec, HpProfile, ModelSource, RunManifest,
    FOLD_CSV_HEADER, LEGAL_FOLD_COUNTS,
};
use pmsl::inductive::{baseline_run, discover};
use pmsl::log::{Activity, EventLog, Trace};
use pmsl::lstm::check_architecture;
use pmsl::metrics::evaluate;
use pmsl::model::{builtin_model, builtin_stats, EnumerationConfig, ProcessModel};
use pmsl::rng::{derive_seed, rng_from_seed, Phase};
use pmsl::split::make_folds;

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .ancestors()
        .nth(2)
        .expect("workspace root")
        .to_path_buf()
}

/// One non-aggregate row of a campaign results CSV.
struct FoldRow {
    profile: String,
    /// `[F, P, G, F_A, P_A, G_A]`.
    scores: [f64; 6],
}

fn read_fold_rows(path: &Path) -> Vec<FoldRow> {
    let text = std::fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("cannot read {}: {e}", path.display()));
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some(FOLD_CSV_HEADER),
        "results header mismatch in {}",
        path.display()
    );
    let mut rows = Vec::new();
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells.len(), 15, "malformed row in {}: {line}", path.display());
        if cells[1].starts_with("aggregate-") {
            continue;
        }
        let mut scores = [0.0f64; 6];
        for (i, slot) in scores.iter_mut().enumerate() {
            *slot = cells[5 + i]
                .parse()
                .unwrap_or_else(|e| panic!("bad number {:?} in {}: {e}", cells[5 + i], path.display()));
        }
        rows.push(FoldRow {
            profile: cells[2].to_string(),
            scores,
        });
    }
    assert!(!rows.is_empty(), "no fold rows in {}", path.display());
    rows
}

fn mean_of(rows: &[FoldRow], metric: usize) -> f64 {
    rows.iter().map(|r| r.scores[metric]).sum::<f64>() / rows.len() as f64
}

/// Returns the results CSV of the named campaign, running it first if the
/// output directory does not already hold a finished run with this seed.
fn ensure_campaign(config_name: &str, seed: u64, out_name: &str, workers: usize) -> PathBuf {
    let root = repo_root();
    let dir = root.join("runs").join(out_name);
    let results = dir.join("results.csv");
    if results.exists() {
        let manifest = RunManifest::read_json(dir.join("manifest.json"))
            .unwrap_or_else(|e| panic!("runs/{out_name} has results but no readable manifest: {e}"));
        assert_eq!(
            manifest.master_seed, seed,
            "runs/{out_name} was produced with seed {} but this criterion pins seed {seed}; \
             delete the directory to re-run",
            manifest.master_seed
        );
        return results;
    }
    let mut cfg = ExperimentConfig::from_toml_file(root.join("configs").join(config_name))
        .unwrap_or_else(|e| panic!("configs/{config_name}: {e}"));
    cfg.seed = Some(seed);
    cfg.workers = workers;
    let summary = run_campaign(&cfg, &dir, false).unwrap_or_else(|e| panic!("campaign {out_name}: {e}"));
    assert!(
        summary.failed.is_empty(),
        "campaign {out_name} had failing folds: {:?}",
        summary.failed
    );
    summary.results_csv
}

/// Criterion 1: the six built-in models reproduce the frozen statistics
/// table (variant counts, activity counts, trace-length ranges) in under
/// ten seconds.
#[test]
fn criterion_1_builtin_statistics_match_frozen_table() {
    let t = Instant::now();
    let expected_variants: [u64; 6] = [120, 128, 128, 64, 126, 27];
    let expected_activities: [usize; 6] = [13, 26, 27, 18, 24, 16];
    let expected_lengths: [(usize, usize); 6] =
        [(13, 13), (19, 19), (19, 19), (15, 18), (24, 24), (16, 28)];

    let cfg = EnumerationConfig::default();
    for (ix, stats) in builtin_stats().iter().enumerate() {
        let id = ix + 1;
        assert_eq!(stats.id, id);
        assert_eq!(
            stats.variant_count, expected_variants[ix],
            "frozen variant count for model {id}"
        );
        assert_eq!(
            stats.activity_count, expected_activities[ix],
            "frozen activity count for model {id}"
        );
        assert_eq!(
            (stats.min_trace_len, stats.max_trace_len),
            expected_lengths[ix],
            "frozen trace-length range for model {id}"
        );

        let net = builtin_model(id).expect("builtin model");
        let table = ProcessModel::Net(net)
            .enumerate_variants(&cfg)
            .expect("enumeration");
        assert_eq!(
            table.len() as u64,
            expected_variants[ix],
            "enumerated variant count for model {id}"
        );
        let mut acts = BTreeSet::new();
        let (mut min_len, mut max_len) = (usize::MAX, 0);
        for v in table.variants() {
            min_len = min_len.min(v.len());
            max_len = max_len.max(v.len());
            acts.extend(v.iter().cloned());
        }
        assert_eq!(acts.len(), expected_activities[ix], "enumerated activities for model {id}");
        assert_eq!(
            (min_len, max_len),
            expected_lengths[ix],
            "enumerated length range for model {id}"
        );
    }
    let elapsed = t.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:.2?}, budget 10s");
    println!("criterion 1 PASS ({elapsed:.2?}): all six built-in models match the frozen statistics table");
}

/// Plain-vector re-implementation of all six scores, used as an oracle.
/// It shares no code or data structures with the library: occurrence counts
/// come from linear scans over `Vec<Vec<String>>`.
struct NaiveScores {
    f: f64,
    p: f64,
    g: f64,
    f_a: f64,
    p_a: f64,
    g_a: f64,
}

fn naive_scores(tr: &[Vec<String>], te: &[Vec<String>], sim: &[Vec<String>]) -> NaiveScores {
    fn occ(log: &[Vec<String>], v: &[String]) -> f64 {
        log.iter().filter(|t| t.as_slice() == v).count() as f64
    }
    fn distinct(log: &[Vec<String>]) -> Vec<&Vec<String>> {
        let mut seen: Vec<&Vec<String>> = Vec::new();
        for t in log {
            if !seen.iter().any(|s| *s == t) {
                seen.push(t);
            }
        }
        seen
    }

    let reference = (tr.len() + te.len()) as f64;
    let scale = if sim.len() == tr.len() + te.len() {
        1.0
    } else {
        reference / sim.len() as f64
    };

    let f = distinct(tr)
        .iter()
        .map(|v| (occ(sim, v) * scale).min(occ(tr, v)))
        .sum::<f64>()
        / tr.len() as f64;
    let p = distinct(sim)
        .iter()
        .map(|v| (occ(sim, v) * scale).min(occ(tr, v) + occ(te, v)))
        .sum::<f64>()
        / (sim.len() as f64 * scale);
    let g = distinct(te)
        .iter()
        .map(|v| (occ(sim, v) * scale).min(occ(te, v)))
        .sum::<f64>()
        / te.len() as f64;

    let f_a = distinct(tr).iter().filter(|v| occ(sim, v) > 0.0).count() as f64
        / distinct(tr).len() as f64;
    let p_a = distinct(sim)
        .iter()
        .filter(|v| occ(tr, v) + occ(te, v) > 0.0)
        .count() as f64
        / distinct(sim).len() as f64;
    let g_a = distinct(te).iter().filter(|v| occ(sim, v) > 0.0).count() as f64
        / distinct(te).len() as f64;

    NaiveScores { f, p, g, f_a, p_a, g_a }
}

fn to_log(traces: &[Vec<String>], prefix: &str) -> EventLog {
    let traces: Vec<Trace> = traces
        .iter()
        .map(|t| t.iter().map(Activity::new).collect())
        .collect();
    EventLog::from_traces(traces, prefix).expect("log")
}

fn gen_traces<R: Rng>(rng: &mut R, n: usize, n_act: usize) -> Vec<Vec<String>> {
    const LABELS: [&str; 5] = ["a", "b", "c", "d", "e"];
    (0..n)
        .map(|_| {
            let len = rng.gen_range(1..=6usize);
            (0..len)
                .map(|_| LABELS[rng.gen_range(0..n_act)].to_string())
                .collect()
        })
        .collect()
}

/// Criterion 2: on 200 random log triples (up to 5 activities, up to 50
/// traces per log) every metric agrees with an independent naive oracle to
/// 1e-12, in under five seconds.
#[test]
fn criterion_2_metrics_match_naive_oracle() {
    let t = Instant::now();
    let mut rng = rng_from_seed(derive_seed(2, Phase::Candidate, 0));

    for case in 0..200 {
        let n_act = rng.gen_range(1..=5usize);
        let tr_n = rng.gen_range(1..=50usize);
        let te_n = rng.gen_range(1..=50usize);
        let tr = gen_traces(&mut rng, tr_n, n_act);
        let te = gen_traces(&mut rng, te_n, n_act);
        // Half the cases exercise the matched-size path (scale = 1), half
        // the rescaled path.
        let sim_n = if case % 2 == 0 {
            tr_n + te_n
        } else {
            rng.gen_range(1..=50usize)
        };
        let sim = gen_traces(&mut rng, sim_n, n_act);

        let report = evaluate(&to_log(&tr, "tr"), &to_log(&te, "te"), &to_log(&sim, "sim"), true)
            .expect("evaluate");
        let oracle = naive_scores(&tr, &te, &sim);

        let pairs = [
            ("F", report.f, oracle.f),
            ("P", report.p, oracle.p),
            ("G", report.g, oracle.g),
            ("F_A", report.f_a, oracle.f_a),
            ("P_A", report.p_a, oracle.p_a),
            ("G_A", report.g_a, oracle.g_a),
        ];
        for (name, lib, naive) in pairs {
            assert!(
                (lib - naive).abs() <= 1e-12,
                "case {case}: {name} diverges from oracle: library {lib:.17} vs naive {naive:.17} \
                 (|tr|={tr_n}, |te|={te_n}, |sim|={sim_n})"
            );
        }
    }
    let elapsed = t.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:.2?}, budget 5s");
    println!("criterion 2 PASS ({elapsed:.2?}): 200 random triples agree with the naive oracle to 1e-12");
}

/// Criterion 3: analytic gradients match central differences (step 1e-5) to
/// a relative error below 1e-4 on all four architecture corners
/// (uni/bidirectional x 1/2 layers, dropout 0), in under a minute.
#[test]
fn criterion_3_gradients_match_finite_differences() {
    let t = Instant::now();
    for bidirectional in [false, true] {
        for num_layers in [1usize, 2] {
            let outcome = check_architecture(bidirectional, num_layers, 0.0, 3);
            assert!(
                outcome.max_rel_err < 1e-4,
                "bidirectional={bidirectional} layers={num_layers}: max relative error {:.3e} \
                 (worst tensor {}) >= 1e-4 over {} parameters",
                outcome.max_rel_err,
                outcome.worst_tensor,
                outcome.params_checked
            );
        }
    }
    let elapsed = t.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:.2?}, budget 60s");
    println!("criterion 3 PASS ({elapsed:.2?}): all four architecture corners under 1e-4 relative error");
}

/// Criterion 4: on the concurrency model (8 subsampled leave-one-variant-out
/// folds, 12,000 traces), the accuracy-tuned profile memorizes (mean G
/// below 0.10) while the generalization-tuned profile reproduces unseen
/// interleavings (mean G above 0.50), and both profiles keep mean F and P
/// at or above 0.85.
#[test]
fn criterion_4_profile_generalization_gap_on_concurrency_model() {
    let acc = read_fold_rows(&ensure_campaign(
        "model1-sub8-accuracy.toml",
        101,
        "model1-sub8-accuracy",
        1,
    ));
    let post = read_fold_rows(&ensure_campaign(
        "model1-sub8-posthoc.toml",
        102,
        "model1-sub8-posthoc",
        1,
    ));
    assert!(acc.iter().all(|r| r.profile == "accuracy_based"));
    assert!(post.iter().all(|r| r.profile == "post_hoc"));

    let (acc_f, acc_p, acc_g) = (mean_of(&acc, 0), mean_of(&acc, 1), mean_of(&acc, 2));
    let (post_f, post_p, post_g) = (mean_of(&post, 0), mean_of(&post, 1), mean_of(&post, 2));

    let mut misses = Vec::new();
    let mut check = |label: &str, ok: bool| {
        if !ok {
            misses.push(label.to_string());
        }
    };
    check(&format!("accuracy mean G {acc_g:.4} < 0.10"), acc_g < 0.10);
    check(&format!("post-hoc mean G {post_g:.4} > 0.50"), post_g > 0.50);
    check(&format!("accuracy mean F {acc_f:.4} >= 0.85"), acc_f >= 0.85);
    check(&format!("accuracy mean P {acc_p:.4} >= 0.85"), acc_p >= 0.85);
    check(&format!("post-hoc mean F {post_f:.4} >= 0.85"), post_f >= 0.85);
    check(&format!("post-hoc mean P {post_p:.4} >= 0.85"), post_p >= 0.85);
    assert!(
        misses.is_empty(),
        "criterion 4 misses: {misses:?} \
         (accuracy F/P/G = {acc_f:.4}/{acc_p:.4}/{acc_g:.4}, \
          post-hoc F/P/G = {post_f:.4}/{post_p:.4}/{post_g:.4})"
    );
    println!(
        "criterion 4 PASS: accuracy F/P/G = {acc_f:.4}/{acc_p:.4}/{acc_g:.4}, \
         post-hoc F/P/G = {post_f:.4}/{post_p:.4}/{post_g:.4}"
    );
}

/// Criterion 5: on the choice model (8 subsampled leave-one-variant-out
/// folds), even the accuracy-tuned profile generalizes: mean G above 0.5
/// and every held-out variant reproduced (mean G_A exactly 1.0).
#[test]
fn criterion_5_choice_model_generalizes_without_regularization() {
    let rows = read_fold_rows(&ensure_campaign(
        "model2-sub8-accuracy.toml",
        103,
        "model2-sub8-accuracy",
        1,
    ));
    let g = mean_of(&rows, 2);
    let g_a = mean_of(&rows, 5);
    assert!(
        g > 0.5 && g_a == 1.0,
        "criterion 5 misses: mean G {g:.4} (need > 0.5), mean G_A {g_a:.4} (need exactly 1.0)"
    );
    println!("criterion 5 PASS: accuracy-profile mean G {g:.4} > 0.5, mean G_A = 1.0");
}

/// Criterion 6: training-data completeness degrades generalization. Along
/// the fold sequence {leave-one-variant-out (8 subsampled), 8 folds,
/// 2 folds} with the generalization-tuned profile on the choice model,
/// G drops by at least 0.2 from the first to the last setting and P never
/// increases.
#[test]
fn criterion_6_incompleteness_degrades_generalization() {
    let sub8 = read_fold_rows(&ensure_campaign(
        "model2-sub8-posthoc.toml",
        104,
        "model2-sub8-posthoc",
        1,
    ));
    let k8 = read_fold_rows(&ensure_campaign(
        "model2-k8-posthoc.toml",
        105,
        "model2-k8-posthoc",
        1,
    ));
    let k2 = read_fold_rows(&ensure_campaign(
        "model2-k2-posthoc.toml",
        106,
        "model2-k2-posthoc",
        1,
    ));
    let (g_sub8, g_k8, g_k2) = (mean_of(&sub8, 2), mean_of(&k8, 2), mean_of(&k2, 2));
    let (p_sub8, p_k8, p_k2) = (mean_of(&sub8, 1), mean_of(&k8, 1), mean_of(&k2, 1));

    let mut misses = Vec::new();
    if g_sub8 - g_k2 < 0.2 {
        misses.push(format!(
            "G drop {:.4} (leave-one-out {g_sub8:.4} -> 2 folds {g_k2:.4}) < 0.2",
            g_sub8 - g_k2
        ));
    }
    if !(p_sub8 >= p_k8 && p_k8 >= p_k2) {
        misses.push(format!(
            "P not non-increasing: {p_sub8:.4} -> {p_k8:.4} -> {p_k2:.4}"
        ));
    }
    assert!(
        misses.is_empty(),
        "criterion 6 misses: {misses:?} (G sequence {g_sub8:.4}/{g_k8:.4}/{g_k2:.4}, \
         P sequence {p_sub8:.4}/{p_k8:.4}/{p_k2:.4})"
    );
    println!(
        "criterion 6 PASS: G {g_sub8:.4} -> {g_k8:.4} -> {g_k2:.4} (drop {:.4}), \
         P {p_sub8:.4} -> {p_k8:.4} -> {p_k2:.4}",
        g_sub8 - g_k2
    );
}

/// Criterion 7a: the miner recovers the concurrency model from a 12,000-trace
/// play-out: the discovered tree's language is exactly the 120 true variants,
/// the baseline pipeline scores perfect absolute metrics on every legal fold
/// count (leave-one-variant-out included), and a 12,000-trace play-out of the
/// discovered tree keeps all frequency metrics at or above 0.95 against the
/// log. Budget: five minutes.
#[test]
fn criterion_7a_miner_recovers_concurrency_model() {
    let t = Instant::now();
    let cfg = EnumerationConfig::default();
    let model = ProcessModel::Net(builtin_model(1).expect("builtin model 1"));
    let truth = model.enumerate_variants(&cfg).expect("enumeration");
    assert_eq!(truth.len(), 120);

    let log = model
        .playout_log(12_000, derive_seed(7, Phase::Playout, 0), &cfg)
        .expect("play-out");
    let table = log.variant_table();
    assert_eq!(
        table.len(),
        120,
        "12,000-trace play-out did not cover all 120 variants"
    );

    let tree = discover(&log);
    let tree_vars = ProcessModel::Tree(tree.clone())
        .enumerate_variants(&cfg)
        .expect("tree enumeration");
    assert_eq!(
        tree_vars.len(),
        120,
        "discovered tree generates {} variants, expected exactly 120",
        tree_vars.len()
    );
    assert!(
        truth.variants().all(|v| tree_vars.occ(v) == 1),
        "discovered tree's language differs from the true variant set"
    );

    // Absolute metrics are perfect on every legal fold count plus full
    // leave-one-variant-out (120 folds).
    for k in LEGAL_FOLD_COUNTS.iter().copied().chain([table.len()]) {
        let plan = make_folds(&table, k, derive_seed(7, Phase::FoldPlan, k as u64)).expect("plan");
        let rows =
            baseline_run(&log, &plan, &cfg, derive_seed(7, Phase::Playout, k as u64)).expect("baseline");
        for row in &rows {
            let r = &row.report;
            assert!(
                r.f_a == 1.0 && r.p_a == 1.0 && r.g_a == 1.0,
                "k={k} {}: absolute metrics not perfect (F_A={}, P_A={}, G_A={})",
                row.fold_id,
                r.f_a,
                r.p_a,
                r.g_a
            );
        }
    }

    // Frequency metrics of a tree play-out against the full log.
    let sim = ProcessModel::Tree(tree)
        .playout_log(12_000, derive_seed(7, Phase::Playout, 1), &cfg)
        .expect("tree play-out");
    let rep = evaluate(&log, &log, &sim, true).expect("evaluate");
    let elapsed = t.elapsed();
    assert!(elapsed.as_secs_f64() < 300.0, "took {elapsed:.2?}, budget 300s");
    assert!(
        rep.f >= 0.95 && rep.p >= 0.95 && rep.g >= 0.95,
        "frequency metrics below 0.95 at play-out size 12,000: \
         F={:.6}, P={:.6}, G={:.6} (two independent 12,000-trace samples of a \
         uniform 120-variant language overlap with expectation about 0.944, \
         so this threshold sits about one standard deviation above the \
         sampling noise floor)",
        rep.f,
        rep.p,
        rep.g
    );
    println!(
        "criterion 7a PASS ({elapsed:.2?}): exact language recovery, perfect absolute metrics \
         on all fold counts, frequency F/P/G = {:.4}/{:.4}/{:.4}",
        rep.f, rep.p, rep.g
    );
}

/// Criterion 7b: on the choice model whose final choice mirrors its first,
/// two-fold baselines are expected to overfit: fitness at or above 0.95 with
/// generalization at or below 0.05. Budget: five minutes.
#[test]
fn criterion_7b_miner_overfits_mirrored_choice_at_two_folds() {
    let t = Instant::now();
    let cfg = EnumerationConfig::default();
    let model = ProcessModel::Net(builtin_model(3).expect("builtin model 3"));
    let log = model
        .playout_log(12_800, derive_seed(9, Phase::Playout, 0), &cfg)
        .expect("play-out");
    let table = log.variant_table();
    let plan = make_folds(&table, 2, derive_seed(9, Phase::FoldPlan, 0)).expect("plan");
    let rows = baseline_run(&log, &plan, &cfg, derive_seed(9, Phase::Playout, 1)).expect("baseline");

    let f = rows.iter().map(|r| r.report.f).sum::<f64>() / rows.len() as f64;
    let g = rows.iter().map(|r| r.report.g).sum::<f64>() / rows.len() as f64;
    let elapsed = t.elapsed();
    assert!(elapsed.as_secs_f64() < 300.0, "took {elapsed:.2?}, budget 300s");
    assert!(
        f >= 0.95 && g <= 0.05,
        "two-fold baselines did not overfit as required: mean F = {f:.4} (need >= 0.95), \
         mean G = {g:.4} (need <= 0.05). The miner keeps every directly-follows edge even \
         when trained on half the variants, so it rediscovers the same free-choice tree as \
         on the full log; that tree generates all mirrored-choice variants, which caps F \
         near 0.5 and keeps G far above 0.05."
    );
    println!("criterion 7b PASS ({elapsed:.2?}): mean F {f:.4} >= 0.95, mean G {g:.4} <= 0.05");
}

/// Criterion 8: campaign result CSVs are byte-identical across worker counts
/// and across re-runs that resume from an existing directory (checked on the
/// reduced two-fold campaign).
#[test]
fn criterion_8_campaign_outputs_are_byte_identical() {
    let w1 = ensure_campaign("model1-k2-accuracy.toml", 108, "model1-k2-accuracy-w1", 1);
    let w2 = ensure_campaign("model1-k2-accuracy.toml", 108, "model1-k2-accuracy-w2", 2);
    let bytes_w1 = std::fs::read(&w1).expect("read w1 results");
    let bytes_w2 = std::fs::read(&w2).expect("read w2 results");
    assert_eq!(
        bytes_w1, bytes_w2,
        "results differ between 1-worker and 2-worker runs of the same campaign"
    );

    // A re-run over the finished directory reassembles the CSV from the
    // per-fold rows; it must reproduce the same bytes.
    let root = repo_root();
    let mut cfg = ExperimentConfig::from_toml_file(root.join("configs/model1-k2-accuracy.toml"))
        .expect("config");
    cfg.seed = Some(108);
    let summary = run_campaign(&cfg, root.join("runs/model1-k2-accuracy-w1"), false).expect("re-run");
    assert!(summary.failed.is_empty());
    let re_read = std::fs::read(&w1).expect("re-read w1 results");
    assert_eq!(bytes_w1, re_read, "re-running over a finished directory changed results.csv");

    println!(
        "criterion 8 PASS: {} result bytes identical across worker counts and re-runs",
        bytes_w1.len()
    );
}

/// Criterion 9: the largest configuration the checklist describes (full
/// leave-one-variant-out over a 100x play-out with the 192-cell
/// hyper-parameter grid) is declared out of this machine's compute budget;
/// the harness nonetheless accepts it, so the declaration is about wall
/// clock, not capability.
#[test]
fn criterion_9_full_scale_configuration_is_supported() {
    let grid = expand_grid();
    assert_eq!(grid.len(), 192, "hyper-parameter grid must hold 192 cells");

    let full_scale = ExperimentConfig {
        model: ModelSource::Builtin(2),
        log_size_multiplier: 100,
        folds: FoldSpec::Lovocv,
        profile: HpProfile::Grid,
        prefix_len: None,
        seed: Some(1),
        workers: 4,
    };
    full_scale.validate().expect("full-scale configuration must validate");
    for k in LEGAL_FOLD_COUNTS {
        FoldSpec::K(k).validate().expect("legal fold count");
    }

    println!(
        "criterion 9 PASS: full leave-one-variant-out x 192-cell grid validates; running it \
         (128 folds x 192 cells x ~2-4 min of single-core training per cell, roughly one \
         CPU-year) is declared out of this machine's budget and is not attempted"
    );
}
