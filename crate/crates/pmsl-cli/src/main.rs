//! Command-line front end for the process-model laboratory.
//!
//! Every stage of the pipeline is its own subcommand — play-out, splitting,
//! training, simulation, scoring, tree mining — plus `run`/`grid`/`report`
//! for complete reproducible campaigns.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use pmsl::harness::{
    emit_report, run_campaign, run_grid, ExperimentConfig, FoldSpec, GridFilter, HpProfile,
    ModelSource,
};
use pmsl::inductive::{baseline_run, discover};
use pmsl::log::{build_prefix_dataset, EventLog};
use pmsl::lstm::{HyperParams, SequenceModel};
use pmsl::metrics::{evaluate, MetricReport};
use pmsl::model::{
    builtin_model, builtin_stats, EnumerationConfig, ProcessModel, ProcessTree,
};
use pmsl::rng::{derive_seed, Phase};
use pmsl::sim::{default_max_len, simulate_log, SimConfig};
use pmsl::split::make_folds;
use pmsl::treegen::{select_model, GenSettings, ModelFilter};

#[derive(Parser)]
#[command(name = "pmsl", version, about = "Process-model structure-learning laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Inspect or export the built-in reference models.
    Models {
        #[command(subcommand)]
        command: ModelsCommand,
    },
    /// Play a process model out into an event log.
    Playout(PlayoutArgs),
    /// Generate random process trees under an operator mix.
    GenTrees(GenTreesArgs),
    /// Deal the variants of a log into cross-validation folds.
    Split(SplitArgs),
    /// Train a next-activity model on a log (random 80/20 prefix split).
    Train(TrainArgs),
    /// Sample traces from a trained model checkpoint.
    Simulate(SimulateArgs),
    /// Score a simulated log against training and test logs.
    Metrics(MetricsArgs),
    /// Directly-follows tree mining (non-learned baseline).
    Im {
        #[command(subcommand)]
        command: ImCommand,
    },
    /// Run a fold campaign from a config file and/or flags.
    Run(RunArgs),
    /// Train the hyperparameter grid on the full log.
    Grid(GridArgs),
    /// Render SVG charts from campaign results files.
    Report(ReportArgs),
}

#[derive(Subcommand)]
enum ModelsCommand {
    /// Print the reference-model table.
    List,
    /// Write one built-in model as workflow-net JSON.
    Export {
        /// Model id (1-6).
        #[arg(long)]
        id: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct ModelRef {
    /// Use a built-in model (1-6).
    #[arg(long, conflicts_with = "tree")]
    builtin: Option<usize>,
    /// Use a process tree from its textual file format.
    #[arg(long)]
    tree: Option<PathBuf>,
}

impl ModelRef {
    fn source(&self) -> Result<ModelSource> {
        match (self.builtin, &self.tree) {
            (Some(id), None) => Ok(ModelSource::Builtin(id)),
            (None, Some(path)) => Ok(ModelSource::TreeFile(path.clone())),
            _ => bail!("pass exactly one of --builtin or --tree"),
        }
    }

    fn load(&self) -> Result<ProcessModel> {
        Ok(match self.source()? {
            ModelSource::Builtin(id) => ProcessModel::Net(builtin_model(id)?),
            ModelSource::TreeFile(path) => ProcessModel::Tree(
                ProcessTree::read_text(&path)
                    .with_context(|| format!("reading {}", path.display()))?,
            ),
        })
    }
}

#[derive(Args)]
struct EnumArgs {
    /// Marking-visit cap during enumeration and play-out.
    #[arg(long, default_value_t = 3)]
    visit_cap: usize,
    /// Abort enumeration beyond this many variants.
    #[arg(long, default_value_t = 100_000)]
    variant_ceiling: usize,
    /// Cap on loop redo entries (default: visit cap - 1).
    #[arg(long)]
    redo_cap: Option<usize>,
}

impl EnumArgs {
    fn config(&self) -> EnumerationConfig {
        EnumerationConfig {
            marking_visit_cap: self.visit_cap,
            variant_ceiling: self.variant_ceiling,
            loop_redo_cap: self.redo_cap,
        }
    }
}

#[derive(Args)]
struct PlayoutArgs {
    #[command(flatten)]
    model: ModelRef,
    /// Number of traces to sample.
    #[arg(long)]
    n: usize,
    #[arg(long)]
    seed: u64,
    /// Output event log (JSON lines).
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    enumeration: EnumArgs,
}

#[derive(Args)]
struct GenTreesArgs {
    /// How many trees to select.
    #[arg(long)]
    count: usize,
    /// Parallel-operator probability; choice gets 0.5 - p_and.
    #[arg(long)]
    p_and: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out_dir: PathBuf,
    /// Candidate trees generated per selected tree.
    #[arg(long, default_value_t = 100)]
    candidates: usize,
    /// Inclusive bounds on accepted variant counts.
    #[arg(long, default_value_t = 80)]
    variant_min: u64,
    #[arg(long, default_value_t = 160)]
    variant_max: u64,
    /// Shortest variant must be strictly longer than this.
    #[arg(long, default_value_t = 5)]
    min_len_exceeds: usize,
    /// Override the visible-activity target range.
    #[arg(long, default_value_t = 10)]
    act_min: usize,
    #[arg(long, default_value_t = 25)]
    act_max: usize,
    /// Probability that a leaf turns silent.
    #[arg(long, default_value_t = 0.0)]
    p_silent: f64,
}

#[derive(Args)]
struct SplitArgs {
    /// Input event log (JSON lines).
    #[arg(long)]
    log: PathBuf,
    /// Fold count; omit for leave-one-variant-out.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    seed: u64,
    /// Output fold plan (JSON).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ProfileArg {
    AccuracyBased,
    PostHoc,
}

impl ProfileArg {
    fn to_profile(self) -> HpProfile {
        match self {
            ProfileArg::AccuracyBased => HpProfile::AccuracyBased,
            ProfileArg::PostHoc => HpProfile::PostHoc,
        }
    }
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    log: PathBuf,
    #[arg(long)]
    prefix_len: usize,
    #[arg(long)]
    seed: u64,
    /// Directory for model.ckpt and history.csv.
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, value_enum, default_value = "accuracy-based")]
    profile: ProfileArg,
    // Optional overrides on the profile.
    #[arg(long)]
    hidden: Option<usize>,
    #[arg(long)]
    layers: Option<usize>,
    /// Disable the backward-reading direction.
    #[arg(long)]
    unidirectional: bool,
    #[arg(long)]
    max_epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    dropout: Option<f64>,
    #[arg(long)]
    l1: Option<f64>,
    #[arg(long)]
    l2: Option<f64>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Trained model checkpoint.
    #[arg(long)]
    checkpoint: PathBuf,
    /// Log that fixes the vocabulary and the default trace-length cap.
    #[arg(long)]
    reference_log: PathBuf,
    /// Traces to sample (default: as many as the reference log).
    #[arg(long)]
    n: Option<usize>,
    /// Length cap (default: twice the longest reference trace).
    #[arg(long)]
    max_len: Option<usize>,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct MetricsArgs {
    #[arg(long)]
    training: PathBuf,
    #[arg(long)]
    test: PathBuf,
    #[arg(long)]
    simulated: PathBuf,
    /// Fail instead of rescaling when the simulated size differs.
    #[arg(long)]
    no_rescale: bool,
}

#[derive(Subcommand)]
enum ImCommand {
    /// Mine a process tree from a log and write its textual form.
    Discover {
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Cross-validate the miner: discover per fold, play out, score.
    Baseline {
        #[arg(long)]
        log: PathBuf,
        /// Fold count; omit for leave-one-variant-out.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
        #[command(flatten)]
        enumeration: EnumArgs,
    },
}

#[derive(Args)]
struct FoldArgs {
    /// Leave-one-variant-out folds.
    #[arg(long, conflicts_with_all = ["k", "subsample"])]
    lovocv: bool,
    /// Classic k-fold over variants.
    #[arg(long, conflicts_with = "subsample")]
    k: Option<usize>,
    /// Random subset of the leave-one-variant-out folds.
    #[arg(long)]
    subsample: Option<usize>,
}

impl FoldArgs {
    fn spec(&self) -> Option<FoldSpec> {
        if self.lovocv {
            Some(FoldSpec::Lovocv)
        } else if let Some(k) = self.k {
            Some(FoldSpec::K(k))
        } else {
            self.subsample.map(FoldSpec::Subsample)
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (TOML); flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed (required; overrides the config).
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Wipe the output directory first.
    #[arg(long)]
    fresh: bool,
    #[command(flatten)]
    model: ModelRef,
    /// Play-out size = multiplier x number of language variants.
    #[arg(long)]
    multiplier: Option<usize>,
    #[command(flatten)]
    folds: FoldArgs,
    #[arg(long, value_enum)]
    profile: Option<ProfileArg>,
    #[arg(long)]
    prefix_len: Option<usize>,
    /// Folds trained in parallel.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct GridArgs {
    /// Experiment config (TOML); flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed (required; overrides the config).
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    fresh: bool,
    #[command(flatten)]
    model: ModelRef,
    #[arg(long)]
    multiplier: Option<usize>,
    #[arg(long)]
    prefix_len: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
    // Cell filter: a set axis keeps only matching cells.
    #[arg(long)]
    bidirectional: Option<bool>,
    #[arg(long)]
    layers: Option<usize>,
    #[arg(long)]
    hidden: Option<usize>,
    #[arg(long)]
    reg: Option<f64>,
    #[arg(long)]
    dropout: Option<f64>,
}

#[derive(Args)]
struct ReportArgs {
    /// Campaign results.csv files.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

fn read_log(path: &PathBuf) -> Result<EventLog> {
    EventLog::read_jsonl(path).with_context(|| format!("reading log {}", path.display()))
}

fn print_report(report: &MetricReport) {
    println!("fitness             F   {:.6}", report.f);
    println!("precision           P   {:.6}", report.p);
    println!("generalization      G   {:.6}", report.g);
    println!("absolute fitness    F_A {:.6}", report.f_a);
    println!("absolute precision  P_A {:.6}", report.p_a);
    println!("absolute general.   G_A {:.6}", report.g_a);
    println!(
        "sizes tr/te/sim         {}/{}/{}  variants {}/{}/{}  rescaled {}",
        report.size_tr,
        report.size_te,
        report.size_sim,
        report.variants_tr,
        report.variants_te,
        report.variants_sim,
        report.rescaled
    );
}

fn cmd_models(command: ModelsCommand) -> Result<()> {
    match command {
        ModelsCommand::List => {
            println!("id  variants  activities  trace_len  prefix_len  pattern");
            for s in builtin_stats() {
                let len = if s.min_trace_len == s.max_trace_len {
                    format!("{}", s.min_trace_len)
                } else {
                    format!("{}-{}", s.min_trace_len, s.max_trace_len)
                };
                println!(
                    "{:<3} {:<9} {:<11} {:<10} {:<11} {}",
                    s.id, s.variant_count, s.activity_count, len, s.prefix_len, s.pattern
                );
            }
        }
        ModelsCommand::Export { id, out } => {
            let net = builtin_model(id)?;
            net.write_json(&out)?;
            println!("wrote {}", out.display());
        }
    }
    Ok(())
}

fn cmd_playout(args: PlayoutArgs) -> Result<()> {
    let model = args.model.load()?;
    let log = model.playout_log(args.n, args.seed, &args.enumeration.config())?;
    log.write_jsonl(&args.out)?;
    println!(
        "wrote {} traces ({} variants) to {}",
        log.len(),
        log.variant_table().len(),
        args.out.display()
    );
    Ok(())
}

fn cmd_gen_trees(args: GenTreesArgs) -> Result<()> {
    let filter = ModelFilter {
        variant_range: (args.variant_min, args.variant_max),
        min_trace_len_exceeds: args.min_len_exceeds,
    };
    std::fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating {}", args.out_dir.display()))?;
    let mut selections = Vec::new();
    for i in 0..args.count {
        let seed = derive_seed(args.seed, Phase::Candidate, i as u64);
        let mut settings = GenSettings::half_seq(args.p_and, seed);
        settings.p_silent = args.p_silent;
        settings.activity_range = (args.act_min, args.act_max);
        let selected = select_model(&settings, &filter, args.candidates, seed)?;
        let path = args.out_dir.join(format!("tree-{i:02}.ptree"));
        selected.tree.write_text(&path)?;
        println!(
            "tree-{i:02}: {} variants, trace len {}-{}, candidate {}",
            selected.variant_count,
            selected.min_trace_len,
            selected.max_trace_len,
            selected.candidate_index
        );
        selections.push(selected);
    }
    let summary_path = args.out_dir.join("selection.json");
    let json = serde_json::to_string_pretty(&selections)?;
    std::fs::write(&summary_path, json)
        .with_context(|| format!("writing {}", summary_path.display()))?;
    println!("wrote {}", summary_path.display());
    Ok(())
}

fn cmd_split(args: SplitArgs) -> Result<()> {
    let log = read_log(&args.log)?;
    let table = log.variant_table();
    let k = args.k.unwrap_or(table.len());
    let plan = make_folds(&table, k, args.seed)?;
    plan.write_json(&args.out)?;
    println!(
        "dealt {} variants into {} folds, wrote {}",
        table.len(),
        plan.folds.len(),
        args.out.display()
    );
    Ok(())
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    let log = read_log(&args.log)?;
    let split_seed = derive_seed(args.seed, Phase::PrefixSplit, 0);
    let hp_seed = derive_seed(args.seed, Phase::Train, 0);
    let mut hp = match args.profile {
        ProfileArg::AccuracyBased => HyperParams::accuracy_based(args.prefix_len, hp_seed),
        ProfileArg::PostHoc => HyperParams::post_hoc(args.prefix_len, hp_seed),
    };
    if let Some(v) = args.hidden {
        hp.hidden_size = v;
    }
    if let Some(v) = args.layers {
        hp.num_layers = v;
    }
    if args.unidirectional {
        hp.bidirectional = false;
    }
    if let Some(v) = args.max_epochs {
        hp.max_epochs = v;
    }
    if let Some(v) = args.batch_size {
        hp.batch_size = v;
    }
    if let Some(v) = args.dropout {
        hp.dropout = v;
    }
    if let Some(v) = args.l1 {
        hp.l1 = v;
    }
    if let Some(v) = args.l2 {
        hp.l2 = v;
    }
    hp.validate()?;

    let (tr_ds, val_ds) = build_prefix_dataset(&log, args.prefix_len, split_seed)?;
    std::fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating {}", args.out_dir.display()))?;
    let mut model = SequenceModel::init(&hp, tr_ds.vocabulary())?;
    let history = model.train(&tr_ds, &val_ds)?;
    let ckpt = args.out_dir.join("model.ckpt");
    model.save(&ckpt)?;
    history.write_csv(args.out_dir.join("history.csv"))?;
    println!(
        "trained {} epochs (best {} at val acc {:.4}), wrote {}",
        history.epochs.len(),
        history.best_epoch,
        history.best_val_acc,
        ckpt.display()
    );
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let model = SequenceModel::load(&args.checkpoint)?;
    let reference = read_log(&args.reference_log)?;
    let cfg = SimConfig {
        n_traces: args.n.unwrap_or(reference.len()),
        max_len: args.max_len.unwrap_or(default_max_len(&reference)),
        seed: args.seed,
    };
    let sim = simulate_log(&model, reference.vocabulary(), &cfg)?;
    sim.write_jsonl(&args.out)?;
    println!(
        "simulated {} traces ({} variants) to {}",
        sim.len(),
        sim.variant_table().len(),
        args.out.display()
    );
    Ok(())
}

fn cmd_metrics(args: MetricsArgs) -> Result<()> {
    let tr = read_log(&args.training)?;
    let te = read_log(&args.test)?;
    let sim = read_log(&args.simulated)?;
    let report = evaluate(&tr, &te, &sim, !args.no_rescale)?;
    print_report(&report);
    Ok(())
}

fn cmd_im(command: ImCommand) -> Result<()> {
    match command {
        ImCommand::Discover { log, out } => {
            let log = read_log(&log)?;
            let tree = discover(&log);
            tree.write_text(&out)?;
            println!("{tree}");
            println!("wrote {}", out.display());
        }
        ImCommand::Baseline {
            log,
            k,
            seed,
            out_dir,
            enumeration,
        } => {
            let log = read_log(&log)?;
            let table = log.variant_table();
            let plan = make_folds(&table, k.unwrap_or(table.len()), seed)?;
            let rows = baseline_run(&log, &plan, &enumeration.config(), seed)?;
            let trees_dir = out_dir.join("trees");
            std::fs::create_dir_all(&trees_dir)
                .with_context(|| format!("creating {}", trees_dir.display()))?;
            let mut csv = format!("fold_id,{}\n", MetricReport::CSV_FIELDS);
            let mut sums = [0.0f64; 3];
            for row in &rows {
                row.tree.write_text(trees_dir.join(format!("{}.ptree", row.fold_id)))?;
                csv.push_str(&format!("{},{}\n", row.fold_id, row.report.csv_cells()));
                sums[0] += row.report.f;
                sums[1] += row.report.p;
                sums[2] += row.report.g;
            }
            let csv_path = out_dir.join("baseline.csv");
            std::fs::write(&csv_path, csv)
                .with_context(|| format!("writing {}", csv_path.display()))?;
            let n = rows.len() as f64;
            println!(
                "{} folds: mean F {:.4}  P {:.4}  G {:.4}; wrote {}",
                rows.len(),
                sums[0] / n,
                sums[1] / n,
                sums[2] / n,
                csv_path.display()
            );
        }
    }
    Ok(())
}

/// Builds the effective campaign/grid config from an optional TOML file
/// plus flag overrides.
fn effective_config(
    config: Option<&PathBuf>,
    model: &ModelRef,
    seed: u64,
    multiplier: Option<usize>,
    folds: Option<FoldSpec>,
    profile: Option<HpProfile>,
    prefix_len: Option<usize>,
    workers: Option<usize>,
) -> Result<ExperimentConfig> {
    let mut cfg = match config {
        Some(path) => ExperimentConfig::from_toml_file(path)
            .with_context(|| format!("loading config {}", path.display()))?,
        None => ExperimentConfig {
            model: model.source()?,
            log_size_multiplier: 100,
            folds: folds.clone().ok_or_else(|| {
                anyhow::anyhow!("without --config, pass one of --lovocv, --k or --subsample")
            })?,
            profile: profile
                .clone()
                .ok_or_else(|| anyhow::anyhow!("without --config, pass --profile"))?,
            prefix_len: None,
            seed: None,
            workers: 1,
        },
    };
    if config.is_some() {
        if let Ok(source) = model.source() {
            cfg.model = source;
        }
        if let Some(f) = folds {
            cfg.folds = f;
        }
        if let Some(p) = profile {
            cfg.profile = p;
        }
    }
    if let Some(m) = multiplier {
        cfg.log_size_multiplier = m;
    }
    if let Some(p) = prefix_len {
        cfg.prefix_len = Some(p);
    }
    if let Some(w) = workers {
        cfg.workers = w;
    }
    cfg.seed = Some(seed);
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let cfg = effective_config(
        args.config.as_ref(),
        &args.model,
        args.seed,
        args.multiplier,
        args.folds.spec(),
        args.profile.map(ProfileArg::to_profile),
        args.prefix_len,
        args.workers,
    )?;
    let summary = run_campaign(&cfg, &args.out, args.fresh)?;
    println!(
        "{} folds completed, results in {}",
        summary.completed,
        summary.results_csv.display()
    );
    if let Some([f, p, g, f_a, p_a, g_a]) = summary.mean {
        println!(
            "mean F {f:.4}  P {p:.4}  G {g:.4}  |  F_A {f_a:.4}  P_A {p_a:.4}  G_A {g_a:.4}"
        );
    }
    if !summary.failed.is_empty() {
        for (id, err) in &summary.failed {
            eprintln!("FAILED {id}: {err}");
        }
        bail!("{} folds failed", summary.failed.len());
    }
    Ok(())
}

fn cmd_grid(args: GridArgs) -> Result<()> {
    // Without a config file the grid needs no fold or profile flags: it
    // ignores fold specs and always trains the grid profile.
    let mut cfg = match &args.config {
        Some(_) => effective_config(
            args.config.as_ref(),
            &args.model,
            args.seed,
            args.multiplier,
            None,
            None,
            args.prefix_len,
            args.workers,
        )?,
        None => ExperimentConfig {
            model: args.model.source()?,
            log_size_multiplier: args.multiplier.unwrap_or(100),
            folds: FoldSpec::Lovocv,
            profile: HpProfile::Grid,
            prefix_len: args.prefix_len,
            seed: Some(args.seed),
            workers: args.workers.unwrap_or(1),
        },
    };
    cfg.profile = HpProfile::Grid;
    cfg.validate()?;
    let filter = GridFilter {
        bidirectional: args.bidirectional,
        num_layers: args.layers,
        hidden_size: args.hidden,
        reg: args.reg,
        dropout: args.dropout,
    };
    let summary = run_grid(&cfg, &filter, &args.out, args.fresh)?;
    println!(
        "{} cells completed, results in {}",
        summary.completed,
        summary.grid_csv.display()
    );
    if let Some((cell, acc)) = summary.best {
        println!("best cell {cell} at val acc {acc:.4}");
    }
    if !summary.failed.is_empty() {
        for (id, err) in &summary.failed {
            eprintln!("FAILED {id}: {err}");
        }
        bail!("{} cells failed", summary.failed.len());
    }
    Ok(())
}

fn cmd_report(args: ReportArgs) -> Result<()> {
    let summary = emit_report(&args.inputs, &args.out)?;
    println!(
        "{} series over {} points: {} and {}",
        summary.series,
        summary.points,
        summary.frequency_svg.display(),
        summary.absolute_svg.display()
    );
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Models { command } => cmd_models(command),
        Command::Playout(args) => cmd_playout(args),
        Command::GenTrees(args) => cmd_gen_trees(args),
        Command::Split(args) => cmd_split(args),
        Command::Train(args) => cmd_train(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Metrics(args) => cmd_metrics(args),
        Command::Im { command } => cmd_im(command),
        Command::Run(args) => cmd_run(args),
        Command::Grid(args) => cmd_grid(args),
        Command::Report(args) => cmd_report(args),
    }
}
