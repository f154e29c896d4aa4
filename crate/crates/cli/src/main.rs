//! `guesslab` command-line tool.

mod input;
mod output;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use guesslab::cpc_sim::{
    gate_error_trials, run_program, sample_size_experiment, tape_token, CalibrationExperiment, Program,
    SampleSizeConfig, Tmp,
};
use guesslab::petri_net::{
    analyze, coarsen_colors, coarsen_marking, reduced_net, refine_colors, Color, Injection, NetDocument, Partition,
    Scheduler, Simulator, StateKind,
};
use guesslab::qm_model::{construct_fitting_model, perfect_fit_residual, OutcomeRecord, PhaseAssignment};
use guesslab::stat_distance::{statistical_distance, Distribution};

use input::{apply_overrides, parse_list, parse_overrides, read_json, read_net, Malformed};
use output::{OutputDir, RunManifest, TOOL, VERSION};

#[derive(Parser, Debug)]
#[command(
    name = "guesslab",
    version,
    about = "Quantum model fitting, colored nets and process-control experiments"
)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct Common {
    /// Directory for output files.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Random seed; falls back to GUESSLAB_SEED, then 0.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Replace existing output files.
    #[arg(long, global = true)]
    force: bool,
    /// Configuration override `key=value`; dotted keys reach nested fields.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Verb {
    /// Check a net file and report its shape.
    NetValidate { net: PathBuf },
    /// Fire a net under a scheduler and write the firing trace.
    NetSimulate {
        net: PathBuf,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        /// Event priority list; without it events are chosen at random.
        #[arg(long, value_delimiter = ',')]
        priority: Option<Vec<String>>,
        /// JSON list of `{"step", "state", "color"}` injections.
        #[arg(long)]
        inject: Option<PathBuf>,
    },
    /// Reachability, liveness and safety of the net's internal part.
    NetAnalyze {
        net: PathBuf,
        /// Give up after this many reachable markings.
        #[arg(long, default_value_t = 100_000)]
        bound: usize,
    },
    /// Split events by a partition of state colors.
    NetRefine {
        net: PathBuf,
        /// JSON object mapping state ids to lists of color blocks.
        #[arg(long)]
        partition: PathBuf,
    },
    /// Replace all colors by black tokens.
    NetCoarsen { net: PathBuf },
    /// Build models that reproduce a record's frequencies exactly.
    FitModels {
        #[arg(long)]
        record: PathBuf,
        #[arg(long, value_enum, default_value_t = Phases::Zero)]
        phases: Phases,
        #[arg(long, default_value_t = 1)]
        count: usize,
        /// Hilbert space dimension; defaults to the most outcomes of any command.
        #[arg(long)]
        dim: Option<usize>,
    },
    /// Statistical distance between two distributions, in radians.
    Distance {
        #[arg(long)]
        p: String,
        #[arg(long)]
        q: String,
    },
    /// Trials needed to tell apart gates at spectral distance ε.
    SampleSize {
        #[arg(long, default_value = "0.2,0.1,0.05,0.025")]
        eps: String,
        #[arg(long, default_value_t = 0.95)]
        power: f64,
        #[arg(long)]
        repetitions: Option<usize>,
    },
    /// Run a calibration experiment from a JSON config.
    Calibrate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Composite error of perturbed gate sequences.
    GateError {
        #[arg(long, default_value = "1,10,50")]
        k: String,
        #[arg(long, default_value = "0.001,0.01")]
        eps: String,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 100)]
        draws: usize,
    },
    /// Run a rule-table program on the process-control machine.
    TmpRun {
        #[arg(long)]
        program: PathBuf,
        /// Scientist tokens, one per clock cycle.
        #[arg(long, value_delimiter = ',')]
        inputs: Vec<String>,
        /// Initial tape, one symbol per character, `_` for blank.
        #[arg(long)]
        tape: Option<String>,
        #[arg(long, default_value_t = 0)]
        head: i64,
        #[arg(long, default_value_t = 10_000)]
        budget: usize,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Phases {
    Zero,
    Random,
}

impl Verb {
    fn name(&self) -> &'static str {
        match self {
            Verb::NetValidate { .. } => "net-validate",
            Verb::NetSimulate { .. } => "net-simulate",
            Verb::NetAnalyze { .. } => "net-analyze",
            Verb::NetRefine { .. } => "net-refine",
            Verb::NetCoarsen { .. } => "net-coarsen",
            Verb::FitModels { .. } => "fit-models",
            Verb::Distance { .. } => "distance",
            Verb::SampleSize { .. } => "sample-size",
            Verb::Calibrate { .. } => "calibrate",
            Verb::GateError { .. } => "gate-error",
            Verb::TmpRun { .. } => "tmp-run",
        }
    }

    fn inputs(&self) -> Vec<String> {
        let show = |p: &Path| p.display().to_string();
        match self {
            Verb::NetValidate { net } | Verb::NetCoarsen { net } | Verb::NetAnalyze { net, .. } => vec![show(net)],
            Verb::NetSimulate { net, inject, .. } => {
                std::iter::once(show(net)).chain(inject.as_deref().map(show)).collect()
            }
            Verb::NetRefine { net, partition } => vec![show(net), show(partition)],
            Verb::FitModels { record, .. } => vec![show(record)],
            Verb::Calibrate { config } => vec![show(config)],
            Verb::TmpRun { program, .. } => vec![show(program)],
            Verb::Distance { .. } | Verb::SampleSize { .. } | Verb::GateError { .. } => vec![],
        }
    }
}

/// Seed given on the command line or in the environment, if any.
fn explicit_seed(flag: Option<u64>) -> Result<Option<u64>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var("GUESSLAB_SEED") {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| anyhow!("GUESSLAB_SEED={s:?} is not an unsigned integer")),
        Err(_) => Ok(None),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if let Some(m) = e.downcast_ref::<Malformed>() {
                eprintln!("error: {m}");
            } else {
                eprintln!("error: {e:#}");
            }
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let explicit = explicit_seed(cli.common.seed)?;
    let overrides = parse_overrides(&cli.common.overrides)?;
    let mut manifest = RunManifest {
        tool: TOOL,
        version: VERSION,
        verb: cli.verb.name().to_string(),
        inputs: cli.verb.inputs(),
        output_dir: cli.common.out.display().to_string(),
        seed: explicit.unwrap_or(0),
        overrides: overrides.clone(),
    };
    if let Verb::Calibrate { config } = &cli.verb {
        let experiment = calibration_experiment(config, &overrides, explicit)?;
        manifest.seed = experiment.seed;
        let mut out = OutputDir::new(&cli.common.out, cli.common.force, manifest);
        return calibrate(&mut out, experiment);
    }
    let mut out = OutputDir::new(&cli.common.out, cli.common.force, manifest);
    let seed = out.manifest().seed;
    match cli.verb {
        Verb::NetValidate { net } => net_validate(&net),
        Verb::NetSimulate {
            net,
            steps,
            priority,
            inject,
        } => net_simulate(&mut out, &net, steps, priority, inject.as_deref(), seed),
        Verb::NetAnalyze { net, bound } => net_analyze(&mut out, &net, bound),
        Verb::NetRefine { net, partition } => net_refine(&mut out, &net, &partition),
        Verb::NetCoarsen { net } => net_coarsen(&mut out, &net),
        Verb::FitModels {
            record,
            phases,
            count,
            dim,
        } => fit_models(&mut out, &record, phases, count, dim, seed),
        Verb::Distance { p, q } => distance(&p, &q),
        Verb::SampleSize {
            eps,
            power,
            repetitions,
        } => sample_size(&mut out, &eps, power, repetitions, &overrides, seed),
        Verb::GateError { k, eps, dim, draws } => gate_error(&mut out, &k, &eps, dim, draws, seed),
        Verb::TmpRun {
            program,
            inputs,
            tape,
            head,
            budget,
        } => tmp_run(&mut out, &program, &inputs, tape.as_deref(), head, budget),
        Verb::Calibrate { .. } => unreachable!("handled above"),
    }?;
    for path in out.written() {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn net_validate(path: &Path) -> Result<()> {
    let doc = read_net(path)?;
    let kinds = |k: StateKind| doc.net.states().iter().filter(|s| s.kind == k).count();
    println!(
        "valid: {} states ({} input, {} output), {} events, {} initial tokens",
        doc.net.states().len(),
        kinds(StateKind::Input),
        kinds(StateKind::Output),
        doc.net.events().len(),
        doc.initial.count()
    );
    Ok(())
}

fn net_simulate(
    out: &mut OutputDir,
    path: &Path,
    steps: usize,
    priority: Option<Vec<String>>,
    inject: Option<&Path>,
    seed: u64,
) -> Result<()> {
    let doc = read_net(path)?;
    let injections: Vec<Injection> = match inject {
        Some(p) => read_json(p)?,
        None => Vec::new(),
    };
    let scheduler = match priority {
        Some(ids) => Scheduler::Priority(ids),
        None => Scheduler::Seeded(seed),
    };
    out.claim(&["trace.jsonl"])?;
    let outcome = Simulator::new(&doc.net, doc.initial.clone(), &scheduler)?.run(&injections, steps)?;
    out.json_lines("trace.jsonl", &outcome.to_json_lines())?;
    let marked: Vec<String> = doc
        .net
        .states()
        .iter()
        .enumerate()
        .filter_map(|(i, s)| outcome.marking.token(i).map(|c| format!("{}={}", s.id, color_text(c))))
        .collect();
    println!("{} firings; final marking: {}", outcome.trace.len(), marked.join(" "));
    Ok(())
}

fn color_text(c: &Color) -> String {
    serde_json::to_string(c).expect("colors serialize")
}

fn net_analyze(out: &mut OutputDir, path: &Path, bound: usize) -> Result<()> {
    let doc = read_net(path)?;
    let classical = reduced_net(&doc.net);
    let initial = classical.project(&doc.initial);
    let analysis = analyze(&classical, &initial, bound)?;
    out.json(
        "analysis.json",
        json!({
            "places": classical.places,
            "transitions": classical.transitions,
            "initial": initial,
            "reachable": analysis.markings.len(),
            "all_live": analysis.all_live(),
            "safe": analysis.is_safe(),
            "analysis": analysis,
        }),
    )?;
    let dead: Vec<&str> = classical
        .transitions
        .iter()
        .zip(&analysis.live)
        .filter(|(_, live)| !**live)
        .map(|(t, _)| t.id.as_str())
        .collect();
    println!(
        "{} reachable markings, {} deadlocks, {} safety violations, not live: [{}]",
        analysis.markings.len(),
        analysis.deadlocks.len(),
        analysis.safety_violations.len(),
        dead.join(", ")
    );
    Ok(())
}

fn net_refine(out: &mut OutputDir, path: &Path, partition: &Path) -> Result<()> {
    let doc = read_net(path)?;
    let partition: Partition = read_json(partition)?;
    let refinement = refine_colors(&doc.net, &partition)?;
    let origin: Vec<&str> = refinement
        .origin
        .iter()
        .map(|&e| doc.net.events()[e].id.as_str())
        .collect();
    let refined = NetDocument {
        initial: refinement.map_marking(&doc.initial),
        net: refinement.net.clone(),
    };
    out.json("refined.json", json!({ "net": refined.to_file(), "origin": origin }))?;
    println!(
        "{} events refined into {}",
        doc.net.events().len(),
        refinement.net.events().len()
    );
    Ok(())
}

fn net_coarsen(out: &mut OutputDir, path: &Path) -> Result<()> {
    let doc = read_net(path)?;
    let coarse = NetDocument {
        net: coarsen_colors(&doc.net),
        initial: coarsen_marking(&doc.initial),
    };
    out.json("coarsened.json", json!({ "net": coarse.to_file() }))?;
    println!(
        "coarsened {} states and {} events",
        doc.net.states().len(),
        doc.net.events().len()
    );
    Ok(())
}

fn fit_models(
    out: &mut OutputDir,
    path: &Path,
    phases: Phases,
    count: usize,
    dim: Option<usize>,
    seed: u64,
) -> Result<()> {
    if count == 0 {
        bail!("--count must be at least 1");
    }
    let record: OutcomeRecord = read_json(path)?;
    if record.is_empty() {
        bail!("record {} has no commands", path.display());
    }
    let dim = dim.unwrap_or(record.max_distinct());
    let names: Vec<String> = (1..=count).map(|i| format!("model_{i}.json")).collect();
    out.claim(&names.iter().map(String::as_str).collect::<Vec<_>>())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for name in &names {
        let assignment = match phases {
            Phases::Zero => PhaseAssignment::zero(),
            Phases::Random => PhaseAssignment::random(&record, &mut rng),
        };
        let model = construct_fitting_model(&record, &assignment, dim)?;
        let residual = perfect_fit_residual(&model, &record)?;
        out.json(name, json!({ "residual": residual, "model": model }))?;
        println!("{name}: dimension {dim}, residual {residual:.3e}");
    }
    Ok(())
}

fn parse_distribution(text: &str, flag: &str) -> Result<Distribution> {
    let probs: Vec<f64> = serde_json::from_str(text).map_err(|e| anyhow!("{flag}: column {}: {e}", e.column()))?;
    Distribution::new(probs).map_err(|e| anyhow!("{flag}: {e}"))
}

fn distance(p: &str, q: &str) -> Result<()> {
    let d = statistical_distance(&parse_distribution(p, "--p")?, &parse_distribution(q, "--q")?)?;
    println!("{d:.7}");
    Ok(())
}

fn sample_size(
    out: &mut OutputDir,
    eps: &str,
    power: f64,
    repetitions: Option<usize>,
    overrides: &BTreeMap<String, String>,
    seed: u64,
) -> Result<()> {
    let mut cfg = SampleSizeConfig::new(parse_list(eps, "--eps")?, power, seed);
    if let Some(r) = repetitions {
        cfg.repetitions = r;
    }
    let mut value = serde_json::to_value(&cfg)?;
    apply_overrides(&mut value, overrides)?;
    let cfg: SampleSizeConfig = serde_json::from_value(value).context("applying overrides")?;
    out.claim(&["sample_size.csv", "sample_size.json"])?;
    let report = sample_size_experiment(&cfg)?;
    let rows: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            vec![
                r.epsilon.to_string(),
                r.n_bound.to_string(),
                r.n_empirical.map_or_else(|| "saturated".into(), |n| n.to_string()),
                format!("{:.4}", r.power),
                format!("{:.9}", r.norm_diff),
                format!("{:.9}", r.distance),
            ]
        })
        .collect();
    let header = ["epsilon", "n_bound", "n_empirical", "power", "norm_diff", "distance"];
    out.csv("sample_size.csv", &header, &rows)?;
    out.json("sample_size.json", json!({ "config": cfg, "report": report }))?;
    println!("{}", header.join(","));
    for row in &rows {
        println!("{}", row.join(","));
    }
    match report.slope {
        Some(s) => println!("slope of ln N against ln ε: {s:.4}"),
        None => println!("slope unavailable"),
    }
    Ok(())
}

fn calibration_experiment(
    path: &Path,
    overrides: &BTreeMap<String, String>,
    explicit_seed: Option<u64>,
) -> Result<CalibrationExperiment> {
    let mut value: Value = read_json(path)?;
    apply_overrides(&mut value, overrides)?;
    let mut experiment: CalibrationExperiment =
        serde_json::from_value(value).with_context(|| format!("invalid calibration config {}", path.display()))?;
    if let Some(seed) = explicit_seed {
        experiment.seed = seed;
    }
    Ok(experiment)
}

fn calibrate(out: &mut OutputDir, experiment: CalibrationExperiment) -> Result<()> {
    out.claim(&["calibration.csv", "calibration.json", "mode_trace.jsonl"])?;
    let report = experiment.run()?;
    let rows: Vec<Vec<String>> = report
        .stages
        .iter()
        .enumerate()
        .map(|(i, s)| {
            vec![
                (i + 1).to_string(),
                s.epsilon.to_string(),
                s.budget.to_string(),
                s.trials_used.to_string(),
                format!("{:.9}", s.distance),
                format!("{:.9}", s.theta),
                s.passed.to_string(),
                s.moves.to_string(),
                s.adjustments.to_string(),
            ]
        })
        .collect();
    let header = [
        "stage",
        "epsilon",
        "budget",
        "trials_used",
        "distance",
        "theta",
        "passed",
        "moves",
        "adjustments",
    ];
    out.csv("calibration.csv", &header, &rows)?;
    out.json(
        "calibration.json",
        json!({ "experiment": experiment, "final_theta": report.final_theta, "stages": report.stages }),
    )?;
    let trace: String = report
        .mode_trace
        .iter()
        .map(|t| serde_json::to_string(t).expect("trace serializes") + "\n")
        .collect();
    out.json_lines("mode_trace.jsonl", &trace)?;
    println!("{}", header.join(","));
    for row in &rows {
        println!("{}", row.join(","));
    }
    println!("final θ = {:.9}", report.final_theta);
    for path in out.written() {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn gate_error(out: &mut OutputDir, ks: &str, eps: &str, dim: usize, draws: usize, seed: u64) -> Result<()> {
    let ks: Vec<usize> = parse_list(ks, "--k")?;
    let eps: Vec<f64> = parse_list(eps, "--eps")?;
    if dim == 0 || draws == 0 {
        bail!("--dim and --draws must be positive");
    }
    out.claim(&["gate_error.csv", "gate_error.json"])?;
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for (i, &k) in ks.iter().enumerate() {
        for (j, &e) in eps.iter().enumerate() {
            let cell_seed = seed.wrapping_add(((i * eps.len() + j) as u64).wrapping_mul(1_000_003));
            let reports = gate_error_trials(k, dim, e, draws, cell_seed)?;
            let worst = reports.iter().map(|r| r.measured).fold(0.0, f64::max);
            let mean = reports.iter().map(|r| r.measured).sum::<f64>() / reports.len() as f64;
            let first = k as f64 * e;
            let exact = (1.0 + e).powi(k as i32) - 1.0;
            rows.push(vec![
                k.to_string(),
                e.to_string(),
                draws.to_string(),
                format!("{worst:.9e}"),
                format!("{mean:.9e}"),
                format!("{first:.9e}"),
                format!("{exact:.9e}"),
                (worst <= 1.05 * first).to_string(),
            ]);
            summary.push(json!({
                "gates": k, "epsilon": e, "draws": draws, "max_measured": worst,
                "mean_measured": mean, "first_order_bound": first, "exact_bound": exact,
            }));
        }
    }
    let header = [
        "gates",
        "epsilon",
        "draws",
        "max_measured",
        "mean_measured",
        "first_order_bound",
        "exact_bound",
        "within_1.05_first_order",
    ];
    out.csv("gate_error.csv", &header, &rows)?;
    out.json("gate_error.json", json!({ "dim": dim, "cells": summary }))?;
    println!("{}", header.join(","));
    for row in &rows {
        println!("{}", row.join(","));
    }
    Ok(())
}

fn tmp_run(
    out: &mut OutputDir,
    path: &Path,
    inputs: &[String],
    tape: Option<&str>,
    head: i64,
    budget: usize,
) -> Result<()> {
    let program: Program = read_json(path)?;
    out.claim(&["tmp_run.json"])?;
    let mut tmp = Tmp::new();
    if let Some(cells) = tape {
        tmp.step(tape_token(cells, head), Color::Empty);
    }
    let tokens: Vec<Color> = inputs.iter().map(|s| Color::str(s.as_str())).collect();
    let result = run_program(&mut tmp, &program, &tokens, budget)?;
    let outputs: Vec<&str> = result.outputs.iter().map(|c| c.as_str().unwrap_or("?")).collect();
    out.json(
        "tmp_run.json",
        json!({
            "outputs": result.outputs,
            "steps": result.steps,
            "mode": tmp.mode(),
            "control": tmp.control(),
            "tape": tmp.tape_string(),
            "head": tmp.head(),
            "memory_hash": tmp.memory_hash(),
        }),
    )?;
    println!(
        "halted in state {:?} after {} steps; outputs: [{}]; tape: {}",
        tmp.control(),
        result.steps,
        outputs.join(", "),
        tmp.tape_string()
    );
    Ok(())
}
