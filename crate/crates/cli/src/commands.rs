use std::fs::{self, File};
use std::path::{Path, PathBuf};

use clap::Args;
use prune_planner::collect::{self as gather, CollectConfig, ProcessTrainer, SimulatedTrainer, Trainer};
use prune_planner::model::{cost, frr, prr_estimate};
use prune_planner::optimize::{solve, Budget, PlanResult, SolveOptions};
use prune_planner::par::{map_slice, Execution};
use prune_planner::regress::{
    analyze_separability, fit_full_tensor, fit_separable, mae, Dataset, FitConfig, FitReport, SeparabilityReport,
    Thresholds, Unit,
};
use prune_planner::{DimTriple, Error, Map, Predictor};
use serde::Serialize;
use serde_json::json;

use crate::manifest::RunManifest;
use crate::{CliError, Global};

const ESTIMATE_BASIS: &str = "frr = 1 - d*w^2*r^2 (model-estimated from the proportional cost model); \
prr_estimate = 1 - d*w^2 (approximate parameter model); neither counts layer-exact FLOPs or parameters";

fn read_bytes(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::read(path, e))
}

fn read_samples(path: &Path, unit: Unit) -> Result<(Dataset, Vec<u8>), CliError> {
    let bytes = read_bytes(path)?;
    let data = Dataset::read_csv(bytes.as_slice(), unit)?;
    Ok((data, bytes))
}

pub fn read_map(path: &Path) -> Result<(Map, Vec<u8>), CliError> {
    let bytes = read_bytes(path)?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| CliError::Core(Error::MapFormat(format!("{} is not UTF-8", path.display()))))?;
    Ok((Map::from_json(&text)?, bytes))
}

fn prepare_out(global: &Global) -> Result<&Path, CliError> {
    fs::create_dir_all(&global.out).map_err(|e| CliError::write(&global.out, e))?;
    Ok(&global.out)
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::write(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("artifact serializes");
    write_text(path, &(text + "\n"))
}

fn say(global: &Global, msg: impl AsRef<str>) {
    if !global.quiet {
        println!("{}", msg.as_ref());
    }
}

fn budget(t: f64) -> Result<Budget, CliError> {
    Ok(Budget::new(t)?)
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// CSV file with header `d,w,r,accuracy`.
    #[arg(long)]
    samples: PathBuf,
    #[arg(long, default_value_t = 3)]
    degree: usize,
    #[arg(long, default_value_t = 1)]
    rank: usize,
    /// L2 penalty on the coefficients.
    #[arg(long, default_value_t = 0.0)]
    ridge: f64,
    /// Fit the unconstrained coefficient tensor instead of the separable form.
    #[arg(long)]
    full: bool,
    #[arg(long, default_value_t = 500)]
    max_sweeps: usize,
}

#[derive(Serialize)]
struct FitDocument<'a> {
    kind: &'static str,
    degree: usize,
    rank: Option<usize>,
    ridge: f64,
    samples: usize,
    error_metric: &'static str,
    #[serde(flatten)]
    report: &'a FitReport,
}

const ERROR_METRIC: &str = "mean absolute error in accuracy points";

pub fn fit(global: &Global, args: &FitArgs) -> Result<(), CliError> {
    let (data, bytes) = read_samples(&args.samples, global.unit.into())?;
    let (map, report) = if args.full {
        let (m, r) = fit_full_tensor(&data, args.degree, args.ridge)?;
        (Map::Full(m), r)
    } else {
        let config = FitConfig {
            rank: args.rank,
            degree: args.degree,
            ridge: args.ridge,
            max_sweeps: args.max_sweeps,
            seed: global.seed,
            ..FitConfig::default()
        };
        let (m, r) = fit_separable(&data, &config)?;
        (Map::Separable(m), r)
    };

    let out = prepare_out(global)?;
    let map_path = out.join("map.json");
    let report_path = out.join("fit_report.json");
    write_text(&map_path, &(map.to_json()? + "\n"))?;
    let rank = match &map {
        Map::Separable(m) => Some(m.rank()),
        Map::Full(_) => None,
    };
    write_json(
        &report_path,
        &FitDocument {
            kind: map.kind(),
            degree: args.degree,
            rank,
            ridge: args.ridge,
            samples: data.len(),
            error_metric: ERROR_METRIC,
            report: &report,
        },
    )?;

    let mut manifest = RunManifest::new(
        "fit",
        json!({
            "samples": args.samples.display().to_string(),
            "unit": format!("{:?}", global.unit).to_lowercase(),
            "kind": map.kind(),
            "degree": args.degree,
            "rank": rank,
            "ridge": args.ridge,
            "max_sweeps": args.max_sweeps,
            "seed": global.seed,
        }),
    );
    manifest.input(&args.samples, &bytes);
    manifest.output(&map_path);
    manifest.output(&report_path);
    manifest.write(out)?;

    say(
        global,
        format!(
            "train MAE {:.4} points over {} samples ({} map, degree {}{}, {} sweep(s){})",
            report.train_mae,
            data.len(),
            map.kind(),
            args.degree,
            rank.map(|r| format!(", rank {r}")).unwrap_or_default(),
            report.sweeps_used,
            if report.converged { "" } else { ", sweep limit reached" },
        ),
    );
    if global.strict && !report.converged {
        return Err(CliError::NotConverged(format!(
            "fit did not converge within {} sweeps",
            args.max_sweeps
        )));
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    /// Map file written by `fit`.
    #[arg(long)]
    map: PathBuf,
    /// Budget: allowed fraction of the base model's FLOPs.
    #[arg(long = "T", default_value_t = 0.5)]
    t: f64,
    /// Grid nodes per axis before refinement.
    #[arg(long, default_value_t = 512)]
    grid: usize,
    /// Report the best grid node without simplex refinement.
    #[arg(long)]
    no_refine: bool,
}

#[derive(Serialize)]
struct PlanDocument<'a> {
    budget: f64,
    #[serde(flatten)]
    result: &'a PlanResult,
    cost: f64,
    frr: f64,
    prr_estimate: f64,
    estimate_basis: &'static str,
}

fn plan_document(t: f64, result: &PlanResult) -> PlanDocument<'_> {
    PlanDocument {
        budget: t,
        result,
        cost: cost(&result.point),
        frr: frr(&result.point),
        prr_estimate: prr_estimate(&result.point),
        estimate_basis: ESTIMATE_BASIS,
    }
}

pub fn plan(global: &Global, args: &PlanArgs) -> Result<(), CliError> {
    let b = budget(args.t)?;
    let (map, bytes) = read_map(&args.map)?;
    let options = SolveOptions {
        grid_resolution: args.grid,
        refine: !args.no_refine,
        execution: Execution::Auto,
    };
    let result = solve(&map, b, &options)?;

    let out = prepare_out(global)?;
    let plan_path = out.join("plan.json");
    write_json(&plan_path, &plan_document(args.t, &result))?;
    let mut manifest = RunManifest::new(
        "plan",
        json!({
            "map": args.map.display().to_string(),
            "T": args.t,
            "grid": args.grid,
            "refine": !args.no_refine,
        }),
    );
    manifest.input(&args.map, &bytes);
    manifest.output(&plan_path);
    manifest.write(out)?;

    let p = result.point;
    say(
        global,
        format!(
            "d = {:.4}, w = {:.4}, r = {:.4}; predicted accuracy {:.2}%; frr {:.4} (model-estimated)",
            p.d(),
            p.w(),
            p.r(),
            100.0 * result.predicted_accuracy,
            frr(&p)
        ),
    );
    Ok(())
}

#[derive(Debug, Args)]
pub struct CollectArgs {
    /// Shell command starting a trainer that speaks the line protocol.
    #[arg(long, conflicts_with = "simulate", required_unless_present = "simulate")]
    trainer: Option<String>,
    /// Simulate a trainer over a map file with Gaussian noise of the given sd.
    #[arg(long, num_args = 3, value_names = ["SURFACE", "NOISE", "SEED"])]
    simulate: Option<Vec<String>>,
    #[arg(long = "T", default_value_t = 0.5)]
    t: f64,
    /// Pruning rounds per dimension.
    #[arg(long, default_value_t = 4)]
    rds: usize,
    /// Accuracy of the unpruned model. Defaults to the surface value when simulating.
    #[arg(long)]
    base_accuracy: Option<f64>,
    /// Transcript of an earlier run to replay before contacting the trainer.
    #[arg(long)]
    resume: Option<PathBuf>,
    /// Uniform jitter on the ratio a simulated trainer reaches.
    #[arg(long, default_value_t = 0.0)]
    jitter: f64,
}

struct Simulation {
    surface: PathBuf,
    noise: f64,
    seed: u64,
}

fn parse_simulation(values: &[String]) -> Result<Simulation, CliError> {
    let [surface, noise, seed] = values else {
        return Err(CliError::Usage("--simulate takes SURFACE NOISE SEED".into()));
    };
    Ok(Simulation {
        surface: PathBuf::from(surface),
        noise: noise
            .parse()
            .map_err(|_| CliError::Usage(format!("--simulate noise {noise:?} is not a number")))?,
        seed: seed
            .parse()
            .map_err(|_| CliError::Usage(format!("--simulate seed {seed:?} is not an unsigned integer")))?,
    })
}

fn scale_accuracy(value: f64, unit: Unit) -> f64 {
    match unit {
        Unit::Percent => value / 100.0,
        Unit::Auto if value > 1.0 => value / 100.0,
        _ => value,
    }
}

pub fn collect(global: &Global, args: &CollectArgs) -> Result<(), CliError> {
    let b = budget(args.t)?;
    let out = prepare_out(global)?;
    let mut manifest = RunManifest::new("collect", serde_json::Value::Null);

    let replay: Vec<String> = match &args.resume {
        Some(path) => {
            let bytes = read_bytes(path)?;
            manifest.input(path, &bytes);
            String::from_utf8_lossy(&bytes)
                .lines()
                .filter(|l| !l.trim().is_empty())
                .map(str::to_string)
                .collect()
        }
        None => Vec::new(),
    };

    let simulation = args.simulate.as_deref().map(parse_simulation).transpose()?;
    let (mut trainer, surface_base): (Box<dyn Trainer>, Option<f64>) = match (&simulation, &args.trainer) {
        (Some(sim), _) => {
            let (map, bytes) = read_map(&sim.surface)?;
            manifest.input(&sim.surface, &bytes);
            let at_base = map.value(1.0, 1.0, 1.0);
            (Box::new(SimulatedTrainer::new(map, sim.noise, args.jitter, sim.seed)?), Some(at_base))
        }
        (None, Some(cmd)) => (Box::new(ProcessTrainer::new(cmd.clone())), None),
        (None, None) => return Err(CliError::Usage("give --trainer or --simulate".into())),
    };
    let base_accuracy = match (args.base_accuracy, surface_base) {
        (Some(a), _) => scale_accuracy(a, global.unit.into()),
        (None, Some(a)) => a,
        (None, None) => return Err(CliError::Usage("--base-accuracy is required with --trainer".into())),
    };
    let config = CollectConfig::new(b, args.rds, base_accuracy);

    manifest.config = json!({
        "trainer": args.trainer,
        "simulate": simulation.as_ref().map(|s| json!({
            "surface": s.surface.display().to_string(),
            "noise": s.noise,
            "seed": s.seed,
        })),
        "jitter": args.jitter,
        "T": args.t,
        "rds": args.rds,
        "base_accuracy": base_accuracy,
        "resume": args.resume.as_ref().map(|p| p.display().to_string()),
    });

    let transcript_path = out.join("transcript.jsonl");
    let mut sink = File::create(&transcript_path).map_err(|e| CliError::write(&transcript_path, e))?;
    let outcome = gather::collect(trainer.as_mut(), &config, &replay, Some(&mut sink))?;

    let samples_path = out.join("samples.csv");
    let file = File::create(&samples_path).map_err(|e| CliError::write(&samples_path, e))?;
    outcome.dataset.write_csv(file)?;
    manifest.output(&samples_path);
    manifest.output(&transcript_path);
    manifest.write(out)?;

    for w in &outcome.warnings {
        eprintln!("warning: partial collection: {w}");
    }
    say(
        global,
        format!(
            "collected {} samples ({} replayed, {} new trainer request(s)) into {}",
            outcome.dataset.len(),
            outcome.replayed_requests,
            outcome.live_requests,
            samples_path.display()
        ),
    );
    Ok(())
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    samples: PathBuf,
    /// Polynomial degrees to try.
    #[arg(long, value_delimiter = ',', default_values_t = [1, 2, 3, 4, 5])]
    degrees: Vec<usize>,
    /// Separable ranks to try.
    #[arg(long, value_delimiter = ',', default_values_t = [1])]
    ranks: Vec<usize>,
    /// Also fit the unconstrained tensor at each degree with these ridge values.
    #[arg(long, value_delimiter = ',')]
    full_ridges: Vec<f64>,
    #[arg(long = "T", default_value_t = 0.5)]
    t: f64,
    /// Training split size; the rest is held out.
    #[arg(long, default_value_t = 13)]
    n_train: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Job {
    Separable { degree: usize, rank: usize },
    Full { degree: usize, ridge: f64 },
}

#[derive(Debug, Serialize)]
struct SweepRow {
    model: &'static str,
    degree: usize,
    rank: Option<usize>,
    ridge: Option<f64>,
    train_mae: Option<f64>,
    eval_mae: Option<f64>,
    d: Option<f64>,
    w: Option<f64>,
    r: Option<f64>,
    predicted_accuracy: Option<f64>,
    converged: Option<bool>,
    underfit: Option<bool>,
    error: Option<String>,
}

struct Measured {
    train_mae: f64,
    eval_mae: f64,
    point: DimTriple,
    predicted: f64,
    converged: bool,
}

fn run_job(job: Job, train: &Dataset, eval: &Dataset, b: Budget, seed: u64) -> Result<Measured, Error> {
    let (map, report): (Map, FitReport) = match job {
        Job::Separable { degree, rank } => {
            let config = FitConfig { degree, rank, seed, ..FitConfig::default() };
            let (m, r) = fit_separable(train, &config)?;
            (m.into(), r)
        }
        Job::Full { degree, ridge } => {
            let (m, r) = fit_full_tensor(train, degree, ridge)?;
            (m.into(), r)
        }
    };
    // Plans are computed sequentially: the configurations already run in parallel.
    let options = SolveOptions { execution: Execution::Sequential, ..SolveOptions::default() };
    let plan = solve(&map, b, &options)?;
    Ok(Measured {
        train_mae: report.train_mae,
        eval_mae: mae(&map, eval),
        point: plan.point,
        predicted: plan.predicted_accuracy,
        converged: report.converged,
    })
}

pub fn sweep(global: &Global, args: &SweepArgs) -> Result<(), CliError> {
    let b = budget(args.t)?;
    if args.degrees.is_empty() || args.ranks.is_empty() {
        return Err(CliError::Usage("--degrees and --ranks need at least one value".into()));
    }
    let (data, bytes) = read_samples(&args.samples, global.unit.into())?;
    let (train, eval) = data.split(args.n_train, global.seed)?;

    let mut degrees = args.degrees.clone();
    degrees.sort_unstable();
    degrees.dedup();
    let mut ranks = args.ranks.clone();
    ranks.sort_unstable();
    ranks.dedup();
    let mut jobs = Vec::new();
    for &degree in &degrees {
        jobs.extend(ranks.iter().map(|&rank| Job::Separable { degree, rank }));
        jobs.extend(args.full_ridges.iter().map(|&ridge| Job::Full { degree, ridge }));
    }
    let reference_job = Job::Separable { degree: 3, rank: 1 };
    let with_reference = if jobs.contains(&reference_job) { jobs.clone() } else { [jobs.clone(), vec![reference_job]].concat() };

    let results = map_slice(Execution::Auto, &with_reference, |&job| run_job(job, &train, &eval, b, global.seed));
    let reference = with_reference
        .iter()
        .position(|&j| j == reference_job)
        .and_then(|i| results[i].as_ref().ok())
        .map(|m| m.eval_mae);

    let rows: Vec<SweepRow> = jobs
        .iter()
        .zip(&results)
        .map(|(job, result)| {
            let (model, degree, rank, ridge) = match *job {
                Job::Separable { degree, rank } => ("separable", degree, Some(rank), None),
                Job::Full { degree, ridge } => ("full", degree, None, Some(ridge)),
            };
            let mut row = SweepRow {
                model,
                degree,
                rank,
                ridge,
                train_mae: None,
                eval_mae: None,
                d: None,
                w: None,
                r: None,
                predicted_accuracy: None,
                converged: None,
                underfit: None,
                error: None,
            };
            match result {
                Ok(m) => {
                    row.train_mae = Some(m.train_mae);
                    row.eval_mae = Some(m.eval_mae);
                    row.d = Some(m.point.d());
                    row.w = Some(m.point.w());
                    row.r = Some(m.point.r());
                    row.predicted_accuracy = Some(m.predicted);
                    row.converged = Some(m.converged);
                    row.underfit = reference.map(|re| m.eval_mae >= 2.0 * re);
                }
                Err(e) => row.error = Some(e.to_string()),
            }
            row
        })
        .collect();

    let out = prepare_out(global)?;
    let sweep_path = out.join("sweep.csv");
    let mut wtr = csv::Writer::from_path(&sweep_path).map_err(|e| CliError::Core(e.into()))?;
    for row in &rows {
        wtr.serialize(row).map_err(|e| CliError::Core(e.into()))?;
    }
    wtr.flush().map_err(|e| CliError::write(&sweep_path, e))?;

    let mut manifest = RunManifest::new(
        "sweep",
        json!({
            "samples": args.samples.display().to_string(),
            "degrees": degrees,
            "ranks": ranks,
            "full_ridges": args.full_ridges,
            "T": args.t,
            "n_train": args.n_train,
            "seed": global.seed,
            "error_metric": ERROR_METRIC,
        }),
    );
    manifest.input(&args.samples, &bytes);
    manifest.output(&sweep_path);
    manifest.write(out)?;

    for row in &rows {
        let label = match (row.rank, row.ridge) {
            (Some(r), _) => format!("separable K={} R={r}", row.degree),
            (_, Some(l)) => format!("full K={} ridge={l}", row.degree),
            _ => unreachable!("every row has a rank or a ridge"),
        };
        match (&row.error, row.eval_mae) {
            (Some(e), _) => say(global, format!("{label}: failed: {e}")),
            (None, Some(eval_mae)) => say(
                global,
                format!(
                    "{label}: train {:.3} / eval {eval_mae:.3} points, optimum ({:.3}, {:.3}, {:.3}){}",
                    row.train_mae.unwrap_or(f64::NAN),
                    row.d.unwrap_or(f64::NAN),
                    row.w.unwrap_or(f64::NAN),
                    row.r.unwrap_or(f64::NAN),
                    if row.underfit == Some(true) { ", underfit" } else { "" }
                ),
            ),
            _ => {}
        }
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    samples: PathBuf,
    /// Largest acceptable median relative deviation (fraction).
    #[arg(long, default_value_t = 0.01)]
    max_median: f64,
    /// Largest acceptable maximum relative deviation (fraction).
    #[arg(long, default_value_t = 0.03)]
    max_max: f64,
}

#[derive(Serialize)]
struct ValidateDocument<'a> {
    passes: bool,
    thresholds: Thresholds,
    #[serde(flatten)]
    report: &'a SeparabilityReport,
}

fn describe_worst(report: &SeparabilityReport) -> String {
    let w = &report.worst;
    format!(
        "{} = {} slice, {} pair {}/{} at {}: {:.3}%",
        w.fixed_axis.name(),
        w.fixed_value,
        w.pair_axis.name(),
        w.pair[0],
        w.pair[1],
        w.at,
        100.0 * w.rel_dev
    )
}

pub fn validate(global: &Global, args: &ValidateArgs) -> Result<(), CliError> {
    let (data, bytes) = read_samples(&args.samples, global.unit.into())?;
    let thresholds = Thresholds {
        max_median: args.max_median,
        max_max: args.max_max,
    };
    let out = prepare_out(global)?;
    let mut manifest = RunManifest::new(
        "validate",
        json!({
            "samples": args.samples.display().to_string(),
            "max_median": args.max_median,
            "max_max": args.max_max,
        }),
    );
    manifest.input(&args.samples, &bytes);
    let report = analyze_separability(&data)?;
    let passes = report.passes(&thresholds);

    let path = out.join("separability.json");
    write_json(&path, &ValidateDocument { passes, thresholds, report: &report })?;
    manifest.output(&path);
    manifest.write(out)?;

    let summary = format!(
        "median deviation {:.3}%, max {:.3}% over {} slice(s); worst: {}",
        100.0 * report.median_rel_dev,
        100.0 * report.max_rel_dev,
        report.slices.len(),
        describe_worst(&report)
    );
    if passes {
        say(global, format!("separable: {summary}"));
        Ok(())
    } else {
        Err(CliError::ValidationFailed(format!(
            "not separable (limits {:.2}% median, {:.2}% max): {summary}",
            100.0 * args.max_median,
            100.0 * args.max_max
        )))
    }
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    samples: PathBuf,
    #[arg(long, default_value_t = 3)]
    degree: usize,
    #[arg(long, default_value_t = 1)]
    rank: usize,
    #[arg(long = "T", default_value_t = 0.5)]
    t: f64,
}

fn markdown(
    args: &ReportArgs,
    samples: usize,
    fit: &FitReport,
    plan: &PlanResult,
    separability: Option<&SeparabilityReport>,
) -> String {
    let p = plan.point;
    let mut md = String::new();
    md.push_str("# Pruning plan\n\n");
    md.push_str(&format!("Samples: `{}` ({samples} rows)\n\n", args.samples.display()));
    md.push_str("## Predictor\n\n");
    md.push_str(&format!(
        "Rank {} separable polynomial of degree {}. Training MAE {:.3} accuracy points after {} sweep(s){}.\n\n",
        args.rank,
        args.degree,
        fit.train_mae,
        fit.sweeps_used,
        if fit.converged { "" } else { " (sweep limit reached)" }
    ));
    md.push_str(&format!("## Plan at T = {}\n\n", args.t));
    md.push_str("| | d | w | r |\n|---|---|---|---|\n");
    md.push_str(&format!("| ratio | {:.4} | {:.4} | {:.4} |\n", p.d(), p.w(), p.r()));
    let bound = |b: bool| if b { "at 1" } else { "free" };
    md.push_str(&format!(
        "| bound | {} | {} | {} |\n\n",
        bound(plan.active_bounds[0]),
        bound(plan.active_bounds[1]),
        bound(plan.active_bounds[2])
    ));
    md.push_str(&format!("- Predicted accuracy: {:.2}%\n", 100.0 * plan.predicted_accuracy));
    md.push_str(&format!("- FLOPs reduction (model-estimated): {:.4}\n", frr(&p)));
    md.push_str(&format!("- Parameter reduction (approximate, from d*w^2): {:.4}\n", prr_estimate(&p)));
    md.push_str(&format!(
        "- Largest stationarity residual over free ratios: {:.2e} (multiplier {:.4})\n\n",
        plan.max_free_residual(),
        plan.lagrange_multiplier
    ));
    md.push_str("## Separability\n\n");
    match separability {
        Some(s) => md.push_str(&format!(
            "Median ratio deviation {:.3}%, max {:.3}% ({}); worst: {}.\n",
            100.0 * s.median_rel_dev,
            100.0 * s.max_rel_dev,
            if s.passes(&Thresholds::default()) { "within 1% / 3%" } else { "outside 1% / 3%" },
            describe_worst(s)
        )),
        None => md.push_str("Not available: the samples hold no 2x2 axis-aligned block.\n"),
    }
    md
}

pub fn report(global: &Global, args: &ReportArgs) -> Result<(), CliError> {
    let b = budget(args.t)?;
    let (data, bytes) = read_samples(&args.samples, global.unit.into())?;
    let config = FitConfig {
        degree: args.degree,
        rank: args.rank,
        seed: global.seed,
        ..FitConfig::default()
    };
    let (map, fit_report) = fit_separable(&data, &config)?;
    let map = Map::Separable(map);
    let plan = solve(&map, b, &SolveOptions::default())?;
    let separability = match analyze_separability(&data) {
        Ok(r) => Some(r),
        Err(Error::InsufficientGrid(_)) => None,
        Err(e) => return Err(e.into()),
    };

    let out = prepare_out(global)?;
    let json_path = out.join("report.json");
    let md_path = out.join("report.md");
    let map_value: serde_json::Value = serde_json::from_str(&map.to_json()?).expect("map document is JSON");
    write_json(
        &json_path,
        &json!({
            "samples": data.len(),
            "error_metric": ERROR_METRIC,
            "fit": fit_report,
            "map": map_value,
            "plan": plan_document(args.t, &plan),
            "separability": separability.as_ref().map(|s| json!({
                "median_rel_dev": s.median_rel_dev,
                "max_rel_dev": s.max_rel_dev,
                "passes": s.passes(&Thresholds::default()),
                "worst": s.worst,
            })),
        }),
    )?;
    write_text(&md_path, &markdown(args, data.len(), &fit_report, &plan, separability.as_ref()))?;

    let mut manifest = RunManifest::new(
        "report",
        json!({
            "samples": args.samples.display().to_string(),
            "degree": args.degree,
            "rank": args.rank,
            "T": args.t,
            "seed": global.seed,
        }),
    );
    manifest.input(&args.samples, &bytes);
    manifest.output(&json_path);
    manifest.output(&md_path);
    manifest.write(out)?;

    let p = plan.point;
    say(
        global,
        format!(
            "plan at T = {}: ({:.4}, {:.4}, {:.4}), predicted {:.2}%; report in {}",
            args.t,
            p.d(),
            p.w(),
            p.r(),
            100.0 * plan.predicted_accuracy,
            md_path.display()
        ),
    );
    Ok(())
}
