//! Command-line front end: scenario generation, shadowing-generation
//! validation, and linear fits over emitted CSV files.

use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

use cunec::geometry::Point2;
use cunec::scenario::{self, csv, ModelChoice, ScenarioConfig};
use cunec::shadowing::{joint_covariance_with_cap, scale_field, FieldSampler, ShadowingField};
use cunec::stats::{fit_linear_pl, validate_generation, Metric, ValidationTargets};

#[derive(Parser)]
#[command(name = "cunec", version, about = "Urban street-grid path-loss matrix generator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario configuration and emit the link-result CSV.
    Generate(GenerateArgs),
    /// Regenerate a shadowing field and report its statistics against
    /// targets.
    Validate(ValidateArgs),
    /// Fit a line to path loss versus log-distance from a result CSV.
    Fit(FitArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Scenario configuration file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Override the seed from the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV path; overrides the configuration, `-` writes stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the model selection: cunec, alphabeta or both.
    #[arg(long)]
    model: Option<String>,
}

#[derive(Args)]
struct ValidateArgs {
    /// UEs along the trajectory.
    #[arg(long, default_value_t = 100)]
    ue_count: usize,
    /// APs along the trajectory.
    #[arg(long, default_value_t = 100)]
    ap_count: usize,
    /// Position spacing in meters on both trajectories.
    #[arg(long, default_value_t = 1.0)]
    spacing_m: f64,
    /// Target per-row spread in dB.
    #[arg(long, default_value_t = 6.51)]
    sigma_ue: f64,
    /// Target per-column spread in dB.
    #[arg(long, default_value_t = 5.34)]
    sigma_ap: f64,
    /// Correlation distance along the UE axis in meters.
    #[arg(long, default_value_t = 17.2)]
    dcorr_ue: f64,
    /// Correlation distance along the AP axis in meters.
    #[arg(long, default_value_t = 5.43)]
    dcorr_ap: f64,
    /// Target overall spread in dB.
    #[arg(long, default_value_t = 6.65)]
    sigma_total: f64,
    /// Ensemble size; metrics are averaged over this many seeds.
    #[arg(long, default_value_t = 1)]
    seeds: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct FitArgs {
    /// Result CSV produced by `generate`.
    #[arg(long)]
    input: PathBuf,
    /// Distance column to fit over: manhattan or euclidean.
    #[arg(long, default_value = "manhattan")]
    metric: String,
    /// Constrain the intercept to zero.
    #[arg(long)]
    fix_alpha: bool,
    /// Keep only rows of this model (cunec or alphabeta).
    #[arg(long)]
    model: Option<String>,
    /// Keep only rows of this street order.
    #[arg(long)]
    order: Option<i64>,
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Generate(args) => generate(args),
        Command::Validate(args) => validate(args),
        Command::Fit(args) => fit(args),
    }
}

fn generate(args: GenerateArgs) -> anyhow::Result<()> {
    let mut cfg = ScenarioConfig::load(&args.config)
        .with_context(|| format!("loading {}", args.config.display()))?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(model) = &args.model {
        cfg.model = ModelChoice::parse(model)?;
    }
    let run = scenario::run(&cfg)?;
    for w in &run.warnings {
        eprintln!("warning: {w}");
    }
    let text = run.to_csv();
    let out = args.out.or(cfg.output);
    match out {
        Some(path) if path.as_os_str() != "-" => {
            std::fs::write(&path, &text).with_context(|| format!("writing {}", path.display()))?;
            eprintln!("wrote {} rows to {}", run.results.len(), path.display());
        }
        _ => print!("{text}"),
    }
    Ok(())
}

fn validate(args: ValidateArgs) -> anyhow::Result<()> {
    if args.seeds == 0 {
        bail!("need at least one seed");
    }
    let ue_positions: Vec<Point2> =
        (0..args.ue_count).map(|i| Point2::new(i as f64 * args.spacing_m, 0.0)).collect();
    let ap_positions: Vec<Point2> =
        (0..args.ap_count).map(|j| Point2::new(j as f64 * args.spacing_m, 100.0)).collect();
    let links = args.ue_count * args.ap_count;

    let targets = ValidationTargets {
        sigma_total_db: Some(args.sigma_total),
        row_sigma_db: Some(args.sigma_ue),
        col_sigma_db: Some(args.sigma_ap),
        row_dcorr_m: Some(args.dcorr_ue),
        col_dcorr_m: Some(args.dcorr_ap),
    };

    // Factor the joint covariance once; only the draws vary per seed.
    let cov = joint_covariance_with_cap(
        &ue_positions,
        &ap_positions,
        args.dcorr_ue,
        args.dcorr_ap,
        links,
    )?;
    let sampler = FieldSampler::new(&cov, args.ue_count, args.ap_count)?;
    drop(cov);

    let mut sums = vec![0.0f64; 5];
    let mut counts = vec![0usize; 5];
    for s in 0..args.seeds {
        let mut rng = ChaCha12Rng::seed_from_u64(args.seed.wrapping_add(s));
        let raw = sampler.sample(&mut rng);
        let field = ShadowingField {
            values_db: scale_field(&raw, args.sigma_ue, args.sigma_ap)?,
            ue_positions: ue_positions.clone(),
            ap_positions: ap_positions.clone(),
            d_corr_ue_m: args.dcorr_ue,
            d_corr_ap_m: args.dcorr_ap,
            target_sigma_ue_db: args.sigma_ue,
            target_sigma_ap_db: args.sigma_ap,
        };
        let report = validate_generation(&field, &targets)?;
        for (k, row) in report.metrics.iter().enumerate() {
            if let Some(v) = row.estimated {
                sums[k] += v;
                counts[k] += 1;
            }
        }
        if args.seeds == 1 {
            print!("{report}");
            return Ok(());
        }
    }

    println!("ensemble of {} seeds:", args.seeds);
    let names = ["sigma_total_db", "row_sigma_db", "col_sigma_db", "row_dcorr_m", "col_dcorr_m"];
    let tgt = [
        targets.sigma_total_db,
        targets.row_sigma_db,
        targets.col_sigma_db,
        targets.row_dcorr_m,
        targets.col_dcorr_m,
    ];
    println!("{:<18} {:>12} {:>12} {:>10}", "metric", "estimated", "target", "rel_err");
    for k in 0..5 {
        if counts[k] == 0 {
            println!("{:<18} {:>12} {:>12} {:>10}", names[k], "-", "-", "-");
            continue;
        }
        let est = sums[k] / counts[k] as f64;
        let t = tgt[k].unwrap();
        println!("{:<18} {:>12.4} {:>12.4} {:>9.2}%", names[k], est, t, (est - t) / t * 100.0);
    }
    Ok(())
}

fn fit(args: FitArgs) -> anyhow::Result<()> {
    let metric = match args.metric.as_str() {
        "manhattan" => Metric::Manhattan,
        "euclidean" => Metric::Euclidean,
        other => bail!("metric must be manhattan or euclidean, got {other:?}"),
    };
    let text = std::fs::read_to_string(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let rows = csv::read_csv(&text)?;

    let mut pl = Vec::new();
    let mut dist = Vec::new();
    for row in &rows {
        if let Some(model) = &args.model {
            if &row.model != model {
                continue;
            }
        }
        if let Some(order) = args.order {
            if row.order != order {
                continue;
            }
        }
        let (Some(total), d) = (
            row.total_pl_db,
            match metric {
                Metric::Manhattan => row.manhattan_d_m,
                Metric::Euclidean => Some(row.euclidean_d_m),
            },
        ) else {
            continue;
        };
        let Some(d) = d else { continue };
        pl.push(total);
        dist.push(d);
    }
    if pl.is_empty() {
        bail!("no usable rows after filtering");
    }
    let fit = fit_linear_pl(&pl, &dist, metric, args.fix_alpha)?;
    println!("points:      {}", fit.n_points);
    println!("metric:      {}", fit.distance_metric);
    println!("alpha_db:    {:.4}", fit.alpha_db);
    println!("beta:        {:.4}", fit.beta);
    println!("sigma_resid: {:.4} dB", fit.sigma_resid_db);
    Ok(())
}
