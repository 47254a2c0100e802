//! Command-line interface: gen / train / apply / eval / verify / bench.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use ndarray::{Array1, Array2};

use edgc_core::corrector::{
    apply_batch, apply_corrector, apply_fused, fuse_discriminants, train_corrector,
    CenteringStats, ClusterPartition, ClusterSpace, CorrectorModel, DiscriminantSet,
    ProjectionBasis, SelectionRule, Thresholds, TrainConfig, WhiteningWeights,
};
use edgc_core::metrics::{roc_curve, sliding_window_score};
use edgc_core::separation::{
    check_dichotomy, estimate_remark2, estimate_theorem1, estimate_theorem2, sample_unit_ball,
    theorem3_bounds, BoundParams, Remark2Report, SeparabilityReport,
};
use edgc_core::ClassLabel;

use crate::csvio::{self, format_float};
use crate::modelio;
use crate::synth::{self, Generator, SyntheticSpec};

/// Environment variable consulted when --seed is omitted.
pub const SEED_ENV: &str = "EDGC_SEED";

#[derive(Parser)]
#[command(
    name = "edgc",
    about = "Train, deploy and evaluate 1-nn Fisher correctors; verify separability bounds",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic labeled dataset as CSV.
    Gen(GenArgs),
    /// Train a corrector from a labeled CSV and write a model file.
    Train(TrainArgs),
    /// Relabel a dataset with a trained model; emits predicted,cluster,score[,truth] rows.
    Apply(ApplyArgs),
    /// Compute the ROC curve and AUC from apply output; optionally a sliding-window score.
    Eval(EvalArgs),
    /// Run a Monte Carlo separability suite and write its report as CSV.
    Verify(VerifyArgs),
    /// Measure per-query deployment latency.
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    generator: GeneratorKind,
    /// Feature dimension.
    #[arg(long)]
    n: usize,
    #[arg(long)]
    x_count: usize,
    #[arg(long)]
    y_count: usize,
    /// Offset of the error-class ball (two-balls generator).
    #[arg(long)]
    epsilon: Option<f64>,
    /// Number of planted error blobs (planted-clusters generator).
    #[arg(long)]
    clusters: Option<usize>,
    /// Blob radius (planted-clusters generator).
    #[arg(long)]
    spread: Option<f64>,
    /// Distance of blob centers from the origin (planted-clusters generator).
    #[arg(long)]
    separation: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
    /// Write a header row.
    #[arg(long)]
    header: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum GeneratorKind {
    TwoBalls,
    PlantedClusters,
    UniformBall,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    data: PathBuf,
    /// 0-based index of the label column.
    #[arg(long)]
    label_col: usize,
    /// Input has a header row.
    #[arg(long)]
    header: bool,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    clusters: usize,
    /// kaiser | broken-stick | conditioning[:cap] | range:a:b (1-based, inclusive).
    #[arg(long, default_value = "kaiser")]
    rule: String,
    /// Relative ridge scale for the discriminant covariance.
    #[arg(long, default_value_t = edgc_core::corrector::DEFAULT_RIDGE)]
    ridge: f64,
    /// One global θ or k comma-separated per-cluster values.
    #[arg(long, default_value = "0")]
    threshold: String,
    #[arg(long, value_enum, default_value_t = SpaceKind::Whitened)]
    cluster_space: SpaceKind,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SpaceKind {
    Whitened,
    Original,
}

#[derive(Args)]
struct ApplyArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// 0-based label column to pass through as a truth column.
    #[arg(long)]
    label_col: Option<usize>,
    #[arg(long)]
    header: bool,
    #[arg(long)]
    out: PathBuf,
    /// Use the fused deployment path (requires original-space clustering).
    #[arg(long)]
    fused: bool,
}

#[derive(Args)]
struct EvalArgs {
    /// CSV produced by `apply` (predicted,cluster,score,truth).
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    header: bool,
    #[arg(long, default_value_t = 0)]
    pred_col: usize,
    #[arg(long, default_value_t = 2)]
    score_col: usize,
    #[arg(long, default_value_t = 3)]
    label_col: usize,
    /// Where to write the ROC curve CSV.
    #[arg(long)]
    roc_out: PathBuf,
    /// Sliding-window length over the predicted labels.
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    window_out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// 1 | 2 | 3 | dichotomy | remark2
    #[arg(long)]
    theorem: String,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Ambient dimension n.
    #[arg(long)]
    n: Option<usize>,
    /// Sample size M (theorems 1–3, dichotomy) or per-class count (remark2).
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    trials: Option<u64>,
    /// Regularity constant C (default 1, the uniform-ball value).
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// Regularity constant r (default 1, the uniform-ball value).
    #[arg(long, default_value_t = 1.0)]
    r: f64,
    /// Hyperplane offset fraction κ (remark2).
    #[arg(long)]
    kappa: Option<f64>,
    /// Ball-center offset ε (remark2).
    #[arg(long)]
    epsilon: Option<f64>,
    /// ‖y‖ for theorem 3.
    #[arg(long)]
    y_norm: Option<f64>,
    /// Number of combination vectors d (theorem 2).
    #[arg(long)]
    d: Option<usize>,
}

#[derive(Args)]
struct BenchArgs {
    /// Model file to benchmark.
    #[arg(long, conflicts_with = "shape")]
    model: Option<PathBuf>,
    /// Synthesize a model of shape n:m:k instead of loading one.
    #[arg(long)]
    shape: Option<String>,
    #[arg(long, default_value_t = 200)]
    queries: usize,
    #[arg(long)]
    seed: Option<u64>,
}

/// Entry point used by `main` and by tests.
pub fn run<I, T>(argv: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)?;
    match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Train(args) => cmd_train(args),
        Command::Apply(args) => cmd_apply(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Bench(args) => cmd_bench(args),
    }
}

fn resolve_seed(flag: Option<u64>) -> Result<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(raw) => raw
            .parse::<u64>()
            .with_context(|| format!("{SEED_ENV} must be an unsigned integer, got {raw:?}")),
        Err(_) => Ok(0),
    }
}

fn parse_rule(raw: &str) -> Result<SelectionRule> {
    let parts: Vec<&str> = raw.split(':').collect();
    match parts.as_slice() {
        ["kaiser"] => Ok(SelectionRule::Kaiser),
        ["broken-stick"] => Ok(SelectionRule::BrokenStick),
        ["conditioning"] => Ok(SelectionRule::Conditioning {
            cap: SelectionRule::DEFAULT_CONDITION_CAP,
        }),
        ["conditioning", cap] => Ok(SelectionRule::Conditioning {
            cap: cap.parse().context("conditioning cap must be a number")?,
        }),
        ["range", a, b] => Ok(SelectionRule::ExplicitRange {
            lo: a.parse().context("range start must be an integer")?,
            hi: b.parse().context("range end must be an integer")?,
        }),
        _ => bail!("unknown rule {raw:?}; use kaiser | broken-stick | conditioning[:cap] | range:a:b"),
    }
}

fn parse_thresholds(raw: &str) -> Result<Thresholds> {
    let values: Vec<f64> = raw
        .split(',')
        .map(|part| part.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .with_context(|| format!("cannot parse thresholds {raw:?}"))?;
    match values.as_slice() {
        [] => bail!("empty threshold list"),
        [single] => Ok(Thresholds::Single(*single)),
        many => Ok(Thresholds::PerCluster(many.to_vec())),
    }
}

fn cmd_gen(args: GenArgs) -> Result<()> {
    let generator = match args.generator {
        GeneratorKind::TwoBalls => Generator::TwoBalls {
            epsilon: args
                .epsilon
                .context("two-balls requires --epsilon")?,
        },
        GeneratorKind::UniformBall => Generator::UniformBall,
        GeneratorKind::PlantedClusters => Generator::PlantedClusters {
            clusters: args
                .clusters
                .context("planted-clusters requires --clusters")?,
            spread: args.spread.context("planted-clusters requires --spread")?,
            separation: args
                .separation
                .context("planted-clusters requires --separation")?,
        },
    };
    let spec = SyntheticSpec {
        n: args.n,
        x_count: args.x_count,
        y_count: args.y_count,
        generator,
    };
    let seed = resolve_seed(args.seed)?;
    let ds = synth::generate(&spec, seed)?;
    let labels = ds.labels().to_vec();
    csvio::save_dataset(&args.out, &ds.features().to_owned(), Some(&labels), args.header)?;
    println!(
        "wrote {} rows ({} features) to {}",
        ds.n_samples(),
        ds.n_features(),
        args.out.display()
    );
    Ok(())
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    let dataset = csvio::load_labeled_csv(&args.data, args.label_col, args.header)?;
    let config = TrainConfig {
        clusters: args.clusters,
        rule: parse_rule(&args.rule)?,
        ridge: args.ridge,
        thresholds: parse_thresholds(&args.threshold)?,
        seed: resolve_seed(args.seed)?,
        space: match args.cluster_space {
            SpaceKind::Whitened => ClusterSpace::Whitened,
            SpaceKind::Original => ClusterSpace::CenteredOriginal,
        },
    };
    let started = Instant::now();
    let model = train_corrector(&dataset, &config)?;
    let elapsed = started.elapsed();
    modelio::save_model(&model, &args.out)?;
    println!(
        "trained n={} m={} k={} in {:.3}s; model written to {}",
        model.n_features(),
        model.n_components(),
        model.n_clusters(),
        elapsed.as_secs_f64(),
        args.out.display()
    );
    Ok(())
}

fn cmd_apply(args: ApplyArgs) -> Result<()> {
    let model = modelio::load_model(&args.model)?;
    if args.fused && model.fused_vectors.is_none() {
        bail!(
            "--fused needs a model clustered in the original space; \
             retrain with --cluster-space original"
        );
    }
    let data = csvio::load_csv(&args.data, args.label_col, args.header)?;
    let decisions = apply_batch(data.features.view(), &model, args.fused)?;

    let file = File::create(&args.out)
        .with_context(|| format!("cannot create {}", args.out.display()))?;
    let mut out = BufWriter::new(file);
    for (i, d) in decisions.iter().enumerate() {
        match &data.labels {
            Some(truth) => writeln!(
                out,
                "{},{},{},{}",
                d.label.to_bit(),
                d.cluster,
                format_float(d.score),
                truth[i].to_bit()
            )?,
            None => writeln!(
                out,
                "{},{},{}",
                d.label.to_bit(),
                d.cluster,
                format_float(d.score)
            )?,
        }
    }
    out.flush()?;
    let flagged = decisions
        .iter()
        .filter(|d| d.label == ClassLabel::Error)
        .count();
    println!(
        "applied to {} rows, {} flagged as errors; labels written to {}",
        decisions.len(),
        flagged,
        args.out.display()
    );
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let raw = csvio::load_csv(&args.data, None, args.header)?;
    let cols = raw.features.ncols();
    for (name, idx) in [
        ("pred-col", args.pred_col),
        ("score-col", args.score_col),
        ("label-col", args.label_col),
    ] {
        if idx >= cols {
            bail!("--{name} {idx} out of range: file has {cols} columns");
        }
    }
    let scores: Vec<f64> = raw.features.column(args.score_col).to_vec();
    let truth: Vec<ClassLabel> = raw
        .features
        .column(args.label_col)
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            ClassLabel::from_bit(v as u8)
                .filter(|_| v == 0.0 || v == 1.0)
                .with_context(|| format!("row {i}: truth column must be 0 or 1, found {v}"))
        })
        .collect::<Result<_>>()?;

    let roc = roc_curve(&scores, &truth)?;
    let file = File::create(&args.roc_out)
        .with_context(|| format!("cannot create {}", args.roc_out.display()))?;
    let mut out = BufWriter::new(file);
    writeln!(out, "threshold,false_positive_rate,true_positive_rate")?;
    for p in &roc.points {
        writeln!(
            out,
            "{},{},{}",
            format_float(p.threshold),
            format_float(p.false_positive_rate),
            format_float(p.true_positive_rate)
        )?;
    }
    out.flush()?;
    println!("auc,{}", format_float(roc.auc));

    if let Some(window) = args.window {
        let predictions: Vec<bool> = raw
            .features
            .column(args.pred_col)
            .iter()
            .map(|&v| v != 0.0)
            .collect();
        let smoothed = sliding_window_score(&predictions, window)?;
        let path = args
            .window_out
            .context("--window requires --window-out")?;
        let file =
            File::create(&path).with_context(|| format!("cannot create {}", path.display()))?;
        let mut out = BufWriter::new(file);
        writeln!(out, "window_score")?;
        for v in smoothed {
            writeln!(out, "{}", format_float(v))?;
        }
        out.flush()?;
    }
    Ok(())
}

fn write_report_csv(path: &Path, report: &SeparabilityReport) -> Result<()> {
    let mut out = String::from("trials,successes,empirical_frequency,theoretical_bound,standard_error\n");
    out.push_str(&format!(
        "{},{},{},{},{}\n",
        report.trials,
        report.successes,
        format_float(report.empirical_frequency),
        format_float(report.theoretical_bound),
        format_float(report.standard_error)
    ));
    std::fs::write(path, out)?;
    Ok(())
}

fn write_remark2_csv(path: &Path, report: &Remark2Report) -> Result<()> {
    let mut out = String::from(
        "count,missed_x_fraction,leaked_y_fraction,rho_x,rho_y,standard_error_x,standard_error_y\n",
    );
    out.push_str(&format!(
        "{},{},{},{},{},{},{}\n",
        report.count,
        format_float(report.missed_x_fraction),
        format_float(report.leaked_y_fraction),
        format_float(report.rho_x),
        format_float(report.rho_y),
        format_float(report.standard_error_x),
        format_float(report.standard_error_y)
    ));
    std::fs::write(path, out)?;
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> Result<()> {
    let seed = resolve_seed(args.seed)?;
    let need = |v: Option<usize>, name: &str| -> Result<usize> {
        v.with_context(|| format!("--theorem {} requires --{name}", args.theorem))
    };
    match args.theorem.as_str() {
        "1" => {
            let n = need(args.n, "n")?;
            let samples = need(args.samples, "samples")?;
            let trials = args.trials.context("--theorem 1 requires --trials")?;
            let params = BoundParams::new(args.c, args.r, n, samples)?;
            let report = estimate_theorem1(&params, trials, seed)?;
            write_report_csv(&args.out, &report)?;
            println!(
                "theorem 1: empirical {} vs bound {} (se {})",
                format_float(report.empirical_frequency),
                format_float(report.theoretical_bound),
                format_float(report.standard_error)
            );
        }
        "2" => {
            let n = need(args.n, "n")?;
            let d = need(args.d, "d")?;
            if d > n {
                bail!("--d must not exceed --n");
            }
            let samples = need(args.samples, "samples")?;
            let trials = args.trials.context("--theorem 2 requires --trials")?;
            // Built-in demo configuration: z₁…z_d are the first standard
            // basis vectors, the sample is uniform in the unit ball, and the
            // coefficients are uniform on [1, 2]^d.
            let mut z = Array2::zeros((d, n));
            for i in 0..d {
                z[[i, i]] = 1.0;
            }
            let sample = sample_unit_ball(n, samples, seed ^ 0xA5A5_5A5A_0F0F_F0F0);
            let report = estimate_theorem2(
                |rng| {
                    use rand::Rng;
                    Array1::from_shape_fn(d, |_| rng.random_range(1.0..2.0))
                },
                z.view(),
                sample.view(),
                trials,
                seed,
            )?;
            write_report_csv(&args.out, &report)?;
            println!(
                "theorem 2: empirical {} vs union-bound estimate {}",
                format_float(report.empirical_frequency),
                format_float(report.theoretical_bound)
            );
        }
        "3" => {
            let n = need(args.n, "n")?;
            let samples = need(args.samples, "samples")?;
            let y_norm = args.y_norm.context("--theorem 3 requires --y-norm")?;
            let params = BoundParams::new(args.c, args.r, n, samples)?;
            let bounds = theorem3_bounds(y_norm, &params)?;
            let mut out = String::from("y_norm,point_from_set,set_from_point\n");
            out.push_str(&format!(
                "{},{},{}\n",
                format_float(y_norm),
                format_float(bounds.point_from_set),
                format_float(bounds.set_from_point)
            ));
            std::fs::write(&args.out, out)?;
            println!(
                "theorem 3: point-from-set {} set-from-point {}",
                format_float(bounds.point_from_set),
                format_float(bounds.set_from_point)
            );
        }
        "dichotomy" => {
            let n = need(args.n, "n")?;
            let samples = need(args.samples, "samples")?;
            let trials = args
                .trials
                .context("--theorem dichotomy requires --trials")?;
            let report = check_dichotomy(n, samples, trials, seed)?;
            write_report_csv(&args.out, &report)?;
            println!(
                "dichotomy: empirical {} vs bound {} (se {})",
                format_float(report.empirical_frequency),
                format_float(report.theoretical_bound),
                format_float(report.standard_error)
            );
        }
        "remark2" => {
            let n = need(args.n, "n")?;
            let count = need(args.samples, "samples")? as u64;
            let kappa = args.kappa.context("--theorem remark2 requires --kappa")?;
            let epsilon = args
                .epsilon
                .context("--theorem remark2 requires --epsilon")?;
            let report = estimate_remark2(kappa, epsilon, n, count, seed)?;
            write_remark2_csv(&args.out, &report)?;
            println!(
                "remark2: missed-x {} (ρ_x {}), leaked-y {} (ρ_y {})",
                format_float(report.missed_x_fraction),
                format_float(report.rho_x),
                format_float(report.leaked_y_fraction),
                format_float(report.rho_y)
            );
        }
        other => bail!("unknown suite {other:?}; use 1 | 2 | 3 | dichotomy | remark2"),
    }
    Ok(())
}

/// Builds a throwaway model of the requested shape for latency measurements.
pub fn synthetic_model(n: usize, m: usize, k: usize, seed: u64) -> Result<CorrectorModel> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let basis_rows = synth::random_orthonormal_rows(m, n, seed);
    let eigenvalues = Array1::from_shape_fn(m, |i| 2.0 - i as f64 / m as f64);
    let basis = ProjectionBasis::from_raw(basis_rows, eigenvalues.clone(), None)?;
    let whitening = WhiteningWeights::from_eigenvalues(&eigenvalues)?;
    let centroids = Array2::<f64>::from_shape_fn((k, n), |_| rng.random_range(-1.0..1.0));
    let mut vectors = Array2::<f64>::from_shape_fn((k, m), |_| rng.random_range(-1.0..1.0));
    for mut row in vectors.rows_mut() {
        let norm = row.dot(&row).sqrt();
        row /= norm;
    }
    let fused = fuse_discriminants(&basis, &whitening, &vectors);
    Ok(CorrectorModel::from_parts(
        CenteringStats {
            centroid: Array1::from_shape_fn(n, |_| rng.random_range(-0.5..0.5)),
        },
        basis,
        whitening,
        ClusterPartition {
            centroids,
            assignments: Vec::new(),
            space: ClusterSpace::CenteredOriginal,
        },
        DiscriminantSet {
            vectors,
            thresholds: Thresholds::Single(0.0),
            ridge: f64::NAN,
        },
        Some(fused),
    )?)
}

/// Single-threaded mean per-query latency of one deployment path.
pub fn mean_query_latency(
    model: &CorrectorModel,
    queries: &Array2<f64>,
    fused: bool,
) -> Result<f64> {
    // Warmup pass so page faults and cache fills do not bias the mean.
    for row in queries.rows().into_iter().take(8) {
        if fused {
            apply_fused(row, model)?;
        } else {
            apply_corrector(row, model)?;
        }
    }
    let started = Instant::now();
    let mut guard = 0usize;
    for row in queries.rows() {
        let d = if fused {
            apply_fused(row, model)?
        } else {
            apply_corrector(row, model)?
        };
        guard += d.cluster;
    }
    let elapsed = started.elapsed().as_secs_f64();
    std::hint::black_box(guard);
    Ok(elapsed / queries.nrows() as f64)
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let seed = resolve_seed(args.seed)?;
    let model = match (&args.model, &args.shape) {
        (Some(path), None) => modelio::load_model(path)?,
        (None, Some(shape)) => {
            let parts: Vec<usize> = shape
                .split(':')
                .map(|p| p.parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .context("--shape must be n:m:k")?;
            let [n, m, k] = parts.as_slice() else {
                bail!("--shape must be n:m:k");
            };
            synthetic_model(*n, *m, *k, seed)?
        }
        _ => bail!("pass exactly one of --model or --shape n:m:k"),
    };
    let n = model.n_features();
    let queries = Array2::from_shape_fn((args.queries, n), |(i, j)| {
        // Cheap deterministic filler; latency does not depend on values.
        ((i * 31 + j * 17 + seed as usize) % 1000) as f64 / 500.0 - 1.0
    });

    let projected = mean_query_latency(&model, &queries, false)?;
    println!(
        "apply_corrector: mean {:.3} ms/query over {} queries (n={}, m={}, k={})",
        projected * 1e3,
        args.queries,
        n,
        model.n_components(),
        model.n_clusters()
    );
    if model.fused_vectors.is_some() {
        let fused = mean_query_latency(&model, &queries, true)?;
        println!(
            "apply_fused:     mean {:.3} ms/query over {} queries",
            fused * 1e3,
            args.queries
        );
    } else {
        println!("apply_fused:     unavailable (model clustered in whitened space)");
    }
    Ok(())
}
