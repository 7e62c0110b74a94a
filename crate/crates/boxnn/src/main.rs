use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use boxnn::config::{load_config, to_toml};
use boxnn::datasets::{load_split, resolve_data_dir, Split, DATA_DIR_ENV};
use boxnn::idx::write_idx;
use boxnn::model_file::{self, ModelFile};
use boxnn::report::emit_report;
use boxnn::verify::{self, VerifyOptions};
use boxnn_core::oracle::{synth_two_class, SynthSpec};
use boxnn_core::train::train_with;
use boxnn_core::{cert, cert_acc_curve, BoxModel, Dataset, TrainConfig};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "boxnn",
    version,
    about = "Nearest-box classifiers with exact l0 certificates"
)]
struct Cli {
    /// Print machine-readable JSON on stdout.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct DataArgs {
    /// Root holding one subdirectory of IDX files per dataset.
    #[arg(long, env = DATA_DIR_ENV)]
    data_dir: Option<PathBuf>,

    /// Dataset subdirectory name.
    #[arg(long, default_value = "mnist")]
    dataset: String,

    /// Use a uniform random subset of this many points from the split.
    #[arg(long)]
    subsample: Option<usize>,

    /// Seed for subsampling (and training, where it overrides the config).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Train a box model and write it to a model file.
    Train {
        #[command(flatten)]
        data: DataArgs,
        /// TOML training config; defaults apply to missing fields.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// After every epoch, report the median certified radius on this many test points.
        #[arg(long)]
        monitor: Option<usize>,
    },
    /// Certify one test image (--index) or write per-image certificates for a split.
    Certify {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_enum, default_value = "test")]
        split: Split,
        #[arg(long)]
        index: Option<usize>,
        /// CSV with one certificate per image.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Certified accuracy curve, median certified radius and comparison tables.
    Eval {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_enum, default_value = "test")]
        split: Split,
        /// Largest budget on the curve; defaults to the input dimension.
        #[arg(long)]
        eps_max: Option<usize>,
        /// Baseline curves as CSV with header method,eps,acc.
        #[arg(long)]
        baselines: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the oracle suite: soundness, distance formula, gradients, concentration bound.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        instances: usize,
        #[arg(long, default_value_t = 20)]
        inputs: usize,
        #[arg(long, default_value_t = 100)]
        gradient_points: usize,
        #[arg(long, default_value_t = 100_000)]
        mc_samples: usize,
    },
    /// Generate the two-ball synthetic dataset as IDX files.
    Synth {
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 0.1)]
        eps_inf: f64,
        #[arg(long, default_value_t = 500)]
        samples_per_class: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory; receives train-* and t10k-* IDX files.
        #[arg(long)]
        out: PathBuf,
    },
}

fn load_data(args: &DataArgs, split: Split) -> Result<Dataset> {
    let root = resolve_data_dir(args.data_dir.as_deref());
    let data = load_split(&root, &args.dataset, split).with_context(|| {
        format!(
            "loading {} split of {} from {}",
            split_name(split),
            args.dataset,
            root.display()
        )
    })?;
    match args.subsample {
        Some(count) => Ok(data.subsample(count, args.seed.unwrap_or(0))?),
        None => Ok(data),
    }
}

fn split_name(split: Split) -> &'static str {
    match split {
        Split::Train => "train",
        Split::Test => "test",
    }
}

fn check_compatible(model: &BoxModel, data: &Dataset) -> Result<()> {
    if model.dim() != data.dim() {
        bail!(
            "model expects {} inputs but the dataset has {}",
            model.dim(),
            data.dim()
        );
    }
    Ok(())
}

fn train(
    json: bool,
    data: &DataArgs,
    config: Option<&Path>,
    out: &Path,
    monitor: Option<usize>,
) -> Result<()> {
    let mut cfg = match config {
        Some(path) => load_config(path)?,
        None => TrainConfig::default(),
    };
    if let Some(seed) = data.seed {
        cfg.seed = seed;
    }
    let train_set = load_data(data, Split::Train)?;
    let monitor_set = match monitor {
        Some(count) => {
            let test = load_data(
                &DataArgs {
                    subsample: None,
                    ..data.clone()
                },
                Split::Test,
            )?;
            Some(test.subsample(count.min(test.len()), 0)?)
        }
        None => None,
    };
    eprintln!(
        "training on {} points of dimension {} with\n{}",
        train_set.len(),
        train_set.dim(),
        to_toml(&cfg)
    );
    let started = Instant::now();
    let trained = train_with(&train_set, &cfg, |e| {
        let mut line = format!(
            "epoch {:>3}  loss {:>10.4}  acc {:.4}  cert {:>8.4}  {:>7.1}s",
            e.epoch + 1,
            e.report.loss,
            e.report.accuracy,
            e.report.mean_relaxed_certificate,
            started.elapsed().as_secs_f64()
        );
        if let Some(test) = &monitor_set {
            if let Ok(curve) = cert_acc_curve(e.model, test, test.dim()) {
                line += &format!(
                    "  test acc {:.4}  median radius {}",
                    curve.clean_accuracy(),
                    curve.median_certified_radius()
                );
            }
        }
        eprintln!("{line}");
    })?;
    model_file::save(
        &ModelFile {
            model: trained.model,
            config: Some(cfg),
        },
        out,
    )?;
    let seconds = started.elapsed().as_secs_f64();
    if json {
        println!(
            "{}",
            json!({ "model": out, "seconds": seconds, "history": trained.history })
        );
    } else {
        println!("wrote {} after {:.1}s", out.display(), seconds);
    }
    Ok(())
}

fn certify(
    json: bool,
    data: &DataArgs,
    model: &Path,
    split: Split,
    index: Option<usize>,
    out: Option<&Path>,
) -> Result<()> {
    let model = model_file::load(model)?.model;
    let set = load_data(data, split)?;
    check_compatible(&model, &set)?;
    if let Some(i) = index {
        if i >= set.len() {
            bail!("index {i} out of range for {} images", set.len());
        }
        let c = cert(&model, set.row(i))?;
        if json {
            println!(
                "{}",
                json!({ "index": i, "label": set.label(i), "certificate": c })
            );
        } else {
            println!(
                "image {i}: label {} predicted {} d1 {} d2 {} certified radius {}",
                set.label(i),
                c.predicted_label,
                c.d1,
                c.d2.map_or("inf".to_string(), |d| d.to_string()),
                c.certified_radius
            );
        }
        return Ok(());
    }
    let mut writer = match out {
        Some(p) => {
            Some(csv::Writer::from_path(p).with_context(|| format!("creating {}", p.display()))?)
        }
        None => None,
    };
    if let Some(w) = writer.as_mut() {
        w.write_record([
            "index",
            "label",
            "predicted",
            "d1",
            "d2",
            "margin",
            "certified_radius",
        ])?;
    }
    let mut correct = 0usize;
    let mut radii = Vec::with_capacity(set.len());
    for (i, (x, y)) in set.iter().enumerate() {
        let c = cert(&model, x)?;
        correct += usize::from(c.predicted_label == y);
        radii.push(c.certified_radius);
        if let Some(w) = writer.as_mut() {
            let opt = |v: Option<usize>| v.map_or(String::new(), |d| d.to_string());
            w.write_record([
                i.to_string(),
                y.to_string(),
                c.predicted_label.to_string(),
                c.d1.to_string(),
                opt(c.d2),
                opt(c.margin),
                c.certified_radius.to_string(),
            ])?;
        }
    }
    if let Some(mut w) = writer {
        w.flush()?;
    }
    let accuracy = correct as f64 / set.len().max(1) as f64;
    if json {
        println!("{}", json!({ "images": set.len(), "accuracy": accuracy }));
    } else {
        println!("{} images, accuracy {:.4}", set.len(), accuracy);
    }
    Ok(())
}

fn eval(
    json: bool,
    data: &DataArgs,
    model: &Path,
    split: Split,
    eps_max: Option<usize>,
    baselines: Option<&Path>,
    out: &Path,
) -> Result<()> {
    let model = model_file::load(model)?.model;
    let set = load_data(data, split)?;
    check_compatible(&model, &set)?;
    let started = Instant::now();
    let curve = cert_acc_curve(&model, &set, eps_max.unwrap_or(set.dim()))?;
    let summary = emit_report(&curve, baselines, out)?;
    if json {
        println!(
            "{}",
            json!({
                "images": set.len(),
                "clean_accuracy": summary.clean_accuracy,
                "median_certified_radius": summary.median_certified_radius,
                "seconds": started.elapsed().as_secs_f64(),
                "curve_csv": summary.curve_csv,
                "comparison_csv": summary.comparison_csv,
                "plot_csv": summary.plot_csv,
            })
        );
    } else {
        println!("images: {}", set.len());
        println!("clean accuracy: {:.4}", summary.clean_accuracy);
        println!(
            "median certified radius: {}",
            summary.median_certified_radius
        );
        println!("curve written to {}", summary.curve_csv.display());
    }
    Ok(())
}

fn run_verify(json: bool, opts: VerifyOptions) -> Result<()> {
    let summary = verify::run(&opts)?;
    if json {
        println!("{}", serde_json::to_string(&summary)?);
    } else {
        let s = &summary.soundness;
        println!(
            "soundness: {} inputs over {} instances, {} violations (next budget attackable on {}, not on {}, unresolved {})",
            s.inputs, s.instances, s.violations, s.tight, s.loose, s.gap_unresolved
        );
        println!(
            "distance formula: {} cases, {} mismatches",
            summary.distance_cases, summary.distance_mismatches
        );
        let g = &summary.gradient;
        println!(
            "gradient: {} partials at {} points, {} failures, worst error/tolerance {:.3}",
            g.partials, g.points, g.failures, g.worst_ratio
        );
        println!(
            "concentration bound: {} checks, {} failures",
            summary.concentration.checks, summary.concentration.failures
        );
        println!("{}", if summary.pass { "PASS" } else { "FAIL" });
    }
    if !summary.pass {
        bail!("verification failed");
    }
    Ok(())
}

fn synth(json: bool, spec: SynthSpec, out: &Path) -> Result<()> {
    let train = synth_two_class(&spec)?;
    let test = synth_two_class(&SynthSpec {
        seed: spec.seed.wrapping_add(1),
        ..spec.clone()
    })?;
    std::fs::create_dir_all(out)?;
    for (prefix, set) in [("train", &train), ("t10k", &test)] {
        write_idx(
            set,
            1,
            spec.n,
            out.join(format!("{prefix}-images-idx3-ubyte")),
            out.join(format!("{prefix}-labels-idx1-ubyte")),
        )?;
    }
    if json {
        println!(
            "{}",
            json!({ "out": out, "train": train.len(), "test": test.len() })
        );
    } else {
        println!(
            "wrote {} train and {} test points to {}",
            train.len(),
            test.len(),
            out.display()
        );
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let json = cli.json;
    match cli.command {
        Command::Train {
            data,
            config,
            out,
            monitor,
        } => train(json, &data, config.as_deref(), &out, monitor),
        Command::Certify {
            data,
            model,
            split,
            index,
            out,
        } => certify(json, &data, &model, split, index, out.as_deref()),
        Command::Eval {
            data,
            model,
            split,
            eps_max,
            baselines,
            out,
        } => eval(
            json,
            &data,
            &model,
            split,
            eps_max,
            baselines.as_deref(),
            &out,
        ),
        Command::Verify {
            seed,
            instances,
            inputs,
            gradient_points,
            mc_samples,
        } => run_verify(
            json,
            VerifyOptions {
                seed,
                instances,
                inputs_per_instance: inputs,
                gradient_points,
                mc_samples,
                ..VerifyOptions::default()
            },
        ),
        Command::Synth {
            n,
            eps_inf,
            samples_per_class,
            seed,
            out,
        } => synth(
            json,
            SynthSpec {
                n,
                eps_inf,
                samples_per_class,
                seed,
                ..SynthSpec::default()
            },
            &out,
        ),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", json!({ "error": format!("{e:#}") }));
            ExitCode::FAILURE
        }
    }
}
