use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lssal::eval::PrMode;
use lssal::Config;
use lssal_cli::commands::{cmd_eval, cmd_extract, cmd_predict, cmd_train, write_eval_outputs};
use lssal_cli::synth::synth_dataset;
use lssal_cli::{CliError, CliResult, Manifest};

#[derive(Parser)]
#[command(
    name = "lssal",
    version,
    about = "Weakly supervised salient object detection"
)]
struct Cli {
    /// Flat key = value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the training seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args)]
struct Chi2Flag {
    /// Expand the global descriptor with the chi-square feature map.
    #[arg(long)]
    chi2: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Compute feature caches for every manifest record.
    Extract {
        manifest: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Fit a model from existence labels.
    Train {
        manifest: PathBuf,
        #[arg(long, short)]
        model: PathBuf,
        /// Trace CSV (default: <model>.trace.csv).
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Feature cache directory, refreshed before training.
        #[arg(long)]
        cache: Option<PathBuf>,
        #[command(flatten)]
        chi2: Chi2Flag,
    },
    /// Write saliency maps and existence predictions.
    Predict {
        #[arg(long, short)]
        model: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
        /// Read the images from a manifest instead of the argument list.
        #[arg(long)]
        manifest: Option<PathBuf>,
        images: Vec<PathBuf>,
        /// All-black map for images predicted to have no salient object.
        #[arg(long)]
        force_black: bool,
        #[command(flatten)]
        chi2: Chi2Flag,
    },
    /// Score predictions against manifest masks.
    Eval {
        predictions: PathBuf,
        manifest: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
        /// PR curve CSV, written when the masks contain salient pixels.
        #[arg(long)]
        pr: Option<PathBuf>,
        /// Average per-image PR curves instead of pooling pixels.
        #[arg(long)]
        per_image_pr: bool,
    },
    /// Generate the synthetic dataset.
    Synth {
        #[arg(long, short, default_value_t = 100)]
        n: usize,
        #[arg(long, short)]
        out: PathBuf,
    },
}

fn with_ext(path: &Path, ext: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(ext);
    PathBuf::from(s)
}

fn report_failures(failed: &[(PathBuf, String)], total: usize) -> CliResult<()> {
    for (path, msg) in failed {
        eprintln!("{}: {msg}", path.display());
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Partial {
            failed: failed.len(),
            total,
        })
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let mut cfg = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.train.seed = seed;
    }
    match cli.cmd {
        Command::Extract { manifest, out } => {
            let m = Manifest::load(&manifest)?;
            let r = cmd_extract(&m, &out, &cfg)?;
            println!(
                "computed {}, skipped {}, failed {}",
                r.computed,
                r.skipped,
                r.failed.len()
            );
            report_failures(&r.failed, m.records.len())
        }
        Command::Train {
            manifest,
            model,
            trace,
            cache,
            chi2,
        } => {
            let m = Manifest::load(&manifest)?;
            let trace = trace.unwrap_or_else(|| with_ext(&model, ".trace.csv"));
            let s = cmd_train(&m, cache.as_deref(), &cfg, chi2.chi2, &model, &trace)?;
            println!(
                "final objective {:.6} after {} iterations",
                s.final_objective(),
                s.trace.len()
            );
            Ok(())
        }
        Command::Predict {
            model,
            out,
            manifest,
            images,
            force_black,
            chi2,
        } => {
            let mut inputs: Vec<(PathBuf, PathBuf)> =
                images.into_iter().map(|p| (p.clone(), p)).collect();
            if let Some(path) = manifest {
                let m = Manifest::load(&path)?;
                inputs.extend(m.records.iter().map(|r| (r.image.clone(), m.image_path(r))));
            }
            if inputs.is_empty() {
                return Err(CliError::Core(lssal::Error::InvalidArgument(
                    "no images given".into(),
                )));
            }
            let r = cmd_predict(&model, &inputs, &out, &cfg, chi2.chi2, force_black)?;
            let salient = r.rows.iter().filter(|row| row.y == 1).count();
            println!("{} images, {salient} with a salient object", r.rows.len());
            report_failures(&r.failed, inputs.len())
        }
        Command::Eval {
            predictions,
            manifest,
            out,
            pr,
            per_image_pr,
        } => {
            let m = Manifest::load(&manifest)?;
            let mode = if per_image_pr {
                PrMode::PerImage
            } else {
                PrMode::Pooled
            };
            let r = cmd_eval(&predictions, &m, mode)?;
            write_eval_outputs(&r, &out, pr.as_deref())?;
            let show = |v: Option<f64>| v.map_or("N/A".into(), |x| format!("{x:.4}"));
            println!(
                "AP {}  MAE {}  accuracy {}",
                show(r.row.ap),
                show(r.row.mae),
                show(r.row.accuracy)
            );
            Ok(())
        }
        Command::Synth { n, out } => {
            let path = synth_dataset(n, cfg.train.seed, &out)?;
            println!("{}", path.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(2);
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .expect("global pool is configured once");
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
