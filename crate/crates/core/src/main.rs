use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use sgrl::actor::ActorParams;
use sgrl::checkpoint;
use sgrl::envs::EnvKind;
use sgrl::experiment::{self, aggregate, plot, ExperimentConfig};
use sgrl::gradcheck::{self, GradcheckReport, GradcheckSizes};
use sgrl::surrogate::{SurrogateKind, SurrogateSpec};
use sgrl::tensor::{ParamSet, Rng};
use sgrl::{Error, Result};

#[global_allocator]
static GLOBAL: mimalloc::MiMalloc = mimalloc::MiMalloc;

const EXIT_CHECK_FAILED: u8 = 3;

#[derive(Parser)]
#[command(name = "sgrl", version, about = "Spiking-actor TD3 experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train every configured (surrogate, seed) pair and aggregate the curves.
    Train {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Run only this surrogate shape.
        #[arg(long)]
        surrogate: Option<SurrogateKind>,
        /// Run only this seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Combine the run_*.csv files in a directory into one aggregate CSV.
    Aggregate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render an aggregate CSV as an SVG learning-curve chart.
    Plot {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare actor backpropagation against finite differences.
    Gradcheck {
        #[arg(long, default_value = "trap")]
        surrogate: SurrogateKind,
        #[arg(long, default_value_t = 0.25)]
        w1: f64,
        #[arg(long, default_value_t = 0.75)]
        w2: f64,
        #[arg(long, default_value_t = 0.5)]
        vth: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of random networks to check.
        #[arg(long, default_value_t = 1)]
        nets: u64,
        #[arg(long, value_delimiter = ',', default_value = "16,16")]
        hidden: Vec<usize>,
    },
    /// Roll out a policy and print episode returns.
    EnvRollout {
        #[arg(long, default_value = "pendulum")]
        env: EnvKind,
        #[arg(long, value_enum, default_value_t = Policy::Random)]
        policy: Policy,
        /// Checkpoint to load for `--policy checkpoint`.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Config describing the checkpoint's architecture.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        episodes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Policy {
    Random,
    Checkpoint,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cmd: Command) -> Result<u8> {
    match cmd {
        Command::Train {
            config,
            surrogate,
            seed,
            out,
        } => train(config.as_deref(), surrogate, seed, out),
        Command::Aggregate { input, out } => {
            let files = aggregate::find_run_files(&input)?;
            if files.is_empty() {
                return Err(Error::Contract(format!("no run_*.csv files in {}", input.display())));
            }
            let records = files
                .iter()
                .map(|p| experiment::RunRecord::read_csv(p))
                .collect::<Result<Vec<_>>>()?;
            let rows = aggregate::aggregate(&records)?;
            aggregate::write_aggregate_csv(&out, &rows)?;
            println!("{} runs -> {} rows in {}", files.len(), rows.len(), out.display());
            Ok(0)
        }
        Command::Plot { input, out } => {
            let rows = aggregate::read_aggregate_csv(&input)?;
            std::fs::write(&out, plot::render_svg(&rows)).map_err(|e| io_error(&out, e))?;
            println!("wrote {}", out.display());
            Ok(0)
        }
        Command::Gradcheck {
            surrogate,
            w1,
            w2,
            vth,
            seed,
            nets,
            hidden,
        } => {
            let spec = match surrogate {
                SurrogateKind::Rectangular => SurrogateSpec::rectangular(w2, vth)?,
                SurrogateKind::Triangular => SurrogateSpec::triangular(w2, vth)?,
                SurrogateKind::Trapezoidal => SurrogateSpec::trapezoidal(w1, w2, vth)?,
            };
            if hidden.iter().any(|&h| h == 0) {
                return Err(Error::Validation {
                    field: "hidden".into(),
                    reason: "layer widths must be >= 1".into(),
                });
            }
            let sizes = GradcheckSizes {
                hidden,
                ..GradcheckSizes::default()
            };
            let reports = (0..nets.max(1))
                .map(|i| gradcheck::check_random(&sizes, spec, seed + i))
                .collect::<Result<Vec<_>>>()?;
            let report = GradcheckReport::merge_worst(&reports);
            println!("{:<16} {:>14} {:>14}", "group", "rel_error", "grad_norm");
            for g in &report.groups {
                println!("{:<16} {:>14.3e} {:>14.3e}", g.name, g.rel_error, g.grad_norm);
            }
            let worst = report.max_rel_error();
            let ok = report.passed(gradcheck::TOLERANCE);
            println!(
                "max relative error {worst:.3e} ({} tolerance {:e})",
                if ok { "within" } else { "EXCEEDS" },
                gradcheck::TOLERANCE
            );
            Ok(if ok { 0 } else { EXIT_CHECK_FAILED })
        }
        Command::EnvRollout {
            env,
            policy,
            checkpoint,
            config,
            episodes,
            seed,
        } => {
            let mut rng = Rng::seed(seed);
            let returns = match policy {
                Policy::Random => experiment::random_policy_returns(env, episodes, &mut rng)?,
                Policy::Checkpoint => {
                    let path = checkpoint.ok_or_else(|| Error::Validation {
                        field: "checkpoint".into(),
                        reason: "required with --policy checkpoint".into(),
                    })?;
                    let cfg = match config {
                        Some(p) => ExperimentConfig::load(&p)?,
                        None => ExperimentConfig::default(),
                    };
                    let actor = load_actor(&cfg, env, &path)?;
                    experiment::evaluate(&actor, env, episodes, &mut rng)?
                }
            };
            for (i, r) in returns.iter().enumerate() {
                println!("episode {i}: return {r:.3}");
            }
            let n = returns.len() as f64;
            let mean = returns.iter().sum::<f64>() / n;
            let std = (returns.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n).sqrt();
            println!("mean {mean:.3} std {std:.3} over {episodes} episodes");
            Ok(0)
        }
    }
}

fn train(config: Option<&Path>, surrogate: Option<SurrogateKind>, seed: Option<u64>, out: Option<PathBuf>) -> Result<u8> {
    let mut cfg = match config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(k) = surrogate {
        cfg.surrogates = vec![k];
    }
    if let Some(s) = seed {
        cfg.seeds = vec![s];
    }
    if let Some(o) = out {
        cfg.output_dir = o;
    }
    cfg.validate()?;
    let threads = experiment::thread_budget();
    eprintln!(
        "{} run(s) on {} thread(s), {} env steps each -> {}",
        cfg.surrogates.len() * cfg.seeds.len(),
        threads,
        cfg.total_env_steps,
        cfg.output_dir.display()
    );
    let outputs = experiment::run_experiment(&cfg, threads, &|row| {
        eprintln!(
            "[{} seed {}] step {:>7}  return {:>9.2} ± {:<8.2} critic_loss {:.4}",
            row.surrogate.tag(),
            row.seed,
            row.env_step,
            row.mean_return,
            row.std_return,
            row.critic_loss
        );
    })?;
    let last_step = outputs.aggregate.iter().map(|r| r.env_step).max().unwrap_or(0);
    for r in outputs.aggregate.iter().filter(|r| r.env_step == last_step) {
        println!(
            "{}: final return {:.2} ± {:.2} over {} seed(s)",
            r.surrogate.tag(),
            r.mean_return,
            r.std_return,
            r.n_seeds
        );
    }
    println!("aggregate: {}", outputs.aggregate_csv.display());
    println!("plot: {}", outputs.plot_svg.display());
    Ok(0)
}

fn load_actor(cfg: &ExperimentConfig, env: EnvKind, path: &Path) -> Result<ActorParams> {
    let spec = env.make().spec().clone();
    let mut actor = ActorParams::init(&cfg.actor_config(&spec), &mut Rng::seed(0))?;
    let entries = checkpoint::read(path)?;
    let names: Vec<String> = actor
        .named_params()
        .into_iter()
        .map(|(n, _)| format!("actor.{n}"))
        .collect();
    checkpoint::restore(&entries, &names, actor.params_mut())?;
    actor.validate()?;
    Ok(actor)
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}
