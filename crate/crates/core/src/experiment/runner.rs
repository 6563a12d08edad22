//! Multi-seed training runs with periodic greedy evaluation.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use super::aggregate::{self, AggregateRow};
use super::config::ExperimentConfig;
use crate::actor::ActorParams;
use crate::envs::EnvKind;
use crate::error::{Error, Result};
use crate::replay::Transition;
use crate::surrogate::SurrogateKind;
use crate::td3::Td3State;
use crate::tensor::Rng;

pub const CSV_HEADER: [&str; 7] = [
    "env_step",
    "mean_return",
    "std_return",
    "critic_loss",
    "mean_q",
    "surrogate",
    "seed",
];

/// One evaluation point of a run.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalRow {
    pub env_step: usize,
    pub mean_return: f64,
    pub std_return: f64,
    /// Mean over both critics and all updates since the previous row;
    /// `NaN` if there were none.
    pub critic_loss: f64,
    /// Mean `Q1(s, pi(s))` over actor updates since the previous row;
    /// `NaN` if there were none.
    pub mean_q: f64,
    pub surrogate: SurrogateKind,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub surrogate: SurrogateKind,
    pub seed: u64,
    pub rows: Vec<EvalRow>,
}

impl RunRecord {
    pub fn file_stem(kind: SurrogateKind, seed: u64) -> String {
        format!("run_{}_seed{seed}", kind.tag())
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
        w.write_record(CSV_HEADER).map_err(|e| csv_error(path, e))?;
        for r in &self.rows {
            w.write_record([
                r.env_step.to_string(),
                r.mean_return.to_string(),
                r.std_return.to_string(),
                r.critic_loss.to_string(),
                r.mean_q.to_string(),
                r.surrogate.tag().to_string(),
                r.seed.to_string(),
            ])
            .map_err(|e| csv_error(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut rd = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
        let header = rd.headers().map_err(|e| csv_error(path, e))?.clone();
        if header.iter().ne(CSV_HEADER) {
            return Err(Error::format(
                path.display().to_string(),
                format!("header is `{}`", header.iter().collect::<Vec<_>>().join(",")),
            ));
        }
        let mut rows = Vec::new();
        for rec in rd.records() {
            let rec = rec.map_err(|e| csv_error(path, e))?;
            let field = |i: usize| rec.get(i).unwrap_or("");
            let bad = |i: usize| {
                Error::format(
                    path.display().to_string(),
                    format!("line {}: bad `{}` value `{}`", rows.len() + 2, CSV_HEADER[i], field(i)),
                )
            };
            let num = |i: usize| field(i).parse::<f64>().map_err(|_| bad(i));
            rows.push(EvalRow {
                env_step: field(0).parse().map_err(|_| bad(0))?,
                mean_return: num(1)?,
                std_return: num(2)?,
                critic_loss: num(3)?,
                mean_q: num(4)?,
                surrogate: field(5).parse().map_err(|_| bad(5))?,
                seed: field(6).parse().map_err(|_| bad(6))?,
            });
        }
        let first = rows
            .first()
            .ok_or_else(|| Error::format(path.display().to_string(), "no evaluation rows"))?;
        let (surrogate, seed) = (first.surrogate, first.seed);
        if rows.iter().any(|r| r.surrogate != surrogate || r.seed != seed) {
            return Err(Error::format(path.display().to_string(), "rows mix runs"));
        }
        if rows.windows(2).any(|w| w[1].env_step <= w[0].env_step) {
            return Err(Error::format(path.display().to_string(), "env_step not strictly increasing"));
        }
        Ok(RunRecord { surrogate, seed, rows })
    }
}

pub(crate) fn csv_error(path: &Path, e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            _ => unreachable!(),
        }
    } else {
        Error::format(path.display().to_string(), e.to_string())
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Greedy episode returns of `actor` on fresh instances of `env`.
pub fn evaluate(actor: &ActorParams, env: EnvKind, episodes: usize, rng: &mut Rng) -> Result<Vec<f64>> {
    let mut e = env.make();
    let mut returns = Vec::with_capacity(episodes);
    for _ in 0..episodes {
        let mut obs = e.reset(rng);
        let mut total = 0.0;
        loop {
            let step = e.step(&actor.act(&obs)?)?;
            total += step.reward;
            obs = step.obs;
            if step.done {
                break;
            }
        }
        returns.push(total);
    }
    Ok(returns)
}

/// Episode returns of the uniform random policy.
pub fn random_policy_returns(env: EnvKind, episodes: usize, rng: &mut Rng) -> Result<Vec<f64>> {
    let mut e = env.make();
    let bound = e.spec().action_bound.clone();
    let mut returns = Vec::with_capacity(episodes);
    for _ in 0..episodes {
        e.reset(rng);
        let mut total = 0.0;
        loop {
            let a: Vec<f64> = bound.iter().map(|&b| rng.uniform_range(-b, b)).collect();
            let step = e.step(&a)?;
            total += step.reward;
            if step.done {
                break;
            }
        }
        returns.push(total);
    }
    Ok(returns)
}

/// Train one (surrogate, seed) pair from scratch.
pub fn run_single(
    cfg: &ExperimentConfig,
    kind: SurrogateKind,
    seed: u64,
    on_eval: &(dyn Fn(&EvalRow) + Sync),
) -> Result<(RunRecord, Td3State)> {
    cfg.validate()?;
    let spec = cfg.surrogate_spec(kind)?;
    let mut root = Rng::seed(seed);
    let mut init_rng = root.split();
    let mut env_rng = root.split();
    let mut explore_rng = root.split();
    let mut train_rng = root.split();
    let mut eval_rng = root.split();

    let mut env = cfg.env.make();
    let actor_cfg = cfg.actor_config(env.spec());
    let bound = env.spec().action_bound.clone();
    let mut state = Td3State::new(&actor_cfg, &cfg.td3, &mut init_rng)?;

    let mut rows = Vec::with_capacity(cfg.total_env_steps / cfg.eval_every);
    let (mut loss_sum, mut loss_n) = (0.0, 0usize);
    let (mut q_sum, mut q_n) = (0.0, 0usize);
    let mut obs = env.reset(&mut env_rng);
    for t in 0..cfg.total_env_steps {
        let action = if t < cfg.td3.warmup_steps {
            bound.iter().map(|&b| explore_rng.uniform_range(-b, b)).collect()
        } else {
            state.select_action(&cfg.td3, &obs, &mut explore_rng, true)?
        };
        let step = env.step(&action)?;
        state.push(Transition {
            s: obs,
            a: action,
            r: step.reward,
            s_next: step.obs.clone(),
            done: step.done && !step.truncated,
        });
        obs = if step.done { env.reset(&mut env_rng) } else { step.obs };

        if t >= cfg.td3.warmup_steps && state.buffer.len() >= cfg.td3.batch_size {
            let m = state.train_step(&cfg.td3, &spec, &mut train_rng)?;
            loss_sum += 0.5 * (m.critic_loss1 + m.critic_loss2);
            loss_n += 1;
            if let Some(q) = m.mean_q {
                q_sum += q;
                q_n += 1;
            }
        }

        let env_step = t + 1;
        if env_step % cfg.eval_every == 0 {
            let returns = evaluate(&state.actor, cfg.env, cfg.eval_episodes, &mut eval_rng)?;
            let (mean_return, std_return) = mean_std(&returns);
            let ratio = |s: f64, n: usize| if n == 0 { f64::NAN } else { s / n as f64 };
            let row = EvalRow {
                env_step,
                mean_return,
                std_return,
                critic_loss: ratio(loss_sum, loss_n),
                mean_q: ratio(q_sum, q_n),
                surrogate: kind,
                seed,
            };
            on_eval(&row);
            rows.push(row);
            (loss_sum, loss_n, q_sum, q_n) = (0.0, 0, 0.0, 0);
        }
    }
    Ok((
        RunRecord {
            surrogate: kind,
            seed,
            rows,
        },
        state,
    ))
}

/// Worker count from `SGRL_THREADS`, else the available parallelism.
pub fn thread_budget() -> usize {
    std::env::var("SGRL_THREADS")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentOutputs {
    pub run_files: Vec<PathBuf>,
    pub aggregate_csv: PathBuf,
    pub plot_svg: PathBuf,
    pub aggregate: Vec<AggregateRow>,
}

/// Every (surrogate, seed) run, fanned out over `threads` workers, followed
/// by aggregation. Writes `run_<kind>_seed<N>.csv` and `.sgrl` per run plus
/// `config.txt`, `aggregate.csv` and `learning_curves.svg` into
/// `cfg.output_dir`.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    threads: usize,
    on_eval: &(dyn Fn(&EvalRow) + Sync),
) -> Result<ExperimentOutputs> {
    cfg.validate()?;
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let config_path = dir.join("config.txt");
    fs::write(&config_path, cfg.to_text()).map_err(|e| Error::io(&config_path, e))?;

    let jobs: Vec<(SurrogateKind, u64)> = cfg
        .surrogates
        .iter()
        .flat_map(|&k| cfg.seeds.iter().map(move |&s| (k, s)))
        .collect();
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<PathBuf>>>> = Mutex::new((0..jobs.len()).map(|_| None).collect());
    let work = || loop {
        let i = next.fetch_add(1, Ordering::SeqCst);
        let Some(&(kind, seed)) = jobs.get(i) else { break };
        let out = run_single(cfg, kind, seed, on_eval).and_then(|(record, state)| {
            let stem = RunRecord::file_stem(kind, seed);
            let csv_path = dir.join(format!("{stem}.csv"));
            record.write_csv(&csv_path)?;
            state.save(&dir.join(format!("{stem}.sgrl")))?;
            Ok(csv_path)
        });
        results.lock().expect("worker panicked")[i] = Some(out);
    };
    std::thread::scope(|s| {
        for _ in 0..threads.clamp(1, jobs.len()) {
            s.spawn(work);
        }
    });
    let run_files = results
        .into_inner()
        .expect("worker panicked")
        .into_iter()
        .map(|r| r.expect("every job ran"))
        .collect::<Result<Vec<_>>>()?;

    let aggregate_csv = dir.join("aggregate.csv");
    let plot_svg = dir.join("learning_curves.svg");
    let aggregate = aggregate::aggregate_and_plot(&run_files, &aggregate_csv, &plot_svg)?;
    Ok(ExperimentOutputs {
        run_files,
        aggregate_csv,
        plot_svg,
        aggregate,
    })
}
