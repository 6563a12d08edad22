//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria 7-9 train full-size agents and take a long time on one core.
//! `SGRL_PROTOCOL_STEPS` sets the per-run length of the surrogate comparison
//! (criterion 8, default 10000).

mod common;

use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{central_differences, random_matrix, rel_err, smoothed_actor_objective, surrogate_integral};
use sgrl::actor::{
    actor_backward, encode_spikes, lif_step, ActorConfig, ActorParams, EncoderParams, LifLayerParams, LifState,
    SpikeMode,
};
use sgrl::critic::{CriticPair, DenseLayer, MlpParams};
use sgrl::envs::EnvKind;
use sgrl::experiment::{self, ExperimentConfig, ExperimentOutputs};
use sgrl::replay::{Batch, ReplayBuffer, Transition};
use sgrl::surrogate::{SurrogateKind, SurrogateSpec};
use sgrl::td3::{soft_update, Td3Config, Td3State};
use sgrl::tensor::{Matrix, ParamSet, Rng};

#[global_allocator]
static GLOBAL: mimalloc::MiMalloc = mimalloc::MiMalloc;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_spec(kind: SurrogateKind, rng: &mut Rng) -> SurrogateSpec {
    let vth = rng.uniform_range(-1.0, 2.0);
    let w2 = rng.uniform_range(0.01, 2.0);
    match kind {
        SurrogateKind::Rectangular => SurrogateSpec::rectangular(w2, vth),
        SurrogateKind::Triangular => SurrogateSpec::triangular(w2, vth),
        SurrogateKind::Trapezoidal => SurrogateSpec::trapezoidal(rng.uniform_range(0.0, w2), w2, vth),
    }
    .unwrap()
}

fn c1_normalization() -> Outcome {
    let mut rng = Rng::seed(101);
    let mut worst: f64 = 0.0;
    for kind in SurrogateKind::ALL {
        for _ in 0..100 {
            let spec = random_spec(kind, &mut rng);
            let err = (surrogate_integral(&spec, 10_000) - 1.0).abs();
            ensure(err <= 1e-6, || format!("{spec:?}: integral off by {err:e}"))?;
            worst = worst.max(err);
        }
    }
    Ok(format!("300 specs, worst |integral - 1| = {worst:.1e}"))
}

fn c2_degeneracy() -> Outcome {
    let mut rng = Rng::seed(102);
    let mut checked = 0usize;
    for _ in 0..10 {
        let w = rng.uniform_range(0.05, 1.5);
        let vth = rng.uniform_range(0.0, 1.0);
        let trap_rect = SurrogateSpec::trapezoidal(w, w, vth).unwrap();
        let rect = SurrogateSpec::rectangular(w, vth).unwrap();
        let trap_tri = SurrogateSpec::trapezoidal(0.0, w, vth).unwrap();
        let tri = SurrogateSpec::triangular(w, vth).unwrap();
        let breaks = [vth - w, vth, vth + w];
        for i in 0..10_000 {
            let v = vth - 2.0 * w + 4.0 * w * (i as f64 + 0.5) / 10_000.0;
            if breaks.contains(&v) {
                continue;
            }
            let (a, b) = (trap_rect.grad(v).unwrap(), rect.grad(v).unwrap());
            ensure(a.to_bits() == b.to_bits(), || format!("w1=w2={w}: v={v} trap {a} rect {b}"))?;
            let (a, b) = (trap_tri.grad(v).unwrap(), tri.grad(v).unwrap());
            ensure(a.to_bits() == b.to_bits(), || format!("w1=0, w2={w}: v={v} trap {a} tri {b}"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} grid points x 2 pairs bitwise equal"))
}

fn c3_actor_gradients() -> Outcome {
    let spec = SurrogateSpec::trapezoidal(0.25, 0.75, 0.5).unwrap();
    let mut worst: f64 = 0.0;
    let mut nets = 0;
    for hidden in [vec![16], vec![16, 16]] {
        for seed in 0..5 {
            let mut rng = Rng::seed(300 + seed);
            let mut cfg = ActorConfig::new(3, 2, 1.0);
            cfg.hidden = hidden.clone();
            let mut actor = ActorParams::init(&cfg, &mut rng).unwrap();
            for x in actor.encoder.mu.data_mut() {
                *x += rng.uniform_range(-0.05, 0.05);
            }
            let states = random_matrix(2, 3, -1.0, 1.0, &mut rng);
            let dl_da = random_matrix(2, 2, -1.0, 1.0, &mut rng);
            let trace = actor.forward_batch(&states, SpikeMode::Smoothed(spec)).unwrap();
            let analytic = actor_backward(&actor, &trace, &dl_da, &spec).unwrap();
            let numeric = central_differences(&actor, 1e-5, |a| smoothed_actor_objective(a, &states, &dl_da, spec));
            for ((name, _), (g, fd)) in actor
                .named_params()
                .iter()
                .zip(analytic.as_list().iter().zip(&numeric))
            {
                let err = rel_err(g.data(), fd);
                ensure(err < 1e-4, || format!("hidden {hidden:?} seed {seed}: {name} rel err {err:e}"))?;
                worst = worst.max(err);
            }
            nets += 1;
        }
    }
    Ok(format!("{nets} nets, every group, worst rel err {worst:.1e}"))
}

fn c4_critic_gradients() -> Outcome {
    let mut worst: f64 = 0.0;
    for seed in 0..5 {
        let mut rng = Rng::seed(400 + seed);
        let (no, na) = (5, 3);
        let net = MlpParams::init(no + na, &[32, 32], &mut rng);
        let s: Vec<f64> = (0..no).map(|_| rng.uniform_range(-1.0, 1.0)).collect();
        let a: Vec<f64> = (0..na).map(|_| rng.uniform_range(-1.0, 1.0)).collect();
        let dl_dq = rng.uniform_range(-2.0, 2.0);
        let (_, cache) = net.forward(&s, &a).unwrap();
        let grads = net.backward_params(&cache, &[dl_dq]).unwrap();
        let numeric = central_differences(&net, 1e-6, |n| dl_dq * common::q_value(n, &s, &a));
        for (g, fd) in grads.iter().zip(&numeric) {
            let err = rel_err(g.data(), fd);
            ensure(err < 1e-6, || format!("seed {seed}: parameter rel err {err:e}"))?;
            worst = worst.max(err);
        }
        let ga = net.action_grad(&s, &a).unwrap();
        let fd: Vec<f64> = (0..na)
            .map(|i| {
                let (mut up, mut down) = (a.clone(), a.clone());
                up[i] += 1e-6;
                down[i] -= 1e-6;
                (common::q_value(&net, &s, &up) - common::q_value(&net, &s, &down)) / 2e-6
            })
            .collect();
        let err = rel_err(&ga, &fd);
        ensure(err < 1e-6, || format!("seed {seed}: action rel err {err:e}"))?;
        worst = worst.max(err);
    }
    Ok(format!("5 nets (8-32-32-1), worst rel err {worst:.1e}"))
}

fn constant_critic(input: usize, q: f64) -> MlpParams {
    MlpParams {
        layers: vec![DenseLayer {
            w: Matrix::zeros(1, input),
            b: Matrix::filled(1, 1, q),
        }],
    }
}

fn c5_td3_mechanics() -> Outcome {
    // Soft update.
    let mut rng = Rng::seed(500);
    let live = CriticPair::init(3, 1, &[4], &mut rng);
    let base = CriticPair::init(3, 1, &[4], &mut rng);
    for tau in [0.0, 0.005, 1.0] {
        let mut target = base.clone();
        soft_update(&live, &mut target, tau).map_err(|e| e.to_string())?;
        for ((t, l), b) in target.params().iter().zip(live.params()).zip(base.params()) {
            for ((t, l), b) in t.data().iter().zip(l.data()).zip(b.data()) {
                let expected = tau * l + (1.0 - tau) * b;
                ensure(*t == expected, || format!("tau {tau}: {t} != {expected}"))?;
            }
        }
    }
    let mut t = base.clone();
    soft_update(&live, &mut t, 0.0).unwrap();
    ensure(t == base, || "tau=0 changed the target".into())?;
    soft_update(&live, &mut t, 1.0).unwrap();
    ensure(t == live, || "tau=1 did not copy".into())?;

    // Min rule and terminal masking.
    let cfg = Td3Config {
        batch_size: 4,
        buffer_capacity: 64,
        critic_hidden: vec![8],
        ..Td3Config::default()
    };
    let mut actor_cfg = ActorConfig::new(3, 1, 2.0);
    actor_cfg.hidden = vec![8];
    let mut st = Td3State::new(&actor_cfg, &cfg, &mut rng).unwrap();
    st.critics_target.q1 = constant_critic(4, 3.0);
    st.critics_target.q2 = constant_critic(4, 5.0);
    let tr = |r: f64, done: bool| Transition {
        s: vec![0.1, 0.2, 0.3],
        a: vec![0.5],
        r,
        s_next: vec![-0.3, 0.2, 0.1],
        done,
    };
    let (a, b, c) = (tr(0.0, false), tr(1.0, true), tr(-2.0, false));
    let batch = Batch::from_transitions(&[&a, &b, &c]).unwrap();
    let y = st.compute_target(&cfg, &batch, &mut rng).unwrap();
    ensure((y[0] - 2.97).abs() < 1e-12, || format!("min rule: y = {}", y[0]))?;
    ensure(y[1] == 1.0, || format!("terminal: y = {}", y[1]))?;
    ensure((y[2] - (-2.0 + 0.99 * 3.0)).abs() < 1e-12, || format!("y = {}", y[2]))?;
    let g0 = Td3Config { gamma: 0.0, ..cfg.clone() };
    let y = st.compute_target(&g0, &batch, &mut rng).unwrap();
    ensure(y == [0.0, 1.0, -2.0], || format!("gamma = 0: {y:?}"))?;

    // Replay eviction.
    let mut buf = ReplayBuffer::new(5);
    for i in 0..13 {
        buf.push(tr(i as f64, false));
    }
    let kept: Vec<f64> = buf.iter_oldest_first().map(|t| t.r).collect();
    ensure(kept == [8.0, 9.0, 10.0, 11.0, 12.0], || format!("eviction kept {kept:?}"))?;

    // Policy-delay gating.
    let mut st = Td3State::new(&actor_cfg, &cfg, &mut rng).unwrap();
    for _ in 0..16 {
        let s: Vec<f64> = (0..3).map(|_| rng.uniform_range(-1.0, 1.0)).collect();
        st.push(Transition {
            s: s.clone(),
            a: vec![rng.uniform_range(-2.0, 2.0)],
            r: -1.0,
            s_next: s,
            done: false,
        });
    }
    let spec = SurrogateSpec::trapezoidal(0.25, 0.75, 0.5).unwrap();
    let mut pattern = Vec::new();
    for _ in 0..6 {
        let target_before = st.actor_target.clone();
        let m = st.train_step(&cfg, &spec, &mut rng).unwrap();
        pattern.push(m.mean_q.is_some());
        ensure(m.mean_q.is_some() != (st.actor_target == target_before), || {
            "target moved without an actor update".into()
        })?;
    }
    ensure(pattern == [false, true, false, true, false, true], || format!("actor updates at {pattern:?}"))?;
    ensure(st.actor_opt.step_count == 3 && st.update_count == 6, || "update counters".into())?;
    Ok("soft update, min rule, masking, eviction, policy delay".into())
}

fn c6_hand_traces() -> Outcome {
    let enc = |eps: f64| EncoderParams {
        mu: Matrix::column(&[0.0]),
        sigma: Matrix::column(&[1.0]),
        epsilon: eps,
    };
    let s = encode_spikes(&enc(0.5), &[1.0], 3);
    ensure(s.data() == [1.0, 1.0, 1.0], || format!("A=1: {:?}", s.data()))?;
    let s = encode_spikes(&enc(0.5), &[0.3], 4);
    ensure(s.data() == [0.0, 1.0, 0.0, 1.0], || format!("A=0.3: {:?}", s.data()))?;
    let s = encode_spikes(&enc(0.5), &[1e-30], 5);
    ensure(s.data().iter().all(|&x| x == 0.0), || "A~0 spiked".into())?;
    let a = sgrl::actor::encode_intensity(&enc(0.5), &[1.0]).unwrap();
    ensure((a[0] - (-0.5f64).exp()).abs() < 1e-15, || format!("A(mu+sigma) = {}", a[0]))?;

    let layer = LifLayerParams {
        w: Matrix::column(&[1.0]),
        b: Matrix::column(&[0.2]),
        dc: 0.5,
        dv: 0.75,
        vth: 0.5,
    };
    let st = lif_step(&layer, &LifState::zeros(1), &[1.0]).unwrap();
    ensure(st.c == [1.2] && st.v == [1.2] && st.o == [1.0], || format!("drive 1.2: {st:?}"))?;
    let quiet = LifLayerParams {
        b: Matrix::column(&[0.0]),
        ..layer.clone()
    };
    let st = lif_step(&quiet, &LifState::zeros(1), &[0.0]).unwrap();
    ensure(st == LifState::zeros(1), || format!("quiescence: {st:?}"))?;
    let prev = LifState {
        c: vec![0.0],
        v: vec![10.0],
        o: vec![1.0],
    };
    let st = lif_step(&quiet, &prev, &[0.0]).unwrap();
    ensure(st.v == [0.0], || format!("refractory gate: v = {:?}", st.v))?;

    // Rate decoding: counts [5, 0, 3] over T=5.
    let counts = [5.0f64, 0.0, 3.0];
    let f: Vec<f64> = counts.iter().map(|c| c / 5.0).collect();
    ensure(f == [1.0, 0.0, 0.6], || format!("rates {f:?}"))?;
    let mut cfg = ActorConfig::new(2, 1, 1.0);
    cfg.hidden = vec![4];
    let mut actor = ActorParams::init(&cfg, &mut Rng::seed(6)).unwrap();
    actor.decoder.wa.fill(0.0);
    actor.decoder.ba.fill(0.7);
    let trace = actor.forward_batch(&Matrix::from_rows(&[&[0.3, -0.9]]).unwrap(), SpikeMode::Hard).unwrap();
    ensure(trace.pre_action.get(0, 0) == 0.7, || "weight-zero decoder".into())?;
    Ok("encoder, LIF and decoder worked examples exact".into())
}

fn learning_config(dir: &Path) -> ExperimentConfig {
    ExperimentConfig {
        output_dir: dir.to_path_buf(),
        ..ExperimentConfig::default()
    }
}

fn run(cfg: &ExperimentConfig) -> Result<ExperimentOutputs, String> {
    let threads = experiment::thread_budget();
    experiment::run_experiment(cfg, threads, &|row| {
        eprintln!(
            "    [{} seed {}] step {:>6} return {:>9.2}",
            row.surrogate.tag(),
            row.seed,
            row.env_step,
            row.mean_return
        );
    })
    .map_err(|e| e.to_string())
}

fn c7_learning(dir: &Path, elapsed: &mut Duration) -> Outcome {
    let mut rng = Rng::seed(7);
    let baseline = experiment::random_policy_returns(EnvKind::Pendulum, 100, &mut rng).map_err(|e| e.to_string())?;
    let n = baseline.len() as f64;
    let b_mean = baseline.iter().sum::<f64>() / n;
    let b_std = (baseline.iter().map(|r| (r - b_mean).powi(2)).sum::<f64>() / n).sqrt();
    let cfg = learning_config(dir);
    let start = Instant::now();
    let out = run(&cfg)?;
    *elapsed = start.elapsed();
    let last = out.aggregate.last().ok_or("no aggregate rows")?;
    let per_seed_min = elapsed.as_secs_f64() / 60.0 / cfg.seeds.len() as f64;
    let detail = format!(
        "final {:.1} ± {:.1} over {} seeds at step {}; random {:.1} ± {:.1}, bar {:.1}; {:.1} min/seed",
        last.mean_return,
        last.std_return,
        last.n_seeds,
        last.env_step,
        b_mean,
        b_std,
        (b_mean + 3.0 * b_std).max(-700.0),
        per_seed_min
    );
    ensure(last.env_step == 60_000 && last.n_seeds == 3, || format!("unexpected schedule: {detail}"))?;
    ensure(last.mean_return > b_mean + 3.0 * b_std, || format!("below baseline bar: {detail}"))?;
    ensure(last.mean_return > -700.0, || format!("below -700: {detail}"))?;
    ensure(per_seed_min <= 25.0, || format!("too slow: {detail}"))?;
    Ok(detail)
}

fn c8_protocol(dir: &Path) -> Outcome {
    let steps: usize = std::env::var("SGRL_PROTOCOL_STEPS")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(10_000);
    let cfg = ExperimentConfig {
        surrogates: SurrogateKind::ALL.to_vec(),
        total_env_steps: steps,
        eval_every: 2000.min(steps),
        output_dir: dir.to_path_buf(),
        ..ExperimentConfig::default()
    };
    let out = run(&cfg)?;
    ensure(out.run_files.len() == 9, || format!("{} run files", out.run_files.len()))?;
    let csvs = experiment::find_run_files(dir).map_err(|e| e.to_string())?;
    ensure(csvs.len() == 9, || format!("{} run_*.csv on disk", csvs.len()))?;
    let agg = fs::read_to_string(&out.aggregate_csv).map_err(|e| e.to_string())?;
    ensure(agg.starts_with("surrogate,env_step,mean_return,std_return,n_seeds\n"), || "aggregate header".into())?;
    let svg = fs::read_to_string(&out.plot_svg).map_err(|e| e.to_string())?;
    let bands = svg.matches(r#"class="band""#).count();
    ensure(bands == 3, || format!("{bands} shaded bands in the plot"))?;
    let last = out.aggregate.iter().map(|r| r.env_step).max().unwrap_or(0);
    let finals: Vec<(SurrogateKind, f64, f64)> = out
        .aggregate
        .iter()
        .filter(|r| r.env_step == last)
        .map(|r| (r.surrogate, r.mean_return, r.std_return))
        .collect();
    let trap = finals.iter().find(|f| f.0 == SurrogateKind::Trapezoidal).map_or(f64::NAN, |f| f.1);
    let best_other = finals
        .iter()
        .filter(|f| f.0 != SurrogateKind::Trapezoidal)
        .map(|f| f.1)
        .fold(f64::NEG_INFINITY, f64::max);
    let summary: Vec<String> = finals
        .iter()
        .map(|(k, m, s)| format!("{} {m:.1}±{s:.1}", k.tag()))
        .collect();
    Ok(format!(
        "9 runs x {steps} steps; final {}; trapezoidal >= others: {} (reported, not asserted)",
        summary.join(", "),
        if trap >= best_other { "yes" } else { "no" }
    ))
}

fn c9_determinism(first: &Path, second: &Path) -> Outcome {
    if !first.join("aggregate.csv").exists() {
        run(&learning_config(first))?;
    }
    run(&learning_config(second))?;
    let mut names: Vec<String> = experiment::find_run_files(first)
        .map_err(|e| e.to_string())?
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    names.push("aggregate.csv".into());
    for name in &names {
        let a = fs::read(first.join(name)).map_err(|e| format!("{name}: {e}"))?;
        let b = fs::read(second.join(name)).map_err(|e| format!("{name}: {e}"))?;
        ensure(a == b, || format!("{name} differs between runs"))?;
    }
    Ok(format!("{} CSVs bytewise identical", names.len()))
}

/// Positional numeric arguments restrict the run to those criteria.
struct Report {
    failures: usize,
    ran: usize,
    only: Vec<u32>,
}

impl Report {
    fn record(&mut self, id: u32, name: &str, limit: Option<Duration>, f: impl FnOnce() -> Outcome) {
        if !self.only.is_empty() && !self.only.contains(&id) {
            return;
        }
        self.ran += 1;
        let start = Instant::now();
        let result = f();
        let took = start.elapsed();
        let result = match (result, limit) {
            (Ok(d), Some(l)) if took > l => Err(format!("{d}; took {took:.2?}, limit {l:?}")),
            (r, _) => r,
        };
        match result {
            Ok(detail) => println!("PASS criterion {id} {name}: {detail} [{took:.2?}]"),
            Err(detail) => {
                self.failures += 1;
                println!("FAIL criterion {id} {name}: {detail} [{took:.2?}]");
            }
        }
    }
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let only: Vec<u32> = args.iter().filter_map(|a| a.parse().ok()).collect();
    let mut report = Report { failures: 0, ran: 0, only };
    let secs = Duration::from_secs;
    report.record(1, "surrogate normalization", Some(secs(1)), c1_normalization);
    report.record(2, "surrogate degeneracy", Some(secs(1)), c2_degeneracy);
    report.record(3, "actor gradient oracle", Some(secs(30)), c3_actor_gradients);
    report.record(4, "critic gradients", Some(secs(10)), c4_critic_gradients);
    report.record(5, "TD3 mechanics", Some(secs(1)), c5_td3_mechanics);
    report.record(6, "hand-stepped traces", Some(secs(1)), c6_hand_traces);

    let work = tempfile::tempdir().expect("temp dir");
    let (learn, protocol, repeat) = (work.path().join("learn"), work.path().join("protocol"), work.path().join("repeat"));
    let mut learn_time = Duration::ZERO;
    report.record(7, "learning at desk scale", None, || c7_learning(&learn, &mut learn_time));
    report.record(8, "surrogate comparison protocol", None, || c8_protocol(&protocol));
    report.record(9, "determinism", None, || c9_determinism(&learn, &repeat));

    println!(
        "acceptance: {} of {} criteria passed",
        report.ran - report.failures,
        report.ran
    );
    if report.failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
