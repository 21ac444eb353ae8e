//! End-to-end acceptance checks, one verdict line per criterion.
//!
//! Runs without the libtest harness so the criteria execute in order,
//! stream their verdicts, and share the expensive training runs. The
//! process exits nonzero if any criterion fails.

use std::collections::BTreeSet;
use std::path::Path;
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use saruav::agent::{Agent, AgentConfig, AlgoMode};
use saruav::ahp::{consistency_ratio, derive_weights, CategoryWeightTable};
use saruav::harness::metrics::parse_episodes_csv;
use saruav::harness::{run_training, EpisodeRecord, RunConfig};
use saruav::nn::{polyak_update, Activation, Mlp};
use saruav::replay::{selection_mask, Experience, LabeledBuffer};
use saruav::reward::{r_energy, r_human, r_obstacle, r_time, total_reward, RewardComponents, RewardConfig};
use saruav::world::{
    check_terminal, Action, CategoryLabel, Obstacle, Scenario, SurvivorState, Terminal, UavState,
    World, WorldConfig,
};
use saruav::{Vec2, WeightVector};

type CheckResult = Result<String, String>;

fn report(number: usize, name: &str, started: Instant, result: &CheckResult) -> bool {
    let secs = started.elapsed().as_secs_f64();
    match result {
        Ok(detail) => {
            println!("pass  criterion {number} ({name}): {detail} [{secs:.1}s]");
            true
        }
        Err(reason) => {
            println!("FAIL  criterion {number} ({name}): {reason} [{secs:.1}s]");
            false
        }
    }
}

fn main() {
    let mut passed = 0;
    let mut failed = 0;
    let mut tally = |ok: bool| if ok { passed += 1 } else { failed += 1 };

    let t = Instant::now();
    tally(report(1, "weight calibration fidelity", t, &calibration_fidelity()));
    let t = Instant::now();
    tally(report(2, "gradient correctness", t, &gradient_correctness()));
    let t = Instant::now();
    tally(report(3, "reward closed forms", t, &reward_closed_forms()));
    let t = Instant::now();
    tally(report(4, "termination triggers", t, &termination_triggers()));
    let t = Instant::now();
    tally(report(5, "replay selection and partitions", t, &replay_selection()));
    let t = Instant::now();
    tally(report(6, "delayed-update mechanics", t, &delayed_update_mechanics()));

    // Criteria 7 and 8 share the desk-scale training runs.
    let t = Instant::now();
    let proposed = desk_training(AlgoMode::Proposed);
    let proposed_secs = t.elapsed().as_secs_f64();
    let t = Instant::now();
    tally(report(
        7,
        "learning progress at desk scale",
        t,
        &learning_progress(&proposed, proposed_secs),
    ));
    let t = Instant::now();
    tally(report(8, "reward ordering against the baseline", t, &reward_ordering(&proposed)));
    let t = Instant::now();
    tally(report(9, "record-level determinism", t, &determinism()));

    println!("acceptance: {passed} passed, {failed} failed");
    if failed > 0 {
        std::process::exit(1);
    }
}

/// Each weight row must survive the trip through its consistent judgement
/// matrix: components back within 1e-3, consistency ratio zero, eigenpair
/// residual below 1e-8, all inside a second.
fn calibration_fidelity() -> CheckResult {
    let started = Instant::now();
    let table = CategoryWeightTable::default();
    let matrices = table.calibration_matrices();
    let mut max_err = 0.0f64;
    let mut max_cr = 0.0f64;
    let mut max_residual = 0.0f64;
    for (label, matrix) in CategoryLabel::ALL.iter().zip(&matrices) {
        let (weights, lambda) = derive_weights(matrix).map_err(|e| format!("{label}: {e}"))?;
        let want = table.weights_for(*label).as_array();
        let got = weights.as_array();
        for (w, g) in want.iter().zip(&got) {
            max_err = max_err.max((w - g).abs());
        }
        max_cr = max_cr.max(consistency_ratio(matrix, lambda).abs());
        let mut sum_sq = 0.0;
        for i in 0..4 {
            let mut acc = 0.0;
            for j in 0..4 {
                acc += matrix.get(i, j) * got[j];
            }
            sum_sq += (acc - lambda * got[i]).powi(2);
        }
        max_residual = max_residual.max(sum_sq.sqrt());
    }
    let secs = started.elapsed().as_secs_f64();
    if max_err >= 1e-3 {
        return Err(format!("round-trip error {max_err:.2e} >= 1e-3"));
    }
    if max_cr >= 1e-12 {
        return Err(format!("consistency ratio {max_cr:.2e} not zero"));
    }
    if max_residual >= 1e-8 {
        return Err(format!("eigenpair residual {max_residual:.2e} >= 1e-8"));
    }
    if secs >= 1.0 {
        return Err(format!("took {secs:.2}s, limit 1s"));
    }
    Ok(format!(
        "round-trip error {max_err:.1e}, max CR {max_cr:.1e}, max residual {max_residual:.1e}"
    ))
}

/// Analytic parameter and input gradients against central finite
/// differences on 100 random networks, max relative error below 1e-4,
/// within 30 seconds.
fn gradient_correctness() -> CheckResult {
    const NETS: usize = 100;
    let started = Instant::now();
    let shapes: [(&[usize], Activation); 5] = [
        (&[6, 12, 5, 2], Activation::Tanh),
        (&[7, 10, 1], Activation::Identity),
        (&[3, 9, 9, 4], Activation::Tanh),
        (&[11, 6, 3], Activation::Identity),
        (&[4, 16, 8, 2], Activation::Tanh),
    ];
    let mut rng = ChaCha12Rng::seed_from_u64(0x9fad);
    let mut worst = 0.0f64;
    let rel = |fd: f64, an: f64| (fd - an).abs() / fd.abs().max(an.abs()).max(1e-3);

    for trial in 0..NETS {
        let (sizes, act) = shapes[trial % shapes.len()];
        let mut net = Mlp::init(sizes, act, &mut rng).map_err(|e| e.to_string())?;
        let x: Vec<f64> = (0..sizes[0]).map(|_| rng.gen_range(-1.5..1.5)).collect();
        let v: Vec<f64> = (0..*sizes.last().unwrap())
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        let loss =
            |net: &Mlp, x: &[f64]| -> f64 { net.forward(x).iter().zip(&v).map(|(o, w)| o * w).sum() };
        let analytic = net.backprop(&x, &v);

        for layer in 0..analytic.weights.len() {
            for i in 0..analytic.weights[layer].len() {
                let w0 = net.weights[layer][i];
                let h = 1e-5 * (1.0 + w0.abs());
                net.weights[layer][i] = w0 + h;
                let hi = loss(&net, &x);
                net.weights[layer][i] = w0 - h;
                let lo = loss(&net, &x);
                net.weights[layer][i] = w0;
                worst = worst.max(rel((hi - lo) / (2.0 * h), analytic.weights[layer][i]));
            }
            for i in 0..analytic.biases[layer].len() {
                let b0 = net.biases[layer][i];
                let h = 1e-5 * (1.0 + b0.abs());
                net.biases[layer][i] = b0 + h;
                let hi = loss(&net, &x);
                net.biases[layer][i] = b0 - h;
                let lo = loss(&net, &x);
                net.biases[layer][i] = b0;
                worst = worst.max(rel((hi - lo) / (2.0 * h), analytic.biases[layer][i]));
            }
        }
        for i in 0..x.len() {
            let mut xp = x.clone();
            let h = 1e-5 * (1.0 + x[i].abs());
            xp[i] = x[i] + h;
            let hi = loss(&net, &xp);
            xp[i] = x[i] - h;
            let lo = loss(&net, &xp);
            worst = worst.max(rel((hi - lo) / (2.0 * h), analytic.input[i]));
        }
    }
    let secs = started.elapsed().as_secs_f64();
    if worst >= 1e-4 {
        return Err(format!("max relative error {worst:.2e} >= 1e-4"));
    }
    if secs >= 30.0 {
        return Err(format!("took {secs:.1}s, limit 30s"));
    }
    Ok(format!("{NETS} networks, max relative error {worst:.1e}"))
}

/// The four reward components at pinned inputs, plus the scalarization
/// identity on a thousand random weight/component draws.
fn reward_closed_forms() -> CheckResult {
    let cfg = RewardConfig::default();
    if r_time(0.5) != -0.5 {
        return Err(format!("time term at 0.5 s gave {}", r_time(0.5)));
    }
    if r_energy(50.0, 100.0, &cfg) != 1.0 {
        return Err(format!(
            "energy term at half charge gave {}",
            r_energy(50.0, 100.0, &cfg)
        ));
    }
    let obstacle = r_obstacle(3.0, false, &cfg);
    if (obstacle - (-(-3.0f64).exp())).abs() > 1e-12 {
        return Err(format!("obstacle term at 3 m gave {obstacle}"));
    }
    let human = r_human(5.0, 10.0, &cfg);
    if human != -5.0 {
        return Err(format!("comfort term at flee speed 5 gave {human}"));
    }

    let mut rng = ChaCha12Rng::seed_from_u64(42);
    let mut max_diff = 0.0f64;
    for _ in 0..1000 {
        let components = RewardComponents {
            time: rng.gen_range(-10.0..10.0),
            energy: rng.gen_range(-10.0..10.0),
            obstacle: rng.gen_range(-10.0..10.0),
            human: rng.gen_range(-10.0..10.0),
        };
        let weights = WeightVector::new(
            rng.gen_range(0.01..10.0),
            rng.gen_range(0.01..10.0),
            rng.gen_range(0.01..10.0),
            rng.gen_range(0.01..10.0),
        )
        .normalized();
        let got = total_reward(components, &weights, None, &cfg);
        let want = weights
            .as_array()
            .iter()
            .zip(&components.as_array())
            .map(|(w, c)| w * c)
            .sum::<f64>();
        max_diff = max_diff.max((got - want).abs());
    }
    if max_diff > 1e-12 {
        return Err(format!("scalarization differs from dot product by {max_diff:.2e}"));
    }
    Ok(format!(
        "four closed forms exact, 1000-draw scalarization error {max_diff:.1e}"
    ))
}

/// Scripted states hit each terminal cause exactly, and causes earlier in
/// the documented precedence shadow the later ones.
fn termination_triggers() -> CheckResult {
    let obstacle = Obstacle {
        center: Vec2::new(100.0, 100.0),
        radius: 10.0,
    };
    let world = World {
        config: WorldConfig {
            arena_side: 200.0,
            n_obstacles: 1,
            scenario: Scenario::ReactiveSurvivor,
            ..WorldConfig::default()
        },
        obstacles: vec![obstacle],
        uav_start: Vec2::new(20.0, 20.0),
        uav_start_heading: 0.0,
        survivor_start: Vec2::new(170.0, 30.0),
    };
    let uav = |pos: Vec2, vel: Vec2| UavState {
        pos,
        vel,
        heading: 0.0,
        battery: 80.0,
    };
    let survivor = |drift: f64| SurvivorState {
        pos: world.survivor_start,
        vel: Vec2::new(0.0, 0.0),
        drift,
    };
    let far = Vec2::new(20.0, 170.0);
    let expect = |case: &str, got: Option<Terminal>, want: Option<Terminal>| {
        if got == want {
            Ok(())
        } else {
            Err(format!("{case}: expected {want:?}, got {got:?}"))
        }
    };

    // Each cause in isolation, with its boundary.
    expect(
        "drift 20.5 m",
        check_terminal(&uav(far, Vec2::new(1.0, 0.0)), &survivor(20.5), &world, 0),
        Some(Terminal::DriftFailure),
    )?;
    expect(
        "drift exactly 20 m",
        check_terminal(&uav(far, Vec2::new(1.0, 0.0)), &survivor(20.0), &world, 0),
        None,
    )?;
    let near_survivor = world.survivor_start + Vec2::new(-19.0, 0.0);
    expect(
        "20.1 m/s at 19 m",
        check_terminal(&uav(near_survivor, Vec2::new(20.1, 0.0)), &survivor(0.0), &world, 0),
        Some(Terminal::SpeedFailure),
    )?;
    expect(
        "20.1 m/s at 21 m",
        check_terminal(
            &uav(world.survivor_start + Vec2::new(-21.0, 0.0), Vec2::new(20.1, 0.0)),
            &survivor(0.0),
            &world,
            0,
        ),
        None,
    )?;
    let approach = world.survivor_start + Vec2::new(-3.4, 0.0);
    expect(
        "3.4 m away at 4 m/s",
        check_terminal(&uav(approach, Vec2::new(4.0, 0.0)), &survivor(0.0), &world, 0),
        Some(Terminal::Success),
    )?;
    let contact = obstacle.center + Vec2::new(obstacle.radius, 0.0);
    expect(
        "obstacle contact",
        check_terminal(&uav(contact, Vec2::new(1.0, 0.0)), &survivor(0.0), &world, 0),
        Some(Terminal::Collision),
    )?;

    // Precedence ladder: each earlier cause shadows the next one down.
    expect(
        "collision shadows drift",
        check_terminal(&uav(contact, Vec2::new(1.0, 0.0)), &survivor(25.0), &world, 0),
        Some(Terminal::Collision),
    )?;
    expect(
        "out of bounds shadows drift",
        check_terminal(
            &uav(Vec2::new(-1.0, 50.0), Vec2::new(1.0, 0.0)),
            &survivor(25.0),
            &world,
            0,
        ),
        Some(Terminal::OutOfBounds),
    )?;
    expect(
        "speed failure shadows drift",
        check_terminal(&uav(near_survivor, Vec2::new(20.1, 0.0)), &survivor(25.0), &world, 0),
        Some(Terminal::SpeedFailure),
    )?;
    expect(
        "drift shadows success",
        check_terminal(&uav(approach, Vec2::new(4.0, 0.0)), &survivor(25.0), &world, 0),
        Some(Terminal::DriftFailure),
    )?;
    let mut drained = uav(approach, Vec2::new(4.0, 0.0));
    drained.battery = 0.0;
    expect(
        "success shadows battery depletion",
        check_terminal(&drained, &survivor(0.0), &world, 0),
        Some(Terminal::Success),
    )?;
    let mut drained_far = uav(far, Vec2::new(1.0, 0.0));
    drained_far.battery = 0.0;
    expect(
        "battery depletion shadows timeout",
        check_terminal(&drained_far, &survivor(0.0), &world, 300),
        Some(Terminal::BatteryDepleted),
    )?;
    expect(
        "timeout at the step limit",
        check_terminal(&uav(far, Vec2::new(1.0, 0.0)), &survivor(0.0), &world, 300),
        Some(Terminal::Timeout),
    )?;
    Ok("7 causes, 4 boundaries and 6 precedence cases exact".into())
}

/// Pairwise selection always keeps the larger-magnitude TD error, and a
/// million-operation fuzz never breaks the label partitions.
fn replay_selection() -> CheckResult {
    let mut rng = ChaCha12Rng::seed_from_u64(0xd1ce);
    for _ in 0..10_000 {
        let n = rng.gen_range(1..=16);
        let td_similar: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let td_random: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let mask = selection_mask(&td_similar, &td_random);
        for i in 0..n {
            let chosen = if mask[i] { td_similar[i] } else { td_random[i] };
            let max_abs = td_similar[i].abs().max(td_random[i].abs());
            if chosen.abs() != max_abs {
                return Err(format!(
                    "pair ({}, {}) selected {chosen}",
                    td_similar[i], td_random[i]
                ));
            }
        }
    }

    const OPS: usize = 1_000_000;
    const CAPACITY: usize = 512;
    let mut buffer = LabeledBuffer::new(CAPACITY, 3);
    for op in 0..OPS {
        let label = CategoryLabel::from_index(rng.gen_range(0..4)).expect("label index");
        buffer.push(Experience {
            state: vec![rng.gen(), rng.gen(), rng.gen()],
            action: Action::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            reward: rng.gen_range(-10.0..10.0),
            next_state: vec![rng.gen(), rng.gen(), rng.gen()],
            done: rng.gen_bool(0.1),
            label,
        });
        buffer
            .validate_partitions()
            .map_err(|e| format!("after {} operations: {e}", op + 1))?;
    }
    Ok(format!(
        "10000 selection pairs exact; partitions intact over {OPS} operations"
    ))
}

/// Delayed actor updates, exact target tracking, and a monotone overfit on
/// one fixed batch.
fn delayed_update_mechanics() -> CheckResult {
    let state_dim = 6;
    let mut config = AgentConfig::new(AlgoMode::Proposed);
    config.hidden = vec![16, 16];
    config.batch = 8;
    let mut agent = Agent::new(state_dim, config.clone(), 77).map_err(|e| e.to_string())?;
    let mut rng = ChaCha12Rng::seed_from_u64(123);
    let batch: Vec<Experience> = (0..8)
        .map(|_| Experience {
            state: (0..state_dim).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            action: Action::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            reward: rng.gen_range(-3.0..3.0),
            next_state: (0..state_dim).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            done: true,
            label: CategoryLabel::FarFromBoth,
        })
        .collect();
    let refs: Vec<&Experience> = batch.iter().collect();

    // Odd update step: the critics move, the actor and targets hold still.
    let actor_before = agent.actor().clone();
    let target_before = agent.critic1_target().clone();
    let diag = agent.train_on_batch(&refs, &mut rng);
    if diag.actor_loss.is_some() {
        return Err("actor loss reported on an odd update step".into());
    }
    if agent.actor() != &actor_before {
        return Err("actor parameters moved on an odd update step".into());
    }
    if agent.critic1_target() != &target_before {
        return Err("target network moved before any policy update".into());
    }

    // Even update step: actor moves and every target is an exact
    // interpolation of its old self toward the fresh source.
    let actor_target_before = agent.actor_target().clone();
    let critic2_target_before = agent.critic2_target().expect("twin critic").clone();
    let diag = agent.train_on_batch(&refs, &mut rng);
    if diag.actor_loss.is_none() {
        return Err("no actor update on an even step".into());
    }
    if agent.actor() == &actor_before {
        return Err("actor parameters unchanged by the policy update".into());
    }
    let mut expected = target_before.clone();
    polyak_update(&mut expected, agent.critic1(), config.tau);
    if agent.critic1_target() != &expected {
        return Err("first critic target is not the exact interpolation".into());
    }
    let mut expected = actor_target_before.clone();
    polyak_update(&mut expected, agent.actor(), config.tau);
    if agent.actor_target() != &expected {
        return Err("actor target is not the exact interpolation".into());
    }
    let mut expected = critic2_target_before.clone();
    polyak_update(&mut expected, agent.critic2().expect("twin critic"), config.tau);
    if agent.critic2_target().expect("twin critic") != &expected {
        return Err("second critic target is not the exact interpolation".into());
    }

    // Overfit one fixed batch: the critic loss keeps falling once the
    // optimizer has warmed up.
    let mut agent = Agent::new(state_dim, config, 78).map_err(|e| e.to_string())?;
    let losses: Vec<f64> = (0..50)
        .map(|_| agent.train_on_batch(&refs, &mut rng).critic1_loss)
        .collect();
    for i in 5..losses.len() - 1 {
        if losses[i + 1] >= losses[i] {
            return Err(format!(
                "critic loss rose from {} to {} at step {}",
                losses[i],
                losses[i + 1],
                i + 2
            ));
        }
    }
    Ok(format!(
        "actor delayed, targets track exactly, overfit loss {:.4} -> {:.6}",
        losses[0],
        losses.last().unwrap()
    ))
}

fn desk_training(algo: AlgoMode) -> (Vec<EpisodeRecord>, f64, f64) {
    let dir = tempfile::tempdir().expect("tempdir");
    let mut cfg = RunConfig::train_defaults();
    cfg.apply_desk_preset(true);
    cfg.scenario = Scenario::ReactiveSurvivor;
    cfg.algo = algo;
    cfg.out_dir = dir.path().to_path_buf();
    cfg.finalize().expect("desk config");
    let summary = run_training(&cfg).expect("training run");
    let csv = std::fs::read_to_string(dir.path().join("episodes.csv")).expect("episodes.csv");
    let records = parse_episodes_csv(&csv).expect("parseable records");
    (records, summary.avg_reward, summary.success_rate)
}

/// Mean success rate over an inclusive episode window, averaged per seed.
fn window_success_rate(records: &[EpisodeRecord], lo: usize, hi: usize) -> f64 {
    let seeds: BTreeSet<u64> = records.iter().map(|r| r.seed).collect();
    let mut total = 0.0;
    for &seed in &seeds {
        let in_window: Vec<&EpisodeRecord> = records
            .iter()
            .filter(|r| r.seed == seed && (lo..=hi).contains(&r.episode))
            .collect();
        let successes = in_window
            .iter()
            .filter(|r| r.outcome == Terminal::Success)
            .count();
        total += 100.0 * successes as f64 / in_window.len() as f64;
    }
    total / seeds.len() as f64
}

/// Desk-scale three-seed run: the final fifty episodes must succeed at
/// least 20 percentage points more often than the first fifty, inside 15
/// minutes.
fn learning_progress(proposed: &(Vec<EpisodeRecord>, f64, f64), secs: f64) -> CheckResult {
    let records = &proposed.0;
    let early = window_success_rate(records, 1, 50);
    let late = window_success_rate(records, 251, 300);
    let gap = late - early;
    let detail = format!(
        "success rate {early:.1}% over episodes 1-50 vs {late:.1}% over 251-300 \
         (gap {gap:+.1} points), trained in {secs:.0}s"
    );
    if secs >= 900.0 {
        return Err(format!("{detail}; run exceeded the 15-minute limit"));
    }
    if gap < 20.0 {
        return Err(format!("{detail}; required at least +20 points"));
    }
    Ok(detail)
}

/// The proposed configuration must average at least as much reward as the
/// single-critic baseline over the same desk-scale run.
fn reward_ordering(proposed: &(Vec<EpisodeRecord>, f64, f64)) -> CheckResult {
    let (_, ddpg_ar, ddpg_sr) = desk_training(AlgoMode::DdpgBaseline);
    let proposed_ar = proposed.1;
    let detail = format!(
        "proposed avg reward {proposed_ar:.2} (success {:.1}%) vs ddpg {ddpg_ar:.2} (success {ddpg_sr:.1}%)",
        proposed.2
    );
    if proposed_ar >= ddpg_ar {
        Ok(detail)
    } else {
        Err(format!("{detail}; proposed fell below the baseline"))
    }
}

/// The same configuration and seed must reproduce episodes.csv byte for
/// byte.
fn determinism() -> CheckResult {
    let run = |dir: &Path| -> Result<Vec<u8>, String> {
        let mut cfg = RunConfig::train_defaults();
        cfg.apply_desk_preset(true);
        cfg.scenario = Scenario::ReactiveSurvivor;
        cfg.episodes = 25;
        cfg.seeds = vec![2];
        cfg.out_dir = dir.to_path_buf();
        cfg.finalize().map_err(|e| e.to_string())?;
        run_training(&cfg).map_err(|e| e.to_string())?;
        std::fs::read(dir.join("episodes.csv")).map_err(|e| e.to_string())
    };
    let dir_a = tempfile::tempdir().expect("tempdir");
    let dir_b = tempfile::tempdir().expect("tempdir");
    let a = run(dir_a.path())?;
    let b = run(dir_b.path())?;
    if a != b {
        return Err("repeated run produced different episodes.csv bytes".into());
    }
    Ok(format!("two 25-episode runs identical ({} bytes)", a.len()))
}
