//! Training and evaluation orchestration plus artifact emission.
//!
//! Both runners share one layout: `episodes.csv` streams one row per
//! finished episode (so the file is valid after truncation at any line
//! boundary), `trace_<seed>.csv` holds the step-level trace of each seed's
//! final episode, `summary.txt` and `reward_ma.csv` aggregate the run, and
//! `config_resolved.txt` echoes the full configuration. Training adds
//! `checkpoint_seed_<seed>.bin` and its manifest.
//!
//! Seeds run sequentially with fully isolated agent/buffer/RNG state; all
//! randomness derives from the seed, never from time, so a repeated run
//! reproduces its records byte for byte.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::agent::Agent;
use crate::replay::{Experience, LabeledBuffer};
use crate::world::{Simulation, Terminal, TraceRow, World, write_trace};

use super::config::RunConfig;
use super::metrics::{summarize, EpisodeRecord, Summary, EPISODES_HEADER};
use super::HarnessError;

// Distinct ChaCha streams per seed: one drives action noise and replay
// sampling, the other deals out per-episode layout seeds.
const AGENT_STREAM: u64 = 1;
const WORLD_STREAM: u64 = 2;

struct EpisodeStats {
    outcome: Terminal,
    steps: usize,
    reward: f64,
    path_len: f64,
    min_clearance: f64,
    max_drift: f64,
}

/// Drive one episode to its terminal. With a buffer the transition stream
/// is stored (rewards clipped to the agent's bound) and the agent trains
/// after every step; without one the policy runs frozen.
fn run_episode<R: Rng>(
    sim: &mut Simulation,
    agent: &mut Agent,
    mut buffer: Option<&mut LabeledBuffer>,
    explore: bool,
    rng: &mut R,
    want_trace: bool,
) -> Result<(EpisodeStats, Option<Vec<TraceRow>>), HarnessError> {
    let clip = agent.config().reward_clip;
    let mut state = sim.state();
    let mut reward = 0.0;
    let mut path_len = 0.0;
    let mut prev_pos = sim.uav().pos;
    let mut min_clearance = sim.world().clearance(prev_pos);
    let mut max_drift = sim.survivor().drift;
    let mut trace = want_trace.then(|| vec![TraceRow::initial(sim)]);

    loop {
        let label = sim.label();
        let action = agent.select_action(&state, explore, rng);
        let out = sim.step(action)?;
        let next_state = sim.state();

        reward += out.reward;
        path_len += out.uav.pos.distance(prev_pos);
        prev_pos = out.uav.pos;
        min_clearance = min_clearance.min(sim.world().clearance(out.uav.pos));
        max_drift = max_drift.max(out.survivor.drift);
        if let Some(rows) = trace.as_mut() {
            rows.push(TraceRow::from_outcome(sim.steps(), &out));
        }

        if let Some(buffer) = buffer.as_deref_mut() {
            let prev_state = std::mem::replace(&mut state, next_state);
            buffer.push(Experience {
                state: prev_state,
                action,
                reward: out.reward.clamp(-clip, clip),
                next_state: state.clone(),
                done: out.terminal.is_some(),
                label,
            });
            agent.train_step(buffer, sim.label(), rng);
        } else {
            state = next_state;
        }

        if let Some(outcome) = out.terminal {
            return Ok((
                EpisodeStats {
                    outcome,
                    steps: sim.steps(),
                    reward,
                    path_len,
                    min_clearance,
                    max_drift,
                },
                trace,
            ));
        }
    }
}

struct ArtifactWriter {
    out_dir: PathBuf,
    csv_path: PathBuf,
    csv: BufWriter<File>,
}

impl ArtifactWriter {
    fn new(cfg: &RunConfig, command: &str, checkpoint: Option<&Path>) -> Result<Self, HarnessError> {
        let out_dir = cfg.out_dir.clone();
        fs::create_dir_all(&out_dir).map_err(HarnessError::io(&out_dir))?;
        let echo_path = out_dir.join("config_resolved.txt");
        fs::write(&echo_path, cfg.resolved_text(command, checkpoint))
            .map_err(HarnessError::io(&echo_path))?;
        let csv_path = out_dir.join("episodes.csv");
        let mut csv = BufWriter::new(File::create(&csv_path).map_err(HarnessError::io(&csv_path))?);
        writeln!(csv, "{EPISODES_HEADER}").map_err(HarnessError::io(&csv_path))?;
        Ok(ArtifactWriter {
            out_dir,
            csv_path,
            csv,
        })
    }

    /// Append one row and flush, so the file never loses finished episodes.
    fn append(&mut self, record: &EpisodeRecord) -> Result<(), HarnessError> {
        writeln!(self.csv, "{}", record.csv_row()).map_err(HarnessError::io(&self.csv_path))?;
        self.csv.flush().map_err(HarnessError::io(&self.csv_path))
    }

    fn write_trace(&self, seed: u64, rows: &[TraceRow]) -> Result<(), HarnessError> {
        let path = self.out_dir.join(format!("trace_{seed}.csv"));
        let mut f = BufWriter::new(File::create(&path).map_err(HarnessError::io(&path))?);
        write_trace(rows, &mut f).map_err(HarnessError::io(&path))?;
        f.flush().map_err(HarnessError::io(&path))
    }

    fn finish(mut self, summary: &Summary) -> Result<(), HarnessError> {
        self.csv.flush().map_err(HarnessError::io(&self.csv_path))?;
        let path = self.out_dir.join("summary.txt");
        fs::write(&path, summary.text()).map_err(HarnessError::io(&path))?;
        let path = self.out_dir.join("reward_ma.csv");
        fs::write(&path, summary.reward_ma_csv()).map_err(HarnessError::io(&path))
    }
}

fn seed_rngs(seed: u64) -> (ChaCha12Rng, ChaCha12Rng) {
    let mut agent_rng = ChaCha12Rng::seed_from_u64(seed);
    agent_rng.set_stream(AGENT_STREAM);
    let mut world_rng = ChaCha12Rng::seed_from_u64(seed);
    world_rng.set_stream(WORLD_STREAM);
    (agent_rng, world_rng)
}

fn fresh_sim(cfg: &RunConfig, world_rng: &mut ChaCha12Rng) -> Result<Simulation, HarnessError> {
    let mut wc = cfg.world.clone();
    wc.seed = world_rng.gen();
    let world = World::generate(&wc)?;
    Ok(Simulation::new(world, cfg.table.clone(), cfg.reward.clone()))
}

fn seed_progress(records: &[EpisodeRecord], seed: u64, elapsed_s: f64) {
    let stats = summarize(records);
    let per = stats.per_seed.iter().find(|s| s.seed == seed);
    if let Some(s) = per {
        println!(
            "seed {seed}: {} episodes, success {:.1}%, collision {:.1}%, avg reward {:.2} ({elapsed_s:.1}s)",
            s.episodes, s.success_rate, s.collision_rate, s.avg_reward
        );
    }
}

/// Train per seed over fresh worlds, streaming records as episodes finish;
/// saves a checkpoint and manifest per seed and returns the pooled summary.
pub fn run_training(cfg: &RunConfig) -> Result<Summary, HarnessError> {
    let mut writer = ArtifactWriter::new(cfg, "train", None)?;
    let state_dim = cfg.world.state_dim();
    let mut records = Vec::with_capacity(cfg.seeds.len() * cfg.episodes);

    for &seed in &cfg.seeds {
        let started = Instant::now();
        let mut agent = Agent::new(state_dim, cfg.agent.clone(), seed)?;
        let mut buffer = LabeledBuffer::new(cfg.buffer_capacity, state_dim);
        let (mut agent_rng, mut world_rng) = seed_rngs(seed);

        for episode in 1..=cfg.episodes {
            let ep_started = Instant::now();
            let mut sim = fresh_sim(cfg, &mut world_rng)?;
            let want_trace = episode == cfg.episodes;
            let (stats, trace) = run_episode(
                &mut sim,
                &mut agent,
                Some(&mut buffer),
                true,
                &mut agent_rng,
                want_trace,
            )?;
            let record = EpisodeRecord {
                episode,
                seed,
                outcome: stats.outcome,
                steps: stats.steps,
                reward: stats.reward,
                path_len: stats.path_len,
                min_clearance: stats.min_clearance,
                max_drift: stats.max_drift,
                wall_time_s: ep_started.elapsed().as_secs_f64(),
            };
            writer.append(&record)?;
            records.push(record);
            if let Some(rows) = trace {
                writer.write_trace(seed, &rows)?;
            }
        }

        let ckpt = writer.out_dir.join(format!("checkpoint_seed_{seed}.bin"));
        agent.save(&ckpt)?;
        let manifest = writer.out_dir.join(format!("manifest_seed_{seed}.txt"));
        fs::write(&manifest, agent.manifest_text(cfg.episodes as u64))
            .map_err(HarnessError::io(&manifest))?;
        seed_progress(&records, seed, started.elapsed().as_secs_f64());
    }

    let summary = summarize(&records);
    writer.finish(&summary)?;
    println!(
        "train done: success {:.1}%, collision {:.1}%, avg reward {:.2} -> {}",
        summary.success_rate,
        summary.collision_rate,
        summary.avg_reward,
        cfg.out_dir.display()
    );
    Ok(summary)
}

/// Evaluate a saved checkpoint with the policy frozen, over fresh worlds
/// per episode and seed. Emits the same record/summary/trace artifacts as
/// training.
pub fn run_eval(cfg: &RunConfig, checkpoint: &Path) -> Result<Summary, HarnessError> {
    let mut agent = Agent::load(checkpoint)?;
    if agent.state_dim() != cfg.world.state_dim() {
        return Err(HarnessError::Config(format!(
            "checkpoint expects a state of {} values but the world produces {}; \
             check world.lidar_beams",
            agent.state_dim(),
            cfg.world.state_dim()
        )));
    }
    let mut cfg = cfg.clone();
    cfg.algo = agent.mode();

    let mut writer = ArtifactWriter::new(&cfg, "eval", Some(checkpoint))?;
    let mut records = Vec::with_capacity(cfg.seeds.len() * cfg.episodes);

    for &seed in &cfg.seeds {
        let started = Instant::now();
        let (mut agent_rng, mut world_rng) = seed_rngs(seed);
        for episode in 1..=cfg.episodes {
            let ep_started = Instant::now();
            let mut sim = fresh_sim(&cfg, &mut world_rng)?;
            let want_trace = episode == cfg.episodes;
            let (stats, trace) =
                run_episode(&mut sim, &mut agent, None, false, &mut agent_rng, want_trace)?;
            let record = EpisodeRecord {
                episode,
                seed,
                outcome: stats.outcome,
                steps: stats.steps,
                reward: stats.reward,
                path_len: stats.path_len,
                min_clearance: stats.min_clearance,
                max_drift: stats.max_drift,
                wall_time_s: ep_started.elapsed().as_secs_f64(),
            };
            writer.append(&record)?;
            records.push(record);
            if let Some(rows) = trace {
                writer.write_trace(seed, &rows)?;
            }
        }
        seed_progress(&records, seed, started.elapsed().as_secs_f64());
    }

    let summary = summarize(&records);
    writer.finish(&summary)?;
    println!(
        "eval done: success {:.1}%, collision {:.1}%, avg reward {:.2} -> {}",
        summary.success_rate,
        summary.collision_rate,
        summary.avg_reward,
        cfg.out_dir.display()
    );
    Ok(summary)
}
