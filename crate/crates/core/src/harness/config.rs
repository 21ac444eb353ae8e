//! Run configuration: defaults, the small-arena preset, and the flat
//! `key = value` config file format.
//!
//! Resolution order is defaults, then the preset, then the config file,
//! then command-line flags, and finally [`RunConfig::finalize`], which
//! copies the scenario into the world, derives the reward timing and
//! battery constants from the world, and validates everything.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::agent::{AgentConfig, AlgoMode};
use crate::ahp::{CategoryWeightTable, WeightVector};
use crate::replay;
use crate::reward::RewardConfig;
use crate::world::{CategoryLabel, Scenario, WorldConfig};

use super::HarnessError;

/// Fully resolved settings for one training or evaluation run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub algo: AlgoMode,
    /// Episodes per seed.
    pub episodes: usize,
    pub seeds: Vec<u64>,
    pub out_dir: PathBuf,
    pub world: WorldConfig,
    pub agent: AgentConfig,
    pub reward: RewardConfig,
    pub table: CategoryWeightTable,
    pub buffer_capacity: usize,
    /// Set once `reward.r_e_eps` is overridden explicitly; otherwise the
    /// epsilon keeps tracking 1% of the battery capacity.
    r_e_eps_overridden: bool,
}

impl RunConfig {
    pub fn train_defaults() -> Self {
        let world = WorldConfig::default();
        let reward = RewardConfig::new(world.dt, world.battery_capacity);
        RunConfig {
            scenario: Scenario::ReactiveSurvivor,
            algo: AlgoMode::Proposed,
            episodes: 5000,
            seeds: vec![1, 2, 3],
            out_dir: PathBuf::from("runs/train"),
            world,
            agent: AgentConfig::new(AlgoMode::Proposed),
            reward,
            table: CategoryWeightTable::default(),
            buffer_capacity: replay::DEFAULT_CAPACITY,
            r_e_eps_overridden: false,
        }
    }

    /// Evaluation defaults: 200 episodes per seed on the full-scale test
    /// field of fifteen obstacles, single seed.
    pub fn eval_defaults() -> Self {
        let mut cfg = Self::train_defaults();
        cfg.episodes = 200;
        cfg.seeds = vec![1];
        cfg.out_dir = PathBuf::from("runs/eval");
        cfg.world.n_obstacles = 15;
        cfg
    }

    /// Shrink the run so a full training pass finishes in minutes: 60 m
    /// arena, three small obstacles, [64, 64] networks. Training runs also
    /// drop to 300 episodes; evaluation keeps its episode count.
    pub fn apply_desk_preset(&mut self, training: bool) {
        self.world.arena_side = 60.0;
        self.world.n_obstacles = 3;
        self.world.obstacle_radius_min = 2.0;
        self.world.obstacle_radius_max = 8.0;
        if training {
            self.agent.hidden = vec![64, 64];
            self.episodes = 300;
        }
    }

    /// Apply a config file: one `key = value` per line, `#` comments, keys
    /// namespaced as `world.*`, `agent.*`, `reward.*` or `weights.*`.
    pub fn apply_file(&mut self, path: &Path) -> Result<(), HarnessError> {
        let text = fs::read_to_string(path).map_err(|e| {
            HarnessError::Config(format!("cannot read config file {}: {e}", path.display()))
        })?;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at = format!("{}:{}", path.display(), idx + 1);
            let (key, value) = line.split_once('=').ok_or_else(|| {
                HarnessError::Config(format!("{at}: expected 'key = value', got '{line}'"))
            })?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || value.is_empty() {
                return Err(HarnessError::Config(format!(
                    "{at}: expected 'key = value', got '{line}'"
                )));
            }
            self.apply_kv(key, value)
                .map_err(|msg| HarnessError::Config(format!("{at}: {msg}")))?;
        }
        Ok(())
    }

    /// Apply one namespaced override. Errors name the offending key.
    pub fn apply_kv(&mut self, key: &str, value: &str) -> Result<(), String> {
        let f = || parse_num::<f64>(key, value);
        let u = || parse_num::<usize>(key, value);
        match key {
            "world.arena_side" => self.world.arena_side = f()?,
            "world.n_obstacles" => self.world.n_obstacles = u()?,
            "world.obstacle_radius_min" => self.world.obstacle_radius_min = f()?,
            "world.obstacle_radius_max" => self.world.obstacle_radius_max = f()?,
            "world.obstacle_height" => self.world.obstacle_height = f()?,
            "world.dt" => self.world.dt = f()?,
            "world.max_steps" => self.world.max_steps = u()?,
            "world.v_max" => self.world.v_max = f()?,
            "world.altitude" => self.world.altitude = f()?,
            "world.lidar_beams" => self.world.lidar_beams = u()?,
            "world.lidar_range" => self.world.lidar_range = f()?,
            "world.battery_capacity" => self.world.battery_capacity = f()?,
            "world.scenario" => {
                return Err("key 'world.scenario' is set by the --scenario flag".into())
            }
            "world.seed" => {
                return Err("key 'world.seed' is driven per episode by the run seeds".into())
            }
            "agent.gamma" => self.agent.gamma = f()?,
            "agent.tau" => self.agent.tau = f()?,
            "agent.actor_lr" => self.agent.actor_lr = f()?,
            "agent.critic_lr" => self.agent.critic_lr = f()?,
            "agent.batch" => self.agent.batch = u()?,
            "agent.policy_update_frequency" => {
                self.agent.policy_update_frequency = parse_num::<u64>(key, value)?
            }
            "agent.exploration_noise_sigma" => self.agent.exploration_noise_sigma = f()?,
            "agent.policy_noise_sigma" => self.agent.policy_noise_sigma = f()?,
            "agent.noise_clip" => self.agent.noise_clip = f()?,
            "agent.hidden" => self.agent.hidden = parse_list::<usize>(key, value)?,
            "agent.reward_clip" => self.agent.reward_clip = f()?,
            "agent.buffer_capacity" => self.buffer_capacity = u()?,
            "agent.mode" => return Err("key 'agent.mode' is set by the --algo flag".into()),
            "reward.r_e_eps" => {
                self.reward.r_e_eps = f()?;
                self.r_e_eps_overridden = true;
            }
            "reward.r_e_cap" => self.reward.r_e_cap = f()?,
            "reward.k_h" => self.reward.k_h = f()?,
            "reward.unsafe_proximity_penalty" => self.reward.unsafe_proximity_penalty = f()?,
            "reward.collision_penalty" => self.reward.collision_penalty = f()?,
            "reward.success_bonus" => self.reward.success_bonus = f()?,
            "reward.dt" => return Err("key 'reward.dt' is derived from world.dt".into()),
            "reward.battery_capacity" => {
                return Err("key 'reward.battery_capacity' is derived from world.battery_capacity".into())
            }
            _ => {
                if let Some(label) = key.strip_prefix("weights.") {
                    let label: CategoryLabel = label
                        .parse()
                        .map_err(|_| format!("unknown config key '{key}'"))?;
                    let row = parse_list::<f64>(key, value)?;
                    if row.len() != 4 {
                        return Err(format!(
                            "key '{key}' needs 4 weights (time energy obstacle human), got {}",
                            row.len()
                        ));
                    }
                    let row = WeightVector::new(row[0], row[1], row[2], row[3]);
                    self.table
                        .set_row(label, row)
                        .map_err(|e| format!("key '{key}': {e}"))?;
                } else {
                    return Err(format!("unknown config key '{key}'"));
                }
            }
        }
        Ok(())
    }

    /// Copy run-level settings into the sub-configs, derive the reward
    /// constants from the world, and validate the result.
    pub fn finalize(&mut self) -> Result<(), HarnessError> {
        if self.episodes == 0 {
            return Err(HarnessError::Config("episodes must be positive".into()));
        }
        if self.seeds.is_empty() {
            return Err(HarnessError::Config("at least one seed is required".into()));
        }
        self.world.scenario = self.scenario;
        self.agent.mode = self.algo;
        self.reward.dt = self.world.dt;
        self.reward.battery_capacity = self.world.battery_capacity;
        if !self.r_e_eps_overridden {
            self.reward.r_e_eps = 0.01 * self.world.battery_capacity;
        }
        // Baselines skip the pairwise-comparison calibration and weigh the
        // four reward criteria equally in every category.
        if !self.algo.uses_similarity_replay() {
            self.table = CategoryWeightTable::uniform();
        }
        self.world.validate()?;
        self.agent.validate()?;
        for (name, v, positive) in [
            ("reward.r_e_eps", self.reward.r_e_eps, true),
            ("reward.r_e_cap", self.reward.r_e_cap, false),
            ("reward.k_h", self.reward.k_h, false),
            ("reward.unsafe_proximity_penalty", self.reward.unsafe_proximity_penalty, false),
            ("reward.collision_penalty", self.reward.collision_penalty, false),
            ("reward.success_bonus", self.reward.success_bonus, false),
        ] {
            if !v.is_finite() || (positive && v <= 0.0) {
                return Err(HarnessError::Config(format!("{name} = {v} is out of range")));
            }
        }
        if self.buffer_capacity < self.agent.batch {
            return Err(HarnessError::Config(format!(
                "agent.buffer_capacity {} is below the batch size {}; training could never start",
                self.buffer_capacity, self.agent.batch
            )));
        }
        Ok(())
    }

    /// The fully resolved configuration as config-file-style text, so a run
    /// is reproducible from its artifacts alone.
    pub fn resolved_text(&self, command: &str, checkpoint: Option<&Path>) -> String {
        let mut s = String::new();
        let w = &self.world;
        let a = &self.agent;
        let r = &self.reward;
        let _ = writeln!(s, "# resolved configuration");
        let _ = writeln!(s, "run.command = {command}");
        let _ = writeln!(s, "run.scenario = {}", self.scenario);
        let _ = writeln!(s, "run.algo = {}", self.algo);
        let _ = writeln!(s, "run.episodes = {}", self.episodes);
        let _ = writeln!(s, "run.seeds = {}", join(&self.seeds));
        let _ = writeln!(s, "run.out = {}", self.out_dir.display());
        if let Some(c) = checkpoint {
            let _ = writeln!(s, "run.checkpoint = {}", c.display());
        }
        let _ = writeln!(s, "world.arena_side = {}", w.arena_side);
        let _ = writeln!(s, "world.n_obstacles = {}", w.n_obstacles);
        let _ = writeln!(s, "world.obstacle_radius_min = {}", w.obstacle_radius_min);
        let _ = writeln!(s, "world.obstacle_radius_max = {}", w.obstacle_radius_max);
        let _ = writeln!(s, "world.obstacle_height = {}", w.obstacle_height);
        let _ = writeln!(s, "world.dt = {}", w.dt);
        let _ = writeln!(s, "world.max_steps = {}", w.max_steps);
        let _ = writeln!(s, "world.v_max = {}", w.v_max);
        let _ = writeln!(s, "world.altitude = {}", w.altitude);
        let _ = writeln!(s, "world.lidar_beams = {}", w.lidar_beams);
        let _ = writeln!(s, "world.lidar_range = {}", w.lidar_range);
        let _ = writeln!(s, "world.battery_capacity = {}", w.battery_capacity);
        let _ = writeln!(s, "agent.gamma = {}", a.gamma);
        let _ = writeln!(s, "agent.tau = {}", a.tau);
        let _ = writeln!(s, "agent.actor_lr = {}", a.actor_lr);
        let _ = writeln!(s, "agent.critic_lr = {}", a.critic_lr);
        let _ = writeln!(s, "agent.batch = {}", a.batch);
        let _ = writeln!(s, "agent.policy_update_frequency = {}", a.policy_update_frequency);
        let _ = writeln!(s, "agent.exploration_noise_sigma = {}", a.exploration_noise_sigma);
        let _ = writeln!(s, "agent.policy_noise_sigma = {}", a.policy_noise_sigma);
        let _ = writeln!(s, "agent.noise_clip = {}", a.noise_clip);
        let _ = writeln!(s, "agent.hidden = {}", join(&a.hidden));
        let _ = writeln!(s, "agent.reward_clip = {}", a.reward_clip);
        let _ = writeln!(s, "agent.buffer_capacity = {}", self.buffer_capacity);
        let _ = writeln!(s, "reward.r_e_eps = {}", r.r_e_eps);
        let _ = writeln!(s, "reward.r_e_cap = {}", r.r_e_cap);
        let _ = writeln!(s, "reward.k_h = {}", r.k_h);
        let _ = writeln!(s, "reward.unsafe_proximity_penalty = {}", r.unsafe_proximity_penalty);
        let _ = writeln!(s, "reward.collision_penalty = {}", r.collision_penalty);
        let _ = writeln!(s, "reward.success_bonus = {}", r.success_bonus);
        for label in CategoryLabel::ALL {
            let row = self.table.weights_for(label).as_array();
            let _ = writeln!(s, "weights.{label} = {}", join(&row));
        }
        s
    }
}

fn join<T: std::fmt::Display>(xs: &[T]) -> String {
    xs.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("key '{key}': cannot parse '{value}'"))
}

/// Comma- and/or whitespace-separated list.
fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>, String> {
    value
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse()
                .map_err(|_| format!("key '{key}': cannot parse '{t}'"))
        })
        .collect()
}
