//! Actor-critic learners. One `Agent` type hosts three modes: the proposed
//! learner (twin critics, delayed policy updates, target smoothing, and
//! similarity-partitioned replay selection), a vanilla TD3 baseline that
//! samples uniformly, and a DDPG baseline with a single critic, no target
//! smoothing, and per-step policy updates.

use crate::nn::{adam_step, polyak_update, Activation, AdamState, Gradients, Mlp, NnError};
use crate::replay::{select_by_td, Experience, LabeledBuffer};
use crate::world::{Action, CategoryLabel};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;
use thiserror::Error;

pub const ACTION_DIM: usize = 2;

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("bad agent configuration: {0}")]
    Config(String),
    #[error("bad checkpoint: {0}")]
    Format(String),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Which learner variant the agent runs as.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgoMode {
    /// Twin critics + delayed updates + smoothing + similarity replay and
    /// situation-dependent reward weights.
    Proposed,
    /// Same optimizer but uniform replay sampling and fixed uniform reward
    /// weights (applied by the harness).
    Td3Baseline,
    /// Single critic, no target smoothing, policy update every step.
    DdpgBaseline,
}

impl AlgoMode {
    pub fn uses_twin_critics(self) -> bool {
        !matches!(self, AlgoMode::DdpgBaseline)
    }

    pub fn uses_target_smoothing(self) -> bool {
        !matches!(self, AlgoMode::DdpgBaseline)
    }

    pub fn uses_similarity_replay(self) -> bool {
        matches!(self, AlgoMode::Proposed)
    }

    fn tag(self) -> u8 {
        match self {
            AlgoMode::Proposed => 0,
            AlgoMode::Td3Baseline => 1,
            AlgoMode::DdpgBaseline => 2,
        }
    }

    fn from_tag(t: u8) -> Option<AlgoMode> {
        match t {
            0 => Some(AlgoMode::Proposed),
            1 => Some(AlgoMode::Td3Baseline),
            2 => Some(AlgoMode::DdpgBaseline),
            _ => None,
        }
    }
}

impl std::fmt::Display for AlgoMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AlgoMode::Proposed => "proposed",
            AlgoMode::Td3Baseline => "td3",
            AlgoMode::DdpgBaseline => "ddpg",
        })
    }
}

impl FromStr for AlgoMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "proposed" => Ok(AlgoMode::Proposed),
            "td3" => Ok(AlgoMode::Td3Baseline),
            "ddpg" => Ok(AlgoMode::DdpgBaseline),
            other => Err(format!(
                "unknown algorithm '{other}' (expected proposed, td3 or ddpg)"
            )),
        }
    }
}

/// Training hyperparameters. `new` fills in the published defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentConfig {
    pub mode: AlgoMode,
    pub gamma: f64,
    pub tau: f64,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub batch: usize,
    pub policy_update_frequency: u64,
    pub exploration_noise_sigma: f64,
    pub policy_noise_sigma: f64,
    pub noise_clip: f64,
    pub hidden: Vec<usize>,
    /// Rewards are clipped to this magnitude before storage so critic
    /// regression targets stay bounded.
    pub reward_clip: f64,
}

impl AgentConfig {
    pub fn new(mode: AlgoMode) -> Self {
        AgentConfig {
            mode,
            gamma: 0.99,
            tau: 0.005,
            actor_lr: 1e-4,
            critic_lr: 1e-3,
            batch: 128,
            policy_update_frequency: match mode {
                AlgoMode::DdpgBaseline => 1,
                _ => 2,
            },
            exploration_noise_sigma: 0.1,
            policy_noise_sigma: 0.2,
            noise_clip: 0.5,
            hidden: vec![400, 300],
            reward_clip: 20.0,
        }
    }

    pub fn validate(&self) -> Result<(), AgentError> {
        let check = |name: &str, v: f64, allow_zero: bool| {
            if !v.is_finite() || v < 0.0 || (v == 0.0 && !allow_zero) {
                return Err(AgentError::Config(format!("{name} = {v} must be positive")));
            }
            Ok(())
        };
        check("gamma", self.gamma, false)?;
        check("tau", self.tau, false)?;
        check("actor_lr", self.actor_lr, false)?;
        check("critic_lr", self.critic_lr, false)?;
        // The noise scales may be zeroed to disable a mechanism.
        check("exploration_noise_sigma", self.exploration_noise_sigma, true)?;
        check("policy_noise_sigma", self.policy_noise_sigma, true)?;
        check("noise_clip", self.noise_clip, true)?;
        check("reward_clip", self.reward_clip, false)?;
        if self.gamma >= 1.0 {
            return Err(AgentError::Config(format!(
                "gamma = {} must be below 1",
                self.gamma
            )));
        }
        if self.batch == 0 {
            return Err(AgentError::Config("batch must be positive".into()));
        }
        if self.policy_update_frequency == 0 {
            return Err(AgentError::Config(
                "policy_update_frequency must be positive".into(),
            ));
        }
        if self.hidden.is_empty() || self.hidden.iter().any(|&h| h == 0) {
            return Err(AgentError::Config(
                "hidden layers must be non-empty and positive".into(),
            ));
        }
        Ok(())
    }
}

/// Per-call training diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainDiagnostics {
    pub critic1_loss: f64,
    pub critic2_loss: Option<f64>,
    /// Present only on policy-update calls.
    pub actor_loss: Option<f64>,
    pub mean_abs_td: f64,
    /// Fraction of the batch taken from the similar candidates; proposed
    /// mode only.
    pub similar_fraction: Option<f64>,
    pub updates: u64,
}

/// The learner: actor/critic networks, their targets, optimizer states and
/// the update counter.
#[derive(Debug, Clone)]
pub struct Agent {
    config: AgentConfig,
    state_dim: usize,
    actor: Mlp,
    actor_target: Mlp,
    critic1: Mlp,
    critic1_target: Mlp,
    critic2: Option<Mlp>,
    critic2_target: Option<Mlp>,
    adam_actor: AdamState,
    adam_critic1: AdamState,
    adam_critic2: Option<AdamState>,
    updates: u64,
}

fn layer_sizes(input: usize, hidden: &[usize], output: usize) -> Vec<usize> {
    let mut sizes = Vec::with_capacity(hidden.len() + 2);
    sizes.push(input);
    sizes.extend_from_slice(hidden);
    sizes.push(output);
    sizes
}

impl Agent {
    /// Build a fresh agent. Every network gets its own RNG stream derived
    /// from `seed`, so the twin critics start from different parameters.
    pub fn new(state_dim: usize, config: AgentConfig, seed: u64) -> Result<Agent, AgentError> {
        config.validate()?;
        if state_dim == 0 {
            return Err(AgentError::Config("state dimension must be positive".into()));
        }
        let mut master = ChaCha12Rng::seed_from_u64(seed);
        let mut sub = || ChaCha12Rng::seed_from_u64(master.gen());
        let actor_sizes = layer_sizes(state_dim, &config.hidden, ACTION_DIM);
        let critic_sizes = layer_sizes(state_dim + ACTION_DIM, &config.hidden, 1);

        let actor = Mlp::init(&actor_sizes, Activation::Tanh, &mut sub())?;
        let critic1 = Mlp::init(&critic_sizes, Activation::Identity, &mut sub())?;
        let critic2 = if config.mode.uses_twin_critics() {
            Some(Mlp::init(&critic_sizes, Activation::Identity, &mut sub())?)
        } else {
            None
        };
        let actor_target = actor.clone();
        let critic1_target = critic1.clone();
        let critic2_target = critic2.clone();
        let adam_actor = AdamState::new(&actor);
        let adam_critic1 = AdamState::new(&critic1);
        let adam_critic2 = critic2.as_ref().map(AdamState::new);
        Ok(Agent {
            config,
            state_dim,
            actor,
            actor_target,
            critic1,
            critic1_target,
            critic2,
            critic2_target,
            adam_actor,
            adam_critic1,
            adam_critic2,
            updates: 0,
        })
    }

    pub fn config(&self) -> &AgentConfig {
        &self.config
    }

    pub fn mode(&self) -> AlgoMode {
        self.config.mode
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    pub fn actor(&self) -> &Mlp {
        &self.actor
    }

    pub fn actor_target(&self) -> &Mlp {
        &self.actor_target
    }

    pub fn critic1(&self) -> &Mlp {
        &self.critic1
    }

    pub fn critic2(&self) -> Option<&Mlp> {
        self.critic2.as_ref()
    }

    pub fn critic1_target(&self) -> &Mlp {
        &self.critic1_target
    }

    pub fn critic2_target(&self) -> Option<&Mlp> {
        self.critic2_target.as_ref()
    }

    /// Policy output for `state`, optionally with exploration noise, always
    /// clamped to the action box.
    pub fn select_action<R: Rng>(&self, state: &[f64], explore: bool, rng: &mut R) -> Action {
        assert_eq!(state.len(), self.state_dim, "state dimension mismatch");
        let out = self.actor.forward(state);
        let (mut u1, mut u2) = (out[0], out[1]);
        if explore {
            let noise = Normal::new(0.0, self.config.exploration_noise_sigma)
                .expect("validated sigma");
            u1 += noise.sample(rng);
            u2 += noise.sample(rng);
        }
        Action::new(u1.clamp(-1.0, 1.0), u2.clamp(-1.0, 1.0))
    }

    /// Smoothed target-policy action for the bootstrap term: the target
    /// actor's output plus clipped Gaussian noise, clamped to the action
    /// box. The DDPG baseline skips the smoothing entirely.
    pub fn target_action<R: Rng>(&self, next_state: &[f64], rng: &mut R) -> Action {
        let out = self.actor_target.forward(next_state);
        let (mut u1, mut u2) = (out[0], out[1]);
        if self.config.mode.uses_target_smoothing() {
            let clip = self.config.noise_clip;
            let noise =
                Normal::new(0.0, self.config.policy_noise_sigma).expect("validated sigma");
            u1 += noise.sample(rng).clamp(-clip, clip);
            u2 += noise.sample(rng).clamp(-clip, clip);
        }
        Action::new(u1.clamp(-1.0, 1.0), u2.clamp(-1.0, 1.0))
    }

    fn critic_input(&self, state: &[f64], action: Action) -> Vec<f64> {
        let mut input = Vec::with_capacity(self.state_dim + ACTION_DIM);
        input.extend_from_slice(state);
        input.push(action.speed);
        input.push(action.turn);
        input
    }

    /// Bootstrap value at the smoothed target action: the minimum of the
    /// twin target critics, or the single target critic for DDPG.
    fn target_value<R: Rng>(&self, next_state: &[f64], rng: &mut R) -> f64 {
        let a = self.target_action(next_state, rng);
        let input = self.critic_input(next_state, a);
        let q1 = self.critic1_target.forward(&input)[0];
        match &self.critic2_target {
            Some(c2) => q1.min(c2.forward(&input)[0]),
            None => q1,
        }
    }

    /// Critic regression target y = r + gamma * (1 - done) * Q'(s', a~).
    fn regression_target<R: Rng>(&self, exp: &Experience, rng: &mut R) -> f64 {
        let bootstrap = if exp.done {
            0.0
        } else {
            self.target_value(&exp.next_state, rng)
        };
        exp.reward + self.config.gamma * f64::from(!exp.done as u8) * bootstrap
    }

    fn regression_targets<R: Rng>(&self, batch: &[&Experience], rng: &mut R) -> Vec<f64> {
        batch.iter().map(|e| self.regression_target(e, rng)).collect()
    }

    /// TD error of one stored transition under the current networks:
    /// the regression target minus the online first critic's estimate.
    pub fn td_error<R: Rng>(&self, exp: &Experience, rng: &mut R) -> f64 {
        let y = self.regression_target(exp, rng);
        let q = self.critic1.forward(&self.critic_input(&exp.state, exp.action))[0];
        y - q
    }

    fn q1_predictions(&self, batch: &[&Experience]) -> Vec<f64> {
        batch
            .iter()
            .map(|e| {
                self.critic1
                    .forward(&self.critic_input(&e.state, e.action))[0]
            })
            .collect()
    }

    /// One optimization call on an explicit batch with freshly computed
    /// targets. Exposed for the overfit oracle in the test suites.
    pub fn train_on_batch<R: Rng>(
        &mut self,
        batch: &[&Experience],
        rng: &mut R,
    ) -> TrainDiagnostics {
        let targets = self.regression_targets(batch, rng);
        self.train_core(batch, &targets, None)
    }

    /// One full training call against the replay buffer. Returns `None`
    /// until the buffer can fill a batch.
    pub fn train_step<R: Rng>(
        &mut self,
        buffer: &LabeledBuffer,
        current_label: CategoryLabel,
        rng: &mut R,
    ) -> Option<TrainDiagnostics> {
        assert_eq!(buffer.state_dim(), self.state_dim, "buffer/agent dimension mismatch");
        let batch = self.config.batch;
        if self.config.mode.uses_similarity_replay() {
            let pair = buffer.sample_pair_batch(current_label, batch, rng)?;
            let similar: Vec<&Experience> = pair.similar.iter().map(|&s| buffer.get(s)).collect();
            let random: Vec<&Experience> = pair.random.iter().map(|&s| buffer.get(s)).collect();
            // TD errors for both candidate lists under the current networks.
            let y_s = self.regression_targets(&similar, rng);
            let y_r = self.regression_targets(&random, rng);
            let d_s: Vec<f64> = self
                .q1_predictions(&similar)
                .iter()
                .zip(&y_s)
                .map(|(q, y)| y - q)
                .collect();
            let d_r: Vec<f64> = self
                .q1_predictions(&random)
                .iter()
                .zip(&y_r)
                .map(|(q, y)| y - q)
                .collect();
            // Keep the higher-|TD| member of each pair, and reuse the target
            // already computed for it.
            let chosen = select_by_td(&similar, &random, &d_s, &d_r);
            let targets = select_by_td(&y_s, &y_r, &d_s, &d_r);
            let picked_similar = d_s
                .iter()
                .zip(&d_r)
                .filter(|(s, r)| s.abs() >= r.abs())
                .count();
            let similar_fraction = picked_similar as f64 / batch as f64;
            Some(self.train_core(&chosen, &targets, Some(similar_fraction)))
        } else {
            let slots = buffer.sample_batch(batch, rng)?;
            let exps: Vec<&Experience> = slots.iter().map(|&s| buffer.get(s)).collect();
            let targets = self.regression_targets(&exps, rng);
            Some(self.train_core(&exps, &targets, None))
        }
    }

    /// Critic regression, delayed actor ascent, and Polyak target tracking.
    fn train_core(
        &mut self,
        batch: &[&Experience],
        targets: &[f64],
        similar_fraction: Option<f64>,
    ) -> TrainDiagnostics {
        assert!(!batch.is_empty(), "empty training batch");
        assert_eq!(batch.len(), targets.len(), "target length mismatch");
        let b = batch.len() as f64;

        let mut grads1 = Gradients::zeros_like(&self.critic1);
        let mut loss1 = 0.0;
        let mut abs_td = 0.0;
        for (e, &y) in batch.iter().zip(targets) {
            let input = self.critic_input(&e.state, e.action);
            let trace = self.critic1.forward_trace(&input);
            let err = trace.output()[0] - y;
            loss1 += err * err / b;
            abs_td += err.abs() / b;
            self.critic1
                .backward_into(&trace, &[2.0 * err / b], &mut grads1);
        }
        adam_step(
            &mut self.critic1,
            &grads1,
            &mut self.adam_critic1,
            self.config.critic_lr,
        )
        .expect("finite critic gradients");

        let loss2 = if let (Some(critic2), Some(adam2)) =
            (self.critic2.as_mut(), self.adam_critic2.as_mut())
        {
            let mut grads2 = Gradients::zeros_like(critic2);
            let mut loss2 = 0.0;
            for (e, &y) in batch.iter().zip(targets) {
                let mut input = Vec::with_capacity(self.state_dim + ACTION_DIM);
                input.extend_from_slice(&e.state);
                input.push(e.action.speed);
                input.push(e.action.turn);
                let trace = critic2.forward_trace(&input);
                let err = trace.output()[0] - y;
                loss2 += err * err / b;
                critic2.backward_into(&trace, &[2.0 * err / b], &mut grads2);
            }
            adam_step(critic2, &grads2, adam2, self.config.critic_lr)
                .expect("finite critic gradients");
            Some(loss2)
        } else {
            None
        };

        self.updates += 1;
        let actor_loss = if self.updates % self.config.policy_update_frequency == 0 {
            let mut actor_grads = Gradients::zeros_like(&self.actor);
            let mut q_sum = 0.0;
            for e in batch {
                let actor_trace = self.actor.forward_trace(&e.state);
                let a = actor_trace.output();
                let input = self.critic_input(&e.state, Action::new(a[0], a[1]));
                let critic_trace = self.critic1.forward_trace(&input);
                q_sum += critic_trace.output()[0];
                let dq_dinput = self.critic1.input_gradient(&critic_trace, &[1.0]);
                // Ascend Q: descend -Q, averaged over the batch.
                let out_grad = [
                    -dq_dinput[self.state_dim] / b,
                    -dq_dinput[self.state_dim + 1] / b,
                ];
                self.actor
                    .backward_into(&actor_trace, &out_grad, &mut actor_grads);
            }
            adam_step(
                &mut self.actor,
                &actor_grads,
                &mut self.adam_actor,
                self.config.actor_lr,
            )
            .expect("finite actor gradients");

            let tau = self.config.tau;
            polyak_update(&mut self.actor_target, &self.actor, tau);
            polyak_update(&mut self.critic1_target, &self.critic1, tau);
            if let (Some(c2), Some(c2t)) = (self.critic2.as_ref(), self.critic2_target.as_mut()) {
                polyak_update(c2t, c2, tau);
            }
            Some(-q_sum / b)
        } else {
            None
        };

        TrainDiagnostics {
            critic1_loss: loss1,
            critic2_loss: loss2,
            actor_loss,
            mean_abs_td: abs_td,
            similar_fraction,
            updates: self.updates,
        }
    }

    /// Write a versioned checkpoint: config, update counter, then every
    /// network in a fixed order.
    pub fn save(&self, path: &Path) -> Result<(), AgentError> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(b"SARA")?;
        w.write_all(&[1u8, self.config.mode.tag()])?;
        w.write_all(&(self.state_dim as u32).to_le_bytes())?;
        w.write_all(&self.updates.to_le_bytes())?;
        for v in [
            self.config.gamma,
            self.config.tau,
            self.config.actor_lr,
            self.config.critic_lr,
            self.config.exploration_noise_sigma,
            self.config.policy_noise_sigma,
            self.config.noise_clip,
            self.config.reward_clip,
        ] {
            w.write_all(&v.to_le_bytes())?;
        }
        w.write_all(&(self.config.batch as u32).to_le_bytes())?;
        w.write_all(&(self.config.policy_update_frequency as u32).to_le_bytes())?;
        w.write_all(&(self.config.hidden.len() as u32).to_le_bytes())?;
        for &h in &self.config.hidden {
            w.write_all(&(h as u32).to_le_bytes())?;
        }
        self.actor.write_to(&mut w)?;
        self.actor_target.write_to(&mut w)?;
        self.critic1.write_to(&mut w)?;
        self.critic1_target.write_to(&mut w)?;
        if let (Some(c2), Some(c2t)) = (&self.critic2, &self.critic2_target) {
            c2.write_to(&mut w)?;
            c2t.write_to(&mut w)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Load a checkpoint written by `save`. Any structural mismatch between
    /// the recorded config and the stored networks is an error; optimizer
    /// moments restart from zero.
    pub fn load(path: &Path) -> Result<Agent, AgentError> {
        let mut r = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != b"SARA" {
            return Err(AgentError::Format("bad magic".into()));
        }
        let mut two = [0u8; 2];
        r.read_exact(&mut two)?;
        if two[0] != 1 {
            return Err(AgentError::Format(format!("unsupported version {}", two[0])));
        }
        let mode = AlgoMode::from_tag(two[1])
            .ok_or_else(|| AgentError::Format(format!("unknown mode tag {}", two[1])))?;
        let mut u32buf = [0u8; 4];
        let mut u64buf = [0u8; 8];
        r.read_exact(&mut u32buf)?;
        let state_dim = u32::from_le_bytes(u32buf) as usize;
        r.read_exact(&mut u64buf)?;
        let updates = u64::from_le_bytes(u64buf);
        let mut scalars = [0.0f64; 8];
        for s in &mut scalars {
            r.read_exact(&mut u64buf)?;
            *s = f64::from_le_bytes(u64buf);
        }
        r.read_exact(&mut u32buf)?;
        let batch = u32::from_le_bytes(u32buf) as usize;
        r.read_exact(&mut u32buf)?;
        let policy_update_frequency = u32::from_le_bytes(u32buf) as u64;
        r.read_exact(&mut u32buf)?;
        let n_hidden = u32::from_le_bytes(u32buf) as usize;
        if n_hidden > 62 {
            return Err(AgentError::Format(format!(
                "implausible hidden layer count {n_hidden}"
            )));
        }
        let mut hidden = Vec::with_capacity(n_hidden);
        for _ in 0..n_hidden {
            r.read_exact(&mut u32buf)?;
            hidden.push(u32::from_le_bytes(u32buf) as usize);
        }
        let config = AgentConfig {
            mode,
            gamma: scalars[0],
            tau: scalars[1],
            actor_lr: scalars[2],
            critic_lr: scalars[3],
            batch,
            policy_update_frequency,
            exploration_noise_sigma: scalars[4],
            policy_noise_sigma: scalars[5],
            noise_clip: scalars[6],
            hidden: hidden.clone(),
            reward_clip: scalars[7],
        };
        config.validate()?;

        let actor_sizes = layer_sizes(state_dim, &hidden, ACTION_DIM);
        let critic_sizes = layer_sizes(state_dim + ACTION_DIM, &hidden, 1);
        let expect = |net: &Mlp, sizes: &[usize], act: Activation, what: &str| {
            if net.sizes() != sizes || net.activation() != act {
                return Err(AgentError::Format(format!(
                    "{what} architecture {:?} does not match config {:?}",
                    net.sizes(),
                    sizes
                )));
            }
            Ok(())
        };
        let actor = Mlp::read_from(&mut r)?;
        expect(&actor, &actor_sizes, Activation::Tanh, "actor")?;
        let actor_target = Mlp::read_from(&mut r)?;
        expect(&actor_target, &actor_sizes, Activation::Tanh, "actor target")?;
        let critic1 = Mlp::read_from(&mut r)?;
        expect(&critic1, &critic_sizes, Activation::Identity, "critic 1")?;
        let critic1_target = Mlp::read_from(&mut r)?;
        expect(&critic1_target, &critic_sizes, Activation::Identity, "critic 1 target")?;
        let (critic2, critic2_target) = if mode.uses_twin_critics() {
            let c2 = Mlp::read_from(&mut r)?;
            expect(&c2, &critic_sizes, Activation::Identity, "critic 2")?;
            let c2t = Mlp::read_from(&mut r)?;
            expect(&c2t, &critic_sizes, Activation::Identity, "critic 2 target")?;
            (Some(c2), Some(c2t))
        } else {
            (None, None)
        };
        let adam_actor = AdamState::new(&actor);
        let adam_critic1 = AdamState::new(&critic1);
        let adam_critic2 = critic2.as_ref().map(AdamState::new);
        Ok(Agent {
            config,
            state_dim,
            actor,
            actor_target,
            critic1,
            critic1_target,
            critic2,
            critic2_target,
            adam_actor,
            adam_critic1,
            adam_critic2,
            updates,
        })
    }

    /// Human-readable checkpoint companion for `save`.
    pub fn manifest_text(&self, episodes: u64) -> String {
        let mut out = String::new();
        out.push_str(&format!("mode = {}\n", self.config.mode));
        out.push_str(&format!("episodes = {episodes}\n"));
        out.push_str(&format!("updates = {}\n", self.updates));
        out.push_str(&format!("state_dim = {}\n", self.state_dim));
        out.push_str(&format!("gamma = {}\n", self.config.gamma));
        out.push_str(&format!("tau = {}\n", self.config.tau));
        out.push_str(&format!("actor_lr = {}\n", self.config.actor_lr));
        out.push_str(&format!("critic_lr = {}\n", self.config.critic_lr));
        out.push_str(&format!("batch = {}\n", self.config.batch));
        out.push_str(&format!(
            "policy_update_frequency = {}\n",
            self.config.policy_update_frequency
        ));
        out.push_str(&format!(
            "exploration_noise_sigma = {}\n",
            self.config.exploration_noise_sigma
        ));
        out.push_str(&format!(
            "policy_noise_sigma = {}\n",
            self.config.policy_noise_sigma
        ));
        out.push_str(&format!("noise_clip = {}\n", self.config.noise_clip));
        out.push_str(&format!("reward_clip = {}\n", self.config.reward_clip));
        let hidden: Vec<String> = self.config.hidden.iter().map(|h| h.to_string()).collect();
        out.push_str(&format!("hidden = {}\n", hidden.join(",")));
        out
    }
}
