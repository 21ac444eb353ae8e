//! Desk-scale UAV search-and-rescue simulation and training stack.

pub mod agent;
pub mod ahp;
pub mod geom;
pub mod harness;
pub mod nn;
pub mod replay;
pub mod reward;
pub mod world;

pub use agent::{Agent, AgentConfig, AgentError, AlgoMode, TrainDiagnostics};
pub use replay::{Experience, LabeledBuffer};

pub use ahp::{AhpError, CategoryWeightTable, PairwiseMatrix, WeightVector};
pub use geom::Vec2;
pub use nn::Mlp;
pub use reward::{RewardComponents, RewardConfig};
pub use world::{
    Action, CategoryLabel, Scenario, Simulation, Terminal, World, WorldConfig, WorldError,
};
