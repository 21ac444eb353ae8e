//! Per-step reward shaping. The four objective components are computed
//! independently and scalarized with the category weights picked each step.

use crate::ahp::WeightVector;
use crate::world::Terminal;

/// Obstacle proximity shaping activates below this range (metres). The same
/// range bounds the lidar and the survivor interaction zone.
pub const PROXIMITY_RANGE_M: f64 = 20.0;
/// Closer than this to the survivor is treated as unsafe for them.
pub const UNSAFE_PROXIMITY_M: f64 = 2.0;

/// Fixed parameters of the reward model.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardConfig {
    /// Simulation step in seconds; the time component is its negation.
    pub dt: f64,
    /// Battery capacity; kept in sync with the world config by the harness.
    pub battery_capacity: f64,
    /// Denominator floor so a full battery does not divide by zero.
    pub r_e_eps: f64,
    /// Upper clamp on the energy ratio.
    pub r_e_cap: f64,
    /// Gain on survivor flee speed in the comfort component.
    pub k_h: f64,
    /// Added to the comfort component inside `UNSAFE_PROXIMITY_M`.
    pub unsafe_proximity_penalty: f64,
    /// Added to the obstacle component on a collision terminal.
    pub collision_penalty: f64,
    /// Added to the scalarized reward on a success terminal.
    pub success_bonus: f64,
}

impl RewardConfig {
    /// Defaults for a given step length and battery capacity. The epsilon
    /// floor scales with capacity (1% of it) so the ratio saturates at the
    /// same state of charge regardless of scale.
    pub fn new(dt: f64, battery_capacity: f64) -> Self {
        RewardConfig {
            dt,
            battery_capacity,
            r_e_eps: 0.01 * battery_capacity,
            r_e_cap: 10.0,
            k_h: 1.0,
            unsafe_proximity_penalty: -5.0,
            collision_penalty: -10.0,
            success_bonus: 10.0,
        }
    }
}

impl Default for RewardConfig {
    fn default() -> Self {
        RewardConfig::new(0.5, 100.0)
    }
}

/// The four per-step objective components, before weighting.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RewardComponents {
    pub time: f64,
    pub energy: f64,
    pub obstacle: f64,
    pub human: f64,
}

impl RewardComponents {
    pub fn as_array(&self) -> [f64; 4] {
        [self.time, self.energy, self.obstacle, self.human]
    }
}

/// Time cost: a flat penalty of one step length per step.
pub fn r_time(dt: f64) -> f64 {
    debug_assert!(dt > 0.0);
    -dt
}

/// Energy term: remaining over consumed charge, floored and capped. High
/// while the battery is full, decaying toward zero as it drains.
pub fn r_energy(battery: f64, capacity: f64, cfg: &RewardConfig) -> f64 {
    let consumed = capacity - battery;
    (battery / consumed.max(cfg.r_e_eps)).min(cfg.r_e_cap)
}

/// Obstacle term: exponential proximity penalty inside the activation range,
/// plus the collision penalty when the step ended in a collision.
pub fn r_obstacle(nearest_distance: f64, collided: bool, cfg: &RewardConfig) -> f64 {
    let mut r = if nearest_distance < PROXIMITY_RANGE_M {
        -(-nearest_distance).exp()
    } else {
        0.0
    };
    if collided {
        r += cfg.collision_penalty;
    }
    r
}

/// Comfort term: penalize making the survivor flee, and being unsafely close.
pub fn r_human(survivor_speed: f64, dist_to_survivor: f64, cfg: &RewardConfig) -> f64 {
    let mut r = -cfg.k_h * survivor_speed.abs();
    if dist_to_survivor < UNSAFE_PROXIMITY_M {
        r += cfg.unsafe_proximity_penalty;
    }
    r
}

/// Scalarize the components with the supplied weights and apply the success
/// bonus. The weights must form a convex combination; scenario adjustments
/// such as dropping the comfort weight happen before this call.
pub fn total_reward(
    components: RewardComponents,
    weights: &WeightVector,
    terminal: Option<Terminal>,
    cfg: &RewardConfig,
) -> f64 {
    assert!(
        (weights.sum() - 1.0).abs() <= 1e-6,
        "weights must sum to 1, got {}",
        weights.sum()
    );
    let mut r = weights.dot(components.as_array());
    if terminal == Some(Terminal::Success) {
        r += cfg.success_bonus;
    }
    r
}
