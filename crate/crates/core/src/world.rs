//! Planar search-and-rescue world: arena generation, UAV kinematics, lidar,
//! survivor reaction, terminal classification, and episode stepping.
//!
//! The arena is the axis-aligned square [0, side] x [0, side] with circular
//! obstacle cross sections. One episode is a fixed-step rollout from a
//! generated start layout until a terminal condition fires.

use crate::ahp::{CategoryWeightTable, WeightVector};
use crate::geom::{wrap_angle, Vec2};
use crate::reward::{self, RewardComponents, RewardConfig};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;
use thiserror::Error;

/// Yaw rate magnitude limit, rad/s.
pub const YAW_RATE_MAX: f64 = std::f64::consts::FRAC_PI_2;
/// Battery drain per second while hovering.
pub const BATTERY_IDLE_DRAIN: f64 = 0.02;
/// Additional battery drain per second per m/s of speed.
pub const BATTERY_SPEED_DRAIN: f64 = 0.004;
/// Reaching within this distance of the survivor (slowly) ends in success.
pub const SUCCESS_RADIUS_M: f64 = 3.5;
/// Approach speed at or below this counts as a gentle arrival.
pub const SUCCESS_SPEED_LIMIT: f64 = 5.0;
/// Flying faster than this near the survivor is a hard failure in
/// reactive scenarios.
pub const SPEED_FAILURE_LIMIT: f64 = 20.0;
/// The survivor reacts to the UAV inside this range (metres).
pub const PROXIMITY_RANGE_M: f64 = reward::PROXIMITY_RANGE_M;
/// UAV speeds at or above this trigger the flee response in range.
pub const REACTION_SPEED_THRESHOLD: f64 = 15.0;
/// Flee speed as a fraction of UAV speed at zero distance.
pub const FLEE_GAIN: f64 = 0.5;
/// Episode fails if the survivor is displaced this far from their start.
pub const DRIFT_LIMIT_M: f64 = 20.0;
/// Start and survivor positions keep at least this clearance from
/// obstacle surfaces.
pub const ENDPOINT_CLEARANCE_M: f64 = 3.5;
/// Minimum separation between UAV start and survivor.
pub const MIN_START_SEPARATION_M: f64 = 50.0;
/// Scenario with an obstacle-adjacent survivor places them within this
/// distance of the obstacle surface.
pub const ADJACENT_SURVIVOR_GAP_M: f64 = 5.0;
/// Rejection sampling budget for endpoint placement.
pub const PLACEMENT_ATTEMPTS: usize = 1000;

#[derive(Debug, Error)]
pub enum WorldError {
    #[error("invalid world config: {0}")]
    Config(String),
    #[error("could not place endpoints after {0} attempts; arena too crowded")]
    Placement(usize),
    #[error("bad world snapshot: {0}")]
    Snapshot(String),
    #[error("episode already ended; reset before stepping")]
    EpisodeFinished,
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Survivor behaviour variants, named on the command line e1/e2/e3.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    /// e1: survivor stands still; the comfort weight is dropped and
    /// redistributed over the other objectives.
    StaticSurvivor,
    /// e2: survivor flees from fast, close approaches.
    ReactiveSurvivor,
    /// e3: reactive survivor placed right next to an obstacle.
    ReactiveNearObstacle,
}

impl Scenario {
    pub fn is_reactive(self) -> bool {
        !matches!(self, Scenario::StaticSurvivor)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Scenario::StaticSurvivor => "e1",
            Scenario::ReactiveSurvivor => "e2",
            Scenario::ReactiveNearObstacle => "e3",
        };
        f.write_str(s)
    }
}

impl FromStr for Scenario {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "e1" => Ok(Scenario::StaticSurvivor),
            "e2" => Ok(Scenario::ReactiveSurvivor),
            "e3" => Ok(Scenario::ReactiveNearObstacle),
            other => Err(format!("unknown scenario '{other}' (expected e1, e2 or e3)")),
        }
    }
}

/// Proximity category of a state; selects the reward weight row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CategoryLabel {
    FarFromBoth,
    NearBoth,
    NearSurvivor,
    NearObstacle,
}

impl CategoryLabel {
    pub const ALL: [CategoryLabel; 4] = [
        CategoryLabel::FarFromBoth,
        CategoryLabel::NearBoth,
        CategoryLabel::NearSurvivor,
        CategoryLabel::NearObstacle,
    ];

    pub fn index(self) -> usize {
        match self {
            CategoryLabel::FarFromBoth => 0,
            CategoryLabel::NearBoth => 1,
            CategoryLabel::NearSurvivor => 2,
            CategoryLabel::NearObstacle => 3,
        }
    }

    pub fn from_index(i: usize) -> Option<CategoryLabel> {
        CategoryLabel::ALL.get(i).copied()
    }
}

impl fmt::Display for CategoryLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CategoryLabel::FarFromBoth => "far_from_both",
            CategoryLabel::NearBoth => "near_both",
            CategoryLabel::NearSurvivor => "near_survivor",
            CategoryLabel::NearObstacle => "near_obstacle",
        };
        f.write_str(s)
    }
}

impl FromStr for CategoryLabel {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "far_from_both" => Ok(CategoryLabel::FarFromBoth),
            "near_both" => Ok(CategoryLabel::NearBoth),
            "near_survivor" => Ok(CategoryLabel::NearSurvivor),
            "near_obstacle" => Ok(CategoryLabel::NearObstacle),
            other => Err(format!("unknown category label '{other}'")),
        }
    }
}

/// How an episode ended. Variants are listed in precedence order: when
/// several conditions hold on the same state, the earliest one wins.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Terminal {
    Collision,
    OutOfBounds,
    SpeedFailure,
    DriftFailure,
    Success,
    BatteryDepleted,
    Timeout,
}

impl fmt::Display for Terminal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Terminal::Collision => "collision",
            Terminal::OutOfBounds => "out_of_bounds",
            Terminal::SpeedFailure => "speed_failure",
            Terminal::DriftFailure => "drift_failure",
            Terminal::Success => "success",
            Terminal::BatteryDepleted => "battery_depleted",
            Terminal::Timeout => "timeout",
        };
        f.write_str(s)
    }
}

impl FromStr for Terminal {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "collision" => Ok(Terminal::Collision),
            "out_of_bounds" => Ok(Terminal::OutOfBounds),
            "speed_failure" => Ok(Terminal::SpeedFailure),
            "drift_failure" => Ok(Terminal::DriftFailure),
            "success" => Ok(Terminal::Success),
            "battery_depleted" => Ok(Terminal::BatteryDepleted),
            "timeout" => Ok(Terminal::Timeout),
            other => Err(format!("unknown terminal '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Obstacle {
    pub center: Vec2,
    pub radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UavState {
    pub pos: Vec2,
    pub vel: Vec2,
    pub heading: f64,
    pub battery: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurvivorState {
    pub pos: Vec2,
    pub vel: Vec2,
    /// Total distance fled so far; non-decreasing within an episode.
    pub drift: f64,
}

impl SurvivorState {
    pub fn speed(&self) -> f64 {
        self.vel.length()
    }
}

/// Commanded speed fraction and yaw rate fraction, each in [-1, 1].
/// Speed maps affinely onto [0, v_max]; turn maps onto [-w_max, w_max].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Action {
    pub speed: f64,
    pub turn: f64,
}

impl Action {
    pub fn new(speed: f64, turn: f64) -> Self {
        Action { speed, turn }
    }

    pub fn from_array(a: [f64; 2]) -> Self {
        Action {
            speed: a[0],
            turn: a[1],
        }
    }

    pub fn as_array(&self) -> [f64; 2] {
        [self.speed, self.turn]
    }

    /// Clamp both components into the valid command box.
    pub fn clamped(&self) -> Action {
        Action {
            speed: self.speed.clamp(-1.0, 1.0),
            turn: self.turn.clamp(-1.0, 1.0),
        }
    }
}

/// Distances along evenly spaced body-frame beams; misses read the
/// maximum range.
#[derive(Debug, Clone, PartialEq)]
pub struct LidarScan {
    pub distances: Vec<f64>,
}

impl LidarScan {
    pub fn nearest(&self) -> f64 {
        self.distances.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldConfig {
    /// Side length of the square arena, metres.
    pub arena_side: f64,
    pub n_obstacles: usize,
    pub obstacle_radius_min: f64,
    pub obstacle_radius_max: f64,
    /// Cylinder height; informational only, the simulation is planar.
    pub obstacle_height: f64,
    pub scenario: Scenario,
    /// Integration step, seconds.
    pub dt: f64,
    /// Episode length limit in steps.
    pub max_steps: usize,
    /// Top speed, m/s.
    pub v_max: f64,
    /// Flight altitude; informational only, the simulation is planar.
    pub altitude: f64,
    pub lidar_beams: usize,
    pub lidar_range: f64,
    pub battery_capacity: f64,
    /// Seed for the layout generator.
    pub seed: u64,
}

impl Default for WorldConfig {
    fn default() -> Self {
        WorldConfig {
            arena_side: 200.0,
            n_obstacles: 12,
            obstacle_radius_min: 2.0,
            obstacle_radius_max: 15.0,
            obstacle_height: 50.0,
            scenario: Scenario::ReactiveSurvivor,
            dt: 0.5,
            max_steps: 300,
            v_max: 22.0,
            altitude: 10.0,
            lidar_beams: 16,
            lidar_range: 20.0,
            battery_capacity: 100.0,
            seed: 0,
        }
    }
}

impl WorldConfig {
    pub fn validate(&self) -> Result<(), WorldError> {
        let err = |m: String| Err(WorldError::Config(m));
        if !(self.arena_side.is_finite() && self.arena_side > 0.0) {
            return err(format!("arena_side must be positive, got {}", self.arena_side));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return err(format!("dt must be positive, got {}", self.dt));
        }
        if self.max_steps == 0 {
            return err("max_steps must be at least 1".into());
        }
        if !(self.v_max.is_finite() && self.v_max > 0.0) {
            return err(format!("v_max must be positive, got {}", self.v_max));
        }
        if self.lidar_beams == 0 {
            return err("lidar_beams must be at least 1".into());
        }
        if !(self.lidar_range.is_finite() && self.lidar_range > 0.0) {
            return err(format!("lidar_range must be positive, got {}", self.lidar_range));
        }
        if !(self.battery_capacity.is_finite() && self.battery_capacity > 0.0) {
            return err(format!(
                "battery_capacity must be positive, got {}",
                self.battery_capacity
            ));
        }
        if !(self.obstacle_height.is_finite() && self.obstacle_height > 0.0) {
            return err(format!(
                "obstacle_height must be positive, got {}",
                self.obstacle_height
            ));
        }
        if !(self.altitude.is_finite() && self.altitude > 0.0) {
            return err(format!("altitude must be positive, got {}", self.altitude));
        }
        if !(self.obstacle_radius_min.is_finite() && self.obstacle_radius_min > 0.0) {
            return err(format!(
                "obstacle_radius_min must be positive, got {}",
                self.obstacle_radius_min
            ));
        }
        if self.obstacle_radius_max < self.obstacle_radius_min {
            return err(format!(
                "obstacle_radius_max {} below obstacle_radius_min {}",
                self.obstacle_radius_max, self.obstacle_radius_min
            ));
        }
        if self.n_obstacles > 0 && 2.0 * self.obstacle_radius_max > self.arena_side {
            return err(format!(
                "obstacle_radius_max {} cannot fit in arena of side {}",
                self.obstacle_radius_max, self.arena_side
            ));
        }
        Ok(())
    }

    /// Length of the flattened observation vector.
    pub fn state_dim(&self) -> usize {
        9 + self.lidar_beams
    }
}

/// A generated episode layout: obstacle field plus start points.
#[derive(Debug, Clone, PartialEq)]
pub struct World {
    pub config: WorldConfig,
    pub obstacles: Vec<Obstacle>,
    pub uav_start: Vec2,
    /// Initial heading; the UAV starts facing the survivor.
    pub uav_start_heading: f64,
    pub survivor_start: Vec2,
}

/// Generate a layout by rejection sampling from `rng`. Obstacles land fully
/// inside the arena; both endpoints keep clearance from every obstacle and
/// sit at least the minimum separation apart; the obstacle-adjacent scenario
/// additionally pins the survivor within the surface gap of some obstacle.
pub fn generate_world<R: Rng>(config: &WorldConfig, rng: &mut R) -> Result<World, WorldError> {
    config.validate()?;
    let side = config.arena_side;

    let mut obstacles = Vec::with_capacity(config.n_obstacles);
    for _ in 0..config.n_obstacles {
        let radius = if config.obstacle_radius_max > config.obstacle_radius_min {
            rng.gen_range(config.obstacle_radius_min..config.obstacle_radius_max)
        } else {
            config.obstacle_radius_min
        };
        let center = Vec2::new(
            rng.gen_range(radius..side - radius),
            rng.gen_range(radius..side - radius),
        );
        obstacles.push(Obstacle { center, radius });
    }

    let clearance_ok = |p: Vec2| {
        obstacles
            .iter()
            .all(|o| p.distance(o.center) - o.radius >= ENDPOINT_CLEARANCE_M)
    };
    let in_arena = |p: Vec2| (0.0..=side).contains(&p.x) && (0.0..=side).contains(&p.y);

    // The required separation may exceed what a small arena can offer;
    // fail with a config error rather than looping forever.
    for _ in 0..PLACEMENT_ATTEMPTS {
        let survivor = match config.scenario {
            Scenario::ReactiveNearObstacle if !obstacles.is_empty() => {
                let o = obstacles[rng.gen_range(0..obstacles.len())];
                let angle = rng.gen_range(0.0..std::f64::consts::TAU);
                let gap = rng.gen_range(ENDPOINT_CLEARANCE_M..ADJACENT_SURVIVOR_GAP_M);
                o.center + Vec2::from_angle(angle) * (o.radius + gap)
            }
            _ => Vec2::new(rng.gen_range(0.0..side), rng.gen_range(0.0..side)),
        };
        if !in_arena(survivor) || !clearance_ok(survivor) {
            continue;
        }
        let uav = Vec2::new(rng.gen_range(0.0..side), rng.gen_range(0.0..side));
        if !clearance_ok(uav) || uav.distance(survivor) < MIN_START_SEPARATION_M {
            continue;
        }
        return Ok(World {
            config: config.clone(),
            obstacles,
            uav_start: uav,
            uav_start_heading: (survivor - uav).angle(),
            survivor_start: survivor,
        });
    }
    Err(WorldError::Placement(PLACEMENT_ATTEMPTS))
}

impl World {
    /// Generate a layout from `config.seed`.
    pub fn generate(config: &WorldConfig) -> Result<World, WorldError> {
        let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
        generate_world(config, &mut rng)
    }

    pub fn initial_uav(&self) -> UavState {
        UavState {
            pos: self.uav_start,
            vel: Vec2::ZERO,
            heading: self.uav_start_heading,
            battery: self.config.battery_capacity,
        }
    }

    pub fn initial_survivor(&self) -> SurvivorState {
        SurvivorState {
            pos: self.survivor_start,
            vel: Vec2::ZERO,
            drift: 0.0,
        }
    }

    /// Distance from `p` to the nearest obstacle surface or arena wall.
    /// Negative inside an obstacle or outside the arena.
    pub fn clearance(&self, p: Vec2) -> f64 {
        let side = self.config.arena_side;
        let wall = p.x.min(p.y).min(side - p.x).min(side - p.y);
        self.obstacles
            .iter()
            .map(|o| p.distance(o.center) - o.radius)
            .fold(wall, f64::min)
    }

    /// Plain-text snapshot of the full layout, one `key = value` per line.
    pub fn snapshot_text(&self) -> String {
        let c = &self.config;
        let mut s = String::new();
        use std::fmt::Write as _;
        let _ = writeln!(s, "arena_side = {}", c.arena_side);
        let _ = writeln!(s, "n_obstacles = {}", c.n_obstacles);
        let _ = writeln!(s, "obstacle_radius_min = {}", c.obstacle_radius_min);
        let _ = writeln!(s, "obstacle_radius_max = {}", c.obstacle_radius_max);
        let _ = writeln!(s, "obstacle_height = {}", c.obstacle_height);
        let _ = writeln!(s, "altitude = {}", c.altitude);
        let _ = writeln!(s, "scenario = {}", c.scenario);
        let _ = writeln!(s, "dt = {}", c.dt);
        let _ = writeln!(s, "max_steps = {}", c.max_steps);
        let _ = writeln!(s, "v_max = {}", c.v_max);
        let _ = writeln!(s, "lidar_beams = {}", c.lidar_beams);
        let _ = writeln!(s, "lidar_range = {}", c.lidar_range);
        let _ = writeln!(s, "battery_capacity = {}", c.battery_capacity);
        let _ = writeln!(s, "seed = {}", c.seed);
        let _ = writeln!(
            s,
            "uav_start = {},{},{}",
            self.uav_start.x, self.uav_start.y, self.uav_start_heading
        );
        let _ = writeln!(s, "survivor_start = {},{}", self.survivor_start.x, self.survivor_start.y);
        for o in &self.obstacles {
            let _ = writeln!(s, "obstacle = {},{},{}", o.center.x, o.center.y, o.radius);
        }
        s
    }

    /// Parse a snapshot produced by `snapshot_text`. Floats round trip
    /// exactly; the result compares equal to the original world.
    pub fn parse_snapshot(text: &str) -> Result<World, WorldError> {
        let bad = |m: String| WorldError::Snapshot(m);
        let mut config = WorldConfig::default();
        let mut uav_start = None;
        let mut survivor_start = None;
        let mut obstacles = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("line {}: expected key = value", lineno + 1)))?;
            let key = key.trim();
            let value = value.trim();
            let pf = |v: &str| {
                v.parse::<f64>()
                    .map_err(|e| bad(format!("line {}: {e}", lineno + 1)))
            };
            let pu = |v: &str| {
                v.parse::<usize>()
                    .map_err(|e| bad(format!("line {}: {e}", lineno + 1)))
            };
            match key {
                "arena_side" => config.arena_side = pf(value)?,
                "n_obstacles" => config.n_obstacles = pu(value)?,
                "obstacle_radius_min" => config.obstacle_radius_min = pf(value)?,
                "obstacle_radius_max" => config.obstacle_radius_max = pf(value)?,
                "obstacle_height" => config.obstacle_height = pf(value)?,
                "altitude" => config.altitude = pf(value)?,
                "scenario" => config.scenario = value.parse().map_err(bad)?,
                "dt" => config.dt = pf(value)?,
                "max_steps" => config.max_steps = pu(value)?,
                "v_max" => config.v_max = pf(value)?,
                "lidar_beams" => config.lidar_beams = pu(value)?,
                "lidar_range" => config.lidar_range = pf(value)?,
                "battery_capacity" => config.battery_capacity = pf(value)?,
                "seed" => {
                    config.seed = value
                        .parse::<u64>()
                        .map_err(|e| bad(format!("line {}: {e}", lineno + 1)))?
                }
                "uav_start" => {
                    let parts: Vec<&str> = value.split(',').collect();
                    if parts.len() != 3 {
                        return Err(bad(format!("line {}: uav_start needs x,y,heading", lineno + 1)));
                    }
                    uav_start = Some((pf(parts[0])?, pf(parts[1])?, pf(parts[2])?));
                }
                "survivor_start" => {
                    let parts: Vec<&str> = value.split(',').collect();
                    if parts.len() != 2 {
                        return Err(bad(format!("line {}: survivor_start needs x,y", lineno + 1)));
                    }
                    survivor_start = Some(Vec2::new(pf(parts[0])?, pf(parts[1])?));
                }
                "obstacle" => {
                    let parts: Vec<&str> = value.split(',').collect();
                    if parts.len() != 3 {
                        return Err(bad(format!("line {}: obstacle needs cx,cy,r", lineno + 1)));
                    }
                    obstacles.push(Obstacle {
                        center: Vec2::new(pf(parts[0])?, pf(parts[1])?),
                        radius: pf(parts[2])?,
                    });
                }
                other => return Err(bad(format!("line {}: unknown key '{other}'", lineno + 1))),
            }
        }
        let (ux, uy, heading) =
            uav_start.ok_or_else(|| bad("missing uav_start".into()))?;
        let survivor_start =
            survivor_start.ok_or_else(|| bad("missing survivor_start".into()))?;
        config.validate().map_err(|e| bad(e.to_string()))?;
        if obstacles.len() != config.n_obstacles {
            return Err(bad(format!(
                "n_obstacles = {} but {} obstacle lines present",
                config.n_obstacles,
                obstacles.len()
            )));
        }
        Ok(World {
            config,
            obstacles,
            uav_start: Vec2::new(ux, uy),
            uav_start_heading: heading,
            survivor_start,
        })
    }
}

/// Cast evenly spaced rays from the UAV in its body frame. Each distance is
/// to the nearest obstacle or arena wall, saturating at the lidar range.
pub fn lidar_scan(world: &World, uav: &UavState) -> LidarScan {
    let n = world.config.lidar_beams;
    let range = world.config.lidar_range;
    let mut distances = Vec::with_capacity(n);
    for k in 0..n {
        let theta = uav.heading + std::f64::consts::TAU * k as f64 / n as f64;
        let dir = Vec2::from_angle(theta);
        distances.push(cast_ray(world, uav.pos, dir, range));
    }
    LidarScan { distances }
}

fn cast_ray(world: &World, origin: Vec2, dir: Vec2, range: f64) -> f64 {
    let mut best = range;
    let side = world.config.arena_side;

    // Walls of the arena box, from inside.
    for (p, d, lo_hi) in [
        (origin.x, dir.x, side),
        (origin.y, dir.y, side),
    ] {
        if d > 1e-12 {
            best = best.min((lo_hi - p) / d);
        } else if d < -1e-12 {
            best = best.min((0.0 - p) / d);
        }
    }
    if best < 0.0 {
        // Origin outside the arena; treat the beam as fully occluded.
        return 0.0;
    }

    for o in &world.obstacles {
        let oc = o.center - origin;
        let proj = oc.dot(dir);
        let closest_sq = oc.length_squared() - proj * proj;
        let r_sq = o.radius * o.radius;
        if closest_sq > r_sq {
            continue;
        }
        let half_chord = (r_sq - closest_sq).sqrt();
        let t_near = proj - half_chord;
        let t_far = proj + half_chord;
        if t_near > 1e-12 {
            best = best.min(t_near);
        } else if t_far > 0.0 {
            // Origin is inside this obstacle; the beam starts occluded.
            return 0.0;
        }
    }
    best
}

/// Assign the proximity category from the nearest lidar return and the
/// distance to the survivor, both against the shared 20 m range.
pub fn categorize(scan: &LidarScan, dist_to_survivor: f64) -> CategoryLabel {
    let near_obstacle = scan.nearest() < PROXIMITY_RANGE_M;
    let near_survivor = dist_to_survivor < PROXIMITY_RANGE_M;
    match (near_obstacle, near_survivor) {
        (false, false) => CategoryLabel::FarFromBoth,
        (true, true) => CategoryLabel::NearBoth,
        (false, true) => CategoryLabel::NearSurvivor,
        (true, false) => CategoryLabel::NearObstacle,
    }
}

/// Survivor response to the UAV. In reactive scenarios a close, fast UAV
/// makes the survivor back directly away, faster the closer it is, and the
/// distance fled accumulates as drift; otherwise they hold position. The
/// static scenario never moves.
pub fn survivor_react(
    uav: &UavState,
    survivor: &SurvivorState,
    dt: f64,
    scenario: Scenario,
) -> SurvivorState {
    if !scenario.is_reactive() {
        return SurvivorState {
            pos: survivor.pos,
            vel: Vec2::ZERO,
            drift: survivor.drift,
        };
    }
    let offset = survivor.pos - uav.pos;
    let dist = offset.length();
    let uav_speed = uav.vel.length();
    if dist < PROXIMITY_RANGE_M && uav_speed >= REACTION_SPEED_THRESHOLD && dist > 1e-9 {
        let speed = FLEE_GAIN * uav_speed * (1.0 - dist / PROXIMITY_RANGE_M);
        let vel = offset.normalized() * speed;
        SurvivorState {
            pos: survivor.pos + vel * dt,
            vel,
            drift: survivor.drift + speed * dt,
        }
    } else {
        SurvivorState {
            pos: survivor.pos,
            vel: Vec2::ZERO,
            drift: survivor.drift,
        }
    }
}

/// Classify a state. `steps_completed` is the number of steps already taken
/// when this state was reached. Checks run in the fixed precedence order of
/// the `Terminal` variants.
pub fn check_terminal(
    uav: &UavState,
    survivor: &SurvivorState,
    world: &World,
    steps_completed: usize,
) -> Option<Terminal> {
    let c = &world.config;
    if world
        .obstacles
        .iter()
        .any(|o| uav.pos.distance(o.center) <= o.radius)
    {
        return Some(Terminal::Collision);
    }
    if uav.pos.x < 0.0 || uav.pos.x > c.arena_side || uav.pos.y < 0.0 || uav.pos.y > c.arena_side {
        return Some(Terminal::OutOfBounds);
    }
    let dist = uav.pos.distance(survivor.pos);
    if c.scenario.is_reactive()
        && dist <= PROXIMITY_RANGE_M
        && uav.vel.length() > SPEED_FAILURE_LIMIT
    {
        return Some(Terminal::SpeedFailure);
    }
    if survivor.drift > DRIFT_LIMIT_M {
        return Some(Terminal::DriftFailure);
    }
    if dist <= SUCCESS_RADIUS_M && uav.vel.length() <= SUCCESS_SPEED_LIMIT {
        return Some(Terminal::Success);
    }
    if uav.battery <= 0.0 {
        return Some(Terminal::BatteryDepleted);
    }
    if steps_completed >= c.max_steps {
        return Some(Terminal::Timeout);
    }
    None
}

/// Everything produced by one simulation step.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub uav: UavState,
    pub survivor: SurvivorState,
    pub scan: LidarScan,
    pub label: CategoryLabel,
    /// Weights actually applied (category row, scenario-adjusted).
    pub weights: WeightVector,
    pub components: RewardComponents,
    pub reward: f64,
    pub terminal: Option<Terminal>,
}

/// Advance one step from a non-terminal state. Order within the step: the
/// UAV integrates its command, the survivor reacts to the updated UAV, the
/// battery drains, then the new state is scanned, labelled, classified and
/// rewarded. Calling this on a terminal state is a usage error and panics.
pub fn step(
    world: &World,
    uav: &UavState,
    survivor: &SurvivorState,
    action: Action,
    steps_completed: usize,
    table: &CategoryWeightTable,
    reward_cfg: &RewardConfig,
) -> StepOutcome {
    assert!(
        check_terminal(uav, survivor, world, steps_completed).is_none(),
        "step called on a terminal state"
    );
    let c = &world.config;
    let a = action.clamped();

    let heading = wrap_angle(uav.heading + a.turn * YAW_RATE_MAX * c.dt);
    let speed = (a.speed + 1.0) / 2.0 * c.v_max;
    let vel = Vec2::from_angle(heading) * speed;
    let pos = uav.pos + vel * c.dt;
    let battery =
        (uav.battery - (BATTERY_IDLE_DRAIN + BATTERY_SPEED_DRAIN * speed) * c.dt).max(0.0);
    let next_uav = UavState {
        pos,
        vel,
        heading,
        battery,
    };

    let next_survivor = survivor_react(&next_uav, survivor, c.dt, c.scenario);
    let scan = lidar_scan(world, &next_uav);
    let dist_to_survivor = next_uav.pos.distance(next_survivor.pos);
    let label = categorize(&scan, dist_to_survivor);
    let terminal = check_terminal(&next_uav, &next_survivor, world, steps_completed + 1);

    let components = RewardComponents {
        time: reward::r_time(c.dt),
        energy: reward::r_energy(next_uav.battery, c.battery_capacity, reward_cfg),
        obstacle: reward::r_obstacle(
            scan.nearest(),
            terminal == Some(Terminal::Collision),
            reward_cfg,
        ),
        human: reward::r_human(next_survivor.speed(), dist_to_survivor, reward_cfg),
    };
    let mut weights = table.weights_for(label);
    if !c.scenario.is_reactive() {
        weights = weights.without_human();
    }
    let reward = reward::total_reward(components, &weights, terminal, reward_cfg);

    StepOutcome {
        uav: next_uav,
        survivor: next_survivor,
        scan,
        label,
        weights,
        components,
        reward,
        terminal,
    }
}

/// Flatten a state for the policy: UAV pose, battery, survivor speed and
/// position, then the lidar returns, all scaled into [-1, 1].
pub fn flatten_state(
    config: &WorldConfig,
    uav: &UavState,
    survivor: &SurvivorState,
    scan: &LidarScan,
) -> Vec<f64> {
    let half = config.arena_side / 2.0;
    let mut v = Vec::with_capacity(config.state_dim());
    v.push((uav.pos.x - half) / half);
    v.push((uav.pos.y - half) / half);
    v.push(uav.vel.x / config.v_max);
    v.push(uav.vel.y / config.v_max);
    v.push(uav.heading / std::f64::consts::PI);
    v.push(uav.battery / config.battery_capacity);
    v.push(survivor.speed() / config.v_max);
    v.push((survivor.pos.x - half) / half);
    v.push((survivor.pos.y - half) / half);
    for &d in &scan.distances {
        v.push(d / config.lidar_range);
    }
    v
}

/// Owned episode state machine over a fixed layout; the convenience surface
/// used by the trainer, the CLI and the C bindings.
#[derive(Debug, Clone)]
pub struct Simulation {
    world: World,
    table: CategoryWeightTable,
    reward_cfg: RewardConfig,
    uav: UavState,
    survivor: SurvivorState,
    scan: LidarScan,
    label: CategoryLabel,
    steps: usize,
    terminal: Option<Terminal>,
}

impl Simulation {
    pub fn new(world: World, table: CategoryWeightTable, reward_cfg: RewardConfig) -> Simulation {
        let uav = world.initial_uav();
        let survivor = world.initial_survivor();
        let scan = lidar_scan(&world, &uav);
        let label = categorize(&scan, uav.pos.distance(survivor.pos));
        Simulation {
            world,
            table,
            reward_cfg,
            uav,
            survivor,
            scan,
            label,
            steps: 0,
            terminal: None,
        }
    }

    /// Rewind to the initial state of the current layout.
    pub fn reset(&mut self) {
        self.uav = self.world.initial_uav();
        self.survivor = self.world.initial_survivor();
        self.scan = lidar_scan(&self.world, &self.uav);
        self.label = categorize(&self.scan, self.uav.pos.distance(self.survivor.pos));
        self.steps = 0;
        self.terminal = None;
    }

    /// Generate a fresh layout from `seed` and reset onto it.
    pub fn regenerate(&mut self, seed: u64) -> Result<(), WorldError> {
        let mut config = self.world.config.clone();
        config.seed = seed;
        self.world = World::generate(&config)?;
        self.reset();
        Ok(())
    }

    pub fn step(&mut self, action: Action) -> Result<StepOutcome, WorldError> {
        if self.terminal.is_some() {
            return Err(WorldError::EpisodeFinished);
        }
        let out = step(
            &self.world,
            &self.uav,
            &self.survivor,
            action,
            self.steps,
            &self.table,
            &self.reward_cfg,
        );
        self.uav = out.uav;
        self.survivor = out.survivor;
        self.scan = out.scan.clone();
        self.label = out.label;
        self.steps += 1;
        self.terminal = out.terminal;
        Ok(out)
    }

    pub fn state(&self) -> Vec<f64> {
        flatten_state(&self.world.config, &self.uav, &self.survivor, &self.scan)
    }

    pub fn world(&self) -> &World {
        &self.world
    }
    pub fn uav(&self) -> &UavState {
        &self.uav
    }
    pub fn survivor(&self) -> &SurvivorState {
        &self.survivor
    }
    pub fn scan(&self) -> &LidarScan {
        &self.scan
    }
    pub fn label(&self) -> CategoryLabel {
        self.label
    }
    pub fn steps(&self) -> usize {
        self.steps
    }
    pub fn terminal(&self) -> Option<Terminal> {
        self.terminal
    }
    pub fn reward_config(&self) -> &RewardConfig {
        &self.reward_cfg
    }
}

/// One row of an episode trace.
#[derive(Debug, Clone)]
pub struct TraceRow {
    pub step: usize,
    pub uav: UavState,
    pub survivor: SurvivorState,
    pub label: CategoryLabel,
    pub components: RewardComponents,
    pub reward: f64,
    pub terminal: Option<Terminal>,
}

pub const TRACE_HEADER: &str = "step,x,y,vx,vy,heading,battery,survivor_x,survivor_y,survivor_speed,label,r_time,r_energy,r_obstacle,r_human,reward,terminal";

impl TraceRow {
    pub fn initial(sim: &Simulation) -> TraceRow {
        TraceRow {
            step: 0,
            uav: *sim.uav(),
            survivor: *sim.survivor(),
            label: sim.label(),
            components: RewardComponents::default(),
            reward: 0.0,
            terminal: None,
        }
    }

    pub fn from_outcome(step: usize, out: &StepOutcome) -> TraceRow {
        TraceRow {
            step,
            uav: out.uav,
            survivor: out.survivor,
            label: out.label,
            components: out.components,
            reward: out.reward,
            terminal: out.terminal,
        }
    }

    fn csv_row(&self) -> String {
        let t = self
            .terminal
            .map(|t| t.to_string())
            .unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.step,
            self.uav.pos.x,
            self.uav.pos.y,
            self.uav.vel.x,
            self.uav.vel.y,
            self.uav.heading,
            self.uav.battery,
            self.survivor.pos.x,
            self.survivor.pos.y,
            self.survivor.speed(),
            self.label,
            self.components.time,
            self.components.energy,
            self.components.obstacle,
            self.components.human,
            self.reward,
            t
        )
    }
}

/// Write an episode trace as CSV with a fixed header.
pub fn write_trace<W: Write>(rows: &[TraceRow], w: &mut W) -> io::Result<()> {
    writeln!(w, "{TRACE_HEADER}")?;
    for row in rows {
        writeln!(w, "{}", row.csv_row())?;
    }
    Ok(())
}
