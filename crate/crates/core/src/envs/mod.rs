//! Waypoint environments with the sparse reward scheme.
//!
//! Both built-in environments share the same reward rules: passing within
//! `waypoint_radius` of the next global waypoint pays `max_frames / horizon`
//! and advances the track; every step costs `step_penalty`; a collision pays
//! `collision_penalty` and ends the episode. During training the envs also
//! expose a reachability-limited *local* waypoint and a closed-form
//! inverse-dynamics oracle for it, which is what makes desk-scale IDM
//! verification possible.

mod arm;
mod bezier;
mod pointmass;

pub use arm::{ArmConfig, ArmEnv};
pub use bezier::bezier_point;
pub use pointmass::{PointMassConfig, PointMassEnv};

use crate::error::{Error, Result};
use crate::idm::TransitionSample;

/// Static description of an environment's dimensions and reward constants.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvSpec {
    pub name: String,
    pub state_dim: usize,
    pub action_dim: usize,
    pub waypoint_dim: usize,
    /// Frame budget per episode (M).
    pub max_frames: usize,
    /// Episode length scale set by the environment (H): the number of global
    /// waypoints a track provides.
    pub horizon: usize,
    pub waypoint_radius: f64,
    pub step_penalty: f64,
    pub collision_penalty: f64,
}

impl EnvSpec {
    /// Reward for passing through one waypoint: `M / H`.
    pub fn waypoint_reward_value(&self) -> f64 {
        self.max_frames as f64 / self.horizon as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_frames == 0 || self.horizon == 0 {
            return Err(Error::InvalidArgument(
                "max_frames and horizon must be >= 1".into(),
            ));
        }
        if !(self.waypoint_radius > 0.0) {
            return Err(Error::InvalidArgument("waypoint radius must be > 0".into()));
        }
        Ok(())
    }
}

/// Per-step reward at `agent_pos` given the next global waypoint: the step
/// penalty always applies; if the agent is within `waypoint_radius` the
/// waypoint bonus `M/H` is added and the returned flag tells the caller to
/// advance the track index. Collisions are judged by the environment itself
/// and add `collision_penalty` on top of the step penalty.
pub fn waypoint_reward(agent_pos: &[f64], next_global_wp: &[f64], spec: &EnvSpec) -> (f64, bool) {
    let dist2: f64 = agent_pos
        .iter()
        .zip(next_global_wp)
        .map(|(a, w)| (a - w) * (a - w))
        .sum();
    let hit = dist2 <= spec.waypoint_radius * spec.waypoint_radius;
    let mut reward = spec.step_penalty;
    if hit {
        reward += spec.waypoint_reward_value();
    }
    (reward, hit)
}

/// The point the agent should aim for next: on the segment from the agent to
/// the next global waypoint, at most `reach_limit` away, and exactly the
/// global waypoint once that is within reach. An exhausted track keeps
/// returning the final goal point.
pub fn local_waypoint(agent_pos: &[f64], target_wp: &[f64], reach_limit: f64) -> Vec<f64> {
    let dist: f64 = agent_pos
        .iter()
        .zip(target_wp)
        .map(|(a, w)| (a - w) * (a - w))
        .sum::<f64>()
        .sqrt();
    if dist <= reach_limit || dist == 0.0 {
        return target_wp.to_vec();
    }
    let scale = reach_limit / dist;
    agent_pos
        .iter()
        .zip(target_wp)
        .map(|(a, w)| a + scale * (w - a))
        .collect()
}

/// Ordered global waypoints defining the sparse reward.
#[derive(Debug, Clone)]
pub struct WaypointTrack {
    points: Vec<Vec<f64>>,
    resolution: f64,
}

impl WaypointTrack {
    pub fn new(points: Vec<Vec<f64>>, resolution: f64) -> Self {
        WaypointTrack { points, resolution }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    pub fn last(&self) -> &[f64] {
        &self.points[self.points.len() - 1]
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }
}

/// Why an episode ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// All track waypoints consumed.
    Goal,
    Collision,
    FrameLimit,
}

impl Termination {
    pub fn code(self) -> u8 {
        match self {
            Termination::Goal => 0,
            Termination::Collision => 1,
            Termination::FrameLimit => 2,
        }
    }

    pub fn from_code(code: u8) -> Result<Self> {
        match code {
            0 => Ok(Termination::Goal),
            1 => Ok(Termination::Collision),
            2 => Ok(Termination::FrameLimit),
            c => Err(Error::Protocol(format!("unknown termination code {c}"))),
        }
    }
}

/// Result of one environment step.
#[derive(Debug, Clone, Copy)]
pub struct StepOutcome {
    pub reward: f64,
    pub done: bool,
    pub termination: Option<Termination>,
}

/// One rollout: the per-step records plus how and how well it ended.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub env_name: String,
    pub transitions: Vec<TransitionSample>,
    /// Per-step rewards, parallel to `transitions`.
    pub rewards: Vec<f64>,
    pub cumulative_reward: f64,
    pub terminated_by: Termination,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }
}

/// A waypoint environment. One instance per worker; never shared.
pub trait Env: Send {
    fn spec(&self) -> &EnvSpec;

    /// Deterministic reset: the same seed reproduces the same track and
    /// start pose bit-for-bit.
    fn reset(&mut self, seed: u64);

    /// The policy observation s_t.
    fn observe(&self) -> Vec<f64>;

    /// Position used for waypoint distance checks (agent position or
    /// end-effector position).
    fn agent_pos(&self) -> Vec<f64>;

    /// Local waypoint in world coordinates.
    fn local_waypoint_abs(&self) -> Vec<f64>;

    /// Local waypoint relative to the agent — the form stored in
    /// trajectories and fed to the inverse-dynamics model.
    fn local_waypoint_rel(&self) -> Vec<f64> {
        let pos = self.agent_pos();
        self.local_waypoint_abs()
            .iter()
            .zip(&pos)
            .map(|(w, p)| w - p)
            .collect()
    }

    /// Apply one action (clipped internally to the env's action range).
    fn step(&mut self, action: &[f64]) -> StepOutcome;

    /// Closed-form inverse-dynamics action toward the current local
    /// waypoint; the per-env ground truth for IDM evaluation.
    fn oracle_action(&self) -> Option<Vec<f64>>;

    fn track(&self) -> &WaypointTrack;

    fn frames_used(&self) -> usize;
}

/// Construct a built-in environment by name.
pub fn make_env(name: &str) -> Result<Box<dyn Env>> {
    match name {
        "pointmass" => Ok(Box::new(PointMassEnv::new(PointMassConfig::default()))),
        "arm" => Ok(Box::new(ArmEnv::new(ArmConfig::default()))),
        other => Err(Error::InvalidArgument(format!(
            "unknown env '{other}' (expected 'pointmass' or 'arm')"
        ))),
    }
}

/// Default policy hidden-layer sizes per environment.
pub fn default_policy_hidden(_env_name: &str) -> Vec<usize> {
    vec![20, 20]
}

/// Default inverse-dynamics hidden-layer sizes per environment; the arm
/// model carries one extra layer.
pub fn default_idm_hidden(env_name: &str) -> Vec<usize> {
    match env_name {
        "arm" => vec![20, 20, 20],
        _ => vec![20, 20],
    }
}

/// Cumulative reward of the closed-form oracle controller on the episode the
/// given seed produces: the desk-scale stand-in for a fully trained policy,
/// used as the attainable-reward benchmark and for IDM probe data.
pub fn oracle_episode_reward(env: &mut dyn Env, seed: u64) -> f64 {
    env.reset(seed);
    let mut total = 0.0;
    for _ in 0..env.spec().max_frames {
        let action = match env.oracle_action() {
            Some(a) => a,
            None => vec![0.0; env.spec().action_dim],
        };
        let out = env.step(&action);
        total += out.reward;
        if out.done {
            break;
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec_for_test() -> EnvSpec {
        EnvSpec {
            name: "test".into(),
            state_dim: 2,
            action_dim: 2,
            waypoint_dim: 2,
            max_frames: 100,
            horizon: 50,
            waypoint_radius: 0.5,
            step_penalty: -0.1,
            collision_penalty: -50.0,
        }
    }

    #[test]
    fn waypoint_hit_pays_frame_ratio_and_advances() {
        let spec = spec_for_test();
        // M = 100, H = 50: waypoint reward 2.0, net step 1.9.
        let (r, advanced) = waypoint_reward(&[0.0, 0.0], &[0.3, 0.0], &spec);
        assert!(advanced);
        assert!((r - 1.9).abs() < 1e-12, "net reward {r}");
    }

    #[test]
    fn missed_waypoint_costs_exactly_step_penalty() {
        let spec = spec_for_test();
        let (r, advanced) = waypoint_reward(&[0.0, 0.0], &[3.0, 0.0], &spec);
        assert!(!advanced);
        assert_eq!(r, -0.1);
    }

    #[test]
    fn boundary_distance_counts_as_hit() {
        let spec = spec_for_test();
        let (_, advanced) = waypoint_reward(&[0.0, 0.0], &[0.5, 0.0], &spec);
        assert!(advanced);
    }

    #[test]
    fn local_waypoint_interpolates_along_segment() {
        let s = local_waypoint(&[0.0, 0.0], &[10.0, 0.0], 1.0);
        assert_eq!(s, vec![1.0, 0.0]);
    }

    #[test]
    fn local_waypoint_clamps_to_goal_within_reach() {
        let s = local_waypoint(&[0.0, 0.0], &[0.3, 0.4], 1.0);
        assert_eq!(s, vec![0.3, 0.4]);
    }

    #[test]
    fn unknown_env_name_rejected() {
        assert!(make_env("carla").is_err());
    }
}
