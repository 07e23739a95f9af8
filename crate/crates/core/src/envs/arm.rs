//! 3-link arm tracking Bezier waypoint curves with joint-velocity control.
//!
//! The first joint yaws the whole arm about the vertical axis; the second
//! and third pitch links two and three inside the yawed vertical plane, so
//! the chain is planar-in-3D. With the default link lengths every point with
//! `|p| <= 0.98` is reachable, which covers the hemisphere targets and the
//! whole Bezier hull.

use nalgebra::{Matrix3, Vector3};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{
    bezier_point, local_waypoint, waypoint_reward, Env, EnvSpec, StepOutcome, Termination,
    WaypointTrack,
};

#[derive(Debug, Clone)]
pub struct ArmConfig {
    pub dt: f64,
    pub link_lengths: [f64; 3],
    /// Pitch joints beyond this magnitude collide (yaw is unlimited).
    pub joint_limit: f64,
    /// Fixed control point of the quadratic Bezier tracks.
    pub control_point: [f64; 3],
    /// Radius of the hemisphere the target endpoint is sampled on.
    pub target_radius: f64,
    /// Elevation range (radians) for target sampling.
    pub target_elevation: (f64, f64),
    /// Start pose (yaw, pitch1, pitch2).
    pub start_joints: [f64; 3],
    pub reach_limit: f64,
    /// Bezier samples per track (horizon H; the frame budget M equals it).
    pub track_waypoints: usize,
    pub max_frames: usize,
    pub waypoint_radius: f64,
    pub step_penalty: f64,
    pub collision_penalty: f64,
}

impl Default for ArmConfig {
    fn default() -> Self {
        ArmConfig {
            dt: 0.1,
            link_lengths: [0.2, 0.5, 0.5],
            joint_limit: 3.0,
            control_point: [0.75, 0.15, 0.45],
            target_radius: 0.85,
            target_elevation: (0.15, 1.35),
            start_joints: [0.0, 1.2, -1.8],
            reach_limit: 0.08,
            track_waypoints: 100,
            max_frames: 100,
            waypoint_radius: 0.1,
            step_penalty: -0.1,
            collision_penalty: -50.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ArmEnv {
    spec: EnvSpec,
    cfg: ArmConfig,
    track: WaypointTrack,
    joints: [f64; 3],
    joint_vel: [f64; 3],
    next_wp: usize,
    frames: usize,
    done: bool,
}

impl ArmEnv {
    pub fn new(cfg: ArmConfig) -> Self {
        let spec = EnvSpec {
            name: "arm".into(),
            state_dim: 9,
            action_dim: 3,
            waypoint_dim: 3,
            max_frames: cfg.max_frames,
            horizon: cfg.track_waypoints,
            waypoint_radius: cfg.waypoint_radius,
            step_penalty: cfg.step_penalty,
            collision_penalty: cfg.collision_penalty,
        };
        let mut env = ArmEnv {
            spec,
            cfg,
            track: WaypointTrack::new(vec![vec![0.0; 3]], 1.0),
            joints: [0.0; 3],
            joint_vel: [0.0; 3],
            next_wp: 0,
            frames: 0,
            done: false,
        };
        env.reset(0);
        env
    }

    pub fn config(&self) -> &ArmConfig {
        &self.cfg
    }

    /// End-effector position for joint angles `(yaw, pitch1, pitch2)`.
    pub fn forward_kinematics(&self, q: [f64; 3]) -> [f64; 3] {
        let [l1, l2, l3] = self.cfg.link_lengths;
        let r = l1 + l2 * q[1].cos() + l3 * (q[1] + q[2]).cos();
        let z = l2 * q[1].sin() + l3 * (q[1] + q[2]).sin();
        [r * q[0].cos(), r * q[0].sin(), z]
    }

    /// Jacobian of the end-effector position with respect to the joints.
    pub fn jacobian(&self, q: [f64; 3]) -> Matrix3<f64> {
        let [l1, l2, l3] = self.cfg.link_lengths;
        let (s0, c0) = q[0].sin_cos();
        let r = l1 + l2 * q[1].cos() + l3 * (q[1] + q[2]).cos();
        let dr_dq1 = -l2 * q[1].sin() - l3 * (q[1] + q[2]).sin();
        let dr_dq2 = -l3 * (q[1] + q[2]).sin();
        let dz_dq1 = l2 * q[1].cos() + l3 * (q[1] + q[2]).cos();
        let dz_dq2 = l3 * (q[1] + q[2]).cos();
        Matrix3::new(
            -r * s0,
            dr_dq1 * c0,
            dr_dq2 * c0,
            r * c0,
            dr_dq1 * s0,
            dr_dq2 * s0,
            0.0,
            dz_dq1,
            dz_dq2,
        )
    }

    fn next_global(&self) -> &[f64] {
        if self.next_wp < self.track.len() {
            self.track.point(self.next_wp)
        } else {
            self.track.last()
        }
    }
}

impl Env for ArmEnv {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.joints = self.cfg.start_joints;
        self.joint_vel = [0.0; 3];
        self.next_wp = 0;
        self.frames = 0;
        self.done = false;

        let p0 = self.forward_kinematics(self.joints);
        let azimuth = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
        let elevation = rng.gen_range(self.cfg.target_elevation.0..self.cfg.target_elevation.1);
        let p2 = [
            self.cfg.target_radius * elevation.cos() * azimuth.cos(),
            self.cfg.target_radius * elevation.cos() * azimuth.sin(),
            self.cfg.target_radius * elevation.sin(),
        ];
        let count = self.cfg.track_waypoints;
        let mut points = Vec::with_capacity(count);
        for i in 0..count {
            let t = i as f64 / (count - 1) as f64;
            let p = bezier_point(p0, self.cfg.control_point, p2, t)
                .expect("t in [0,1] by construction");
            points.push(p.to_vec());
        }
        // Chord spacing is the effective resolution of the sampled curve.
        let mut total = 0.0;
        for w in points.windows(2) {
            total += w[0]
                .iter()
                .zip(&w[1])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
        }
        let resolution = total / (count - 1) as f64;
        self.track = WaypointTrack::new(points, resolution);
    }

    fn observe(&self) -> Vec<f64> {
        let ee = self.forward_kinematics(self.joints);
        let global = self.next_global();
        vec![
            self.joints[0],
            self.joints[1],
            self.joints[2],
            self.joint_vel[0],
            self.joint_vel[1],
            self.joint_vel[2],
            global[0] - ee[0],
            global[1] - ee[1],
            global[2] - ee[2],
        ]
    }

    fn agent_pos(&self) -> Vec<f64> {
        self.forward_kinematics(self.joints).to_vec()
    }

    fn local_waypoint_abs(&self) -> Vec<f64> {
        let ee = self.forward_kinematics(self.joints);
        local_waypoint(&ee, self.next_global(), self.cfg.reach_limit)
    }

    fn step(&mut self, action: &[f64]) -> StepOutcome {
        debug_assert!(!self.done, "step after episode end");
        let mut a = [0.0; 3];
        for i in 0..3 {
            a[i] = action.get(i).copied().unwrap_or(0.0).clamp(-1.0, 1.0);
        }
        for i in 0..3 {
            self.joints[i] += a[i] * self.cfg.dt;
            self.joint_vel[i] = a[i];
        }
        self.frames += 1;

        if self.joints[1].abs() > self.cfg.joint_limit || self.joints[2].abs() > self.cfg.joint_limit
        {
            self.done = true;
            return StepOutcome {
                reward: self.spec.step_penalty + self.spec.collision_penalty,
                done: true,
                termination: Some(Termination::Collision),
            };
        }

        let ee = self.forward_kinematics(self.joints);
        let (reward, advanced) = if self.next_wp < self.track.len() {
            waypoint_reward(&ee, self.next_global(), &self.spec)
        } else {
            (self.spec.step_penalty, false)
        };
        if advanced {
            self.next_wp += 1;
        }

        let termination = if self.next_wp >= self.track.len() {
            Some(Termination::Goal)
        } else if self.frames >= self.spec.max_frames {
            Some(Termination::FrameLimit)
        } else {
            None
        };
        if termination.is_some() {
            self.done = true;
        }
        StepOutcome {
            reward,
            done: self.done,
            termination,
        }
    }

    fn oracle_action(&self) -> Option<Vec<f64>> {
        let ee = self.forward_kinematics(self.joints);
        let target = self.local_waypoint_abs();
        let v_des = Vector3::new(
            (target[0] - ee[0]) / self.cfg.dt,
            (target[1] - ee[1]) / self.cfg.dt,
            (target[2] - ee[2]) / self.cfg.dt,
        );
        let j = self.jacobian(self.joints);
        let pinv = j.pseudo_inverse(1e-6).ok()?;
        let qd = pinv * v_des;
        Some(vec![
            qd[0].clamp(-1.0, 1.0),
            qd[1].clamp(-1.0, 1.0),
            qd[2].clamp(-1.0, 1.0),
        ])
    }

    fn track(&self) -> &WaypointTrack {
        &self.track
    }

    fn frames_used(&self) -> usize {
        self.frames
    }
}
