use serde::{Deserialize, Serialize};

use crate::benchmark::{FreeArcParams, OcpWeights, PosteriorParams};
use crate::error::{Error, Result};
use crate::gain::GainParams;
use crate::hipp::HippConfig;
use crate::plan::RrtParams;
use crate::robot::RobotParams;
use crate::sensing::{NoiseParams, SensorParams};
use crate::world::GridMap;

/// Every tunable in one flat table, read from `key = value` lines.
/// Lengths are in cell widths, times in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    pub sensor_range: f64,
    pub rays_per_rev: usize,
    pub sigma_x: f64,
    pub sigma_y: f64,

    pub wheel_radius: f64,
    pub track_width: f64,
    pub max_speed: f64,
    pub max_yaw_rate: f64,
    pub sample_time: f64,

    pub beta_distance: f64,
    pub epsilon_greedy: f64,
    pub top_k: usize,

    pub rrt_step_size: f64,
    pub rrt_goal_bias: f64,
    pub rrt_max_iterations: usize,
    pub rrt_rewire_radius: f64,
    pub occupancy_threshold: f64,

    pub mission_time: f64,
    pub confidence_count: i32,

    /// Zero sizes the waypoint set from the map's free cells.
    pub waypoints: usize,
    pub generations: usize,
    pub segments_per_circle: usize,
    pub phi: f64,
    pub step_gain: f64,
    pub max_arc_step: f64,
    pub restart_increment: usize,
    pub max_restarts: usize,

    pub ocp_alpha: f64,
    pub ocp_beta: f64,
    pub ocp_mu: f64,
    pub ocp_gamma: f64,

    pub runs: usize,
    pub base_seed: u64,
}

impl Default for Settings {
    fn default() -> Self {
        let hipp = HippConfig::default();
        let post = PosteriorParams::default();
        let ocp = OcpWeights::default();
        Self {
            sensor_range: hipp.sensor.range,
            rays_per_rev: hipp.sensor.rays_per_rev,
            sigma_x: hipp.noise.sigma_x,
            sigma_y: hipp.noise.sigma_y,
            wheel_radius: hipp.robot.wheel_radius,
            track_width: hipp.robot.track_width,
            max_speed: hipp.robot.max_speed,
            max_yaw_rate: hipp.robot.max_yaw_rate,
            sample_time: hipp.robot.sample_time,
            beta_distance: hipp.gain.beta_distance,
            epsilon_greedy: hipp.gain.epsilon_greedy,
            top_k: hipp.gain.top_k,
            rrt_step_size: hipp.rrt.step_size,
            rrt_goal_bias: hipp.rrt.goal_bias,
            rrt_max_iterations: hipp.rrt.max_iterations,
            rrt_rewire_radius: hipp.rrt.rewire_radius,
            occupancy_threshold: hipp.rrt.occupancy_threshold,
            mission_time: hipp.mission_time,
            confidence_count: hipp.confidence_count,
            waypoints: 0,
            generations: post.generations,
            segments_per_circle: post.free_arc.segments_per_circle,
            phi: post.free_arc.phi,
            step_gain: post.free_arc.step_gain,
            max_arc_step: post.free_arc.max_step,
            restart_increment: post.restart_increment,
            max_restarts: post.max_restarts,
            ocp_alpha: ocp.alpha,
            ocp_beta: ocp.beta,
            ocp_mu: ocp.mu,
            ocp_gamma: ocp.gamma,
            runs: 10,
            base_seed: 0,
        }
    }
}

impl Settings {
    pub fn parse(text: &str) -> Result<Self> {
        let s: Settings = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        s.hipp(0).validate()?;
        s.ocp().validate()?;
        if s.runs == 0 {
            return Err(Error::Config("runs must be at least 1".into()));
        }
        Ok(s)
    }

    /// The `key = value` text that [`parse`](Self::parse) reads back.
    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("flat settings always serialize")
    }

    fn rrt(&self) -> RrtParams {
        RrtParams {
            step_size: self.rrt_step_size,
            goal_bias: self.rrt_goal_bias,
            max_iterations: self.rrt_max_iterations,
            rewire_radius: self.rrt_rewire_radius,
            occupancy_threshold: self.occupancy_threshold,
        }
    }

    pub fn hipp(&self, seed: u64) -> HippConfig {
        HippConfig {
            sensor: SensorParams {
                range: self.sensor_range,
                rays_per_rev: self.rays_per_rev,
            },
            noise: NoiseParams {
                sigma_x: self.sigma_x,
                sigma_y: self.sigma_y,
            },
            robot: RobotParams {
                wheel_radius: self.wheel_radius,
                track_width: self.track_width,
                max_speed: self.max_speed,
                max_yaw_rate: self.max_yaw_rate,
                sample_time: self.sample_time,
            },
            gain: GainParams {
                beta_distance: self.beta_distance,
                epsilon_greedy: self.epsilon_greedy,
                top_k: self.top_k,
            },
            rrt: self.rrt(),
            mission_time: self.mission_time,
            confidence_count: self.confidence_count,
            seed,
        }
    }

    /// Posterior parameters for `map`; a zero waypoint count is replaced by
    /// [`PosteriorParams::waypoints_for`].
    pub fn posterior(&self, map: &GridMap) -> PosteriorParams {
        let waypoints = match self.waypoints {
            0 => PosteriorParams::waypoints_for(map, self.sensor_range),
            n => n,
        };
        PosteriorParams {
            waypoints,
            generations: self.generations,
            range: self.sensor_range,
            free_arc: FreeArcParams {
                segments_per_circle: self.segments_per_circle,
                phi: self.phi,
                step_gain: self.step_gain,
                max_step: self.max_arc_step,
            },
            rrt: self.rrt(),
            restart_increment: self.restart_increment,
            max_restarts: self.max_restarts,
        }
    }

    pub fn ocp(&self) -> OcpWeights {
        OcpWeights {
            alpha: self.ocp_alpha,
            beta: self.ocp_beta,
            mu: self.ocp_mu,
            gamma: self.ocp_gamma,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_text() {
        let s = Settings::default();
        assert_eq!(Settings::parse(&s.to_text()).unwrap(), s);
        assert_eq!(
            s.hipp(7),
            HippConfig {
                seed: 7,
                ..HippConfig::default()
            }
        );
    }

    #[test]
    fn partial_file_overrides_only_named_keys() {
        let s = Settings::parse("top_k = 3\nsigma_x = 0.2\n").unwrap();
        assert_eq!(s.top_k, 3);
        assert_eq!(s.sigma_x, 0.2);
        assert_eq!(s.sigma_y, Settings::default().sigma_y);
    }

    #[test]
    fn bad_files_rejected() {
        assert!(matches!(Settings::parse("no_such_key = 1\n"), Err(Error::Config(_))));
        assert!(matches!(Settings::parse("top_k = \"many\"\n"), Err(Error::Config(_))));
        assert!(Settings::parse("confidence_count = 0\n").is_err());
        assert!(Settings::parse("runs = 0\n").is_err());
    }

    #[test]
    fn waypoint_count_follows_the_map() {
        let map = crate::harness::scenario(2).unwrap().map;
        assert_eq!(Settings::default().posterior(&map).waypoints, 61);
        let fixed = Settings {
            waypoints: 12,
            ..Settings::default()
        };
        assert_eq!(fixed.posterior(&map).waypoints, 12);
    }
}
