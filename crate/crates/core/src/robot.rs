//! Differential-drive kinematics and the one-period motion step.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::world::Point2;

/// Wraps an angle into `(-pi, pi]`.
pub fn normalize_angle(a: f64) -> f64 {
    let mut a = a.rem_euclid(std::f64::consts::TAU);
    if a > PI {
        a -= std::f64::consts::TAU;
    }
    a
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub position: Point2,
    /// Heading in radians, kept in `(-pi, pi]`.
    pub heading: f64,
}

impl Pose {
    pub fn new(position: Point2, heading: f64) -> Self {
        Self {
            position,
            heading: normalize_angle(heading),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotParams {
    /// Wheel radius, cell widths.
    pub wheel_radius: f64,
    /// Distance between the wheels, cell widths.
    pub track_width: f64,
    /// Cell widths per second.
    pub max_speed: f64,
    /// Radians per second.
    pub max_yaw_rate: f64,
    /// Seconds.
    pub sample_time: f64,
}

impl Default for RobotParams {
    fn default() -> Self {
        Self {
            wheel_radius: 0.1,
            track_width: 0.5,
            max_speed: 1.0,
            max_yaw_rate: PI,
            sample_time: 1.0,
        }
    }
}

impl RobotParams {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.wheel_radius,
            self.track_width,
            self.max_speed,
            self.max_yaw_rate,
            self.sample_time,
        ];
        if all.iter().all(|v| *v > 0.0 && v.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "robot parameters must be positive: {self:?}"
            )))
        }
    }

    /// Longest translation in one sample period.
    pub fn max_step(&self) -> f64 {
        self.max_speed * self.sample_time
    }
}

/// Left/right wheel ground speeds.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct WheelSpeeds {
    pub left: f64,
    pub right: f64,
}

impl WheelSpeeds {
    /// Wheel angular rates for a given wheel radius.
    pub fn angular(&self, wheel_radius: f64) -> (f64, f64) {
        (self.left / wheel_radius, self.right / wheel_radius)
    }
}

fn check_track(d: f64) -> Result<()> {
    if d > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "track width must be positive, got {d}"
        )))
    }
}

/// `(V_c, yaw_rate)` from wheel speeds.
pub fn wheels_to_body(left: f64, right: f64, track_width: f64) -> Result<(f64, f64)> {
    check_track(track_width)?;
    Ok(((right + left) / 2.0, (right - left) / track_width))
}

pub fn body_to_wheels(speed: f64, yaw_rate: f64, track_width: f64) -> Result<WheelSpeeds> {
    check_track(track_width)?;
    let half = yaw_rate * track_width / 2.0;
    Ok(WheelSpeeds {
        left: speed - half,
        right: speed + half,
    })
}

/// Turn towards `target` as far as the yaw-rate limit allows, then drive along
/// the new heading. The drive length is the projection of the remaining
/// offset onto the heading, capped by the speed limit; it is zero while the
/// target is still more than 90 degrees off.
pub fn step_toward(pose: &Pose, target: Point2, params: &RobotParams) -> (Pose, WheelSpeeds) {
    step_toward_limited(pose, target, params, |_| f64::INFINITY)
}

/// [`step_toward`] with an extra cap on the drive length, evaluated for the
/// heading the robot ends up with.
pub fn step_toward_limited(
    pose: &Pose,
    target: Point2,
    params: &RobotParams,
    max_travel: impl Fn(f64) -> f64,
) -> (Pose, WheelSpeeds) {
    let offset = target - pose.position;
    let dist = offset.norm();
    if dist == 0.0 {
        return (*pose, WheelSpeeds::default());
    }
    let bearing = offset.y.atan2(offset.x);
    let max_turn = params.max_yaw_rate * params.sample_time;
    let turn = normalize_angle(bearing - pose.heading).clamp(-max_turn, max_turn);
    let heading = normalize_angle(pose.heading + turn);
    let residual = normalize_angle(bearing - heading);
    let travel = if residual.abs() >= FRAC_PI_2 {
        0.0
    } else {
        (dist * residual.cos())
            .min(params.max_step())
            .min(max_travel(heading).max(0.0))
    };
    // land exactly on the target when driving straight at it
    let position = if residual.abs() < 1e-12 && travel == dist {
        target
    } else {
        pose.position + Point2::from_polar(travel, heading)
    };
    let wheels = body_to_wheels(
        travel / params.sample_time,
        turn / params.sample_time,
        params.track_width,
    )
    .expect("validated track width");
    (Pose { position, heading }, wheels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn wheel_body_examples() {
        assert_eq!(wheels_to_body(1.0, 1.0, 0.5).unwrap(), (1.0, 0.0));
        let (v, w) = wheels_to_body(0.4, 0.6, 0.4).unwrap();
        assert_abs_diff_eq!(v, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(w, 0.5, epsilon = 1e-12);
        assert_eq!(wheels_to_body(-0.7, 0.7, 0.3).unwrap().0, 0.0);
        assert!(wheels_to_body(1.0, 1.0, 0.0).is_err());

        let w = body_to_wheels(1.0, 0.0, 0.37).unwrap();
        assert_eq!((w.left, w.right), (1.0, 1.0));
        let w = body_to_wheels(0.0, 2.0, 1.0).unwrap();
        assert_eq!((w.left, w.right), (-1.0, 1.0));
        assert!(body_to_wheels(1.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn angle_normalization() {
        assert_eq!(normalize_angle(PI), PI);
        assert_eq!(normalize_angle(-PI), PI);
        assert_abs_diff_eq!(normalize_angle(3.0 * PI / 2.0), -PI / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn stationary_target() {
        let pose = Pose::new(Point2::new(2.0, 3.0), 0.4);
        let (next, wheels) = step_toward(&pose, pose.position, &RobotParams::default());
        assert_eq!(next, pose);
        assert_eq!(wheels, WheelSpeeds::default());
    }

    #[test]
    fn arrives_at_close_target_ahead() {
        let pose = Pose::new(Point2::new(2.0, 3.0), 0.0);
        let target = Point2::new(2.5, 3.0);
        let (next, wheels) = step_toward(&pose, target, &RobotParams::default());
        assert_eq!(next.position, target);
        assert_eq!(wheels.left, wheels.right);
        assert_abs_diff_eq!(wheels.left, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn target_behind_only_turns() {
        let params = RobotParams {
            max_yaw_rate: FRAC_PI_2,
            ..RobotParams::default()
        };
        let pose = Pose::new(Point2::new(2.0, 3.0), 0.0);
        let (next, wheels) = step_toward(&pose, Point2::new(1.0, 3.0), &params);
        assert_eq!(next.position, pose.position);
        assert_abs_diff_eq!(next.heading.abs(), FRAC_PI_2, epsilon = 1e-12);
        let (v, w) = wheels_to_body(wheels.left, wheels.right, params.track_width).unwrap();
        assert_abs_diff_eq!(v, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w.abs(), FRAC_PI_2, epsilon = 1e-12);
    }

    #[test]
    fn travel_cap_applies() {
        let pose = Pose::new(Point2::new(0.0, 0.0), 0.0);
        let (next, _) = step_toward_limited(&pose, Point2::new(5.0, 0.0), &RobotParams::default(), |_| 0.25);
        assert_abs_diff_eq!(next.position.x, 0.25, epsilon = 1e-12);
    }

    #[test]
    fn converges_in_open_space() {
        let params = RobotParams {
            max_yaw_rate: 0.5,
            ..RobotParams::default()
        };
        let mut pose = Pose::new(Point2::new(1.0, 1.0), 2.5);
        let target = Point2::new(7.0, 4.0);
        let mut last = f64::INFINITY;
        for _ in 0..100 {
            let before = pose;
            pose = step_toward(&pose, target, &params).0;
            let d = pose.position.distance(target);
            let err = normalize_angle(before.position.bearing_to(target) - pose.heading);
            if err.abs() < FRAC_PI_2 && last > 1e-9 {
                assert!(d < last);
            }
            last = d;
            if d == 0.0 {
                break;
            }
        }
        assert!(last < 1e-9, "did not reach target: {last}");
    }

    proptest! {
        #[test]
        fn wheel_round_trip(v in -5.0..5.0f64, w in -5.0..5.0f64, d in 0.05..3.0f64) {
            let wheels = body_to_wheels(v, w, d).unwrap();
            let (v2, w2) = wheels_to_body(wheels.left, wheels.right, d).unwrap();
            prop_assert!((v - v2).abs() < 1e-12);
            prop_assert!((w - w2).abs() < 1e-9);
        }

        #[test]
        fn step_length_is_bounded(
            x in 0.0..20.0f64, y in 0.0..20.0f64, h in -3.2..3.2f64,
            tx in 0.0..20.0f64, ty in 0.0..20.0f64,
        ) {
            let params = RobotParams::default();
            let pose = Pose::new(Point2::new(x, y), h);
            let (next, _) = step_toward(&pose, Point2::new(tx, ty), &params);
            prop_assert!(next.position.distance(pose.position) <= params.max_step() + 1e-12);
            prop_assert!(next.heading > -PI && next.heading <= PI);
        }
    }
}
