//! Vehicle model, tracking controller and fixed-step integration.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::geometry::Point2;
use crate::sim::ReferencePath;

/// Unicycle state. Heading 0 points along +x2, positive heading turns
/// toward +x1.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub x1: f64,
    pub x2: f64,
    /// radians, kept in (-pi, pi]
    pub heading: f64,
    /// m/s
    pub speed: f64,
}

impl State {
    pub fn new(x1: f64, x2: f64, heading: f64, speed: f64) -> Self {
        State {
            x1,
            x2,
            heading: wrap_angle(heading),
            speed,
        }
    }

    pub fn position(&self) -> Point2 {
        Point2::new(self.x1, self.x2)
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.x1, self.x2, self.heading, self.speed]
    }

    /// Raw constructor; does not wrap the heading.
    pub fn from_array(a: [f64; 4]) -> Self {
        State {
            x1: a[0],
            x2: a[1],
            heading: a[2],
            speed: a[3],
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Control {
    /// rad/s
    pub turn_rate: f64,
    /// m/s^2
    pub accel: f64,
}

impl Control {
    pub const ZERO: Control = Control {
        turn_rate: 0.0,
        accel: 0.0,
    };

    pub fn new(turn_rate: f64, accel: f64) -> Self {
        Control { turn_rate, accel }
    }
}

/// Wraps an angle into (-pi, pi]. Angles already in range are returned
/// untouched, bit for bit.
pub fn wrap_angle(a: f64) -> f64 {
    if a > -PI && a <= PI {
        return a;
    }
    let w = a.rem_euclid(TAU);
    if w > PI {
        w - TAU
    } else {
        w
    }
}

/// Continuous-time plant with an output map into the plane.
pub trait Model {
    fn derivative(&self, x: &State, u: &Control) -> [f64; 4];
    fn output(&self, x: &State) -> Point2;
}

/// Kinematic unicycle with speed as a state.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Unicycle;

impl Model for Unicycle {
    fn derivative(&self, x: &State, u: &Control) -> [f64; 4] {
        let (s, c) = x.heading.sin_cos();
        [x.speed * s, x.speed * c, u.turn_rate, u.accel]
    }

    fn output(&self, x: &State) -> Point2 {
        x.position()
    }
}

/// One classical RK4 step with `u` held constant over `dt`.
pub fn integrate_step<M: Model + ?Sized>(model: &M, x: &State, u: &Control, dt: f64) -> State {
    let y0 = x.to_array();
    let at = |k: &[f64; 4], h: f64| {
        State::from_array([y0[0] + h * k[0], y0[1] + h * k[1], y0[2] + h * k[2], y0[3] + h * k[3]])
    };
    let k1 = model.derivative(x, u);
    let k2 = model.derivative(&at(&k1, dt / 2.0), u);
    let k3 = model.derivative(&at(&k2, dt / 2.0), u);
    let k4 = model.derivative(&at(&k3, dt), u);
    let mut next = [0.0; 4];
    for i in 0..4 {
        next[i] = y0[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    let mut s = State::from_array(next);
    s.heading = wrap_angle(s.heading);
    s
}

fn default_lookahead() -> f64 {
    3.0
}
fn default_cruise_speed() -> f64 {
    2.0
}
fn default_k_heading() -> f64 {
    2.0
}
fn default_k_speed() -> f64 {
    1.0
}
fn default_limits() -> [f64; 2] {
    [-1.0, 1.0]
}

/// Pure-pursuit heading law plus proportional speed hold.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerParams {
    /// meters
    #[serde(default = "default_lookahead")]
    pub lookahead: f64,
    /// m/s
    #[serde(default = "default_cruise_speed")]
    pub cruise_speed: f64,
    /// 1/s
    #[serde(default = "default_k_heading")]
    pub k_heading: f64,
    /// 1/s
    #[serde(default = "default_k_speed")]
    pub k_speed: f64,
    /// [min, max] rad/s
    #[serde(default = "default_limits")]
    pub turn_rate_limits: [f64; 2],
    /// [min, max] m/s^2
    #[serde(default = "default_limits")]
    pub accel_limits: [f64; 2],
}

impl Default for ControllerParams {
    fn default() -> Self {
        ControllerParams {
            lookahead: default_lookahead(),
            cruise_speed: default_cruise_speed(),
            k_heading: default_k_heading(),
            k_speed: default_k_speed(),
            turn_rate_limits: default_limits(),
            accel_limits: default_limits(),
        }
    }
}

impl ControllerParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.lookahead) {
            return Err(ConfigError::invalid("controller.lookahead", "must be > 0"));
        }
        if !positive(self.cruise_speed) {
            return Err(ConfigError::invalid("controller.cruise_speed", "must be > 0"));
        }
        if !positive(self.k_heading) || !positive(self.k_speed) {
            return Err(ConfigError::invalid("controller gains", "must be > 0"));
        }
        for (name, [lo, hi]) in [
            ("controller.turn_rate_limits", self.turn_rate_limits),
            ("controller.accel_limits", self.accel_limits),
        ] {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(ConfigError::invalid(name, "need finite lower < upper"));
            }
        }
        Ok(())
    }

    pub fn clamp(&self, u: Control) -> Control {
        let [wl, wu] = self.turn_rate_limits;
        let [al, au] = self.accel_limits;
        Control {
            turn_rate: u.turn_rate.clamp(wl, wu),
            accel: u.accel.clamp(al, au),
        }
    }
}

/// Computes the control for state `x` tracking `reference`, given the arc
/// length already covered. Returns the control and the updated progress,
/// which never decreases.
pub fn pure_pursuit_control(
    params: &ControllerParams,
    x: &State,
    reference: &ReferencePath,
    progress: f64,
) -> (Control, f64) {
    let here = x.position();
    let progress = reference.project_forward(here, progress).max(progress);
    let target = reference.point_at((progress + params.lookahead).min(reference.length()));

    let u1 = if target == here {
        0.0
    } else {
        let desired = (target.x1 - here.x1).atan2(target.x2 - here.x2);
        params.k_heading * wrap_angle(desired - x.heading)
    };
    let u2 = params.k_speed * (params.cruise_speed - x.speed);
    (params.clamp(Control::new(u1, u2)), progress)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn unicycle_derivative_examples() {
        let m = Unicycle;
        let d = m.derivative(&State::new(0.0, 0.0, 0.0, 1.0), &Control::ZERO);
        assert_eq!(d, [0.0, 1.0, 0.0, 0.0]);
        let d = m.derivative(&State::new(0.0, 0.0, PI / 2.0, 2.0), &Control::ZERO);
        assert_eq!(d[0], 2.0);
        assert_abs_diff_eq!(d[1], 0.0, epsilon = 1e-15);
        assert_eq!(&d[2..], &[0.0, 0.0]);
        let d = m.derivative(&State::new(5.0, 5.0, 0.0, 0.0), &Control::new(1.0, 1.0));
        assert_eq!(d, [0.0, 0.0, 1.0, 1.0]);
    }

    #[test]
    fn output_map_projects_position() {
        let m = Unicycle;
        assert_eq!(m.output(&State::new(0.0, 0.0, 2.0, 7.0)), Point2::new(0.0, 0.0));
        assert_eq!(m.output(&State::new(-25.0, -45.0, 0.0, 0.0)), Point2::new(-25.0, -45.0));
        assert_eq!(m.output(&State::new(48.0, 33.0, 1.0, 2.0)), Point2::new(48.0, 33.0));
    }

    #[test]
    fn straight_step_is_exact() {
        let x = integrate_step(&Unicycle, &State::new(0.0, 0.0, 0.0, 1.0), &Control::ZERO, 1.0);
        assert_eq!(x, State::new(0.0, 1.0, 0.0, 1.0));
    }

    fn arc_error(dt: f64, horizon: f64) -> f64 {
        let steps = (horizon / dt).round() as usize;
        let u = Control::new(1.0, 0.0);
        let mut x = State::new(0.0, 0.0, 0.0, 1.0);
        for _ in 0..steps {
            x = integrate_step(&Unicycle, &x, &u, dt);
        }
        let t = steps as f64 * dt;
        // constant turn rate 1, speed 1, heading 0 at t = 0
        let exact = Point2::new(1.0 - t.cos(), t.sin());
        x.position().distance(exact)
    }

    #[test]
    fn rk4_matches_constant_turn_arc() {
        let u = Control::new(1.0, 0.0);
        let x = integrate_step(&Unicycle, &State::new(0.0, 0.0, 0.0, 1.0), &u, 0.05);
        assert_abs_diff_eq!(x.x1, 1.0 - 0.05f64.cos(), epsilon = 1e-6);
        assert_abs_diff_eq!(x.x2, 0.05f64.sin(), epsilon = 1e-6);
    }

    #[test]
    fn rk4_is_fourth_order() {
        let e1 = arc_error(0.1, 2.0);
        let e2 = arc_error(0.05, 2.0);
        let e3 = arc_error(0.025, 2.0);
        assert!(e1 / e2 > 12.0 && e1 / e2 < 20.0, "ratio {}", e1 / e2);
        assert!(e2 / e3 > 12.0 && e2 / e3 < 20.0, "ratio {}", e2 / e3);
    }

    #[test]
    fn pure_pursuit_on_track() {
        let p = ControllerParams::default();
        let r = ReferencePath::segment(Point2::new(0.0, 0.0), Point2::new(0.0, 10.0));
        let (u, _) = pure_pursuit_control(&p, &State::new(0.0, 0.0, 0.0, p.cruise_speed), &r, 0.0);
        assert_eq!(u, Control::ZERO);
        let (u, _) = pure_pursuit_control(&p, &State::new(0.0, 0.0, 0.0, 0.0), &r, 0.0);
        assert_eq!(u.turn_rate, 0.0);
        assert_eq!(u.accel, (p.k_speed * p.cruise_speed).min(p.accel_limits[1]));
        assert!(u.accel > 0.0);
    }

    #[test]
    fn pure_pursuit_steers_back_to_path() {
        let p = ControllerParams::default();
        let r = ReferencePath::segment(Point2::new(0.0, 0.0), Point2::new(0.0, 10.0));
        // look-ahead point (0, 3) seen from (1, 0): atan2(-1, 3) < 0
        let (u, progress) = pure_pursuit_control(&p, &State::new(1.0, 0.0, 0.0, p.cruise_speed), &r, 0.0);
        assert_eq!(progress, 0.0);
        assert!(u.turn_rate < 0.0);
        assert_abs_diff_eq!(
            u.turn_rate,
            (p.k_heading * (-1.0f64).atan2(3.0)).max(-1.0),
            epsilon = 1e-12
        );
    }

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert_abs_diff_eq!(wrap_angle(-PI), PI, epsilon = 1e-12);
        assert_abs_diff_eq!(wrap_angle(3.0 * PI / 2.0), -PI / 2.0, epsilon = 1e-12);
        assert_eq!(wrap_angle(-0.3), -0.3);
    }

    proptest! {
        #[test]
        fn controls_stay_in_box(
            x1 in -20.0..20.0f64, x2 in -20.0..20.0f64, h in -3.1..3.1f64, v in -3.0..6.0f64,
            progress in 0.0..14.0f64,
        ) {
            let p = ControllerParams::default();
            let r = ReferencePath::new(vec![Point2::new(0.0, 0.0), Point2::new(0.0, 10.0), Point2::new(4.0, 13.0)]).unwrap();
            let (u, next) = pure_pursuit_control(&p, &State::new(x1, x2, h, v), &r, progress.min(r.length()));
            prop_assert!(u.turn_rate >= -1.0 && u.turn_rate <= 1.0);
            prop_assert!(u.accel >= -1.0 && u.accel <= 1.0);
            prop_assert!(next >= progress.min(r.length()));
            prop_assert!(next <= r.length());
        }

        #[test]
        fn zero_control_preserves_heading_and_speed(h in -3.1..3.1f64, v in -5.0..5.0f64, dt in 0.001..1.0f64) {
            let x = State::new(1.0, 2.0, h, v);
            let y = integrate_step(&Unicycle, &x, &Control::ZERO, dt);
            prop_assert_eq!(y.heading, x.heading);
            prop_assert_eq!(y.speed, x.speed);
        }
    }
}
