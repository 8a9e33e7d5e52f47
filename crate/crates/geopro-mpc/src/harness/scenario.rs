//! Scenario files: a single JSON document describing the robot, the
//! obstacles and the simulation parameters. Omitted parameters fall back to
//! the stock defaults; unknown fields are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::RobotState;
use crate::error::{Error, Result};
use crate::geometry::{Box2, Vec2};
use crate::planner::{MovingObstacle, NMPCProblem};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub robot: RobotSpec,
    #[serde(default)]
    pub obstacles: Vec<ObstacleSpec>,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotSpec {
    pub start: Vec2,
    pub goal: Vec2,
    /// Robot radius in meters.
    #[serde(default = "default_robot_radius")]
    pub r: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstacleSpec {
    pub center: Vec2,
    pub radius: f64,
    /// Constant velocity; omitted means static.
    #[serde(default = "zero_vec")]
    pub velocity: Vec2,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default = "default_dt")]
    pub dt: f64,
    /// Prediction horizon in steps.
    #[serde(rename = "N", default = "default_horizon")]
    pub n: usize,
    #[serde(default = "default_v_max")]
    pub v_max: f64,
    #[serde(default = "default_a_max")]
    pub a_max: f64,
    /// Safety margin added to combined radii inside the planner.
    #[serde(default = "default_d_s")]
    pub d_s: f64,
    #[serde(default = "default_goal_tol")]
    pub goal_tol: f64,
    /// Simulated time budget in seconds.
    #[serde(default = "default_max_time")]
    pub max_time: f64,
}

fn default_robot_radius() -> f64 {
    0.1
}
fn zero_vec() -> Vec2 {
    Vec2::ZERO
}
fn default_dt() -> f64 {
    0.05
}
fn default_horizon() -> usize {
    6
}
fn default_v_max() -> f64 {
    0.4
}
fn default_a_max() -> f64 {
    1.0
}
fn default_d_s() -> f64 {
    0.03
}
fn default_goal_tol() -> f64 {
    0.05
}
fn default_max_time() -> f64 {
    30.0
}

impl Default for Params {
    fn default() -> Self {
        Params {
            dt: default_dt(),
            n: default_horizon(),
            v_max: default_v_max(),
            a_max: default_a_max(),
            d_s: default_d_s(),
            goal_tol: default_goal_tol(),
            max_time: default_max_time(),
        }
    }
}

fn validation(field: &str, message: impl Into<String>) -> Error {
    Error::Validation {
        field: field.to_string(),
        message: message.into(),
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() {
            return Err(validation("name", "must not be empty"));
        }
        if !(self.robot.r > 0.0 && self.robot.r.is_finite()) {
            return Err(validation("robot.r", "must be finite and > 0"));
        }
        for (label, v) in [("robot.start", self.robot.start), ("robot.goal", self.robot.goal)] {
            if !v.is_finite() {
                return Err(validation(label, "must be finite"));
            }
        }
        for (i, o) in self.obstacles.iter().enumerate() {
            if !(o.radius > 0.0 && o.radius.is_finite()) {
                return Err(validation(
                    &format!("obstacles[{i}].radius"),
                    "must be finite and > 0",
                ));
            }
            if !o.center.is_finite() || !o.velocity.is_finite() {
                return Err(validation(
                    &format!("obstacles[{i}]"),
                    "center and velocity must be finite",
                ));
            }
        }
        let p = &self.params;
        if !(p.dt > 0.0 && p.dt.is_finite()) {
            return Err(validation("params.dt", "must be finite and > 0"));
        }
        if p.n < 1 {
            return Err(validation("params.N", "must be >= 1"));
        }
        if !(p.v_max > 0.0 && p.v_max.is_finite()) {
            return Err(validation("params.v_max", "must be finite and > 0"));
        }
        if !(p.a_max > 0.0 && p.a_max.is_finite()) {
            return Err(validation("params.a_max", "must be finite and > 0"));
        }
        if !(p.d_s >= 0.0 && p.d_s.is_finite()) {
            return Err(validation("params.d_s", "must be finite and >= 0"));
        }
        if !(p.goal_tol > 0.0 && p.goal_tol.is_finite()) {
            return Err(validation("params.goal_tol", "must be finite and > 0"));
        }
        if !(p.max_time > 0.0 && p.max_time.is_finite()) {
            return Err(validation("params.max_time", "must be finite and > 0"));
        }
        Ok(())
    }

    /// Assembles the per-step optimal control problem for the given robot
    /// state and current obstacle snapshots.
    pub fn to_problem(
        &self,
        x0: RobotState,
        obstacles: &[MovingObstacle],
        horizon: usize,
    ) -> Result<NMPCProblem> {
        let p = &self.params;
        Ok(NMPCProblem {
            x0,
            goal: self.robot.goal,
            horizon_n: horizon,
            dt: p.dt,
            q_p: 10.0,
            r_u: 0.1,
            obstacles: obstacles.to_vec(),
            v_box: Box2::symmetric(p.v_max)?,
            a_box: Box2::symmetric(p.a_max)?,
            d_s: p.d_s,
            robot_r: self.robot.r,
        })
    }
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)?;
    let scenario: Scenario = serde_json::from_str(&text)?;
    scenario.validate()?;
    Ok(scenario)
}
