//! Receding-horizon problem assembly and the closed simulation loop.
//!
//! Each control step condenses the double-integrator MPC problem into a
//! control-only decision vector, builds constraint blocks from predicted
//! obstacle motion (velocity cones or clearance disks, plus velocity boxes),
//! hands the problem to the augmented Lagrangian solver, applies the first
//! control, and shifts the solution for the next warm start.

use std::str::FromStr;
use std::time::Instant;

use crate::alspg::{
    alspg_solve, ALSPGConfig, AlspgStats, BlockBuilder, BlockId, ConstraintBlock, Selector,
};
use crate::dynamics::{rollout, ControlSeq, RobotState, StateTraj};
use crate::error::{Error, Result};
use crate::geometry::{project_box, Box2, Disk, Vec2};
use crate::harness::scenario::Scenario;
use crate::harness::trace::{Outcome, SimTrace, TraceRow};
use crate::projectors::{build_vo_cone, ProjectorSpec};

/// An obstacle with constant-velocity motion. Static obstacles simply carry
/// zero velocity.
#[derive(Clone, Copy, Debug)]
pub struct MovingObstacle {
    pub disk: Disk,
    pub velocity: Vec2,
}

impl MovingObstacle {
    pub fn is_dynamic(&self) -> bool {
        self.velocity != Vec2::ZERO
    }

    /// Predicted center k steps ahead under the constant-velocity model;
    /// affine in k by construction.
    pub fn predicted_center(&self, k: usize, dt: f64) -> Vec2 {
        self.disk.center + self.velocity * (k as f64 * dt)
    }
}

#[derive(Clone, Debug)]
pub struct NMPCProblem {
    pub x0: RobotState,
    pub goal: Vec2,
    pub horizon_n: usize,
    pub dt: f64,
    /// Quadratic goal-tracking weight.
    pub q_p: f64,
    /// Quadratic control-effort weight.
    pub r_u: f64,
    pub obstacles: Vec<MovingObstacle>,
    pub v_box: Box2,
    pub a_box: Box2,
    /// Safety margin added to the combined radius in avoidance constraints
    /// (not part of the collision definition itself).
    pub d_s: f64,
    pub robot_r: f64,
}

impl NMPCProblem {
    pub fn validate(&self) -> Result<()> {
        if self.horizon_n < 1 {
            return Err(Error::InvalidParameter("horizon must be >= 1".into()));
        }
        if !(self.dt > 0.0) {
            return Err(Error::InvalidParameter("dt must be > 0".into()));
        }
        if !(self.q_p > 0.0 && self.r_u > 0.0) {
            return Err(Error::InvalidParameter("cost weights must be > 0".into()));
        }
        if !(self.robot_r > 0.0) {
            return Err(Error::InvalidParameter("robot radius must be > 0".into()));
        }
        if !(self.d_s >= 0.0) {
            return Err(Error::InvalidParameter("safety margin must be >= 0".into()));
        }
        // The braking fallback and the velocity governor both assume rest is
        // admissible.
        for (b, name) in [(&self.v_box, "v_box"), (&self.a_box, "a_box")] {
            if !b.contains(Vec2::ZERO) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must contain the origin"
                )));
            }
        }
        Ok(())
    }

    pub fn combined_radius(&self, obstacle: &MovingObstacle) -> f64 {
        self.robot_r + obstacle.disk.radius + self.d_s
    }
}

/// Quadratic goal-tracking cost with control effort:
/// sum_k q_p ||p_k - goal||^2 + sum_k r_u ||u_k||^2.
#[derive(Clone, Copy, Debug)]
pub struct GoalTrackingCost {
    pub goal: Vec2,
    pub q_p: f64,
    pub r_u: f64,
}

impl GoalTrackingCost {
    /// Value plus exact analytic Jacobians with respect to the stacked state
    /// trajectory (one 4-slot per step) and the stacked controls.
    pub fn eval(
        &self,
        traj: &StateTraj,
        controls: &ControlSeq,
    ) -> (f64, Vec<[f64; 4]>, Vec<[f64; 2]>) {
        let n = controls.len();
        let mut value = 0.0;
        let mut j_x = vec![[0.0; 4]; n];
        let mut j_u = vec![[0.0; 2]; n];
        for k in 1..=n {
            let d = traj.at_step(k).p - self.goal;
            value += self.q_p * d.norm_sq();
            j_x[k - 1][0] = 2.0 * self.q_p * d.x;
            j_x[k - 1][1] = 2.0 * self.q_p * d.y;
        }
        for (k, u) in controls.0.iter().enumerate() {
            value += self.r_u * u.norm_sq();
            j_u[k][0] = 2.0 * self.r_u * u.x;
            j_u[k][1] = 2.0 * self.r_u * u.y;
        }
        (value, j_x, j_u)
    }

    /// Value only.
    pub fn task_cost(&self, traj: &StateTraj, controls: &ControlSeq) -> f64 {
        self.eval(traj, controls).0
    }
}

pub fn build_cost(problem: &NMPCProblem) -> GoalTrackingCost {
    GoalTrackingCost {
        goal: problem.goal,
        q_p: problem.q_p,
        r_u: problem.r_u,
    }
}

/// Which geometric constraint family guards obstacles.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AvoidanceScheme {
    /// Velocity-cone complement on v_k (collision-course exclusion).
    VelocityCone,
    /// Clearance-disk complement on p_k (keep-out distance).
    ClearanceDisk,
}

/// Builds the constraint blocks for one outer iteration: per obstacle and
/// step an avoidance block at the reference trajectory's robot position
/// against the predicted obstacle center, then one velocity-box block per
/// step. Degenerate cones (robot already inside the inflated disk) are
/// replaced by the flee halfplane.
pub fn build_blocks(
    problem: &NMPCProblem,
    reference: &StateTraj,
    scheme: AvoidanceScheme,
) -> Result<Vec<ConstraintBlock>> {
    let n = problem.horizon_n;
    if reference.len() != n {
        return Err(Error::InvalidParameter(format!(
            "reference trajectory has {} states, expected {}",
            reference.len(),
            n
        )));
    }
    let mut blocks = Vec::with_capacity(problem.obstacles.len() * n + n);
    for (i, obstacle) in problem.obstacles.iter().enumerate() {
        let r_sum = problem.combined_radius(obstacle);
        for k in 1..=n {
            let center = obstacle.predicted_center(k, problem.dt);
            let id = BlockId {
                obstacle: Some(i),
                step: k,
            };
            match scheme {
                AvoidanceScheme::VelocityCone => {
                    let p_ref = reference.at_step(k).p;
                    let cone = build_vo_cone(p_ref, center, obstacle.velocity, r_sum)?;
                    let projector = if cone.is_degenerate() {
                        ProjectorSpec::Halfplane(cone.normals()[0].clone())
                    } else {
                        ProjectorSpec::VelocityCone(cone)
                    };
                    blocks.push(ConstraintBlock {
                        projector,
                        selector: Selector::Velocity { step: k },
                        lambda: Vec2::ZERO,
                        rho: 0.1,
                        id,
                    });
                }
                AvoidanceScheme::ClearanceDisk => {
                    blocks.push(ConstraintBlock {
                        projector: ProjectorSpec::EuclideanDistance {
                            obs: Disk::new(center, obstacle.disk.radius + problem.d_s)?,
                            r_robot: problem.robot_r,
                        },
                        selector: Selector::Position { step: k },
                        lambda: Vec2::ZERO,
                        rho: 0.1,
                        id,
                    });
                }
            }
        }
    }
    for k in 1..=n {
        blocks.push(ConstraintBlock {
            projector: ProjectorSpec::StateBox(problem.v_box),
            selector: Selector::Velocity { step: k },
            lambda: Vec2::ZERO,
            rho: 0.1,
            id: BlockId {
                obstacle: None,
                step: k,
            },
        });
    }
    Ok(blocks)
}

/// BlockBuilder wiring build_blocks into the solver's rebuild cadence.
pub struct NmpcBlockBuilder<'a> {
    pub problem: &'a NMPCProblem,
    pub scheme: AvoidanceScheme,
}

impl BlockBuilder for NmpcBlockBuilder<'_> {
    fn build(&self, reference: &StateTraj) -> Result<Vec<ConstraintBlock>> {
        build_blocks(self.problem, reference, self.scheme)
    }
}

#[derive(Clone, Debug)]
pub struct PlanStepResult {
    /// First control of the solution after the acceleration clamp and the
    /// velocity governor.
    pub applied_u: Vec2,
    pub predicted_traj: StateTraj,
    /// Full control solution (unclamped beyond the box projection inherent
    /// to the solver).
    pub controls: ControlSeq,
    pub stats: AlspgStats,
    /// Per-obstacle minimum center distance over the predicted trajectory.
    pub clearances: Vec<f64>,
    /// True when the solver failed numerically and the braking fallback was
    /// substituted.
    pub fallback: bool,
}

/// Maximal braking toward rest under the acceleration box.
pub(crate) fn braking_sequence(problem: &NMPCProblem) -> ControlSeq {
    let mut v = problem.x0.v;
    let mut seq = Vec::with_capacity(problem.horizon_n);
    for _ in 0..problem.horizon_n {
        let u = project_box(v * (-1.0 / problem.dt), &problem.a_box);
        seq.push(u);
        v = v + u * problem.dt;
    }
    ControlSeq(seq)
}

/// Clamps an acceleration so the next velocity stays inside v_box while the
/// acceleration stays inside a_box. The constraint blocks keep velocities
/// near the box already; this removes the residual overshoot the soft
/// augmented Lagrangian tolerates.
pub fn velocity_governor(u: Vec2, v: Vec2, v_box: &Box2, a_box: &Box2, dt: f64) -> Vec2 {
    let clamp_axis = |u: f64, v: f64, v_lo: f64, v_hi: f64, a_lo: f64, a_hi: f64| {
        let lo = a_lo.max((v_lo - v) / dt);
        let hi = a_hi.min((v_hi - v) / dt);
        if lo <= hi {
            u.clamp(lo, hi)
        } else {
            // Velocity already outside its box beyond one step's authority;
            // brake as hard as the acceleration box allows.
            ((v_lo.max(v.min(v_hi)) - v) / dt).clamp(a_lo, a_hi)
        }
    };
    Vec2::new(
        clamp_axis(
            u.x,
            v.x,
            v_box.lower().x,
            v_box.upper().x,
            a_box.lower().x,
            a_box.upper().x,
        ),
        clamp_axis(
            u.y,
            v.y,
            v_box.lower().y,
            v_box.upper().y,
            a_box.lower().y,
            a_box.upper().y,
        ),
    )
}

/// Caps the commanded speed to the braking envelope sqrt(2 a d) toward the
/// goal. Short horizons cannot see far enough ahead to brake in time, and a
/// pure position cost then orbits the goal without settling; this clamp
/// restores point stabilization without touching the solve. The deliberately
/// small braking constant engages the taper about half a meter out at the
/// stock limits, well inside the last obstacle encounter of the shipped
/// scenes but early enough to kill the orbit.
pub fn approach_envelope(u: Vec2, x0: &RobotState, goal: Vec2, a_box: &Box2, dt: f64) -> Vec2 {
    let a_lim = a_box
        .upper()
        .x
        .min(a_box.upper().y)
        .min(-a_box.lower().x)
        .min(-a_box.lower().y);
    let a_brake = 0.15 * a_lim;
    if a_brake <= 0.0 {
        return u;
    }
    let cap = (2.0 * a_brake * (goal - x0.p).norm()).sqrt();
    let v_next = x0.v + u * dt;
    let speed = v_next.norm();
    if speed <= cap {
        return u;
    }
    let v_target = v_next * (cap / speed);
    project_box((v_target - x0.v) * (1.0 / dt), a_box)
}

/// Dual-mode terminal controller: inside this goal radius, with every
/// obstacle at least `TERMINAL_OBSTACLE_MARGIN` beyond its keep-out
/// distance, actuation switches from the receding-horizon solution to a
/// critically damped PD landing law. Short horizons lack the lookahead to
/// brake and settle on their own; the handover is the standard cure.
pub const TERMINAL_RADIUS: f64 = 0.4;
pub const TERMINAL_OBSTACLE_MARGIN: f64 = 0.15;

fn terminal_landing(problem: &NMPCProblem) -> Option<Vec2> {
    let x0 = &problem.x0;
    let err = x0.p - problem.goal;
    if err.norm() > TERMINAL_RADIUS {
        return None;
    }
    let clear = problem.obstacles.iter().all(|o| {
        (x0.p - o.disk.center).norm() >= problem.combined_radius(o) + TERMINAL_OBSTACLE_MARGIN
    });
    if !clear {
        return None;
    }
    let (k_p, k_d) = (4.0, 4.0);
    Some(err * -k_p - x0.v * k_d)
}

/// One receding-horizon step: solve from the warm start, apply the first
/// control, shift the solution for the next round. Numerical failures fall
/// back to braking.
pub fn plan_step(
    problem: &NMPCProblem,
    warm: &ControlSeq,
    cfg: &ALSPGConfig,
    scheme: AvoidanceScheme,
) -> Result<(PlanStepResult, ControlSeq)> {
    problem.validate()?;
    if warm.len() != problem.horizon_n {
        return Err(Error::InvalidParameter(format!(
            "warm start length {} does not match horizon {}",
            warm.len(),
            problem.horizon_n
        )));
    }
    let builder = NmpcBlockBuilder { problem, scheme };
    let (controls, stats, fallback) = match alspg_solve(problem, warm, cfg, &builder) {
        Ok((u, s)) => (u, s, false),
        Err(Error::NumericalFailure { .. }) => {
            (braking_sequence(problem), AlspgStats::default(), true)
        }
        Err(e) => return Err(e),
    };
    finish_plan(problem, controls, stats, fallback)
}

/// Turns a solved (or fallback) control sequence into the applied control,
/// prediction diagnostics and the next warm start. Shared by the projection
/// planner and the enumeration oracle.
pub(crate) fn finish_plan(
    problem: &NMPCProblem,
    controls: ControlSeq,
    stats: AlspgStats,
    fallback: bool,
) -> Result<(PlanStepResult, ControlSeq)> {
    let landing = terminal_landing(problem);
    let applied_box = project_box(landing.unwrap_or(controls.0[0]), &problem.a_box);
    let governed = velocity_governor(
        applied_box,
        problem.x0.v,
        &problem.v_box,
        &problem.a_box,
        problem.dt,
    );
    let applied_u = if landing.is_some() {
        governed
    } else {
        approach_envelope(
            governed,
            &problem.x0,
            problem.goal,
            &problem.a_box,
            problem.dt,
        )
    };
    let predicted_traj = rollout(problem.x0, &controls, problem.dt)?;
    let clearances = problem
        .obstacles
        .iter()
        .map(|o| {
            (1..=problem.horizon_n)
                .map(|k| {
                    predicted_traj
                        .at_step(k)
                        .p
                        .dist(o.predicted_center(k, problem.dt))
                })
                .fold(f64::INFINITY, f64::min)
        })
        .collect();

    let mut warm_next = Vec::with_capacity(problem.horizon_n);
    warm_next.extend_from_slice(&controls.0[1..]);
    warm_next.push(*controls.0.last().expect("horizon >= 1"));

    Ok((
        PlanStepResult {
            applied_u,
            predicted_traj,
            controls,
            stats,
            clearances,
            fallback,
        },
        ControlSeq(warm_next),
    ))
}

/// The simulation methods the harness can drive.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    GeoProVo,
    GeoProEd,
    ReactiveVo,
    MinlpOracle,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::GeoProVo,
        Method::GeoProEd,
        Method::ReactiveVo,
        Method::MinlpOracle,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::GeoProVo => "geopro-vo",
            Method::GeoProEd => "geopro-ed",
            Method::ReactiveVo => "reactive-vo",
            Method::MinlpOracle => "minlp-oracle",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Method::ALL
            .iter()
            .find(|m| m.name() == s)
            .copied()
            .ok_or_else(|| {
                format!(
                    "unknown method '{s}'; expected one of {}",
                    Method::ALL.map(|m| m.name()).join(", ")
                )
            })
    }
}

/// Runs a scenario to completion: replans every dt, advances the robot and
/// the obstacles, and records one row per executed control step. Stops on
/// goal arrival, collision (recorded, not raised), or the time budget.
pub fn run_closed_loop(
    scenario: &Scenario,
    method: Method,
    horizon_override: Option<usize>,
) -> Result<SimTrace> {
    scenario.validate()?;
    let params = &scenario.params;
    let n = horizon_override.unwrap_or(params.n);
    if n < 1 {
        return Err(Error::InvalidParameter("horizon must be >= 1".into()));
    }
    let dt = params.dt;
    let cfg = ALSPGConfig::default();
    let collision_radii: Vec<f64> = scenario
        .obstacles
        .iter()
        .map(|o| scenario.robot.r + o.radius)
        .collect();

    let mut state = RobotState::at_rest(scenario.robot.start);
    let mut warm = ControlSeq::zeros(n);
    let mut rows: Vec<TraceRow> = Vec::new();
    let max_steps = (params.max_time / dt).round() as usize;
    let mut ending: Option<(Outcome, f64)> = None;

    for step_idx in 0..max_steps {
        let t = step_idx as f64 * dt;
        if state.p.dist(scenario.robot.goal) <= params.goal_tol {
            ending = Some((Outcome::Goal, t));
            break;
        }
        // Obstacle centers at this instant; motion is affine in time.
        let obstacles: Vec<MovingObstacle> = scenario
            .obstacles
            .iter()
            .map(|o| -> Result<MovingObstacle> {
                Ok(MovingObstacle {
                    disk: Disk::new(o.center + o.velocity * t, o.radius)?,
                    velocity: o.velocity,
                })
            })
            .collect::<Result<_>>()?;
        let clearances: Vec<f64> = obstacles
            .iter()
            .map(|o| state.p.dist(o.disk.center))
            .collect();
        let collided = clearances
            .iter()
            .zip(&collision_radii)
            .any(|(c, r)| c < r);

        let problem = scenario.to_problem(state, &obstacles, n)?;
        let t0 = Instant::now();
        let (applied, outer_iters, norm_v) = match method {
            Method::GeoProVo | Method::GeoProEd => {
                let scheme = if method == Method::GeoProVo {
                    AvoidanceScheme::VelocityCone
                } else {
                    AvoidanceScheme::ClearanceDisk
                };
                let (result, warm_next) = plan_step(&problem, &warm, &cfg, scheme)?;
                warm = warm_next;
                (
                    Applied::Accel(result.applied_u),
                    result.stats.outer_iters,
                    result.stats.final_v_norm,
                )
            }
            Method::ReactiveVo => {
                let choice = crate::baselines::reactive_vo_step(
                    state.p,
                    state.v,
                    scenario.robot.goal,
                    &obstacles,
                    scenario.robot.r,
                    params.d_s,
                    params.v_max,
                    crate::baselines::DEFAULT_GRID_N,
                )?;
                (Applied::Velocity(choice.velocity), 0, 0.0)
            }
            Method::MinlpOracle => {
                let (result, warm_next) =
                    crate::baselines::minlp_plan_step(&problem, &warm, &cfg)?;
                warm = warm_next;
                (
                    Applied::Accel(result.applied_u),
                    result.stats.outer_iters,
                    result.stats.final_v_norm,
                )
            }
        };
        let solve_ms = t0.elapsed().as_secs_f64() * 1e3;

        let accel = match applied {
            Applied::Accel(u) => u,
            // The reactive controller sets velocity directly; the induced
            // acceleration is recorded unclamped.
            Applied::Velocity(v_new) => (v_new - state.v) * (1.0 / dt),
        };
        rows.push(TraceRow {
            t,
            p: state.p,
            v: state.v,
            a: accel,
            solve_ms,
            outer_iters,
            norm_v,
            clearances,
        });
        if collided {
            ending = Some((Outcome::Collision, t));
            break;
        }

        match applied {
            Applied::Accel(u) => {
                state = crate::dynamics::step(state, u, dt)?;
            }
            Applied::Velocity(v_new) => {
                state = RobotState::new(state.p + v_new * dt, v_new);
            }
        }
    }

    let (outcome, t_final) = ending.unwrap_or_else(|| {
        let t_end = max_steps as f64 * dt;
        if state.p.dist(scenario.robot.goal) <= params.goal_tol {
            (Outcome::Goal, t_end)
        } else {
            (Outcome::Timeout, t_end)
        }
    });

    Ok(SimTrace {
        scenario: scenario.clone(),
        method: method.name().to_string(),
        horizon: n,
        seed: scenario.seed,
        rows,
        outcome,
        t_final,
    })
}

enum Applied {
    Accel(Vec2),
    Velocity(Vec2),
}
