//! Comparison controllers: the reactive velocity-space sampler, the
//! clearance-disk planner handle, and a small-scale exact enumeration oracle
//! over the avoidance disjunction.

use crate::alspg::{
    alspg_solve, ALSPGConfig, AlspgStats, BlockBuilder, BlockId, ConstraintBlock, Selector,
};
use crate::dynamics::{rollout, ControlSeq, StateTraj};
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::planner::{
    braking_sequence, build_cost, finish_plan, plan_step, AvoidanceScheme, MovingObstacle,
    NMPCProblem, PlanStepResult,
};
use crate::projectors::{build_vo_cone, ProjectorSpec, VOCone};

pub const DEFAULT_GRID_N: usize = 41;

/// Result of one reactive velocity selection.
#[derive(Clone, Copy, Debug)]
pub struct ReactiveChoice {
    pub velocity: Vec2,
    /// False when every lattice candidate was inside some velocity cone and
    /// the least-unsafe fallback was returned instead.
    pub safe: bool,
}

/// Signed distance of a velocity to the safe region of one cone: positive
/// outside (the larger of the two halfplane residuals), negative inside.
fn cone_signed_distance(cone: &VOCone, v: Vec2) -> f64 {
    if cone.is_degenerate() {
        cone.normals()[0].residual(v)
    } else {
        cone.normals()[0]
            .residual(v)
            .max(cone.normals()[1].residual(v))
    }
}

/// One step of the reactive velocity-obstacle controller: pick the lattice
/// velocity closest to the goal-directed preference that lies outside every
/// obstacle's cone. The chosen velocity is applied directly by the caller;
/// no acceleration limit enters the selection, which is the point of this
/// baseline.
#[allow(clippy::too_many_arguments)]
pub fn reactive_vo_step(
    p: Vec2,
    _v: Vec2,
    goal: Vec2,
    obstacles: &[MovingObstacle],
    r_robot: f64,
    d_s: f64,
    v_max: f64,
    grid_n: usize,
) -> Result<ReactiveChoice> {
    if grid_n < 3 || grid_n % 2 == 0 {
        return Err(Error::InvalidParameter(
            "reactive grid size must be odd and >= 3".into(),
        ));
    }
    if !(v_max > 0.0) {
        return Err(Error::InvalidParameter("v_max must be > 0".into()));
    }
    let to_goal = goal - p;
    let v_pref = if to_goal.norm() > v_max {
        to_goal * (v_max / to_goal.norm())
    } else {
        to_goal
    };
    let cones: Vec<VOCone> = obstacles
        .iter()
        .map(|o| {
            build_vo_cone(
                p,
                o.disk.center,
                o.velocity,
                r_robot + o.disk.radius + d_s,
            )
        })
        .collect::<Result<_>>()?;

    let coord = |i: usize| -v_max + 2.0 * v_max * (i as f64) / ((grid_n - 1) as f64);
    let mut best_safe: Option<(f64, Vec2)> = None;
    let mut best_unsafe: Option<(f64, Vec2)> = None;
    for i in 0..grid_n {
        for j in 0..grid_n {
            let cand = Vec2::new(coord(i), coord(j));
            let min_sd = cones
                .iter()
                .map(|c| cone_signed_distance(c, cand))
                .fold(f64::INFINITY, f64::min);
            if min_sd >= 0.0 {
                let d = cand.dist(v_pref);
                if best_safe.as_ref().map_or(true, |(bd, _)| d < *bd) {
                    best_safe = Some((d, cand));
                }
            } else if best_unsafe.as_ref().map_or(true, |(bs, _)| min_sd > *bs) {
                best_unsafe = Some((min_sd, cand));
            }
        }
    }
    if let Some((_, velocity)) = best_safe {
        Ok(ReactiveChoice {
            velocity,
            safe: true,
        })
    } else {
        let (_, velocity) = best_unsafe.expect("lattice is non-empty");
        Ok(ReactiveChoice {
            velocity,
            safe: false,
        })
    }
}

/// Hard cap on disjunction pairs the oracle will enumerate (2^cap solves).
pub const ENUMERATION_CAP: usize = 8;

#[derive(Clone, Debug)]
pub struct MinlpOutcome {
    /// Best feasible solution: controls, task cost, assignment code and the
    /// solver stats of the winning subproblem.
    pub best: Option<(ControlSeq, f64, usize, AlspgStats)>,
    pub feasible_count: usize,
    /// Total assignments enumerated, always 2^(obstacles * horizon).
    pub assignments: usize,
}

/// Fixed halfplane choice per (obstacle, step) pair: bit b of `code` selects
/// the cone side for pair index b = obstacle * horizon + (step - 1). Cone
/// geometry still refreshes from the reference trajectory each rebuild; only
/// the side commitment is frozen.
struct AssignmentBuilder<'a> {
    problem: &'a NMPCProblem,
    code: usize,
}

impl BlockBuilder for AssignmentBuilder<'_> {
    fn build(&self, reference: &StateTraj) -> Result<Vec<ConstraintBlock>> {
        let n = self.problem.horizon_n;
        let mut blocks = Vec::with_capacity(self.problem.obstacles.len() * n + n);
        for (i, obstacle) in self.problem.obstacles.iter().enumerate() {
            let r_sum = self.problem.combined_radius(obstacle);
            for k in 1..=n {
                let cone = build_vo_cone(
                    reference.at_step(k).p,
                    obstacle.predicted_center(k, self.problem.dt),
                    obstacle.velocity,
                    r_sum,
                )?;
                let side = (self.code >> (i * n + (k - 1))) & 1;
                blocks.push(ConstraintBlock {
                    projector: ProjectorSpec::Halfplane(cone.normals()[side].clone()),
                    selector: Selector::Velocity { step: k },
                    lambda: Vec2::ZERO,
                    rho: 0.1,
                    id: BlockId {
                        obstacle: Some(i),
                        step: k,
                    },
                });
            }
        }
        for k in 1..=n {
            blocks.push(ConstraintBlock {
                projector: ProjectorSpec::StateBox(self.problem.v_box),
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
}

/// Exact enumeration over the per-(obstacle, step) side disjunction: each
/// assignment enforces one halfplane of each cone, every assignment is
/// solved to convergence, and the cheapest feasible solution wins (ties
/// break toward the lexicographically smallest code). Enforcing one side per
/// pair covers the full "at least one side holds" disjunction because
/// enforcing both sides is never looser than the better single side.
pub fn minlp_enumerate(
    problem: &NMPCProblem,
    warm: &ControlSeq,
    cfg: &ALSPGConfig,
) -> Result<MinlpOutcome> {
    problem.validate()?;
    let pairs = problem.obstacles.len() * problem.horizon_n;
    if pairs > ENUMERATION_CAP {
        return Err(Error::EnumerationCap {
            pairs,
            cap: ENUMERATION_CAP,
        });
    }
    let assignments = 1usize << pairs;
    let cost = build_cost(problem);
    let mut best: Option<(ControlSeq, f64, usize, AlspgStats)> = None;
    let mut feasible_count = 0;
    for code in 0..assignments {
        let builder = AssignmentBuilder { problem, code };
        let (u, stats) = alspg_solve(problem, warm, cfg, &builder)?;
        if !stats.converged {
            continue;
        }
        feasible_count += 1;
        let traj = rollout(problem.x0, &u, problem.dt)?;
        let c = cost.task_cost(&traj, &u);
        if best.as_ref().map_or(true, |(_, bc, _, _)| c < *bc) {
            best = Some((u, c, code, stats));
        }
    }
    Ok(MinlpOutcome {
        best,
        feasible_count,
        assignments,
    })
}

/// Receding-horizon step driven by the enumeration oracle; brakes when no
/// assignment is feasible.
pub fn minlp_plan_step(
    problem: &NMPCProblem,
    warm: &ControlSeq,
    cfg: &ALSPGConfig,
) -> Result<(PlanStepResult, ControlSeq)> {
    let outcome = minlp_enumerate(problem, warm, cfg)?;
    match outcome.best {
        Some((controls, _, _, stats)) => finish_plan(problem, controls, stats, false),
        None => finish_plan(
            problem,
            braking_sequence(problem),
            AlspgStats::default(),
            true,
        ),
    }
}

/// The clearance-disk planner is the standard pipeline with the Euclidean
/// scheme; exposed as a named handle for symmetry with the other methods.
pub fn ed_plan_step(
    problem: &NMPCProblem,
    warm: &ControlSeq,
    cfg: &ALSPGConfig,
) -> Result<(PlanStepResult, ControlSeq)> {
    plan_step(problem, warm, cfg, AvoidanceScheme::ClearanceDisk)
}
