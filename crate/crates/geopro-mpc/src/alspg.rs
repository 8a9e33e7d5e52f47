//! Augmented Lagrangian outer loop around the spectral projected gradient
//! inner solver.
//!
//! Constraints enter as projector blocks: each block selects a 2D slice of
//! the rolled-out trajectory (a velocity or position at one step) and owns a
//! projector onto its feasible set, a multiplier estimate and a penalty
//! weight. The inner solver only ever sees the smooth augmented Lagrangian
//! and the control box.

use std::time::Instant;

use crate::dynamics::{rollout, BatchLinearization, ControlSeq, StateTraj};
use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::planner::{build_cost, GoalTrackingCost, NMPCProblem};
use crate::projectors::{apply_projector, ProjectorSpec};
use crate::spg::{spg_minimize, SPGConfig, SpgStats};

/// Which 2D slice of the trajectory a constraint block acts on. Steps are
/// 1-based: step k refers to the k-th state after the initial one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Selector {
    Velocity { step: usize },
    Position { step: usize },
}

impl Selector {
    pub fn step(&self) -> usize {
        match *self {
            Selector::Velocity { step } | Selector::Position { step } => step,
        }
    }

    pub fn extract(&self, traj: &StateTraj) -> Result<Vec2> {
        let step = self.step();
        if step == 0 || step > traj.len() {
            return Err(Error::InvalidParameter(format!(
                "selector step {step} outside horizon of length {}",
                traj.len()
            )));
        }
        let state = traj.at_step(step);
        Ok(match self {
            Selector::Velocity { .. } => state.v,
            Selector::Position { .. } => state.p,
        })
    }

    /// Adds `w` into the state-cost slot this selector reads from, i.e.
    /// applies the (constant) selection Jacobian transpose.
    pub fn scatter(&self, w: Vec2, omega: &mut [[f64; 4]]) -> Result<()> {
        let step = self.step();
        if step == 0 || step > omega.len() {
            return Err(Error::InvalidParameter(format!(
                "selector step {step} outside horizon of length {}",
                omega.len()
            )));
        }
        let slot = &mut omega[step - 1];
        match self {
            Selector::Position { .. } => {
                slot[0] += w.x;
                slot[1] += w.y;
            }
            Selector::Velocity { .. } => {
                slot[2] += w.x;
                slot[3] += w.y;
            }
        }
        Ok(())
    }
}

/// Identity of a constraint block: which obstacle (if any) and which step it
/// guards. Velocity-box blocks carry no obstacle index.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockId {
    pub obstacle: Option<usize>,
    pub step: usize,
}

#[derive(Clone, Debug)]
pub struct ConstraintBlock {
    pub projector: ProjectorSpec,
    pub selector: Selector,
    pub lambda: Vec2,
    pub rho: f64,
    pub id: BlockId,
}

#[derive(Clone, Debug)]
pub struct ALSPGConfig {
    /// Penalty growth factor.
    pub beta: f64,
    pub rho_init: f64,
    /// Penalty ceiling; growth saturates here.
    pub rho_max: f64,
    /// Stacked constraint-distance 2-norm below which the solve stops.
    pub eps_tol: f64,
    /// Maximum outer iterations.
    pub n_max: usize,
    pub spg: SPGConfig,
}

impl Default for ALSPGConfig {
    fn default() -> Self {
        ALSPGConfig {
            beta: 20.0,
            rho_init: 0.1,
            rho_max: 1e8,
            eps_tol: 1e-2,
            n_max: 20,
            spg: SPGConfig::default(),
        }
    }
}

impl ALSPGConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 1.0) {
            return Err(Error::InvalidParameter("alspg: beta must be > 1".into()));
        }
        if !(self.rho_init > 0.0 && self.rho_init <= self.rho_max) {
            return Err(Error::InvalidParameter(
                "alspg: need 0 < rho_init <= rho_max".into(),
            ));
        }
        if !(self.eps_tol > 0.0) {
            return Err(Error::InvalidParameter("alspg: eps_tol must be > 0".into()));
        }
        if self.n_max < 1 {
            return Err(Error::InvalidParameter("alspg: n_max must be >= 1".into()));
        }
        self.spg.validate()
    }
}

/// Per-block bookkeeping for one outer iteration.
#[derive(Clone, Copy, Debug)]
pub struct BlockRecord {
    pub id: BlockId,
    /// ||V|| at the incoming iterate with the incoming multiplier.
    pub v_before: f64,
    /// ||V|| at the new iterate with the updated multiplier, old penalty.
    pub v_after: f64,
    pub rho_before: f64,
    pub rho_after: f64,
    pub lambda_before: Vec2,
    pub lambda_after: Vec2,
}

#[derive(Clone, Debug)]
pub struct OuterRecord {
    pub stacked_v_norm: f64,
    pub solve_ms: f64,
    pub inner: SpgStats,
    pub blocks: Vec<BlockRecord>,
}

#[derive(Clone, Debug, Default)]
pub struct AlspgStats {
    pub outer_iters: usize,
    pub converged: bool,
    /// Stacked 2-norm of all block distances at the returned iterate.
    pub final_v_norm: f64,
    /// Times the penalty growth saturated at rho_max.
    pub rho_ceiling_hits: usize,
    pub total_inner_iters: usize,
    pub outer: Vec<OuterRecord>,
}

/// Source of constraint blocks for a reference trajectory. The solver calls
/// `build` once up front and `rebuild` before every subsequent outer
/// iteration so constraint geometry tracks the current solution estimate
/// while multipliers and penalties persist.
pub trait BlockBuilder {
    fn build(&self, reference: &StateTraj) -> Result<Vec<ConstraintBlock>>;

    /// Default: rebuild geometry by re-running `build` and transplanting the
    /// fresh projectors; block count and order must be reproducible.
    fn rebuild(&self, reference: &StateTraj, blocks: &mut [ConstraintBlock]) -> Result<()> {
        let fresh = self.build(reference)?;
        if fresh.len() != blocks.len() {
            return Err(Error::InvalidParameter(format!(
                "block builder changed block count across rebuild: {} -> {}",
                blocks.len(),
                fresh.len()
            )));
        }
        for (old, new) in blocks.iter_mut().zip(fresh) {
            debug_assert_eq!(old.id, new.id, "block identity must survive rebuild");
            old.projector = new.projector;
        }
        Ok(())
    }
}

/// Empty constraint set; turns alspg_solve into a single smooth solve.
pub struct NoBlocks;

impl BlockBuilder for NoBlocks {
    fn build(&self, _reference: &StateTraj) -> Result<Vec<ConstraintBlock>> {
        Ok(Vec::new())
    }
}

fn shifted_target(traj: &StateTraj, block: &ConstraintBlock) -> Result<(Vec2, Vec2, Vec2)> {
    let g = block.selector.extract(traj)?;
    let y = g + block.lambda * (1.0 / block.rho);
    let py = apply_projector(&block.projector, y)?;
    Ok((g, y, py))
}

/// Constraint distance V = g(U) - P(g(U) + lambda/rho) for one block, given
/// the rolled-out trajectory of U.
pub fn distance_from_traj(traj: &StateTraj, block: &ConstraintBlock) -> Result<Vec2> {
    let (g, _, py) = shifted_target(traj, block)?;
    Ok(g - py)
}

/// Standalone form: rolls out the controls first.
pub fn distance_function(
    controls: &ControlSeq,
    block: &ConstraintBlock,
    problem: &NMPCProblem,
) -> Result<Vec2> {
    let traj = rollout(problem.x0, controls, problem.dt)?;
    distance_from_traj(&traj, block)
}

fn eval_inner(
    u_flat: &[f64],
    blocks: &[ConstraintBlock],
    problem: &NMPCProblem,
    lin: &BatchLinearization,
    cost: &GoalTrackingCost,
) -> Result<(f64, Vec<f64>)> {
    let controls = ControlSeq::from_flat(u_flat);
    let traj = rollout(problem.x0, &controls, problem.dt)?;
    let (mut value, j_x, j_u) = cost.eval(&traj, &controls);
    let mut omega = j_x;
    for block in blocks {
        let (_, y, py) = shifted_target(&traj, block)?;
        let diff = y - py;
        value += 0.5 * block.rho * diff.norm_sq();
        block.selector.scatter(diff * block.rho, &mut omega)?;
    }
    let z = crate::dynamics::adjoint_multiply(&omega, lin)?;
    let mut grad = Vec::with_capacity(u_flat.len());
    for (zk, ju) in z.iter().zip(&j_u) {
        grad.push(zk[0] + ju[0]);
        grad.push(zk[1] + ju[1]);
    }
    Ok((value, grad))
}

/// Augmented Lagrangian value and flat gradient at `controls` for the given
/// blocks: task cost plus (rho/2)||g + lambda/rho - P(g + lambda/rho)||^2 per
/// block, differentiated through the condensed dynamics by one adjoint pass.
pub fn eval_lagrangian(
    controls: &ControlSeq,
    blocks: &[ConstraintBlock],
    problem: &NMPCProblem,
) -> Result<(f64, Vec<f64>)> {
    problem.validate()?;
    let lin = BatchLinearization::double_integrator(problem.horizon_n, problem.dt)?;
    let cost = build_cost(problem);
    eval_inner(&controls.to_flat(), blocks, problem, &lin, &cost)
}

fn project_controls(u: &[f64], problem: &NMPCProblem) -> Vec<f64> {
    let lo = problem.a_box.lower();
    let hi = problem.a_box.upper();
    u.iter()
        .enumerate()
        .map(|(i, &c)| {
            if i % 2 == 0 {
                c.clamp(lo.x, hi.x)
            } else {
                c.clamp(lo.y, hi.y)
            }
        })
        .collect()
}

/// Runs the outer augmented Lagrangian loop: inner SPG solve, multiplier
/// update, per-block penalty escalation when a block's distance failed to
/// decrease, geometry rebuild from the new rollout. Stops when the stacked
/// distance norm reaches eps_tol or after n_max outer iterations.
pub fn alspg_solve(
    problem: &NMPCProblem,
    u_init: &ControlSeq,
    cfg: &ALSPGConfig,
    builder: &dyn BlockBuilder,
) -> Result<(ControlSeq, AlspgStats)> {
    cfg.validate()?;
    problem.validate()?;
    if u_init.len() != problem.horizon_n {
        return Err(Error::InvalidParameter(format!(
            "warm start length {} does not match horizon {}",
            u_init.len(),
            problem.horizon_n
        )));
    }

    let lin = BatchLinearization::double_integrator(problem.horizon_n, problem.dt)?;
    let cost = build_cost(problem);
    let mut u_flat = project_controls(&u_init.to_flat(), problem);
    let mut traj = rollout(problem.x0, &ControlSeq::from_flat(&u_flat), problem.dt)?;

    let mut blocks = builder.build(&traj)?;
    for b in &mut blocks {
        b.lambda = Vec2::ZERO;
        b.rho = cfg.rho_init;
    }

    let mut stats = AlspgStats::default();
    for outer in 0..cfg.n_max {
        let t0 = Instant::now();

        let mut v_old = Vec::with_capacity(blocks.len());
        for b in &blocks {
            v_old.push(distance_from_traj(&traj, b)?.norm());
        }

        let (u_new, inner_stats) = spg_minimize(
            |x| eval_inner(x, &blocks, problem, &lin, &cost),
            |x| project_controls(x, problem),
            &u_flat,
            &cfg.spg,
        )?;
        let traj_new = rollout(problem.x0, &ControlSeq::from_flat(&u_new), problem.dt)?;

        let mut records = Vec::with_capacity(blocks.len());
        let mut stacked_sq = 0.0;
        for (bi, b) in blocks.iter_mut().enumerate() {
            let lambda_before = b.lambda;
            let rho_before = b.rho;
            let (g, y, py) = shifted_target(&traj_new, b)?;
            // lambda_new = rho (g + lambda/rho - P(g + lambda/rho))
            b.lambda = (y - py) * rho_before;

            // Distance at the new iterate with the updated multiplier and
            // the not-yet-escalated penalty; this drives both the penalty
            // comparison and the termination norm.
            let y2 = g + b.lambda * (1.0 / rho_before);
            let py2 = apply_projector(&b.projector, y2)?;
            let v_after = (g - py2).norm();
            stacked_sq += v_after * v_after;

            // Satisfied blocks (no residual) never escalate; penalty growth
            // exists to force progress, and growing it here only degrades
            // the inner problem's conditioning.
            let mut rho_after = rho_before;
            if v_after > 1e-12 && v_after >= v_old[bi] - 1e-12 {
                let grown = rho_before * cfg.beta;
                rho_after = grown.min(cfg.rho_max);
                if grown > cfg.rho_max {
                    stats.rho_ceiling_hits += 1;
                }
                b.rho = rho_after;
            }
            records.push(BlockRecord {
                id: b.id,
                v_before: v_old[bi],
                v_after,
                rho_before,
                rho_after,
                lambda_before,
                lambda_after: b.lambda,
            });
        }
        let stacked = stacked_sq.sqrt();

        u_flat = u_new;
        traj = traj_new;
        stats.outer_iters += 1;
        stats.total_inner_iters += inner_stats.iterations;
        stats.final_v_norm = stacked;
        stats.outer.push(OuterRecord {
            stacked_v_norm: stacked,
            solve_ms: t0.elapsed().as_secs_f64() * 1e3,
            inner: inner_stats,
            blocks: records,
        });

        if stacked <= cfg.eps_tol {
            stats.converged = true;
            break;
        }
        if outer + 1 < cfg.n_max {
            builder.rebuild(&traj, &mut blocks)?;
        }
    }

    Ok((ControlSeq::from_flat(&u_flat), stats))
}
