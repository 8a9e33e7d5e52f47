//! Projection-based nonlinear MPC for 2D collision avoidance.
//!
//! A double-integrator robot navigates among static and moving circular
//! obstacles. Obstacle avoidance is expressed in velocity space: the set of
//! velocities on a collision course with an obstacle forms a cone, and the
//! planner constrains each predicted velocity to the cone's complement. The
//! non-convex constraints are handled by geometric projectors inside an
//! augmented Lagrangian loop whose smooth subproblems are solved by a
//! spectral projected gradient method; the only hard set the inner solver
//! sees is the acceleration box.
//!
//! Layering, bottom up:
//! - [`geometry`]: vectors, halfplanes, boxes, disks and their projections.
//! - [`projectors`]: velocity-cone construction and the cone/disk projectors.
//! - [`dynamics`]: exact discrete double-integrator rollout and the adjoint
//!   gradient transport for the condensed problem.
//! - [`spg`]: box-constrained spectral projected gradient solver.
//! - [`alspg`]: augmented Lagrangian outer loop over constraint blocks.
//! - [`planner`]: receding-horizon assembly and the closed simulation loop.
//! - [`baselines`]: reactive velocity sampling, clearance-disk planning, and
//!   an exact enumeration oracle over the avoidance disjunction.
//! - [`harness`]: scenario files, CSV/SVG trace artifacts, batch reports.
//!
//! ```
//! use geopro_mpc::{build_vo_cone, geopro_vo, Vec2};
//!
//! // A robot at the origin, an obstacle 1 m ahead drifting left to right.
//! let cone = build_vo_cone(
//!     Vec2::ZERO,
//!     Vec2::new(1.0, 0.0),
//!     Vec2::new(0.0, 0.1),
//!     0.23,
//! )
//! .unwrap();
//! // Heading straight at it is a collision course; the projector returns
//! // the nearest safe velocity instead.
//! let v = Vec2::new(0.4, 0.1);
//! assert!(cone.contains(v));
//! let safe = geopro_vo(v, &cone).unwrap();
//! assert!(!cone.contains(safe) || cone.normals().iter().any(|h| h.residual(safe).abs() < 1e-9));
//! ```

pub mod alspg;
pub mod baselines;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod planner;
pub mod projectors;
pub mod spg;

pub use alspg::{
    alspg_solve, distance_function, eval_lagrangian, ALSPGConfig, AlspgStats, BlockBuilder,
    BlockId, ConstraintBlock, Selector,
};
pub use baselines::{
    ed_plan_step, minlp_enumerate, minlp_plan_step, reactive_vo_step, MinlpOutcome,
    ReactiveChoice, DEFAULT_GRID_N, ENUMERATION_CAP,
};
pub use dynamics::{
    adjoint_multiply, rollout, step, BatchLinearization, ControlSeq, RobotState, StateTraj,
};
pub use error::{Error, Result};
pub use geometry::{project_box, project_halfplane, rotate, Box2, Disk, Hyperplane, Vec2};
pub use harness::{
    emit_plot, load_scenario, run_suite, Outcome, Scenario, SimTrace, SuiteReport, TraceRow,
};
pub use planner::{
    build_blocks, build_cost, plan_step, run_closed_loop, AvoidanceScheme, GoalTrackingCost,
    Method, MovingObstacle, NMPCProblem, PlanStepResult,
};
pub use projectors::{apply_projector, build_vo_cone, geopro_ed, geopro_vo, ProjectorSpec, VOCone};
pub use spg::{spg_minimize, SPGConfig, SpgStats};
