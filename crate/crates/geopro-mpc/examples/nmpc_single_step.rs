//! One receding-horizon solve, taken apart: assemble the problem by hand,
//! run the augmented Lagrangian solver, and inspect the predicted plan.

use geopro_mpc::{
    build_vo_cone, plan_step, ALSPGConfig, AvoidanceScheme, Box2, ControlSeq, MovingObstacle,
    NMPCProblem, Disk, RobotState, Vec2,
};

fn main() -> geopro_mpc::Result<()> {
    // Robot at rest, goal 2 m ahead, one obstacle drifting into the path.
    let problem = NMPCProblem {
        x0: RobotState::at_rest(Vec2::ZERO),
        goal: Vec2::new(2.0, 0.0),
        horizon_n: 6,
        dt: 0.05,
        q_p: 10.0,
        r_u: 0.1,
        obstacles: vec![MovingObstacle {
            disk: Disk {
                center: Vec2::new(0.9, 0.05),
                radius: 0.1,
            },
            velocity: Vec2::new(-0.2, 0.0),
        }],
        v_box: Box2::symmetric(0.4)?,
        a_box: Box2::symmetric(1.0)?,
        d_s: 0.03,
        robot_r: 0.1,
    };

    let warm = ControlSeq::zeros(problem.horizon_n);
    let cfg = ALSPGConfig::default();
    let (result, _next_warm) = plan_step(&problem, &warm, &cfg, AvoidanceScheme::VelocityCone)?;

    let s = &result.stats;
    println!(
        "outer iterations: {}  inner iterations: {}  converged: {}",
        s.outer_iters, s.total_inner_iters, s.converged
    );
    println!("residual norm: {:.3e}", s.final_v_norm);
    println!(
        "applied acceleration: ({:+.4}, {:+.4})",
        result.applied_u.x, result.applied_u.y
    );

    println!("\npredicted trajectory:");
    let r_keepout = problem.combined_radius(&problem.obstacles[0]);
    for k in 1..=problem.horizon_n {
        let x = result.predicted_traj.at_step(k);
        let center = problem.obstacles[0].predicted_center(k, problem.dt);
        let clearance = (x.p - center).norm();
        println!(
            "  k={k}  p=({:+.4}, {:+.4})  v=({:+.4}, {:+.4})  obstacle distance {:.4}",
            x.p.x, x.p.y, x.v.x, x.v.y, clearance
        );
        assert!(clearance >= r_keepout - 1e-3, "keep-out violated");

        // Each predicted velocity sits outside the cone built at its own
        // predicted position, up to the solver tolerance.
        let cone = build_vo_cone(
            x.p,
            problem.obstacles[0].predicted_center(k, problem.dt),
            problem.obstacles[0].velocity,
            r_keepout,
        )?;
        let r0 = cone.normals()[0].residual(x.v);
        let r1 = cone.normals()[1].residual(x.v);
        assert!(r0.max(r1) >= -1e-2, "velocity deep inside the cone");
    }
    println!("\nminimum keep-out distance: {:.4}", r_keepout);
    Ok(())
}
