//! Velocity-cone construction and projection on a few hand-picked
//! geometries, printed as a walkthrough.

use geopro_mpc::{build_vo_cone, geopro_vo, project_halfplane, Vec2};

fn describe(label: &str, robot: Vec2, center: Vec2, v_obs: Vec2, r_sum: f64, v: Vec2) {
    let cone = build_vo_cone(robot, center, v_obs, r_sum).expect("cone");
    let inside = cone.contains(v);
    println!("{label}");
    println!("  apex (obstacle velocity): ({:.3}, {:.3})", cone.apex().x, cone.apex().y);
    println!("  degenerate: {}", cone.is_degenerate());
    println!("  candidate v = ({:.3}, {:.3})  collision course: {}", v.x, v.y, inside);
    if inside {
        let safe = geopro_vo(v, &cone).expect("projection");
        let moved = (safe - v).norm();
        println!(
            "  projected  v = ({:.3}, {:.3})  displacement {:.4}",
            safe.x, safe.y, moved
        );
        // The projection lands on the cone boundary: one halfplane residual
        // is zero, and projecting again is a no-op.
        let again = geopro_vo(safe, &cone).expect("projection");
        assert!((again - safe).norm() <= 1e-12);
        let r0 = cone.normals()[0].residual(safe);
        let r1 = cone.normals()[1].residual(safe);
        println!("  boundary residuals: {:.2e}, {:.2e}", r0, r1);
    }
    println!();
}

fn main() {
    // Static obstacle dead ahead. Driving straight at it violates both cone
    // halfplanes; the projector picks the nearer one, a minimal sidestep.
    describe(
        "head-on, static obstacle",
        Vec2::ZERO,
        Vec2::new(1.0, 0.0),
        Vec2::ZERO,
        0.25,
        Vec2::new(0.4, 0.0),
    );

    // Crossing traffic shifts the cone apex to the obstacle velocity, so a
    // velocity that is safe against a static disk can become unsafe.
    describe(
        "same geometry, obstacle crossing downward",
        Vec2::ZERO,
        Vec2::new(1.0, 0.0),
        Vec2::new(0.0, -0.3),
        0.25,
        Vec2::new(0.35, -0.25),
    );

    // A velocity already clear of the cone is left untouched.
    describe(
        "lateral pass, already safe",
        Vec2::ZERO,
        Vec2::new(1.0, 0.0),
        Vec2::ZERO,
        0.25,
        Vec2::new(0.0, 0.4),
    );

    // Overlap: the robot center is already within the combined radius, so
    // no tangent lines exist and the cone degenerates. The cone projector
    // refuses such geometry; the planner substitutes the single flee
    // halfplane the degenerate cone carries, which forbids any approach
    // component.
    let cone = build_vo_cone(Vec2::ZERO, Vec2::new(0.1, 0.0), Vec2::ZERO, 0.25).expect("cone");
    assert!(cone.is_degenerate());
    assert!(geopro_vo(Vec2::ZERO, &cone).is_err());
    let v = Vec2::new(0.2, 0.1);
    let safe = project_halfplane(v, &cone.normals()[0]);
    println!("overlap, degenerate flee halfplane");
    println!("  v = ({:.3}, {:.3}) -> ({:.3}, {:.3})", v.x, v.y, safe.x, safe.y);
    assert!(safe.x <= 1e-12, "no residual approach velocity");
}
