//! Shared oracles and instance builders for the integration tests.
//!
//! Everything here is written from the defining geometry or algebra rather
//! than by calling back into the code under test: collision-course
//! membership via the ray-vs-disk quadratic, nearest-boundary distance via
//! grid search over the tangent rays, the condensed adjoint via an explicit
//! dense sensitivity matrix, and box quadratics via exhaustive active-set
//! enumeration.
#![allow(dead_code)]

use std::f64::consts::{FRAC_PI_2, TAU};
use std::path::PathBuf;

use geopro_mpc::alspg::ConstraintBlock;
use geopro_mpc::dynamics::{rollout, BatchLinearization, ControlSeq, RobotState};
use geopro_mpc::geometry::{rotate, Box2, Disk, Vec2};
use geopro_mpc::planner::{build_blocks, AvoidanceScheme, MovingObstacle, NMPCProblem};
use geopro_mpc::projectors::{build_vo_cone, ProjectorSpec, VOCone};
use rand::Rng;

pub fn scenario_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("scenarios")
        .join(format!("{name}.json"))
}

/// Prints the single verdict line for one acceptance criterion and panics
/// when any violation was collected.
pub fn report(num: u32, label: &str, violations: &[String]) {
    if violations.is_empty() {
        println!("[PASS] criterion {num}: {label}");
    } else {
        println!("[FAIL] criterion {num}: {label}");
        for v in violations.iter().take(10) {
            println!("  - {v}");
        }
        panic!(
            "criterion {num} failed with {} violation(s)",
            violations.len()
        );
    }
}

/// Collision-course membership straight from the definition: does the
/// relative-velocity ray {t (v - v_obs) : t >= 0} meet the disk of radius
/// r_sum centered at the robot-to-obstacle offset d?
pub fn ray_hits_inflated_disk(v: Vec2, v_obs: Vec2, d: Vec2, r_sum: f64) -> bool {
    if d.norm() <= r_sum {
        return true;
    }
    let rel = v - v_obs;
    let a = rel.norm_sq();
    if a == 0.0 {
        return false;
    }
    // |t rel - d|^2 = r_sum^2  =>  a t^2 - 2 (rel . d) t + (|d|^2 - r_sum^2) = 0
    let b = rel.dot(d);
    let c = d.norm_sq() - r_sum * r_sum;
    let disc = b * b - a * c;
    disc >= 0.0 && b + disc.sqrt() >= 0.0
}

/// Distance from v to the cone boundary by sampling both tangent rays on a
/// two-stage grid with `fine` spacing in the refined stage. The rays are
/// straight, so the sampled minimum is accurate to within one fine step.
pub fn boundary_distance_grid(cone: &VOCone, v: Vec2, fine: f64) -> f64 {
    let apex = cone.apex();
    // Tangent directions recovered by undoing each normal's quarter turn.
    let dirs = [
        rotate(cone.normals()[0].normal(), -FRAC_PI_2),
        rotate(cone.normals()[1].normal(), FRAC_PI_2),
    ];
    let t_max = (v - apex).norm() + 1.0;
    let mut best = v.dist(apex);
    for dir in dirs {
        let coarse = (t_max / 256.0).max(fine);
        let steps = (t_max / coarse).ceil() as usize;
        let mut best_t = 0.0;
        let mut best_d = f64::INFINITY;
        for i in 0..=steps {
            let t = i as f64 * coarse;
            let d = v.dist(apex + dir * t);
            if d < best_d {
                best_d = d;
                best_t = t;
            }
        }
        let lo = (best_t - 2.0 * coarse).max(0.0);
        let hi = (best_t + 2.0 * coarse).min(t_max);
        let fine_steps = ((hi - lo) / fine).ceil() as usize;
        for i in 0..=fine_steps {
            let t = lo + i as f64 * fine;
            best_d = best_d.min(v.dist(apex + dir * t));
        }
        best = best.min(best_d);
    }
    best
}

fn mat4_apply42(a: &[[f64; 4]; 4], b: &[[f64; 2]; 4]) -> [[f64; 2]; 4] {
    let mut out = [[0.0; 2]; 4];
    for (row, out_row) in out.iter_mut().enumerate() {
        for col in 0..2 {
            let mut s = 0.0;
            for (k, b_row) in b.iter().enumerate() {
                s += a[row][k] * b_row[col];
            }
            out_row[col] = s;
        }
    }
    out
}

/// Dense condensed-batch transpose: the sensitivity of every horizon state
/// to every control, built explicitly from the per-step Jacobians, then
/// multiplied against omega blockwise.
pub fn dense_adjoint(omega: &[[f64; 4]], lin: &BatchLinearization) -> Vec<[f64; 2]> {
    let n = lin.horizon();
    assert_eq!(omega.len(), n, "omega must carry one 4-slot per state");
    let mut out = vec![[0.0; 2]; n];
    for j in 0..n {
        // phi = d x_m / d u_j, advanced from m = j + 1 to m = n.
        let mut phi = *lin.b_k(j);
        for m in (j + 1)..=n {
            if m > j + 1 {
                phi = mat4_apply42(lin.a_k(m - 1), &phi);
            }
            let w = omega[m - 1];
            for col in 0..2 {
                let mut s = 0.0;
                for (row, w_r) in w.iter().enumerate() {
                    s += phi[row][col] * w_r;
                }
                out[j][col] += s;
            }
        }
    }
    out
}

/// Convex box-constrained quadratic: 0.5 x'Hx + q'x over [lo, hi].
pub struct BoxQp {
    pub h: Vec<Vec<f64>>,
    pub q: Vec<f64>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxQp {
    pub fn value(&self, x: &[f64]) -> f64 {
        let n = self.q.len();
        let mut v = 0.0;
        for i in 0..n {
            v += self.q[i] * x[i];
            for j in 0..n {
                v += 0.5 * x[i] * self.h[i][j] * x[j];
            }
        }
        v
    }

    pub fn grad(&self, x: &[f64]) -> Vec<f64> {
        let n = self.q.len();
        (0..n)
            .map(|i| self.q[i] + (0..n).map(|j| self.h[i][j] * x[j]).sum::<f64>())
            .collect()
    }
}

pub fn random_box_qp<R: Rng>(rng: &mut R, n: usize) -> BoxQp {
    // H = M'M + 0.5 I keeps the Hessian comfortably positive definite.
    let m: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let mut h = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            let s: f64 = (0..n).map(|k| m[k][i] * m[k][j]).sum();
            h[i][j] = s + if i == j { 0.5 } else { 0.0 };
        }
    }
    let q = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let mut lo = Vec::with_capacity(n);
    let mut hi = Vec::with_capacity(n);
    for _ in 0..n {
        let a = rng.gen_range(-1.5..0.5);
        lo.push(a);
        hi.push(a + rng.gen_range(0.2..2.0));
    }
    BoxQp { h, q, lo, hi }
}

/// Gaussian elimination with partial pivoting; panics on singular systems,
/// which a positive definite principal submatrix never produces.
fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        assert!(a[pivot][col].abs() > 1e-12, "singular reduced system");
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in (col + 1)..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = ((row + 1)..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// Exhaustive active-set solve: every {free, at-lower, at-upper} assignment
/// is checked for primal bounds on the free block and multiplier signs on
/// the active one. The SPD Hessian makes the satisfying point the unique
/// minimizer.
pub fn active_set_solve(qp: &BoxQp) -> Vec<f64> {
    let n = qp.q.len();
    let combos = 3usize.pow(n as u32);
    for code in 0..combos {
        let mut kind = vec![0u8; n];
        let mut c = code;
        for k in kind.iter_mut() {
            *k = (c % 3) as u8;
            c /= 3;
        }
        let free: Vec<usize> = (0..n).filter(|&i| kind[i] == 0).collect();
        let mut x = vec![0.0; n];
        for i in 0..n {
            x[i] = match kind[i] {
                1 => qp.lo[i],
                2 => qp.hi[i],
                _ => 0.0,
            };
        }
        if !free.is_empty() {
            let k = free.len();
            let mut a = vec![vec![0.0; k]; k];
            let mut b = vec![0.0; k];
            for (r, &i) in free.iter().enumerate() {
                for (cc, &j) in free.iter().enumerate() {
                    a[r][cc] = qp.h[i][j];
                }
                let mut rhs = -qp.q[i];
                for j in 0..n {
                    if kind[j] != 0 {
                        rhs -= qp.h[i][j] * x[j];
                    }
                }
                b[r] = rhs;
            }
            let sol = gauss_solve(a, b);
            for (r, &i) in free.iter().enumerate() {
                x[i] = sol[r];
            }
        }
        if free
            .iter()
            .any(|&i| x[i] < qp.lo[i] - 1e-9 || x[i] > qp.hi[i] + 1e-9)
        {
            continue;
        }
        let g = qp.grad(&x);
        let duals_ok = (0..n).all(|i| match kind[i] {
            1 => g[i] >= -1e-9,
            2 => g[i] <= 1e-9,
            _ => true,
        });
        if duals_ok {
            return x;
        }
    }
    panic!("active-set enumeration found no KKT point");
}

/// A randomized constrained instance frozen for finite-difference checks:
/// the blocks keep whatever multipliers and penalties were drawn for them.
pub struct FdInstance {
    pub problem: NMPCProblem,
    pub controls: ControlSeq,
    pub blocks: Vec<ConstraintBlock>,
}

/// Margin of the shifted target to the nearest nondifferentiability of its
/// projector. The penalty gradient identity holds away from these sets, so
/// finite differences are only trusted at a positive margin.
fn kink_margin(spec: &ProjectorSpec, y: Vec2) -> f64 {
    match spec {
        ProjectorSpec::Halfplane(h) => h.residual(y).abs(),
        ProjectorSpec::VelocityCone(c) => {
            let r0 = c.normals()[0].residual(y);
            let r1 = c.normals()[1].residual(y);
            let mut m = r0.abs().min(r1.abs()).min(y.dist(c.apex()));
            if r0 < 0.0 && r1 < 0.0 {
                // Switching surface between the two projection targets.
                m = m.min((r0 - r1).abs());
            }
            m
        }
        ProjectorSpec::EuclideanDistance { obs, r_robot } => {
            let d = y.dist(obs.center);
            (d - (obs.radius + r_robot)).abs().min(d)
        }
        ProjectorSpec::StateBox(b) => {
            let (lo, hi) = (b.lower(), b.upper());
            (y.x - lo.x)
                .abs()
                .min((y.x - hi.x).abs())
                .min((y.y - lo.y).abs())
                .min((y.y - hi.y).abs())
        }
    }
}

/// Draws a random mixed-block instance, or None when any shifted target sits
/// within 1e-4 of a projector kink and the draw must be retried.
pub fn random_fd_instance<R: Rng>(rng: &mut R) -> Option<FdInstance> {
    let n = rng.gen_range(2..=6);
    let dt = 0.05;
    let x0 = RobotState::new(
        Vec2::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)),
        Vec2::new(rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3)),
    );
    let goal = Vec2::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5));
    let obstacles = (0..rng.gen_range(1..=2))
        .map(|_| {
            let ang = rng.gen_range(0.0..TAU);
            let dist = rng.gen_range(0.35..1.0);
            MovingObstacle {
                disk: Disk::new(
                    x0.p + rotate(Vec2::new(dist, 0.0), ang),
                    rng.gen_range(0.05..0.15),
                )
                .expect("positive radius"),
                velocity: Vec2::new(rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3)),
            }
        })
        .collect();
    let problem = NMPCProblem {
        x0,
        goal,
        horizon_n: n,
        dt,
        q_p: 10.0,
        r_u: 0.1,
        obstacles,
        v_box: Box2::symmetric(0.4).expect("valid box"),
        a_box: Box2::symmetric(1.0).expect("valid box"),
        d_s: 0.03,
        robot_r: 0.1,
    };
    let controls = ControlSeq(
        (0..n)
            .map(|_| Vec2::new(rng.gen_range(-0.8..0.8), rng.gen_range(-0.8..0.8)))
            .collect(),
    );
    let scheme = if rng.gen_bool(0.5) {
        AvoidanceScheme::VelocityCone
    } else {
        AvoidanceScheme::ClearanceDisk
    };
    let traj = rollout(x0, &controls, dt).ok()?;
    let mut blocks = build_blocks(&problem, &traj, scheme).ok()?;
    for b in &mut blocks {
        b.lambda = Vec2::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
        b.rho = [0.1, 1.0, 10.0][rng.gen_range(0..3)];
    }
    for b in &blocks {
        let g = b.selector.extract(&traj).ok()?;
        let y = g + b.lambda * (1.0 / b.rho);
        if kink_margin(&b.projector, y) < 1e-4 {
            return None;
        }
    }
    Some(FdInstance {
        problem,
        controls,
        blocks,
    })
}

/// Single-obstacle horizon-2 instance whose at-rest start is strictly
/// outside both step cones, so the zero warm start is feasible for any
/// solver and feasibility of the instance is guaranteed by construction.
pub fn random_oracle_instance<R: Rng>(rng: &mut R) -> NMPCProblem {
    loop {
        let center = rotate(
            Vec2::new(rng.gen_range(0.45..0.9), 0.0),
            rng.gen_range(0.0..TAU),
        );
        let velocity = rotate(
            Vec2::new(rng.gen_range(0.0..0.15), 0.0),
            rng.gen_range(0.0..TAU),
        );
        let goal = rotate(
            Vec2::new(rng.gen_range(0.6..1.2), 0.0),
            rng.gen_range(0.0..TAU),
        );
        let obstacle = MovingObstacle {
            disk: Disk::new(center, rng.gen_range(0.08..0.12)).expect("positive radius"),
            velocity,
        };
        let problem = NMPCProblem {
            x0: RobotState::at_rest(Vec2::ZERO),
            goal,
            horizon_n: 2,
            dt: 0.05,
            q_p: 10.0,
            r_u: 0.1,
            obstacles: vec![obstacle],
            v_box: Box2::symmetric(0.4).expect("valid box"),
            a_box: Box2::symmetric(1.0).expect("valid box"),
            d_s: 0.03,
            robot_r: 0.1,
        };
        let ob = &problem.obstacles[0];
        let r_sum = problem.combined_radius(ob);
        let rest_is_safe = (1..=2).all(|k| {
            let c = ob.predicted_center(k, problem.dt);
            match build_vo_cone(Vec2::ZERO, c, ob.velocity, r_sum) {
                Ok(cone) => {
                    !cone.is_degenerate()
                        && cone
                            .normals()
                            .iter()
                            .any(|h| h.residual(Vec2::ZERO) >= 1e-3)
                }
                Err(_) => false,
            }
        });
        if rest_is_safe {
            return problem;
        }
    }
}
