//! Geometric projectors: the velocity-cone projector (GeoPro-VO), the
//! Euclidean-distance disk projector (GeoPro-ED), and box/halfspace
//! projectors, behind one dispatch type consumed by the constrained solver.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    project_box, project_halfplane, rotate, Box2, Disk, Hyperplane, Vec2,
};

/// Velocity-obstacle cone in velocity space. The apex sits at the obstacle's
/// velocity; a velocity `v` is inside (collision-bound) iff it satisfies both
/// `N_m . v <= c_m`. Safe velocities satisfy at least one `N_m . v >= c_m`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct VOCone {
    apex: Vec2,
    normals: [Hyperplane; 2],
    degenerate: bool,
    dist: f64,
    r_sum: f64,
}

impl VOCone {
    pub fn apex(&self) -> Vec2 {
        self.apex
    }

    /// Outward unit normals with offsets, index 0 for the upper tangent
    /// (counterclockwise of the axis), index 1 for the lower. For a
    /// degenerate cone both slots hold the flee halfplane.
    pub fn normals(&self) -> &[Hyperplane; 2] {
        &self.normals
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// Closed-cone membership: both linear inequalities `N_m . v <= c_m`.
    pub fn contains(&self, v: Vec2) -> bool {
        self.normals[0].residual(v) <= 0.0 && self.normals[1].residual(v) <= 0.0
    }
}

/// Halfspace pushing the relative velocity away from the obstacle; the
/// stand-in constraint when the cone construction has no solution because the
/// centers already overlap. Coincident centers push along +x.
pub fn flee_halfplane(p_robot: Vec2, p_obs: Vec2, v_obs: Vec2) -> Result<Hyperplane> {
    let away = p_robot - p_obs;
    let n = if away.norm() == 0.0 {
        Vec2::new(1.0, 0.0)
    } else {
        away.normalized()?
    };
    Hyperplane::new(n, n.dot(v_obs))
}

/// Builds the velocity-obstacle cone for a robot at `p_robot` against an
/// obstacle disk of combined radius `r_sum` centered at `p_obs` moving with
/// `v_obs`. The cone axis points from the robot toward the obstacle; the
/// half-angle is `asin(r_sum / D)`. When the centers are within `r_sum` the
/// cone is degenerate and carries the flee halfplane instead.
pub fn build_vo_cone(p_robot: Vec2, p_obs: Vec2, v_obs: Vec2, r_sum: f64) -> Result<VOCone> {
    if !(r_sum > 0.0) || !r_sum.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "cone combined radius must be > 0, got {r_sum}"
        )));
    }
    let d = p_obs - p_robot;
    let dist = d.norm();
    if dist <= r_sum {
        let flee = flee_halfplane(p_robot, p_obs, v_obs)?;
        return Ok(VOCone {
            apex: v_obs,
            normals: [flee, flee],
            degenerate: true,
            dist,
            r_sum,
        });
    }
    let beta = (r_sum / dist).asin();
    let t1 = rotate(d, beta);
    let t2 = rotate(d, -beta);
    // Outward normals: +pi/2 off the upper tangent, -pi/2 off the lower, so
    // that interior velocities violate both halfspaces.
    let n1 = rotate(t1, std::f64::consts::FRAC_PI_2).normalized()?;
    let n2 = rotate(t2, -std::f64::consts::FRAC_PI_2).normalized()?;
    Ok(VOCone {
        apex: v_obs,
        normals: [
            Hyperplane::new(n1, n1.dot(v_obs))?,
            Hyperplane::new(n2, n2.dot(v_obs))?,
        ],
        degenerate: false,
        dist,
        r_sum,
    })
}

/// Velocity-cone projector: identity for safe velocities, otherwise the
/// nearest of the two boundary hyperplanes (smaller residual; ties pick the
/// upper one). The result is never strictly inside the cone.
pub fn geopro_vo(v: Vec2, cone: &VOCone) -> Result<Vec2> {
    if cone.degenerate {
        return Err(Error::DegenerateCone {
            dist: cone.dist,
            r_sum: cone.r_sum,
        });
    }
    let r1 = cone.normals[0].residual(v);
    let r2 = cone.normals[1].residual(v);
    if r1 >= 0.0 || r2 >= 0.0 {
        return Ok(v);
    }
    // Both violated; residual magnitudes are the hyperplane distances since
    // the normals are unit.
    let h = if -r1 <= -r2 {
        &cone.normals[0]
    } else {
        &cone.normals[1]
    };
    Ok(project_halfplane(v, h))
}

/// Euclidean-distance projector: pushes a position out of the disk inflated
/// by the robot radius, radially. A position exactly on the center is pushed
/// along +x.
pub fn geopro_ed(p: Vec2, obs: &Disk, r_robot: f64) -> Vec2 {
    let r_total = r_robot + obs.radius;
    let d = p - obs.center;
    let dist = d.norm();
    if dist >= r_total {
        return p;
    }
    if dist == 0.0 {
        return obs.center + Vec2::new(r_total, 0.0);
    }
    p + d * ((r_total - dist) / dist)
}

/// One constraint's projector and its parameters: the dispatch point for the
/// solver's per-block projections.
#[derive(Clone, Debug)]
pub enum ProjectorSpec {
    VelocityCone(VOCone),
    EuclideanDistance { obs: Disk, r_robot: f64 },
    StateBox(Box2),
    /// Single halfspace: the degenerate-cone flee fallback, and the
    /// enumeration oracle's per-disjunct constraint.
    Halfplane(Hyperplane),
}

pub fn apply_projector(spec: &ProjectorSpec, value: Vec2) -> Result<Vec2> {
    match spec {
        ProjectorSpec::VelocityCone(cone) => geopro_vo(value, cone),
        ProjectorSpec::EuclideanDistance { obs, r_robot } => Ok(geopro_ed(value, obs, *r_robot)),
        ProjectorSpec::StateBox(b) => Ok(project_box(value, b)),
        ProjectorSpec::Halfplane(h) => Ok(project_halfplane(value, h)),
    }
}
