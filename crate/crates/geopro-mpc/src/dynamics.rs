//! Discrete double-integrator model: exact zero-order-hold step, batch
//! rollout, and the O(N) reverse recursion that applies the transposed batch
//! input matrix without ever materializing it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec2;

/// Planar state [p, v] of the robot.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobotState {
    pub p: Vec2,
    pub v: Vec2,
}

impl RobotState {
    pub fn new(p: Vec2, v: Vec2) -> Self {
        RobotState { p, v }
    }

    pub fn at_rest(p: Vec2) -> Self {
        RobotState { p, v: Vec2::ZERO }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.p.x, self.p.y, self.v.x, self.v.y]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        RobotState {
            p: Vec2::new(a[0], a[1]),
            v: Vec2::new(a[2], a[3]),
        }
    }
}

/// Acceleration sequence u_0..u_{N-1} over the horizon.
#[derive(Clone, Debug, PartialEq)]
pub struct ControlSeq(pub Vec<Vec2>);

impl ControlSeq {
    pub fn zeros(n: usize) -> Self {
        ControlSeq(vec![Vec2::ZERO; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Flat [u0x, u0y, u1x, ...] layout used by the inner solver.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * self.0.len());
        for u in &self.0 {
            out.push(u.x);
            out.push(u.y);
        }
        out
    }

    pub fn from_flat(flat: &[f64]) -> Self {
        debug_assert!(flat.len() % 2 == 0);
        ControlSeq(
            flat.chunks_exact(2)
                .map(|c| Vec2::new(c[0], c[1]))
                .collect(),
        )
    }
}

/// Predicted states x_1..x_N (the initial state is excluded).
#[derive(Clone, Debug, PartialEq)]
pub struct StateTraj(pub Vec<RobotState>);

impl StateTraj {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// State at 1-based step k.
    pub fn at_step(&self, k: usize) -> RobotState {
        self.0[k - 1]
    }
}

/// Per-step Jacobians of the discrete dynamics. For the double integrator
/// they are constant:
///   A = [[1,0,dt,0],[0,1,0,dt],[0,0,1,0],[0,0,0,1]]
///   B = [[dt^2/2,0],[0,dt^2/2],[dt,0],[0,dt]]
#[derive(Clone, Debug)]
pub struct BatchLinearization {
    a: Vec<[[f64; 4]; 4]>,
    b: Vec<[[f64; 2]; 4]>,
    pub dt: f64,
}

impl BatchLinearization {
    pub fn double_integrator(n: usize, dt: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidParameter(format!("dt must be > 0, got {dt}")));
        }
        if n == 0 {
            return Err(Error::InvalidParameter("horizon must be >= 1".into()));
        }
        let a = [
            [1.0, 0.0, dt, 0.0],
            [0.0, 1.0, 0.0, dt],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ];
        let h = 0.5 * dt * dt;
        let b = [[h, 0.0], [0.0, h], [dt, 0.0], [0.0, dt]];
        Ok(BatchLinearization {
            a: vec![a; n],
            b: vec![b; n],
            dt,
        })
    }

    pub fn horizon(&self) -> usize {
        self.a.len()
    }

    pub fn a_k(&self, k: usize) -> &[[f64; 4]; 4] {
        &self.a[k]
    }

    pub fn b_k(&self, k: usize) -> &[[f64; 2]; 4] {
        &self.b[k]
    }
}

/// Exact zero-order-hold step of the double integrator.
pub fn step(x: RobotState, u: Vec2, dt: f64) -> Result<RobotState> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidParameter(format!("dt must be > 0, got {dt}")));
    }
    Ok(RobotState {
        p: x.p + x.v * dt + u * (0.5 * dt * dt),
        v: x.v + u * dt,
    })
}

/// Iterated step: returns x_1..x_N.
pub fn rollout(x0: RobotState, controls: &ControlSeq, dt: f64) -> Result<StateTraj> {
    let mut states = Vec::with_capacity(controls.len());
    let mut x = x0;
    for &u in &controls.0 {
        x = step(x, u, dt)?;
        states.push(x);
    }
    Ok(StateTraj(states))
}

/// Applies the transposed batch input matrix to a stacked state-space vector:
/// given omega = [w_0..w_{N-1}] (w_k paired with state x_{k+1}), returns
/// z_k = B_k^T z~_k where z~_{N-1} = w_{N-1} and z~_k = w_k + A_{k+1}^T z~_{k+1}.
/// O(N) matrix-vector products, no dense matrix.
pub fn adjoint_multiply(omega: &[[f64; 4]], lin: &BatchLinearization) -> Result<Vec<[f64; 2]>> {
    let n = lin.horizon();
    if omega.len() != n {
        return Err(Error::InvalidParameter(format!(
            "omega length {} does not match horizon {}",
            omega.len(),
            n
        )));
    }
    let mut z = vec![[0.0f64; 2]; n];
    let mut carry = omega[n - 1];
    z[n - 1] = bt_vec(lin.b_k(n - 1), &carry);
    for k in (0..n - 1).rev() {
        let pulled = at_vec(lin.a_k(k + 1), &carry);
        carry = [
            omega[k][0] + pulled[0],
            omega[k][1] + pulled[1],
            omega[k][2] + pulled[2],
            omega[k][3] + pulled[3],
        ];
        z[k] = bt_vec(lin.b_k(k), &carry);
    }
    Ok(z)
}

fn at_vec(a: &[[f64; 4]; 4], v: &[f64; 4]) -> [f64; 4] {
    let mut out = [0.0; 4];
    for (i, row) in a.iter().enumerate() {
        for (j, o) in out.iter_mut().enumerate() {
            *o += row[j] * v[i];
        }
    }
    out
}

fn bt_vec(b: &[[f64; 2]; 4], v: &[f64; 4]) -> [f64; 2] {
    let mut out = [0.0; 2];
    for (i, row) in b.iter().enumerate() {
        for (j, o) in out.iter_mut().enumerate() {
            *o += row[j] * v[i];
        }
    }
    out
}
