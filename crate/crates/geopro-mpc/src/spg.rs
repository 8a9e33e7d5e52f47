//! Spectral projected gradient solver over a projectable feasible set.
//!
//! Barzilai-Borwein spectral steps with a nonmonotone (windowed) Armijo line
//! search and safeguarded quadratic interpolation backtracking, per Birgin,
//! Martinez and Raydan's SPG method. Operates on flat coefficient vectors;
//! the caller adapts control sequences.

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct SPGConfig {
    pub max_iters: usize,
    /// Spectral step clamps.
    pub alpha_min: f64,
    pub alpha_max: f64,
    /// Nonmonotone window length (number of recent objective values the
    /// Armijo reference maximizes over).
    pub memory_m: usize,
    /// Sufficient-decrease coefficient.
    pub gamma: f64,
    /// Backtracking safeguards: the interpolated step is accepted only inside
    /// [sigma1 * kappa, sigma2 * kappa], otherwise the step halves.
    pub sigma1: f64,
    pub sigma2: f64,
    /// Projected-gradient stationarity tolerance (inf-norm of the unit-step
    /// projected gradient residual).
    pub tol: f64,
}

impl Default for SPGConfig {
    fn default() -> Self {
        SPGConfig {
            max_iters: 100,
            alpha_min: 1e-10,
            alpha_max: 1e10,
            memory_m: 10,
            gamma: 1e-4,
            sigma1: 0.1,
            sigma2: 0.9,
            tol: 1e-6,
        }
    }
}

impl SPGConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha_min > 0.0 && self.alpha_min < self.alpha_max) {
            return Err(Error::InvalidParameter(
                "spg: need 0 < alpha_min < alpha_max".into(),
            ));
        }
        if self.memory_m < 1 {
            return Err(Error::InvalidParameter("spg: memory_m must be >= 1".into()));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::InvalidParameter("spg: need 0 < gamma < 1".into()));
        }
        if !(self.sigma1 > 0.0 && self.sigma1 < self.sigma2 && self.sigma2 < 1.0) {
            return Err(Error::InvalidParameter(
                "spg: need 0 < sigma1 < sigma2 < 1".into(),
            ));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter("spg: tol must be > 0".into()));
        }
        Ok(())
    }
}

/// One accepted iteration, recorded so the line-search and step-clamp
/// invariants stay externally checkable.
#[derive(Clone, Copy, Debug)]
pub struct SpgIterRecord {
    /// Objective after the step.
    pub f_new: f64,
    /// Nonmonotone reference value (max over the window before the step).
    pub f_ref: f64,
    /// Directional derivative g.d of the accepted search direction.
    pub dir_deriv: f64,
    /// Accepted line-search step fraction.
    pub kappa: f64,
    /// Spectral step length used to form the direction.
    pub alpha: f64,
}

#[derive(Clone, Debug, Default)]
pub struct SpgStats {
    pub iterations: usize,
    pub f_evals: usize,
    /// inf-norm of project(U - grad) - U at the returned iterate.
    pub final_stationarity: f64,
    pub best_f: f64,
    /// True when the stationarity tolerance was met within the budget.
    pub converged: bool,
    /// True when the line search could not make progress (step underflow).
    pub stalled: bool,
    pub history: Vec<SpgIterRecord>,
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_finite(f: f64, g: &[f64], x: &[f64], context: &str) -> Result<()> {
    if !f.is_finite() || g.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalFailure {
            context: format!("{context}: non-finite objective or gradient"),
            iterate: x.to_vec(),
        });
    }
    Ok(())
}

/// Minimizes `objective` over the feasible set defined by `project`.
///
/// Every iterate passes through `project`, so with an idempotent projection
/// the whole iterate sequence is feasible exactly. Returns the best iterate
/// seen (which is never worse than the projected start point).
pub fn spg_minimize<F, P>(
    mut objective: F,
    project: P,
    u_init: &[f64],
    cfg: &SPGConfig,
) -> Result<(Vec<f64>, SpgStats)>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
    P: Fn(&[f64]) -> Vec<f64>,
{
    cfg.validate()?;
    if u_init.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(
            "spg: initial point must be finite".into(),
        ));
    }

    let mut stats = SpgStats::default();
    let mut x = project(u_init);
    let (mut f, mut g) = objective(&x)?;
    stats.f_evals += 1;
    check_finite(f, &g, &x, "spg initial point")?;

    let mut best_x = x.clone();
    let mut best_f = f;
    let mut best_g = g.clone();

    // Recent objective values for the nonmonotone Armijo reference.
    let mut window = std::collections::VecDeque::with_capacity(cfg.memory_m);
    window.push_back(f);

    let g0_inf = inf_norm(&g);
    let mut alpha = if g0_inf > 0.0 {
        (1.0 / g0_inf).clamp(cfg.alpha_min, cfg.alpha_max)
    } else {
        cfg.alpha_max
    };

    let mut scratch = vec![0.0f64; x.len()];
    loop {
        // Unit-step projected gradient residual is the stationarity measure.
        for (s, (xi, gi)) in scratch.iter_mut().zip(x.iter().zip(&g)) {
            *s = xi - gi;
        }
        let pg = project(&scratch);
        let stat = pg
            .iter()
            .zip(&x)
            .fold(0.0f64, |m, (p, xi)| m.max((p - xi).abs()));
        if stat <= cfg.tol {
            stats.converged = true;
            break;
        }
        if stats.iterations >= cfg.max_iters {
            break;
        }

        // Spectral search direction.
        for (s, (xi, gi)) in scratch.iter_mut().zip(x.iter().zip(&g)) {
            *s = xi - alpha * gi;
        }
        let target = project(&scratch);
        let d: Vec<f64> = target.iter().zip(&x).map(|(t, xi)| t - xi).collect();
        if inf_norm(&d) == 0.0 {
            stats.converged = stat <= cfg.tol;
            break;
        }
        let dir_deriv = dot(&g, &d);
        let f_ref = window.iter().cloned().fold(f64::NEG_INFINITY, f64::max);

        // Nonmonotone Armijo with safeguarded quadratic backtracking.
        let mut kappa = 1.0f64;
        let accepted = loop {
            for (s, (xi, di)) in scratch.iter_mut().zip(x.iter().zip(&d)) {
                *s = xi + kappa * di;
            }
            let x_new = project(&scratch);
            let (f_new, g_new) = objective(&x_new)?;
            stats.f_evals += 1;
            check_finite(f_new, &g_new, &x_new, "spg line search")?;
            if f_new <= f_ref + cfg.gamma * kappa * dir_deriv {
                break Some((x_new, f_new, g_new));
            }
            // Minimizer of the quadratic through f, dir_deriv and f_new.
            let denom = f_new - f - kappa * dir_deriv;
            let kappa_q = if denom != 0.0 {
                -0.5 * kappa * kappa * dir_deriv / denom
            } else {
                f64::NAN
            };
            kappa = if kappa_q.is_finite()
                && kappa_q >= cfg.sigma1 * kappa
                && kappa_q <= cfg.sigma2 * kappa
            {
                kappa_q
            } else {
                0.5 * kappa
            };
            if kappa < 1e-16 {
                break None;
            }
        };
        let Some((x_new, f_new, g_new)) = accepted else {
            stats.stalled = true;
            break;
        };

        // Barzilai-Borwein update for the next spectral step.
        let s_ty: f64 = x_new
            .iter()
            .zip(&x)
            .zip(g_new.iter().zip(&g))
            .map(|((xn, xo), (gn, go))| (xn - xo) * (gn - go))
            .sum();
        let s_ts: f64 = x_new
            .iter()
            .zip(&x)
            .map(|(xn, xo)| (xn - xo) * (xn - xo))
            .sum();
        let alpha_used = alpha;
        alpha = if s_ty <= 0.0 {
            cfg.alpha_max
        } else {
            (s_ts / s_ty).clamp(cfg.alpha_min, cfg.alpha_max)
        };

        x = x_new;
        f = f_new;
        g = g_new;
        if window.len() == cfg.memory_m {
            window.pop_front();
        }
        window.push_back(f);
        stats.iterations += 1;
        stats.history.push(SpgIterRecord {
            f_new: f,
            f_ref,
            dir_deriv,
            kappa,
            alpha: alpha_used,
        });
        if f < best_f {
            best_f = f;
            best_x.copy_from_slice(&x);
            best_g.copy_from_slice(&g);
        }
    }

    // Stationarity reported at the returned (best) iterate.
    for (s, (xi, gi)) in scratch.iter_mut().zip(best_x.iter().zip(&best_g)) {
        *s = xi - gi;
    }
    let pg = project(&scratch);
    stats.final_stationarity = pg
        .iter()
        .zip(&best_x)
        .fold(0.0f64, |m, (p, xi)| m.max((p - xi).abs()));
    stats.best_f = best_f;
    Ok((best_x, stats))
}

/// Componentwise clamp of a flat vector to per-component bounds repeated from
/// a symmetric limit: the control-box projector for `[-limit, limit]^n`.
pub fn clamp_symmetric(v: &[f64], limit: f64) -> Vec<f64> {
    v.iter().map(|x| x.clamp(-limit, limit)).collect()
}
