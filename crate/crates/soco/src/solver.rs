//! Inner solvers: an L-BFGS minimizer for smooth strongly convex objectives
//! and the two scalar searches the online algorithms are built from
//! (projection onto a sublevel set, and the OBD balance condition).
//!
//! Sublevel projection and the balance search both reduce to one-dimensional
//! bisections over the exact proximal map of the hitting cost, so they work
//! unchanged for the nonsmooth tilted costs.

use crate::costs::{CostKind, HittingCost};
use crate::geometry::Point;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Knobs for the iterative solvers. `Default` is what the rest of the crate
/// uses unless a caller overrides it.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SolveSettings {
    /// Gradient-norm tolerance for smooth minimization.
    pub grad_tol: f64,
    pub max_iters: usize,
    /// Residual tolerance for the scalar bisections.
    pub bisect_tol: f64,
    /// Backtracking shrink factor for the line search.
    pub shrink: f64,
    /// Armijo sufficient-decrease constant.
    pub armijo: f64,
}

impl Default for SolveSettings {
    fn default() -> Self {
        SolveSettings {
            grad_tol: 1e-9,
            max_iters: 100_000,
            bisect_tol: 1e-10,
            shrink: 0.5,
            armijo: 1e-4,
        }
    }
}

/// A smooth objective exposing value and gradient at once.
pub trait Objective {
    fn dim(&self) -> usize;
    fn eval_grad(&self, x: &Point) -> (f64, Point);
}

impl<F> Objective for (usize, F)
where
    F: Fn(&Point) -> (f64, Point),
{
    fn dim(&self) -> usize {
        self.0
    }
    fn eval_grad(&self, x: &Point) -> (f64, Point) {
        (self.1)(x)
    }
}

/// Limited-memory BFGS with Armijo backtracking. Intended for smooth
/// strongly convex objectives; returns the first iterate whose gradient norm
/// is below `grad_tol`.
pub fn minimize_strongly_convex<O: Objective>(
    obj: &O,
    x0: &Point,
    settings: &SolveSettings,
) -> Result<Point> {
    const MEMORY: usize = 10;
    let mut x = x0.clone();
    let (mut fx, mut g) = obj.eval_grad(&x);
    if !fx.is_finite() || !g.is_finite() {
        return Err(Error::NonFiniteObjective);
    }
    let mut s_hist: Vec<Point> = Vec::new();
    let mut y_hist: Vec<Point> = Vec::new();
    let mut rho_hist: Vec<f64> = Vec::new();

    for iter in 0..settings.max_iters {
        let gnorm = g.norm();
        if gnorm <= settings.grad_tol {
            return Ok(x);
        }

        // Two-loop recursion for the search direction.
        let mut q = g.clone();
        let k = s_hist.len();
        let mut alphas = vec![0.0; k];
        for i in (0..k).rev() {
            let a = rho_hist[i] * s_hist[i].dot(&q);
            alphas[i] = a;
            q = q.add_scaled(-a, &y_hist[i]);
        }
        if k > 0 {
            let y = &y_hist[k - 1];
            let gamma = s_hist[k - 1].dot(y) / y.dot(y);
            q = q.scale(gamma);
        }
        for i in 0..k {
            let b = rho_hist[i] * y_hist[i].dot(&q);
            q = q.add_scaled(alphas[i] - b, &s_hist[i]);
        }
        let mut dir = q.scale(-1.0);
        let mut slope = g.dot(&dir);
        if slope >= 0.0 {
            dir = g.scale(-1.0);
            slope = -gnorm * gnorm;
        }

        // Armijo backtracking.
        let mut step = 1.0;
        let mut x_new;
        let mut f_new;
        let mut g_new;
        loop {
            x_new = x.add_scaled(step, &dir);
            let (f, gr) = obj.eval_grad(&x_new);
            f_new = f;
            g_new = gr;
            if f_new.is_finite() && f_new <= fx + settings.armijo * step * slope {
                break;
            }
            step *= settings.shrink;
            if step < 1e-20 {
                // The gradient is as converged as the arithmetic allows.
                if gnorm <= 1e3 * settings.grad_tol {
                    return Ok(x);
                }
                return Err(Error::MaxItersExceeded {
                    iters: iter,
                    residual: gnorm,
                    best: x,
                });
            }
        }

        let s = x_new.sub(&x);
        let y = g_new.sub(&g);
        let sy = s.dot(&y);
        if sy > 1e-18 {
            s_hist.push(s);
            y_hist.push(y);
            rho_hist.push(1.0 / sy);
            if s_hist.len() > MEMORY {
                s_hist.remove(0);
                y_hist.remove(0);
                rho_hist.remove(0);
            }
        }
        x = x_new;
        fx = f_new;
        g = g_new;
    }
    let gnorm = g.norm();
    if gnorm <= settings.grad_tol {
        return Ok(x);
    }
    Err(Error::MaxItersExceeded {
        iters: settings.max_iters,
        residual: gnorm,
        best: x,
    })
}

/// Euclidean projection of `x0` onto the sublevel set `{x : f(x) <= level}`.
///
/// If `f(x0) <= level` the point is returned unchanged. Otherwise the
/// projection is `prox_{f/w}(x0)` for the unique weight `w` at which the prox
/// lands on the level boundary; `w` is found by bisection after bracketing by
/// doubling. The quasiconvex family is handled by clamping onto its sublevel
/// interval directly.
pub fn project_sublevel(
    f: &HittingCost,
    x0: &Point,
    level: f64,
    settings: &SolveSettings,
) -> Result<Point> {
    if level < f.min_value() {
        return Err(Error::LevelBelowMinimum {
            level,
            min_value: f.min_value(),
        });
    }
    if f.eval(x0) <= level {
        return Ok(x0.clone());
    }
    if f.kind() == CostKind::QuasiconvexGrowth {
        return Ok(quasiconvex_sublevel_clamp(f, x0, level));
    }

    let tol = settings.bisect_tol * level.abs().max(1.0);
    // f(prox_w(x0)) increases in w from min_value (w -> 0) to f(x0) (w -> inf).
    let mut lo = 1e-12;
    let mut hi = 1.0;
    while f.eval(&f.prox(hi, x0)) < level {
        hi *= 2.0;
        if hi > 1e30 {
            return Err(Error::OracleNotConverged { residual: level });
        }
    }
    while f.eval(&f.prox(lo, x0)) > level {
        lo *= 0.5;
        if lo < 1e-300 {
            return Err(Error::OracleNotConverged { residual: level });
        }
    }
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..settings.max_iters {
        mid = 0.5 * (lo + hi);
        let val = f.eval(&f.prox(mid, x0));
        // Stop on tolerance or once the bracket has collapsed to machine
        // precision (the prox map is then as exact as the arithmetic allows).
        if (val - level).abs() <= tol || (hi - lo) <= f64::EPSILON * hi {
            return Ok(f.prox(mid, x0));
        }
        if val > level {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let x = f.prox(mid, x0);
    Err(Error::MaxItersExceeded {
        iters: settings.max_iters,
        residual: (f.eval(&x) - level).abs(),
        best: x,
    })
}

/// Sublevel sets of the 1-d quasiconvex cost are intervals; project by
/// clamping the coordinate.
fn quasiconvex_sublevel_clamp(f: &HittingCost, x0: &Point, level: f64) -> Point {
    let m = f.curvature();
    let x = x0.as_scalar();
    let (lo, hi) = if level <= 0.5 * m {
        // Left edge comes from the concave bowl: (m/2)(1-(x+1)^2) = level.
        (-1.0 + (1.0 - 2.0 * level / m).sqrt(), (2.0 * level / m).sqrt())
    } else {
        (-(2.0 * level / m).sqrt(), (2.0 * level / m).sqrt())
    };
    Point::scalar(x.clamp(lo, hi))
}

/// Find the OBD iterate: the level `l` and point `x(l) = proj_{f <= l}(x_prev)`
/// at which movement balances `gamma` times the hitting cost above minimum,
/// `(1/2)||x(l) - x_prev||^2 = gamma (l - min f)`.
///
/// The residual is monotone decreasing in `l`, nonnegative at `l = min f` and
/// negative at `l = f(x_prev)` whenever `x_prev` is outside the minimizer, so
/// bisection applies. Returns `(x, l)`.
pub fn obd_balance_search(
    f: &HittingCost,
    x_prev: &Point,
    gamma: f64,
    settings: &SolveSettings,
) -> Result<(Point, f64)> {
    if gamma <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "balance parameter must be positive, got {gamma}"
        )));
    }
    let min_val = f.min_value();
    let f_prev = f.eval(x_prev);
    let tol = settings.bisect_tol * (1.0 + gamma);
    if f_prev - min_val <= tol {
        return Ok((x_prev.clone(), f_prev.max(min_val)));
    }
    let residual = |l: f64| -> Result<f64> {
        let x = project_sublevel(f, x_prev, l, settings)?;
        Ok(0.5 * x.dist(x_prev).powi(2) - gamma * (l - min_val))
    };
    let mut lo = min_val;
    let mut hi = f_prev;
    for _ in 0..settings.max_iters {
        let mid = 0.5 * (lo + hi);
        let r = residual(mid)?;
        if r.abs() <= tol || (hi - lo) <= settings.bisect_tol * (1.0 + hi.abs()) {
            let x = project_sublevel(f, x_prev, mid, settings)?;
            return Ok((x, mid));
        }
        if r > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::OracleNotConverged {
        residual: hi - lo,
    })
}
