//! The online algorithms: OBD, Greedy OBD, Regularized OBD, and two
//! baselines, plus the closed-form parameter and bound calculators and the
//! game loop that plays an algorithm against an instance.

use crate::adversaries::Instance;
use crate::costs::HittingCost;
use crate::geometry::{Domain, MovementCost, Point};
use crate::solver::{obd_balance_search, SolveSettings};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Which online algorithm to run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Algorithm {
    /// Online Balanced Descent with balance parameter `gamma`.
    Obd { gamma: f64 },
    /// Greedy OBD: an OBD step blended toward the minimizer with weight
    /// `mu * sqrt(m)`, where `m` is the instance's declared growth constant.
    Gobd { gamma: f64, mu: f64 },
    /// Regularized OBD: per-round minimization of
    /// `f + lambda1 c(., x_prev) + lambda2 c(., v)`.
    Robd { lambda1: f64, lambda2: f64 },
    /// Never moves from `x0`.
    StayPut,
    /// Jumps to each round's minimizer.
    FollowMinimizer,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct AlgoConfig {
    pub which: Algorithm,
    pub solve: SolveSettings,
}

impl AlgoConfig {
    pub fn new(which: Algorithm) -> Result<Self> {
        let cfg = AlgoConfig {
            which,
            solve: SolveSettings::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        match self.which {
            Algorithm::Obd { gamma } if gamma <= 0.0 => Err(Error::InvalidParameter(format!(
                "obd gamma must be positive, got {gamma}"
            ))),
            Algorithm::Gobd { gamma, mu } if gamma <= 0.0 || mu <= 0.0 => {
                Err(Error::InvalidParameter(format!(
                    "gobd needs gamma > 0 and mu > 0, got gamma={gamma}, mu={mu}"
                )))
            }
            Algorithm::Robd { lambda1, lambda2 }
                if !(0.0..=1.0).contains(&lambda1) || lambda1 == 0.0 || lambda2 < 0.0 =>
            {
                Err(Error::InvalidParameter(format!(
                    "robd needs 0 < lambda1 <= 1 and lambda2 >= 0, got \
                     lambda1={lambda1}, lambda2={lambda2}"
                )))
            }
            _ => Ok(()),
        }
    }
}

/// One full play-out of an algorithm on an instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunResult {
    /// `x_0 .. x_T`.
    pub trajectory: Vec<Point>,
    /// `f_t(x_t)` for `t = 1..T`.
    pub hit: Vec<f64>,
    /// `c(x_t, x_{t-1})` for `t = 1..T`.
    pub mv: Vec<f64>,
    pub total: f64,
}

impl RunResult {
    pub fn horizon(&self) -> usize {
        self.hit.len()
    }
}

/// Algorithm 1 step: project `x_prev` onto the level set at which movement
/// balances `gamma` times the hitting cost above its minimum.
pub fn obd_step(
    f: &HittingCost,
    x_prev: &Point,
    gamma: f64,
    s: &SolveSettings,
) -> Result<Point> {
    Ok(obd_balance_search(f, x_prev, gamma, s)?.0)
}

/// Algorithm 2 step. `m` is the declared quadratic-growth constant of the
/// round's cost (the instance-level constant, not necessarily the cost's own
/// curvature field).
pub fn gobd_step(
    f: &HittingCost,
    x_prev: &Point,
    gamma: f64,
    mu: f64,
    m: f64,
    s: &SolveSettings,
) -> Result<Point> {
    if m < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "growth constant must be nonnegative, got {m}"
        )));
    }
    let v = f.minimizer();
    let w = mu * m.sqrt();
    if w >= 1.0 {
        return Ok(v);
    }
    let x_obd = obd_step(f, x_prev, gamma, s)?;
    Ok(x_obd.lerp(w, &v))
}

/// Algorithm 3 step: `argmin_x f(x) + lambda1 c(x, x_prev) + lambda2 c(x, v)`.
pub fn robd_step(
    f: &HittingCost,
    x_prev: &Point,
    lambda1: f64,
    lambda2: f64,
    movement: &MovementCost,
    s: &SolveSettings,
) -> Result<Point> {
    if lambda1 <= 0.0 || lambda2 < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "robd needs lambda1 > 0 and lambda2 >= 0, got {lambda1}, {lambda2}"
        )));
    }
    let v = f.minimizer();
    if movement.potential.is_squared_l2() {
        // The regularizers merge into a single quadratic anchor, so the
        // step is one exact prox.
        let w = lambda1 + lambda2;
        let anchor = x_prev
            .scale(lambda1 / w)
            .add_scaled(lambda2 / w, &v);
        return Ok(f.prox(w, &anchor));
    }
    robd_step_floored_simplex(f, x_prev, lambda1, lambda2, movement, s)
}

/// Projected gradient descent for the negative-entropy movement cost on the
/// floored simplex.
fn robd_step_floored_simplex(
    f: &HittingCost,
    x_prev: &Point,
    lambda1: f64,
    lambda2: f64,
    movement: &MovementCost,
    s: &SolveSettings,
) -> Result<Point> {
    let pot = &movement.potential;
    let delta = match pot.domain {
        Domain::FlooredSimplex { delta } => delta,
        Domain::AllOfRd => unreachable!("l2 handled by the prox branch"),
    };
    let v = f.minimizer();
    for (name, p) in [("x_prev", x_prev), ("minimizer", &v)] {
        if !pot.contains(p) {
            return Err(Error::DomainViolation(format!(
                "{name} lies outside the floored simplex"
            )));
        }
    }
    let g_prev = pot.grad(x_prev);
    let g_v = pot.grad(&v);
    let grad = |x: &Point| -> Point {
        let gh = pot.grad(x);
        f.grad(x)
            .add_scaled(lambda1, &gh.sub(&g_prev))
            .add_scaled(lambda2, &gh.sub(&g_v))
    };
    // Smoothness of the composite on the domain.
    let lip = f.curvature() + (lambda1 + lambda2) * pot.beta;
    let step = 1.0 / lip;
    let mut x = project_floored_simplex(x_prev, delta);
    for _ in 0..s.max_iters {
        let g = grad(&x);
        if kkt_residual(&x, &g, delta) <= s.grad_tol {
            return Ok(x);
        }
        x = project_floored_simplex(&x.add_scaled(-step, &g), delta);
    }
    let g = grad(&x);
    let res = kkt_residual(&x, &g, delta);
    if res <= 10.0 * s.grad_tol {
        return Ok(x);
    }
    Err(Error::MaxItersExceeded {
        iters: s.max_iters,
        residual: res,
        best: x,
    })
}

/// Euclidean projection onto `{x : x_i >= delta, sum x_i = 1}`.
pub(crate) fn project_floored_simplex(y: &Point, delta: f64) -> Point {
    let d = y.dim();
    let budget = 1.0 - d as f64 * delta;
    // Project z = y - delta onto the scaled simplex {z >= 0, sum z = budget}.
    let mut z: Vec<f64> = y.coords().iter().map(|&c| c - delta).collect();
    let mut sorted = z.clone();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cum = 0.0;
    let mut tau = 0.0;
    for (k, &s) in sorted.iter().enumerate() {
        cum += s;
        let t = (cum - budget) / (k + 1) as f64;
        if k + 1 == d || sorted[k + 1] <= t {
            tau = t;
            break;
        }
    }
    for zi in z.iter_mut() {
        *zi = (*zi - tau).max(0.0) + delta;
    }
    Point::from_raw(z)
}

/// Stationarity residual on the floored simplex: the gradient projected onto
/// the feasible directions at `x` (sum preserved, floored coordinates only
/// allowed to increase).
fn kkt_residual(x: &Point, g: &Point, delta: f64) -> f64 {
    let floor_tol = 1e-12;
    let free: Vec<usize> = (0..x.dim())
        .filter(|&i| x[i] > delta + floor_tol)
        .collect();
    let mu = if free.is_empty() {
        g.coords().iter().sum::<f64>() / x.dim() as f64
    } else {
        free.iter().map(|&i| g[i]).sum::<f64>() / free.len() as f64
    };
    let mut sq = 0.0;
    for i in 0..x.dim() {
        let r = if x[i] > delta + floor_tol {
            g[i] - mu
        } else {
            (g[i] - mu).min(0.0)
        };
        sq += r * r;
    }
    sq.sqrt()
}

/// The parameter pair that attains the optimal R-OBD competitive ratio:
/// `lambda2 = 0`, `lambda1 = 2 / (1 + sqrt(1 + 4 beta^2 / (alpha m)))`.
pub fn robd_optimal_params(m: f64, alpha: f64, beta: f64) -> Result<(f64, f64)> {
    if m <= 0.0 || alpha <= 0.0 || beta <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "need m, alpha, beta > 0, got {m}, {alpha}, {beta}"
        )));
    }
    let lambda1 = 2.0 / (1.0 + (1.0 + 4.0 * beta * beta / (alpha * m)).sqrt());
    Ok((lambda1, 0.0))
}

/// Closed-form competitive-ratio upper bound for R-OBD with the given
/// parameters: `max((m + lambda2 beta)/(lambda1 m),
/// 1 + (beta^2/alpha) lambda1/(lambda2 beta + m))`.
///
/// OBD and G-OBD have no sharp closed-form constant here and are rejected.
pub fn predicted_ratio(
    which: Algorithm,
    m: f64,
    alpha: f64,
    beta: f64,
) -> Result<f64> {
    match which {
        Algorithm::Robd { lambda1, lambda2 } => {
            if m <= 0.0 || lambda1 <= 0.0 {
                return Err(Error::InvalidParameter(
                    "predicted ratio needs m > 0 and lambda1 > 0".into(),
                ));
            }
            let a = (m + lambda2 * beta) / (lambda1 * m);
            let b = 1.0 + (beta * beta / alpha) * lambda1 / (lambda2 * beta + m);
            Ok(a.max(b))
        }
        other => Err(Error::Unsupported(format!(
            "no closed-form ratio bound for {other:?}"
        ))),
    }
}

/// The lower bound no online algorithm can beat under squared-l2 movement:
/// `(1/2)(1 + sqrt(1 + 4/m))`.
pub fn general_lower_bound(m: f64) -> f64 {
    0.5 * (1.0 + (1.0 + 4.0 / m).sqrt())
}

/// Play `algo` against `inst` for the instance's full horizon.
///
/// Adaptive instances receive the algorithm's previous point before emitting
/// each cost and observe the chosen point afterwards; fixed instances ignore
/// both. The instance records every emitted cost so oracles can replay them.
pub fn run(algo: &AlgoConfig, inst: &mut Instance) -> Result<RunResult> {
    algo.validate()?;
    inst.reset();
    let horizon = inst.horizon();
    let mut trajectory = Vec::with_capacity(horizon + 1);
    let mut hit = Vec::with_capacity(horizon);
    let mut mv = Vec::with_capacity(horizon);
    let mut x = inst.x0().clone();
    trajectory.push(x.clone());
    let s = algo.solve;
    for t in 1..=horizon {
        let f = inst.emit(t, &x)?;
        let x_next = match algo.which {
            Algorithm::Obd { gamma } => obd_step(&f, &x, gamma, &s)?,
            Algorithm::Gobd { gamma, mu } => {
                gobd_step(&f, &x, gamma, mu, inst.declared_m(), &s)?
            }
            Algorithm::Robd { lambda1, lambda2 } => {
                robd_step(&f, &x, lambda1, lambda2, inst.movement(), &s)?
            }
            Algorithm::StayPut => x.clone(),
            Algorithm::FollowMinimizer => f.minimizer(),
        };
        inst.observe(t, &x_next);
        hit.push(f.eval(&x_next));
        mv.push(inst.movement().cost(&x_next, &x)?);
        trajectory.push(x_next.clone());
        x = x_next;
    }
    let total = hit.iter().sum::<f64>() + mv.iter().sum::<f64>();
    Ok(RunResult {
        trajectory,
        hit,
        mv,
        total,
    })
}
