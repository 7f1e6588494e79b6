//! Offline oracles: the unconstrained optimum, the movement-budgeted
//! optimum, the closed-form chain recursion, and a brute-force grid oracle
//! used only to cross-check the continuous solvers.

use crate::adversaries::Instance;
use crate::costs::HittingCost;
use crate::geometry::Point;
use crate::solver::{minimize_strongly_convex, SolveSettings};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OfflineResult {
    /// `x_1 .. x_T`.
    pub trajectory: Vec<Point>,
    /// Hitting plus movement cost of the trajectory.
    pub total: f64,
    /// Movement cost alone.
    pub movement_total: f64,
    pub converged: bool,
    /// Stacked-gradient norm at the returned trajectory.
    pub residual: f64,
}

/// Minimize total hitting plus movement cost over the whole trajectory.
///
/// Requires a fixed instance with squared-l2 movement. Pure quadratic chains
/// are solved exactly (the stationarity system is tridiagonal per
/// coordinate); other smooth strongly convex sequences go through the
/// stacked quasi-Newton solve warm-started at the follow-the-minimizer
/// trajectory.
pub fn offline_optimal(inst: &Instance, s: &SolveSettings) -> Result<OfflineResult> {
    offline_weighted(inst, 1.0, s)
}

fn offline_weighted(inst: &Instance, mv_weight: f64, s: &SolveSettings) -> Result<OfflineResult> {
    if inst.is_adaptive() {
        return Err(Error::Unsupported(
            "offline oracle needs a fixed cost sequence".into(),
        ));
    }
    if !inst.movement().potential.is_squared_l2() {
        return Err(Error::Unsupported(
            "offline oracle is implemented for squared-l2 movement".into(),
        ));
    }
    let costs = inst.realized_costs();
    if costs.is_empty() {
        return Ok(OfflineResult {
            trajectory: vec![],
            total: 0.0,
            movement_total: 0.0,
            converged: true,
            residual: 0.0,
        });
    }
    let all_quadratic = costs
        .iter()
        .all(|f| matches!(f, HittingCost::Quadratic { .. }));
    let trajectory = if all_quadratic {
        solve_quadratic_chain(inst.x0(), costs, mv_weight)
    } else {
        if costs
            .iter()
            .any(|f| matches!(f, HittingCost::PiecewiseQuasiconvex { .. }))
        {
            return Err(Error::Unsupported(
                "offline oracle needs convex hitting costs".into(),
            ));
        }
        solve_stacked(inst.x0(), costs, mv_weight, s)?
    };
    finish(inst, costs, trajectory, mv_weight, s)
}

/// Exact minimizer of a quadratic chain: the first-order system couples only
/// neighboring rounds, so each coordinate is an independent tridiagonal
/// solve.
fn solve_quadratic_chain(x0: &Point, costs: &[HittingCost], w: f64) -> Vec<Point> {
    let t_len = costs.len();
    let d = x0.dim();
    let mut ms = Vec::with_capacity(t_len);
    let mut vs = Vec::with_capacity(t_len);
    for f in costs {
        ms.push(f.curvature());
        vs.push(f.minimizer());
    }
    let mut out = vec![vec![0.0; d]; t_len];
    for k in 0..d {
        let mut diag: Vec<f64> = (0..t_len)
            .map(|t| ms[t] + w + if t + 1 < t_len { w } else { 0.0 })
            .collect();
        let mut rhs: Vec<f64> = (0..t_len).map(|t| ms[t] * vs[t][k]).collect();
        rhs[0] += w * x0[k];
        // Thomas elimination with constant off-diagonal -w.
        for t in 1..t_len {
            let factor = -w / diag[t - 1];
            diag[t] += factor * w;
            rhs[t] -= factor * rhs[t - 1];
        }
        let mut x = vec![0.0; t_len];
        x[t_len - 1] = rhs[t_len - 1] / diag[t_len - 1];
        for t in (0..t_len - 1).rev() {
            x[t] = (rhs[t] + w * x[t + 1]) / diag[t];
        }
        for t in 0..t_len {
            out[t][k] = x[t];
        }
    }
    out.into_iter().map(Point::from_raw).collect()
}

fn solve_stacked(
    x0: &Point,
    costs: &[HittingCost],
    w: f64,
    s: &SolveSettings,
) -> Result<Vec<Point>> {
    let t_len = costs.len();
    let d = x0.dim();
    let dim = t_len * d;
    let x0 = x0.clone();
    let costs_vec: Vec<HittingCost> = costs.to_vec();
    let warm: Vec<Point> = costs_vec.iter().map(|f| f.minimizer()).collect();
    let obj = (dim, move |z: &Point| {
        let mut val = 0.0;
        let mut grad = vec![0.0; dim];
        let point_at = |t: usize, z: &Point| {
            Point::from_raw((0..d).map(|k| z[t * d + k]).collect())
        };
        for t in 0..t_len {
            let xt = point_at(t, z);
            let prev = if t == 0 { x0.clone() } else { point_at(t - 1, z) };
            val += costs_vec[t].eval(&xt) + 0.5 * w * xt.dist(&prev).powi(2);
            let g = costs_vec[t].grad(&xt);
            for k in 0..d {
                grad[t * d + k] += g[k] + w * (xt[k] - prev[k]);
                if t > 0 {
                    grad[(t - 1) * d + k] -= w * (xt[k] - prev[k]);
                }
            }
        }
        (val, Point::from_raw(grad))
    });
    // Warm start: follow each round's minimizer.
    let mut init = Vec::with_capacity(dim);
    for p in &warm {
        init.extend_from_slice(p.coords());
    }
    let mut settings = *s;
    settings.grad_tol = s.grad_tol * (t_len as f64).sqrt();
    let z = minimize_strongly_convex(&obj, &Point::from_raw(init), &settings)?;
    Ok((0..t_len)
        .map(|t| Point::from_raw((0..d).map(|k| z[t * d + k]).collect()))
        .collect())
}

fn finish(
    inst: &Instance,
    costs: &[HittingCost],
    trajectory: Vec<Point>,
    mv_weight: f64,
    s: &SolveSettings,
) -> Result<OfflineResult> {
    let t_len = costs.len();
    let mut total = 0.0;
    let mut movement_total = 0.0;
    let mut residual_sq = 0.0;
    for t in 0..t_len {
        let prev = if t == 0 { inst.x0() } else { &trajectory[t - 1] };
        let mv = inst.movement().cost(&trajectory[t], prev)?;
        total += costs[t].eval(&trajectory[t]) + mv;
        movement_total += mv;
        let mut g = costs[t].grad(&trajectory[t]);
        g = g.add_scaled(mv_weight, &trajectory[t].sub(prev));
        if t + 1 < t_len {
            g = g.add_scaled(-mv_weight, &trajectory[t + 1].sub(&trajectory[t]));
        }
        residual_sq += g.dot(&g);
    }
    let residual = residual_sq.sqrt();
    Ok(OfflineResult {
        trajectory,
        total,
        movement_total,
        converged: residual <= 1e3 * s.grad_tol * (t_len as f64).sqrt().max(1.0),
        residual,
    })
}

/// The chain recursion `a_0 = 1`, `a_{n+1} = (a_n + m)/(a_n + m + 1)` and its
/// closed-form limit `(-m + sqrt(m^2 + 4m))/2`. Twice the optimal offline
/// cost of the ramp instance converges to the limit as the flat phase grows.
pub fn quadratic_chain(m: f64, n: usize) -> Result<(Vec<f64>, f64)> {
    if m <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "chain recursion needs m > 0, got {m}"
        )));
    }
    let mut a = Vec::with_capacity(n + 1);
    a.push(1.0);
    for _ in 0..n {
        let last = *a.last().unwrap();
        a.push((last + m) / (last + m + 1.0));
    }
    let limit = 0.5 * (-m + (m * m + 4.0 * m).sqrt());
    Ok((a, limit))
}

/// Cheapest trajectory whose movement cost stays within budget `L`, found by
/// bisecting a multiplier on the movement term; each inner problem is an
/// unconstrained offline solve with reweighted movement.
pub fn l_constrained_optimal(
    inst: &Instance,
    budget: f64,
    s: &SolveSettings,
) -> Result<OfflineResult> {
    if budget < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "movement budget must be nonnegative, got {budget}"
        )));
    }
    const SLACK: f64 = 1e-6;
    let costs = inst.realized_costs();
    if budget == 0.0 {
        let trajectory = vec![inst.x0().clone(); costs.len()];
        let total = inst.trajectory_cost(&trajectory)?;
        return Ok(OfflineResult {
            trajectory,
            total,
            movement_total: 0.0,
            converged: true,
            residual: 0.0,
        });
    }
    let unconstrained = offline_optimal(inst, s)?;
    if unconstrained.movement_total <= budget * (1.0 + SLACK) {
        return Ok(unconstrained);
    }
    // Movement of the reweighted solution decreases in the weight; bracket
    // then bisect until the budget binds.
    let mut lo = 1.0;
    let mut hi = 2.0;
    loop {
        let r = offline_weighted(inst, hi, s)?;
        if r.movement_total <= budget {
            break;
        }
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::OracleNotConverged {
                residual: r.movement_total - budget,
            });
        }
    }
    let mut best: Option<OfflineResult> = None;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let r = offline_weighted(inst, mid, s)?;
        if r.movement_total <= budget * (1.0 + SLACK) {
            let replace = best
                .as_ref()
                .map(|b| r.total < b.total)
                .unwrap_or(true);
            if replace {
                best = Some(r.clone());
            }
        }
        if r.movement_total > budget {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) <= 1e-12 * hi {
            break;
        }
    }
    best.ok_or(Error::OracleNotConverged { residual: budget })
}

/// Exact dynamic program over a uniform grid, for 1-d instances with short
/// horizons. Flags (via `converged = false`) any optimum that lands on the
/// grid boundary, since the continuous optimum then likely lies outside.
pub fn grid_oracle_1d(
    inst: &Instance,
    lo: f64,
    hi: f64,
    points_per_axis: usize,
) -> Result<OfflineResult> {
    let costs = inst.realized_costs();
    if inst.x0().dim() != 1 {
        return Err(Error::Unsupported("grid oracle is 1-d only".into()));
    }
    if costs.len() > 8 {
        return Err(Error::InvalidParameter(
            "grid oracle horizon is capped at 8".into(),
        ));
    }
    if !(2..=400).contains(&points_per_axis) {
        return Err(Error::InvalidParameter(
            "grid oracle needs 2..=400 points per axis".into(),
        ));
    }
    if !(lo < hi) {
        return Err(Error::InvalidParameter("grid bounds need lo < hi".into()));
    }
    let g = points_per_axis;
    let grid: Vec<f64> = (0..g)
        .map(|i| lo + (hi - lo) * i as f64 / (g - 1) as f64)
        .collect();
    let x0 = inst.x0().as_scalar();
    let t_len = costs.len();
    let mut dp = vec![0.0f64; g];
    let mut back: Vec<Vec<usize>> = Vec::with_capacity(t_len);
    for (j, &x) in grid.iter().enumerate() {
        dp[j] = costs[0].eval(&Point::scalar(x)) + 0.5 * (x - x0) * (x - x0);
    }
    back.push(vec![0; g]);
    for t in 1..t_len {
        let mut next = vec![f64::INFINITY; g];
        let mut arg = vec![0usize; g];
        for (j, &x) in grid.iter().enumerate() {
            let hit = costs[t].eval(&Point::scalar(x));
            for (k, &xp) in grid.iter().enumerate() {
                let c = dp[k] + hit + 0.5 * (x - xp) * (x - xp);
                if c < next[j] {
                    next[j] = c;
                    arg[j] = k;
                }
            }
        }
        dp = next;
        back.push(arg);
    }
    let (mut j, &total) = dp
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap();
    let mut idx = vec![0usize; t_len];
    for t in (0..t_len).rev() {
        idx[t] = j;
        j = back[t][j];
    }
    let on_boundary = idx.iter().any(|&i| i == 0 || i == g - 1);
    let trajectory: Vec<Point> = idx.iter().map(|&i| Point::scalar(grid[i])).collect();
    let mut movement_total = 0.0;
    let mut prev = x0;
    for p in &trajectory {
        movement_total += 0.5 * (p.as_scalar() - prev).powi(2);
        prev = p.as_scalar();
    }
    Ok(OfflineResult {
        trajectory,
        total,
        movement_total,
        converged: !on_boundary,
        residual: (hi - lo) / (g - 1) as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversaries::{gen_ramp, Instance};
    use crate::geometry::MovementCost;
    use approx::assert_abs_diff_eq;

    fn s() -> SolveSettings {
        SolveSettings::default()
    }

    fn quad_instance(specs: &[(f64, f64)], x0: f64) -> Instance {
        let costs = specs
            .iter()
            .map(|&(m, v)| HittingCost::quadratic(m, Point::scalar(v), 0.0).unwrap())
            .collect();
        Instance::fixed(
            Point::scalar(x0),
            MovementCost::squared_l2(1),
            specs[0].0,
            costs,
            None,
        )
        .unwrap()
    }

    #[test]
    fn chain_recursion_values() {
        let (a, limit) = quadratic_chain(4.0, 10).unwrap();
        assert_eq!(a[0], 1.0);
        assert_abs_diff_eq!(limit, -2.0 + 2.0 * 2.0f64.sqrt(), epsilon = 1e-14);
        let (a, limit) = quadratic_chain(0.01, 200).unwrap();
        assert_abs_diff_eq!(limit, 0.09512492, epsilon = 1e-7);
        assert!((a[200] - limit).abs() <= 1e-3);
        // Monotone nonincreasing, bounded below by the limit.
        for w in a.windows(2) {
            assert!(w[1] <= w[0] + 1e-15);
        }
        assert!(a.iter().all(|&v| v >= limit - 1e-12));
    }

    #[test]
    fn one_step_closed_form() {
        for &m in &[0.1, 1.0, 5.0] {
            let inst = quad_instance(&[(m, 1.0)], 0.0);
            let r = offline_optimal(&inst, &s()).unwrap();
            assert!(r.converged);
            assert_abs_diff_eq!(r.trajectory[0].as_scalar(), m / (m + 1.0), epsilon = 1e-10);
        }
    }

    #[test]
    fn constant_when_minimizers_sit_at_start() {
        let inst = quad_instance(&[(1.0, 2.0), (0.5, 2.0), (3.0, 2.0)], 2.0);
        let r = offline_optimal(&inst, &s()).unwrap();
        for p in &r.trajectory {
            assert_abs_diff_eq!(p.as_scalar(), 2.0, epsilon = 1e-10);
        }
        assert_abs_diff_eq!(r.total, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn ramp_total_approaches_half_chain_limit() {
        for &m in &[0.04, 1.0] {
            let inst = gen_ramp(m, 1e6, 200).unwrap();
            let r = offline_optimal(&inst, &s()).unwrap();
            assert!(r.converged, "residual {}", r.residual);
            let (_, limit) = quadratic_chain(m, 200).unwrap();
            let expect = limit / 2.0;
            assert!(
                (r.total - expect).abs() <= 0.005 * expect,
                "m={m}: {} vs {expect}",
                r.total
            );
        }
    }

    #[test]
    fn stacked_solver_matches_tridiagonal() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let specs: Vec<(f64, f64)> = (0..12)
            .map(|_| (rng.gen_range(0.05..3.0), rng.gen_range(-2.0..2.0)))
            .collect();
        let inst = quad_instance(&specs, 0.3);
        let exact = offline_optimal(&inst, &s()).unwrap();
        let stacked = solve_stacked(inst.x0(), inst.realized_costs(), 1.0, &s()).unwrap();
        for (a, b) in exact.trajectory.iter().zip(&stacked) {
            assert_abs_diff_eq!(a.as_scalar(), b.as_scalar(), epsilon = 1e-6);
        }
    }

    #[test]
    fn offline_beats_every_online_run() {
        use crate::algorithms::{run, AlgoConfig, Algorithm};
        let mut inst = gen_ramp(0.25, 100.0, 20).unwrap();
        let opt = offline_optimal(&inst, &s()).unwrap();
        for which in [
            Algorithm::Obd { gamma: 1.0 },
            Algorithm::Robd { lambda1: 0.5, lambda2: 0.1 },
            Algorithm::StayPut,
            Algorithm::FollowMinimizer,
        ] {
            let res = run(&AlgoConfig::new(which).unwrap(), &mut inst).unwrap();
            assert!(
                opt.total <= res.total + 2e-9 * 21.0,
                "{which:?} beat the oracle: {} < {}",
                res.total,
                opt.total
            );
        }
    }

    #[test]
    fn budget_zero_is_stay_put() {
        let inst = quad_instance(&[(1.0, 1.0), (1.0, 2.0)], 0.5);
        let r = l_constrained_optimal(&inst, 0.0, &s()).unwrap();
        assert_eq!(r.movement_total, 0.0);
        let expect: f64 = inst
            .realized_costs()
            .iter()
            .map(|f| f.eval(&Point::scalar(0.5)))
            .sum();
        assert_abs_diff_eq!(r.total, expect, epsilon = 1e-12);
    }

    #[test]
    fn loose_budget_recovers_unconstrained() {
        let inst = quad_instance(&[(1.0, 1.0), (2.0, -1.0), (0.5, 0.5)], 0.0);
        let unc = offline_optimal(&inst, &s()).unwrap();
        let r = l_constrained_optimal(&inst, unc.movement_total * 10.0, &s()).unwrap();
        assert_abs_diff_eq!(r.total, unc.total, epsilon = 1e-10);
    }

    #[test]
    fn total_nonincreasing_in_budget() {
        let inst = gen_ramp(0.5, 100.0, 6).unwrap();
        let unc = offline_optimal(&inst, &s()).unwrap();
        let mut last = f64::INFINITY;
        for i in 0..5 {
            let budget = unc.movement_total * i as f64 / 4.0;
            let r = l_constrained_optimal(&inst, budget, &s()).unwrap();
            assert!(r.movement_total <= budget * (1.0 + 1e-6) + 1e-15);
            assert!(r.total <= last + 1e-8, "budget {budget}: {} > {last}", r.total);
            last = r.total;
        }
    }

    #[test]
    fn grid_oracle_matches_continuous_solver() {
        let inst = quad_instance(&[(1.0, 1.0)], 0.0);
        let cont = offline_optimal(&inst, &s()).unwrap();
        let grid = grid_oracle_1d(&inst, -2.0, 2.0, 400).unwrap();
        assert!(grid.converged);
        assert!((grid.total - cont.total).abs() <= 1e-3);

        let ramp = gen_ramp(0.5, 100.0, 2).unwrap();
        let cont = offline_optimal(&ramp, &s()).unwrap();
        let grid = grid_oracle_1d(&ramp, -2.0, 2.0, 400).unwrap();
        assert!(grid.converged);
        assert!((grid.total - cont.total).abs() <= 1e-2);
    }

    #[test]
    fn grid_oracle_flags_boundary_optimum() {
        let inst = quad_instance(&[(1.0, 5.0)], 0.0);
        let r = grid_oracle_1d(&inst, -1.0, 1.0, 100).unwrap();
        assert!(!r.converged);
    }

    #[test]
    fn grid_oracle_enforces_preconditions() {
        let inst = quad_instance(&[(1.0, 0.0); 9].to_vec().as_slice(), 0.0);
        assert!(grid_oracle_1d(&inst, -1.0, 1.0, 100).is_err());
        let inst = quad_instance(&[(1.0, 0.0)], 0.0);
        assert!(grid_oracle_1d(&inst, -1.0, 1.0, 500).is_err());
        assert!(grid_oracle_1d(&inst, 1.0, -1.0, 100).is_err());
    }
}
