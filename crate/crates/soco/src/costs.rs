//! Hitting-cost families behind a single descriptor interface.
//!
//! Every cost knows its minimizer, minimum value, curvature parameter `m`
//! (strong convexity, or the quadratic-growth constant for the quasiconvex
//! family), and an exact proximal map, which the inner solvers build on.

use crate::geometry::Point;
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Tolerance used when deciding whether a point sits on the tilt line.
const ON_LINE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CostKind {
    StronglyConvex,
    /// Quasiconvex with quadratic growth `f(x) >= f(v) + (m/2)||x - v||^2`.
    QuasiconvexGrowth,
}

/// A per-round hitting cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum HittingCost {
    /// `f(x) = (m/2)||x - center||^2 + offset`.
    Quadratic {
        m: f64,
        center: Point,
        offset: f64,
    },
    /// `f(u) = (m/2)||u - center||^2 + tilt * dist(u, line)` in 2-d, with the
    /// center on the line so the minimizer stays at the center.
    TiltedQuadratic {
        m: f64,
        center: Point,
        line_point: Point,
        /// Unit direction of the line.
        line_dir: Point,
        tilt: f64,
    },
    /// The 1-d quasiconvex counterexample: `(m/2)(1 - (x+1)^2)` on `[-1, 0]`
    /// and `(m/2)x^2` elsewhere; continuous, minimizer 0, minimum 0.
    PiecewiseQuasiconvex { m: f64 },
}

impl HittingCost {
    pub fn quadratic(m: f64, center: Point, offset: f64) -> Result<Self> {
        if m <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "quadratic curvature must be positive, got {m}"
            )));
        }
        if offset < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "offset must be nonnegative, got {offset}"
            )));
        }
        Ok(HittingCost::Quadratic { m, center, offset })
    }

    pub fn tilted_quadratic(
        m: f64,
        center: Point,
        line_point: Point,
        line_dir: Point,
        tilt: f64,
    ) -> Result<Self> {
        if center.dim() != 2 || line_point.dim() != 2 || line_dir.dim() != 2 {
            return Err(Error::InvalidParameter(
                "tilted quadratic is a 2-d construction".into(),
            ));
        }
        if m <= 0.0 || tilt <= 0.0 {
            return Err(Error::InvalidParameter(
                "tilted quadratic needs m > 0 and tilt > 0".into(),
            ));
        }
        let norm = line_dir.norm();
        if norm == 0.0 {
            return Err(Error::InvalidParameter("line_dir must be nonzero".into()));
        }
        let dir = line_dir.scale(1.0 / norm);
        let normal = Point::from_raw(vec![-dir[1], dir[0]]);
        let off_line = normal.dot(&center.sub(&line_point)).abs();
        let scale = 1.0f64.max(center.norm()).max(line_point.norm());
        if off_line > ON_LINE_TOL * scale {
            // The construction always places the quadratic's center on the
            // line; otherwise the declared minimizer would be wrong.
            return Err(Error::InvalidParameter(format!(
                "center is off the tilt line by {off_line:.3e}"
            )));
        }
        Ok(HittingCost::TiltedQuadratic {
            m,
            center,
            line_point,
            line_dir: dir,
            tilt,
        })
    }

    pub fn piecewise_quasiconvex(m: f64) -> Result<Self> {
        if m <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "growth constant must be positive, got {m}"
            )));
        }
        Ok(HittingCost::PiecewiseQuasiconvex { m })
    }

    pub fn dim(&self) -> usize {
        match self {
            HittingCost::Quadratic { center, .. } => center.dim(),
            HittingCost::TiltedQuadratic { .. } => 2,
            HittingCost::PiecewiseQuasiconvex { .. } => 1,
        }
    }

    pub fn kind(&self) -> CostKind {
        match self {
            HittingCost::PiecewiseQuasiconvex { .. } => CostKind::QuasiconvexGrowth,
            _ => CostKind::StronglyConvex,
        }
    }

    /// Curvature parameter: strong convexity, or the quadratic-growth
    /// constant for the quasiconvex family.
    pub fn curvature(&self) -> f64 {
        match self {
            HittingCost::Quadratic { m, .. }
            | HittingCost::TiltedQuadratic { m, .. }
            | HittingCost::PiecewiseQuasiconvex { m } => *m,
        }
    }

    pub fn minimizer(&self) -> Point {
        match self {
            HittingCost::Quadratic { center, .. } => center.clone(),
            HittingCost::TiltedQuadratic { center, .. } => center.clone(),
            HittingCost::PiecewiseQuasiconvex { .. } => Point::zeros(1),
        }
    }

    pub fn min_value(&self) -> f64 {
        match self {
            HittingCost::Quadratic { offset, .. } => *offset,
            _ => 0.0,
        }
    }

    pub fn eval(&self, x: &Point) -> f64 {
        match self {
            HittingCost::Quadratic { m, center, offset } => {
                0.5 * m * x.sub(center).dot(&x.sub(center)) + offset
            }
            HittingCost::TiltedQuadratic {
                m, center, tilt, ..
            } => {
                let (_, p) = self.line_coords(x);
                0.5 * m * x.sub(center).dot(&x.sub(center)) + tilt * p.abs()
            }
            HittingCost::PiecewiseQuasiconvex { m } => {
                let x = x.as_scalar();
                if (-1.0..=0.0).contains(&x) {
                    0.5 * m * (1.0 - (x + 1.0) * (x + 1.0))
                } else {
                    0.5 * m * x * x
                }
            }
        }
    }

    /// A subgradient (the gradient wherever `f` is differentiable). At the
    /// tilt line the distance term contributes the zero direction.
    pub fn grad(&self, x: &Point) -> Point {
        match self {
            HittingCost::Quadratic { m, center, .. } => x.sub(center).scale(*m),
            HittingCost::TiltedQuadratic {
                m, center, tilt, ..
            } => {
                let (_, p) = self.line_coords(x);
                let mut g = x.sub(center).scale(*m);
                if p != 0.0 {
                    let n = self.line_normal();
                    g = g.add_scaled(tilt * p.signum(), &n);
                }
                g
            }
            HittingCost::PiecewiseQuasiconvex { m } => {
                let x = x.as_scalar();
                let g = if (-1.0..=0.0).contains(&x) {
                    -m * (x + 1.0)
                } else {
                    m * x
                };
                Point::scalar(g)
            }
        }
    }

    /// Exact minimizer of `f(x) + (weight/2)||x - anchor||^2`.
    ///
    /// Closed form for every family; this is the primitive behind level-set
    /// projection, the balance search, and the l2 R-OBD step.
    pub fn prox(&self, weight: f64, anchor: &Point) -> Point {
        debug_assert!(weight > 0.0);
        match self {
            HittingCost::Quadratic { m, center, .. } => {
                anchor.scale(weight).add_scaled(*m, center).scale(1.0 / (weight + m))
            }
            HittingCost::TiltedQuadratic {
                m,
                center,
                line_point,
                line_dir,
                tilt,
            } => {
                // Separable in line coordinates: quadratic shrink along the
                // line, soft threshold across it.
                let (s0, p0) = self.line_coords(anchor);
                let (sc, _) = self.line_coords(center);
                let s = (weight * s0 + m * sc) / (weight + m);
                let p = p0.signum() * ((weight * p0.abs() - tilt) / (weight + m)).max(0.0);
                line_point
                    .add_scaled(s, line_dir)
                    .add_scaled(p, &self.line_normal())
            }
            HittingCost::PiecewiseQuasiconvex { m } => {
                let c = anchor.as_scalar();
                let w = weight;
                let mut candidates = vec![-1.0, 0.0];
                // Stationary point of the concave-bowl piece on [-1, 0].
                if w != *m {
                    candidates.push(((w * c + m) / (w - m)).clamp(-1.0, 0.0));
                }
                // Stationary point of the outer quadratic, restricted to its
                // own pieces.
                let outer = w * c / (w + m);
                candidates.push(outer.min(-1.0));
                candidates.push(outer.max(0.0));
                let obj = |x: f64| self.eval(&Point::scalar(x)) + 0.5 * w * (x - c) * (x - c);
                let mut best = candidates[0];
                let mut best_val = obj(best);
                for &cand in &candidates[1..] {
                    let v = obj(cand);
                    if v < best_val {
                        best_val = v;
                        best = cand;
                    }
                }
                Point::scalar(best)
            }
        }
    }

    /// (along-line, across-line) coordinates for the tilted family.
    fn line_coords(&self, x: &Point) -> (f64, f64) {
        match self {
            HittingCost::TiltedQuadratic {
                line_point,
                line_dir,
                ..
            } => {
                let rel = x.sub(line_point);
                (rel.dot(line_dir), self.line_normal().dot(&rel))
            }
            _ => unreachable!("line coordinates only exist for the tilted family"),
        }
    }

    fn line_normal(&self) -> Point {
        match self {
            HittingCost::TiltedQuadratic { line_dir, .. } => {
                Point::from_raw(vec![-line_dir[1], line_dir[0]])
            }
            _ => unreachable!(),
        }
    }
}

/// Outcome of [`validate_cost`]: violations are reported, never thrown.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    pub n_samples: usize,
    /// Max of `min_value + (m/2)||x - v||^2 - f(x)` over the sample (positive
    /// means the growth bound is violated).
    pub max_growth_violation: f64,
    /// Max of `-f(x)` over the sample.
    pub max_negativity: f64,
    /// Max relative error between `grad` and central finite differences at
    /// sampled differentiable points.
    pub max_grad_error: f64,
}

impl ValidationReport {
    pub fn clean(&self, tol: f64) -> bool {
        self.max_growth_violation <= tol && self.max_negativity <= tol
    }
}

/// Seeded sample-based check of nonnegativity, the quadratic-growth bound,
/// and gradient consistency, in a ball of `radius` around the minimizer.
pub fn validate_cost(
    f: &HittingCost,
    n_samples: usize,
    radius: f64,
    seed: u64,
) -> ValidationReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = f.minimizer();
    let m = f.curvature();
    let fv = f.min_value();
    let d = f.dim();
    let mut report = ValidationReport {
        n_samples,
        max_growth_violation: 0.0,
        max_negativity: 0.0,
        max_grad_error: 0.0,
    };
    let fd_step = 1e-6;
    for _ in 0..n_samples {
        let offset: Vec<f64> = (0..d).map(|_| rng.gen_range(-radius..radius)).collect();
        let x = v.add(&Point::from_raw(offset));
        let fx = f.eval(&x);
        report.max_negativity = report.max_negativity.max(-fx);
        let growth = fv + 0.5 * m * x.dist(&v).powi(2);
        report.max_growth_violation = report.max_growth_violation.max(growth - fx);
        // Gradient vs central differences, skipping points too close to a
        // kink for the stencil to be one-sided.
        if let Some(err) = grad_fd_error(f, &x, fd_step) {
            report.max_grad_error = report.max_grad_error.max(err);
        }
    }
    report
}

fn grad_fd_error(f: &HittingCost, x: &Point, h: f64) -> Option<f64> {
    match f {
        HittingCost::TiltedQuadratic { .. } => {
            let (_, p) = f.line_coords(x);
            if p.abs() < 10.0 * h {
                return None;
            }
        }
        HittingCost::PiecewiseQuasiconvex { .. } => {
            let s = x.as_scalar();
            if (s + 1.0).abs() < 10.0 * h || s.abs() < 10.0 * h {
                return None;
            }
        }
        HittingCost::Quadratic { .. } => {}
    }
    let g = f.grad(x);
    let mut max_err: f64 = 0.0;
    for i in 0..x.dim() {
        let mut up = x.coords().to_vec();
        let mut dn = up.clone();
        up[i] += h;
        dn[i] -= h;
        let fd = (f.eval(&Point::from_raw(up)) - f.eval(&Point::from_raw(dn))) / (2.0 * h);
        let scale = g[i].abs().max(1.0);
        max_err = max_err.max((fd - g[i]).abs() / scale);
    }
    Some(max_err)
}
