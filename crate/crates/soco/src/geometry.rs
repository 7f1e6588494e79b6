//! Points, potentials, and Bregman divergences: the movement-cost substrate.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::ops::Index;

/// Tolerance on the sum-to-one constraint for floored-simplex membership.
const SIMPLEX_SUM_TOL: f64 = 1e-9;

/// A decision point in `R^d`.
///
/// All coordinates are finite; every point participating in a run shares the
/// same dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinitePoint(coords));
        }
        Ok(Point(coords))
    }

    /// Builds a point without the finiteness check. Intended for arithmetic
    /// on already-validated inputs.
    pub(crate) fn from_raw(coords: Vec<f64>) -> Self {
        Point(coords)
    }

    pub fn scalar(x: f64) -> Self {
        Point(vec![x])
    }

    pub fn zeros(dim: usize) -> Self {
        Point(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    /// The single coordinate of a one-dimensional point.
    pub fn as_scalar(&self) -> f64 {
        debug_assert_eq!(self.0.len(), 1);
        self.0[0]
    }

    pub fn dot(&self, other: &Point) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dist(&self, other: &Point) -> f64 {
        self.sub(other).norm()
    }

    pub fn sub(&self, other: &Point) -> Point {
        debug_assert_eq!(self.dim(), other.dim());
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn add(&self, other: &Point) -> Point {
        debug_assert_eq!(self.dim(), other.dim());
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn scale(&self, s: f64) -> Point {
        Point(self.0.iter().map(|a| a * s).collect())
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, s: f64, other: &Point) -> Point {
        debug_assert_eq!(self.dim(), other.dim());
        Point(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + s * b)
                .collect(),
        )
    }

    /// Convex combination `(1 - w) * self + w * other`.
    pub fn lerp(&self, w: f64, other: &Point) -> Point {
        Point(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| (1.0 - w) * a + w * b)
                .collect(),
        )
    }
}

impl Index<usize> for Point {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Domain on which a potential (and hence its Bregman divergence) is defined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Domain {
    AllOfRd,
    /// Probability simplex with every coordinate at least `delta`.
    FlooredSimplex { delta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
enum PotentialKind {
    SquaredL2,
    NegEntropy,
}

/// A mirror map `h` generating the movement cost `D_h(x || y)`.
///
/// `alpha` and `beta` are the strong-convexity and strong-smoothness
/// constants of `h` with respect to the Euclidean norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Potential {
    kind: PotentialKind,
    dim: usize,
    pub alpha: f64,
    pub beta: f64,
    pub domain: Domain,
}

impl Potential {
    /// `h(x) = 1/2 ||x||_2^2` on all of `R^d`; `alpha = beta = 1`.
    pub fn squared_l2(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        Ok(Potential {
            kind: PotentialKind::SquaredL2,
            dim,
            alpha: 1.0,
            beta: 1.0,
            domain: Domain::AllOfRd,
        })
    }

    /// Negative entropy `h(y) = sum_i y_i ln y_i` on the floored simplex
    /// `P_delta`, where the Bregman divergence reduces to KL.
    ///
    /// The stored constants are `alpha = 1/(2 ln 2)` and
    /// `beta = 1/(delta ln 2)`.
    pub fn negentropy(dim: usize, delta: f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidParameter(
                "negentropy potential needs dimension >= 2".into(),
            ));
        }
        if !(delta > 0.0 && delta < 1.0 / dim as f64) {
            return Err(Error::InvalidParameter(format!(
                "delta must lie in (0, 1/{dim}), got {delta}"
            )));
        }
        let ln2 = std::f64::consts::LN_2;
        Ok(Potential {
            kind: PotentialKind::NegEntropy,
            dim,
            alpha: 1.0 / (2.0 * ln2),
            beta: 1.0 / (delta * ln2),
            domain: Domain::FlooredSimplex { delta },
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_squared_l2(&self) -> bool {
        self.kind == PotentialKind::SquaredL2
    }

    /// Membership check for the potential's domain.
    pub fn contains(&self, x: &Point) -> bool {
        if x.dim() != self.dim || !x.is_finite() {
            return false;
        }
        match self.domain {
            Domain::AllOfRd => true,
            Domain::FlooredSimplex { delta } => {
                let sum: f64 = x.coords().iter().sum();
                (sum - 1.0).abs() <= SIMPLEX_SUM_TOL
                    && x.coords().iter().all(|&c| c >= delta - SIMPLEX_SUM_TOL)
            }
        }
    }

    fn check_domain(&self, x: &Point) -> Result<()> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.dim(),
            });
        }
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::DomainViolation(format!("{:?}", x.coords())))
        }
    }

    pub fn eval(&self, x: &Point) -> f64 {
        match self.kind {
            PotentialKind::SquaredL2 => 0.5 * x.dot(x),
            PotentialKind::NegEntropy => x.coords().iter().map(|&y| y * y.ln()).sum(),
        }
    }

    pub fn grad(&self, x: &Point) -> Point {
        match self.kind {
            PotentialKind::SquaredL2 => x.clone(),
            PotentialKind::NegEntropy => {
                Point::from_raw(x.coords().iter().map(|&y| y.ln() + 1.0).collect())
            }
        }
    }

    /// The Bregman divergence `D_h(x || y) = h(x) - h(y) - <grad h(y), x - y>`.
    pub fn bregman(&self, x: &Point, y: &Point) -> Result<f64> {
        self.check_domain(x)?;
        self.check_domain(y)?;
        let d = self.eval(x) - self.eval(y) - self.grad(y).dot(&x.sub(y));
        // Nonnegative for convex h; clamp rounding noise at the diagonal.
        Ok(d.max(0.0))
    }
}

/// Movement cost `c(x, y) = D_h(x || y)` for a fixed potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MovementCost {
    pub potential: Potential,
}

impl MovementCost {
    pub fn new(potential: Potential) -> Self {
        MovementCost { potential }
    }

    pub fn squared_l2(dim: usize) -> Self {
        let potential = Potential::squared_l2(dim).expect("dimension must be >= 1");
        MovementCost::new(potential)
    }

    pub fn cost(&self, x: &Point, y: &Point) -> Result<f64> {
        self.potential.bregman(x, y)
    }
}

/// Convenience free function mirroring [`Potential::bregman`].
pub fn bregman(p: &Potential, x: &Point, y: &Point) -> Result<f64> {
    p.bregman(x, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pt(coords: &[f64]) -> Point {
        Point::new(coords.to_vec()).unwrap()
    }

    /// Random point of the floored simplex with coordinates >= delta.
    fn random_simplex_point(rng: &mut ChaCha8Rng, dim: usize, delta: f64) -> Point {
        let raw: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.01..1.0)).collect();
        let sum: f64 = raw.iter().sum();
        let free = 1.0 - dim as f64 * delta;
        Point::new(raw.iter().map(|r| delta + free * r / sum).collect()).unwrap()
    }

    #[test]
    fn squared_l2_bregman_is_half_squared_distance() {
        let p = Potential::squared_l2(2).unwrap();
        let d = p.bregman(&pt(&[1.0, 0.0]), &pt(&[0.0, 0.0])).unwrap();
        assert_abs_diff_eq!(d, 0.5, epsilon = 1e-15);
        let d = p.bregman(&pt(&[3.0, 4.0]), &pt(&[0.0, 0.0])).unwrap();
        assert_abs_diff_eq!(d, 12.5, epsilon = 1e-12);
    }

    #[test]
    fn bregman_at_equal_points_is_zero() {
        let p = Potential::squared_l2(2).unwrap();
        let x = pt(&[0.3, 0.7]);
        assert_eq!(p.bregman(&x, &x).unwrap(), 0.0);
        let p = Potential::negentropy(2, 0.1).unwrap();
        let x = pt(&[0.5, 0.5]);
        assert_abs_diff_eq!(p.bregman(&x, &x).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn squared_l2_grad_is_identity_and_constants_are_one() {
        let p = Potential::squared_l2(1).unwrap();
        assert_eq!(p.grad(&pt(&[5.0])).coords(), &[5.0]);
        let p = Potential::squared_l2(3).unwrap();
        assert_eq!((p.alpha, p.beta), (1.0, 1.0));
        // grad h(0) = 0, needed by the regret analysis.
        assert_eq!(p.grad(&Point::zeros(3)).coords(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn negentropy_constants_match_stated_values() {
        let p = Potential::negentropy(2, 0.1).unwrap();
        assert_abs_diff_eq!(p.alpha, 0.7213475204444817, epsilon = 1e-12);
        assert_abs_diff_eq!(p.beta, 14.426950408889634, epsilon = 1e-10);
    }

    #[test]
    fn negentropy_bregman_is_kl_divergence() {
        // Independent direct evaluation of the KL formula.
        let p = Potential::negentropy(2, 0.1).unwrap();
        let x = pt(&[0.5, 0.5]);
        let y = pt(&[0.25, 0.75]);
        let kl: f64 = 0.5 * (0.5f64 / 0.25).ln() + 0.5 * (0.5f64 / 0.75).ln();
        assert_abs_diff_eq!(p.bregman(&x, &y).unwrap(), kl, epsilon = 1e-12);
    }

    #[test]
    fn negentropy_rejects_points_off_the_simplex() {
        let p = Potential::negentropy(2, 0.1).unwrap();
        let bad = pt(&[0.5, 0.6]);
        assert!(p.bregman(&bad, &pt(&[0.5, 0.5])).is_err());
        let below_floor = pt(&[0.05, 0.95]);
        assert!(p.bregman(&below_floor, &pt(&[0.5, 0.5])).is_err());
    }

    #[test]
    fn negentropy_delta_out_of_range_rejected() {
        assert!(Potential::negentropy(2, 0.6).is_err());
        assert!(Potential::negentropy(2, 0.0).is_err());
        assert!(Potential::negentropy(1, 0.1).is_err());
    }

    #[test]
    fn sandwich_bound_on_random_simplex_pairs() {
        // alpha/2 ||x-y||^2 <= D_h <= beta/2 ||x-y||^2 with the stored
        // constants, sampled over 100 in-domain pairs.
        let delta = 0.1;
        let p = Potential::negentropy(3, delta).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let x = random_simplex_point(&mut rng, 3, delta);
            let y = random_simplex_point(&mut rng, 3, delta);
            let d = p.bregman(&x, &y).unwrap();
            let sq = x.dist(&y).powi(2);
            assert!(d + 1e-12 >= 0.5 * p.alpha * sq, "lower sandwich failed");
            assert!(d <= 0.5 * p.beta * sq + 1e-12, "upper sandwich failed");
        }
    }

    #[test]
    fn grad_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let l2 = Potential::squared_l2(3).unwrap();
        let ne = Potential::negentropy(3, 0.05).unwrap();
        for _ in 0..50 {
            let x = Point::new((0..3).map(|_| rng.gen_range(-2.0..2.0)).collect()).unwrap();
            check_grad_fd(&l2, &x);
            let s = random_simplex_point(&mut rng, 3, 0.05);
            check_grad_fd(&ne, &s);
        }
    }

    fn check_grad_fd(p: &Potential, x: &Point) {
        let g = p.grad(x);
        let h = 1e-6;
        for i in 0..x.dim() {
            let mut up = x.coords().to_vec();
            let mut dn = up.clone();
            up[i] += h;
            dn[i] -= h;
            let fd = (p.eval(&Point::from_raw(up)) - p.eval(&Point::from_raw(dn))) / (2.0 * h);
            let scale = g.coords()[i].abs().max(1.0);
            assert!(
                (fd - g.coords()[i]).abs() / scale < 1e-6,
                "fd {} vs grad {}",
                fd,
                g.coords()[i]
            );
        }
    }
}
