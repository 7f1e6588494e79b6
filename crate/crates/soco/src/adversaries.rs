//! Instance generators: the fixed lower-bound sequences and the adaptive
//! circle adversary that tracks the algorithm round by round.
//!
//! Every instance carries an optional explicit comparator trajectory (the
//! adversary of the corresponding lower-bound argument). The comparator's
//! cost upper-bounds the offline optimum, so ratios measured against it are
//! valid lower-bound certificates.

use crate::costs::HittingCost;
use crate::geometry::{MovementCost, Point};
use crate::{Error, Result};

/// An adversary that chooses each round's cost after seeing the algorithm's
/// current point, and maintains its own comparator trajectory.
pub trait AdaptiveAdversary: std::fmt::Debug {
    /// Emit the cost for `round` (1-based) given the algorithm's point
    /// entering the round.
    fn next(&mut self, round: usize, last: &Point) -> Result<HittingCost>;
    /// See the point the algorithm chose for `round`.
    fn observe(&mut self, round: usize, chosen: &Point);
    /// Comparator points for the rounds played so far.
    fn comparator(&self) -> &[Point];
    /// Forget all per-run state.
    fn reset(&mut self);
}

#[derive(Debug)]
pub enum CostSeq {
    Fixed(Vec<HittingCost>),
    Adaptive(Box<dyn AdaptiveAdversary + Send>),
}

/// One playable game: start point, movement cost, and the cost sequence.
#[derive(Debug)]
pub struct Instance {
    x0: Point,
    movement: MovementCost,
    /// Quadratic-growth constant the instance advertises to G-OBD.
    declared_m: f64,
    horizon: usize,
    seq: CostSeq,
    /// Explicit comparator for fixed instances (adaptive ones build theirs
    /// during play).
    fixed_comparator: Option<Vec<Point>>,
    /// Costs actually emitted during the current run.
    emitted: Vec<HittingCost>,
}

impl Instance {
    pub fn fixed(
        x0: Point,
        movement: MovementCost,
        declared_m: f64,
        costs: Vec<HittingCost>,
        comparator: Option<Vec<Point>>,
    ) -> Result<Self> {
        if declared_m <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "declared growth constant must be positive, got {declared_m}"
            )));
        }
        for f in &costs {
            if f.dim() != x0.dim() {
                return Err(Error::DimensionMismatch {
                    expected: x0.dim(),
                    got: f.dim(),
                });
            }
        }
        if let Some(comp) = &comparator {
            if comp.len() != costs.len() {
                return Err(Error::InvalidParameter(
                    "comparator length must equal the horizon".into(),
                ));
            }
        }
        let horizon = costs.len();
        Ok(Instance {
            x0,
            movement,
            declared_m,
            horizon,
            seq: CostSeq::Fixed(costs),
            fixed_comparator: comparator,
            emitted: Vec::new(),
        })
    }

    pub fn adaptive(
        x0: Point,
        movement: MovementCost,
        declared_m: f64,
        horizon: usize,
        adversary: Box<dyn AdaptiveAdversary + Send>,
    ) -> Self {
        Instance {
            x0,
            movement,
            declared_m,
            horizon,
            seq: CostSeq::Adaptive(adversary),
            fixed_comparator: None,
            emitted: Vec::new(),
        }
    }

    pub fn x0(&self) -> &Point {
        &self.x0
    }

    pub fn movement(&self) -> &MovementCost {
        &self.movement
    }

    pub fn declared_m(&self) -> f64 {
        self.declared_m
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn is_adaptive(&self) -> bool {
        matches!(self.seq, CostSeq::Adaptive(_))
    }

    pub fn reset(&mut self) {
        self.emitted.clear();
        if let CostSeq::Adaptive(adv) = &mut self.seq {
            adv.reset();
        }
    }

    /// The cost for `round` (1-based), recording it for later replay.
    pub fn emit(&mut self, round: usize, last: &Point) -> Result<HittingCost> {
        let f = match &mut self.seq {
            CostSeq::Fixed(costs) => costs[round - 1].clone(),
            CostSeq::Adaptive(adv) => adv.next(round, last)?,
        };
        self.emitted.push(f.clone());
        Ok(f)
    }

    pub fn observe(&mut self, round: usize, chosen: &Point) {
        if let CostSeq::Adaptive(adv) = &mut self.seq {
            adv.observe(round, chosen);
        }
    }

    /// Costs emitted during the last run (for fixed instances, the full
    /// sequence regardless of play).
    pub fn realized_costs(&self) -> &[HittingCost] {
        match &self.seq {
            CostSeq::Fixed(costs) => costs,
            CostSeq::Adaptive(_) => &self.emitted,
        }
    }

    /// The explicit adversary trajectory, if one exists. For adaptive
    /// instances this is only complete after a run.
    pub fn comparator(&self) -> Option<Vec<Point>> {
        match &self.seq {
            CostSeq::Fixed(_) => self.fixed_comparator.clone(),
            CostSeq::Adaptive(adv) => {
                let c = adv.comparator();
                if c.is_empty() {
                    None
                } else {
                    Some(c.to_vec())
                }
            }
        }
    }

    /// Total cost of a trajectory `x_1..x_T` against the realized costs.
    pub fn trajectory_cost(&self, traj: &[Point]) -> Result<f64> {
        let costs = self.realized_costs();
        if traj.len() != costs.len() {
            return Err(Error::InvalidParameter(format!(
                "trajectory length {} does not match horizon {}",
                traj.len(),
                costs.len()
            )));
        }
        let mut total = 0.0;
        let mut prev = self.x0.clone();
        for (f, x) in costs.iter().zip(traj) {
            total += f.eval(x) + self.movement.cost(x, &prev)?;
            prev = x.clone();
        }
        Ok(total)
    }
}

/// `n` rounds of `(m/2)x^2` at the origin, then one steep quadratic
/// `(m_steep/2)(x-1)^2`. The optimal play drifts geometrically toward 1 only
/// when the steep round arrives.
pub fn gen_ramp(m: f64, m_steep: f64, n: usize) -> Result<Instance> {
    if m <= 0.0 || m_steep <= 0.0 || n < 1 {
        return Err(Error::InvalidParameter(
            "ramp needs m, m_steep > 0 and n >= 1".into(),
        ));
    }
    let mut costs = Vec::with_capacity(n + 1);
    for _ in 0..n {
        costs.push(HittingCost::quadratic(m, Point::zeros(1), 0.0)?);
    }
    costs.push(HittingCost::quadratic(m_steep, Point::scalar(1.0), 0.0)?);
    Instance::fixed(
        Point::zeros(1),
        MovementCost::squared_l2(1),
        m,
        costs,
        None,
    )
}

/// The OBD balance fraction `sqrt(gamma m) / (1 + sqrt(gamma m))`.
pub fn drift_lambda(m: f64, gamma: f64) -> f64 {
    let r = (gamma * m).sqrt();
    r / (1.0 + r)
}

/// Drifting quadratics `(m/2)(x - t)^2` for `t = 1..n` with `n = ceil(1/lambda)`,
/// then one steep quadratic back at the origin. OBD is dragged distance
/// `Theta(1/lambda)` from the comparator, which never moves.
pub fn gen_drift(m: f64, gamma: f64, m_steep: f64) -> Result<Instance> {
    if m <= 0.0 || gamma <= 0.0 || m_steep <= 0.0 {
        return Err(Error::InvalidParameter(
            "drift needs m, gamma, m_steep > 0".into(),
        ));
    }
    if gamma * m >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "drift construction needs gamma*m < 1, got {}",
            gamma * m
        )));
    }
    let lambda = drift_lambda(m, gamma);
    let n = (1.0 / lambda).ceil() as usize;
    let mut costs = Vec::with_capacity(n + 1);
    for t in 1..=n {
        costs.push(HittingCost::quadratic(m, Point::scalar(t as f64), 0.0)?);
    }
    costs.push(HittingCost::quadratic(m_steep, Point::zeros(1), 0.0)?);
    let comparator = vec![Point::zeros(1); n + 1];
    Instance::fixed(
        Point::zeros(1),
        MovementCost::squared_l2(1),
        m,
        costs,
        Some(comparator),
    )
}

/// One round of `(m/2)(1-x)^2` from the origin; the comparator stays at 0
/// paying exactly `m/2`.
pub fn gen_single_step(m: f64) -> Result<Instance> {
    let costs = vec![HittingCost::quadratic(m, Point::scalar(1.0), 0.0)?];
    Instance::fixed(
        Point::zeros(1),
        MovementCost::squared_l2(1),
        m,
        costs,
        Some(vec![Point::zeros(1)]),
    )
}

/// `T` copies of the quasiconvex cost with `x0 = -1`. An algorithm stuck at
/// the local max pays `m/2` per round; the comparator jumps to 0 once.
pub fn gen_fixed_point(m: f64, horizon: usize) -> Result<Instance> {
    if horizon == 0 {
        return Err(Error::InvalidParameter("horizon must be positive".into()));
    }
    let costs = vec![HittingCost::piecewise_quasiconvex(m)?; horizon];
    let comparator = vec![Point::zeros(1); horizon];
    Instance::fixed(
        Point::scalar(-1.0),
        MovementCost::squared_l2(1),
        m,
        costs,
        Some(comparator),
    )
}

/// The adaptive construction that forces OBD to orbit while the comparator
/// shadows it at constant distance.
///
/// Round 1 centers a quadratic at the shared start; the comparator steps
/// distance `ell0` away. Every later round builds a right triangle on the
/// current algorithm point `A` and comparator point `D`: apex `C` beyond `D`
/// on ray `AD`, corner `B` at distance `ell` from `C` with the right angle at
/// `B`, and a cost whose tilt term pins the algorithm near `B`. The
/// comparator then slides along line `BC` to restore distance `ell`.
#[derive(Debug)]
pub struct CircleAdversary {
    m: f64,
    gamma: f64,
    tilt_epsilon: f64,
    ell0: f64,
    comparator: Vec<Point>,
    /// Frame of the round in flight: (B, unit direction B -> C, C).
    frame: Option<(Point, Point, Point)>,
    /// Rotation sign, fixed so successive frames bend the same way.
    orient: f64,
}

impl CircleAdversary {
    pub fn new(m: f64, gamma: f64, tilt_epsilon: f64, ell0: f64) -> Result<Self> {
        if m <= 0.0 || gamma <= 0.0 || tilt_epsilon <= 0.0 || ell0 <= 0.0 {
            return Err(Error::InvalidParameter(
                "circle adversary needs m, gamma, tilt_epsilon, ell0 > 0".into(),
            ));
        }
        Ok(CircleAdversary {
            m,
            gamma,
            tilt_epsilon,
            ell0,
            comparator: Vec::new(),
            frame: None,
            orient: 1.0,
        })
    }
}

impl AdaptiveAdversary for CircleAdversary {
    fn next(&mut self, round: usize, last: &Point) -> Result<HittingCost> {
        if round == 1 {
            // The algorithm starts at the cost's minimizer and stays; the
            // comparator will step away.
            return HittingCost::quadratic(self.m, last.clone(), 0.0);
        }
        let a = last.clone();
        let d = self.comparator.last().expect("round >= 2 has a comparator");
        let ell = a.dist(d);
        if ell < 1e-9 * self.ell0 {
            return Err(Error::DegenerateGeometry {
                round,
                reason: "algorithm point coincides with the comparator".into(),
            });
        }
        let h = (self.gamma * self.m).sqrt() * ell;
        let hyp = (h * h + ell * ell).sqrt();
        let toward = d.sub(&a).scale(1.0 / ell);
        let c = a.add_scaled(hyp, &toward);
        // Angle at C between rays C->A and C->B.
        let cos_t = ell / hyp;
        let sin_t = self.orient * h / hyp;
        let back = toward.scale(-1.0);
        let rotated = Point::from_raw(vec![
            cos_t * back[0] - sin_t * back[1],
            sin_t * back[0] + cos_t * back[1],
        ]);
        let b = c.add_scaled(ell, &rotated);
        let tilt = 10.0 * h * self.m * ell * ell / (self.tilt_epsilon * self.tilt_epsilon);
        let dir_bc = c.sub(&b).scale(1.0 / ell);
        self.frame = Some((b.clone(), dir_bc.clone(), c.clone()));
        HittingCost::tilted_quadratic(self.m, c, b, dir_bc, tilt)
    }

    fn observe(&mut self, round: usize, chosen: &Point) {
        if round == 1 {
            // Step distance ell0 away from wherever the algorithm settled.
            let f = chosen.add(&Point::from_raw(vec![self.ell0, 0.0]));
            self.comparator.push(f);
            return;
        }
        let (b, u, _c) = self.frame.take().expect("next() ran for this round");
        // Restore distance exactly ell0 along line BC, on the side of C.
        let w = chosen.sub(&b);
        let along = w.dot(&u);
        let perp2 = (w.dot(&w) - along * along).max(0.0);
        let reach2 = (self.ell0 * self.ell0 - perp2).max(0.0);
        let s = along + reach2.sqrt();
        self.comparator.push(b.add_scaled(s, &u));
    }

    fn comparator(&self) -> &[Point] {
        &self.comparator
    }

    fn reset(&mut self) {
        self.comparator.clear();
        self.frame = None;
    }
}

/// Adaptive circle instance in the plane; `tilt_epsilon` is the absolute
/// pin-down radius around `B` (the natural choice is a small fraction of
/// `ell0`).
pub fn circle_adversary(
    m: f64,
    gamma: f64,
    tilt_epsilon: f64,
    ell0: f64,
    horizon: usize,
) -> Result<Instance> {
    let adv = CircleAdversary::new(m, gamma, tilt_epsilon, ell0)?;
    Ok(Instance::adaptive(
        Point::zeros(2),
        MovementCost::squared_l2(2),
        m,
        horizon,
        Box::new(adv),
    ))
}
