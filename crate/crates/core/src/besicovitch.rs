//! Greedy Besicovitch subfamilies, doubling radii and disjoint doubling
//! covers of finite point sets.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{ReferenceMeasure, SignedMeasure};
use crate::metric::{Ball, MetricSpace, Point};
use crate::premeasure::Premeasure;
use crate::region::OpenSet;

/// Subfamilies allowed for a given `zeta`.
pub fn allowed_subfamilies(zeta: usize) -> usize {
    2 * zeta + 1
}

/// Euclidean plane regression value: `2 * 9 + 1 = 19` subfamilies.
pub const DEFAULT_ZETA: usize = 9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallFamily {
    pub balls: Vec<Ball>,
    /// Points the balls are centred at; each must be the centre of a ball.
    pub centers_of: Vec<Point>,
}

impl BallFamily {
    /// Family whose centre set is the set of ball centres.
    pub fn from_balls(balls: Vec<Ball>) -> Self {
        let mut centers_of: Vec<Point> = Vec::new();
        for b in &balls {
            if !centers_of.contains(&b.center) {
                centers_of.push(b.center.clone());
            }
        }
        BallFamily { balls, centers_of }
    }

    pub fn validate(&self, space: &MetricSpace) -> Result<()> {
        for b in &self.balls {
            space.check(&b.center)?;
        }
        for p in &self.centers_of {
            if !self.balls.iter().any(|b| space.same_point(&b.center, p)) {
                return Err(Error::param("centers_of", format!("{p:?} is not the centre of any ball")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubfamilyAssignment {
    /// Indices into the input family, one list per subfamily.
    pub subfamilies: Vec<Vec<usize>>,
    /// Subfamily of each input ball; `None` for balls never picked.
    pub assignment: Vec<Option<usize>>,
    pub allowed: usize,
    pub disjointness_checks: usize,
}

impl SubfamilyAssignment {
    pub fn count(&self) -> usize {
        self.subfamilies.len()
    }
}

fn closed_disjoint(space: &MetricSpace, a: &Ball, b: &Ball) -> bool {
    space.distance_unchecked(&a.center, &b.center) > a.radius + b.radius
}

/// Largest-first greedy over balls whose centres are not yet covered, each
/// placed in the first subfamily where it is disjoint from every member.
pub fn greedy_subfamilies(space: &MetricSpace, family: &BallFamily, zeta: usize) -> Result<SubfamilyAssignment> {
    family.validate(space)?;
    let allowed = allowed_subfamilies(zeta);
    let mut order: Vec<usize> = (0..family.balls.len()).collect();
    order.sort_by(|&i, &j| family.balls[j].radius.total_cmp(&family.balls[i].radius).then(i.cmp(&j)));
    let mut subfamilies: Vec<Vec<usize>> = Vec::new();
    let mut assignment = vec![None; family.balls.len()];
    let mut chosen: Vec<usize> = Vec::new();
    let mut checks = 0;
    for &i in &order {
        let b = &family.balls[i];
        let covered = chosen
            .iter()
            .any(|&j| space.distance_unchecked(&family.balls[j].center, &b.center) <= family.balls[j].radius);
        if covered {
            continue;
        }
        let mut slot = None;
        for (k, members) in subfamilies.iter().enumerate() {
            checks += members.len();
            if members.iter().all(|&j| closed_disjoint(space, b, &family.balls[j])) {
                slot = Some(k);
                break;
            }
        }
        let k = match slot {
            Some(k) => k,
            None => {
                if subfamilies.len() == allowed {
                    return Err(Error::SubfamilyBoundExceeded {
                        ball: i,
                        center: b.center.coords().map(<[f64]>::to_vec).unwrap_or_default(),
                        radius: b.radius,
                        needed: allowed + 1,
                        allowed,
                    });
                }
                subfamilies.push(Vec::new());
                subfamilies.len() - 1
            }
        };
        subfamilies[k].push(i);
        assignment[i] = Some(k);
        chosen.push(i);
    }
    Ok(SubfamilyAssignment {
        subfamilies,
        assignment,
        allowed,
        disjointness_checks: checks,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubfamilyAudit {
    pub pairs_checked: usize,
    pub violations: usize,
    pub uncovered_centers: usize,
}

/// Recheck every pair inside each subfamily and coverage of every centre.
pub fn audit_subfamilies(space: &MetricSpace, family: &BallFamily, out: &SubfamilyAssignment) -> SubfamilyAudit {
    let mut pairs = 0;
    let mut violations = 0;
    for members in &out.subfamilies {
        for (a, &i) in members.iter().enumerate() {
            for &j in &members[a + 1..] {
                pairs += 1;
                if !closed_disjoint(space, &family.balls[i], &family.balls[j]) {
                    violations += 1;
                }
            }
        }
    }
    let uncovered = family
        .centers_of
        .iter()
        .filter(|p| {
            !out.subfamilies
                .iter()
                .flatten()
                .any(|&i| space.distance_unchecked(&family.balls[i].center, p) <= family.balls[i].radius)
        })
        .count();
    SubfamilyAudit {
        pairs_checked: pairs,
        violations,
        uncovered_centers: uncovered,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoublingParams {
    pub alpha: f64,
    pub gamma: f64,
    pub eps0: f64,
    /// Decreasing positive radii.
    pub r_grid: Vec<f64>,
}

impl DoublingParams {
    /// Grid `delta * 2^-k`, `k = 0..=20`.
    pub fn new(alpha: f64, gamma: f64, eps0: f64, delta: f64) -> Result<Self> {
        let p = DoublingParams {
            alpha,
            gamma,
            eps0,
            r_grid: (0..=20).map(|k| delta / 2f64.powi(k)).collect(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn from_reference(reference: &ReferenceMeasure, eps0: f64, delta: f64) -> Result<Self> {
        Self::new(reference.alpha, reference.gamma, eps0, delta)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::param("alpha", format!("must lie in (0, 1], got {}", self.alpha)));
        }
        if !(self.gamma >= 1.0 && self.gamma.is_finite()) {
            return Err(Error::param("gamma", format!("must be finite and >= 1, got {}", self.gamma)));
        }
        if !(self.eps0 > 0.0 && self.eps0.is_finite()) {
            return Err(Error::param("eps0", format!("must be positive, got {}", self.eps0)));
        }
        if self.r_grid.is_empty() {
            return Err(Error::param("r_grid", "must be nonempty"));
        }
        if self.r_grid.iter().any(|r| !(*r > 0.0 && r.is_finite())) || self.r_grid.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::param("r_grid", "must be positive, finite and strictly decreasing"));
        }
        Ok(())
    }

    pub fn bound(&self) -> f64 {
        self.gamma + self.eps0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DoublingRadii {
    pub radii: Vec<f64>,
    /// True when the grid was extended by a decade after an empty first pass.
    pub extended: bool,
    pub diagnostic: Option<String>,
}

pub fn is_doubling(mu: &SignedMeasure, x: &Point, r: f64, params: &DoublingParams) -> bool {
    mu.ball_mass_unchecked(x, r) <= params.bound() * mu.ball_mass_unchecked(x, params.alpha * r)
}

pub fn doubling_radii(mu: &SignedMeasure, x: &Point, params: &DoublingParams) -> Result<DoublingRadii> {
    params.validate()?;
    mu.space.check(x)?;
    let pass = |grid: &[f64]| -> Vec<f64> { grid.iter().copied().filter(|&r| is_doubling(mu, x, r, params)).collect() };
    let radii = pass(&params.r_grid);
    if !radii.is_empty() {
        return Ok(DoublingRadii {
            radii,
            extended: false,
            diagnostic: None,
        });
    }
    let last = *params.r_grid.last().expect("validated nonempty");
    let more: Vec<f64> = (1..=4).map(|k| last / 2f64.powi(k)).collect();
    let radii = pass(&more);
    let diagnostic = if radii.is_empty() && mu.ball_mass_unchecked(x, 0.0) > 0.0 {
        Some(format!("no doubling radius down to {:e} at a point of positive mass", more[3]))
    } else {
        None
    };
    Ok(DoublingRadii {
        radii,
        extended: true,
        diagnostic,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DoublingBall {
    pub ball: Ball,
    pub mass: f64,
    pub inner_mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DoublingCover {
    pub balls: Vec<DoublingBall>,
    pub uncovered: Vec<Point>,
    pub uncovered_mass: f64,
    pub passed: bool,
}

/// For each point of `a` inside `u`, the largest doubling radius `<= delta`
/// below half the distance to the nearest other point, with the closed ball
/// inside `u`.
pub fn besicovitch_with_doubling(
    a: &[Point],
    u: &OpenSet,
    mu: &SignedMeasure,
    params: &DoublingParams,
    delta: f64,
) -> Result<DoublingCover> {
    if !mu.is_nonnegative() {
        return Err(Error::Domain("doubling covers need a nonnegative measure".into()));
    }
    params.validate()?;
    let inside: Vec<&Point> = a.iter().filter(|p| p.coords().is_some_and(|c| u.contains(c))).collect();
    let picks: Vec<Result<Option<DoublingBall>>> = inside
        .par_iter()
        .map(|&p| {
            let sep = inside
                .iter()
                .filter(|q| !mu.space.same_point(p, q))
                .map(|q| mu.space.distance_unchecked(p, q))
                .fold(f64::INFINITY, f64::min);
            let radii = doubling_radii(mu, p, params)?;
            let c = p.expect_coords()?;
            Ok(radii
                .radii
                .iter()
                .copied()
                .find(|&r| r <= delta && 2.0 * r < sep && u.clearance(c, r) > 0.0)
                .map(|r| DoublingBall {
                    ball: Ball::at(c.to_vec(), r),
                    mass: mu.ball_mass_unchecked(p, r),
                    inner_mass: mu.ball_mass_unchecked(p, params.alpha * r),
                }))
        })
        .collect();
    let mut balls = Vec::new();
    let mut uncovered = Vec::new();
    for (p, pick) in inside.into_iter().zip(picks) {
        match pick? {
            Some(b) => balls.push(b),
            None => uncovered.push(p.clone()),
        }
    }
    let uncovered_mass: f64 = uncovered.iter().map(|p| mu.ball_mass_unchecked(p, 0.0)).sum();
    Ok(DoublingCover {
        passed: uncovered_mass == 0.0,
        balls,
        uncovered,
        uncovered_mass,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DoublingAudit {
    pub pairs_checked: usize,
    pub overlaps: usize,
    pub doubling_failures: usize,
    pub outside: usize,
}

/// Recompute disjointness, containment and the doubling inequality.
pub fn audit_doubling(cover: &DoublingCover, u: &OpenSet, mu: &SignedMeasure, params: &DoublingParams) -> DoublingAudit {
    let mut pairs = 0;
    let mut overlaps = 0;
    for (i, a) in cover.balls.iter().enumerate() {
        for b in &cover.balls[i + 1..] {
            pairs += 1;
            if !closed_disjoint(&mu.space, &a.ball, &b.ball) {
                overlaps += 1;
            }
        }
    }
    DoublingAudit {
        pairs_checked: pairs,
        overlaps,
        doubling_failures: cover
            .balls
            .iter()
            .filter(|b| !is_doubling(mu, &b.ball.center, b.ball.radius, params))
            .count(),
        outside: cover.balls.iter().filter(|b| !(u.clearance(b.ball.coords(), b.ball.radius) > 0.0)).count(),
    }
}

/// Per ball: `q(B) >= mu(B) / (C (gamma + eps0))`.
pub fn lower_bound_chain(cover: &DoublingCover, q: &Premeasure, c: f64, params: &DoublingParams) -> Vec<bool> {
    cover
        .balls
        .iter()
        .map(|b| q.eval_unchecked(&b.ball.center, b.ball.radius) >= b.mass / (c * params.bound()) - 1e-12)
        .collect()
}
