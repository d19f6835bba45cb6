//! Packing construction: suprema over disjoint ball families inside open
//! sets, the sweep over the radius bound, outer regularization by
//! neighbourhoods, the Method I wrapper, T-packings and the signed split.
//!
//! Radius bound convention: a ball of radius `r` is admitted at scale
//! `delta` when `r <= delta`.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covering::{canonical_order, check_schedule};
use crate::error::{Error, Result};
use crate::measure::SignedMeasure;
use crate::metric::{euclid, Ball, Point};
use crate::premeasure::{BoundCertificate, Premeasure};
use crate::measure::ReferenceMeasure;
use crate::region::OpenSet;
use crate::solver::independent_set::solve_mwis;
use crate::solver::SolverStatus;

/// Exact search threshold on conflict-graph components.
pub const EXACT_PACKING_LIMIT: usize = 40;
/// Center distance slack: balls with `d <= r1 + r2 + DISJOINT_TOL` overlap.
pub const DISJOINT_TOL: f64 = 1e-12;
const SPACING: f64 = 1.0 + 1e-6;
const LATTICE_CELLS: f64 = 32.0;
const JIGGLE_STEPS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PackingStrategy {
    /// Radii `delta, delta/2, ...`, this many levels per schedule entry.
    pub radius_levels: usize,
    /// Square lattice of pitch `max(2r, extent/32)` over the open set.
    pub lattice: bool,
    /// Coordinate search on centres to raise the premeasure.
    pub jiggle: bool,
    /// Containment margin as a fraction of the radius.
    pub margin_fraction: f64,
    pub exact_limit: usize,
}

impl Default for PackingStrategy {
    fn default() -> Self {
        PackingStrategy {
            radius_levels: 3,
            lattice: true,
            jiggle: false,
            margin_fraction: 0.01,
            exact_limit: EXACT_PACKING_LIMIT,
        }
    }
}

pub fn radius_grid(delta: f64, levels: usize) -> Vec<f64> {
    (0..levels.max(1)).map(|k| delta / 2f64.powi(k as i32)).collect()
}

/// Union of the radius grids of every schedule entry, decreasing.
fn radius_pool(schedule: &[f64], levels: usize) -> Vec<f64> {
    let mut pool: Vec<f64> = schedule.iter().flat_map(|&d| radius_grid(d, levels)).collect();
    pool.sort_by(|a, b| b.total_cmp(a));
    pool.dedup();
    pool
}

fn contained(u: &OpenSet, c: &[f64], r: f64, margin_fraction: f64) -> bool {
    u.contains_ball(c, r, margin_fraction * r)
}

fn candidates_for_radii(
    u: &OpenSet,
    radii: &[f64],
    mu: &SignedMeasure,
    strategy: &PackingStrategy,
    premeasure: Option<&Premeasure>,
) -> Result<Vec<Ball>> {
    if u.is_empty() {
        return Ok(Vec::new());
    }
    if mu.space.dim() != Some(u.dim) {
        return Err(Error::SpaceMismatch(format!(
            "open set of dimension {} for a measure on {}",
            u.dim,
            mu.space.label()
        )));
    }
    let per_radius: Vec<Vec<Ball>> = radii
        .par_iter()
        .map(|&r| {
            let mut centers: Vec<Vec<f64>> = Vec::new();
            for a in &mu.atoms {
                if let Some(x) = a.position.coords() {
                    if u.contains(x) {
                        centers.push(x.to_vec());
                    }
                }
            }
            for chain in &mu.chains {
                let len = chain.length();
                let step = 2.0 * r * SPACING;
                for offset in [0.0, 0.5 * step] {
                    let mut s = offset;
                    while s <= len {
                        centers.push(chain.point_at(s));
                        s += step;
                    }
                }
            }
            if strategy.lattice {
                if let Some((lo, hi)) = u.bounding_box() {
                    let extent = lo.iter().zip(&hi).map(|(a, b)| b - a).fold(0.0, f64::max);
                    let pitch = (2.0 * r).max(extent / LATTICE_CELLS);
                    let counts: Vec<usize> = lo.iter().zip(&hi).map(|(a, b)| ((b - a) / pitch).floor() as usize + 1).collect();
                    let mut idx = vec![0usize; u.dim];
                    'walk: loop {
                        centers.push((0..u.dim).map(|i| lo[i] + idx[i] as f64 * pitch).collect());
                        for i in 0..u.dim {
                            if idx[i] + 1 < counts[i] {
                                idx[i] += 1;
                                continue 'walk;
                            }
                            idx[i] = 0;
                        }
                        break;
                    }
                }
            }
            let mut out: Vec<Ball> = centers
                .into_iter()
                .filter(|c| contained(u, c, r, strategy.margin_fraction))
                .map(|c| Ball::at(c, r))
                .collect();
            if strategy.jiggle {
                if let Some(q) = premeasure {
                    let moved: Vec<Ball> = out.iter().filter_map(|b| jiggle(u, q, b, strategy.margin_fraction)).collect();
                    out.extend(moved);
                }
            }
            out
        })
        .collect();
    Ok(canonical_order(per_radius.into_iter().flatten().collect()))
}

/// Coordinate search on the centre; returns the moved ball if it improved.
fn jiggle(u: &OpenSet, q: &Premeasure, ball: &Ball, margin_fraction: f64) -> Option<Ball> {
    let r = ball.radius;
    let mut c = ball.coords().to_vec();
    let start = q.eval_unchecked(&ball.center, r);
    let mut best = start;
    let mut step = r / 4.0;
    for _ in 0..JIGGLE_STEPS {
        let mut moved = false;
        for axis in 0..c.len() {
            for sign in [1.0, -1.0] {
                let mut trial = c.clone();
                trial[axis] += sign * step;
                if !contained(u, &trial, r, margin_fraction) {
                    continue;
                }
                let v = q.eval_unchecked(&Point::Euclidean(trial.clone()), r);
                if v > best {
                    best = v;
                    c = trial;
                    moved = true;
                }
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    (best > start).then(|| Ball::at(c, r))
}

pub fn generate_packing_candidates(
    u: &OpenSet,
    delta: f64,
    mu: &SignedMeasure,
    strategy: &PackingStrategy,
    premeasure: Option<&Premeasure>,
) -> Result<Vec<Ball>> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::param("delta", format!("must be positive, got {delta}")));
    }
    candidates_for_radii(u, &radius_grid(delta, strategy.radius_levels), mu, strategy, premeasure)
}

#[derive(Debug, Clone)]
pub struct PackingInstance {
    pub open_set: OpenSet,
    pub delta: f64,
    pub candidates: Vec<Ball>,
    pub premeasure: Premeasure,
    pub margin_fraction: f64,
}

impl PackingInstance {
    pub fn new(
        open_set: OpenSet,
        delta: f64,
        candidates: Vec<Ball>,
        premeasure: Premeasure,
        margin_fraction: f64,
    ) -> Result<Self> {
        for (i, b) in candidates.iter().enumerate() {
            premeasure.measure.space.check(&b.center)?;
            if b.radius > delta * (1.0 + 1e-12) {
                return Err(Error::param("candidates", format!("ball {i} has radius {} > delta {delta}", b.radius)));
            }
            if !contained(&open_set, b.coords(), b.radius, margin_fraction) {
                return Err(Error::param("candidates", format!("ball {i} is not inside the open set with margin")));
            }
        }
        Ok(PackingInstance {
            open_set,
            delta,
            candidates,
            premeasure,
            margin_fraction,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PackingResult {
    pub chosen: Vec<Ball>,
    pub value: f64,
    pub status: SolverStatus,
    /// Pairs and containments re-verified after solving.
    pub conflict_count_checked: usize,
    pub n_candidates: usize,
    /// Candidates left after dropping zero-weight and dominated balls.
    pub n_reduced: usize,
    pub largest_component: usize,
}

fn overlap(a: &Ball, b: &Ball) -> bool {
    euclid(a.coords(), b.coords()) <= a.radius + b.radius + DISJOINT_TOL
}

/// Maximum-weight disjoint subfamily of `candidates`.
///
/// A ball is dropped when a ball inside it carries at least its weight;
/// this never lowers the optimum.
fn solve_packing(candidates: &[Ball], premeasure: &Premeasure, exact_limit: usize) -> PackingResult {
    let weights: Vec<f64> = candidates
        .par_iter()
        .map(|b| premeasure.eval_unchecked(&b.center, b.radius))
        .collect();
    let positive: Vec<usize> = (0..candidates.len()).filter(|&i| weights[i] > 0.0).collect();
    let keep: Vec<usize> = positive
        .par_iter()
        .copied()
        .filter(|&i| {
            let bi = &candidates[i];
            !positive.iter().any(|&j| {
                if j == i || weights[j] < weights[i] {
                    return false;
                }
                let bj = &candidates[j];
                let d = euclid(bi.coords(), bj.coords());
                let inside = d + bj.radius <= bi.radius;
                let same = d == 0.0 && bj.radius == bi.radius;
                inside && (!same || j < i)
            })
        })
        .collect();
    let adj: Vec<Vec<usize>> = (0..keep.len())
        .into_par_iter()
        .map(|a| {
            (0..keep.len())
                .filter(|&b| b != a && overlap(&candidates[keep[a]], &candidates[keep[b]]))
                .collect()
        })
        .collect();
    let w: Vec<f64> = keep.iter().map(|&i| weights[i]).collect();
    let sol = solve_mwis(&w, &adj, exact_limit);
    let chosen: Vec<Ball> = sol.chosen.iter().map(|&k| candidates[keep[k]].clone()).collect();
    // post-hoc disjointness over all chosen pairs
    let mut checked = 0;
    for i in 0..chosen.len() {
        for j in (i + 1)..chosen.len() {
            checked += 1;
            assert!(!overlap(&chosen[i], &chosen[j]), "solver returned overlapping balls");
        }
    }
    PackingResult {
        value: sol.chosen.iter().map(|&k| w[k]).sum(),
        chosen,
        status: sol.status,
        conflict_count_checked: checked,
        n_candidates: candidates.len(),
        n_reduced: keep.len(),
        largest_component: sol.largest_component,
    }
}

pub fn max_packing_value(instance: &PackingInstance, exact_limit: usize) -> Result<PackingResult> {
    let mut res = solve_packing(&instance.candidates, &instance.premeasure, exact_limit);
    for b in &res.chosen {
        res.conflict_count_checked += 1;
        if !contained(&instance.open_set, b.coords(), b.radius, instance.margin_fraction) {
            return Err(Error::Domain(format!("chosen ball {b:?} leaves the open set")));
        }
    }
    Ok(res)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PackingStep {
    pub delta: f64,
    pub result: PackingResult,
    pub runtime_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PackingSweep {
    pub steps: Vec<PackingStep>,
    /// Minimum over the computed values.
    pub limit: f64,
    pub all_exact: bool,
    pub monotonicity_violations: Vec<usize>,
    pub diagnostics: Vec<String>,
}

/// Candidate families are nested across the schedule: the family at `delta`
/// is every pooled ball with radius `<= delta`.
pub fn packing_sweep(
    u: &OpenSet,
    premeasure: &Premeasure,
    schedule: &[f64],
    strategy: &PackingStrategy,
) -> Result<PackingSweep> {
    check_schedule("delta", schedule)?;
    let pool = candidates_for_radii(
        u,
        &radius_pool(schedule, strategy.radius_levels),
        &premeasure.measure,
        strategy,
        Some(premeasure),
    )?;
    let steps: Vec<PackingStep> = schedule
        .par_iter()
        .map(|&delta| {
            let start = Instant::now();
            let family: Vec<Ball> = pool.iter().filter(|b| b.radius <= delta * (1.0 + 1e-12)).cloned().collect();
            let inst = PackingInstance {
                open_set: u.clone(),
                delta,
                candidates: family,
                premeasure: premeasure.clone(),
                margin_fraction: strategy.margin_fraction,
            };
            let result = max_packing_value(&inst, strategy.exact_limit)?;
            Ok(PackingStep {
                delta,
                result,
                runtime_ms: start.elapsed().as_secs_f64() * 1e3,
            })
        })
        .collect::<Result<Vec<PackingStep>>>()?;
    Ok(summarize(carry_up(steps)))
}

/// Families are nested, so a packing found at a smaller scale is admissible
/// at every larger one; heuristic steps adopt it when it is better.
fn carry_up(mut steps: Vec<PackingStep>) -> Vec<PackingStep> {
    for i in (0..steps.len().saturating_sub(1)).rev() {
        if steps[i + 1].result.value > steps[i].result.value {
            let better = steps[i + 1].result.clone();
            let r = &mut steps[i].result;
            r.chosen = better.chosen;
            r.value = better.value;
            r.status = SolverStatus::Improved;
        }
    }
    steps
}

fn summarize(steps: Vec<PackingStep>) -> PackingSweep {
    let mut violations = Vec::new();
    let mut diagnostics = Vec::new();
    for i in 1..steps.len() {
        if steps[i].result.value > steps[i - 1].result.value + 1e-12 {
            violations.push(i);
            diagnostics.push(format!(
                "value rose from {} at delta={} to {} at delta={}; the exact supremum is nonincreasing as delta shrinks",
                steps[i - 1].result.value,
                steps[i - 1].delta,
                steps[i].result.value,
                steps[i].delta
            ));
        }
    }
    let all_exact = steps.iter().all(|s| s.result.status.is_exact());
    if !all_exact {
        diagnostics.push("heuristic steps present: values are lower bounds of the finite-candidate optimum".into());
    }
    PackingSweep {
        limit: steps.iter().map(|s| s.result.value).fold(f64::INFINITY, f64::min),
        all_exact,
        steps,
        monotonicity_violations: violations,
        diagnostics,
    }
}

/// A compact set given by a finite description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CompactSet {
    Points { points: Vec<Vec<f64>> },
    Polyline { vertices: Vec<Vec<f64>> },
}

/// Neighbourhood radius used to evaluate `mu(A)` of a compact set.
const COMPACT_MASS_EPS: f64 = 1e-9;

impl CompactSet {
    pub fn points(points: Vec<Vec<f64>>) -> Self {
        CompactSet::Points { points }
    }

    pub fn neighborhood(&self, eps: f64) -> Result<OpenSet> {
        match self {
            CompactSet::Points { points } => OpenSet::neighborhood_of_points(points, eps),
            CompactSet::Polyline { vertices } => OpenSet::neighborhood_of_polyline(vertices, eps),
        }
    }

    /// `mu(A)` up to the mass within `1e-9` of `A`.
    pub fn mass(&self, mu: &SignedMeasure) -> Result<f64> {
        mu.total_mass(Some(&self.neighborhood(COMPACT_MASS_EPS)?))
    }

    /// Points used to test that open covers contain the set.
    fn probe_points(&self) -> Vec<Vec<f64>> {
        match self {
            CompactSet::Points { points } => points.clone(),
            CompactSet::Polyline { vertices } => crate::measure::PolylineChain {
                vertices: vertices.clone(),
                density: 1.0,
            }
            .sample(1001),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OuterEstimate {
    pub per_eps: Vec<(f64, PackingSweep)>,
    /// Minimum over the neighbourhood radii.
    pub estimate: f64,
    /// Smallest neighbourhood radius used.
    pub smallest_eps: f64,
    pub all_exact: bool,
}

pub fn outer_regularize(
    a: &CompactSet,
    premeasure: &Premeasure,
    eps_schedule: &[f64],
    delta_schedule: &[f64],
    strategy: &PackingStrategy,
) -> Result<OuterEstimate> {
    check_schedule("eps", eps_schedule)?;
    let per_eps: Vec<(f64, PackingSweep)> = eps_schedule
        .par_iter()
        .map(|&eps| Ok((eps, packing_sweep(&a.neighborhood(eps)?, premeasure, delta_schedule, strategy)?)))
        .collect::<Result<_>>()?;
    Ok(OuterEstimate {
        estimate: per_eps.iter().map(|(_, s)| s.limit).fold(f64::INFINITY, f64::min),
        smallest_eps: *eps_schedule.last().expect("nonempty schedule"),
        all_exact: per_eps.iter().all(|(_, s)| s.all_exact),
        per_eps,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodIEstimate {
    /// Minimum over feasible covers of the summed open-set values.
    pub estimate: f64,
    pub per_cover: Vec<Option<f64>>,
    pub best_cover: Option<usize>,
    pub feasible: bool,
    /// Best value among single-set covers, if any were listed.
    pub single_set_estimate: Option<f64>,
    pub matches_single: bool,
}

pub fn method_i_wrap(
    a: &CompactSet,
    oracle: impl Fn(&OpenSet) -> Result<f64> + Sync,
    covers: &[Vec<OpenSet>],
) -> Result<MethodIEstimate> {
    let probes = a.probe_points();
    let per_cover: Vec<Option<f64>> = covers
        .iter()
        .map(|cover| {
            let covers_a = probes.iter().all(|x| cover.iter().any(|u| u.contains(x)));
            if !covers_a {
                return Ok(None);
            }
            let vals: Vec<f64> = cover.par_iter().map(&oracle).collect::<Result<_>>()?;
            Ok(Some(vals.iter().sum()))
        })
        .collect::<Result<_>>()?;
    let best_cover = (0..covers.len())
        .filter(|&i| per_cover[i].is_some())
        .min_by(|&i, &j| per_cover[i].unwrap().total_cmp(&per_cover[j].unwrap()));
    let estimate = best_cover.map_or(f64::INFINITY, |i| per_cover[i].unwrap());
    let single_set_estimate = (0..covers.len())
        .filter(|&i| covers[i].len() == 1)
        .filter_map(|i| per_cover[i])
        .reduce(f64::min);
    Ok(MethodIEstimate {
        estimate,
        feasible: best_cover.is_some(),
        best_cover,
        matches_single: single_set_estimate.is_some_and(|s| (s - estimate).abs() <= 1e-12),
        single_set_estimate,
        per_cover,
    })
}

/// Packing oracle `U -> limit of the packing sweep on U`.
pub fn packing_oracle<'a>(
    premeasure: &'a Premeasure,
    schedule: &'a [f64],
    strategy: &'a PackingStrategy,
) -> impl Fn(&OpenSet) -> Result<f64> + Sync + 'a {
    move |u| Ok(packing_sweep(u, premeasure, schedule, strategy)?.limit)
}

/// Disjoint balls centred on `e` with radius `<= delta`, no containment
/// constraint.
pub fn t_packing_value(e: &[Vec<f64>], premeasure: &Premeasure, delta: f64, strategy: &PackingStrategy) -> Result<PackingResult> {
    if e.is_empty() {
        return Err(Error::Domain("T-packing needs a nonempty set".into()));
    }
    t_packing_for_radii(e, premeasure, &radius_grid(delta, strategy.radius_levels), strategy.exact_limit)
}

fn t_packing_for_radii(e: &[Vec<f64>], premeasure: &Premeasure, radii: &[f64], exact_limit: usize) -> Result<PackingResult> {
    let mut balls = Vec::new();
    for x in e {
        premeasure.measure.space.check(&Point::Euclidean(x.clone()))?;
        for &r in radii {
            balls.push(Ball::at(x.clone(), r));
        }
    }
    Ok(solve_packing(&canonical_order(balls), premeasure, exact_limit))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TricotReport {
    pub packing_estimate: f64,
    pub t_estimate: f64,
    pub t_per_delta: Vec<(f64, f64)>,
    pub gap: f64,
    pub all_exact: bool,
}

pub fn compare_constructions(
    e: &[Vec<f64>],
    premeasure: &Premeasure,
    eps_schedule: &[f64],
    delta_schedule: &[f64],
    strategy: &PackingStrategy,
) -> Result<TricotReport> {
    check_schedule("delta", delta_schedule)?;
    let hat = outer_regularize(&CompactSet::points(e.to_vec()), premeasure, eps_schedule, delta_schedule, strategy)?;
    let pool = radius_pool(delta_schedule, strategy.radius_levels);
    let t: Vec<(f64, PackingResult)> = delta_schedule
        .par_iter()
        .map(|&d| {
            let radii: Vec<f64> = pool.iter().copied().filter(|&r| r <= d * (1.0 + 1e-12)).collect();
            Ok((d, t_packing_for_radii(e, premeasure, &radii, strategy.exact_limit)?))
        })
        .collect::<Result<_>>()?;
    let t_estimate = t.iter().map(|(_, r)| r.value).fold(f64::INFINITY, f64::min);
    Ok(TricotReport {
        packing_estimate: hat.estimate,
        gap: (hat.estimate - t_estimate).abs(),
        all_exact: hat.all_exact && t.iter().all(|(_, r)| r.status.is_exact()),
        t_per_delta: t.iter().map(|(d, r)| (*d, r.value)).collect(),
        t_estimate,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SandwichReport {
    pub mu_a: f64,
    pub mu_u: f64,
    pub gamma: f64,
    pub c: f64,
    pub lower_bound: f64,
    pub estimate: f64,
    pub upper_bound: f64,
    pub tol: f64,
    pub certificate_passed: bool,
    pub passed: bool,
}

/// `mu(A)/(gamma C) - tol <= estimate <= C mu(U) + tol`, `U` the smallest
/// neighbourhood used by the estimate.
pub fn sandwich_check(
    a: &CompactSet,
    mu: &SignedMeasure,
    cert: &BoundCertificate,
    reference: &ReferenceMeasure,
    estimate: &OuterEstimate,
) -> Result<SandwichReport> {
    let mu_a = a.mass(mu)?;
    let mu_u = mu.total_mass(Some(&a.neighborhood(estimate.smallest_eps)?))?;
    Ok(sandwich_numbers(mu_a, mu_u, reference.gamma, cert.c, estimate.estimate, cert.passed))
}

fn sandwich_numbers(mu_a: f64, mu_u: f64, gamma: f64, c: f64, estimate: f64, cert_ok: bool) -> SandwichReport {
    let tol = 1e-9 + 1e-6 * mu_u.abs();
    let lower_bound = mu_a / (gamma * c);
    let upper_bound = c * mu_u;
    SandwichReport {
        mu_a,
        mu_u,
        gamma,
        c,
        lower_bound,
        estimate,
        upper_bound,
        tol,
        certificate_passed: cert_ok,
        passed: cert_ok && estimate >= lower_bound - tol && estimate <= upper_bound + tol,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignedPackingReport {
    pub plus: OuterEstimate,
    pub minus: OuterEstimate,
    /// Sandwich on `|mu|` with `plus + minus` as the estimate.
    pub variation: SandwichReport,
}

#[allow(clippy::too_many_arguments)]
pub fn signed_packing_reconstruct(
    mu: &SignedMeasure,
    q_plus: &Premeasure,
    q_minus: &Premeasure,
    a: &CompactSet,
    eps_schedule: &[f64],
    delta_schedule: &[f64],
    strategy: &PackingStrategy,
    certificates: (&BoundCertificate, &BoundCertificate),
    gamma: f64,
) -> Result<SignedPackingReport> {
    let plus = outer_regularize(a, q_plus, eps_schedule, delta_schedule, strategy)?;
    let minus = outer_regularize(a, q_minus, eps_schedule, delta_schedule, strategy)?;
    let tv = mu.variation();
    let c = certificates.0.c.max(certificates.1.c);
    let variation = sandwich_numbers(
        a.mass(&tv)?,
        a.mass(&tv)?,
        gamma,
        c,
        plus.estimate + minus.estimate,
        certificates.0.passed && certificates.1.passed,
    );
    Ok(SignedPackingReport { plus, minus, variation })
}
