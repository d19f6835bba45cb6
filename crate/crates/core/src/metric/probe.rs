//! Numerical probe for the directionally-limited condition.
//!
//! Admissibility of a candidate set is a pairwise property, so the largest
//! admissible subset is a maximum clique of the pairwise-admissibility graph.

use crate::error::{Error, Result};
use crate::solver::clique;

use super::{MetricSpace, Point};

/// Candidate count up to which the maximum clique is searched exactly.
pub const EXACT_PROBE_LIMIT: usize = 24;

#[derive(Debug, Clone)]
pub struct DirectionalProbeParams {
    pub xi: f64,
    pub eta: f64,
    pub base: Point,
    pub candidates: Vec<Point>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeOutcome {
    /// Largest admissible subset found (exact when `exact`).
    pub max_card: usize,
    /// Certified upper bound on the largest admissible subset.
    pub upper_bound: usize,
    pub exact: bool,
    pub witness_subset: Vec<Point>,
}

impl DirectionalProbeParams {
    fn validate(&self, space: &MetricSpace) -> Result<()> {
        if self.candidates.is_empty() {
            return Err(Error::Domain("directional probe needs at least one candidate".into()));
        }
        if !(self.eta > 0.0 && self.eta <= 1.0 / 3.0) {
            return Err(Error::param("eta", format!("must lie in (0, 1/3], got {}", self.eta)));
        }
        if !(self.xi > 0.0) {
            return Err(Error::param("xi", format!("must be positive, got {}", self.xi)));
        }
        space.check(&self.base)?;
        for (i, c) in self.candidates.iter().enumerate() {
            let d = space.distance(&self.base, c)?;
            if d == 0.0 || d >= self.xi {
                return Err(Error::Domain(format!(
                    "candidate {i} at distance {d} from the base point is outside U_xi(a) \\ {{a}}"
                )));
            }
        }
        Ok(())
    }
}

/// Whether the pair `{b, c}` satisfies the witness inequality `d(x,c)/d(a,c) >= eta`.
///
/// When `d(a,b) == d(a,c)` both orderings are checked.
pub fn pair_admissible(space: &MetricSpace, a: &Point, b: &Point, c: &Point, eta: f64) -> Result<bool> {
    let dab = space.distance(a, b)?;
    let dac = space.distance(a, c)?;
    let one_way = |far: &Point, near: &Point, d_near: f64| -> Result<bool> {
        Ok(space
            .directional_witness_set(a, near, far)?
            .iter()
            .all(|x| space.distance_unchecked(x, near) / d_near >= eta))
    };
    if dab > dac {
        one_way(b, c, dac)
    } else if dac > dab {
        one_way(c, b, dab)
    } else {
        Ok(one_way(b, c, dac)? && one_way(c, b, dab)?)
    }
}

pub fn directional_limited_probe(space: &MetricSpace, params: &DirectionalProbeParams) -> Result<ProbeOutcome> {
    params.validate(space)?;
    let n = params.candidates.len();
    let mut adj = vec![vec![false; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let ok = pair_admissible(space, &params.base, &params.candidates[i], &params.candidates[j], params.eta)?;
            adj[i][j] = ok;
            adj[j][i] = ok;
        }
    }
    let (clique, upper_bound, exact) = if n <= EXACT_PROBE_LIMIT {
        let c = clique::max_clique_exact(&adj);
        let k = c.len();
        (c, k, true)
    } else {
        let c = clique::greedy_clique(&adj);
        let ub = clique::coloring_upper_bound(&adj);
        let k = c.len();
        (c, ub, k == ub)
    };
    Ok(ProbeOutcome {
        max_card: clique.len(),
        upper_bound,
        exact,
        witness_subset: clique.into_iter().map(|i| params.candidates[i].clone()).collect(),
    })
}

/// `count` equally spaced points on the circle of radius `radius` around `center`.
pub fn circle_candidates(center: [f64; 2], radius: f64, count: usize) -> Vec<Point> {
    (0..count)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / count as f64;
            Point::euclidean([center[0] + radius * t.cos(), center[1] + radius * t.sin()])
        })
        .collect()
}

/// One candidate per ray of a star graph, all at arc length `arc`.
pub fn star_candidates(rays: usize, arc: f64) -> Vec<Point> {
    (0..rays).map(|ray| Point::Star { ray, arc }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit_dir(a: &[f64], p: &[f64]) -> Vec<f64> {
        let v: Vec<f64> = p.iter().zip(a).map(|(x, y)| x - y).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.into_iter().map(|x| x / n).collect()
    }

    #[test]
    fn single_candidate() {
        let space = MetricSpace::euclidean(2);
        let out = directional_limited_probe(
            &space,
            &DirectionalProbeParams {
                xi: 2.0,
                eta: 1.0 / 3.0,
                base: Point::euclidean([0.0, 0.0]),
                candidates: vec![Point::euclidean([0.5, 0.0])],
            },
        )
        .unwrap();
        assert_eq!((out.max_card, out.exact), (1, true));
    }

    #[test]
    fn empty_candidates_rejected() {
        let space = MetricSpace::euclidean(2);
        let params = DirectionalProbeParams {
            xi: 2.0,
            eta: 0.2,
            base: Point::euclidean([0.0, 0.0]),
            candidates: vec![],
        };
        assert!(matches!(directional_limited_probe(&space, &params), Err(Error::Domain(_))));
    }

    #[test]
    fn candidates_outside_open_ball_rejected() {
        let space = MetricSpace::euclidean(2);
        let params = DirectionalProbeParams {
            xi: 1.0,
            eta: 0.2,
            base: Point::euclidean([0.0, 0.0]),
            candidates: vec![Point::euclidean([1.0, 0.0])],
        };
        assert!(directional_limited_probe(&space, &params).is_err());
    }

    // Oracle: on an equally spaced circle grid the admissible sets are the
    // point sets with pairwise angular step at least `k_min` grid steps.
    fn equal_spacing_oracle(count: usize, eta: f64) -> usize {
        let k_min = (1..=count)
            .find(|&k| 2.0 * (std::f64::consts::PI * k as f64 / count as f64).sin() >= eta)
            .unwrap();
        count / k_min
    }

    #[test]
    fn circle_grid_matches_equal_spacing_oracle() {
        let space = MetricSpace::euclidean(2);
        let out = directional_limited_probe(
            &space,
            &DirectionalProbeParams {
                xi: 2.0,
                eta: 1.0 / 3.0,
                base: Point::euclidean([0.0, 0.0]),
                candidates: circle_candidates([0.0, 0.0], 1.0, 720),
            },
        )
        .unwrap();
        assert_eq!(equal_spacing_oracle(720, 1.0 / 3.0), 18);
        assert_eq!(out.max_card, 18);
        assert!(out.upper_bound >= 18);
    }

    #[test]
    fn small_circle_grid_is_exact() {
        let space = MetricSpace::euclidean(2);
        for count in [6, 12, 20, 24] {
            for eta in [0.1, 0.25, 1.0 / 3.0] {
                let out = directional_limited_probe(
                    &space,
                    &DirectionalProbeParams {
                        xi: 2.0,
                        eta,
                        base: Point::euclidean([0.0, 0.0]),
                        candidates: circle_candidates([0.0, 0.0], 0.7, count),
                    },
                )
                .unwrap();
                assert!(out.exact);
                assert_eq!(out.max_card, equal_spacing_oracle(count, eta), "count={count} eta={eta}");
            }
        }
    }

    #[test]
    fn star_graph_grows_with_rays() {
        for rays in [5, 10, 25] {
            let space = MetricSpace::star_graph(rays, 10.0);
            let out = directional_limited_probe(
                &space,
                &DirectionalProbeParams {
                    xi: 2.0,
                    eta: 1.0 / 3.0,
                    base: Point::hub(),
                    candidates: star_candidates(rays, 1.0),
                },
            )
            .unwrap();
            assert_eq!(out.max_card, rays);
            assert!(out.exact);
        }
    }

    #[test]
    fn euclidean_admissibility_is_unit_direction_chord() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let space = MetricSpace::euclidean(3);
        let a = [0.2, -0.1, 0.4];
        for _ in 0..2000 {
            let b: Vec<f64> = (0..3).map(|i| a[i] + rng.gen_range(-1.0..1.0)).collect();
            let c: Vec<f64> = (0..3).map(|i| a[i] + rng.gen_range(-1.0..1.0)).collect();
            let eta = rng.gen_range(0.01..1.0 / 3.0);
            let chord: f64 = unit_dir(&a, &b)
                .iter()
                .zip(unit_dir(&a, &c))
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt();
            if (chord - eta).abs() < 1e-9 {
                continue;
            }
            let got = pair_admissible(&space, &Point::euclidean(a), &Point::euclidean(b), &Point::euclidean(c), eta).unwrap();
            assert_eq!(got, chord >= eta);
        }
    }

    #[test]
    fn max_card_nonincreasing_in_eta() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let space = MetricSpace::euclidean(2);
        let candidates: Vec<Point> = (0..18)
            .map(|_| {
                let t: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                let r: f64 = rng.gen_range(0.1..0.9);
                Point::euclidean([r * t.cos(), r * t.sin()])
            })
            .collect();
        let mut last = usize::MAX;
        for k in 1..=12 {
            let eta = k as f64 / 36.0;
            let out = directional_limited_probe(
                &space,
                &DirectionalProbeParams {
                    xi: 1.0,
                    eta,
                    base: Point::euclidean([0.0, 0.0]),
                    candidates: candidates.clone(),
                },
            )
            .unwrap();
            assert!(out.max_card <= last);
            last = out.max_card;
        }
    }
}
