//! Metric-space models, points and closed balls.
//!
//! Three models are supported: Euclidean `R^n`, a geodesic star graph (a
//! finite bundle of half-lines glued at a hub, truncated at `max_arc`), and a
//! finite metric given by a distance matrix.

mod probe;

pub use probe::{
    circle_candidates, directional_limited_probe, pair_admissible, star_candidates, DirectionalProbeParams, ProbeOutcome,
    EXACT_PROBE_LIMIT,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack used when checking the two metric equalities that define a witness.
pub const WITNESS_TOL: f64 = 1e-9;

/// Slack for the triangle inequality of a finite metric matrix.
pub const TRIANGLE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Point {
    Euclidean(Vec<f64>),
    /// A point on a star graph; `arc == 0` is the hub whatever the ray index.
    Star { ray: usize, arc: f64 },
    Node(usize),
}

impl Point {
    pub fn euclidean(coords: impl Into<Vec<f64>>) -> Self {
        Point::Euclidean(coords.into())
    }

    pub fn hub() -> Self {
        Point::Star { ray: 0, arc: 0.0 }
    }

    pub fn coords(&self) -> Option<&[f64]> {
        match self {
            Point::Euclidean(c) => Some(c),
            _ => None,
        }
    }

    pub(crate) fn expect_coords(&self) -> Result<&[f64]> {
        self.coords()
            .ok_or_else(|| Error::SpaceMismatch(format!("expected a Euclidean point, got {self:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteMetric {
    matrix: Vec<Vec<f64>>,
}

impl FiniteMetric {
    pub fn new(matrix: Vec<Vec<f64>>) -> Result<Self> {
        let m = FiniteMetric { matrix };
        m.validate()?;
        Ok(m)
    }

    /// Shortest-path metric of a weighted undirected graph.
    pub fn from_edges(nodes: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut d = vec![vec![f64::INFINITY; nodes]; nodes];
        for (i, row) in d.iter_mut().enumerate() {
            row[i] = 0.0;
        }
        for &(i, j, w) in edges {
            if i >= nodes || j >= nodes || !(w > 0.0) || !w.is_finite() {
                return Err(Error::param("edges", format!("bad edge ({i}, {j}, {w})")));
            }
            d[i][j] = d[i][j].min(w);
            d[j][i] = d[j][i].min(w);
        }
        for k in 0..nodes {
            for i in 0..nodes {
                for j in 0..nodes {
                    let via = d[i][k] + d[k][j];
                    if via < d[i][j] {
                        d[i][j] = via;
                    }
                }
            }
        }
        FiniteMetric::new(d)
    }

    pub fn len(&self) -> usize {
        self.matrix.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrix.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[i][j]
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.matrix.len();
        if n == 0 {
            return Err(Error::param("matrix", "finite metric needs at least one node"));
        }
        for (i, row) in self.matrix.iter().enumerate() {
            if row.len() != n {
                return Err(Error::param("matrix", format!("row {i} has {} entries, expected {n}", row.len())));
            }
            if row[i] != 0.0 {
                return Err(Error::param("matrix", format!("nonzero diagonal at {i}")));
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::param("matrix", format!("entry ({i}, {j}) = {v}")));
                }
                if i != j && v == 0.0 {
                    return Err(Error::param("matrix", format!("distinct nodes {i}, {j} at distance 0")));
                }
                if v != self.matrix[j][i] {
                    return Err(Error::param("matrix", format!("asymmetric at ({i}, {j})")));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if self.matrix[i][j] > self.matrix[i][k] + self.matrix[k][j] + TRIANGLE_TOL {
                        return Err(Error::param(
                            "matrix",
                            format!("triangle inequality fails for ({i}, {j}) via {k}"),
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetricSpace {
    Euclidean { dim: usize },
    StarGraph { rays: usize, max_arc: f64 },
    Finite(FiniteMetric),
}

impl MetricSpace {
    pub fn euclidean(dim: usize) -> Self {
        MetricSpace::Euclidean { dim }
    }

    pub fn star_graph(rays: usize, max_arc: f64) -> Self {
        MetricSpace::StarGraph { rays, max_arc }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            MetricSpace::Euclidean { dim } if *dim == 0 => Err(Error::param("dim", "must be at least 1")),
            MetricSpace::StarGraph { rays, .. } if *rays == 0 => Err(Error::param("rays", "must be at least 1")),
            MetricSpace::StarGraph { max_arc, .. } if !(*max_arc > 0.0) => {
                Err(Error::param("max_arc", "must be positive"))
            }
            MetricSpace::Finite(m) => m.validate(),
            _ => Ok(()),
        }
    }

    pub fn dim(&self) -> Option<usize> {
        match self {
            MetricSpace::Euclidean { dim } => Some(*dim),
            _ => None,
        }
    }

    /// Checks that `p` is a valid point of this space.
    pub fn check(&self, p: &Point) -> Result<()> {
        let ok = match (self, p) {
            (MetricSpace::Euclidean { dim }, Point::Euclidean(c)) => {
                c.len() == *dim && c.iter().all(|x| x.is_finite())
            }
            (MetricSpace::StarGraph { rays, max_arc }, Point::Star { ray, arc }) => {
                *ray < *rays && arc.is_finite() && *arc >= 0.0 && *arc <= *max_arc
            }
            (MetricSpace::Finite(m), Point::Node(i)) => *i < m.len(),
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::SpaceMismatch(format!("{p:?} is not a point of {}", self.label())))
        }
    }

    pub fn label(&self) -> String {
        match self {
            MetricSpace::Euclidean { dim } => format!("Euclidean({dim})"),
            MetricSpace::StarGraph { rays, .. } => format!("StarGraph({rays})"),
            MetricSpace::Finite(m) => format!("FiniteMetric({})", m.len()),
        }
    }

    pub fn distance(&self, p: &Point, q: &Point) -> Result<f64> {
        self.check(p)?;
        self.check(q)?;
        Ok(self.distance_unchecked(p, q))
    }

    /// Distance for points already known to belong to the space.
    pub(crate) fn distance_unchecked(&self, p: &Point, q: &Point) -> f64 {
        match (p, q) {
            (Point::Euclidean(a), Point::Euclidean(b)) => euclid(a, b),
            (Point::Star { ray: r1, arc: s }, Point::Star { ray: r2, arc: t }) => {
                if r1 == r2 {
                    (s - t).abs()
                } else {
                    s + t
                }
            }
            (Point::Node(i), Point::Node(j)) => match self {
                MetricSpace::Finite(m) => m.get(*i, *j),
                _ => f64::NAN,
            },
            _ => f64::NAN,
        }
    }

    pub fn same_point(&self, p: &Point, q: &Point) -> bool {
        match (p, q) {
            (Point::Star { arc: s, .. }, Point::Star { arc: t, .. }) if *s == 0.0 && *t == 0.0 => true,
            _ => p == q,
        }
    }

    /// All points `x` with `d(a,x) = d(a,c)` and `d(a,x) + d(x,b) = d(a,b)`.
    ///
    /// Euclidean and star-graph geodesics are unique, so those models return a
    /// single point; the finite model enumerates nodes within [`WITNESS_TOL`].
    pub fn directional_witness_set(&self, a: &Point, c: &Point, b: &Point) -> Result<Vec<Point>> {
        let dac = self.distance(a, c)?;
        let dab = self.distance(a, b)?;
        if dac == 0.0 {
            return Err(Error::Domain("d(a, c) = 0: witness set undefined".into()));
        }
        if dab + WITNESS_TOL < dac {
            return Err(Error::Domain(format!("need d(a, b) >= d(a, c), got {dab} < {dac}")));
        }
        match (self, a, b) {
            (MetricSpace::Euclidean { .. }, Point::Euclidean(pa), Point::Euclidean(pb)) => {
                let t = dac / dab;
                let x = pa.iter().zip(pb).map(|(&ai, &bi)| ai + t * (bi - ai)).collect();
                Ok(vec![Point::Euclidean(x)])
            }
            (MetricSpace::StarGraph { .. }, Point::Star { ray: ra, arc: sa }, Point::Star { ray: rb, arc: sb }) => {
                // walk the unique geodesic from a to b for a length of d(a, c)
                let x = if *sa == 0.0 {
                    Point::Star { ray: *rb, arc: dac }
                } else if *sb == 0.0 {
                    Point::Star { ray: *ra, arc: (sa - dac).max(0.0) }
                } else if ra == rb {
                    let arc = if sb >= sa { sa + dac } else { (sa - dac).max(0.0) };
                    Point::Star { ray: *ra, arc }
                } else if dac <= *sa {
                    Point::Star { ray: *ra, arc: sa - dac }
                } else {
                    Point::Star { ray: *rb, arc: dac - sa }
                };
                Ok(vec![x])
            }
            (MetricSpace::Finite(m), _, _) => Ok((0..m.len())
                .map(Point::Node)
                .filter(|x| {
                    let dax = self.distance_unchecked(a, x);
                    let dxb = self.distance_unchecked(x, b);
                    (dax - dac).abs() <= WITNESS_TOL && (dax + dxb - dab).abs() <= WITNESS_TOL
                })
                .collect()),
            _ => Err(Error::SpaceMismatch("points do not match the space".into())),
        }
    }
}

pub(crate) fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// A closed ball `{y : d(y, center) <= radius}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::param("radius", format!("must be positive and finite, got {radius}")));
        }
        Ok(Ball { center, radius })
    }

    /// Euclidean ball; panics on a non-positive radius.
    pub fn at(coords: impl Into<Vec<f64>>, radius: f64) -> Self {
        Ball::new(Point::Euclidean(coords.into()), radius).expect("invalid ball radius")
    }

    pub fn coords(&self) -> &[f64] {
        self.center.coords().expect("Euclidean ball")
    }

    pub fn scaled(&self, factor: f64) -> Ball {
        Ball {
            center: self.center.clone(),
            radius: self.radius * factor,
        }
    }

    pub fn diameter_bound(&self) -> f64 {
        2.0 * self.radius
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn euclidean_pythagoras() {
        let s = MetricSpace::euclidean(2);
        let d = s.distance(&Point::euclidean([0.0, 0.0]), &Point::euclidean([3.0, 4.0])).unwrap();
        assert_eq!(d, 5.0);
    }

    #[test]
    fn star_distance_goes_through_hub() {
        let s = MetricSpace::star_graph(3, 10.0);
        let b = Point::Star { ray: 0, arc: 1.0 };
        let c = Point::Star { ray: 1, arc: 2.0 };
        assert_eq!(s.distance(&b, &c).unwrap(), 3.0);
        assert_eq!(s.distance(&b, &Point::Star { ray: 0, arc: 4.0 }).unwrap(), 3.0);
        assert_eq!(s.distance(&Point::Star { ray: 2, arc: 0.0 }, &c).unwrap(), 2.0);
    }

    #[test]
    fn finite_identity_and_validation() {
        let m = FiniteMetric::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let s = MetricSpace::Finite(m);
        assert_eq!(s.distance(&Point::Node(1), &Point::Node(1)).unwrap(), 0.0);
        assert_eq!(s.distance(&Point::Node(0), &Point::Node(2)).unwrap(), 2.0);
        assert!(FiniteMetric::new(vec![vec![0.0, 1.0], vec![2.0, 0.0]]).is_err());
        assert!(FiniteMetric::new(vec![
            vec![0.0, 1.0, 5.0],
            vec![1.0, 0.0, 1.0],
            vec![5.0, 1.0, 0.0]
        ])
        .is_err());
    }

    #[test]
    fn mismatched_points_are_rejected() {
        let s = MetricSpace::euclidean(2);
        assert!(matches!(
            s.distance(&Point::euclidean([0.0, 0.0]), &Point::Node(0)),
            Err(Error::SpaceMismatch(_))
        ));
        assert!(s.distance(&Point::euclidean([0.0]), &Point::euclidean([0.0, 1.0])).is_err());
        let star = MetricSpace::star_graph(2, 1.0);
        assert!(star.check(&Point::Star { ray: 2, arc: 0.5 }).is_err());
        assert!(star.check(&Point::Star { ray: 0, arc: -0.5 }).is_err());
    }

    #[test]
    fn witness_euclidean_analytic() {
        let s = MetricSpace::euclidean(2);
        let w = s
            .directional_witness_set(
                &Point::euclidean([0.0, 0.0]),
                &Point::euclidean([0.0, 1.0]),
                &Point::euclidean([2.0, 0.0]),
            )
            .unwrap();
        assert_eq!(w, vec![Point::euclidean([1.0, 0.0])]);
    }

    #[test]
    fn witness_star_unequal_radii() {
        let s = MetricSpace::star_graph(3, 10.0);
        let b = Point::Star { ray: 1, arc: 2.0 };
        let c = Point::Star { ray: 2, arc: 1.0 };
        let w = s.directional_witness_set(&Point::hub(), &c, &b).unwrap();
        assert_eq!(w, vec![Point::Star { ray: 1, arc: 1.0 }]);
    }

    #[test]
    fn witness_star_from_off_hub_base() {
        let s = MetricSpace::star_graph(3, 10.0);
        let a = Point::Star { ray: 0, arc: 1.0 };
        let b = Point::Star { ray: 1, arc: 3.0 };
        for (c, expect) in [
            (Point::Star { ray: 0, arc: 1.5 }, Point::Star { ray: 0, arc: 0.5 }),
            (Point::Star { ray: 2, arc: 2.0 }, Point::Star { ray: 1, arc: 2.0 }),
            (Point::Star { ray: 0, arc: 2.5 }, Point::Star { ray: 1, arc: 0.5 }),
        ] {
            let w = s.directional_witness_set(&a, &c, &b).unwrap();
            assert_eq!(w.len(), 1);
            assert!(s.same_point(&w[0], &expect), "{w:?} vs {expect:?}");
        }
        // same ray, moving outward and inward
        let w = s
            .directional_witness_set(&a, &Point::Star { ray: 2, arc: 0.5 }, &Point::Star { ray: 0, arc: 4.0 })
            .unwrap();
        assert_eq!(w, vec![Point::Star { ray: 0, arc: 2.5 }]);
        let a = Point::Star { ray: 0, arc: 3.0 };
        let w = s
            .directional_witness_set(&a, &Point::Star { ray: 0, arc: 4.0 }, &Point::Star { ray: 0, arc: 0.5 })
            .unwrap();
        assert_eq!(w, vec![Point::Star { ray: 0, arc: 2.0 }]);
    }

    #[test]
    fn witness_finite_enumeration() {
        let m = FiniteMetric::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let s = MetricSpace::Finite(m);
        let w = s
            .directional_witness_set(&Point::Node(0), &Point::Node(1), &Point::Node(2))
            .unwrap();
        assert_eq!(w, vec![Point::Node(1)]);
    }

    #[test]
    fn witness_requires_positive_radius() {
        let s = MetricSpace::euclidean(2);
        let a = Point::euclidean([0.0, 0.0]);
        assert!(matches!(
            s.directional_witness_set(&a, &a, &Point::euclidean([1.0, 0.0])),
            Err(Error::Domain(_))
        ));
    }

    fn random_point(space: &MetricSpace, rng: &mut ChaCha8Rng) -> Point {
        match space {
            MetricSpace::Euclidean { dim } => Point::Euclidean((0..*dim).map(|_| rng.gen_range(-3.0..3.0)).collect()),
            MetricSpace::StarGraph { rays, max_arc } => Point::Star {
                ray: rng.gen_range(0..*rays),
                arc: if rng.gen_bool(0.1) { 0.0 } else { rng.gen_range(0.0..*max_arc) },
            },
            MetricSpace::Finite(m) => Point::Node(rng.gen_range(0..m.len())),
        }
    }

    #[test]
    fn metric_axioms_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let graph = FiniteMetric::from_edges(
            6,
            &[(0, 1, 1.0), (1, 2, 0.5), (2, 3, 2.0), (3, 4, 1.5), (4, 5, 0.25), (5, 0, 3.0), (1, 4, 1.0)],
        )
        .unwrap();
        let spaces = [
            MetricSpace::euclidean(1),
            MetricSpace::euclidean(3),
            MetricSpace::star_graph(5, 4.0),
            MetricSpace::Finite(graph),
        ];
        for space in &spaces {
            for _ in 0..1000 {
                let (p, q, r) = (random_point(space, &mut rng), random_point(space, &mut rng), random_point(space, &mut rng));
                let dpq = space.distance(&p, &q).unwrap();
                let dqp = space.distance(&q, &p).unwrap();
                assert!(dpq >= 0.0);
                assert_eq!(dpq, dqp);
                assert_eq!(dpq == 0.0, space.same_point(&p, &q), "{p:?} {q:?}");
                let dpr = space.distance(&p, &r).unwrap();
                let drq = space.distance(&r, &q).unwrap();
                assert!(dpq <= dpr + drq + 1e-12);
            }
        }
    }

    #[test]
    fn witnesses_satisfy_both_equalities() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let spaces = [MetricSpace::euclidean(2), MetricSpace::euclidean(4), MetricSpace::star_graph(6, 5.0)];
        for space in &spaces {
            let mut checked = 0;
            while checked < 500 {
                let (a, b, c) = (random_point(space, &mut rng), random_point(space, &mut rng), random_point(space, &mut rng));
                let dab = space.distance(&a, &b).unwrap();
                let dac = space.distance(&a, &c).unwrap();
                if dac == 0.0 || dab < dac {
                    continue;
                }
                for x in space.directional_witness_set(&a, &c, &b).unwrap() {
                    let dax = space.distance(&a, &x).unwrap();
                    let dxb = space.distance(&x, &b).unwrap();
                    assert!((dax - dac).abs() <= WITNESS_TOL, "{space:?} {a:?} {b:?} {c:?} -> {x:?}");
                    assert!((dax + dxb - dab).abs() <= WITNESS_TOL);
                }
                checked += 1;
            }
        }
    }
}
