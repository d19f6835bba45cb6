//! Open subsets of Euclidean space: finite unions of open balls, open boxes
//! and open capsules (neighbourhoods of segments).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::line_sphere_params;
use crate::metric::euclid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Component {
    Ball { center: Vec<f64>, radius: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// Points at distance `< radius` from the segment `[a, b]`.
    Capsule { a: Vec<f64>, b: Vec<f64>, radius: f64 },
}

fn dist_to_segment(x: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let mut dd = 0.0;
    let mut dx = 0.0;
    for i in 0..x.len() {
        dd += (b[i] - a[i]) * (b[i] - a[i]);
        dx += (x[i] - a[i]) * (b[i] - a[i]);
    }
    let t = if dd == 0.0 { 0.0 } else { (dx / dd).clamp(0.0, 1.0) };
    let foot: Vec<f64> = a.iter().zip(b).map(|(p, q)| p + t * (q - p)).collect();
    euclid(x, &foot)
}

impl Component {
    fn dim(&self) -> usize {
        match self {
            Component::Ball { center, .. } => center.len(),
            Component::Box { lo, .. } => lo.len(),
            Component::Capsule { a, .. } => a.len(),
        }
    }

    fn validate(&self) -> Result<()> {
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        let ok = match self {
            Component::Ball { center, radius } => finite(center) && *radius > 0.0 && radius.is_finite(),
            Component::Box { lo, hi } => {
                lo.len() == hi.len() && finite(lo) && finite(hi) && lo.iter().zip(hi).all(|(l, h)| l < h)
            }
            Component::Capsule { a, b, radius } => {
                a.len() == b.len() && finite(a) && finite(b) && *radius > 0.0 && radius.is_finite()
            }
        };
        if ok && self.dim() > 0 {
            Ok(())
        } else {
            Err(Error::Domain(format!("open set component has empty interior or bad data: {self:?}")))
        }
    }

    fn contains(&self, x: &[f64]) -> bool {
        match self {
            Component::Ball { center, radius } => euclid(center, x) < *radius,
            Component::Box { lo, hi } => x.iter().zip(lo.iter().zip(hi)).all(|(v, (l, h))| v > l && v < h),
            Component::Capsule { a, b, radius } => dist_to_segment(x, a, b) < *radius,
        }
    }

    /// Distance from the closed ball `B_r(c)` to the complement of this
    /// component; negative when the ball is not inside.
    fn clearance(&self, c: &[f64], r: f64) -> f64 {
        match self {
            Component::Ball { center, radius } => radius - euclid(center, c) - r,
            Component::Box { lo, hi } => {
                let face = c
                    .iter()
                    .zip(lo.iter().zip(hi))
                    .map(|(v, (l, h))| (v - l).min(h - v))
                    .fold(f64::INFINITY, f64::min);
                face - r
            }
            Component::Capsule { a, b, radius } => radius - dist_to_segment(c, a, b) - r,
        }
    }

    /// Parameter interval of `p + t (q - p)`, `t` in `[0, 1]`, inside this
    /// component. Components are convex so the answer is one interval.
    fn clip(&self, p: &[f64], q: &[f64]) -> Option<(f64, f64)> {
        let (t0, t1) = match self {
            Component::Ball { center, radius } => line_sphere_params(p, q, center, *radius)?,
            Component::Box { lo, hi } => {
                let mut t0 = f64::NEG_INFINITY;
                let mut t1 = f64::INFINITY;
                for i in 0..p.len() {
                    let d = q[i] - p[i];
                    if d == 0.0 {
                        if !(p[i] > lo[i] && p[i] < hi[i]) {
                            return None;
                        }
                    } else {
                        let (a, b) = ((lo[i] - p[i]) / d, (hi[i] - p[i]) / d);
                        t0 = t0.max(a.min(b));
                        t1 = t1.min(a.max(b));
                    }
                }
                (t0, t1)
            }
            Component::Capsule { a, b, radius } => {
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                let mut merge = |iv: Option<(f64, f64)>| {
                    if let Some((s, e)) = iv {
                        if e > s {
                            lo = lo.min(s);
                            hi = hi.max(e);
                        }
                    }
                };
                merge(line_sphere_params(p, q, a, *radius));
                merge(line_sphere_params(p, q, b, *radius));
                merge(cylinder_params(p, q, a, b, *radius));
                (lo, hi)
            }
        };
        let (s, e) = (t0.max(0.0), t1.min(1.0));
        (e > s).then_some((s, e))
    }
}

/// Line parameters where the point projects inside `[a, b]` and lies within
/// `radius` of the line through `a, b`.
fn cylinder_params(p: &[f64], q: &[f64], a: &[f64], b: &[f64], radius: f64) -> Option<(f64, f64)> {
    let n = p.len();
    let len = euclid(a, b);
    if len == 0.0 {
        return None;
    }
    let u: Vec<f64> = (0..n).map(|i| (b[i] - a[i]) / len).collect();
    let d: Vec<f64> = (0..n).map(|i| q[i] - p[i]).collect();
    let f: Vec<f64> = (0..n).map(|i| p[i] - a[i]).collect();
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(s, t)| s * t).sum::<f64>();
    // projection along the axis: s(t) = f.u + t d.u in [0, len]
    let (fu, du) = (dot(&f, &u), dot(&d, &u));
    let (mut t0, mut t1) = if du == 0.0 {
        if !(0.0..=len).contains(&fu) {
            return None;
        }
        (f64::NEG_INFINITY, f64::INFINITY)
    } else {
        let (x, y) = ((0.0 - fu) / du, (len - fu) / du);
        (x.min(y), x.max(y))
    };
    // perpendicular part: w(t) = (f - fu u) + t (d - du u)
    let fp: Vec<f64> = (0..n).map(|i| f[i] - fu * u[i]).collect();
    let dp: Vec<f64> = (0..n).map(|i| d[i] - du * u[i]).collect();
    let qa = dot(&dp, &dp);
    let qb = dot(&fp, &dp);
    let qc = dot(&fp, &fp) - radius * radius;
    if qa <= 1e-300 {
        if qc >= 0.0 {
            return None;
        }
    } else {
        let disc = qb * qb - qa * qc;
        if disc <= 0.0 {
            return None;
        }
        let root = disc.sqrt();
        t0 = t0.max((-qb - root) / qa);
        t1 = t1.min((-qb + root) / qa);
    }
    (t1 > t0).then_some((t0, t1))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpenSet {
    pub dim: usize,
    pub components: Vec<Component>,
}

impl OpenSet {
    pub fn empty(dim: usize) -> Self {
        OpenSet {
            dim,
            components: Vec::new(),
        }
    }

    pub fn new(dim: usize, components: Vec<Component>) -> Result<Self> {
        let set = OpenSet { dim, components };
        set.validate()?;
        Ok(set)
    }

    pub fn validate(&self) -> Result<()> {
        for c in &self.components {
            c.validate()?;
            if c.dim() != self.dim {
                return Err(Error::SpaceMismatch(format!(
                    "component of dimension {} in a {}-dimensional open set",
                    c.dim(),
                    self.dim
                )));
            }
        }
        Ok(())
    }

    pub fn ball(center: impl Into<Vec<f64>>, radius: f64) -> Result<Self> {
        let center = center.into();
        Self::new(center.len(), vec![Component::Ball { center, radius }])
    }

    pub fn boxed(lo: impl Into<Vec<f64>>, hi: impl Into<Vec<f64>>) -> Result<Self> {
        let (lo, hi) = (lo.into(), hi.into());
        Self::new(lo.len(), vec![Component::Box { lo, hi }])
    }

    /// Open `eps`-neighbourhood of a finite point set.
    pub fn neighborhood_of_points(points: &[Vec<f64>], eps: f64) -> Result<Self> {
        let dim = points.first().map_or(0, Vec::len);
        let comps = points
            .iter()
            .map(|p| Component::Ball {
                center: p.clone(),
                radius: eps,
            })
            .collect();
        Self::new(dim, comps)
    }

    /// Open `eps`-neighbourhood of a polyline.
    pub fn neighborhood_of_polyline(vertices: &[Vec<f64>], eps: f64) -> Result<Self> {
        let dim = vertices.first().map_or(0, Vec::len);
        let comps = vertices
            .windows(2)
            .map(|w| Component::Capsule {
                a: w[0].clone(),
                b: w[1].clone(),
                radius: eps,
            })
            .collect();
        Self::new(dim, comps)
    }

    pub fn union(&self, other: &OpenSet) -> Result<OpenSet> {
        if self.dim != other.dim {
            return Err(Error::SpaceMismatch("union of open sets of different dimension".into()));
        }
        let mut components = self.components.clone();
        components.extend(other.components.iter().cloned());
        Ok(OpenSet { dim: self.dim, components })
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.components.iter().any(|c| c.contains(x))
    }

    /// Distance from `B_r(c)` to the complement, measured componentwise: a
    /// ball is certified inside when some single component holds it.
    pub fn clearance(&self, c: &[f64], r: f64) -> f64 {
        self.components
            .iter()
            .map(|k| k.clearance(c, r))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn contains_ball(&self, c: &[f64], r: f64, margin: f64) -> bool {
        self.clearance(c, r) >= margin && self.clearance(c, r) > 0.0
    }

    /// Merged parameter intervals of `[p, q]` lying in the set.
    pub fn clip_segment(&self, p: &[f64], q: &[f64]) -> Vec<(f64, f64)> {
        let mut ivs: Vec<(f64, f64)> = self.components.iter().filter_map(|c| c.clip(p, q)).collect();
        ivs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for (s, e) in ivs {
            match merged.last_mut() {
                Some(last) if s <= last.1 => last.1 = last.1.max(e),
                _ => merged.push((s, e)),
            }
        }
        merged
    }

    /// Axis-aligned box containing the set.
    pub fn bounding_box(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for c in &self.components {
            let (l, h): (Vec<f64>, Vec<f64>) = match c {
                Component::Ball { center, radius } => {
                    (center.iter().map(|x| x - radius).collect(), center.iter().map(|x| x + radius).collect())
                }
                Component::Box { lo, hi } => (lo.clone(), hi.clone()),
                Component::Capsule { a, b, radius } => (
                    a.iter().zip(b).map(|(x, y)| x.min(*y) - radius).collect(),
                    a.iter().zip(b).map(|(x, y)| x.max(*y) + radius).collect(),
                ),
            };
            for i in 0..self.dim {
                lo[i] = lo[i].min(l[i]);
                hi[i] = hi[i].max(h[i]);
            }
        }
        (!self.components.is_empty()).then_some((lo, hi))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn membership_is_strict() {
        let b = OpenSet::ball([0.0, 0.0], 1.0).unwrap();
        assert!(b.contains(&[0.5, 0.5]));
        assert!(!b.contains(&[1.0, 0.0]));
        let bx = OpenSet::boxed([0.0, 0.0], [1.0, 1.0]).unwrap();
        assert!(!bx.contains(&[0.0, 0.5]));
        let cap = OpenSet::neighborhood_of_polyline(&[vec![0.0, 0.0], vec![1.0, 0.0]], 0.1).unwrap();
        assert!(cap.contains(&[1.05, 0.0]));
        assert!(!cap.contains(&[0.5, 0.1]));
    }

    #[test]
    fn clearance_values() {
        let b = OpenSet::ball([0.0, 0.0], 1.0).unwrap();
        assert!((b.clearance(&[0.5, 0.0], 0.25) - 0.25).abs() < 1e-15);
        let bx = OpenSet::boxed([0.0, 0.0], [1.0, 1.0]).unwrap();
        assert!((bx.clearance(&[0.3, 0.5], 0.1) - 0.2).abs() < 1e-15);
        assert!(!bx.contains_ball(&[0.05, 0.5], 0.1, 0.0));
    }

    #[test]
    fn empty_interior_rejected() {
        assert!(OpenSet::boxed([0.0, 0.0], [0.0, 1.0]).is_err());
        assert!(OpenSet::ball([0.0], 0.0).is_err());
    }

    // Oracle: fine parameter sampling plus bisection at every sign change.
    fn clip_oracle(set: &OpenSet, p: &[f64], q: &[f64]) -> f64 {
        let at = |t: f64| -> Vec<f64> { p.iter().zip(q).map(|(a, b)| a + t * (b - a)).collect() };
        let n = 4000;
        let mut total = 0.0;
        let mut prev_t = 0.0;
        let mut prev_in = set.contains(&at(0.0));
        for k in 1..=n {
            let t = k as f64 / n as f64;
            let now_in = set.contains(&at(t));
            let edge = if now_in != prev_in {
                let (mut a, mut b) = (prev_t, t);
                for _ in 0..60 {
                    let m = 0.5 * (a + b);
                    if set.contains(&at(m)) == prev_in {
                        a = m
                    } else {
                        b = m
                    }
                }
                0.5 * (a + b)
            } else {
                t
            };
            if prev_in {
                total += edge - prev_t;
            }
            if now_in {
                total += t - edge;
            }
            prev_t = t;
            prev_in = now_in;
        }
        total
    }

    #[test]
    fn clipping_matches_bisection_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..150 {
            let mut comps = Vec::new();
            for _ in 0..rng.gen_range(1..4) {
                let c = vec![rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)];
                comps.push(match rng.gen_range(0..3) {
                    0 => Component::Ball {
                        center: c,
                        radius: rng.gen_range(0.05..0.4),
                    },
                    1 => Component::Box {
                        hi: vec![c[0] + rng.gen_range(0.05..0.5), c[1] + rng.gen_range(0.05..0.5)],
                        lo: c,
                    },
                    _ => Component::Capsule {
                        b: vec![rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)],
                        a: c,
                        radius: rng.gen_range(0.02..0.3),
                    },
                });
            }
            let set = OpenSet::new(2, comps).unwrap();
            let p = [rng.gen_range(-0.2..1.2), rng.gen_range(-0.2..1.2)];
            let q = [rng.gen_range(-0.2..1.2), rng.gen_range(-0.2..1.2)];
            let got: f64 = set.clip_segment(&p, &q).iter().map(|(s, e)| e - s).sum();
            let want = clip_oracle(&set, &p, &q);
            assert!((got - want).abs() < 1e-6, "{got} vs {want} for {set:?} {p:?} {q:?}");
        }
    }
}
