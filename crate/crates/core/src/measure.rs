//! Signed measures made of atoms and constant-density polylines, evaluated
//! exactly on closed balls.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{euclid, Ball, MetricSpace, Point};
use crate::region::OpenSet;

/// Slack for closed-ball membership of atoms.
pub const BOUNDARY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub position: Point,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolylineChain {
    pub vertices: Vec<Vec<f64>>,
    pub density: f64,
}

impl PolylineChain {
    pub fn new(vertices: Vec<Vec<f64>>, density: f64) -> Result<Self> {
        let chain = PolylineChain { vertices, density };
        chain.validate()?;
        Ok(chain)
    }

    pub fn segment(a: impl Into<Vec<f64>>, b: impl Into<Vec<f64>>, density: f64) -> Result<Self> {
        Self::new(vec![a.into(), b.into()], density)
    }

    fn validate(&self) -> Result<()> {
        if self.vertices.len() < 2 {
            return Err(Error::Domain("a chain needs at least two vertices".into()));
        }
        if !(self.density.is_finite() && self.density != 0.0) {
            return Err(Error::param("density", format!("must be finite and nonzero, got {}", self.density)));
        }
        let dim = self.vertices[0].len();
        for (i, v) in self.vertices.iter().enumerate() {
            if v.len() != dim || v.iter().any(|x| !x.is_finite()) {
                return Err(Error::Domain(format!("chain vertex {i} is malformed")));
            }
        }
        for (i, w) in self.vertices.windows(2).enumerate() {
            if euclid(&w[0], &w[1]) == 0.0 {
                return Err(Error::Domain(format!("chain vertices {i} and {} coincide", i + 1)));
            }
        }
        Ok(())
    }

    pub fn segments(&self) -> impl Iterator<Item = (&[f64], &[f64])> + '_ {
        self.vertices.windows(2).map(|w| (w[0].as_slice(), w[1].as_slice()))
    }

    pub fn length(&self) -> f64 {
        self.segments().map(|(a, b)| euclid(a, b)).sum()
    }

    /// `count` points equally spaced in arc length, endpoints included.
    pub fn sample(&self, count: usize) -> Vec<Vec<f64>> {
        match count {
            0 => Vec::new(),
            1 => vec![self.point_at(0.5 * self.length())],
            _ => {
                let len = self.length();
                (0..count).map(|k| self.point_at(len * k as f64 / (count - 1) as f64)).collect()
            }
        }
    }

    /// Point at arc length `s` from the first vertex (clamped).
    pub fn point_at(&self, s: f64) -> Vec<f64> {
        let mut left = s.max(0.0);
        for (a, b) in self.segments() {
            let l = euclid(a, b);
            if left <= l {
                let t = left / l;
                return a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect();
            }
            left -= l;
        }
        self.vertices.last().cloned().unwrap_or_default()
    }
}

/// Parameters `t` on segment `p + t (q - p)` where the line meets the sphere
/// `|x - c| = r`, unclamped. `None` if the line misses the closed ball.
pub(crate) fn line_sphere_params(p: &[f64], q: &[f64], c: &[f64], r: f64) -> Option<(f64, f64)> {
    let n = p.len();
    let mut a = 0.0;
    let mut b = 0.0;
    for i in 0..n {
        let d = q[i] - p[i];
        a += d * d;
        b += (c[i] - p[i]) * d;
    }
    // foot of the perpendicular, then the half chord around it
    let t = b / a;
    let mut h2 = 0.0;
    for i in 0..n {
        let e = p[i] + t * (q[i] - p[i]) - c[i];
        h2 += e * e;
    }
    if h2 > r * r {
        return None;
    }
    let w = ((r - h2.sqrt()) * (r + h2.sqrt())).sqrt() / a.sqrt();
    Some((t - w, t + w))
}

/// Length of segment `[p, q]` inside the closed ball `B_r(c)`.
pub fn segment_chord(p: &[f64], q: &[f64], c: &[f64], r: f64) -> f64 {
    match line_sphere_params(p, q, c, r) {
        None => 0.0,
        Some((t0, t1)) => {
            let lo = t0.max(0.0);
            let hi = t1.min(1.0);
            if hi > lo {
                (hi - lo) * euclid(p, q)
            } else {
                0.0
            }
        }
    }
}

/// Correctly rounded sum of finite values (Shewchuk partials with a
/// half-even final correction).
pub fn exact_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut partials: Vec<f64> = Vec::new();
    for mut x in values {
        let mut i = 0;
        for j in 0..partials.len() {
            let mut y = partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        partials.truncate(i);
        partials.push(x);
    }
    let mut n = partials.len();
    if n == 0 {
        return 0.0;
    }
    n -= 1;
    let mut hi = partials[n];
    let mut lo = 0.0;
    while n > 0 {
        let x = hi;
        n -= 1;
        let y = partials[n];
        hi = x + y;
        lo = y - (hi - x);
        if lo != 0.0 {
            break;
        }
    }
    if n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0)) {
        let y = lo * 2.0;
        let x = hi + y;
        if y == x - hi {
            hi = x;
        }
    }
    hi
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignedMeasure {
    pub space: MetricSpace,
    #[serde(default)]
    pub atoms: Vec<Atom>,
    #[serde(default)]
    pub chains: Vec<PolylineChain>,
}

impl SignedMeasure {
    pub fn zero(space: MetricSpace) -> Self {
        SignedMeasure {
            space,
            atoms: Vec::new(),
            chains: Vec::new(),
        }
    }

    /// Unit Dirac mass at `x` in Euclidean space.
    pub fn dirac(x: impl Into<Vec<f64>>) -> Self {
        let x = x.into();
        let space = MetricSpace::euclidean(x.len());
        SignedMeasure::zero(space).with_atom(Point::Euclidean(x), 1.0).expect("valid dirac")
    }

    pub fn with_atom(mut self, position: Point, weight: f64) -> Result<Self> {
        self.push_atom(position, weight)?;
        Ok(self)
    }

    pub fn with_chain(mut self, chain: PolylineChain) -> Result<Self> {
        self.push_chain(chain)?;
        Ok(self)
    }

    pub fn push_atom(&mut self, position: Point, weight: f64) -> Result<()> {
        self.space.check(&position)?;
        if !(weight.is_finite() && weight != 0.0) {
            return Err(Error::param("weight", format!("must be finite and nonzero, got {weight}")));
        }
        self.atoms.push(Atom { position, weight });
        Ok(())
    }

    pub fn push_chain(&mut self, chain: PolylineChain) -> Result<()> {
        chain.validate()?;
        match self.space.dim() {
            Some(n) if n == chain.vertices[0].len() => {}
            Some(n) => {
                return Err(Error::SpaceMismatch(format!(
                    "chain of dimension {} in {n}-dimensional space",
                    chain.vertices[0].len()
                )))
            }
            None => return Err(Error::SpaceMismatch("chains need a Euclidean space".into())),
        }
        self.chains.push(chain);
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.space.validate()?;
        let mut copy = SignedMeasure::zero(self.space.clone());
        for a in &self.atoms {
            copy.push_atom(a.position.clone(), a.weight)?;
        }
        for c in &self.chains {
            copy.push_chain(c.clone())?;
        }
        Ok(())
    }

    pub fn is_nonnegative(&self) -> bool {
        self.atoms.iter().all(|a| a.weight > 0.0) && self.chains.iter().all(|c| c.density > 0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty() && self.chains.is_empty()
    }

    /// `mu(B)` for the closed ball `B`.
    pub fn ball_mass(&self, ball: &Ball) -> Result<f64> {
        self.space.check(&ball.center)?;
        Ok(self.ball_mass_unchecked(&ball.center, ball.radius))
    }

    /// Atoms counted by [`SignedMeasure::ball_mass`] for the closed ball.
    pub fn atoms_in_ball<'a>(&'a self, ball: &'a Ball) -> impl Iterator<Item = &'a Atom> + 'a {
        self.atoms
            .iter()
            .filter(move |a| self.space.distance_unchecked(&ball.center, &a.position) <= ball.radius + BOUNDARY_SLACK)
    }

    pub(crate) fn ball_mass_unchecked(&self, center: &Point, r: f64) -> f64 {
        let mut total = 0.0;
        for a in &self.atoms {
            if self.space.distance_unchecked(center, &a.position) <= r + BOUNDARY_SLACK {
                total += a.weight;
            }
        }
        if let Some(c) = center.coords() {
            for chain in &self.chains {
                let len: f64 = chain.segments().map(|(p, q)| segment_chord(p, q, c, r)).sum();
                total += len * chain.density;
            }
        }
        total
    }

    /// Hahn decomposition `(mu+, mu-)`, both nonnegative.
    pub fn hahn_split(&self) -> (SignedMeasure, SignedMeasure) {
        let mut plus = SignedMeasure::zero(self.space.clone());
        let mut minus = SignedMeasure::zero(self.space.clone());
        for a in &self.atoms {
            let part = if a.weight > 0.0 { &mut plus } else { &mut minus };
            part.atoms.push(Atom {
                position: a.position.clone(),
                weight: a.weight.abs(),
            });
        }
        for c in &self.chains {
            let part = if c.density > 0.0 { &mut plus } else { &mut minus };
            part.chains.push(PolylineChain {
                vertices: c.vertices.clone(),
                density: c.density.abs(),
            });
        }
        (plus, minus)
    }

    /// Total variation measure `|mu| = mu+ + mu-`.
    pub fn variation(&self) -> SignedMeasure {
        let (mut plus, minus) = self.hahn_split();
        plus.atoms.extend(minus.atoms);
        plus.chains.extend(minus.chains);
        plus
    }

    /// `mu(region)`, or the mass of the whole space when `region` is `None`.
    pub fn total_mass(&self, region: Option<&OpenSet>) -> Result<f64> {
        let Some(region) = region else {
            let atoms: f64 = self.atoms.iter().map(|a| a.weight).sum();
            let chains: f64 = self.chains.iter().map(|c| c.length() * c.density).sum();
            return Ok(atoms + chains);
        };
        let mut total = 0.0;
        for a in &self.atoms {
            if region.contains(a.position.expect_coords()?) {
                total += a.weight;
            }
        }
        for chain in &self.chains {
            for (p, q) in chain.segments() {
                let l = euclid(p, q);
                let inside: f64 = region.clip_segment(p, q).iter().map(|(t0, t1)| t1 - t0).sum();
                total += inside * l * chain.density;
            }
        }
        Ok(total)
    }

    /// Support description: atom positions and chain vertices.
    pub fn atom_points(&self) -> Vec<Point> {
        self.atoms.iter().map(|a| a.position.clone()).collect()
    }

    /// Atom positions plus `per_chain` arc-length samples on every chain.
    pub fn support_sample(&self, per_chain: usize) -> Vec<Point> {
        let mut pts = self.atom_points();
        for c in &self.chains {
            pts.extend(c.sample(per_chain).into_iter().map(Point::Euclidean));
        }
        pts
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReferenceKind {
    Lebesgue { dim: usize },
    SelfMeasure { measure: SignedMeasure },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceMeasure {
    #[serde(flatten)]
    pub kind: ReferenceKind,
    pub alpha: f64,
    pub gamma: f64,
}

/// Outcome of [`gamma_for_reference`], with the sampling grid it rests on.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaEstimate {
    pub gamma: f64,
    /// Exact for Lebesgue; empirical otherwise.
    pub exact: bool,
    pub radii: Vec<f64>,
    pub centers: usize,
    pub note: String,
}

/// Radii used to sample the small-scale ratio of a self-referenced measure.
pub const GAMMA_RADII: [f64; 4] = [1e-2, 1e-3, 1e-4, 1e-5];
pub const GAMMA_CENTERS: usize = 50;

pub fn gamma_for_reference(kind: &ReferenceKind, alpha: f64) -> Result<GammaEstimate> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::param("alpha", format!("must lie in (0, 1], got {alpha}")));
    }
    match kind {
        ReferenceKind::Lebesgue { dim } => {
            if *dim == 0 {
                return Err(Error::param("dim", "must be at least 1"));
            }
            Ok(GammaEstimate {
                gamma: alpha.powi(-(*dim as i32)),
                exact: true,
                radii: Vec::new(),
                centers: 0,
                note: "volume scaling ratio".into(),
            })
        }
        ReferenceKind::SelfMeasure { measure } => {
            if !measure.is_nonnegative() || measure.is_zero() {
                return Err(Error::Domain("self reference must be a nonzero nonnegative measure".into()));
            }
            let centers = support_centers(measure, GAMMA_CENTERS);
            let mut gamma: f64 = 1.0;
            for x in &centers {
                for &r in &GAMMA_RADII {
                    let big = measure.ball_mass_unchecked(x, r);
                    let small = measure.ball_mass_unchecked(x, alpha * r);
                    if small > 0.0 {
                        gamma = gamma.max(big / small);
                    }
                }
            }
            Ok(GammaEstimate {
                gamma,
                exact: false,
                radii: GAMMA_RADII.to_vec(),
                centers: centers.len(),
                note: "sampled on the support only; the measure vanishes on balls away from it".into(),
            })
        }
    }
}

/// Up to `count` points on the support: every atom, then chain samples.
fn support_centers(measure: &SignedMeasure, count: usize) -> Vec<Point> {
    let mut pts = measure.atom_points();
    pts.truncate(count);
    let left = count.saturating_sub(pts.len());
    let n_chains = measure.chains.len();
    for (i, c) in measure.chains.iter().enumerate() {
        let share = left / n_chains + usize::from(i < left % n_chains);
        pts.extend(c.sample(share).into_iter().map(Point::Euclidean));
    }
    pts
}

impl ReferenceMeasure {
    pub fn lebesgue(dim: usize, alpha: f64) -> Result<Self> {
        let kind = ReferenceKind::Lebesgue { dim };
        let gamma = gamma_for_reference(&kind, alpha)?.gamma;
        Ok(ReferenceMeasure { kind, alpha, gamma })
    }

    pub fn self_measure(measure: SignedMeasure, alpha: f64) -> Result<Self> {
        let kind = ReferenceKind::SelfMeasure { measure };
        let gamma = gamma_for_reference(&kind, alpha)?.gamma;
        Ok(ReferenceMeasure { kind, alpha, gamma })
    }
}
