//! Premeasures on closed balls and sampled certification of two-sided bounds
//! against a measure.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::SignedMeasure;
use crate::metric::{euclid, Ball, Point};
use crate::quadrature;

/// Absolute tolerance for the chain part of averaged premeasures.
pub const QUAD_TOL: f64 = 1e-10;
/// Slack allowed on certificate margins.
pub const MARGIN_TOL: f64 = 1e-12;
/// Number of distinct noise levels; the extremes `1/C` and `C` are both hit.
pub const NOISE_LEVELS: u64 = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Plus,
    Minus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PremeasureKind {
    /// `q(B) = mu(B)`.
    Exact,
    /// `q(B_r) = (1/r) int_0^r mu(B_s) ds`.
    Averaged,
    /// `q(B_r) = (1/r) int_0^r mu(B_s) w(s/r) ds` with `w` a step function on
    /// a uniform partition of (0, 1).
    Kernel { weights: Vec<f64> },
    /// `mu(B)` times a hashed multiplier in `[1/c, c]`.
    Noisy { c: f64, seed: u64 },
    /// Positive or negative part of a signed base premeasure.
    SignedPart { sign: Sign, base: Box<PremeasureKind> },
}

impl PremeasureKind {
    pub fn validate(&self) -> Result<()> {
        match self {
            PremeasureKind::Exact | PremeasureKind::Averaged => Ok(()),
            PremeasureKind::Kernel { weights } => {
                if weights.is_empty() {
                    return Err(Error::param("weights", "kernel needs at least one piece"));
                }
                if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
                    return Err(Error::param("weights", "kernel weights must be finite and nonnegative"));
                }
                if weights.windows(2).any(|w| w[1] > w[0]) {
                    return Err(Error::param("weights", "kernel must be nonincreasing"));
                }
                let mass = weights.iter().sum::<f64>() / weights.len() as f64;
                if (mass - 1.0).abs() > 1e-12 {
                    return Err(Error::param("weights", format!("kernel integrates to {mass}, not 1")));
                }
                Ok(())
            }
            PremeasureKind::Noisy { c, .. } => {
                if c.is_finite() && *c >= 1.0 {
                    Ok(())
                } else {
                    Err(Error::param("c", format!("noise bound must be >= 1, got {c}")))
                }
            }
            PremeasureKind::SignedPart { base, .. } => match base.as_ref() {
                PremeasureKind::Exact | PremeasureKind::Averaged | PremeasureKind::Kernel { .. } => base.validate(),
                other => Err(Error::param(
                    "base",
                    format!("signed part needs an exact, averaged or kernel base, got {other:?}"),
                )),
            },
        }
    }

    pub fn label(&self) -> String {
        match self {
            PremeasureKind::Exact => "exact".into(),
            PremeasureKind::Averaged => "averaged".into(),
            PremeasureKind::Kernel { weights } => format!("kernel[{}]", weights.len()),
            PremeasureKind::Noisy { c, seed } => format!("noisy(c={c},seed={seed})"),
            PremeasureKind::SignedPart { sign, base } => {
                let s = if *sign == Sign::Plus { "+" } else { "-" };
                format!("({}){s}", base.label())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Premeasure {
    pub kind: PremeasureKind,
    pub measure: SignedMeasure,
}

const AVERAGED_WEIGHTS: [f64; 1] = [1.0];

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic multiplier `c^(2u - 1)`, `u` in `{0, 1/8, ..., 1}`, keyed on
/// the ball and the seed.
pub fn noise_multiplier(center: &Point, radius: f64, c: f64, seed: u64) -> f64 {
    let mut h = splitmix(seed);
    let mut mix = |w: u64| h = splitmix(h ^ w);
    match center {
        Point::Euclidean(x) => x.iter().for_each(|v| mix(v.to_bits())),
        Point::Star { ray, arc } => {
            mix(*ray as u64);
            mix(arc.to_bits());
        }
        Point::Node(i) => mix(*i as u64),
    }
    mix(radius.to_bits());
    let u = (h % NOISE_LEVELS) as f64 / (NOISE_LEVELS - 1) as f64;
    c.powf(2.0 * u - 1.0)
}

impl Premeasure {
    pub fn new(kind: PremeasureKind, measure: SignedMeasure) -> Result<Self> {
        kind.validate()?;
        Ok(Premeasure { kind, measure })
    }

    pub fn averaged(measure: SignedMeasure) -> Self {
        Premeasure {
            kind: PremeasureKind::Averaged,
            measure,
        }
    }

    pub fn exact(measure: SignedMeasure) -> Self {
        Premeasure {
            kind: PremeasureKind::Exact,
            measure,
        }
    }

    /// The `(+, -)` pair of signed parts over the same base rule.
    pub fn signed_pair(base: PremeasureKind, measure: SignedMeasure) -> Result<(Premeasure, Premeasure)> {
        let part = |sign| {
            Premeasure::new(
                PremeasureKind::SignedPart {
                    sign,
                    base: Box::new(base.clone()),
                },
                measure.clone(),
            )
        };
        Ok((part(Sign::Plus)?, part(Sign::Minus)?))
    }

    pub fn evaluate(&self, ball: &Ball) -> Result<f64> {
        if !(ball.radius > 0.0 && ball.radius.is_finite()) {
            return Err(Error::param("radius", format!("must be positive and finite, got {}", ball.radius)));
        }
        self.measure.space.check(&ball.center)?;
        Ok(self.eval_unchecked(&ball.center, ball.radius))
    }

    pub(crate) fn eval_unchecked(&self, center: &Point, r: f64) -> f64 {
        self.eval_kind(&self.kind, center, r)
    }

    fn eval_kind(&self, kind: &PremeasureKind, center: &Point, r: f64) -> f64 {
        match kind {
            PremeasureKind::Exact => self.measure.ball_mass_unchecked(center, r),
            PremeasureKind::Averaged => self.kernel_average(&AVERAGED_WEIGHTS, center, r),
            PremeasureKind::Kernel { weights } => self.kernel_average(weights, center, r),
            PremeasureKind::Noisy { c, seed } => {
                self.measure.ball_mass_unchecked(center, r) * noise_multiplier(center, r, *c, *seed)
            }
            PremeasureKind::SignedPart { sign, base } => {
                let v = self.eval_kind(base, center, r);
                match sign {
                    Sign::Plus => v.max(0.0),
                    Sign::Minus => (-v).max(0.0),
                }
            }
        }
    }

    fn kernel_average(&self, weights: &[f64], center: &Point, r: f64) -> f64 {
        let m = weights.len();
        let piece = |k: usize| (k as f64 / m as f64 * r, (k + 1) as f64 / m as f64 * r);
        let mut total = 0.0;
        for atom in &self.measure.atoms {
            let d = self.measure.space.distance_unchecked(center, &atom.position);
            if d >= r {
                continue;
            }
            let mut acc = 0.0;
            for (k, &w) in weights.iter().enumerate() {
                let (a, b) = piece(k);
                let (lo, hi) = (d.max(a), if k + 1 == m { r } else { b });
                if hi > lo {
                    acc += (hi - lo) / r * w;
                }
            }
            total += atom.weight * acc;
        }
        if let Some(c) = center.coords() {
            for chain in &self.measure.chains {
                let mut breaks: Vec<f64> = (1..m).map(|k| piece(k).0).collect();
                let mut near = false;
                for (p, q) in chain.segments() {
                    let (h, dp, dq) = segment_distances(p, q, c);
                    if h < r {
                        near = true;
                        breaks.extend([h, dp, dq]);
                    }
                }
                if !near {
                    continue;
                }
                let omega = |s: f64| weights[((s / r * m as f64) as usize).min(m - 1)];
                let f = |s: f64| {
                    let len: f64 = chain.segments().map(|(p, q)| crate::measure::segment_chord(p, q, c, s)).sum();
                    omega(s) * len / r
                };
                let tol = QUAD_TOL / chain.density.abs();
                total += chain.density * quadrature::integrate(f, 0.0, r, &breaks, tol).value;
            }
        }
        total
    }

    /// Kernel average computed by quadrature of `s -> mu(B_s)` throughout,
    /// atoms included. Cross-check for the closed forms.
    pub fn average_by_quadrature(&self, ball: &Ball) -> Result<f64> {
        let weights: &[f64] = match &self.kind {
            PremeasureKind::Averaged => &AVERAGED_WEIGHTS,
            PremeasureKind::Kernel { weights } => weights,
            _ => return Err(Error::Domain("quadrature path applies to averaged or kernel premeasures".into())),
        };
        self.measure.space.check(&ball.center)?;
        let (center, r) = (&ball.center, ball.radius);
        let m = weights.len();
        let mut breaks: Vec<f64> = (1..m).map(|k| k as f64 / m as f64 * r).collect();
        for a in &self.measure.atoms {
            breaks.push(self.measure.space.distance_unchecked(center, &a.position));
        }
        if let Some(c) = center.coords() {
            for chain in &self.measure.chains {
                for (p, q) in chain.segments() {
                    let (h, dp, dq) = segment_distances(p, q, c);
                    breaks.extend([h, dp, dq]);
                }
            }
        }
        let f = |s: f64| weights[((s / r * m as f64) as usize).min(m - 1)] * self.measure.ball_mass_unchecked(center, s) / r;
        Ok(quadrature::integrate(f, 0.0, r, &breaks, QUAD_TOL).value)
    }
}

/// Distance from `c` to the segment, and to its two endpoints.
fn segment_distances(p: &[f64], q: &[f64], c: &[f64]) -> (f64, f64, f64) {
    let mut dd = 0.0;
    let mut dx = 0.0;
    for i in 0..p.len() {
        dd += (q[i] - p[i]) * (q[i] - p[i]);
        dx += (c[i] - p[i]) * (q[i] - p[i]);
    }
    let t = (dx / dd).clamp(0.0, 1.0);
    let foot: Vec<f64> = p.iter().zip(q).map(|(a, b)| a + t * (b - a)).collect();
    (euclid(c, &foot), euclid(c, p), euclid(c, q))
}

/// Centers and radii at which a certificate is evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSpec {
    pub centers: Vec<Point>,
    pub radii: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCertificate {
    pub alpha: f64,
    pub c: f64,
    pub r0: f64,
    /// Minimum over samples of `q(B_r) - mu(B_{alpha r}) / C`.
    pub worst_lower_margin: f64,
    /// Minimum over samples of `C mu(B_r) - q(B_r)`.
    pub worst_upper_margin: f64,
    pub samples: usize,
    pub n_centers: usize,
    pub radii: Vec<f64>,
    pub passed: bool,
}

fn check_constants(alpha: f64, c: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::param("alpha", format!("must lie in (0, 1], got {alpha}")));
    }
    if !(c >= 1.0 && c.is_finite()) {
        return Err(Error::param("C", format!("must be finite and >= 1, got {c}")));
    }
    Ok(())
}

fn certificate(
    alpha: f64,
    c: f64,
    r0: f64,
    spec: &SampleSpec,
    mut slack: impl FnMut(&Point, f64) -> (f64, f64),
) -> BoundCertificate {
    let mut lower = f64::INFINITY;
    let mut upper = f64::INFINITY;
    let mut samples = 0;
    for x in &spec.centers {
        for &r in spec.radii.iter().filter(|&&r| r > 0.0 && r < r0) {
            let (l, u) = slack(x, r);
            lower = lower.min(l);
            upper = upper.min(u);
            samples += 1;
        }
    }
    BoundCertificate {
        alpha,
        c,
        r0,
        worst_lower_margin: lower,
        worst_upper_margin: upper,
        samples,
        n_centers: spec.centers.len(),
        radii: spec.radii.clone(),
        passed: lower >= -MARGIN_TOL && upper >= -MARGIN_TOL,
    }
}

/// Checks `mu(B_{alpha r})/C <= q(B_r) <= C mu(B_r)` on every sample with `r < r0`.
pub fn certify_bounds(
    q: &Premeasure,
    mu: &SignedMeasure,
    alpha: f64,
    c: f64,
    r0: f64,
    spec: &SampleSpec,
) -> Result<BoundCertificate> {
    check_constants(alpha, c)?;
    if !mu.is_nonnegative() {
        return Err(Error::Domain("bound certification needs a nonnegative measure".into()));
    }
    if spec.centers.is_empty() || spec.radii.is_empty() {
        return Err(Error::Domain("empty sample specification".into()));
    }
    for x in &spec.centers {
        mu.space.check(x)?;
        q.measure.space.check(x)?;
    }
    Ok(certificate(alpha, c, r0, spec, |x, r| {
        let v = q.eval_unchecked(x, r);
        let low = mu.ball_mass_unchecked(x, alpha * r) / c;
        let up = c * mu.ball_mass_unchecked(x, r);
        (v - low, up - v)
    }))
}

/// Signed variant: `mu+(B_{alpha r})/C - mu-(B_r) <= q+(B_r) <= C mu+(B_r)`,
/// and the same with the roles of `+` and `-` exchanged for `q-`.
pub fn certify_signed_bounds(
    q_plus: &Premeasure,
    q_minus: &Premeasure,
    mu: &SignedMeasure,
    alpha: f64,
    c: f64,
    spec: &SampleSpec,
) -> Result<(BoundCertificate, BoundCertificate)> {
    check_constants(alpha, c)?;
    if spec.centers.is_empty() || spec.radii.is_empty() {
        return Err(Error::Domain("empty sample specification".into()));
    }
    for x in &spec.centers {
        mu.space.check(x)?;
    }
    let (plus, minus) = mu.hahn_split();
    let one = |q: &Premeasure, same: &SignedMeasure, other: &SignedMeasure| {
        certificate(alpha, c, f64::INFINITY, spec, |x, r| {
            let v = q.eval_unchecked(x, r);
            let low = same.ball_mass_unchecked(x, alpha * r) / c - other.ball_mass_unchecked(x, r);
            let up = c * same.ball_mass_unchecked(x, r);
            (v - low, up - v)
        })
    };
    Ok((one(q_plus, &plus, &minus), one(q_minus, &minus, &plus)))
}
