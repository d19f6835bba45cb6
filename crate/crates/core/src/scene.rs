//! Scene files: the measure, reference, premeasure, sets, schedules and
//! solver settings a scenario runs on.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::covering::{check_schedule, CoverStrategy};
use crate::error::{Error, Result};
use crate::measure::{Atom, PolylineChain, ReferenceMeasure, SignedMeasure};
use crate::metric::{MetricSpace, Point};
use crate::packing::{CompactSet, PackingStrategy, EXACT_PACKING_LIMIT};
use crate::premeasure::{Premeasure, PremeasureKind};
use crate::region::OpenSet;
use crate::solver::set_cover::CoverLimits;

pub const DEFAULT_DELTAS: [f64; 5] = [0.2, 0.1, 0.05, 0.02, 0.01];
pub const DEFAULT_EPS: [f64; 3] = [0.1, 0.05, 0.02];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scene {
    pub space: MetricSpace,
    #[serde(default)]
    pub measure: MeasureSpec,
    #[serde(default)]
    pub reference: Option<SceneReference>,
    #[serde(default)]
    pub premeasure: ScenePremeasure,
    #[serde(default)]
    pub sets: Vec<NamedSet>,
    #[serde(default)]
    pub schedules: Schedules,
    #[serde(default)]
    pub solver: SolverParams,
    pub seed: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSpec {
    #[serde(default)]
    pub atoms: Vec<Atom>,
    #[serde(default)]
    pub chains: Vec<PolylineChain>,
    /// Random atomic instances drawn from the scene seed, used instead of
    /// the explicit atoms by the multi-instance scenarios.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random: Option<RandomAtoms>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomAtoms {
    pub instances: usize,
    pub atoms: usize,
    #[serde(default = "default_separation")]
    pub min_separation: f64,
    #[serde(default = "default_weights")]
    pub weight_range: [f64; 2],
    #[serde(default = "default_box")]
    pub lo: Vec<f64>,
    #[serde(default = "default_box_hi")]
    pub hi: Vec<f64>,
}

fn default_separation() -> f64 {
    0.05
}
fn default_weights() -> [f64; 2] {
    [0.1, 2.0]
}
fn default_box() -> Vec<f64> {
    vec![0.0, 0.0]
}
fn default_box_hi() -> Vec<f64> {
    vec![1.0, 1.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SceneReferenceKind {
    Lebesgue { dim: usize },
    /// The scene measure itself.
    #[serde(rename = "self")]
    SelfMeasure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneReference {
    #[serde(flatten)]
    pub kind: SceneReferenceKind,
    pub alpha: f64,
    /// Overrides the computed ratio bound when given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenePremeasure {
    #[serde(flatten)]
    pub kind: PremeasureKind,
    #[serde(default)]
    pub certificate: CertificateSpec,
}

impl Default for ScenePremeasure {
    fn default() -> Self {
        ScenePremeasure {
            kind: PremeasureKind::Averaged,
            certificate: CertificateSpec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateSpec {
    pub c: f64,
    pub radii: Vec<f64>,
    /// Radius cap; absent means no cap.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r0: Option<f64>,
    /// Samples per chain used as certificate centres.
    #[serde(default = "default_per_chain")]
    pub per_chain: usize,
}

fn default_per_chain() -> usize {
    25
}

impl Default for CertificateSpec {
    fn default() -> Self {
        CertificateSpec {
            c: 2.0,
            radii: vec![0.001, 0.01, 0.05, 0.1],
            r0: None,
            per_chain: default_per_chain(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedSet {
    pub name: String,
    #[serde(flatten)]
    pub shape: SetShape,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SetShape {
    Compact { set: CompactSet },
    Open { set: OpenSet },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schedules {
    pub delta: Vec<f64>,
    pub eps: Vec<f64>,
}

impl Default for Schedules {
    fn default() -> Self {
        Schedules {
            delta: DEFAULT_DELTAS.to_vec(),
            eps: DEFAULT_EPS.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverParams {
    /// Largest conflict-graph component solved exactly.
    pub exact_threshold: usize,
    pub cover_exact_targets: usize,
    pub cover_exact_candidates: usize,
    pub radius_levels: usize,
    pub lattice: bool,
    pub perturb: bool,
    pub jiggle: bool,
    pub zeta: usize,
}

impl Default for SolverParams {
    fn default() -> Self {
        let limits = CoverLimits::default();
        SolverParams {
            exact_threshold: EXACT_PACKING_LIMIT,
            cover_exact_targets: limits.exact_targets,
            cover_exact_candidates: limits.exact_candidates,
            radius_levels: 3,
            lattice: true,
            perturb: true,
            jiggle: false,
            zeta: crate::besicovitch::DEFAULT_ZETA,
        }
    }
}

impl Scene {
    pub fn from_json_str(text: &str) -> Result<Scene> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let scene: Scene = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            Error::Scene {
                location: format!("{path} (line {}, column {})", inner.line(), inner.column()),
                message: inner.to_string(),
            }
        })?;
        scene.validate()?;
        Ok(scene)
    }

    pub fn load(path: &Path) -> Result<Scene> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Scene::from_json_str(&text).map_err(|e| match e {
            Error::Scene { location, message } => Error::Scene {
                location: format!("{}: {location}", path.display()),
                message,
            },
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scene serializes")
    }

    fn fail(location: &str, message: impl Into<String>) -> Error {
        Error::Scene {
            location: location.into(),
            message: message.into(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let wrap = |loc: &str, r: Result<()>| r.map_err(|e| Scene::fail(loc, e.to_string()));
        wrap("measure", self.measure().map(|_| ()))?;
        wrap("schedules.delta", check_schedule("delta", &self.schedules.delta))?;
        wrap("schedules.eps", check_schedule("eps", &self.schedules.eps))?;
        wrap("premeasure", self.premeasure.kind.validate())?;
        let cert = &self.premeasure.certificate;
        if !(cert.c >= 1.0 && cert.c.is_finite()) {
            return Err(Scene::fail("premeasure.certificate.c", format!("must be finite and >= 1, got {}", cert.c)));
        }
        if cert.radii.is_empty() || cert.radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return Err(Scene::fail("premeasure.certificate.radii", "must be nonempty, positive and finite"));
        }
        if let Some(r) = &self.reference {
            if !(r.alpha > 0.0 && r.alpha <= 1.0) {
                return Err(Scene::fail("reference.alpha", format!("must lie in (0, 1], got {}", r.alpha)));
            }
            if let Some(g) = r.gamma {
                if !(g >= 1.0 && g.is_finite()) {
                    return Err(Scene::fail("reference.gamma", format!("must be finite and >= 1, got {g}")));
                }
            }
        }
        let dim = self.space.dim();
        for (i, s) in self.sets.iter().enumerate() {
            let loc = format!("sets[{i}] ({})", s.name);
            if self.sets[..i].iter().any(|t| t.name == s.name) {
                return Err(Scene::fail(&loc, "duplicate set name"));
            }
            let set_dim = match &s.shape {
                SetShape::Open { set } => {
                    wrap(&loc, set.validate())?;
                    Some(set.dim)
                }
                SetShape::Compact { set } => {
                    let pts = match set {
                        CompactSet::Points { points } => points,
                        CompactSet::Polyline { vertices } => vertices,
                    };
                    if pts.is_empty() {
                        return Err(Scene::fail(&loc, "compact set needs at least one point"));
                    }
                    if pts.iter().any(|p| p.iter().any(|x| !x.is_finite())) {
                        return Err(Scene::fail(&loc, "coordinates must be finite"));
                    }
                    Some(pts[0].len()).filter(|&d| pts.iter().all(|p| p.len() == d)).or(Some(0))
                }
            };
            if dim.is_none() || set_dim != dim {
                return Err(Scene::fail(&loc, format!("set does not live in {}", self.space.label())));
            }
        }
        if let Some(r) = &self.measure.random {
            let d = dim.unwrap_or(0);
            if r.lo.len() != d || r.hi.len() != d || r.lo.iter().zip(&r.hi).any(|(a, b)| !(a < b)) {
                return Err(Scene::fail("measure.random", "box must match the space dimension with lo < hi"));
            }
            if !(r.weight_range[0] > 0.0 && r.weight_range[0] <= r.weight_range[1]) {
                return Err(Scene::fail("measure.random.weight_range", "must be positive and ordered"));
            }
            if r.atoms == 0 || r.instances == 0 {
                return Err(Scene::fail("measure.random", "instances and atoms must be positive"));
            }
        }
        Ok(())
    }

    /// The explicit measure of the scene.
    pub fn measure(&self) -> Result<SignedMeasure> {
        let mu = SignedMeasure {
            space: self.space.clone(),
            atoms: self.measure.atoms.clone(),
            chains: self.measure.chains.clone(),
        };
        mu.validate()?;
        Ok(mu)
    }

    /// Random instances when `measure.random` is set, else the explicit measure.
    pub fn instances(&self) -> Result<Vec<SignedMeasure>> {
        let Some(spec) = &self.measure.random else {
            return Ok(vec![self.measure()?]);
        };
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..spec.instances)
            .map(|k| {
                let mut mu = SignedMeasure::zero(self.space.clone());
                let mut placed: Vec<Vec<f64>> = Vec::new();
                let mut tries = 0;
                while placed.len() < spec.atoms {
                    tries += 1;
                    if tries > 100_000 {
                        return Err(Scene::fail(
                            "measure.random",
                            format!("could not place {} atoms {} apart in instance {k}", spec.atoms, spec.min_separation),
                        ));
                    }
                    let x: Vec<f64> = spec.lo.iter().zip(&spec.hi).map(|(a, b)| rng.gen_range(*a..*b)).collect();
                    if placed.iter().any(|p| crate::metric::euclid(p, &x) < spec.min_separation) {
                        continue;
                    }
                    let w = if spec.weight_range[0] == spec.weight_range[1] {
                        spec.weight_range[0]
                    } else {
                        rng.gen_range(spec.weight_range[0]..spec.weight_range[1])
                    };
                    mu.push_atom(Point::Euclidean(x.clone()), w)?;
                    placed.push(x);
                }
                Ok(mu)
            })
            .collect()
    }

    pub fn reference_for(&self, mu: &SignedMeasure) -> Result<Option<ReferenceMeasure>> {
        let Some(r) = &self.reference else { return Ok(None) };
        let mut built = match r.kind {
            SceneReferenceKind::Lebesgue { dim } => ReferenceMeasure::lebesgue(dim, r.alpha)?,
            SceneReferenceKind::SelfMeasure => ReferenceMeasure::self_measure(mu.clone(), r.alpha)?,
        };
        if let Some(g) = r.gamma {
            built.gamma = g;
        }
        Ok(Some(built))
    }

    pub fn premeasure_for(&self, mu: &SignedMeasure) -> Result<Premeasure> {
        Premeasure::new(self.premeasure.kind.clone(), mu.clone())
    }

    pub fn set(&self, name: &str) -> Option<&SetShape> {
        self.sets.iter().find(|s| s.name == name).map(|s| &s.shape)
    }

    pub fn compact(&self, name: &str) -> Option<&CompactSet> {
        match self.set(name) {
            Some(SetShape::Compact { set }) => Some(set),
            _ => None,
        }
    }

    pub fn open(&self, name: &str) -> Option<&OpenSet> {
        match self.set(name) {
            Some(SetShape::Open { set }) => Some(set),
            _ => None,
        }
    }

    pub fn cover_strategy(&self) -> CoverStrategy {
        CoverStrategy {
            lattice: self.solver.lattice,
            perturb: self.solver.perturb,
            radius_levels: self.solver.radius_levels,
        }
    }

    pub fn cover_limits(&self) -> CoverLimits {
        CoverLimits {
            exact_targets: self.solver.cover_exact_targets,
            exact_candidates: self.solver.cover_exact_candidates,
        }
    }

    pub fn packing_strategy(&self) -> PackingStrategy {
        PackingStrategy {
            radius_levels: self.solver.radius_levels,
            lattice: self.solver.lattice,
            jiggle: self.solver.jiggle,
            exact_limit: self.solver.exact_threshold,
            ..PackingStrategy::default()
        }
    }

    fn plane(seed: u64) -> Scene {
        Scene {
            space: MetricSpace::euclidean(2),
            measure: MeasureSpec::default(),
            reference: None,
            premeasure: ScenePremeasure::default(),
            sets: Vec::new(),
            schedules: Schedules::default(),
            solver: SolverParams::default(),
            seed,
        }
    }

    fn with_atom(mut self, x: [f64; 2], w: f64) -> Self {
        self.measure.atoms.push(Atom {
            position: Point::euclidean(x),
            weight: w,
        });
        self
    }

    fn with_segment(mut self, a: [f64; 2], b: [f64; 2]) -> Self {
        self.measure.chains.push(PolylineChain::segment(a, b, 1.0).expect("valid segment"));
        self
    }

    fn with_set(mut self, name: &str, shape: SetShape) -> Self {
        self.sets.push(NamedSet {
            name: name.into(),
            shape,
        });
        self
    }

    fn with_random(mut self, instances: usize, atoms: usize) -> Self {
        self.measure.random = Some(RandomAtoms {
            instances,
            atoms,
            min_separation: default_separation(),
            weight_range: default_weights(),
            lo: default_box(),
            hi: default_box_hi(),
        });
        self
    }

    fn with_reference(mut self, kind: SceneReferenceKind, alpha: f64) -> Self {
        self.reference = Some(SceneReference { kind, alpha, gamma: None });
        self
    }

    /// Built-in scene for a scenario or pipeline name.
    pub fn builtin(scenario: &str) -> Option<Scene> {
        let compact = |set: CompactSet| SetShape::Compact { set };
        let open = |set: OpenSet| SetShape::Open { set };
        let unit_box = || OpenSet::boxed([-0.5, -0.5], [1.5, 1.5]).expect("valid box");
        let scene = match scenario {
            "dirac-loss" => Scene::plane(1)
                .with_atom([0.5, 0.5], 1.0)
                .with_set("target", compact(CompactSet::points(vec![vec![0.5, 0.5]])))
                .with_set("U", open(OpenSet::ball([0.5, 0.5], 0.5).expect("valid ball"))),
            "curve-loss" => Scene::plane(2).with_segment([0.0, 0.0], [1.0, 0.0]),
            "line-plus-dirac" | "cover" | "pack" => {
                let s = Scene::plane(3).with_atom([0.0, 0.0], 1.0).with_segment([-1.0, 0.0], [1.0, 0.0]);
                let mut pts: Vec<Vec<f64>> = vec![vec![0.0, 0.0]];
                pts.extend((0..=8).map(|k| vec![-1.0 + 0.25 * k as f64, 0.0]).filter(|p| p[0] != 0.0));
                s.with_set("target", compact(CompactSet::points(pts))).with_set(
                    "A",
                    compact(CompactSet::Polyline {
                        vertices: vec![vec![-1.0, 0.0], vec![1.0, 0.0]],
                    }),
                )
            }
            "atomic-recovery" => Scene::plane(4).with_random(50, 10).with_set("U", open(unit_box())),
            "sandwich" => {
                let mut s = Scene::plane(5)
                    .with_segment([0.0, 0.0], [1.0, 0.0])
                    .with_reference(SceneReferenceKind::SelfMeasure, 0.5)
                    .with_set(
                        "A",
                        compact(CompactSet::Polyline {
                            vertices: vec![vec![0.0, 0.0], vec![1.0, 0.0]],
                        }),
                    );
                s.premeasure.certificate.radii = vec![0.001, 0.005, 0.01, 0.05, 0.1];
                s
            }
            "signed" => Scene::plane(6)
                .with_atom([0.0, 0.0], 2.0)
                .with_atom([1.0, 0.0], -1.0)
                .with_reference(SceneReferenceKind::Lebesgue { dim: 2 }, 0.5)
                .with_set("A", compact(CompactSet::points(vec![vec![0.0, 0.0], vec![1.0, 0.0]]))),
            "tricot-compare" => {
                let mut s = Scene::plane(7).with_random(20, 6);
                s.schedules.delta = vec![0.05, 0.02, 0.01];
                s.schedules.eps = vec![0.05, 0.02];
                s
            }
            "stability" => {
                let mut s = Scene::plane(8).with_random(10, 10);
                s.premeasure.kind = PremeasureKind::Exact;
                s
            }
            "besicovitch-demo" | "besicovitch" => {
                
                Scene::plane(9)
                    .with_segment([0.1, 0.5], [0.9, 0.5])
                    .with_atom([0.2, 0.2], 1.0)
                    .with_atom([0.8, 0.2], 0.5)
                    .with_reference(SceneReferenceKind::SelfMeasure, 0.5)
                    .with_set("U", open(unit_box()))
            }
            "directional-probe" => Scene::plane(10),
            "cover-exact" => {
                let mut s = Scene::plane(11).with_random(50, 8);
                s.premeasure.kind = PremeasureKind::Exact;
                s.schedules.delta = vec![0.2, 0.1, 0.05];
                s
            }
            _ => return None,
        };
        Some(scene)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const NAMES: [&str; 11] = [
        "dirac-loss",
        "curve-loss",
        "line-plus-dirac",
        "atomic-recovery",
        "sandwich",
        "signed",
        "tricot-compare",
        "stability",
        "besicovitch-demo",
        "directional-probe",
        "cover-exact",
    ];

    #[test]
    fn builtins_round_trip_through_json() {
        for name in NAMES {
            let s = Scene::builtin(name).unwrap();
            s.validate().unwrap();
            let back = Scene::from_json_str(&s.to_json()).unwrap();
            assert_eq!(back, s, "{name}");
        }
        assert!(Scene::builtin("nope").is_none());
    }

    #[test]
    fn minimal_scene_uses_defaults() {
        let s = Scene::from_json_str(r#"{"space": {"kind": "euclidean", "dim": 2}, "seed": 3}"#).unwrap();
        assert_eq!(s.schedules.delta, DEFAULT_DELTAS);
        assert_eq!(s.premeasure.kind, PremeasureKind::Averaged);
        assert!(s.measure().unwrap().is_zero());
    }

    #[test]
    fn errors_name_the_field_and_line() {
        let text = "{\n  \"space\": {\"kind\": \"euclidean\", \"dim\": 2},\n  \"seed\": 1,\n  \"schedules\": {\"delta\": [0.1, \"x\"], \"eps\": [0.1]}\n}";
        let err = Scene::from_json_str(text).unwrap_err().to_string();
        assert!(err.contains("schedules.delta"), "{err}");
        assert!(err.contains("line 4"), "{err}");
        let missing = Scene::from_json_str(r#"{"space": {"kind": "euclidean", "dim": 2}}"#).unwrap_err().to_string();
        assert!(missing.contains("seed"), "{missing}");
        let unknown = Scene::from_json_str(r#"{"space": {"kind": "euclidean", "dim": 2}, "seed": 1, "extra": 0}"#).unwrap_err();
        assert!(unknown.to_string().contains("extra"));
    }

    #[test]
    fn semantic_checks() {
        let base = r#""space": {"kind": "euclidean", "dim": 2}, "seed": 1"#;
        let bad = [
            format!(r#"{{{base}, "schedules": {{"delta": [0.1, 0.2], "eps": [0.1]}}}}"#),
            format!(r#"{{{base}, "measure": {{"atoms": [{{"position": [0, 0, 0], "weight": 1}}]}}}}"#),
            format!(r#"{{{base}, "reference": {{"kind": "lebesgue", "dim": 2, "alpha": 1.5}}}}"#),
            format!(r#"{{{base}, "premeasure": {{"kind": "kernel", "weights": [0.0, 0.0]}}}}"#),
            format!(r#"{{{base}, "sets": [{{"name": "A", "type": "compact", "set": {{"kind": "points", "points": [[0, 0, 1]]}}}}]}}"#),
        ];
        for text in bad {
            assert!(matches!(Scene::from_json_str(&text), Err(Error::Scene { .. })), "{text}");
        }
    }

    #[test]
    fn random_instances_are_seeded_and_separated() {
        let s = Scene::builtin("atomic-recovery").unwrap();
        let a = s.instances().unwrap();
        assert_eq!(a, s.instances().unwrap());
        assert_eq!(a.len(), 50);
        for mu in &a {
            let pts: Vec<&[f64]> = mu.atoms.iter().map(|x| x.position.coords().unwrap()).collect();
            for i in 0..pts.len() {
                for j in 0..i {
                    assert!(crate::metric::euclid(pts[i], pts[j]) >= 0.05);
                }
            }
        }
    }
}
