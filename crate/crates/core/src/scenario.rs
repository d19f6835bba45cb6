//! Scenario pipelines. Each runs on a [`Scene`] and returns a [`RunReport`]
//! whose verdicts hold the inequalities it checked.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::besicovitch::{
    audit_doubling, audit_subfamilies, besicovitch_with_doubling, greedy_subfamilies, lower_bound_chain, BallFamily,
    DoublingParams,
};
use crate::covering::{caratheodory_sweep, curve_loss_cover, signed_cover_reconstruct, CoverSweep};
use crate::error::{Error, Result};
use crate::measure::{exact_sum, ReferenceMeasure, SignedMeasure};
use crate::metric::{circle_candidates, directional_limited_probe, star_candidates, DirectionalProbeParams};
use crate::metric::{Ball, MetricSpace, Point};
use crate::packing::{compare_constructions, outer_regularize, packing_sweep, sandwich_check, signed_packing_reconstruct, CompactSet};
use crate::premeasure::{certify_bounds, certify_signed_bounds, BoundCertificate, Premeasure, PremeasureKind, SampleSpec};
use crate::region::OpenSet;
use crate::report::{RunReport, Table, Timing, Verdict};
use crate::row;
use crate::scene::Scene;

pub const SCENARIOS: [&str; 11] = [
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

/// Generic pipelines available next to the named scenarios.
pub const PIPELINES: [&str; 3] = ["cover", "pack", "besicovitch"];

const COVER_CONVENTION: &str = "covering: ball admitted at scale delta when its diameter 2r <= delta";
const PACKING_CONVENTION: &str = "packing: ball admitted at scale delta when its radius r <= delta";
/// Slack on the doubling inequality for ratios that hold with equality.
pub const DOUBLING_EPS0: f64 = 1e-6;

struct Clock(Instant);

impl Clock {
    fn start() -> Self {
        Clock(Instant::now())
    }
    fn lap(&mut self, report: &mut RunReport, step: &str) {
        report.runtimes.push(Timing {
            step: step.into(),
            ms: self.0.elapsed().as_secs_f64() * 1e3,
        });
        self.0 = Instant::now();
    }
}

pub fn run_scenario(name: &str, scene: &Scene) -> Result<RunReport> {
    let mut report = RunReport::new(name, scene.seed);
    match name {
        "dirac-loss" => dirac_loss(scene, &mut report)?,
        "curve-loss" => curve_loss(scene, &mut report)?,
        "line-plus-dirac" => line_plus_dirac(scene, &mut report)?,
        "atomic-recovery" => atomic_recovery(scene, &mut report)?,
        "sandwich" => sandwich(scene, &mut report)?,
        "signed" => signed(scene, &mut report)?,
        "tricot-compare" => tricot(scene, &mut report)?,
        "stability" => stability(scene, &mut report)?,
        "besicovitch-demo" | "besicovitch" => besicovitch_demo(scene, &mut report)?,
        "directional-probe" => directional_probe(&mut report)?,
        "cover-exact" => cover_exact(scene, &mut report)?,
        "cover" => cover_pipeline(scene, &mut report)?,
        "pack" => pack_pipeline(scene, &mut report)?,
        other => {
            return Err(Error::param(
                "scenario",
                format!("unknown scenario `{other}`; expected one of {}", SCENARIOS.join(", ")),
            ))
        }
    }
    Ok(report)
}

fn coords_of(points: &[Point]) -> Vec<Vec<f64>> {
    points.iter().filter_map(|p| p.coords().map(<[f64]>::to_vec)).collect()
}

fn missing(set: &str) -> Error {
    Error::Scene {
        location: "sets".into(),
        message: format!("this scenario needs a set named `{set}`"),
    }
}

/// Points of a compact set; polylines are sampled at 21 points.
fn compact_points(set: &CompactSet) -> Vec<Point> {
    match set {
        CompactSet::Points { points } => points.iter().cloned().map(Point::Euclidean).collect(),
        CompactSet::Polyline { vertices } => crate::measure::PolylineChain {
            vertices: vertices.clone(),
            density: 1.0,
        }
        .sample(21)
        .into_iter()
        .map(Point::Euclidean)
        .collect(),
    }
}

fn target_points(scene: &Scene, mu: &SignedMeasure) -> Vec<Point> {
    match scene.compact("target") {
        Some(set) => compact_points(set),
        None => mu.atom_points(),
    }
}

fn sweep_rows(table: &mut Table, label: &str, sweep: &CoverSweep) {
    for s in &sweep.steps {
        table.push(row![label, s.delta, s.result.value, s.result.status.as_str(), s.n_candidates]);
    }
}

fn sweep_table() -> Table {
    Table::new("sweep", &["construction", "delta", "value", "status", "candidates"])
}

fn certificate_for(scene: &Scene, q: &Premeasure, mu: &SignedMeasure, alpha: f64) -> Result<BoundCertificate> {
    let spec = certificate_spec(scene, mu);
    let cert = &scene.premeasure.certificate;
    certify_bounds(q, mu, alpha, cert.c, cert.r0.unwrap_or(f64::INFINITY), &spec)
}

fn certificate_spec(scene: &Scene, mu: &SignedMeasure) -> SampleSpec {
    let cert = &scene.premeasure.certificate;
    SampleSpec {
        centers: mu.support_sample(cert.per_chain),
        radii: cert.radii.clone(),
    }
}

fn dirac_loss(scene: &Scene, report: &mut RunReport) -> Result<()> {
    report.conventions = vec![COVER_CONVENTION.into(), PACKING_CONVENTION.into()];
    let mut clock = Clock::start();
    let mu = scene.measure()?;
    let q = scene.premeasure_for(&mu)?;
    let target = target_points(scene, &mu);
    let cover = caratheodory_sweep(&target, &q, &scene.schedules.delta, scene.cover_strategy(), scene.cover_limits())?;
    clock.lap(report, "cover sweep");
    let u = match scene.open("U") {
        Some(u) => u.clone(),
        None => OpenSet::neighborhood_of_points(&coords_of(&target), scene.schedules.eps[0])?,
    };
    let pack = packing_sweep(&u, &q, &scene.schedules.delta, &scene.packing_strategy())?;
    clock.lap(report, "packing sweep");
    let mut t = sweep_table();
    sweep_rows(&mut t, "cover", &cover);
    for s in &pack.steps {
        t.push(row!["packing", s.delta, s.result.value, s.result.status.as_str(), s.result.n_candidates]);
    }
    report.tables.push(t);
    let mu_u = mu.total_mass(Some(&u))?;
    report.verdicts.push(Verdict::le("cover loses the atom", "cover_limit", cover.limit, "0.01", 0.01, 0.0));
    report.verdicts.push(Verdict::close("packing recovers the atom", "packing_limit", pack.limit, "mu(U)", mu_u, 1e-9));
    report.verdicts.push(Verdict::ge(
        "packing solved exactly",
        "exact_steps",
        pack.steps.iter().filter(|s| s.result.status.is_exact()).count() as f64,
        "steps",
        pack.steps.len() as f64,
        0.0,
    ));
    Ok(())
}

fn curve_loss(scene: &Scene, report: &mut RunReport) -> Result<()> {
    report.conventions = vec![COVER_CONVENTION.into()];
    let mut clock = Clock::start();
    let mu = scene.measure()?;
    if mu.chains.is_empty() {
        return Err(Error::Scene {
            location: "measure.chains".into(),
            message: "curve-loss needs at least one chain".into(),
        });
    }
    let q = scene.premeasure_for(&mu)?;
    let mut t = Table::new(
        "curve_cover",
        &["chain", "delta", "rho", "eta", "balls", "value", "bound", "two_delta_mass", "covers_curve", "max_multiplicity"],
    );
    for (i, chain) in mu.chains.iter().enumerate() {
        let mass = chain.length() * chain.density.abs();
        for &delta in &scene.schedules.delta {
            let c = curve_loss_cover(chain, &q, delta)?;
            t.push(row![i, delta, c.rho, c.eta, c.balls.len(), c.value, c.bound, 2.0 * delta * mass, c.covers_curve, c.max_multiplicity]);
            let tag = format!("chain {i}, delta={delta}");
            report.verdicts.push(Verdict::le(format!("{tag}: value within bound"), "value", c.value, "2 L (rho - eta)/rho", c.bound, 1e-9));
            report.verdicts.push(Verdict::le(format!("{tag}: value at most 2 delta L"), "value", c.value, "2 delta L", 2.0 * delta * mass, 1e-12));
            report.verdicts.push(Verdict::ge(
                format!("{tag}: balls cover the curve"),
                "covered",
                f64::from(u8::from(c.covers_curve)),
                "1",
                1.0,
                0.0,
            ));
        }
    }
    clock.lap(report, "curve covers");
    report.tables.push(t);
    Ok(())
}

fn line_plus_dirac(scene: &Scene, report: &mut RunReport) -> Result<()> {
    report.conventions = vec![COVER_CONVENTION.into(), PACKING_CONVENTION.into()];
    let mut clock = Clock::start();
    let mu = scene.measure()?;
    let q = scene.premeasure_for(&mu)?;
    let target = target_points(scene, &mu);
    let cover = caratheodory_sweep(&target, &q, &scene.schedules.delta, scene.cover_strategy(), scene.cover_limits())?;
    clock.lap(report, "cover sweep");
    let a = scene.compact("A").ok_or_else(|| missing("A"))?;
    let pack = outer_regularize(a, &q, &scene.schedules.eps, &scene.schedules.delta, &scene.packing_strategy())?;
    clock.lap(report, "outer regularization");
    let mut t = Table::new("constructions", &["construction", "eps", "delta", "value", "status"]);
    for s in &cover.steps {
        t.push(row!["cover", "", s.delta, s.result.value, s.result.status.as_str()]);
    }
    for (eps, sweep) in &pack.per_eps {
        for s in &sweep.steps {
            t.push(row!["packing", *eps, s.delta, s.result.value, s.result.status.as_str()]);
        }
    }
    report.tables.push(t);
    let atom_mass: f64 = target.iter().map(|p| mu.ball_mass_unchecked(p, 0.0)).sum();
    report.verdicts.push(Verdict::le(
        "cover of the support misses the atom",
        "cover_limit",
        cover.limit,
        "atom mass - 0.9",
        atom_mass - 0.9,
        0.0,
    ));
    report.verdicts.push(Verdict::ge(
        "packing keeps the atom",
        "packing_estimate - cover_limit",
        pack.estimate - cover.limit,
        "0.9",
        0.9,
        0.0,
    ));
    Ok(())
}

fn atomic_recovery(scene: &Scene, report: &mut RunReport) -> Result<()> {
    report.conventions = vec![PACKING_CONVENTION.into()];
    let mut clock = Clock::start();
    let u = scene.open("U").ok_or_else(|| missing("U"))?;
    let delta_min = *scene.schedules.delta.last().expect("validated");
    let mut t = Table::new("atomic", &["instance", "atoms", "min_separation", "mu_u", "estimate", "abs_error", "all_exact"]);
    for (k, mu) in scene.instances()?.iter().enumerate() {
        let sep = min_separation(mu);
        if !(delta_min < sep / 2.0) {
            return Err(Error::param("schedules.delta", format!("instance {k}: smallest delta {delta_min} is not below half the separation {sep}")));
        }
        let q = scene.premeasure_for(mu)?;
        let s = packing_sweep(u, &q, &scene.schedules.delta, &scene.packing_strategy())?;
        let mu_u = mu.total_mass(Some(u))?;
        t.push(row![k, mu.atoms.len(), sep, mu_u, s.limit, (s.limit - mu_u).abs(), s.all_exact]);
        report.verdicts.push(Verdict::close(format!("instance {k}: estimate equals mass"), "estimate", s.limit, "mu(U)", mu_u, 1e-9));
        report.verdicts.push(Verdict::ge(
            format!("instance {k}: exact solver"),
            "all_exact",
            f64::from(u8::from(s.all_exact)),
            "1",
            1.0,
            0.0,
        ));
    }
    clock.lap(report, "instances");
    report.tables.push(t);
    Ok(())
}

fn min_separation(mu: &SignedMeasure) -> f64 {
    let pts = mu.atom_points();
    let mut best = f64::INFINITY;
    for i in 0..pts.len() {
        for j in 0..i {
            best = best.min(mu.space.distance_unchecked(&pts[i], &pts[j]));
        }
    }
    best
}

/// Averaged premeasures give `mu(B)/2` on centred balls of a chain and the
/// full weight on atoms, so packings of `A` approach this value.
fn averaged_oracle(mu: &SignedMeasure, a: &CompactSet) -> Result<f64> {
    let u = a.neighborhood(1e-9)?;
    let atoms: f64 = mu.atoms.iter().filter(|x| x.position.coords().is_some_and(|c| u.contains(c))).map(|x| x.weight).sum();
    let chains = SignedMeasure {
        atoms: Vec::new(),
        ..mu.clone()
    };
    Ok(atoms + 0.5 * chains.total_mass(Some(&u))?)
}

fn sandwich(scene: &Scene, report: &mut RunReport) -> Result<()> {
    report.conventions = vec![PACKING_CONVENTION.into()];
    let mut clock = Clock::start();
    let mu = scene.measure()?;
    let q = scene.premeasure_for(&mu)?;
    let a = scene.compact("A").ok_or_else(|| missing("A"))?;
    let reference = scene.reference_for(&mu)?.ok_or_else(|| Error::Scene {
        location: "reference".into(),
        message: "sandwich needs a reference measure".into(),
    })?;
    let lebesgue = ReferenceMeasure::lebesgue(mu.space.dim().unwrap_or(1), reference.alpha)?;
    let cert = certificate_for(scene, &q, &mu, reference.alpha)?;
    clock.lap(report, "certificate");
    let est = outer_regularize(a, &q, &scene.schedules.eps, &scene.schedules.delta, &scene.packing_strategy())?;
    clock.lap(report, "outer regularization");
    report.verdicts.push(Verdict::ge("certificate lower margin", "worst_lower_margin", cert.worst_lower_margin, "0", 0.0, 1e-12));
    report.verdicts.push(Verdict::ge("certificate upper margin", "worst_upper_margin", cert.worst_upper_margin, "0", 0.0, 1e-12));
    let mut t = Table::new("sandwich", &["set", "mu", "lower_bound", "estimate", "upper_bound", "verdict"]);
    for (label, r) in [(reference_label(&reference), &reference), ("lebesgue", &lebesgue)] {
        let s = sandwich_check(a, &mu, &cert, r, &est)?;
        t.push(row![format!("A|{label}"), s.mu_a, s.lower_bound, s.estimate, s.upper_bound, if s.passed { "pass" } else { "fail" }]);
        report.verdicts.push(Verdict::ge(format!("A|{label}: lower"), "estimate", s.estimate, "mu(A)/(gamma C)", s.lower_bound, s.tol));
        report.verdicts.push(Verdict::le(format!("A|{label}: upper"), "estimate", s.estimate, "C mu(U)", s.upper_bound, s.tol));
    }
    if scene.premeasure.kind == PremeasureKind::Averaged {
        let oracle = averaged_oracle(&mu, a)?;
        report.verdicts.push(Verdict::close("discretization oracle", "estimate", est.estimate, "oracle", oracle, 0.05));
    }
    report.tables.push(t);
    Ok(())
}

fn reference_label(r: &ReferenceMeasure) -> &'static str {
    match r.kind {
        crate::measure::ReferenceKind::Lebesgue { .. } => "lebesgue",
        crate::measure::ReferenceKind::SelfMeasure { .. } => "self",
    }
}

fn signed(scene: &Scene, report: &mut RunReport) -> Result<()> {
    report.conventions = vec![COVER_CONVENTION.into(), PACKING_CONVENTION.into()];
    let mut clock = Clock::start();
    let mu = scene.measure()?;
    let a = scene.compact("A").ok_or_else(|| missing("A"))?;
    let target = compact_points(a);
    let (plus, minus) = mu.hahn_split();
    let (mass_plus, mass_minus) = (a.mass(&plus)?, a.mass(&minus)?);
    let cover = signed_cover_reconstruct(&mu, &target, &scene.schedules.delta, scene.cover_strategy(), scene.cover_limits())?;
    clock.lap(report, "signed covering");
    let reference = match scene.reference_for(&mu.variation())? {
        Some(r) => r,
        None => ReferenceMeasure::lebesgue(mu.space.dim().unwrap_or(1), 0.5)?,
    };
    let (qp, qm) = Premeasure::signed_pair(scene.premeasure.kind.clone(), mu.clone())?;
    let spec = certificate_spec(scene, &mu);
    let (cp, cm) = certify_signed_bounds(&qp, &qm, &mu, reference.alpha, scene.premeasure.certificate.c, &spec)?;
    let pack = signed_packing_reconstruct(
        &mu,
        &qp,
        &qm,
        a,
        &scene.schedules.eps,
        &scene.schedules.delta,
        &scene.packing_strategy(),
        (&cp, &cm),
        reference.gamma,
    )?;
    clock.lap(report, "signed packing");
    let mut t = Table::new("signed", &["construction", "part", "estimate", "mass"]);
    for (cons, part, est, mass) in [
        ("cover", "plus", cover.plus.limit, mass_plus),
        ("cover", "minus", cover.minus.limit, mass_minus),
        ("packing", "plus", pack.plus.estimate, mass_plus),
        ("packing", "minus", pack.minus.estimate, mass_minus),
    ] {
        t.push(row![cons, part, est, mass]);
        report.verdicts.push(Verdict::close(format!("{cons} {part}"), "estimate", est, &format!("mu{}(A)", if part == "plus" { "+" } else { "-" }), mass, 1e-9));
    }
    let v = &pack.variation;
    t.push(row!["packing", "variation", v.estimate, v.mu_a]);
    report.verdicts.push(Verdict::ge("variation lower", "plus + minus", v.estimate, "|mu|(A)/(gamma C)", v.lower_bound, v.tol));
    report.verdicts.push(Verdict::le("variation upper", "plus + minus", v.estimate, "C |mu|(A)", v.upper_bound, v.tol));
    report.verdicts.push(Verdict::ge("certificates pass", "passed", f64::from(u8::from(cp.passed && cm.passed)), "1", 1.0, 0.0));
    report.tables.push(t);
    Ok(())
}

fn tricot(scene: &Scene, report: &mut RunReport) -> Result<()> {
    report.conventions = vec![PACKING_CONVENTION.into(), "T-packings: balls centred on E, radius r <= delta".into()];
    let mut clock = Clock::start();
    let mut t = Table::new("tricot", &["instance", "atoms", "packing_estimate", "t_estimate", "gap", "all_exact"]);
    for (k, mu) in scene.instances()?.iter().enumerate() {
        let q = scene.premeasure_for(mu)?;
        let e = coords_of(&mu.atom_points());
        let r = compare_constructions(&e, &q, &scene.schedules.eps, &scene.schedules.delta, &scene.packing_strategy())?;
        t.push(row![k, e.len(), r.packing_estimate, r.t_estimate, r.gap, r.all_exact]);
        report.verdicts.push(Verdict::le(format!("instance {k}: constructions agree"), "gap", r.gap, "1e-6", 1e-6, 0.0));
    }
    clock.lap(report, "instances");
    report.tables.push(t);
    Ok(())
}

fn stability(scene: &Scene, report: &mut RunReport) -> Result<()> {
    report.conventions = vec![PACKING_CONVENTION.into()];
    let mut clock = Clock::start();
    let mut t = Table::new("stability", &["instance", "atoms", "mu_a", "estimate", "abs_error"]);
    for (k, mu) in scene.instances()?.iter().enumerate() {
        let q = scene.premeasure_for(mu)?;
        let a = CompactSet::points(coords_of(&mu.atom_points()));
        let est = outer_regularize(&a, &q, &scene.schedules.eps, &scene.schedules.delta, &scene.packing_strategy())?;
        let mass = a.mass(mu)?;
        t.push(row![k, mu.atoms.len(), mass, est.estimate, (est.estimate - mass).abs()]);
        report.verdicts.push(Verdict::close(format!("instance {k}: estimate equals mass"), "estimate", est.estimate, "mu(A)", mass, 1e-9));
    }
    clock.lap(report, "instances");
    report.tables.push(t);
    Ok(())
}

/// 200 seeded random balls in the unit square.
pub fn random_family(seed: u64, count: usize) -> BallFamily {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    BallFamily::from_balls((0..count).map(|_| Ball::at([rng.gen::<f64>(), rng.gen::<f64>()], rng.gen_range(0.01..0.1))).collect())
}

fn besicovitch_demo(scene: &Scene, report: &mut RunReport) -> Result<()> {
    let mut clock = Clock::start();
    let plane = MetricSpace::euclidean(2);
    let family = random_family(scene.seed, 200);
    let out = greedy_subfamilies(&plane, &family, scene.solver.zeta)?;
    let audit = audit_subfamilies(&plane, &family, &out);
    clock.lap(report, "subfamilies");
    let mut t = Table::new("subfamilies", &["ball", "x", "y", "radius", "subfamily"]);
    for (i, b) in family.balls.iter().enumerate() {
        let c = b.coords();
        let sub = out.assignment[i].map_or(String::new(), |k| k.to_string());
        t.push(row![i, c[0], c[1], b.radius, sub]);
    }
    report.tables.push(t);
    report.verdicts.push(Verdict::le("subfamilies disjoint", "violations", audit.violations as f64, "0", 0.0, 0.0));
    report.verdicts.push(Verdict::le("centres covered", "uncovered", audit.uncovered_centers as f64, "0", 0.0, 0.0));
    report.verdicts.push(Verdict::le("subfamily count", "count", out.count() as f64, "2 zeta + 1", out.allowed as f64, 0.0));

    let mu = scene.measure()?;
    let u = scene.open("U").ok_or_else(|| missing("U"))?;
    let reference = scene.reference_for(&mu)?.ok_or_else(|| Error::Scene {
        location: "reference".into(),
        message: "besicovitch-demo needs a reference measure".into(),
    })?;
    let params = DoublingParams::from_reference(&reference, DOUBLING_EPS0, scene.schedules.delta[0])?;
    let points = mu.support_sample(20);
    let cover = besicovitch_with_doubling(&points, u, &mu, &params, scene.schedules.delta[0])?;
    let dbl = audit_doubling(&cover, u, &mu, &params);
    clock.lap(report, "doubling cover");
    let mut d = Table::new("doubling", &["x", "y", "radius", "mass", "inner_mass"]);
    for b in &cover.balls {
        let c = b.ball.coords();
        d.push(row![c[0], c[1], b.ball.radius, b.mass, b.inner_mass]);
    }
    report.tables.push(d);
    report.verdicts.push(Verdict::le("doubling inequality", "failures", dbl.doubling_failures as f64, "0", 0.0, 0.0));
    report.verdicts.push(Verdict::le("doubling balls disjoint", "overlaps", dbl.overlaps as f64, "0", 0.0, 0.0));
    report.verdicts.push(Verdict::le("doubling balls inside U", "outside", dbl.outside as f64, "0", 0.0, 0.0));
    report.verdicts.push(Verdict::le("support points covered", "uncovered mass", cover.uncovered_mass, "0", 0.0, 0.0));
    let q = scene.premeasure_for(&mu)?;
    let cert = certificate_for(scene, &q, &mu, reference.alpha)?;
    if cert.passed {
        let chain = lower_bound_chain(&cover, &q, cert.c, &params);
        report.verdicts.push(Verdict::le(
            "q(B) >= mu(B)/(C (gamma + eps0)) per ball",
            "failures",
            chain.iter().filter(|ok| !**ok).count() as f64,
            "0",
            0.0,
            0.0,
        ));
    }
    Ok(())
}

fn directional_probe(report: &mut RunReport) -> Result<()> {
    let mut clock = Clock::start();
    let eta = 1.0 / 3.0;
    let mut t = Table::new("probe", &["space", "candidates", "eta", "max_card", "upper_bound", "exact"]);
    let plane = MetricSpace::euclidean(2);
    let count = 720;
    let out = directional_limited_probe(
        &plane,
        &DirectionalProbeParams {
            xi: 2.0,
            eta,
            base: Point::euclidean([0.0, 0.0]),
            candidates: circle_candidates([0.0, 0.0], 1.0, count),
        },
    )?;
    t.push(row![plane.label(), count, eta, out.max_card, out.upper_bound, out.exact]);
    let oracle = circle_grid_oracle(count, eta);
    report.verdicts.push(Verdict::close("circle grid", "max_card", out.max_card as f64, "spacing oracle", oracle as f64, 0.0));
    for rays in [5, 10, 25] {
        let star = MetricSpace::star_graph(rays, 10.0);
        let out = directional_limited_probe(
            &star,
            &DirectionalProbeParams {
                xi: 2.0,
                eta,
                base: Point::hub(),
                candidates: star_candidates(rays, 1.0),
            },
        )?;
        t.push(row![star.label(), rays, eta, out.max_card, out.upper_bound, out.exact]);
        report.verdicts.push(Verdict::ge(
            format!("star graph with {rays} rays: not directionally limited at the hub for zeta < {rays}"),
            "max_card",
            out.max_card as f64,
            "rays",
            rays as f64,
            0.0,
        ));
    }
    clock.lap(report, "probes");
    report.tables.push(t);
    Ok(())
}

/// Largest subset of an equally spaced circle grid with pairwise chord at
/// least `eta`: every `k`-th point, `k` the smallest admissible step.
pub fn circle_grid_oracle(count: usize, eta: f64) -> usize {
    let k = (1..=count)
        .find(|&k| 2.0 * (std::f64::consts::PI * k as f64 / count as f64).sin() >= eta)
        .unwrap_or(count);
    count / k
}

fn cover_exact(scene: &Scene, report: &mut RunReport) -> Result<()> {
    report.conventions = vec![COVER_CONVENTION.into()];
    let mut clock = Clock::start();
    let mut t = Table::new("cover_exact", &["instance", "delta", "value", "mu_target", "status"]);
    for (k, mu) in scene.instances()?.iter().enumerate() {
        let q = scene.premeasure_for(mu)?;
        let target = mu.atom_points();
        // both sides correctly rounded, so the exact inequality survives rounding
        let mass = exact_sum(mu.atoms.iter().map(|a| a.weight));
        let sweep = caratheodory_sweep(&target, &q, &scene.schedules.delta, scene.cover_strategy(), scene.cover_limits())?;
        for s in &sweep.steps {
            let value = exact_sum(s.result.chosen.iter().flat_map(|b| mu.atoms_in_ball(b).map(|a| a.weight)));
            t.push(row![k, s.delta, value, mass, s.result.status.as_str()]);
            report.verdicts.push(Verdict::ge(format!("instance {k}, delta={}: cover dominates mass", s.delta), "value", value, "mu(target)", mass, 0.0));
            report.verdicts.push(Verdict::ge(
                format!("instance {k}, delta={}: exact solver", s.delta),
                "exact",
                f64::from(u8::from(s.result.status.is_exact())),
                "1",
                1.0,
                0.0,
            ));
        }
    }
    clock.lap(report, "instances");
    report.tables.push(t);
    Ok(())
}

fn first_compact(scene: &Scene) -> Option<(&str, &CompactSet)> {
    scene.sets.iter().find_map(|s| match &s.shape {
        crate::scene::SetShape::Compact { set } => Some((s.name.as_str(), set)),
        _ => None,
    })
}

fn cover_pipeline(scene: &Scene, report: &mut RunReport) -> Result<()> {
    report.conventions = vec![COVER_CONVENTION.into()];
    let mut clock = Clock::start();
    let mu = scene.measure()?;
    let q = scene.premeasure_for(&mu)?;
    let target = match first_compact(scene) {
        Some((_, set)) => compact_points(set),
        None => mu.atom_points(),
    };
    let sweep = caratheodory_sweep(&target, &q, &scene.schedules.delta, scene.cover_strategy(), scene.cover_limits())?;
    clock.lap(report, "cover sweep");
    let mut t = sweep_table();
    sweep_rows(&mut t, "cover", &sweep);
    report.tables.push(t);
    report.verdicts.push(Verdict::le(
        "cover values nondecreasing as delta shrinks",
        "violations",
        sweep.monotonicity_violations.len() as f64,
        "0",
        0.0,
        0.0,
    ));
    Ok(())
}

fn pack_pipeline(scene: &Scene, report: &mut RunReport) -> Result<()> {
    report.conventions = vec![PACKING_CONVENTION.into()];
    let mut clock = Clock::start();
    let mu = scene.measure()?;
    let q = scene.premeasure_for(&mu)?;
    let mut t = Table::new("packing", &["set", "eps", "delta", "value", "status", "candidates", "reduced"]);
    let mut violations = 0;
    for s in &scene.sets {
        match &s.shape {
            crate::scene::SetShape::Open { set } => {
                let sweep = packing_sweep(set, &q, &scene.schedules.delta, &scene.packing_strategy())?;
                violations += sweep.monotonicity_violations.len();
                for st in &sweep.steps {
                    t.push(row![s.name.as_str(), "", st.delta, st.result.value, st.result.status.as_str(), st.result.n_candidates, st.result.n_reduced]);
                }
            }
            crate::scene::SetShape::Compact { set } => {
                let est = outer_regularize(set, &q, &scene.schedules.eps, &scene.schedules.delta, &scene.packing_strategy())?;
                for (eps, sweep) in &est.per_eps {
                    violations += sweep.monotonicity_violations.len();
                    for st in &sweep.steps {
                        t.push(row![s.name.as_str(), *eps, st.delta, st.result.value, st.result.status.as_str(), st.result.n_candidates, st.result.n_reduced]);
                    }
                }
            }
        }
    }
    clock.lap(report, "packing");
    report.tables.push(t);
    report.verdicts.push(Verdict::le("packing values nonincreasing as delta shrinks", "violations", violations as f64, "0", 0.0, 0.0));
    Ok(())
}
