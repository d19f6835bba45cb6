//! Acceptance criteria C1-C12. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ballrecon::besicovitch::{besicovitch_with_doubling, greedy_subfamilies, DoublingParams};
use ballrecon::covering::{
    caratheodory_sweep, curve_loss_cover, generate_cover_candidates, min_cover_value, signed_cover_reconstruct,
    CoverInstance, CoverStrategy,
};
use ballrecon::measure::{exact_sum, PolylineChain, ReferenceMeasure, SignedMeasure};
use ballrecon::metric::{
    circle_candidates, directional_limited_probe, pair_admissible, star_candidates, Ball, DirectionalProbeParams,
    MetricSpace, Point,
};
use ballrecon::packing::{
    compare_constructions, outer_regularize, packing_sweep, sandwich_check, signed_packing_reconstruct, CompactSet,
    PackingStrategy,
};
use ballrecon::premeasure::{certify_bounds, certify_signed_bounds, Premeasure, PremeasureKind, SampleSpec};
use ballrecon::region::OpenSet;
use ballrecon::scenario::random_family;
use ballrecon::solver::set_cover::CoverLimits;

const DELTAS: [f64; 5] = [0.2, 0.1, 0.05, 0.02, 0.01];
const EPS: [f64; 3] = [0.1, 0.05, 0.02];

type Outcome = Result<String, String>;

/// Name, body and runtime limit in seconds.
type Criterion = (&'static str, fn() -> Outcome, Option<u64>);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn plane() -> MetricSpace {
    MetricSpace::euclidean(2)
}

/// `n` atoms in the unit square at least `sep` apart, weights in [0.1, 2).
fn random_atoms(rng: &mut ChaCha8Rng, n: usize, sep: f64) -> SignedMeasure {
    let mut mu = SignedMeasure::zero(plane());
    let mut pts: Vec<[f64; 2]> = Vec::new();
    while pts.len() < n {
        let x = [rng.gen::<f64>(), rng.gen::<f64>()];
        if pts.iter().all(|p| ((p[0] - x[0]).powi(2) + (p[1] - x[1]).powi(2)).sqrt() >= sep) {
            mu.push_atom(Point::euclidean(x), rng.gen_range(0.1..2.0)).unwrap();
            pts.push(x);
        }
    }
    mu
}

fn total_weight(mu: &SignedMeasure) -> f64 {
    exact_sum(mu.atoms.iter().map(|a| a.weight))
}

fn atom_coords(mu: &SignedMeasure) -> Vec<Vec<f64>> {
    mu.atoms.iter().map(|a| a.position.coords().unwrap().to_vec()).collect()
}

fn c1() -> Outcome {
    let x = [0.3, -0.2];
    let q = Premeasure::averaged(SignedMeasure::dirac(x));
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let r = rng.gen_range(1e-3..1.0);
        let eta = rng.gen_range(0.0..r);
        let t = rng.gen_range(0.0..std::f64::consts::TAU);
        let y = [x[0] + eta * t.cos(), x[1] + eta * t.sin()];
        let eta = ((y[0] - x[0]).powi(2) + (y[1] - x[1]).powi(2)).sqrt();
        let v = q.evaluate(&Ball::at(y, r)).unwrap();
        worst = worst.max((v - (r - eta) / r).abs());
    }
    check(worst <= 1e-12, || format!("evaluate differs from (r - eta)/r by {worst:e}"))?;
    let sweep = caratheodory_sweep(
        &[Point::euclidean(x)],
        &q,
        &[0.2, 0.1, 0.05, 0.02],
        CoverStrategy::default(),
        CoverLimits::default(),
    )
    .unwrap();
    let at = sweep.steps.iter().find(|s| s.delta == 0.02).unwrap().result.value;
    check(at <= 0.01, || format!("cover value at delta=0.02 is {at}"))?;
    Ok(format!("max |q - (r-eta)/r| = {worst:.1e}; cover value at delta=0.02 = {at:.3e} <= 0.01"))
}

fn c2() -> Outcome {
    let q = Premeasure::averaged(SignedMeasure::dirac([0.0, 0.0]));
    let u = OpenSet::ball([0.0, 0.0], 0.5).unwrap();
    let s = packing_sweep(&u, &q, &DELTAS, &PackingStrategy::default()).unwrap();
    check(s.all_exact, || "a packing step was not solved exactly".into())?;
    check((s.limit - 1.0).abs() <= 1e-9, || format!("packing limit {}", s.limit))?;
    Ok(format!("packing limit = {} (exact)", s.limit))
}

fn c3() -> Outcome {
    let chain = PolylineChain::segment([0.0, 0.0], [1.0, 0.0], 1.0).unwrap();
    let mu = SignedMeasure::zero(plane()).with_chain(chain.clone()).unwrap();
    let q = Premeasure::averaged(mu);
    let mut worst_ratio: f64 = 0.0;
    for delta in DELTAS {
        let c = curve_loss_cover(&chain, &q, delta).unwrap();
        let rho = delta / 2.0;
        let eta = rho - rho * rho;
        let bound = 2.0 * 1.0 * (rho - eta) / rho;
        check((c.bound - bound).abs() <= 1e-9, || format!("delta={delta}: bound {} vs {bound}", c.bound))?;
        let resummed: f64 = c.balls.iter().map(|b| q.evaluate(b).unwrap()).sum();
        check((resummed - c.value).abs() <= 1e-9, || format!("delta={delta}: value {} re-evaluates to {resummed}", c.value))?;
        check(c.value <= bound + 1e-9, || format!("delta={delta}: value {} above bound {bound}", c.value))?;
        check(c.value <= 2.0 * delta, || format!("delta={delta}: value {} above 2 delta", c.value))?;
        // every point of the curve lies in some ball
        for k in 0..=2000 {
            let p = [k as f64 / 2000.0, 0.0];
            let inside = c.balls.iter().any(|b| {
                let z = b.coords();
                ((z[0] - p[0]).powi(2) + (z[1] - p[1]).powi(2)).sqrt() <= b.radius + 1e-12
            });
            check(inside, || format!("delta={delta}: curve point {p:?} uncovered"))?;
        }
        worst_ratio = worst_ratio.max(c.value / (2.0 * delta));
    }
    Ok(format!("value <= bound and <= 2 delta on all 5 scales (max value/(2 delta) = {worst_ratio:.3})"))
}

fn c4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let u = OpenSet::boxed([-0.5, -0.5], [1.5, 1.5]).unwrap();
    let mut worst: f64 = 0.0;
    for k in 0..50 {
        let mu = random_atoms(&mut rng, 10, 0.05);
        let q = Premeasure::averaged(mu.clone());
        let s = packing_sweep(&u, &q, &DELTAS, &PackingStrategy::default()).unwrap();
        check(s.all_exact, || format!("instance {k}: heuristic step"))?;
        let err = (s.limit - total_weight(&mu)).abs();
        check(err <= 1e-9, || format!("instance {k}: error {err:e}"))?;
        worst = worst.max(err);
    }
    Ok(format!("50 instances, max |estimate - mu(U)| = {worst:.1e}"))
}

fn c5() -> Outcome {
    let chain = PolylineChain::segment([0.0, 0.0], [1.0, 0.0], 1.0).unwrap();
    let mu = SignedMeasure::zero(plane()).with_chain(chain.clone()).unwrap();
    let q = Premeasure::averaged(mu.clone());
    let a = CompactSet::Polyline {
        vertices: vec![vec![0.0, 0.0], vec![1.0, 0.0]],
    };
    let spec = SampleSpec {
        centers: mu.support_sample(25),
        radii: vec![0.001, 0.005, 0.01, 0.05, 0.1],
    };
    let cert = certify_bounds(&q, &mu, 0.5, 2.0, f64::INFINITY, &spec).unwrap();
    check(cert.passed, || format!("certificate failed: {cert:?}"))?;
    let est = outer_regularize(&a, &q, &EPS, &DELTAS, &PackingStrategy::default()).unwrap();
    let self_ref = ReferenceMeasure::self_measure(mu.clone(), 0.5).unwrap();
    check((self_ref.gamma - 2.0).abs() <= 1e-9, || format!("self gamma {}", self_ref.gamma))?;
    let leb = ReferenceMeasure::lebesgue(2, 0.5).unwrap();
    let s1 = sandwich_check(&a, &mu, &cert, &self_ref, &est).unwrap();
    let s2 = sandwich_check(&a, &mu, &cert, &leb, &est).unwrap();
    let e = est.estimate;
    check(s1.passed && (0.25 - s1.tol..=2.0 + s1.tol).contains(&e), || format!("self sandwich: {s1:?}"))?;
    check(s2.passed && (0.125..=2.0).contains(&e), || format!("lebesgue sandwich: {s2:?}"))?;
    // centred balls of radius r at r, 3r, 5r, ...
    let r: f64 = 0.01;
    let n = (1.0 / (2.0 * r)).floor() as usize;
    let oracle: f64 = (0..n).map(|k| q.evaluate(&Ball::at([r * (2 * k + 1) as f64, 0.0], r)).unwrap()).sum();
    check((e - oracle).abs() <= 0.05, || format!("estimate {e} vs oracle {oracle}"))?;
    Ok(format!("estimate = {e:.6} in [0.25, 2] (gamma=2) and [0.125, 2] (gamma=4); oracle {oracle:.6}"))
}

fn c6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    let mut checked = 0;
    for k in 0..50 {
        let mu = random_atoms(&mut rng, 8, 0.05);
        let q = Premeasure::exact(mu.clone());
        let target: Vec<Point> = mu.atoms.iter().map(|a| a.position.clone()).collect();
        let mass = total_weight(&mu);
        for delta in [0.2, 0.1, 0.05] {
            let cands = generate_cover_candidates(&mu.space, &target, delta, CoverStrategy::default()).unwrap();
            let inst = CoverInstance::new(target.clone(), delta, cands, q.clone()).unwrap();
            let res = min_cover_value(&inst, CoverLimits::default()).unwrap();
            check(res.status.is_exact(), || format!("instance {k}, delta={delta}: not exact"))?;
            for t in &target {
                let hit = res.chosen.iter().any(|b| mu.space.distance(&b.center, t).unwrap() <= b.radius + 1e-12);
                check(hit, || format!("instance {k}, delta={delta}: target {t:?} uncovered"))?;
            }
            let value = exact_sum(res.chosen.iter().flat_map(|b| mu.atoms_in_ball(b).map(|a| a.weight)));
            check(value >= mass, || format!("instance {k}, delta={delta}: {value} < {mass}"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} exact covers, every value >= mu(target)"))
}

fn c7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(107);
    let st = PackingStrategy::default();
    let sched = [0.1, 0.05, 0.02];
    let mut done = 0;
    let mut worst_add: f64 = 0.0;
    let mut tries = 0;
    while done < 25 {
        tries += 1;
        check(tries < 200, || "too few exact instances".into())?;
        let mu = random_atoms(&mut rng, 6, 0.05);
        let q = Premeasure::averaged(mu);
        let h = |u: &OpenSet| packing_sweep(u, &q, &sched, &st).unwrap();
        let x = rng.gen_range(0.3..0.7);
        let w = rng.gen_range(0.05..0.2);
        let u1 = OpenSet::boxed([-0.1, -0.1], [x + w, 1.1]).unwrap();
        let u2 = OpenSet::boxed([x - w, -0.1], [1.1, 1.1]).unwrap();
        let v1 = OpenSet::boxed([-0.1, -0.1], [x - w, 1.1]).unwrap();
        let v2 = OpenSet::boxed([x + w, -0.1], [1.1, 1.1]).unwrap();
        let runs = [h(&u1), h(&u2), h(&u1.union(&u2).unwrap()), h(&v1), h(&v2), h(&v1.union(&v2).unwrap())];
        if !runs.iter().all(|s| s.all_exact) {
            continue;
        }
        let [a, b, ab, c, d, cd] = runs.map(|s| s.limit);
        check(ab <= a + b + 1e-9, || format!("subadditivity: {ab} > {a} + {b}"))?;
        check((cd - c - d).abs() <= 1e-12, || format!("disjoint additivity: {cd} vs {c} + {d}"))?;
        worst_add = worst_add.max((cd - c - d).abs());
        done += 1;
    }
    Ok(format!("25 exact instances; disjoint additivity error <= {worst_add:.1e}"))
}

fn c8() -> Outcome {
    let mu = SignedMeasure::zero(plane())
        .with_atom(Point::euclidean([0.0, 0.0]), 2.0)
        .unwrap()
        .with_atom(Point::euclidean([1.0, 0.0]), -1.0)
        .unwrap();
    let target = vec![Point::euclidean([0.0, 0.0]), Point::euclidean([1.0, 0.0])];
    let cover = signed_cover_reconstruct(&mu, &target, &DELTAS, CoverStrategy::default(), CoverLimits::default()).unwrap();
    check((cover.plus.limit - 2.0).abs() <= 1e-9, || format!("cover plus {}", cover.plus.limit))?;
    check((cover.minus.limit - 1.0).abs() <= 1e-9, || format!("cover minus {}", cover.minus.limit))?;
    let (qp, qm) = Premeasure::signed_pair(PremeasureKind::Averaged, mu.clone()).unwrap();
    let spec = SampleSpec {
        centers: mu.support_sample(0),
        radii: vec![0.001, 0.01, 0.05, 0.1],
    };
    let (cp, cm) = certify_signed_bounds(&qp, &qm, &mu, 0.5, 2.0, &spec).unwrap();
    let gamma = ReferenceMeasure::lebesgue(2, 0.5).unwrap().gamma;
    let a = CompactSet::points(vec![vec![0.0, 0.0], vec![1.0, 0.0]]);
    let pack = signed_packing_reconstruct(&mu, &qp, &qm, &a, &EPS, &DELTAS, &PackingStrategy::default(), (&cp, &cm), gamma).unwrap();
    check((pack.plus.estimate - 2.0).abs() <= 1e-9, || format!("packing plus {}", pack.plus.estimate))?;
    check((pack.minus.estimate - 1.0).abs() <= 1e-9, || format!("packing minus {}", pack.minus.estimate))?;
    let v = &pack.variation;
    check(v.passed, || format!("variation sandwich: {v:?}"))?;
    check((v.mu_a - 3.0).abs() <= 1e-12, || format!("|mu|(A) = {}", v.mu_a))?;
    Ok(format!(
        "cover ({}, {}), packing ({}, {}); {:.3} <= {} <= {}",
        cover.plus.limit, cover.minus.limit, pack.plus.estimate, pack.minus.estimate, v.lower_bound, v.estimate, v.upper_bound
    ))
}

fn c9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(109);
    let mut worst: f64 = 0.0;
    for k in 0..20 {
        let n = rng.gen_range(2..=8);
        let mu = random_atoms(&mut rng, n, 0.05);
        let q = Premeasure::averaged(mu.clone());
        let r = compare_constructions(&atom_coords(&mu), &q, &[0.05, 0.02], &[0.05, 0.02, 0.01], &PackingStrategy::default())
            .unwrap();
        check(r.all_exact, || format!("instance {k}: heuristic step"))?;
        check(r.gap < 1e-6, || format!("instance {k}: gap {}", r.gap))?;
        check((r.t_estimate - total_weight(&mu)).abs() < 1e-9, || format!("instance {k}: T value {}", r.t_estimate))?;
        worst = worst.max(r.gap);
    }
    Ok(format!("20 instances, max gap = {worst:.1e}"))
}

fn c10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(110);
    let mut worst: f64 = 0.0;
    for k in 0..10 {
        let mu = random_atoms(&mut rng, 10, 0.05);
        let q = Premeasure::exact(mu.clone());
        let spec = SampleSpec {
            centers: mu.support_sample(0),
            radii: vec![0.001, 0.01, 0.1, 0.5],
        };
        let cert = certify_bounds(&q, &mu, 1.0, 1.0, f64::INFINITY, &spec).unwrap();
        check(cert.passed, || format!("instance {k}: certificate with alpha = C = 1 failed"))?;
        let a = CompactSet::points(atom_coords(&mu));
        let est = outer_regularize(&a, &q, &EPS, &DELTAS, &PackingStrategy::default()).unwrap();
        let err = (est.estimate - total_weight(&mu)).abs();
        check(err <= 1e-9, || format!("instance {k}: error {err:e}"))?;
        worst = worst.max(err);
    }
    Ok(format!("10 instances, max |estimate - mu| = {worst:.1e}"))
}

fn c11() -> Outcome {
    let space = plane();
    let fam = random_family(111, 200);
    let out = greedy_subfamilies(&space, &fam, 9).map_err(|e| e.to_string())?;
    let dist = |a: &Ball, b: &Ball| {
        let (x, y) = (a.coords(), b.coords());
        ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)).sqrt()
    };
    let mut pairs = 0;
    let mut violations = 0;
    for sub in &out.subfamilies {
        for i in 0..sub.len() {
            for j in 0..i {
                pairs += 1;
                if dist(&fam.balls[sub[i]], &fam.balls[sub[j]]) <= fam.balls[sub[i]].radius + fam.balls[sub[j]].radius {
                    violations += 1;
                }
            }
        }
    }
    check(violations == 0, || format!("{violations} overlapping pairs"))?;
    let chosen: Vec<&Ball> = out.subfamilies.iter().flatten().map(|&i| &fam.balls[i]).collect();
    for b in &fam.balls {
        check(chosen.iter().any(|c| dist(c, b) <= c.radius), || format!("centre of {b:?} uncovered"))?;
    }
    check(out.count() <= 19, || format!("{} subfamilies", out.count()))?;

    let mut mu = SignedMeasure::zero(space.clone())
        .with_chain(PolylineChain::segment([0.1, 0.5], [0.9, 0.5], 1.0).unwrap())
        .unwrap();
    mu.push_atom(Point::euclidean([0.2, 0.2]), 1.0).unwrap();
    mu.push_atom(Point::euclidean([0.8, 0.2]), 0.5).unwrap();
    let u = OpenSet::boxed([-0.5, -0.5], [1.5, 1.5]).unwrap();
    let params = DoublingParams::new(0.5, 2.0, 1e-6, 0.2).unwrap();
    let cover = besicovitch_with_doubling(&mu.support_sample(20), &u, &mu, &params, 0.2).unwrap();
    check(cover.passed, || format!("uncovered points {:?}", cover.uncovered))?;
    for b in &cover.balls {
        let big = mu.ball_mass(&b.ball).unwrap();
        let small = mu.ball_mass(&Ball::new(b.ball.center.clone(), 0.5 * b.ball.radius).unwrap()).unwrap();
        check(big <= (2.0 + 1e-6) * small, || format!("{:?}: {big} > (gamma + eps0) {small}", b.ball))?;
    }
    Ok(format!(
        "{} subfamilies, {pairs} pairs checked, 0 violations; {} doubling balls re-verified",
        out.count(),
        cover.balls.len()
    ))
}

fn c12() -> Outcome {
    let eta = 1.0 / 3.0;
    let cands = circle_candidates([0.0, 0.0], 1.0, 720);
    let base = Point::euclidean([0.0, 0.0]);
    let out = directional_limited_probe(
        &plane(),
        &DirectionalProbeParams {
            xi: 2.0,
            eta,
            base: base.clone(),
            candidates: cands.clone(),
        },
    )
    .unwrap();
    // brute force: smallest grid step whose chord reaches eta, from coordinates
    let c0 = cands[0].coords().unwrap();
    let step = (1..720)
        .find(|&k| {
            let ck = cands[k].coords().unwrap();
            ((ck[0] - c0[0]).powi(2) + (ck[1] - c0[1]).powi(2)).sqrt() >= eta
        })
        .unwrap();
    let oracle = 720 / step;
    check(out.max_card == 18 && oracle == 18, || format!("max_card {} oracle {oracle}", out.max_card))?;
    let w = &out.witness_subset;
    for i in 0..w.len() {
        for j in 0..i {
            check(pair_admissible(&plane(), &base, &w[i], &w[j], eta).unwrap(), || "witness pair not admissible".into())?;
        }
    }
    for rays in [5, 10, 25] {
        let star = MetricSpace::star_graph(rays, 10.0);
        let o = directional_limited_probe(
            &star,
            &DirectionalProbeParams {
                xi: 2.0,
                eta,
                base: Point::hub(),
                candidates: star_candidates(rays, 1.0),
            },
        )
        .unwrap();
        check(o.max_card == rays, || format!("star graph {rays}: max_card {}", o.max_card))?;
    }
    Ok("circle grid max_card 18 = oracle; star graphs 5, 10, 25 give 5, 10, 25".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("C1 dirac covering loss", c1, Some(5)),
        ("C2 dirac packing recovery", c2, Some(5)),
        ("C3 curve covering loss", c3, Some(30)),
        ("C4 atomic exactness", c4, Some(60)),
        ("C5 sandwich", c5, Some(120)),
        ("C6 cover dominates measure", c6, Some(60)),
        ("C7 sub-additivity", c7, None),
        ("C8 signed reconstruction", c8, Some(30)),
        ("C9 tricot equivalence", c9, Some(60)),
        ("C10 stability", c10, None),
        ("C11 besicovitch properties", c11, None),
        ("C12 directional probe", c12, None),
    ];
    let mut failed = 0;
    for (name, run, limit) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let took = start.elapsed();
        let outcome = match (outcome, limit) {
            (Ok(msg), Some(s)) if took > Duration::from_secs(s) => Err(format!("{msg}; took {took:.1?}, limit {s} s")),
            (o, _) => o,
        };
        match outcome {
            Ok(msg) => println!("PASS {name} ({took:.2?}): {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL {name} ({took:.2?}): {msg}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
