//! Acceptance suite: one PASS/FAIL line per criterion, then a single assertion.

use std::io::Write;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use schroeder_core::corpus::{random_cubics, random_quadratics, CorpusEntry, DEFAULT_SEED};
use schroeder_core::dynamics::periodic_point_near;
use schroeder_core::growth::{series_order, DEFAULT_SAMPLES};
use schroeder_core::poly::Poly;
use schroeder_core::rational::{MapSpec, RationalMap};
use schroeder_core::report::{run, Command, JobConfig, RenderKind};
use schroeder_core::schroeder::{SchroederSeries, DEFAULT_ORDER};
use schroeder_core::singularity::basin::basin_components_of_infinity;
use schroeder_core::singularity::census::{census, census_with_ladder, CensusOptions};
use schroeder_core::singularity::cover::{complete_covering_probe, CoverVerdict, DEFAULT_COVER_RADII};
use schroeder_core::singularity::tracts::Verdict;
use schroeder_core::singularity::BoxLadder;
use schroeder_core::sphere::{chordal, SpherePoint};
use schroeder_core::sweep::{sweep_cell, SweepOptions};
use schroeder_core::unhyp::semihyperbolicity_probe;

// tolerances and budgets
const COEFF_TOL: f64 = 1e-12;
const EXP_EVAL_TOL: f64 = 1e-9;
const COSH_EVAL_TOL: f64 = 1e-8;
const FE_TOL: f64 = 1e-7;
const ORDER_REL_TOL: f64 = 0.10;
const ORDER_R_MAX: f64 = 1e6;
const SPIRAL_MAX: f64 = 0.01;
const SPIRAL_AGREEMENT: f64 = 0.05;
const TRANSLATION_TOL: f64 = 4.0 * f64::EPSILON;
const CORPUS_SIZE: usize = 100;
const PROBE_GRID: usize = 1024;
const PROBE_RADIUS: f64 = 0.05;
const PROBE_DEPTH: usize = 10;

struct Line {
    passed: bool,
    detail: String,
}

fn line(passed: bool, detail: impl Into<String>) -> Line {
    Line {
        passed,
        detail: detail.into(),
    }
}

fn poly_map(coeffs: &[f64]) -> Arc<RationalMap> {
    Arc::new(RationalMap::polynomial(Poly::from_real(coeffs)).unwrap())
}

fn series_at(map: Arc<RationalMap>, z0: f64) -> SchroederSeries {
    let pt = periodic_point_near(&map, Complex64::new(z0, 0.0), 1).unwrap();
    SchroederSeries::build(map, &pt, DEFAULT_ORDER).unwrap()
}

fn exp_series() -> SchroederSeries {
    series_at(poly_map(&[0.0, 0.0, 1.0]), 1.0)
}

fn cosh_series() -> SchroederSeries {
    series_at(poly_map(&[-2.0, 0.0, 1.0]), 2.0)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn finite(v: SpherePoint) -> Complex64 {
    v.finite().unwrap_or(Complex64::new(f64::INFINITY, 0.0))
}

fn c1() -> Line {
    let t = Instant::now();
    let s = exp_series();
    let err = (0..=30)
        .map(|n| (s.coeffs()[n] - 1.0 / factorial(n)).norm())
        .fold(0.0, f64::max);
    let v = finite(s.evaluate(Complex64::new(4f64.ln(), 0.0)));
    let dt = t.elapsed();
    let ev = (v - 4.0).norm();
    line(
        err < COEFF_TOL && ev < EXP_EVAL_TOL && dt < Duration::from_secs(1),
        format!("max |a_n - 1/n!| = {err:.2e} (n<=30), |h(ln 4) - 4| = {ev:.2e}, {dt:.2?}"),
    )
}

fn c2() -> Line {
    let s = cosh_series();
    let err = (1..=15)
        .map(|n| (s.coeffs()[n] - 2.0 / factorial(2 * n)).norm())
        .fold((s.coeffs()[0] - 2.0).norm(), f64::max);
    let v = finite(s.evaluate(Complex64::new(1.0, 0.0)));
    let ev = (v - 2.0 * 1f64.cosh()).norm();
    line(
        err < COEFF_TOL && ev < COSH_EVAL_TOL,
        format!("max |a_n - 2/(2n)!| = {err:.2e} (n<=15), |h(1) - 2cosh 1| = {ev:.2e}"),
    )
}

fn c3() -> Line {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for e in random_cubics(DEFAULT_SEED, 5).unwrap() {
        let s = SchroederSeries::build(e.map.clone(), &e.point, DEFAULT_ORDER).unwrap();
        let rmax = 10.0 * s.r_safe();
        for _ in 0..200 {
            let w = Complex64::from_polar(rmax * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..std::f64::consts::TAU));
            let d = chordal(e.map.eval(s.evaluate(w)), s.evaluate(s.lambda() * w));
            worst = worst.max(d);
        }
    }
    let dt = t.elapsed();
    line(
        worst < FE_TOL && dt < Duration::from_secs(10),
        format!("5 cubics x 200 points: max chordal residual {worst:.2e}, {dt:.2?}"),
    )
}

fn c4(quadratics: &[CorpusEntry]) -> Line {
    let t = Instant::now();
    let mut all = vec![exp_series(), cosh_series()];
    for e in quadratics.iter().take(3) {
        all.push(SchroederSeries::build(e.map.clone(), &e.point, DEFAULT_ORDER).unwrap());
    }
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for s in &all {
        match series_order(s, ORDER_R_MAX, DEFAULT_SAMPLES) {
            Ok(p) => {
                let rho = p.theoretical.unwrap();
                let rel = (p.slope - rho).abs() / rho;
                worst = worst.max(rel);
                parts.push(format!("{:.3}/{:.3}", p.slope, rho));
            }
            Err(e) => {
                worst = f64::INFINITY;
                parts.push(format!("error: {e}"));
            }
        }
    }
    let dt = t.elapsed();
    line(
        worst <= ORDER_REL_TOL && dt < Duration::from_secs(30),
        format!("empirical/Valiron {}; max relative error {worst:.3}, {dt:.2?}", parts.join(", ")),
    )
}

fn c5() -> Line {
    let s = exp_series();
    let c = census(&s, &CensusOptions::default()).unwrap();
    let with_tracts: Vec<_> = c.families.iter().filter(|f| !f.tracts.is_empty()).collect();
    let values: Vec<SpherePoint> = c.singular_values.iter().map(|v| v.a).collect();
    let two_families = with_tracts.len() == 2 && with_tracts.iter().all(|f| f.verdicts().iter().all(|&v| v == Verdict::Direct));
    let same_set = |x: &[SpherePoint], y: &[SpherePoint]| {
        x.len() == y.len() && x.iter().all(|&a| y.iter().any(|&b| chordal(a, b) < 1e-6))
    };
    let at = same_set(&values, &c.sets.attracting) && same_set(&values, &[SpherePoint::ZERO, SpherePoint::Infinity]);
    let dca = c.direct_count == 2 && c.budget.max_direct == 2 && c.finite_count == 1 && c.finite_count as f64 <= 2.0 * c.rho;
    line(
        two_families && at && dca && c.crosscheck.all_passed,
        format!(
            "families with tracts {:?}, singular values {:?}, direct {} (cap {}), finite {} (2rho {}), cross-check {}",
            with_tracts.iter().map(|f| (f.a.to_string(), f.verdicts())).collect::<Vec<_>>(),
            values.iter().map(ToString::to_string).collect::<Vec<_>>(),
            c.direct_count,
            c.budget.max_direct,
            c.finite_count,
            2.0 * c.rho,
            c.crosscheck.all_passed
        ),
    )
}

/// Per-map corpus results shared by the Lambda-action and PLY criteria.
struct CorpusRun {
    c: Complex64,
    permutation_ok: bool,
    same_value: usize,
    /// Lambda-actions left undecided because the target tract lies past the box.
    unresolved: usize,
    q_inf: usize,
    cap: usize,
    exceeds: bool,
    accepted: bool,
    violation: bool,
}

fn corpus_runs(entries: &[CorpusEntry]) -> Vec<CorpusRun> {
    entries
        .iter()
        .map(|e| {
            let s = SchroederSeries::build(e.map.clone(), &e.point, DEFAULT_ORDER).unwrap();
            let opts = CensusOptions::default();
            let ladder = BoxLadder::evaluate(&s, opts.half_width, opts.grid);
            let c = census_with_ladder(&s, &ladder, &opts).unwrap();
            let permutation_ok = c.matchings.iter().all(|m| {
                m.injective && (chordal(m.source_value, m.target_value) > 1e-6 || m.permutation.is_some())
            });
            let same_value = c.matchings.iter().filter(|m| chordal(m.source_value, m.target_value) <= 1e-6).count();
            let unresolved = c.notes.iter().filter(|n| n.starts_with("lambda-action")).count();
            let b = basin_components_of_infinity(&s, &ladder).unwrap();
            let ply = b.ply(&s);
            CorpusRun {
                c: e.c.unwrap(),
                permutation_ok,
                same_value,
                unresolved,
                q_inf: b.q_inf,
                cap: b.dca_cap,
                exceeds: b.exceeds_dca,
                accepted: b.accepted() && ply.is_some(),
                violation: ply.is_some_and(|p| p.violation),
            }
        })
        .collect()
}

fn c6(runs: &[CorpusRun]) -> Line {
    let s = exp_series();
    let c = census(&s, &CensusOptions::default()).unwrap();
    let m = c.matchings.iter().find(|m| m.source_value == SpherePoint::ZERO);
    let fixed = m.is_some_and(|m| m.permutation.as_deref() == Some(&[0][..]));
    let bad: Vec<String> = runs.iter().filter(|r| !r.permutation_ok).map(|r| r.c.to_string()).collect();
    let covered = runs.iter().filter(|r| r.same_value > 0).count();
    let unresolved: usize = runs.iter().map(|r| r.unresolved).sum();
    line(
        fixed && bad.is_empty() && covered == runs.len(),
        format!(
            "e^w tract over 0 fixed by lambda = 2: {fixed}; runs with a same-value matching {covered}; \
             actions past the box {unresolved}; runs with a non-permutation or non-injective matching: {} of {}{}",
            bad.len(),
            runs.len(),
            if bad.is_empty() { String::new() } else { format!(" {bad:?}") }
        ),
    )
}

fn c7(runs: &[CorpusRun]) -> Line {
    let s = exp_series();
    let ladder = BoxLadder::evaluate(&s, 20.0, 256);
    let b = basin_components_of_infinity(&s, &ladder).unwrap();
    let ply = b.ply(&s);
    let oracle = b.q_inf == 1
        && b.p == Some(0)
        && b.q == Some(1)
        && ply.as_ref().is_some_and(|p| (p.lhs - 1.0).abs() < 1e-12 && (p.rhs - 2.0).abs() < 1e-12 && p.lhs <= p.rhs);
    let accepted = runs.iter().filter(|r| r.accepted).count();
    let violations = runs.iter().filter(|r| r.accepted && r.violation).count();
    let over_cap: Vec<String> = runs
        .iter()
        .filter(|r| r.exceeds)
        .map(|r| format!("{} (q_inf {} > {})", r.c, r.q_inf, r.cap))
        .collect();
    line(
        oracle && violations == 0 && over_cap.is_empty(),
        format!(
            "z^2: q_inf={} p={:?} q={:?} lhs={:?} rhs={:?}; corpus: {accepted}/{} accepted, {violations} PLY violations, q_inf over cap: {over_cap:?}",
            b.q_inf,
            b.p,
            b.q,
            ply.as_ref().map(|p| p.lhs),
            ply.as_ref().map(|p| p.rhs),
            runs.len()
        ),
    )
}

fn c8() -> Line {
    let s = exp_series();
    let ladder = BoxLadder::evaluate(&s, 20.0, 256);
    let b = basin_components_of_infinity(&s, &ladder).unwrap();
    let Some(arc) = b.arcs.first() else {
        return line(false, "no arc traced");
    };
    let defect = arc.translation_defect();
    let spiral = arc.spiral_term().unwrap_or(f64::INFINITY);
    let closed = b.closed_form_spiral.unwrap_or(f64::NAN);
    line(
        defect <= TRANSLATION_TOL && spiral < SPIRAL_MAX && (spiral - closed).abs() < SPIRAL_AGREEMENT,
        format!("translation defect {defect:.1e}, spiral term {spiral:.2e}, closed form {closed}"),
    )
}

fn c9() -> Line {
    let s = exp_series();
    let ladder = BoxLadder::evaluate(&s, 20.0, 256);
    let at0 = complete_covering_probe(&s, &ladder, SpherePoint::ZERO, &DEFAULT_COVER_RADII).unwrap().verdict;
    let at1 = complete_covering_probe(&s, &ladder, SpherePoint::real(1.0), &DEFAULT_COVER_RADII).unwrap().verdict;
    let o = SweepOptions::default();
    let s0 = sweep_cell(&o, Complex64::new(0.0, 0.0));
    let s1 = sweep_cell(&o, Complex64::new(-1.0, 0.0));
    let cycles = s0.in_c && s0.in_h && s0.period == Some(1) && s1.in_c && s1.in_h && s1.period == Some(2);
    line(
        at0 == CoverVerdict::UnboundedTractFound && at1 == CoverVerdict::CoversCompletely && cycles,
        format!(
            "e^w: a=0 {at0:?}, a=1 {at1:?}; sweep c=0 in H {} period {:?}, c=-1 in H {} period {:?}",
            s0.in_h, s0.period, s1.in_h, s1.period
        ),
    )
}

fn c10() -> Line {
    let t = Instant::now();
    let map = poly_map(&[0.0, 0.0, 1.0]);
    let run = |a| semihyperbolicity_probe(&map, a, PROBE_RADIUS, PROBE_DEPTH, PROBE_GRID).unwrap();
    let p0 = run(SpherePoint::ZERO);
    let pinf = run(SpherePoint::Infinity);
    let p1 = run(SpherePoint::real(1.0));
    let dt = t.elapsed();
    let powers: Vec<usize> = (1..=PROBE_DEPTH).map(|k| 1 << k).collect();
    let ok = p0.degrees == powers && pinf.degrees == powers && p1.degrees.iter().all(|&d| d == 1) && p1.degrees.len() == PROBE_DEPTH;
    line(
        ok && dt < Duration::from_secs(60),
        format!("degrees at 0 {:?}, at inf {:?}, at 1 {:?}; grid {PROBE_GRID}, {dt:.2?}", p0.degrees, pinf.degrees, p1.degrees),
    )
}

fn regression_jobs() -> Vec<(&'static str, Command, JobConfig)> {
    let spec = |c: &[f64]| Some(MapSpec::from_map(&RationalMap::polynomial(Poly::from_real(c)).unwrap()));
    let z2 = JobConfig {
        map: spec(&[0.0, 0.0, 1.0]),
        ..JobConfig::default()
    };
    let cosh = JobConfig {
        map: spec(&[-2.0, 0.0, 1.0]),
        z0: Some(SpherePoint::real(2.0)),
        ..JobConfig::default()
    };
    let basilica = JobConfig {
        map: spec(&[-1.0, 0.0, 1.0]),
        ..JobConfig::default()
    };
    let with = |base: &JobConfig, f: &dyn Fn(&mut JobConfig)| {
        let mut c = base.clone();
        f(&mut c);
        c
    };
    vec![
        ("coeffs z^2", Command::Coeffs, z2.clone()),
        ("coeffs z^2-2", Command::Coeffs, cosh.clone()),
        ("eval z^2-2", Command::Eval, with(&cosh, &|c| c.w = vec![Complex64::new(1.0, 0.0), Complex64::new(-30.0, 400.0)])),
        ("order z^2", Command::Order, with(&z2, &|c| c.samples = 128)),
        ("tracts z^2 over 0", Command::Tracts, with(&z2, &|c| c.value = Some(SpherePoint::ZERO))),
        ("tracts census z^2-1", Command::Tracts, with(&basilica, &|c| c.census = true)),
        ("ply z^2-1", Command::Ply, basilica.clone()),
        ("probe z^2-1", Command::Probe, with(&basilica, &|c| {
            c.value = Some(SpherePoint::ZERO);
            c.k_max = 4;
            c.orbit_length = 2000;
        })),
        ("cover z^2 at 1", Command::Cover, with(&z2, &|c| c.value = Some(SpherePoint::real(1.0)))),
        ("render domain z^2-2", Command::Render, with(&cosh, &|c| c.grid = 128)),
        ("render julia z^2-1", Command::Render, with(&basilica, &|c| {
            c.render = RenderKind::Julia;
            c.half_width = 2.0;
            c.grid = 128;
        })),
        ("sweep", Command::Sweep, with(&JobConfig::default(), &|c| {
            c.nx = 48;
            c.ny = 48;
        })),
        ("sweep with cover", Command::Sweep, with(&JobConfig::default(), &|c| {
            c.nx = 3;
            c.ny = 3;
            c.re = [-1.2, 0.3];
            c.im = [-0.5, 0.5];
            c.sweep_cover = true;
        })),
    ]
}

fn c11() -> Line {
    let mut mismatches = Vec::new();
    let jobs = regression_jobs();
    for (name, cmd, cfg) in &jobs {
        let outputs: Vec<_> = [1, 4, 8]
            .iter()
            .map(|&n| {
                let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
                pool.install(|| run(*cmd, cfg).map(|o| (o.primary, o.extras)).map_err(|e| e.to_string()))
            })
            .collect();
        if outputs.windows(2).any(|w| w[0] != w[1]) || outputs[0].is_err() {
            mismatches.push(format!("{name}: {:?}", outputs[0].as_ref().err()));
        }
    }
    line(
        mismatches.is_empty(),
        format!("{} jobs x threads {{1, 4, 8}}; differing or failing: {mismatches:?}", jobs.len()),
    )
}

#[test]
fn acceptance() {
    let mut out = std::io::stdout();
    let mut results = Vec::new();
    let mut emit = |id: usize, name: &str, l: Line| {
        let tag = if l.passed { "PASS" } else { "FAIL" };
        // written past the test harness capture so every line shows up
        writeln!(out, "[{tag}] {id:>2} {name}: {}", l.detail).unwrap();
        out.flush().unwrap();
        results.push((id, l.passed));
    };
    emit(1, "closed form e^w", c1());
    emit(2, "closed form 2cosh(sqrt w)", c2());
    emit(3, "functional equation on random cubics", c3());
    emit(4, "Valiron order", c4(&random_quadratics(DEFAULT_SEED, 3).unwrap()));
    emit(5, "singularity census of e^w", c5());
    let corpus = random_quadratics(DEFAULT_SEED, CORPUS_SIZE).unwrap();
    let t = Instant::now();
    let runs = corpus_runs(&corpus);
    let corpus_time = t.elapsed();
    emit(6, "lambda-action", c6(&runs));
    emit(7, "PLY inequality", c7(&runs));
    emit(8, "arc tracer", c8());
    emit(9, "complete covering", c9());
    emit(10, "semihyperbolicity probe", c10());
    emit(11, "determinism across thread counts", c11());
    writeln!(std::io::stdout(), "corpus of {CORPUS_SIZE} quadratics analysed in {corpus_time:.1?}").unwrap();
    let failed: Vec<usize> = results.iter().filter(|r| !r.1).map(|r| r.0).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
