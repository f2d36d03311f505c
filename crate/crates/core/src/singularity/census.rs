//! Singularity census over candidate values, with the cross-check of detected
//! singular values against the dynamical sets AT, PB, the undetermined
//! indifferent points and the approximate Mañé set.

use rayon::prelude::*;
use serde::Serialize;

use super::lambda::{lambda_action, LambdaMatching};
use super::tracts::{tract_family, TractFamily, Verdict};
use super::BoxLadder;
use crate::dynamics::{critical_points, non_repelling_cycles, PointClass};
use crate::error::Result;
use crate::growth::{dca_budget, valiron_order, DcaBudget};
use crate::rational::RationalMap;
use crate::schroeder::SchroederSeries;
use crate::sphere::{chordal, SpherePoint};
use crate::unhyp::{mane_set_approx, ManeSetApprox};

/// Chordal tolerance for identifying values with cycle points.
pub const VALUE_TOL: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct CensusOptions {
    pub half_width: f64,
    pub grid: usize,
    pub radii: Vec<f64>,
    pub max_period: usize,
    pub orbit_length: usize,
    pub eps: f64,
    /// Extra values probed besides the dynamically motivated ones.
    pub controls: Vec<SpherePoint>,
}

impl Default for CensusOptions {
    fn default() -> Self {
        CensusOptions {
            half_width: 20.0,
            grid: 256,
            radii: super::tracts::default_ladder(),
            max_period: 3,
            orbit_length: 2000,
            eps: crate::unhyp::DEFAULT_EPS,
            controls: vec![SpherePoint::real(-1.0), SpherePoint::from_complex(num_complex::Complex64::new(0.0, 1.0))],
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DynamicsSets {
    /// Points of attracting (incl. superattracting) cycles.
    pub attracting: Vec<SpherePoint>,
    pub parabolic: Vec<SpherePoint>,
    pub indifferent: Vec<SpherePoint>,
    pub mane: ManeSetApprox,
}

impl DynamicsSets {
    pub fn compute(map: &RationalMap, max_period: usize, orbit_length: usize, eps: f64) -> Result<Self> {
        let cycles = non_repelling_cycles(map, max_period)?;
        let pick = |pred: &dyn Fn(PointClass) -> bool| -> Vec<SpherePoint> {
            cycles.iter().filter(|c| pred(c.class)).map(|c| c.z0).collect()
        };
        Ok(DynamicsSets {
            attracting: pick(&|c| c.is_attracting()),
            parabolic: pick(&|c| c == PointClass::Parabolic),
            indifferent: pick(&|c| c == PointClass::IndifferentUndetermined),
            mane: mane_set_approx(map, orbit_length, eps)?,
        })
    }

    pub fn in_attracting(&self, a: SpherePoint) -> bool {
        near_any(&self.attracting, a)
    }

    pub fn in_periodic_targets(&self, a: SpherePoint) -> bool {
        near_any(&self.attracting, a) || near_any(&self.parabolic, a) || near_any(&self.indifferent, a)
    }

    pub fn in_unhyperbolic(&self, a: SpherePoint, eps: f64) -> bool {
        self.in_periodic_targets(a) || self.mane.contains(a, eps)
    }
}

fn near_any(set: &[SpherePoint], a: SpherePoint) -> bool {
    set.iter().any(|&z| chordal(z, a) < VALUE_TOL)
}

#[derive(Clone, Debug, Serialize)]
pub struct SingularValue {
    pub a: SpherePoint,
    pub direct: usize,
    pub indirect: usize,
    /// Some tract over `a` returns to itself under the lambda-action.
    pub periodic: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckItem {
    pub name: &'static str,
    pub passed: bool,
    pub discrepancies: Vec<SpherePoint>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CrossCheck {
    pub checks: Vec<CheckItem>,
    pub all_passed: bool,
}

/// Reports, never corrects, values outside the sets they must belong to.
pub fn singular_value_crosscheck(values: &[SingularValue], sets: &DynamicsSets, eps: f64) -> CrossCheck {
    let item = |name, bad: Vec<SpherePoint>| CheckItem {
        name,
        passed: bad.is_empty(),
        discrepancies: bad,
    };
    let checks = vec![
        item(
            "direct-values-attracting",
            values.iter().filter(|v| v.direct > 0 && !sets.in_attracting(v.a)).map(|v| v.a).collect(),
        ),
        item(
            "periodic-values-attracting-parabolic-indifferent",
            values.iter().filter(|v| v.periodic && !sets.in_periodic_targets(v.a)).map(|v| v.a).collect(),
        ),
        item(
            "values-unhyperbolic",
            values.iter().filter(|v| !sets.in_unhyperbolic(v.a, eps)).map(|v| v.a).collect(),
        ),
    ];
    let all_passed = checks.iter().all(|c| c.passed);
    CrossCheck { checks, all_passed }
}

#[derive(Clone, Debug, Serialize)]
pub struct Census {
    pub rho: f64,
    pub budget: DcaBudget,
    pub candidates: Vec<SpherePoint>,
    pub families: Vec<TractFamily>,
    pub matchings: Vec<LambdaMatching>,
    pub singular_values: Vec<SingularValue>,
    pub direct_count: usize,
    /// Tracts over finite values.
    pub finite_count: usize,
    pub within_budget: bool,
    pub sets: DynamicsSets,
    pub crosscheck: CrossCheck,
    pub notes: Vec<String>,
}

pub fn census(series: &SchroederSeries, opts: &CensusOptions) -> Result<Census> {
    let ladder = BoxLadder::evaluate(series, opts.half_width, opts.grid);
    census_with_ladder(series, &ladder, opts)
}

/// Census on precomputed box values; `opts.half_width` and `opts.grid` are ignored.
pub fn census_with_ladder(series: &SchroederSeries, ladder: &BoxLadder, opts: &CensusOptions) -> Result<Census> {
    let map = series.map();
    let sets = DynamicsSets::compute(map, opts.max_period, opts.orbit_length, opts.eps)?;
    // values closer than this share their small disks on every rung
    let sep = 2.0 * opts.radii.last().copied().unwrap_or(0.0);
    let mut candidates: Vec<SpherePoint> = Vec::new();
    let mut add = |z: SpherePoint| {
        if !candidates.iter().any(|&c| chordal(c, z) < sep.max(VALUE_TOL)) {
            candidates.push(z);
        }
    };
    sets.attracting.iter().for_each(|&z| add(z));
    sets.parabolic.iter().for_each(|&z| add(z));
    sets.indifferent.iter().for_each(|&z| add(z));
    sets.mane.clusters.iter().for_each(|c| add(c.center));
    for (c, _) in critical_points(map)? {
        let mut z = c;
        for _ in 0..4 {
            z = map.eval(z);
            add(z);
        }
    }
    add(SpherePoint::Finite(series.z0()));
    opts.controls.iter().for_each(|&z| add(z));

    let mut families: Vec<TractFamily> = candidates
        .par_iter()
        .map(|&a| tract_family(series, ladder, a, &opts.radii))
        .collect::<Result<_>>()?;

    let mut notes = Vec::new();
    let mut matchings = Vec::new();
    // (family, tract) -> (family, tract)
    let mut image: Vec<Vec<Option<(usize, usize)>>> = families.iter().map(|f| vec![None; f.tracts.len()]).collect();
    let sources: Vec<usize> = (0..families.len()).filter(|&i| !families[i].tracts.is_empty()).collect();
    for i in sources {
        let b = map.iterate(families[i].a, series.period());
        let j = match families.iter().position(|f| chordal(f.a, b) < sep.max(VALUE_TOL)) {
            Some(j) => j,
            None => {
                families.push(tract_family(series, ladder, b, &opts.radii)?);
                candidates.push(b);
                image.push(vec![None; families.last().unwrap().tracts.len()]);
                families.len() - 1
            }
        };
        match lambda_action(&families[i], &families[j], series.lambda(), i == j) {
            Ok(m) => {
                for t in &m.matches {
                    image[i][t.source] = t.target.map(|x| (j, x));
                }
                matchings.push(m);
            }
            Err(e) => notes.push(format!("lambda-action over {}: {e}", families[i].a)),
        }
    }

    let periodic = |fi: usize, ti: usize| -> bool {
        let mut cur = (fi, ti);
        for _ in 0..=image.iter().map(Vec::len).sum::<usize>() {
            match image[cur.0][cur.1] {
                Some(next) if next == (fi, ti) => return true,
                Some(next) => cur = next,
                None => return false,
            }
        }
        false
    };
    let singular_values: Vec<SingularValue> = families
        .iter()
        .enumerate()
        .filter(|(_, f)| f.has_singularity())
        .map(|(fi, f)| SingularValue {
            a: f.a,
            direct: f.count(Verdict::Direct),
            indirect: f.count(Verdict::Indirect),
            periodic: (0..f.tracts.len()).any(|ti| periodic(fi, ti)),
        })
        .collect();

    let rho = valiron_order(map.degree(), series.period(), series.lambda())?;
    let budget = dca_budget(rho, map.is_polynomial());
    let direct_count = singular_values.iter().map(|v| v.direct).sum();
    let finite_count = singular_values
        .iter()
        .filter(|v| !v.a.is_infinite())
        .map(|v| v.direct + v.indirect)
        .sum();
    let within_budget = direct_count <= budget.max_direct && budget.max_finite.map_or(true, |m| finite_count <= m);
    for f in &families {
        if f.unstable {
            notes.push(format!("unstable nesting over {}", f.a));
        }
    }
    let crosscheck = singular_value_crosscheck(&singular_values, &sets, opts.eps);
    Ok(Census {
        rho,
        budget,
        candidates,
        families,
        matchings,
        singular_values,
        direct_count,
        finite_count,
        within_budget,
        sets,
        crosscheck,
        notes,
    })
}
