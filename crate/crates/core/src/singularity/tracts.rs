//! Tract families over a value `a`: nested components of `h^{-1}(U_r(a))`
//! along a radius ladder, with a direct/indirect verdict per tract.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::{BoxLadder, Persistence, PersistentLabeling, MIN_GRID};
use crate::error::{Error, Result};
use crate::grid::Labeling;
use crate::schroeder::Evaluator;
use crate::sphere::{chordal, complex_pair, SpherePoint};

pub const DEFAULT_FIRST_RADIUS: f64 = 0.2;
pub const DEFAULT_RUNGS: usize = 4;
pub const RUNG_RATIO: f64 = 4.0;
/// Chordal residual accepted for a solution of `h(w) = a`.
pub const ROOT_TOL: f64 = 1e-8;
const MAX_ROOT_STARTS: usize = 32;

pub fn default_ladder() -> Vec<f64> {
    radius_ladder(DEFAULT_FIRST_RADIUS, DEFAULT_RUNGS)
}

pub fn radius_ladder(r1: f64, rungs: usize) -> Vec<f64> {
    (0..rungs).map(|i| r1 / RUNG_RATIO.powi(i as i32)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Direct,
    Indirect,
    NotASingularity,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct ComponentReport {
    pub id: u32,
    pub pixels: usize,
    pub touches_boundary: bool,
    pub persistence: Persistence,
    /// Containing component one rung up (none on the first rung).
    pub parent: Option<u32>,
    #[serde(with = "complex_pair")]
    pub sample: Complex64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Rung {
    pub r: f64,
    pub components: Vec<ComponentReport>,
    #[serde(skip)]
    pub labels: PersistentLabeling,
}

/// One nested chain of unbounded components, one per rung. Each link lists
/// the base-box pieces of the component (several when the box edge cuts it).
#[derive(Clone, Debug, Serialize)]
pub struct Tract {
    pub chain: Vec<Vec<u32>>,
    /// Distinct solutions of `h(w) = a` found in each rung's component.
    pub solutions: Vec<usize>,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, Serialize)]
pub struct TractFamily {
    pub a: SpherePoint,
    pub half_width: f64,
    pub grid: usize,
    pub rungs: Vec<Rung>,
    /// Chains ending in an unbounded component on the deepest rung.
    pub tracts: Vec<Tract>,
    /// First-rung unbounded components that stop being unbounded deeper down.
    pub vanished: Vec<u32>,
    /// Unbounded status could not be decided somewhere on the ladder.
    pub unstable: bool,
}

impl TractFamily {
    pub fn has_singularity(&self) -> bool {
        self.tracts
            .iter()
            .any(|t| matches!(t.verdict, Verdict::Direct | Verdict::Indirect))
    }

    pub fn count(&self, v: Verdict) -> usize {
        self.tracts.iter().filter(|t| t.verdict == v).count()
    }

    pub fn verdicts(&self) -> Vec<Verdict> {
        self.tracts.iter().map(|t| t.verdict).collect()
    }

    pub fn deepest(&self) -> &Rung {
        self.rungs.last().unwrap()
    }
}

/// Components of `h^{-1}(U_r(a))` on the base box with persistence flags.
pub fn preimage_components(ladder: &BoxLadder, a: SpherePoint, r: f64) -> PersistentLabeling {
    PersistentLabeling::new(ladder, |g| g.disk_mask(a, r))
}

/// Builds the tract family over `a` and classifies each tract.
pub fn tract_family<E: Evaluator + ?Sized>(h: &E, ladder: &BoxLadder, a: SpherePoint, radii: &[f64]) -> Result<TractFamily> {
    let n = ladder.base().grid.n;
    if n < MIN_GRID {
        return Err(Error::Precondition(format!("grid {n} < {MIN_GRID}")));
    }
    if radii.len() < 3 || radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Precondition("need at least three strictly decreasing radii".into()));
    }
    let grid = ladder.base().grid;
    let mut rungs: Vec<Rung> = Vec::new();
    for &r in radii {
        let labels = preimage_components(ladder, a, r);
        let components = labels
            .labeling
            .components
            .iter()
            .map(|c| ComponentReport {
                id: c.id,
                pixels: c.pixels,
                touches_boundary: c.touches_boundary,
                persistence: labels.status(c.id),
                parent: rungs.last().map(|prev| prev.labels.labeling.labels[c.first]),
                sample: grid.point(c.first),
            })
            .collect();
        rungs.push(Rung { r, components, labels });
    }

    let unstable = rungs
        .iter()
        .any(|rung| rung.components.iter().any(|c| c.persistence == Persistence::Ambiguous));

    let m = rungs.len();
    let mut tracts = Vec::new();
    for group in rungs[m - 1].labels.unbounded_groups() {
        let mut chain = vec![group];
        for i in (1..m).rev() {
            let child = chain.last().unwrap();
            let mut link: Vec<u32> = child
                .iter()
                .map(|&id| rungs[i].components[id as usize - 1].parent.unwrap())
                .collect();
            let labels = &rungs[i - 1].labels;
            // pull in the other pieces of any cut component
            let roots: Vec<Option<u32>> = link.iter().map(|&id| labels.roots[id as usize - 1]).collect();
            link.extend(labels.unbounded_ids().into_iter().filter(|id| roots.contains(&labels.roots[*id as usize - 1])));
            link.sort_unstable();
            link.dedup();
            chain.push(link);
        }
        chain.reverse();
        let all_unbounded = chain
            .iter()
            .enumerate()
            .all(|(i, ids)| ids.iter().all(|&id| rungs[i].labels.status(id) == Persistence::Unbounded));
        let solutions: Vec<usize> = chain
            .iter()
            .enumerate()
            .map(|(i, ids)| {
                ids.iter()
                    .map(|&id| solutions_in_component(h, &rungs[i].labels.labeling, id, a).len())
                    .sum()
            })
            .collect();
        let verdict = if !all_unbounded {
            Verdict::Inconclusive
        } else if solutions[m - 1] == 0 {
            Verdict::Direct
        } else if solutions.iter().all(|&s| s > 0) {
            Verdict::Indirect
        } else {
            Verdict::Inconclusive
        };
        tracts.push(Tract { chain, solutions, verdict });
    }

    let vanished = rungs[0]
        .labels
        .unbounded_ids()
        .into_iter()
        .filter(|id| !tracts.iter().any(|t| t.chain[0].contains(id)))
        .collect();

    Ok(TractFamily {
        a,
        half_width: ladder.half_width(),
        grid: n,
        rungs,
        tracts,
        vanished,
        unstable,
    })
}

/// Solutions of `h(w) = a` inside one labeled component: local minima of the
/// chordal residual over the component, refined by damped Newton steps.
pub fn solutions_in_component<E: Evaluator + ?Sized>(h: &E, labeling: &Labeling, id: u32, a: SpherePoint) -> Vec<Complex64> {
    let grid = labeling.grid;
    let pixels: Vec<usize> = labeling.pixels_of(id).collect();
    let resid: Vec<(usize, f64)> = pixels
        .par_iter()
        .map(|&k| (k, chordal(h.eval(grid.point(k)), a)))
        .collect();
    let lookup: std::collections::HashMap<usize, f64> = resid.iter().copied().collect();
    let mut minima: Vec<(usize, f64)> = resid
        .iter()
        .copied()
        .filter(|&(k, v)| grid.neighbors(k).all(|nb| lookup.get(&nb).map_or(true, |&u| v <= u)))
        .collect();
    minima.sort_by(|x, y| x.1.total_cmp(&y.1).then(x.0.cmp(&y.0)));
    minima.truncate(MAX_ROOT_STARTS);

    let found: Vec<Complex64> = minima
        .par_iter()
        .filter_map(|&(k, _)| newton_solve(h, grid.point(k), a, grid.pixel_size()))
        .filter(|&w| in_component(labeling, id, w))
        .collect();
    let mut distinct: Vec<Complex64> = Vec::new();
    for w in found {
        if !distinct.iter().any(|d| (d - w).norm() < 1e-6 * (1.0 + w.norm())) {
            distinct.push(w);
        }
    }
    distinct
}

fn in_component(labeling: &Labeling, id: u32, w: Complex64) -> bool {
    match labeling.grid.index_of(w) {
        Some(k) => labeling.labels[k] == id || labeling.grid.neighbors(k).any(|nb| labeling.labels[nb] == id),
        None => false,
    }
}

/// Residual function whose zeros are the solutions of `h(w) = a`.
fn residual<E: Evaluator + ?Sized>(h: &E, w: Complex64, a: SpherePoint) -> Option<Complex64> {
    let v = h.eval(w);
    let r = match a {
        SpherePoint::Finite(a) => v.finite()? - a,
        SpherePoint::Infinity => match v {
            SpherePoint::Infinity => Complex64::new(0.0, 0.0),
            SpherePoint::Finite(z) => z.inv(),
        },
    };
    (r.re.is_finite() && r.im.is_finite()).then_some(r)
}

/// Damped Newton with a central-difference derivative. Only converged
/// iterations count: the step must collapse, not just the residual.
pub fn newton_solve<E: Evaluator + ?Sized>(h: &E, start: Complex64, a: SpherePoint, scale: f64) -> Option<Complex64> {
    let mut w = start;
    let mut f = residual(h, w, a)?;
    let delta = 1e-5 * scale;
    for _ in 0..80 {
        if f.norm() == 0.0 {
            break;
        }
        let dp = (residual(h, w + delta, a)? - residual(h, w - delta, a)?) / (2.0 * delta);
        if dp.norm() == 0.0 || !dp.re.is_finite() {
            return None;
        }
        let full = f / dp;
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..12 {
            let cand = w - full * t;
            if let Some(fc) = residual(h, cand, a) {
                if fc.norm() < f.norm() {
                    w = cand;
                    f = fc;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
        if (w - start).norm() > 64.0 * scale {
            return None;
        }
        if (full * t).norm() < 1e-12 * (1.0 + w.norm()) {
            break;
        }
    }
    let converged = chordal(h.eval(w), a) < ROOT_TOL && {
        let dp = (residual(h, w + delta, a)? - residual(h, w - delta, a)?) / (2.0 * delta);
        (f / dp).norm() < 1e-9 * (1.0 + w.norm())
    };
    converged.then_some(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schroeder::FnEvaluator;

    fn exp() -> FnEvaluator {
        FnEvaluator::entire(|w: Complex64| w.exp())
    }

    #[test]
    fn exp_tract_over_zero_is_left_half_plane() {
        let h = exp();
        let ladder = BoxLadder::evaluate(&h, 20.0, 256);
        let pl = preimage_components(&ladder, SpherePoint::ZERO, 0.1);
        assert_eq!(pl.unbounded_ids().len(), 1);
        let id = pl.unbounded_ids()[0];
        let grid = pl.labeling.grid;
        for k in pl.labeling.pixels_of(id) {
            assert!(grid.point(k).re < 0.1f64.ln() + grid.pixel_size());
        }
    }

    #[test]
    fn exp_over_one_gives_bounded_ovals() {
        let h = exp();
        let ladder = BoxLadder::evaluate(&h, 20.0, 256);
        let pl = preimage_components(&ladder, SpherePoint::real(1.0), 0.1);
        assert!(pl.unbounded_ids().is_empty());
        // 2 pi k i for |k| <= 3 inside [-20, 20]^2
        assert_eq!(pl.labeling.components.len(), 7);
    }

    #[test]
    fn exp_verdicts() {
        let h = exp();
        let ladder = BoxLadder::evaluate(&h, 20.0, 256);
        let zero = tract_family(&h, &ladder, SpherePoint::ZERO, &default_ladder()).unwrap();
        assert_eq!(zero.verdicts(), vec![Verdict::Direct]);
        let inf = tract_family(&h, &ladder, SpherePoint::Infinity, &default_ladder()).unwrap();
        assert_eq!(inf.verdicts(), vec![Verdict::Direct]);
        let one = tract_family(&h, &ladder, SpherePoint::real(1.0), &default_ladder()).unwrap();
        assert!(one.tracts.is_empty() && !one.has_singularity());
    }

    #[test]
    fn newton_finds_roots_of_exp_minus_one() {
        let h = exp();
        let w = newton_solve(&h, Complex64::new(0.1, 6.0), SpherePoint::real(1.0), 0.1).unwrap();
        assert!((w - Complex64::new(0.0, std::f64::consts::TAU)).norm() < 1e-10);
        assert!(newton_solve(&h, Complex64::new(-19.0, 0.0), SpherePoint::ZERO, 0.1).is_none());
    }
}
