//! Components of `h^{-1}(D_inf)` for polynomial `f`, where `D_inf` is the
//! basin of infinity: their number `q_inf`, cyclic order at infinity, the
//! rotation `p_inf` induced by `w -> lambda w`, and the derived `q`, `m_inf`, `p`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::arc::{closed_form_spiral, trace_asymptotic_arc, ArcTrace, DEFAULT_TARGET_MODULUS};
use super::lambda::MIN_AGREEMENT;
use super::ply::{ply_check, PlyReport};
use super::{thin, BoxLadder, Persistence, PersistentLabeling, MIN_GRID};
use crate::dynamics::{escape_radius, escape_time};
use crate::error::{Error, Result};
use crate::grid::{GridBox, Labeling};
use crate::growth::{dca_budget, valiron_order};
use crate::schroeder::SchroederSeries;
use crate::sphere::{complex_pair, SpherePoint};

pub const MAX_ESCAPE_ITER: usize = 256;
/// Minimum distance to the Julia preimage, in pixels, of a basin pixel.
pub const BASIN_MARGIN: f64 = 0.5;
const GREEN_RADIUS: f64 = 1e8;
const GREEN_EXTRA_ITER: usize = 64;
const ARC_START_TRIES: usize = 8;

#[derive(Clone, Debug, Serialize)]
pub struct BasinComponent {
    /// Labels of its pieces in the base box.
    pub ids: Vec<u32>,
    pub pixels: usize,
    /// First crossing of the arc with the reference circle.
    #[serde(with = "complex_pair")]
    pub crossing: Complex64,
    pub crossing_angle: f64,
    pub crossing_t: f64,
    /// Position in the cyclic order.
    pub position: usize,
    /// Position of the image component under `w -> lambda w`.
    pub image: usize,
    pub cycle_length: usize,
    pub spiral: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BasinReport {
    pub q_inf: usize,
    pub p_inf: Option<usize>,
    pub m_inf: Option<usize>,
    pub q: Option<usize>,
    pub p: Option<usize>,
    /// Components in cyclic order.
    pub components: Vec<BasinComponent>,
    pub reference_radius: f64,
    pub ambiguous_components: usize,
    /// All components matched, rotation consistent, arcs traced.
    pub consistent: bool,
    pub el: bool,
    pub dca_cap: usize,
    /// `q_inf` above the cap: a numerical artifact, not a result.
    pub exceeds_dca: bool,
    pub closed_form_spiral: Option<f64>,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub arcs: Vec<ArcTrace>,
    #[serde(skip)]
    pub labeling: Option<Labeling>,
}

impl BasinReport {
    /// PLY report from the extracted integers; `None` unless the run is consistent.
    pub fn ply(&self, series: &SchroederSeries) -> Option<PlyReport> {
        if !self.consistent {
            return None;
        }
        let mut r = ply_check(
            self.q_inf,
            self.p?,
            self.q?,
            series.lambda(),
            series.map().degree(),
            series.period(),
        )
        .ok()?;
        r.p_inf = self.p_inf;
        r.m_inf = self.m_inf;
        r.el = Some(self.el);
        Some(r)
    }

    /// Consistent with the EL heuristic satisfied.
    pub fn accepted(&self) -> bool {
        self.consistent && self.el && !self.exceeds_dca
    }
}

/// Green's function `g(h(w))` of the basin of infinity at every pixel of
/// every box (0 off the basin, infinite where `h` overflows).
pub fn green_values(series: &SchroederSeries, ladder: &BoxLadder) -> Result<Vec<Vec<f64>>> {
    let map = series.map();
    let radius = escape_radius(map).ok_or_else(|| Error::Precondition("basin of infinity needs a polynomial map".into()))?;
    let d = map.degree() as f64;
    Ok(ladder
        .grids
        .iter()
        .map(|g| g.values.par_iter().map(|&v| green(map, v, radius, d)).collect())
        .collect())
}

fn green(map: &crate::rational::RationalMap, z: SpherePoint, radius: f64, d: f64) -> f64 {
    let Some(k) = escape_time(map, z, radius, MAX_ESCAPE_ITER) else {
        return 0.0;
    };
    let mut z = z;
    let mut scale = 1.0;
    for _ in 0..k {
        z = map.eval(z);
        scale /= d;
    }
    // push further out so that log|z| / d^k has settled
    for _ in 0..GREEN_EXTRA_ITER {
        match z {
            SpherePoint::Finite(w) if w.norm() < GREEN_RADIUS => {
                z = map.eval(z);
                scale /= d;
            }
            _ => break,
        }
    }
    match z {
        SpherePoint::Finite(w) => w.norm().ln() * scale,
        SpherePoint::Infinity => f64::INFINITY,
    }
}

/// Escape status per pixel of every box.
pub fn escape_masks(series: &SchroederSeries, ladder: &BoxLadder) -> Result<Vec<Vec<bool>>> {
    Ok(green_values(series, ladder)?.into_iter().map(|g| g.into_iter().map(|x| x > 0.0).collect()).collect())
}

/// Escaping pixels at estimated distance `G / |grad G|` of at least
/// `BASIN_MARGIN` pixels from the rest. Dropping the others keeps two
/// components that meet at a pinch point of the Julia set apart.
pub fn basin_mask(grid: &GridBox, green: &[f64]) -> Vec<bool> {
    let n = grid.n;
    let s = grid.pixel_size();
    (0..grid.len())
        .map(|k| {
            let g = green[k];
            if !(g > 0.0) || grid.neighbors(k).any(|nb| !(green[nb] > 0.0)) {
                return false;
            }
            if g.is_infinite() {
                return true;
            }
            let (i, j) = (k % n, k / n);
            let diff = |a: usize, b: usize, span: f64| (green[b] - green[a]) / span;
            let gx = match (i > 0, i + 1 < n) {
                (true, true) => diff(k - 1, k + 1, 2.0 * s),
                (true, false) => diff(k - 1, k, s),
                _ => diff(k, k + 1, s),
            };
            let gy = match (j > 0, j + 1 < n) {
                (true, true) => diff(k - n, k + n, 2.0 * s),
                (true, false) => diff(k - n, k, s),
                _ => diff(k, k + n, s),
            };
            let grad = gx.hypot(gy);
            !grad.is_finite() || g >= BASIN_MARGIN * s * grad
        })
        .collect()
}

/// Pixels whose escape status differs from a 4-neighbor: a pixel-scale
/// neighborhood of `h^{-1}(J(f))`.
pub fn julia_proximity_mask(grid: &GridBox, escape: &[bool]) -> Vec<bool> {
    (0..grid.len())
        .map(|k| grid.neighbors(k).any(|nb| escape[nb] != escape[k]))
        .collect()
}

pub fn basin_components_of_infinity(series: &SchroederSeries, ladder: &BoxLadder) -> Result<BasinReport> {
    let n = ladder.base().grid.n;
    if n < MIN_GRID {
        return Err(Error::Precondition(format!("grid {n} < {MIN_GRID}")));
    }
    let lambda = series.lambda();
    let grids: Vec<GridBox> = ladder.grids.iter().map(|g| g.grid).collect();
    let green = green_values(series, ladder)?;
    let masks: Vec<Vec<bool>> = green.iter().map(|g| g.iter().map(|&x| x > 0.0).collect()).collect();
    let basin: Vec<Vec<bool>> = grids.iter().zip(&green).map(|(b, g)| basin_mask(b, g)).collect();
    let pl = PersistentLabeling::from_masks(&grids, &basin);
    let labeling = &pl.labeling;
    let base = labeling.grid;
    let half = base.half_width;
    let mut notes = Vec::new();

    let groups = pl.unbounded_groups();
    let q_inf = groups.len();
    let mut group_of = vec![usize::MAX; labeling.components.len() + 1];
    for (g, ids) in groups.iter().enumerate() {
        for &id in ids {
            group_of[id as usize] = g;
        }
    }
    let ambiguous_components = pl.ids_with(Persistence::Ambiguous).len();

    let rho = valiron_order(series.map().degree(), series.period(), lambda)?;
    let dca_cap = dca_budget(rho, true).max_direct;

    let el = {
        let jm: Vec<Vec<bool>> = grids.iter().zip(&masks).map(|(g, m)| julia_proximity_mask(g, m)).collect();
        let jl = PersistentLabeling::from_masks(&grids, &jm);
        let e = 0.25 * base.pixel_size();
        [Complex64::new(e, e), Complex64::new(-e, e), Complex64::new(e, -e), Complex64::new(-e, -e)]
            .iter()
            .map(|&w| jl.labeling.label_at(w))
            .any(|l| l != 0 && jl.status(l) == Persistence::Unbounded)
    };

    let mut report = BasinReport {
        q_inf,
        p_inf: None,
        m_inf: None,
        q: None,
        p: None,
        components: Vec::new(),
        reference_radius: half / 2.0,
        ambiguous_components,
        consistent: false,
        el,
        dca_cap,
        exceeds_dca: q_inf > dca_cap,
        closed_form_spiral: None,
        notes: Vec::new(),
        arcs: Vec::new(),
        labeling: None,
    };
    if q_inf == 0 {
        report.notes.push("no unbounded escaping component in the box".into());
        report.labeling = Some(pl.labeling);
        return Ok(report);
    }

    // sigma: W -> component containing lambda W
    let members = labeling.members();
    let inner = half / lambda.norm();
    let mut sigma = vec![usize::MAX; q_inf];
    for (i, ids) in groups.iter().enumerate() {
        let pts: Vec<Complex64> = ids
            .iter()
            .flat_map(|&id| members[id as usize - 1].iter())
            .map(|&k| base.point(k))
            .filter(|w| w.norm() < inner)
            .collect();
        if pts.is_empty() {
            notes.push(format!("component {ids:?} has no samples inside |w| < R/|lambda|"));
            continue;
        }
        let samples = thin(&pts, 256);
        let mut votes = vec![0usize; q_inf];
        for w in &samples {
            let l = labeling.label_at(lambda * w);
            if l != 0 && group_of[l as usize] != usize::MAX {
                votes[group_of[l as usize]] += 1;
            }
        }
        let (j, &v) = votes.iter().enumerate().max_by_key(|(j, &v)| (v, std::cmp::Reverse(*j))).unwrap();
        if v as f64 >= MIN_AGREEMENT * samples.len() as f64 {
            sigma[i] = j;
        } else {
            notes.push(format!("component {ids:?}: lambda-image agreement {:.2}", v as f64 / samples.len() as f64));
        }
    }
    let is_perm = sigma.iter().all(|&s| s != usize::MAX) && {
        let mut s = sigma.clone();
        s.sort_unstable();
        s.iter().enumerate().all(|(i, &x)| i == x)
    };
    if !is_perm {
        notes.push("lambda-matching is not a permutation of the unbounded components".into());
        report.notes = notes;
        report.labeling = Some(pl.labeling);
        return Ok(report);
    }
    let cycle_len: Vec<usize> = (0..q_inf)
        .map(|i| {
            let mut k = sigma[i];
            let mut len = 1;
            while k != i {
                k = sigma[k];
                len += 1;
            }
            len
        })
        .collect();

    // arcs and first crossings with the reference circle
    let reference = half / 2.0;
    let mut comps = Vec::new();
    let mut arcs = Vec::new();
    for (i, ids) in groups.iter().enumerate() {
        let period = cycle_len[i];
        let mu = lambda.powi(period as i32).norm();
        let limit = (0.9 * half / mu).min(0.45 * half);
        let floor = 4.0 * base.pixel_size();
        let mut pieces = ids.clone();
        pieces.sort_by_key(|&id| (std::cmp::Reverse(members[id as usize - 1].len()), id));
        let arc = pieces.iter().find_map(|&id| {
            let mut starts: Vec<Complex64> = members[id as usize - 1]
                .iter()
                .map(|&k| base.point(k))
                .filter(|w| w.norm() <= limit && w.norm() >= floor)
                .filter(|w| labeling.label_at(lambda.powi(period as i32) * w) == id)
                .collect();
            starts.sort_by(|a, b| b.norm().total_cmp(&a.norm()).then(a.re.total_cmp(&b.re)).then(a.im.total_cmp(&b.im)));
            starts
                .iter()
                .take(ARC_START_TRIES)
                .find_map(|&w0| trace_asymptotic_arc(labeling, id, w0, lambda, period, DEFAULT_TARGET_MODULUS).ok())
        });
        let Some(arc) = arc else {
            notes.push(format!("component {ids:?}: no arc from w0 to lambda^{period} w0"));
            report.notes = notes;
            report.labeling = Some(pl.labeling);
            return Ok(report);
        };
        let (crossing, crossing_t) = arc
            .first_crossing(reference)
            .ok_or_else(|| Error::Arc("arc never reaches the reference circle".into()))?;
        comps.push(BasinComponent {
            ids: ids.clone(),
            pixels: ids.iter().map(|&id| members[id as usize - 1].len()).sum(),
            crossing,
            crossing_angle: crossing.arg().rem_euclid(std::f64::consts::TAU),
            crossing_t,
            position: 0,
            image: 0,
            cycle_length: period,
            spiral: arc.spiral_term().unwrap_or(f64::NAN),
        });
        arcs.push(arc);
    }

    // cyclic order by angle, ties by crossing parameter
    let mut order: Vec<usize> = (0..q_inf).collect();
    order.sort_by(|&a, &b| {
        comps[a]
            .crossing_angle
            .total_cmp(&comps[b].crossing_angle)
            .then(comps[a].crossing_t.total_cmp(&comps[b].crossing_t))
    });
    let mut position = vec![0; q_inf];
    for (pos, &i) in order.iter().enumerate() {
        position[i] = pos;
    }
    for i in 0..q_inf {
        comps[i].position = position[i];
        comps[i].image = position[sigma[i]];
    }
    let shifts: Vec<usize> = (0..q_inf)
        .map(|i| (position[sigma[i]] + q_inf - position[i]) % q_inf)
        .collect();
    let p_inf = shifts[0];
    let rotation = shifts.iter().all(|&s| s == p_inf);
    let mut sorted_comps: Vec<BasinComponent> = order.iter().map(|&i| comps[i].clone()).collect();
    sorted_comps.sort_by_key(|c| c.position);
    let sorted_arcs: Vec<ArcTrace> = order.iter().map(|&i| arcs[i].clone()).collect();
    report.components = sorted_comps;
    report.arcs = sorted_arcs;
    if !rotation {
        notes.push(format!("lambda does not act as a rotation of the cyclic order: shifts {shifts:?}"));
        report.notes = notes;
        report.labeling = Some(pl.labeling);
        return Ok(report);
    }
    let q = q_inf / gcd(p_inf, q_inf);
    let m_inf = q_inf / q;
    let p = p_inf / m_inf;
    if cycle_len.iter().any(|&c| c != q) {
        notes.push("cycle lengths disagree with the rotation order".into());
    }
    report.p_inf = Some(p_inf);
    report.q = Some(q);
    report.m_inf = Some(m_inf);
    report.p = Some(p);
    report.closed_form_spiral = Some(closed_form_spiral(q, p as i64, lambda));
    report.consistent = cycle_len.iter().all(|&c| c == q);
    report.notes = notes;
    report.labeling = Some(pl.labeling);
    Ok(report)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gcd_basics() {
        assert_eq!(gcd(0, 5), 5);
        assert_eq!(gcd(4, 6), 2);
    }
}
