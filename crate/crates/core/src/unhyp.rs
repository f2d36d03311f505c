//! Critical orbits, omega-limit sets, the Mañé set, and the covering-degree
//! probe for pullbacks of small disks.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{critical_points, escape_radius, escape_time};
use crate::error::{Error, Result};
use crate::grid::{GridBox, Labeling};
use crate::rational::RationalMap;
use crate::sphere::{chordal, SpherePoint};

pub const DEFAULT_ORBIT_LENGTH: usize = 10_000;
pub const DEFAULT_EPS: f64 = 1e-3;
pub const DEFAULT_TAIL_FRACTION: f64 = 0.5;
/// Tail samples a cluster needs to count as an accumulation point.
pub const CLUSTER_MIN_COUNT: usize = 2;
const JULIA_ESCAPE_ITER: usize = 1000;
const JULIA_DISK_SAMPLES: usize = 32;
const JULIA_DISK_RADIUS: f64 = 1e-3;
const DERIVATIVE_BLOWUP: f64 = 1e8;

#[derive(Clone, Debug, Serialize)]
pub struct OrbitData {
    pub c: SpherePoint,
    /// `f^k(c)` for `k = 0..=K` (truncated at escape).
    pub samples: Vec<SpherePoint>,
    pub escaped: bool,
    pub tail_start: usize,
}

pub fn critical_orbit(map: &RationalMap, c: SpherePoint, k: usize) -> OrbitData {
    let radius = escape_radius(map);
    let mut samples = Vec::with_capacity(k + 1);
    let mut z = c;
    let mut escaped = false;
    for i in 0..=k {
        samples.push(z);
        // a polynomial's critical point at infinity is fixed, not escaping
        if let (Some(r), false) = (radius, c.is_infinite()) {
            if z.is_infinite() || z.finite().is_some_and(|w| w.norm() > r) {
                escaped = true;
                break;
            }
        }
        if i < k {
            z = map.eval(z);
        }
    }
    let tail_start = ((1.0 - DEFAULT_TAIL_FRACTION) * samples.len() as f64) as usize;
    OrbitData {
        c,
        samples,
        escaped,
        tail_start,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Cluster {
    pub center: SpherePoint,
    pub radius: f64,
    pub count: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct OmegaLimitApprox {
    pub c: SpherePoint,
    pub clusters: Vec<Cluster>,
    pub recurrent: bool,
}

/// Greedy chordal `eps`-clustering of the orbit tail.
pub fn omega_limit(orbit: &OrbitData, eps: f64, tail_fraction: f64) -> OmegaLimitApprox {
    if orbit.escaped {
        return OmegaLimitApprox {
            c: orbit.c,
            clusters: vec![Cluster {
                center: SpherePoint::Infinity,
                radius: 0.0,
                count: 1,
            }],
            recurrent: false,
        };
    }
    let n = orbit.samples.len();
    let start = ((1.0 - tail_fraction.clamp(0.0, 1.0)) * n as f64) as usize;
    let mut clusters: Vec<Cluster> = Vec::new();
    for &z in &orbit.samples[start.min(n - 1)..] {
        match clusters.iter_mut().find(|cl| chordal(cl.center, z) < eps) {
            Some(cl) => {
                cl.count += 1;
                cl.radius = cl.radius.max(chordal(cl.center, z));
            }
            None => clusters.push(Cluster {
                center: z,
                radius: 0.0,
                count: 1,
            }),
        }
    }
    clusters.retain(|cl| cl.count >= CLUSTER_MIN_COUNT);
    let recurrent = clusters.iter().any(|cl| chordal(cl.center, orbit.c) < eps);
    OmegaLimitApprox {
        c: orbit.c,
        clusters,
        recurrent,
    }
}

/// Heuristic membership in `J(f)`: mixed escape on a small disk for
/// polynomials, blow-up of the spherical derivative of iterates otherwise.
pub fn in_julia_set(map: &RationalMap, z: SpherePoint) -> bool {
    let disk: Vec<SpherePoint> = match z {
        SpherePoint::Finite(w) => std::iter::once(z)
            .chain((0..JULIA_DISK_SAMPLES).map(|j| {
                let t = std::f64::consts::TAU * j as f64 / JULIA_DISK_SAMPLES as f64;
                SpherePoint::from_complex(w + Complex64::from_polar(JULIA_DISK_RADIUS * (1.0 + w.norm()), t))
            }))
            .collect(),
        SpherePoint::Infinity => {
            if map.is_polynomial() {
                return false;
            }
            std::iter::once(z)
                .chain((0..JULIA_DISK_SAMPLES).map(|j| {
                    let t = std::f64::consts::TAU * j as f64 / JULIA_DISK_SAMPLES as f64;
                    SpherePoint::from_complex(Complex64::from_polar(JULIA_DISK_RADIUS, t).inv())
                }))
                .collect()
        }
    };
    if let Some(r) = escape_radius(map) {
        let esc = disk.iter().filter(|&&p| escape_time(map, p, r, JULIA_ESCAPE_ITER).is_some()).count();
        return esc > 0 && esc < disk.len();
    }
    disk.iter().any(|&p| {
        let mut z = p;
        let mut d = 1.0;
        for _ in 0..200 {
            d *= map.spherical_derivative(z);
            z = map.eval(z);
            if d > DERIVATIVE_BLOWUP {
                return true;
            }
            if !d.is_finite() || d < 1e-300 {
                return false;
            }
        }
        false
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ManeSetApprox {
    pub clusters: Vec<Cluster>,
    /// Critical points that contributed.
    pub sources: Vec<SpherePoint>,
}

impl ManeSetApprox {
    pub fn contains(&self, a: SpherePoint, eps: f64) -> bool {
        self.clusters.iter().any(|cl| chordal(cl.center, a) < cl.radius + eps)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CriticalReport {
    pub c: SpherePoint,
    pub multiplicity: usize,
    pub escaped: bool,
    pub in_julia: bool,
    pub omega: OmegaLimitApprox,
}

/// Orbits and omega-limits of every critical point (computed concurrently).
pub fn critical_reports(map: &RationalMap, k: usize, eps: f64) -> Result<Vec<CriticalReport>> {
    let crit = critical_points(map)?;
    Ok(crit
        .par_iter()
        .map(|&(c, m)| {
            let orbit = critical_orbit(map, c, k);
            CriticalReport {
                c,
                multiplicity: m,
                escaped: orbit.escaped,
                in_julia: in_julia_set(map, c),
                omega: omega_limit(&orbit, eps, DEFAULT_TAIL_FRACTION),
            }
        })
        .collect())
}

pub fn mane_set_approx(map: &RationalMap, k: usize, eps: f64) -> Result<ManeSetApprox> {
    Ok(mane_from_reports(&critical_reports(map, k, eps)?))
}

pub fn mane_from_reports(reports: &[CriticalReport]) -> ManeSetApprox {
    let mut out = ManeSetApprox {
        clusters: Vec::new(),
        sources: Vec::new(),
    };
    for r in reports {
        if r.in_julia && r.omega.recurrent {
            out.sources.push(r.c);
            out.clusters.extend(r.omega.clusters.iter().copied());
        }
    }
    out
}

/// Result of the covering-degree probe at one value.
#[derive(Clone, Debug, Serialize)]
pub struct DegreeProbe {
    pub a: SpherePoint,
    pub r: f64,
    /// Largest covering degree of `f^k` over the components of `f^{-k}(U_r(a))`, per `k`.
    pub degrees: Vec<usize>,
    pub running_max: usize,
    pub grows: bool,
    /// First depth whose degree could not be resolved on the grid.
    pub partial_at: Option<usize>,
}

/// A critical point of `f^k` with its local degree.
#[derive(Clone, Copy, Debug)]
struct CritOfIterate {
    z: SpherePoint,
    local_degree: usize,
}

/// Two sphere charts (identity and `1/z`), each over `[-1.25, 1.25]^2`.
const CHART_HALF_WIDTH: f64 = 1.25;

fn chart_point(chart: usize, u: Complex64) -> SpherePoint {
    if chart == 0 {
        SpherePoint::Finite(u)
    } else if u.norm() == 0.0 {
        SpherePoint::Infinity
    } else {
        SpherePoint::from_complex(u.inv())
    }
}

fn chart_coordinate(z: SpherePoint) -> (usize, Complex64) {
    match z {
        SpherePoint::Finite(w) if w.norm() <= 1.0 => (0, w),
        SpherePoint::Finite(w) => (1, w.inv()),
        SpherePoint::Infinity => (1, Complex64::new(0.0, 0.0)),
    }
}

/// Degree of `f^k` on each component of `f^{-k}(U_r(a))` containing critical
/// points of `f^k`: `1 + sum (local degree - 1)` over those points.
pub fn semihyperbolicity_probe(map: &RationalMap, a: SpherePoint, r: f64, k_max: usize, grid_n: usize) -> Result<DegreeProbe> {
    if k_max == 0 {
        return Err(Error::Precondition("k_max must be positive".into()));
    }
    let crit = critical_points(map)?;
    let grid = GridBox::centered(CHART_HALF_WIDTH, grid_n);
    // current images f^k(z) on both charts
    let mut images: Vec<Vec<SpherePoint>> = (0..2)
        .map(|c| (0..grid.len()).map(|k| chart_point(c, grid.point(k))).collect())
        .collect();
    // critical points of f^k: union over j < k of f^{-j}(C(f))
    let mut layer: Vec<SpherePoint> = crit.iter().map(|c| c.0).collect();
    let mut all_crit: Vec<SpherePoint> = layer.clone();

    let mut degrees = Vec::new();
    let mut partial_at = None;
    for k in 1..=k_max {
        if k > 1 {
            let mut next = Vec::new();
            for &z in &layer {
                for (w, _) in map.preimages(z)? {
                    push_distinct(&mut next, w);
                }
            }
            for &w in &next {
                push_distinct(&mut all_crit, w);
            }
            layer = next;
        }
        for img in images.iter_mut() {
            img.par_iter_mut().for_each(|z| *z = map.eval(*z));
        }
        let labelings: Vec<Labeling> = images
            .iter()
            .map(|img| {
                let mask: Vec<bool> = img.iter().map(|&z| chordal(z, a) < r).collect();
                Labeling::new(grid, &mask)
            })
            .collect();
        let uf = merge_charts(&labelings);

        let crit_k: Vec<CritOfIterate> = all_crit
            .iter()
            .map(|&z| CritOfIterate {
                z,
                local_degree: local_degree(map, &crit, z, k),
            })
            .filter(|c| c.local_degree > 1 && chordal(map.iterate(c.z, k), a) < r)
            .collect();

        let mut groups: Vec<(usize, usize)> = Vec::new(); // (root, excess)
        let mut unresolved = false;
        for c in &crit_k {
            let (chart, u) = chart_coordinate(c.z);
            let label = labelings[chart].label_at(u);
            if label == 0 {
                unresolved = true;
                continue;
            }
            let root = uf.find(chart, label);
            match groups.iter_mut().find(|g| g.0 == root) {
                Some(g) => g.1 += c.local_degree - 1,
                None => groups.push((root, c.local_degree - 1)),
            }
        }
        if unresolved && partial_at.is_none() {
            partial_at = Some(k);
        }
        if partial_at.is_some() {
            break;
        }
        degrees.push(1 + groups.iter().map(|g| g.1).max().unwrap_or(0));
    }
    let running_max = degrees.iter().copied().max().unwrap_or(1);
    let grows = degrees.len() >= 2 && degrees.windows(2).all(|w| w[1] > w[0]);
    Ok(DegreeProbe {
        a,
        r,
        degrees,
        running_max,
        grows,
        partial_at,
    })
}

fn push_distinct(list: &mut Vec<SpherePoint>, z: SpherePoint) {
    if !list.iter().any(|&w| chordal(w, z) < 1e-9) {
        list.push(z);
    }
}

/// `deg_z f^k = prod_{i<k} deg_{f^i(z)} f`.
fn local_degree(map: &RationalMap, crit: &[(SpherePoint, usize)], z: SpherePoint, k: usize) -> usize {
    let mut deg = 1;
    let mut w = z;
    for _ in 0..k {
        if let Some((_, m)) = crit.iter().find(|(c, _)| chordal(*c, w) < 1e-9) {
            deg *= m + 1;
        }
        w = map.eval(w);
    }
    deg
}

/// Union-find over the labels of both charts, joined where pixels overlap.
struct ChartUnion {
    offset: usize,
    parent: Vec<usize>,
}

impl ChartUnion {
    fn find(&self, chart: usize, label: u32) -> usize {
        let mut x = chart * self.offset + label as usize;
        while self.parent[x] != x {
            x = self.parent[x];
        }
        x
    }
}

fn merge_charts(labelings: &[Labeling]) -> ChartUnion {
    let offset = labelings[0].components.len() + 1;
    let total = offset + labelings[1].components.len() + 1;
    let mut parent: Vec<usize> = (0..total).collect();
    fn root(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let grid = labelings[0].grid;
    for (k, &l) in labelings[0].labels.iter().enumerate() {
        if l == 0 {
            continue;
        }
        let u = grid.point(k);
        if u.norm() < 1.0 / CHART_HALF_WIDTH {
            continue;
        }
        let l2 = labelings[1].label_at(u.inv());
        if l2 != 0 {
            let (a, b) = (root(&mut parent, l as usize), root(&mut parent, offset + l2 as usize));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    ChartUnion { offset, parent }
}
