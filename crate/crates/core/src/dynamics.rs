//! Critical points, periodic points with multipliers, and the exceptional set.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::rational::{solve_with_infinity, RationalMap};
use crate::sphere::{chordal, complex_pair, SpherePoint};

/// Largest `deg f^p` handed to the all-roots solver.
pub const MAX_SOLVER_DEGREE: usize = 4096;
/// A root of `f^p = id` is dropped when `|f^q(z) - z| < PERIOD_TOL (1 + |z|)` for a proper divisor `q`.
pub const PERIOD_TOL: f64 = 1e-8;
/// Width of the indifferent band around `|lambda| = 1`.
pub const CLASSIFY_EPS: f64 = 1e-9;
/// Largest `n` tried in the parabolic test `lambda^n = 1`.
pub const PARABOLIC_MAX_N: u32 = 64;
pub const PARABOLIC_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointClass {
    Superattracting,
    Attracting,
    Parabolic,
    IndifferentUndetermined,
    Repelling,
}

impl PointClass {
    /// Members of AT(f).
    pub fn is_attracting(self) -> bool {
        matches!(self, PointClass::Superattracting | PointClass::Attracting)
    }
}

impl fmt::Display for PointClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PointClass::Superattracting => "superattracting",
            PointClass::Attracting => "attracting",
            PointClass::Parabolic => "parabolic",
            PointClass::IndifferentUndetermined => "indifferent-undetermined",
            PointClass::Repelling => "repelling",
        };
        f.write_str(s)
    }
}

/// Classifies a multiplier. Cremer and Siegel points are not told apart; both
/// land in [`PointClass::IndifferentUndetermined`].
pub fn classify(lambda: Complex64) -> PointClass {
    let m = lambda.norm();
    if m <= CLASSIFY_EPS {
        PointClass::Superattracting
    } else if m < 1.0 - CLASSIFY_EPS {
        PointClass::Attracting
    } else if m <= 1.0 + CLASSIFY_EPS {
        let mut power = Complex64::new(1.0, 0.0);
        for _ in 0..PARABOLIC_MAX_N {
            power *= lambda;
            if (power - 1.0).norm() < PARABOLIC_TOL {
                return PointClass::Parabolic;
            }
        }
        PointClass::IndifferentUndetermined
    } else {
        PointClass::Repelling
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodicPoint {
    pub z0: SpherePoint,
    pub period: usize,
    #[serde(with = "complex_pair")]
    pub multiplier: Complex64,
    pub class: PointClass,
    /// Multiplicity as a root of `f^p(z) = z`.
    pub multiplicity: usize,
}

/// Critical points of `f` with multiplicities; the total is `2d - 2`.
pub fn critical_points(map: &RationalMap) -> Result<Vec<(SpherePoint, usize)>> {
    let (n, d) = (map.num(), map.den());
    let w = &(&n.derivative() * d) - &(n * &d.derivative());
    solve_with_infinity(&w, 2 * map.degree() - 2)
}

/// Every fixed point of `f^p` on the sphere, clustered, with multiplicities
/// summing to `d^p + 1`.
pub fn fixed_points_of_iterate(map: &RationalMap, p: usize) -> Result<Vec<(SpherePoint, usize)>> {
    if p == 0 {
        return Err(Error::Precondition("period must be >= 1".into()));
    }
    let degree = map
        .degree()
        .checked_pow(p as u32)
        .filter(|&d| d <= MAX_SOLVER_DEGREE)
        .ok_or(Error::BudgetExceeded {
            degree: usize::MAX,
            limit: MAX_SOLVER_DEGREE,
        })?;
    let (np, dp) = map.iterate_coefficients(p);
    let g = &np - &(&Poly::identity() * &dp);
    let mut pts = solve_with_infinity(&g, degree + 1)?;
    for (z, m) in pts.iter_mut() {
        if *m == 1 {
            if let SpherePoint::Finite(w) = *z {
                *z = SpherePoint::Finite(polish_fixed_point(map, p, w));
            }
        }
    }
    Ok(pts)
}

/// Newton iterations on `f^p(z) - z`, keeping a step only when it lowers the residual.
pub fn polish_fixed_point(map: &RationalMap, p: usize, mut z: Complex64) -> Complex64 {
    let residual = |z: Complex64| match map.iterate(SpherePoint::Finite(z), p) {
        SpherePoint::Finite(w) => (w - z).norm(),
        SpherePoint::Infinity => f64::INFINITY,
    };
    let mut r = residual(z);
    for _ in 0..8 {
        let (value, deriv) = match iterate_with_derivative(map, z, p) {
            Some(v) => v,
            None => break,
        };
        let step = (value - z) / (deriv - 1.0);
        if !step.re.is_finite() || !step.im.is_finite() {
            break;
        }
        let candidate = z - step;
        let rc = residual(candidate);
        if rc < r {
            z = candidate;
            r = rc;
        } else {
            break;
        }
        if r == 0.0 {
            break;
        }
    }
    z
}

/// `(f^p(z), (f^p)'(z))` along a finite orbit; `None` when the orbit hits a pole.
pub fn iterate_with_derivative(map: &RationalMap, z: Complex64, p: usize) -> Option<(Complex64, Complex64)> {
    let mut w = z;
    let mut d = Complex64::new(1.0, 0.0);
    for _ in 0..p {
        d *= map.derivative(w);
        w = map.eval(SpherePoint::Finite(w)).finite()?;
    }
    Some((w, d))
}

/// Periodic points of exact period `p`, one entry per point of each cycle.
pub fn periodic_points(map: &RationalMap, p: usize) -> Result<Vec<PeriodicPoint>> {
    let candidates = fixed_points_of_iterate(map, p)?;
    let divisors: Vec<usize> = (1..p).filter(|q| p % q == 0).collect();
    let mut out = Vec::new();
    for (z, multiplicity) in candidates {
        let lower = divisors.iter().any(|&q| {
            let fz = map.iterate(z, q);
            match (z, fz) {
                (SpherePoint::Finite(a), SpherePoint::Finite(b)) => (a - b).norm() < PERIOD_TOL * (1.0 + a.norm()),
                _ => chordal(z, fz) < PERIOD_TOL,
            }
        });
        if lower {
            continue;
        }
        let mut cycle = Vec::with_capacity(p);
        let mut w = z;
        for _ in 0..p {
            cycle.push(w);
            w = map.eval(w);
        }
        // A multiple root of f^p(z) = z forces (f^p)'(z) = 1.
        let multiplier = if multiplicity > 1 {
            Complex64::new(1.0, 0.0)
        } else {
            map.cycle_multiplier(&cycle)
        };
        out.push(PeriodicPoint {
            z0: z,
            period: p,
            multiplier,
            class: classify(multiplier),
            multiplicity,
        });
    }
    Ok(out)
}

/// Refines an approximate periodic point of period `p` and builds its record.
pub fn periodic_point_near(map: &RationalMap, z: Complex64, p: usize) -> Result<PeriodicPoint> {
    let z = polish_fixed_point(map, p, z);
    let fz = map.iterate(SpherePoint::Finite(z), p);
    let ok = matches!(fz, SpherePoint::Finite(w) if (w - z).norm() < 1e-9 * (1.0 + z.norm()));
    if !ok {
        return Err(Error::NotPeriodic(format!("{z} (period {p})")));
    }
    let mut cycle = Vec::with_capacity(p);
    let mut w = SpherePoint::Finite(z);
    for _ in 0..p {
        cycle.push(w);
        w = map.eval(w);
    }
    let multiplier = map.cycle_multiplier(&cycle);
    Ok(PeriodicPoint {
        z0: SpherePoint::Finite(z),
        period: p,
        multiplier,
        class: classify(multiplier),
        multiplicity: 1,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExceptionalSet {
    pub points: Vec<SpherePoint>,
}

impl ExceptionalSet {
    pub fn contains(&self, a: SpherePoint, tol: f64) -> bool {
        self.points.iter().any(|p| chordal(*p, a) < tol)
    }
}

/// Points with `f^{-2}(a) = {a}`.
///
/// Such an `a` and its image `b = f(a)` are both totally ramified, so only
/// critical points of multiplicity `d - 1` are candidates; each is confirmed by
/// enumerating its first two preimage generations.
pub fn exceptional_set(map: &RationalMap) -> Result<ExceptionalSet> {
    let d = map.degree();
    let mut points: Vec<SpherePoint> = Vec::new();
    for (a, m) in critical_points(map)? {
        if m != d - 1 {
            continue;
        }
        let first = map.preimages(a)?;
        if first.len() != 1 {
            continue;
        }
        let second = map.preimages(first[0].0)?;
        if second.len() == 1 && chordal(second[0].0, a) < 1e-6 && !points.iter().any(|p| chordal(*p, a) < 1e-9) {
            points.push(a);
        }
    }
    Ok(ExceptionalSet { points })
}

/// Attracting, parabolic and undetermined-indifferent periodic points up to `max_period`.
pub fn non_repelling_cycles(map: &RationalMap, max_period: usize) -> Result<Vec<PeriodicPoint>> {
    let mut out = Vec::new();
    for p in 1..=max_period {
        if map.degree().checked_pow(p as u32).map_or(true, |d| d > MAX_SOLVER_DEGREE) {
            break;
        }
        out.extend(
            periodic_points(map, p)?
                .into_iter()
                .filter(|pp| pp.class != PointClass::Repelling),
        );
    }
    Ok(out)
}

/// Radius beyond which every orbit of a polynomial escapes:
/// `max(1, 2 (1 + sum_{j<d} |a_j|) / |a_d|)` guarantees `|f(z)| >= 2|z|`.
pub fn escape_radius(map: &RationalMap) -> Option<f64> {
    if !map.is_polynomial() {
        return None;
    }
    let scale = map.den().coeff(0);
    let c = map.num().coeffs();
    let d = c.len() - 1;
    let lower: f64 = c[..d].iter().map(|a| (a / scale).norm()).sum();
    Some((2.0 * (1.0 + lower) / (c[d] / scale).norm()).max(1.0))
}

/// Iterations until `|f^k(z)| > radius`, or `None` within `max_iter`.
pub fn escape_time(map: &RationalMap, z: SpherePoint, radius: f64, max_iter: usize) -> Option<usize> {
    let mut z = z;
    for k in 0..=max_iter {
        match z {
            SpherePoint::Infinity => return Some(k),
            SpherePoint::Finite(w) if w.norm() > radius => return Some(k),
            _ => {}
        }
        if k < max_iter {
            z = map.eval(z);
        }
    }
    None
}
