//! Schröder linearizing maps at repelling periodic points.
//!
//! For a repelling point `z0` of period `p` with multiplier `lambda`, the map
//! `h` solves `f^p(h(w)) = h(lambda w)` with `h(0) = z0`, `h'(0) = 1`. Writing
//! `g = f^p`, `g(z0 + x) = z0 + sum c_k x^k` and `h = z0 + H`, matching the
//! coefficient of `w^n` gives the triangular system
//!
//! ```text
//! (lambda^n - lambda) a_n = sum_{k=2..n} c_k [w^n] H^k
//! ```
//!
//! whose right side only involves `a_1 .. a_{n-1}`. Away from the origin `h`
//! is evaluated by pulling `w` back into the safe disk and pushing forward
//! with `g`: `h(w) = g^k(h(lambda^{-k} w))`.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{PeriodicPoint, PointClass};
use crate::error::{Error, Result};
use crate::rational::RationalMap;
use crate::series::Series;
use crate::sphere::{chordal, complex_pair, complex_vec, SpherePoint};

pub const DEFAULT_ORDER: usize = 64;
/// Relative functional-equation residual allowed on the safe circle.
pub const RESIDUAL_TOL: f64 = 1e-10;
/// Root-test proxy bound: `max |a_n|^{1/n} r` over the upper half of the coefficients.
pub const ROOT_TEST_BOUND: f64 = 0.5;
const RESIDUAL_SAMPLES: usize = 64;
/// Moduli past which forward iteration of a polynomial switches to log space.
const LOG_SWITCH: f64 = 1e100;

/// Something that can be evaluated like `h` on the plane.
pub trait Evaluator: Sync {
    fn eval(&self, w: Complex64) -> SpherePoint;

    /// `ln |h(w)|`, finite even where `|h(w)|` overflows when the evaluator knows how.
    fn log_abs(&self, w: Complex64) -> f64 {
        match self.eval(w) {
            SpherePoint::Finite(z) => z.norm().ln(),
            SpherePoint::Infinity => f64::INFINITY,
        }
    }

    /// True when the evaluator is known to be entire (no poles).
    fn is_entire(&self) -> bool {
        false
    }
}

type EvalFn = dyn Fn(Complex64) -> SpherePoint + Send + Sync;
type LogFn = dyn Fn(Complex64) -> f64 + Send + Sync;

/// Closure-backed evaluator, used for closed-form oracles and control inputs.
pub struct FnEvaluator {
    f: Box<EvalFn>,
    log: Option<Box<LogFn>>,
    entire: bool,
}

impl FnEvaluator {
    pub fn new(f: impl Fn(Complex64) -> SpherePoint + Send + Sync + 'static) -> Self {
        FnEvaluator {
            f: Box::new(f),
            log: None,
            entire: false,
        }
    }

    /// An entire function given as a complex closure.
    pub fn entire(f: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static) -> Self {
        FnEvaluator {
            f: Box::new(move |w| SpherePoint::from_complex(f(w))),
            log: None,
            entire: true,
        }
    }

    pub fn with_log_abs(mut self, log: impl Fn(Complex64) -> f64 + Send + Sync + 'static) -> Self {
        self.log = Some(Box::new(log));
        self
    }
}

impl Evaluator for FnEvaluator {
    fn eval(&self, w: Complex64) -> SpherePoint {
        (self.f)(w)
    }

    fn log_abs(&self, w: Complex64) -> f64 {
        match &self.log {
            Some(log) => log(w),
            None => match (self.f)(w) {
                SpherePoint::Finite(z) => z.norm().ln(),
                SpherePoint::Infinity => f64::INFINITY,
            },
        }
    }

    fn is_entire(&self) -> bool {
        self.entire
    }
}

/// Truncated coefficients of `h` before a safe radius is attached.
#[derive(Clone, Debug)]
pub struct SchroederCoefficients {
    pub map: Arc<RationalMap>,
    pub z0: Complex64,
    pub period: usize,
    pub lambda: Complex64,
    pub coeffs: Vec<Complex64>,
}

impl SchroederCoefficients {
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `h_N(w)` by Horner.
    pub fn eval_series(&self, w: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * w + a)
    }

    /// `g = f^p` on the sphere.
    pub fn apply_g(&self, z: SpherePoint) -> SpherePoint {
        self.map.iterate(z, self.period)
    }

    /// Relative functional-equation residual `|g(h_N(w)) - h_N(lambda w)| / max(1, |h_N(lambda w)|)`.
    pub fn residual_at(&self, w: Complex64) -> f64 {
        let lhs = self.apply_g(SpherePoint::from_complex(self.eval_series(w)));
        let rhs = self.eval_series(self.lambda * w);
        match lhs {
            SpherePoint::Finite(l) if rhs.re.is_finite() && rhs.im.is_finite() => {
                (l - rhs).norm() / rhs.norm().max(1.0)
            }
            _ => f64::INFINITY,
        }
    }
}

/// Taylor coefficients (order `order`) of `f^p` at the finite point `z0`.
///
/// Composition runs through the two sphere charts so that cycles passing
/// through poles or infinity are handled: each step keeps the image series in
/// the identity chart when the image has modulus at most one, and in the
/// `1/z` chart otherwise.
pub fn iterate_taylor(map: &RationalMap, z0: Complex64, p: usize, order: usize) -> Vec<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    let mut reciprocal = z0.norm() > 1.0;
    let mut s = Series::variable(z0, order);
    if reciprocal {
        s = Series::constant(one, order).div(&s);
    }
    let (num, den) = (map.num(), map.den());
    let (num_rev, den_rev) = (map.num().reversed(map.degree()), map.den().reversed(map.degree()));
    for _ in 0..p {
        let (a, b) = if reciprocal { (&num_rev, &den_rev) } else { (num, den) };
        let x0 = s.constant_term();
        let (av, bv) = (a.eval(x0), b.eval(x0));
        let sa = s.compose_poly(a);
        let sb = s.compose_poly(b);
        if av.norm() <= bv.norm() {
            s = sa.div(&sb);
            reciprocal = false;
        } else {
            s = sb.div(&sa);
            reciprocal = true;
        }
    }
    if reciprocal {
        s = Series::constant(one, order).div(&s);
    }
    s.into_coeffs()
}

/// Solves the coefficient recurrence for `h` up to order `order`.
pub fn schroeder_coefficients(map: Arc<RationalMap>, point: &PeriodicPoint, order: usize) -> Result<SchroederCoefficients> {
    if order < 2 {
        return Err(Error::Precondition(format!("truncation order {order} < 2")));
    }
    if point.class != PointClass::Repelling {
        return Err(Error::NotRepelling {
            modulus: point.multiplier.norm(),
        });
    }
    let z0 = point
        .z0
        .finite()
        .ok_or_else(|| Error::Precondition("base point must be finite".into()))?;
    let p = point.period;
    let c = iterate_taylor(&map, z0, p, order);
    let lambda = c[1];
    if lambda.norm() <= 1.0 {
        return Err(Error::NotRepelling { modulus: lambda.norm() });
    }

    let n_max = order;
    let zero = Complex64::new(0.0, 0.0);
    let mut a = vec![zero; n_max + 1];
    a[0] = z0;
    a[1] = Complex64::new(1.0, 0.0);
    // powers[k][m] = [w^m] H^k with H = h - z0
    let mut powers = vec![vec![zero; n_max + 1]; n_max + 1];
    powers[1][1] = a[1];
    let mut lambda_n = lambda;
    for n in 2..=n_max {
        lambda_n *= lambda;
        for k in 2..=n {
            let mut acc = zero;
            for j in 1..=(n - k + 1) {
                acc += a[j] * powers[k - 1][n - j];
            }
            powers[k][n] = acc;
        }
        let mut rhs = zero;
        for k in 2..=n {
            rhs += c[k] * powers[k][n];
        }
        let an = if lambda_n.norm().is_infinite() { zero } else { rhs / (lambda_n - lambda) };
        if !an.re.is_finite() || !an.im.is_finite() {
            return Err(Error::Precondition(format!("coefficient a_{n} overflowed")));
        }
        a[n] = an;
        powers[1][n] = an;
    }
    Ok(SchroederCoefficients {
        map,
        z0,
        period: p,
        lambda,
        coeffs: a,
    })
}

/// One row of the safe-radius scan.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RadiusSample {
    pub r: f64,
    pub root_test: f64,
    pub residual: f64,
}

/// Scan radii `2^{j/4}` upward from `1e-3` and keep the last radius before the
/// first failure of either test.
pub fn estimate_safe_radius(coeffs: &SchroederCoefficients) -> Result<f64> {
    scan_safe_radius(coeffs).map(|(r, _)| r)
}

pub fn scan_safe_radius(coeffs: &SchroederCoefficients) -> Result<(f64, Vec<RadiusSample>)> {
    let n = coeffs.order();
    if n < 8 {
        return Err(Error::Precondition(format!("safe radius needs order >= 8, got {n}")));
    }
    let proxy = (n / 2..=n)
        .map(|k| coeffs.coeffs[k].norm().powf(1.0 / k as f64))
        .fold(0.0, f64::max);
    let mut curve = Vec::new();
    let mut best = None;
    for j in -40..=72 {
        let r = 2f64.powf(j as f64 / 4.0);
        let root_test = proxy * r;
        let residual = (0..RESIDUAL_SAMPLES)
            .map(|i| {
                let theta = std::f64::consts::TAU * (i as f64 + 0.5) / RESIDUAL_SAMPLES as f64;
                coeffs.residual_at(Complex64::from_polar(r, theta))
            })
            .fold(0.0, f64::max);
        curve.push(RadiusSample { r, root_test, residual });
        if root_test < ROOT_TEST_BOUND && residual < RESIDUAL_TOL {
            best = Some(r);
        } else {
            break;
        }
    }
    match best {
        Some(r) => Ok((r, curve)),
        None => Err(Error::NoSafeRadius {
            curve: curve.iter().map(|s| (s.r, s.root_test, s.residual)).collect(),
        }),
    }
}

/// A Schröder map ready for evaluation anywhere in the plane.
#[derive(Clone, Debug)]
pub struct SchroederSeries {
    inner: SchroederCoefficients,
    r_safe: f64,
}

/// Evaluation result with the propagated error estimate (chordal units).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation {
    pub value: SpherePoint,
    pub depth: usize,
    pub error_estimate: f64,
}

impl SchroederSeries {
    /// Coefficients, then the safe radius.
    pub fn build(map: Arc<RationalMap>, point: &PeriodicPoint, order: usize) -> Result<Self> {
        let inner = schroeder_coefficients(map, point, order)?;
        let r_safe = estimate_safe_radius(&inner)?;
        Ok(SchroederSeries { inner, r_safe })
    }

    pub fn from_parts(inner: SchroederCoefficients, r_safe: f64) -> Self {
        SchroederSeries { inner, r_safe }
    }

    pub fn coefficients(&self) -> &SchroederCoefficients {
        &self.inner
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.inner.coeffs
    }

    pub fn map(&self) -> &RationalMap {
        &self.inner.map
    }

    pub fn map_arc(&self) -> Arc<RationalMap> {
        Arc::clone(&self.inner.map)
    }

    pub fn z0(&self) -> Complex64 {
        self.inner.z0
    }

    pub fn lambda(&self) -> Complex64 {
        self.inner.lambda
    }

    pub fn period(&self) -> usize {
        self.inner.period
    }

    pub fn r_safe(&self) -> f64 {
        self.r_safe
    }

    /// Pullback depth used for `w`.
    pub fn depth_for(&self, w: Complex64) -> usize {
        let m = w.norm();
        if m <= self.r_safe {
            0
        } else {
            ((m / self.r_safe).ln() / self.inner.lambda.norm().ln()).ceil().max(0.0) as usize
        }
    }

    fn pulled_back(&self, w: Complex64, depth: usize) -> Complex64 {
        w * self.inner.lambda.inv().powi(depth as i32)
    }

    /// `h(w)` with the default pullback depth.
    pub fn evaluate(&self, w: Complex64) -> SpherePoint {
        self.evaluate_at_depth(w, self.depth_for(w))
    }

    /// `h(w) = g^depth(h_N(lambda^{-depth} w))`.
    pub fn evaluate_at_depth(&self, w: Complex64, depth: usize) -> SpherePoint {
        let u = self.pulled_back(w, depth);
        let z = SpherePoint::from_complex(self.inner.eval_series(u));
        self.inner.map.iterate(z, depth * self.inner.period)
    }

    /// `h(w)` plus an error estimate: the safe-disk tolerance amplified by the
    /// spherical derivatives met along the forward orbit, capped at 1.
    pub fn evaluate_with_error(&self, w: Complex64) -> Evaluation {
        let depth = self.depth_for(w);
        let u = self.pulled_back(w, depth);
        let mut z = SpherePoint::from_complex(self.inner.eval_series(u));
        let mut err = RESIDUAL_TOL * (1.0 + self.inner.z0.norm());
        for _ in 0..depth * self.inner.period {
            err = (err * self.inner.map.spherical_derivative(z)).min(1.0);
            z = self.inner.map.eval(z);
        }
        Evaluation {
            value: z,
            depth,
            error_estimate: err,
        }
    }

    /// `h'(w)` in the identity chart; `None` where `h(w)` is infinite or the
    /// forward orbit meets a pole.
    pub fn derivative(&self, w: Complex64) -> Option<Complex64> {
        let depth = self.depth_for(w);
        let u = self.pulled_back(w, depth);
        let (mut z, mut d) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for &a in self.inner.coeffs.iter().rev() {
            d = d * u + z;
            z = z * u + a;
        }
        d *= self.inner.lambda.inv().powi(depth as i32);
        let mut pt = SpherePoint::from_complex(z);
        for _ in 0..depth * self.inner.period {
            let zf = pt.finite()?;
            d *= self.inner.map.derivative(zf);
            pt = self.inner.map.eval(pt);
        }
        pt.finite()?;
        if d.re.is_finite() && d.im.is_finite() {
            Some(d)
        } else {
            None
        }
    }

    /// `ln |h(w)|` for polynomial maps, switching to log space once the orbit
    /// is large enough that `f(z) = a_d z^d (1 + O(1/z))` is exact in `f64`.
    pub fn log_abs_h(&self, w: Complex64) -> f64 {
        let map = &self.inner.map;
        if !map.is_polynomial() {
            return match self.evaluate(w) {
                SpherePoint::Finite(z) => z.norm().ln(),
                SpherePoint::Infinity => f64::INFINITY,
            };
        }
        let depth = self.depth_for(w);
        let u = self.pulled_back(w, depth);
        let num = map.num();
        let lead = (num.leading() / map.den().coeff(0)).norm().ln();
        let d = map.degree() as f64;
        let scale = map.den().coeff(0);
        let mut z = self.inner.eval_series(u);
        let steps = depth * self.inner.period;
        for i in 0..steps {
            if z.norm() > LOG_SWITCH {
                let mut log_mod = z.norm().ln();
                for _ in i..steps {
                    log_mod = lead + d * log_mod;
                }
                return log_mod;
            }
            z = num.eval(z) / scale;
        }
        z.norm().ln()
    }

    /// Approximate zeros of `h'` in the square `[-half_width, half_width]^2`.
    pub fn critical_points(&self, half_width: f64, grid: usize) -> Vec<CriticalPointOfH> {
        critical_points_of_h(self, half_width, grid)
    }

    pub fn export(&self) -> SeriesExport {
        SeriesExport {
            z0: self.inner.z0,
            lambda: self.inner.lambda,
            p: self.inner.period,
            coeffs: self.inner.coeffs.clone(),
            r_safe: self.r_safe,
        }
    }
}

impl Evaluator for SchroederSeries {
    fn eval(&self, w: Complex64) -> SpherePoint {
        self.evaluate(w)
    }

    fn log_abs(&self, w: Complex64) -> f64 {
        self.log_abs_h(w)
    }

    fn is_entire(&self) -> bool {
        self.inner.map.is_polynomial()
    }
}

/// Series export: `{"z0", "lambda", "p", "coeffs", "r_safe"}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesExport {
    #[serde(with = "complex_pair")]
    pub z0: Complex64,
    #[serde(with = "complex_pair")]
    pub lambda: Complex64,
    pub p: usize,
    #[serde(with = "complex_vec")]
    pub coeffs: Vec<Complex64>,
    pub r_safe: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CriticalPointOfH {
    #[serde(with = "complex_pair")]
    pub w: Complex64,
    pub value: SpherePoint,
    /// `|h'(w)|` after refinement.
    pub residual: f64,
}

/// Zeros of `h'` by a per-cell winding-number scan of `h'` followed by Newton
/// refinement with a central-difference second derivative.
pub fn critical_points_of_h(series: &SchroederSeries, half_width: f64, grid: usize) -> Vec<CriticalPointOfH> {
    use rayon::prelude::*;

    let n = grid.max(2);
    let step = 2.0 * half_width / n as f64;
    let sub = 4usize;
    let vertex = |i: usize, j: usize| Complex64::new(-half_width + i as f64 * step, -half_width + j as f64 * step);

    let cells: Vec<(usize, usize)> = (0..n).flat_map(|j| (0..n).map(move |i| (i, j))).collect();
    let candidates: Vec<Complex64> = cells
        .par_iter()
        .filter_map(|&(i, j)| {
            let corners = [vertex(i, j), vertex(i + 1, j), vertex(i + 1, j + 1), vertex(i, j + 1)];
            let mut total = 0.0;
            let mut prev: Option<Complex64> = None;
            let mut first: Option<Complex64> = None;
            for e in 0..4 {
                let (a, b) = (corners[e], corners[(e + 1) % 4]);
                for s in 0..sub {
                    let w = a + (b - a) * (s as f64 / sub as f64);
                    let d = series.derivative(w)?;
                    if d.norm() == 0.0 {
                        return Some(w);
                    }
                    if let Some(pd) = prev {
                        total += (d / pd).arg();
                    } else {
                        first = Some(d);
                    }
                    prev = Some(d);
                }
            }
            total += (first? / prev?).arg();
            let winding = (total / std::f64::consts::TAU).round();
            (winding > 0.5).then(|| (corners[0] + corners[2]) / 2.0)
        })
        .collect();

    let mut found: Vec<CriticalPointOfH> = Vec::new();
    for start in candidates {
        if let Some(cp) = refine_critical_point(series, start, step) {
            if cp.w.re.abs() <= half_width + step
                && cp.w.im.abs() <= half_width + step
                && !found.iter().any(|f| (f.w - cp.w).norm() < 1e-6 * (1.0 + cp.w.norm()))
            {
                found.push(cp);
            }
        }
    }
    found
}

fn refine_critical_point(series: &SchroederSeries, start: Complex64, scale: f64) -> Option<CriticalPointOfH> {
    let mut w = start;
    for _ in 0..60 {
        let d = series.derivative(w)?;
        let delta = 1e-6 * (1.0 + w.norm());
        let dp = (series.derivative(w + delta)? - series.derivative(w - delta)?) / (2.0 * delta);
        if dp.norm() == 0.0 {
            break;
        }
        let step = d / dp;
        w -= step;
        if (w - start).norm() > 2.0 * scale {
            return None;
        }
        if step.norm() < 1e-13 * (1.0 + w.norm()) {
            break;
        }
    }
    let d = series.derivative(w)?;
    // Accept when |h'| is small relative to the local scale of h.
    let value = series.evaluate(w);
    let mag = value.finite().map_or(1.0, |z| z.norm().max(1.0));
    if d.norm() < 1e-7 * mag {
        Some(CriticalPointOfH {
            w,
            value,
            residual: d.norm(),
        })
    } else {
        None
    }
}

/// Checks that each value lies on a forward critical orbit of `f`
/// (`f^k(c)`, `1 <= k <= max_iterate`) within chordal `tol`.
pub fn values_on_critical_orbits(map: &RationalMap, values: &[SpherePoint], max_iterate: usize, tol: f64) -> Result<bool> {
    let crit = crate::dynamics::critical_points(map)?;
    let mut orbit_points = Vec::new();
    for (c, _) in crit {
        let mut z = c;
        for _ in 0..max_iterate {
            z = map.eval(z);
            orbit_points.push(z);
        }
    }
    Ok(values
        .iter()
        .all(|v| orbit_points.iter().any(|o| chordal(*o, *v) < tol)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::periodic_point_near;
    use crate::poly::Poly;

    fn build(c: &[f64], z0: f64, order: usize) -> SchroederSeries {
        let map = Arc::new(RationalMap::polynomial(Poly::from_real(c)).unwrap());
        let pp = periodic_point_near(&map, Complex64::new(z0, 0.0), 1).unwrap();
        SchroederSeries::build(map, &pp, order).unwrap()
    }

    #[test]
    fn exp_coefficients() {
        let h = build(&[0.0, 0.0, 1.0], 1.0, 10);
        let mut fact = 1.0;
        for (n, a) in h.coeffs().iter().enumerate() {
            if n > 0 {
                fact *= n as f64;
            }
            assert!((a - 1.0 / fact).norm() < 1e-12, "a_{n} = {a}");
        }
        // series identity sum a_j a_{n-j} = 2^n / n!
        let a = h.coeffs();
        let mut fact = 1.0;
        for n in 0..a.len() {
            if n > 0 {
                fact *= n as f64;
            }
            let conv: Complex64 = (0..=n).map(|j| a[j] * a[n - j]).sum();
            assert!((conv - 2f64.powi(n as i32) / fact).norm() < 1e-12);
        }
    }

    #[test]
    fn normalization_holds_exactly() {
        let map = Arc::new(RationalMap::polynomial(Poly::from_real(&[-0.7, 0.2, 1.0])).unwrap());
        for pp in crate::dynamics::periodic_points(&map, 1).unwrap() {
            if pp.class == PointClass::Repelling {
                let s = schroeder_coefficients(map.clone(), &pp, 8).unwrap();
                assert_eq!(s.coeffs[0], pp.z0.finite().unwrap());
                assert_eq!(s.coeffs[1], Complex64::new(1.0, 0.0));
            }
        }
    }

    #[test]
    fn rejects_non_repelling_points() {
        let map = Arc::new(RationalMap::polynomial(Poly::from_real(&[0.0, 0.0, 1.0])).unwrap());
        let pp = periodic_point_near(&map, Complex64::new(0.0, 0.0), 1).unwrap();
        assert!(matches!(schroeder_coefficients(map, &pp, 8), Err(Error::NotRepelling { .. })));
    }

    #[test]
    fn tiny_order_has_no_safe_radius() {
        let map = Arc::new(RationalMap::polynomial(Poly::from_real(&[-2.0, 0.0, 1.0])).unwrap());
        let pp = periodic_point_near(&map, Complex64::new(2.0, 0.0), 1).unwrap();
        let c = schroeder_coefficients(map, &pp, 2).unwrap();
        assert!(estimate_safe_radius(&c).is_err());
    }

    #[test]
    fn evaluates_exp_far_out() {
        let h = build(&[0.0, 0.0, 1.0], 1.0, 30);
        assert!(h.r_safe() >= 1.0);
        let v = h.evaluate(Complex64::new(4f64.ln(), 0.0)).finite().unwrap();
        assert!((v - 4.0).norm() < 1e-9);
        assert_eq!(h.evaluate(Complex64::new(0.0, 0.0)), SpherePoint::real(1.0));
        let w = Complex64::new(3.0, 17.0);
        let v = h.evaluate(w).finite().unwrap();
        assert!((v - w.exp()).norm() < 1e-8 * w.exp().norm());
        // log-space evaluation survives overflow
        let big = Complex64::new(5000.0, 1.0);
        assert!((h.log_abs_h(big) - 5000.0).abs() < 1e-6 * 5000.0);
    }

    #[test]
    fn derivative_of_exp() {
        let h = build(&[0.0, 0.0, 1.0], 1.0, 30);
        let w = Complex64::new(1.5, -7.0);
        let d = h.derivative(w).unwrap();
        assert!((d - w.exp()).norm() < 1e-8 * w.exp().norm());
    }

    #[test]
    fn exp_has_no_critical_points() {
        let h = build(&[0.0, 0.0, 1.0], 1.0, 32);
        assert!(h.critical_points(6.0, 48).is_empty());
    }

    #[test]
    fn cosh_sqrt_critical_points() {
        let h = build(&[-2.0, 0.0, 1.0], 2.0, 40);
        let cps = h.critical_points(45.0, 90);
        let mut ws: Vec<f64> = cps.iter().map(|c| c.w.re).collect();
        ws.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let pi2 = std::f64::consts::PI.powi(2);
        let expect = [-4.0 * pi2, -pi2];
        assert_eq!(ws.len(), 2, "{cps:?}");
        for (w, e) in ws.iter().zip(expect) {
            assert!((w - e).abs() < 1e-6, "{w} vs {e}");
        }
        for c in &cps {
            assert!(c.w.im.abs() < 1e-6);
        }
        let values: Vec<SpherePoint> = cps.iter().map(|c| c.value).collect();
        assert!(values_on_critical_orbits(h.map(), &values, 4, 1e-6).unwrap());
    }

    #[test]
    fn export_round_trip_shape() {
        let h = build(&[0.0, 0.0, 1.0], 1.0, 10);
        let json = serde_json::to_string(&h.export()).unwrap();
        assert!(json.starts_with(r#"{"z0":[1.0,0.0],"lambda":[2.0,0.0],"p":1,"coeffs":[[1.0,0.0],[1.0,0.0],"#));
        let back: SeriesExport = serde_json::from_str(&json).unwrap();
        assert_eq!(back.coeffs.len(), 11);
    }
}
