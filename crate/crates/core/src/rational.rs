//! Rational self-maps of the Riemann sphere in coefficient form.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::roots::{all_roots, cluster_roots, RootOptions};
use crate::sphere::{SpherePoint, INFINITY_MODULUS};

/// Relative tolerance for deciding that numerator and denominator share a root.
const COMMON_ROOT_TOL: f64 = 1e-8;
/// Relative size below which a leading coefficient is treated as a degree drop.
const DEGREE_DROP_TOL: f64 = 1e-12;
/// Root clustering tolerance used to assign multiplicities.
pub const CLUSTER_TOL: f64 = 1e-5;

#[derive(Clone, Debug, PartialEq)]
pub struct RationalMap {
    num: Poly,
    den: Poly,
    degree: usize,
    /// `u^d N(1/u)` and `u^d D(1/u)`, cached for the chart at infinity.
    num_rev: Poly,
    den_rev: Poly,
}

impl RationalMap {
    pub fn new(num: Poly, den: Poly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::InvalidMap("zero denominator".into()));
        }
        if num.is_zero() {
            return Err(Error::InvalidMap("zero numerator".into()));
        }
        let degree = num.degree().max(den.degree());
        if degree < 2 {
            return Err(Error::InvalidMap(format!("degree {degree} < 2")));
        }
        if den.degree() > 0 {
            // Shared roots: test the roots of the lower-degree factor against the other.
            let (small, large) = if den.degree() <= num.degree() { (&den, &num) } else { (&num, &den) };
            if small.degree() > 0 {
                let roots = all_roots(small, &RootOptions::default())?;
                let scale = large.max_abs();
                for r in roots {
                    let bound: f64 = large
                        .coeffs()
                        .iter()
                        .enumerate()
                        .map(|(k, c)| c.norm() * r.norm().powi(k as i32))
                        .sum();
                    if large.eval(r).norm() <= COMMON_ROOT_TOL * bound.max(scale) {
                        return Err(Error::InvalidMap(format!("numerator and denominator share the root {r}")));
                    }
                }
            }
        }
        let num_rev = num.reversed(degree);
        let den_rev = den.reversed(degree);
        Ok(RationalMap {
            num,
            den,
            degree,
            num_rev,
            den_rev,
        })
    }

    pub fn polynomial(coeffs: Poly) -> Result<Self> {
        RationalMap::new(coeffs, Poly::one())
    }

    /// `z^d + c`.
    pub fn unicritical(d: usize, c: Complex64) -> Result<Self> {
        let mut v = vec![Complex64::new(0.0, 0.0); d + 1];
        v[0] = c;
        v[d] = Complex64::new(1.0, 0.0);
        RationalMap::polynomial(Poly::new(v))
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.degree() == 0
    }

    /// `f(z)` on the sphere.
    pub fn eval(&self, z: SpherePoint) -> SpherePoint {
        match z {
            SpherePoint::Finite(z) if z.norm() <= 1.0 => quotient(self.num.eval(z), self.den.eval(z)),
            SpherePoint::Finite(z) => {
                let u = z.inv();
                quotient(self.num_rev.eval(u), self.den_rev.eval(u))
            }
            SpherePoint::Infinity => quotient(self.num_rev.coeff(0), self.den_rev.coeff(0)),
        }
    }

    /// `f^k(z)`; `k = 0` returns `z`.
    pub fn iterate(&self, z: SpherePoint, k: usize) -> SpherePoint {
        let mut w = z;
        for _ in 0..k {
            w = self.eval(w);
        }
        w
    }

    /// Derivative of `f` in the local charts at `z` and at `f(z)`: the identity
    /// chart when the flag is false, `1/z` when it is true.
    pub fn chart_derivative(&self, z: SpherePoint, src_reciprocal: bool, dst_reciprocal: bool) -> Complex64 {
        let x = match (z, src_reciprocal) {
            (SpherePoint::Finite(z), false) => z,
            (SpherePoint::Finite(z), true) => z.inv(),
            (SpherePoint::Infinity, true) => Complex64::new(0.0, 0.0),
            (SpherePoint::Infinity, false) => return Complex64::new(f64::NAN, f64::NAN),
        };
        let (a, b) = if src_reciprocal { (&self.num_rev, &self.den_rev) } else { (&self.num, &self.den) };
        let (n, dn) = a.eval_with_derivative(x);
        let (d, dd) = b.eval_with_derivative(x);
        if dst_reciprocal {
            (n * dd - dn * d) / (n * n)
        } else {
            (dn * d - n * dd) / (d * d)
        }
    }

    /// Spherical derivative `|f'(z)| (1 + |z|^2) / (1 + |f(z)|^2)`.
    pub fn spherical_derivative(&self, z: SpherePoint) -> f64 {
        let fz = self.eval(z);
        let src = reciprocal_chart(z);
        let dst = reciprocal_chart(fz);
        let d = self.chart_derivative(z, src, dst).norm();
        let xs = chart_coordinate(z, src).norm_sqr();
        let xd = chart_coordinate(fz, dst).norm_sqr();
        let v = d * (1.0 + xs) / (1.0 + xd);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    }

    /// Ordinary derivative at a finite point that is not a pole.
    pub fn derivative(&self, z: Complex64) -> Complex64 {
        self.chart_derivative(SpherePoint::Finite(z), false, false)
    }

    /// Multiplier of the cycle through the listed points (in orbit order).
    pub fn cycle_multiplier(&self, cycle: &[SpherePoint]) -> Complex64 {
        let charts: Vec<bool> = cycle.iter().map(|&z| reciprocal_chart(z)).collect();
        let p = cycle.len();
        (0..p).fold(Complex64::new(1.0, 0.0), |acc, i| {
            acc * self.chart_derivative(cycle[i], charts[i], charts[(i + 1) % p])
        })
    }

    /// Numerator/denominator of `f^p` by homogeneous composition.
    pub fn iterate_coefficients(&self, p: usize) -> (Poly, Poly) {
        let mut n = Poly::identity();
        let mut d = Poly::one();
        for _ in 0..p {
            let n_pows: Vec<Poly> = power_table(&n, self.degree);
            let d_pows: Vec<Poly> = power_table(&d, self.degree);
            let mut next_n = Poly::default();
            let mut next_d = Poly::default();
            for j in 0..=self.degree {
                let term = &n_pows[j] * &d_pows[self.degree - j];
                next_n = &next_n + &term.scale(self.num.coeff(j));
                next_d = &next_d + &term.scale(self.den.coeff(j));
            }
            n = next_n;
            d = next_d;
        }
        (n, d)
    }

    /// All preimages of `a` with multiplicities (total = degree).
    pub fn preimages(&self, a: SpherePoint) -> Result<Vec<(SpherePoint, usize)>> {
        let target = match a {
            SpherePoint::Finite(a) => &self.num - &self.den.scale(a),
            SpherePoint::Infinity => self.den.clone(),
        };
        solve_with_infinity(&target, self.degree)
    }
}

/// Roots of a polynomial of formal degree `formal`; the degree deficit is
/// reported as roots at infinity.
pub fn solve_with_infinity(p: &Poly, formal: usize) -> Result<Vec<(SpherePoint, usize)>> {
    let trimmed = p.trimmed(DEGREE_DROP_TOL);
    let roots = all_roots(&trimmed, &RootOptions::default())?;
    let mut out: Vec<(SpherePoint, usize)> = cluster_roots(&roots, CLUSTER_TOL)
        .into_iter()
        .map(|(z, m)| (SpherePoint::from_complex(z), m))
        .collect();
    let deficit = formal.saturating_sub(trimmed.degree());
    if deficit > 0 {
        match out.iter_mut().find(|(z, _)| z.is_infinite()) {
            Some(e) => e.1 += deficit,
            None => out.push((SpherePoint::Infinity, deficit)),
        }
    }
    Ok(out)
}

fn power_table(p: &Poly, d: usize) -> Vec<Poly> {
    let mut v = Vec::with_capacity(d + 1);
    v.push(Poly::one());
    for k in 1..=d {
        let next = &v[k - 1] * p;
        v.push(next);
    }
    v
}

fn quotient(n: Complex64, d: Complex64) -> SpherePoint {
    if d == Complex64::new(0.0, 0.0) || d.norm() * INFINITY_MODULUS < n.norm() {
        SpherePoint::Infinity
    } else {
        SpherePoint::from_complex(n / d)
    }
}

pub(crate) fn reciprocal_chart(z: SpherePoint) -> bool {
    match z {
        SpherePoint::Finite(z) => z.norm() > 1.0,
        SpherePoint::Infinity => true,
    }
}

pub(crate) fn chart_coordinate(z: SpherePoint, reciprocal: bool) -> Complex64 {
    match (z, reciprocal) {
        (SpherePoint::Finite(z), false) => z,
        (SpherePoint::Finite(z), true) => z.inv(),
        (SpherePoint::Infinity, _) => Complex64::new(0.0, 0.0),
    }
}

/// JSON map input: `{"num": [[re,im],...], "den": [[re,im],...]}`, ascending degree.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MapSpec {
    #[serde(with = "crate::sphere::complex_vec")]
    pub num: Vec<Complex64>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_complex_vec")]
    pub den: Option<Vec<Complex64>>,
}

mod opt_complex_vec {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<Vec<Complex64>>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(v) => crate::sphere::complex_vec::serialize(v, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<Complex64>>, D::Error> {
        let raw = Option::<Vec<[f64; 2]>>::deserialize(d)?;
        Ok(raw.map(|v| v.into_iter().map(|[re, im]| Complex64::new(re, im)).collect()))
    }
}

impl MapSpec {
    pub fn to_map(&self) -> Result<RationalMap> {
        let num = Poly::new(self.num.clone());
        let den = match &self.den {
            Some(d) => Poly::new(d.clone()),
            None => Poly::one(),
        };
        RationalMap::new(num, den)
    }

    pub fn from_map(map: &RationalMap) -> Self {
        MapSpec {
            num: map.num.coeffs().to_vec(),
            den: if map.is_polynomial() && map.den.coeff(0) == Complex64::new(1.0, 0.0) {
                None
            } else {
                Some(map.den.coeffs().to_vec())
            },
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }
}
