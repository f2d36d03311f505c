//! Truncated power series arithmetic, `O(w^(N+1))`.

use num_complex::Complex64;

use crate::poly::Poly;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    c: Vec<Complex64>,
}

impl Series {
    /// A series with `order + 1` coefficients (missing ones are zero).
    pub fn new(mut c: Vec<Complex64>, order: usize) -> Self {
        c.resize(order + 1, ZERO);
        Series { c }
    }

    pub fn constant(v: Complex64, order: usize) -> Self {
        Series::new(vec![v], order)
    }

    /// `center + w`.
    pub fn variable(center: Complex64, order: usize) -> Self {
        Series::new(vec![center, Complex64::new(1.0, 0.0)], order)
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.c
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.c
    }

    pub fn constant_term(&self) -> Complex64 {
        self.c[0]
    }

    pub fn add(&self, other: &Series) -> Series {
        Series {
            c: self.c.iter().zip(&other.c).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn add_constant(&self, v: Complex64) -> Series {
        let mut s = self.clone();
        s.c[0] += v;
        s
    }

    pub fn mul(&self, other: &Series) -> Series {
        let n = self.c.len();
        let mut out = vec![ZERO; n];
        for (i, &a) in self.c.iter().enumerate() {
            if a == ZERO {
                continue;
            }
            for (j, &b) in other.c[..n - i].iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Series { c: out }
    }

    /// `self / other`; requires a nonzero constant term in `other`.
    pub fn div(&self, other: &Series) -> Series {
        let n = self.c.len();
        let inv0 = other.c[0].inv();
        let mut q = vec![ZERO; n];
        for k in 0..n {
            let mut acc = self.c[k];
            for j in 1..=k {
                acc -= other.c[j] * q[k - j];
            }
            q[k] = acc * inv0;
        }
        Series { c: q }
    }

    /// `p(self)` by Horner's scheme in series arithmetic.
    pub fn compose_poly(&self, p: &Poly) -> Series {
        let order = self.order();
        let mut acc = Series::constant(ZERO, order);
        for &a in p.coeffs().iter().rev() {
            acc = acc.mul(self).add_constant(a);
        }
        acc
    }

    pub fn eval(&self, w: Complex64) -> Complex64 {
        self.c.iter().rev().fold(ZERO, |acc, &a| acc * w + a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn geometric_series_by_division() {
        let one = Series::constant(r(1.0), 10);
        let denom = Series::new(vec![r(1.0), r(-1.0)], 10);
        let q = one.div(&denom);
        assert!(q.coeffs().iter().all(|&c| c == r(1.0)));
    }

    #[test]
    fn compose_poly_matches_pointwise() {
        let s = Series::new(vec![r(0.5), r(1.0), r(0.25)], 6);
        let p = Poly::from_real(&[1.0, -2.0, 0.0, 3.0]);
        let comp = s.compose_poly(&p);
        let w = r(0.01);
        assert!((comp.eval(w) - p.eval(s.eval(w))).norm() < 1e-12);
    }
}
