//! Asymptotic arcs `gamma` with `gamma(t + 1) = mu gamma(t)`, `mu = lambda^N`,
//! and the spiral quantity `(arg gamma / log |gamma|)^2` along them.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::Labeling;
use crate::schroeder::Evaluator;
use crate::sphere::{complex_vec, SpherePoint};

/// Arcs are extended until `|gamma|` passes this modulus.
pub const DEFAULT_TARGET_MODULUS: f64 = 1e200;
pub const MIN_MODULUS: f64 = 1e4;
const MAX_PERIODS: usize = 100_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ArcTrace {
    /// `lambda^N`.
    #[serde(with = "crate::sphere::complex_pair")]
    pub mu: Complex64,
    pub t: Vec<f64>,
    #[serde(with = "complex_vec")]
    pub points: Vec<Complex64>,
    /// Continuous branch of `arg gamma(t)`.
    pub args: Vec<f64>,
    /// `arg gamma(t) / log |gamma(t)|` (NaN where `|gamma| = 1`).
    pub ratios: Vec<f64>,
    /// Samples per unit of `t`.
    pub per_period: usize,
}

impl ArcTrace {
    /// Extends one period `segment` (from `gamma(0)` to `gamma(1) = mu gamma(0)`,
    /// endpoints included) by repeated multiplication with `mu`.
    pub fn from_segment(segment: &[Complex64], mu: Complex64, target_modulus: f64) -> Result<Self> {
        if segment.len() < 2 {
            return Err(Error::Arc("segment needs two points".into()));
        }
        if mu.norm() <= 1.0 {
            return Err(Error::Arc(format!("|mu| = {} <= 1", mu.norm())));
        }
        let m = segment.len() - 1;
        let mut base: Vec<Complex64> = segment[..m].to_vec();
        let mut points = Vec::new();
        let mut t = Vec::new();
        let mut k = 0usize;
        loop {
            for (i, &z) in base.iter().enumerate() {
                points.push(z);
                t.push(k as f64 + i as f64 / m as f64);
            }
            k += 1;
            if base[0].norm() > target_modulus || k >= MAX_PERIODS {
                break;
            }
            for z in base.iter_mut() {
                *z *= mu;
            }
            if !base[0].re.is_finite() || !base[0].im.is_finite() {
                break;
            }
        }
        let mut args = Vec::with_capacity(points.len());
        let mut acc = points[0].arg();
        args.push(acc);
        for w in points.windows(2) {
            acc += (w[1] / w[0]).arg();
            args.push(acc);
        }
        let ratios = points
            .iter()
            .zip(&args)
            .map(|(z, a)| {
                let l = z.norm().ln();
                if l.abs() < 1e-12 {
                    f64::NAN
                } else {
                    a / l
                }
            })
            .collect();
        Ok(ArcTrace {
            mu,
            t,
            points,
            args,
            ratios,
            per_period: m,
        })
    }

    pub fn max_modulus(&self) -> f64 {
        self.points.last().map_or(0.0, |z| z.norm())
    }

    /// Largest relative deviation from `gamma(t + 1) = mu gamma(t)` over all samples.
    pub fn translation_defect(&self) -> f64 {
        let m = self.per_period;
        (0..self.points.len().saturating_sub(m))
            .map(|j| (self.points[j + m] - self.mu * self.points[j]).norm() / self.points[j + m].norm())
            .fold(0.0, f64::max)
    }

    /// Running maximum of the squared ratio over the last half of the arc.
    pub fn spiral_term(&self) -> Result<f64> {
        if self.max_modulus() < MIN_MODULUS {
            return Err(Error::Arc(format!("arc too short: |gamma| reaches {:e}", self.max_modulus())));
        }
        let half = self.t.last().unwrap() / 2.0;
        Ok(self
            .t
            .iter()
            .zip(&self.ratios)
            .filter(|(t, r)| **t >= half && r.is_finite())
            .map(|(_, r)| r * r)
            .fold(0.0, f64::max))
    }

    /// First sample with `|gamma| >= radius`, linearly interpolated, with its parameter.
    pub fn first_crossing(&self, radius: f64) -> Option<(Complex64, f64)> {
        if self.points[0].norm() >= radius {
            return Some((self.points[0], self.t[0]));
        }
        self.points.windows(2).enumerate().find_map(|(j, w)| {
            let (a, b) = (w[0].norm(), w[1].norm());
            (b >= radius).then(|| {
                let s = ((radius - a) / (b - a)).clamp(0.0, 1.0);
                (w[0] + (w[1] - w[0]) * s, self.t[j] + s * (self.t[j + 1] - self.t[j]))
            })
        })
    }

    /// `h(gamma(t))` for samples with `t <= t_max`.
    pub fn images<E: Evaluator + ?Sized>(&self, h: &E, t_max: f64) -> Vec<SpherePoint> {
        self.t
            .iter()
            .zip(&self.points)
            .take_while(|(t, _)| **t <= t_max)
            .map(|(_, &z)| h.eval(z))
            .collect()
    }
}

/// Traces an arc inside component `id` from `w0` to `lambda^N w0` along the
/// shortest pixel path, then extends it.
pub fn trace_asymptotic_arc(labeling: &Labeling, id: u32, w0: Complex64, lambda: Complex64, n: usize, target_modulus: f64) -> Result<ArcTrace> {
    let mu = lambda.powi(n as i32);
    let w1 = mu * w0;
    let grid = labeling.grid;
    let (k0, k1) = match (grid.index_of(w0), grid.index_of(w1)) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::Arc("endpoints outside the box".into())),
    };
    if labeling.labels[k0] != id || labeling.labels[k1] != id {
        return Err(Error::Arc("w0 and lambda^N w0 are not in the same component".into()));
    }
    let path = labeling
        .path_within(k0, k1)
        .ok_or_else(|| Error::Arc("no path inside the component".into()))?;
    let mut segment = vec![w0];
    if path.len() > 2 {
        segment.extend(path[1..path.len() - 1].iter().map(|&k| grid.point(k)));
    }
    segment.push(w1);
    ArcTrace::from_segment(&segment, mu, target_modulus)
}

/// `((q arg lambda - 2 pi p) / (q log |lambda|))^2` with `arg lambda - 2 pi p / q`
/// reduced into `(-pi, pi]`.
pub fn closed_form_spiral(q: usize, p: i64, lambda: Complex64) -> f64 {
    let x = reduced_angle(lambda.arg() - std::f64::consts::TAU * p as f64 / q as f64);
    (x / lambda.norm().ln()).powi(2)
}

/// Representative of `x` modulo `2 pi` in `(-pi, pi]`.
pub fn reduced_angle(x: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut y = x.rem_euclid(TAU);
    if y > PI {
        y -= TAU;
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_log_spiral() {
        let seg: Vec<Complex64> = (0..=16)
            .map(|i| (Complex64::new(1.0, 1.0) * (i as f64 / 16.0)).exp())
            .collect();
        let mu = Complex64::new(1.0, 1.0).exp();
        let arc = ArcTrace::from_segment(&seg, mu, 1e200).unwrap();
        assert!((arc.spiral_term().unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(arc.translation_defect(), 0.0);
    }

    #[test]
    fn real_arc_has_no_spiral() {
        let seg = [Complex64::new(1.0, 0.0), Complex64::new(1.5, 0.0), Complex64::new(2.0, 0.0)];
        let arc = ArcTrace::from_segment(&seg, Complex64::new(2.0, 0.0), 1e200).unwrap();
        assert_eq!(arc.spiral_term().unwrap(), 0.0);
        for k in 0..20 {
            assert_eq!(arc.points[2 * k], Complex64::new(2f64.powi(k as i32), 0.0));
        }
        assert_eq!(closed_form_spiral(1, 0, Complex64::new(2.0, 0.0)), 0.0);
    }

    #[test]
    fn short_arcs_are_rejected() {
        let seg = [Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0)];
        let arc = ArcTrace::from_segment(&seg, Complex64::new(2.0, 0.0), 10.0).unwrap();
        assert!(arc.spiral_term().is_err());
    }

    #[test]
    fn angle_reduction() {
        use std::f64::consts::PI;
        assert!((reduced_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert_eq!(reduced_angle(PI), PI);
        assert!(reduced_angle(-PI) > 0.0);
    }
}
