//! Growth of `h`: theoretical order, empirical order from the log max modulus,
//! and the resulting caps on the number of singularities.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::schroeder::{Evaluator, SchroederSeries};

pub const DEFAULT_SAMPLES: usize = 512;
const GOLDEN_STEPS: usize = 40;
/// Slack absorbed when flooring `2 rho` so that `2 * 0.5` stays 1.
const FLOOR_SLACK: f64 = 1e-9;

/// `rho = p log d / log |lambda|`.
pub fn valiron_order(d: usize, p: usize, lambda: Complex64) -> Result<f64> {
    if d < 2 {
        return Err(Error::Precondition(format!("degree {d} < 2")));
    }
    let m = lambda.norm();
    if m <= 1.0 {
        return Err(Error::NotRepelling { modulus: m });
    }
    Ok(p as f64 * (d as f64).ln() / m.ln())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthProfile {
    pub radii: Vec<f64>,
    /// `L(r) = log max_{|w|=r} |h(w)|`.
    pub log_max: Vec<f64>,
    /// `log L(r)`, NaN where `L(r) <= 0`.
    pub loglog: Vec<f64>,
    pub slope: f64,
    /// Radii used by the fit (indices into `radii`).
    pub fit_range: (usize, usize),
    pub theoretical: Option<f64>,
}

impl GrowthProfile {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("r,L(r),loglogL,fitted_slope\n");
        for i in 0..self.radii.len() {
            s.push_str(&format!("{:e},{:e},{:e},{:e}\n", self.radii[i], self.log_max[i], self.loglog[i], self.slope));
        }
        s
    }

    /// True when `L` never decreases by more than `tol` (relative) along the radii.
    pub fn is_monotone(&self, tol: f64) -> bool {
        self.log_max
            .windows(2)
            .all(|w| w[1] >= w[0] - tol * w[0].abs().max(1.0))
    }
}

/// Circles at `r_k` with sample angles rotated by `k * rotation`.
///
/// With `r_{k+1} = |lambda| r_k` and `rotation = arg lambda` the samples on
/// consecutive circles are exact images under `w -> lambda w`.
#[derive(Clone, Debug)]
pub struct RadiusSchedule {
    pub radii: Vec<f64>,
    pub rotation: f64,
}

impl RadiusSchedule {
    pub fn geometric(r0: f64, ratio: f64, r_max: f64) -> Self {
        assert!(ratio > 1.0 && r0 > 0.0);
        let mut radii = Vec::new();
        let mut r = r0;
        while r <= r_max * (1.0 + 1e-12) {
            radii.push(r);
            r *= ratio;
        }
        RadiusSchedule { radii, rotation: 0.0 }
    }

    /// Ratio `|lambda|` starting at the safe radius.
    pub fn for_series(series: &SchroederSeries, r_max: f64) -> Self {
        let lambda = series.lambda();
        let mut s = RadiusSchedule::geometric(series.r_safe(), lambda.norm(), r_max);
        s.rotation = lambda.arg();
        s
    }
}

/// Log max modulus on one circle: `samples` equispaced angles, then a
/// golden-section search around the best sample.
pub fn log_max_modulus<E: Evaluator + ?Sized>(h: &E, r: f64, offset: f64, samples: usize) -> f64 {
    let step = std::f64::consts::TAU / samples as f64;
    let at = |theta: f64| h.log_abs(Complex64::from_polar(r, theta));
    let values: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|j| at(offset + j as f64 * step))
        .collect();
    let (best_j, best) = values
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (j, v)| if v > acc.1 { (j, v) } else { acc });
    if !best.is_finite() {
        return best;
    }
    let center = offset + best_j as f64 * step;
    let (mut lo, mut hi) = (center - step, center + step);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let (mut f1, mut f2) = (at(x1), at(x2));
    let mut out = best.max(f1).max(f2);
    for _ in 0..GOLDEN_STEPS {
        if f1 > f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = at(x1);
            out = out.max(f1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = at(x2);
            out = out.max(f2);
        }
    }
    out
}

/// Least-squares slope of `log L(r)` against `log r` over the top decade of
/// radii, widened downward to at least three usable points.
pub fn empirical_order<E: Evaluator + ?Sized>(h: &E, schedule: &RadiusSchedule, samples: usize) -> Result<GrowthProfile> {
    if !h.is_entire() {
        return Err(Error::NotEntire(
            "order from the log max modulus needs an entire h; meromorphic h needs the spherical characteristic".into(),
        ));
    }
    let radii = schedule.radii.clone();
    if radii.len() < 3 {
        return Err(Error::Precondition("at least three radii are needed".into()));
    }
    let log_max: Vec<f64> = radii
        .iter()
        .enumerate()
        .map(|(k, &r)| log_max_modulus(h, r, k as f64 * schedule.rotation, samples))
        .collect();
    let loglog: Vec<f64> = log_max.iter().map(|&l| if l > 0.0 { l.ln() } else { f64::NAN }).collect();

    let last = radii.len() - 1;
    let mut first = last;
    while first > 0 && (radii[first - 1] >= radii[last] / 10.0 || last - first + 1 < 3) {
        first -= 1;
    }
    let pts: Vec<(f64, f64)> = (first..=last)
        .filter(|&i| loglog[i].is_finite())
        .map(|i| (radii[i].ln(), loglog[i]))
        .collect();
    if pts.len() < 3 {
        return Err(Error::Precondition("fewer than three radii with L(r) > 0".into()));
    }
    Ok(GrowthProfile {
        radii,
        log_max,
        loglog,
        slope: least_squares_slope(&pts),
        fit_range: (first, last),
        theoretical: None,
    })
}

/// Empirical order of a Schröder map with the matching schedule, annotated
/// with the theoretical order.
pub fn series_order(series: &SchroederSeries, r_max: f64, samples: usize) -> Result<GrowthProfile> {
    let schedule = RadiusSchedule::for_series(series, r_max);
    let mut profile = empirical_order(series, &schedule, samples)?;
    profile.theoretical = Some(valiron_order(series.map().degree(), series.period(), series.lambda())?);
    Ok(profile)
}

fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DcaBudget {
    /// Cap on direct singularities: `floor(2 rho v 1)`.
    pub max_direct: usize,
    /// Cap on singularities over finite values when `h` is entire: `floor(2 rho)`.
    pub max_finite: Option<usize>,
}

pub fn dca_budget(rho: f64, entire: bool) -> DcaBudget {
    let two_rho = 2.0 * rho.max(0.0) + FLOOR_SLACK;
    DcaBudget {
        max_direct: two_rho.max(1.0).floor() as usize,
        max_finite: entire.then(|| two_rho.floor() as usize),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schroeder::FnEvaluator;

    #[test]
    fn valiron_examples() {
        let c = |x: f64| Complex64::new(x, 0.0);
        assert!((valiron_order(2, 1, c(2.0)).unwrap() - 1.0).abs() < 1e-15);
        assert!((valiron_order(2, 1, c(4.0)).unwrap() - 0.5).abs() < 1e-15);
        assert!((valiron_order(3, 2, c(9.0)).unwrap() - 1.0).abs() < 1e-15);
        assert!(valiron_order(2, 1, c(0.5)).is_err());
    }

    #[test]
    fn dca_examples() {
        assert_eq!(dca_budget(1.0, true), DcaBudget { max_direct: 2, max_finite: Some(2) });
        assert_eq!(dca_budget(0.5, true), DcaBudget { max_direct: 1, max_finite: Some(1) });
        assert_eq!(dca_budget(0.3, false).max_direct, 1);
        assert_eq!(dca_budget(0.3, false).max_finite, None);
    }

    #[test]
    fn exp_closure_has_order_one() {
        let h = FnEvaluator::entire(|w: Complex64| w.exp()).with_log_abs(|w| w.re);
        let p = empirical_order(&h, &RadiusSchedule::geometric(1.0, 2.0, 1e6), 64).unwrap();
        assert!((p.slope - 1.0).abs() < 1e-6);
        assert!(p.is_monotone(1e-9));
    }

    #[test]
    fn polynomial_control_has_order_near_zero() {
        let h = FnEvaluator::entire(|w: Complex64| w * w * w + 2.0 * w + 1.0);
        let p = empirical_order(&h, &RadiusSchedule::geometric(2.0, 2.0, 1e6), 64).unwrap();
        assert!(p.slope.abs() < 0.1, "{}", p.slope);
    }

    #[test]
    fn meromorphic_input_is_rejected() {
        let h = FnEvaluator::new(|w| crate::sphere::SpherePoint::from_complex(w.tan()));
        assert!(matches!(
            empirical_order(&h, &RadiusSchedule::geometric(1.0, 2.0, 100.0), 16),
            Err(Error::NotEntire(_))
        ));
    }
}
