//! Parameter sweeps over the unicritical family `z^d + c`: membership in the
//! connectedness locus, attracting-cycle detection, and an optional complete
//! covering verdict per cell.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{classify, periodic_points, PointClass};
use crate::error::{Error, Result};
use crate::rational::RationalMap;
use crate::render::{escape_shade, ImageBuffer};
use crate::schroeder::SchroederSeries;
use crate::singularity::cover::{complete_covering_probe, CoverVerdict, DEFAULT_COVER_RADII};
use crate::singularity::BoxLadder;
use crate::sphere::SpherePoint;

pub const MAX_CELLS: usize = 10_000_000;
pub const ESCAPE_RADIUS: f64 = 2.0;
const CYCLE_ITER: usize = 2000;
const MAX_CYCLE_PERIOD: usize = 64;
const CYCLE_TOL: f64 = 1e-7;

#[derive(Clone, Debug)]
pub struct SweepOptions {
    pub degree: usize,
    pub re: (f64, f64),
    pub im: (f64, f64),
    pub nx: usize,
    pub ny: usize,
    pub max_iter: usize,
    /// Run the covering probe in cells of the connectedness locus.
    pub cover: bool,
    pub cover_box: f64,
    pub cover_grid: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            degree: 2,
            re: (-2.5, 1.5),
            im: (-2.0, 2.0),
            nx: 512,
            ny: 512,
            max_iter: 500,
            cover: false,
            cover_box: 20.0,
            cover_grid: 256,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepCell {
    pub re: f64,
    pub im: f64,
    pub in_c: bool,
    pub escape_iter: Option<usize>,
    pub in_h: bool,
    pub period: Option<usize>,
    pub multiplier_abs: Option<f64>,
    pub cover: Option<CoverVerdict>,
    pub error: Option<String>,
}

/// Escape iteration of the critical orbit `0, c, ...` past radius 2 (`None` if bounded).
pub fn critical_escape(d: usize, c: Complex64, max_iter: usize) -> Option<usize> {
    let r = ESCAPE_RADIUS.max(c.norm());
    let mut z = Complex64::new(0.0, 0.0);
    for k in 0..max_iter {
        z = z.powu(d as u32) + c;
        if z.norm() > r {
            return Some(k + 1);
        }
    }
    None
}

/// A point of an attracting cycle reached from the critical point, with period and multiplier.
pub fn attracting_cycle(d: usize, c: Complex64) -> Option<(Complex64, usize, Complex64)> {
    let f = |z: Complex64| z.powu(d as u32) + c;
    let mut z = Complex64::new(0.0, 0.0);
    for _ in 0..CYCLE_ITER {
        z = f(z);
        if !(z.norm() < 1e10) {
            return None;
        }
    }
    let mut w = z;
    for p in 1..=MAX_CYCLE_PERIOD {
        w = f(w);
        if (w - z).norm() < CYCLE_TOL * (1.0 + z.norm()) {
            let mut lambda = Complex64::new(1.0, 0.0);
            let mut u = z;
            for _ in 0..p {
                lambda *= d as f64 * u.powu(d as u32 - 1);
                u = f(u);
            }
            return (lambda.norm() < 1.0).then_some((z, p, lambda));
        }
    }
    None
}

pub fn sweep(opts: &SweepOptions) -> Result<Vec<SweepCell>> {
    if opts.nx * opts.ny > MAX_CELLS {
        return Err(Error::Precondition(format!("{} cells exceed {MAX_CELLS}", opts.nx * opts.ny)));
    }
    if opts.degree < 2 {
        return Err(Error::Precondition("degree must be at least 2".into()));
    }
    let cells: Vec<(usize, usize)> = (0..opts.ny).flat_map(|j| (0..opts.nx).map(move |i| (i, j))).collect();
    Ok(cells.par_iter().map(|&(i, j)| sweep_cell(opts, cell_center(opts, i, j))).collect())
}

/// Row 0 is the top row (largest imaginary part).
pub fn cell_center(opts: &SweepOptions, i: usize, j: usize) -> Complex64 {
    let dx = (opts.re.1 - opts.re.0) / opts.nx as f64;
    let dy = (opts.im.1 - opts.im.0) / opts.ny as f64;
    Complex64::new(opts.re.0 + (i as f64 + 0.5) * dx, opts.im.1 - (j as f64 + 0.5) * dy)
}

pub fn sweep_cell(opts: &SweepOptions, c: Complex64) -> SweepCell {
    let escape_iter = critical_escape(opts.degree, c, opts.max_iter);
    let in_c = escape_iter.is_none();
    let cycle = if in_c { attracting_cycle(opts.degree, c) } else { None };
    let mut cell = SweepCell {
        re: c.re,
        im: c.im,
        in_c,
        escape_iter,
        in_h: cycle.is_some(),
        period: cycle.map(|x| x.1),
        multiplier_abs: cycle.map(|x| x.2.norm()),
        cover: None,
        error: None,
    };
    if opts.cover && in_c {
        let a = match cycle {
            Some((z, _, _)) => SpherePoint::Finite(z),
            None => SpherePoint::Finite(c),
        };
        match cover_verdict(opts, c, a) {
            Ok(v) => cell.cover = Some(v),
            Err(e) => cell.error = Some(e.to_string()),
        }
    }
    cell
}

/// Covering verdict of the Schröder map at the least repelling fixed point.
fn cover_verdict(opts: &SweepOptions, c: Complex64, a: SpherePoint) -> Result<CoverVerdict> {
    let map = Arc::new(RationalMap::unicritical(opts.degree, c)?);
    let base = periodic_points(&map, 1)?
        .into_iter()
        .filter(|p| classify(p.multiplier) == PointClass::Repelling && !p.z0.is_infinite())
        .min_by(|a, b| a.multiplier.norm().total_cmp(&b.multiplier.norm()))
        .ok_or_else(|| Error::Precondition("no finite repelling fixed point".into()))?;
    let h = SchroederSeries::build(map, &base, crate::schroeder::DEFAULT_ORDER)?;
    let ladder = BoxLadder::evaluate(&h, opts.cover_box, opts.cover_grid);
    Ok(complete_covering_probe(&h, &ladder, a, &DEFAULT_COVER_RADII)?.verdict)
}

pub fn sweep_csv(cells: &[SweepCell]) -> String {
    let mut s = String::from("re,im,in_c,escape_iter,in_h,period,multiplier_abs,cover,error\n");
    let opt = |x: Option<String>| x.unwrap_or_default();
    for c in cells {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            c.re,
            c.im,
            c.in_c,
            opt(c.escape_iter.map(|k| k.to_string())),
            c.in_h,
            opt(c.period.map(|k| k.to_string())),
            opt(c.multiplier_abs.map(|m| format!("{m:e}"))),
            opt(c.cover.map(|v| serde_json::to_value(v).unwrap().as_str().unwrap().to_string())),
            opt(c.error.as_ref().map(|e| e.replace(',', ";"))),
        ));
    }
    s
}

/// Heatmap: escape-time shading outside, blue for attracting cycles, amber otherwise.
pub fn sweep_heatmap(opts: &SweepOptions, cells: &[SweepCell]) -> ImageBuffer {
    let dx = (opts.re.1 - opts.re.0) / opts.nx as f64;
    let dy = (opts.im.1 - opts.im.0) / opts.ny as f64;
    let mut img = ImageBuffer::new(opts.nx, opts.ny, 3, [opts.re.0, opts.im.1, dx, dy]);
    for (k, c) in cells.iter().enumerate() {
        let rgb = match (c.in_c, c.in_h, c.escape_iter) {
            (false, _, Some(e)) => escape_shade(e, opts.max_iter),
            (true, true, _) => [40, 80, 200],
            _ => [230, 170, 40],
        };
        img.pixels[3 * k..3 * k + 3].copy_from_slice(&rgb);
    }
    img
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_cells() {
        let o = SweepOptions::default();
        let c0 = sweep_cell(&o, Complex64::new(0.0, 0.0));
        assert!(c0.in_c && c0.in_h && c0.period == Some(1));
        let c1 = sweep_cell(&o, Complex64::new(1.0, 0.0));
        assert!(!c1.in_c && !c1.in_h);
        let cm1 = sweep_cell(&o, Complex64::new(-1.0, 0.0));
        assert!(cm1.in_c && cm1.in_h && cm1.period == Some(2));
        // c = -2: Julia set is an interval, no attracting cycle
        let cm2 = sweep_cell(&o, Complex64::new(-2.0, 0.0));
        assert!(cm2.in_c && !cm2.in_h);
    }
}
