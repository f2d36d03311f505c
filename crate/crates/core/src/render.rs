//! Image buffers, domain coloring of `h`, escape-time pictures, and PPM/PGM encoding.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dynamics::{escape_radius, escape_time};
use crate::error::{Error, Result};
use crate::rational::RationalMap;
use crate::schroeder::Evaluator;
use crate::sphere::SpherePoint;

pub const MAX_GRID: usize = 8192;

/// Row-major pixels, top row first. `transform = [x0, y0, dx, dy]` maps pixel
/// `(i, j)` to the world point `(x0 + (i + 0.5) dx, y0 - (j + 0.5) dy)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageBuffer {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub pixels: Vec<u8>,
    pub transform: [f64; 4],
}

impl ImageBuffer {
    pub fn new(width: usize, height: usize, channels: usize, transform: [f64; 4]) -> Self {
        ImageBuffer {
            width,
            height,
            channels,
            pixels: vec![0; width * height * channels],
            transform,
        }
    }

    /// Square box `[-half_width, half_width]^2` around `center`.
    pub fn for_box(center: Complex64, half_width: f64, n: usize, channels: usize) -> Self {
        let dx = 2.0 * half_width / n as f64;
        ImageBuffer::new(n, n, channels, [center.re - half_width, center.im + half_width, dx, dx])
    }

    pub fn world(&self, i: usize, j: usize) -> Complex64 {
        let [x0, y0, dx, dy] = self.transform;
        Complex64::new(x0 + (i as f64 + 0.5) * dx, y0 - (j as f64 + 0.5) * dy)
    }

    pub fn pixel(&self, i: usize, j: usize) -> &[u8] {
        let k = (j * self.width + i) * self.channels;
        &self.pixels[k..k + self.channels]
    }

    /// Fills every pixel from its world point, one parallel task per row.
    pub fn fill(&mut self, f: impl Fn(Complex64) -> [u8; 3] + Sync) {
        let (w, ch) = (self.width, self.channels);
        let this = self.clone_shape();
        self.pixels.par_chunks_mut(w * ch).enumerate().for_each(|(j, row)| {
            for i in 0..w {
                let rgb = f(this.world(i, j));
                row[i * ch..(i + 1) * ch].copy_from_slice(&rgb[..ch]);
            }
        });
    }

    fn clone_shape(&self) -> ImageBuffer {
        ImageBuffer {
            pixels: Vec::new(),
            ..*self
        }
    }

    /// Binary PPM (P6) for 3 channels, PGM (P5) for 1.
    pub fn encode(&self) -> Vec<u8> {
        let magic = if self.channels == 3 { "P6" } else { "P5" };
        let mut out = format!("{magic}\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }
}

fn check_grid(n: usize) -> Result<()> {
    if n == 0 || n > MAX_GRID {
        return Err(Error::Precondition(format!("grid {n} outside 1..={MAX_GRID}")));
    }
    Ok(())
}

/// Hue from `arg h`, lightness `t / (1 + t)` with `t = log(1 + |h|)`.
pub fn domain_color(v: SpherePoint) -> [u8; 3] {
    match v {
        SpherePoint::Infinity => [255, 255, 255],
        SpherePoint::Finite(z) => {
            let t = z.norm().ln_1p();
            let hue = z.arg().rem_euclid(std::f64::consts::TAU) / std::f64::consts::TAU;
            hsl_to_rgb(hue, 1.0, t / (1.0 + t))
        }
    }
}

pub fn render_domain_coloring<E: Evaluator + ?Sized>(h: &E, center: Complex64, half_width: f64, n: usize) -> Result<ImageBuffer> {
    check_grid(n)?;
    let mut img = ImageBuffer::for_box(center, half_width, n, 3);
    img.fill(|w| domain_color(h.eval(w)));
    Ok(img)
}

/// Filled-Julia-set picture of a polynomial: escape time shaded, interior black.
pub fn render_julia(map: &RationalMap, center: Complex64, half_width: f64, n: usize, max_iter: usize) -> Result<ImageBuffer> {
    check_grid(n)?;
    let radius = escape_radius(map).ok_or_else(|| Error::Precondition("escape-time pictures need a polynomial".into()))?;
    let mut img = ImageBuffer::for_box(center, half_width, n, 3);
    img.fill(|w| match escape_time(map, SpherePoint::Finite(w), radius, max_iter) {
        None => [0, 0, 0],
        Some(k) => escape_shade(k, max_iter),
    });
    Ok(img)
}

pub fn escape_shade(k: usize, max_iter: usize) -> [u8; 3] {
    let s = ((k as f64 + 1.0).ln() / (max_iter as f64 + 1.0).ln()).clamp(0.0, 1.0);
    hsl_to_rgb(0.6 - 0.6 * s, 0.8, 0.15 + 0.6 * s)
}

pub fn hsl_to_rgb(h: f64, s: f64, l: f64) -> [u8; 3] {
    let c = (1.0 - (2.0 * l - 1.0).abs()) * s;
    let hp = (h.rem_euclid(1.0)) * 6.0;
    let x = c * (1.0 - (hp % 2.0 - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = l - c / 2.0;
    let to = |v: f64| ((v + m).clamp(0.0, 1.0) * 255.0).round() as u8;
    [to(r), to(g), to(b)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schroeder::FnEvaluator;

    #[test]
    fn constant_function_gives_uniform_image() {
        let h = FnEvaluator::entire(|_| Complex64::new(2.0, 1.0));
        let img = render_domain_coloring(&h, Complex64::new(0.0, 0.0), 1.0, 16).unwrap();
        assert!(img.pixels.chunks(3).all(|p| p == img.pixel(0, 0)));
        assert!(img.encode().starts_with(b"P6\n16 16\n255\n"));
    }

    #[test]
    fn exp_colors_depend_on_imaginary_part_only_in_hue() {
        let h = FnEvaluator::entire(|w: Complex64| w.exp());
        let img = render_domain_coloring(&h, Complex64::new(0.0, 0.0), 2.0, 64).unwrap();
        // hue bands are horizontal: along a row the hue is constant
        let hue = |p: &[u8]| {
            let (r, g, b) = (p[0] as f64, p[1] as f64, p[2] as f64);
            (2.0 * r - g - b).atan2(3f64.sqrt() * (g - b))
        };
        for j in [5, 30, 50] {
            let h0 = hue(img.pixel(10, j));
            for i in [20, 40, 60] {
                assert!((hue(img.pixel(i, j)) - h0).abs() < 0.05, "row {j}");
            }
        }
    }

    #[test]
    fn rejects_oversized_grids() {
        let h = FnEvaluator::entire(|w| w);
        assert!(render_domain_coloring(&h, Complex64::new(0.0, 0.0), 1.0, MAX_GRID + 1).is_err());
    }
}
