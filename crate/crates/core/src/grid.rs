//! Square pixel grids over boxes in the plane and 4-connected component labeling.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::schroeder::Evaluator;
use crate::sphere::{chordal, SpherePoint};

/// The box `center + [-half_width, half_width]^2` sampled at `n x n` pixel centers.
/// Pixel `(i, j)` has column `i` (real part increasing) and row `j`
/// (imaginary part increasing); storage is row-major.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridBox {
    pub center: [f64; 2],
    pub half_width: f64,
    pub n: usize,
}

impl GridBox {
    pub fn centered(half_width: f64, n: usize) -> Self {
        GridBox {
            center: [0.0, 0.0],
            half_width,
            n,
        }
    }

    pub fn pixel_size(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn point(&self, idx: usize) -> Complex64 {
        let (i, j) = (idx % self.n, idx / self.n);
        let s = self.pixel_size();
        Complex64::new(
            self.center[0] - self.half_width + (i as f64 + 0.5) * s,
            self.center[1] - self.half_width + (j as f64 + 0.5) * s,
        )
    }

    pub fn index_of(&self, w: Complex64) -> Option<usize> {
        let s = self.pixel_size();
        let x = (w.re - self.center[0] + self.half_width) / s;
        let y = (w.im - self.center[1] + self.half_width) / s;
        if !(x >= 0.0 && y >= 0.0) {
            return None;
        }
        let (i, j) = (x.floor() as usize, y.floor() as usize);
        (i < self.n && j < self.n).then_some(j * self.n + i)
    }

    pub fn on_boundary(&self, idx: usize) -> bool {
        let (i, j) = (idx % self.n, idx / self.n);
        i == 0 || j == 0 || i + 1 == self.n || j + 1 == self.n
    }

    /// 4-neighbors of a pixel.
    pub fn neighbors(&self, idx: usize) -> impl Iterator<Item = usize> {
        let n = self.n;
        let (i, j) = (idx % n, idx / n);
        let mut out = [usize::MAX; 4];
        if i > 0 {
            out[0] = idx - 1;
        }
        if i + 1 < n {
            out[1] = idx + 1;
        }
        if j > 0 {
            out[2] = idx - n;
        }
        if j + 1 < n {
            out[3] = idx + n;
        }
        out.into_iter().filter(|&k| k != usize::MAX)
    }

    pub fn scaled(&self, factor: f64) -> GridBox {
        GridBox {
            half_width: self.half_width * factor,
            ..*self
        }
    }
}

/// Values of an evaluator at every pixel center.
#[derive(Clone, Debug)]
pub struct SampledGrid {
    pub grid: GridBox,
    pub values: Vec<SpherePoint>,
}

impl SampledGrid {
    pub fn evaluate<E: Evaluator + ?Sized>(h: &E, grid: GridBox) -> Self {
        let values = (0..grid.len()).into_par_iter().map(|k| h.eval(grid.point(k))).collect();
        SampledGrid { grid, values }
    }

    /// Pixels with `chi(h(w), a) < r`.
    pub fn disk_mask(&self, a: SpherePoint, r: f64) -> Vec<bool> {
        self.values.iter().map(|&v| chordal(v, a) < r).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Component {
    pub id: u32,
    pub pixels: usize,
    pub touches_boundary: bool,
    /// First pixel in scan order.
    pub first: usize,
}

/// 4-connected labels; 0 is background, components are numbered from 1 in scan order.
#[derive(Clone, Debug)]
pub struct Labeling {
    pub grid: GridBox,
    pub labels: Vec<u32>,
    pub components: Vec<Component>,
}

impl Labeling {
    pub fn new(grid: GridBox, mask: &[bool]) -> Self {
        assert_eq!(mask.len(), grid.len());
        let mut labels = vec![0u32; mask.len()];
        let mut components = Vec::new();
        let mut stack = Vec::new();
        for start in 0..mask.len() {
            if !mask[start] || labels[start] != 0 {
                continue;
            }
            let id = components.len() as u32 + 1;
            let mut comp = Component {
                id,
                pixels: 0,
                touches_boundary: false,
                first: start,
            };
            labels[start] = id;
            stack.push(start);
            while let Some(k) = stack.pop() {
                comp.pixels += 1;
                comp.touches_boundary |= grid.on_boundary(k);
                for nb in grid.neighbors(k) {
                    if mask[nb] && labels[nb] == 0 {
                        labels[nb] = id;
                        stack.push(nb);
                    }
                }
            }
            components.push(comp);
        }
        Labeling { grid, labels, components }
    }

    pub fn component(&self, id: u32) -> &Component {
        &self.components[id as usize - 1]
    }

    /// Label of the pixel containing `w` (0 outside the box or the mask).
    pub fn label_at(&self, w: Complex64) -> u32 {
        self.grid.index_of(w).map_or(0, |k| self.labels[k])
    }

    /// Pixel lists of all components, indexed by id - 1.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = self.components.iter().map(|c| Vec::with_capacity(c.pixels)).collect();
        for (k, &l) in self.labels.iter().enumerate() {
            if l != 0 {
                out[l as usize - 1].push(k);
            }
        }
        out
    }

    pub fn pixels_of(&self, id: u32) -> impl Iterator<Item = usize> + '_ {
        self.labels.iter().enumerate().filter(move |(_, &l)| l == id).map(|(k, _)| k)
    }

    /// Grayscale PGM (P5), component id mod 256 per pixel, top row = largest imaginary part.
    pub fn to_pgm(&self) -> Vec<u8> {
        let n = self.grid.n;
        let mut out = format!("P5\n{n} {n}\n255\n").into_bytes();
        for j in (0..n).rev() {
            out.extend(self.labels[j * n..(j + 1) * n].iter().map(|&l| (l % 256) as u8));
        }
        out
    }

    /// Shortest 4-connected pixel path inside one component (breadth-first).
    pub fn path_within(&self, from: usize, to: usize) -> Option<Vec<usize>> {
        let id = self.labels[from];
        if id == 0 || self.labels[to] != id {
            return None;
        }
        let mut prev = vec![usize::MAX; self.labels.len()];
        let mut queue = std::collections::VecDeque::from([from]);
        prev[from] = from;
        while let Some(k) = queue.pop_front() {
            if k == to {
                let mut path = vec![to];
                let mut c = to;
                while c != from {
                    c = prev[c];
                    path.push(c);
                }
                path.reverse();
                return Some(path);
            }
            for nb in self.grid.neighbors(k) {
                if self.labels[nb] == id && prev[nb] == usize::MAX {
                    prev[nb] = k;
                    queue.push_back(nb);
                }
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pixel_round_trip() {
        let g = GridBox::centered(2.0, 8);
        for k in 0..g.len() {
            assert_eq!(g.index_of(g.point(k)), Some(k));
        }
        assert_eq!(g.index_of(Complex64::new(2.5, 0.0)), None);
    }

    #[test]
    fn labels_two_blobs() {
        let g = GridBox::centered(1.0, 4);
        #[rustfmt::skip]
        let mask = [
            true, true, false, false,
            false, false, false, true,
            false, false, false, true,
            true, false, false, false,
        ];
        let l = Labeling::new(g, &mask);
        assert_eq!(l.components.len(), 3);
        assert_eq!(l.component(1).pixels, 2);
        assert_eq!(l.component(2).pixels, 2);
        assert!(l.components.iter().all(|c| c.touches_boundary));
        assert_eq!(l.path_within(0, 1), Some(vec![0, 1]));
        assert_eq!(l.path_within(0, 7), None);
        let pgm = l.to_pgm();
        assert!(pgm.starts_with(b"P5\n4 4\n255\n"));
        assert_eq!(pgm.len(), 11 + 16);
    }
}
