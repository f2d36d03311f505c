//! Seeded random test maps: quadratics `z^2 + c` with `c` in the
//! connectedness locus, and cubic polynomials, each paired with a repelling
//! fixed point.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

use crate::dynamics::{classify, periodic_points, PeriodicPoint, PointClass};
use crate::error::Result;
use crate::poly::Poly;
use crate::rational::RationalMap;
use crate::sweep::critical_escape;

pub const DEFAULT_SEED: u64 = 0x5c_4e0d_e2;
/// Smallest accepted multiplier modulus for the base point.
pub const MIN_MULTIPLIER: f64 = 1.2;
const MEMBERSHIP_ITER: usize = 500;

#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub map: Arc<RationalMap>,
    pub point: PeriodicPoint,
    /// Parameter `c` for quadratics.
    pub c: Option<Complex64>,
}

/// Finite repelling fixed point with the smallest `|lambda| >= min_modulus`.
pub fn least_repelling_fixed_point(map: &RationalMap, min_modulus: f64) -> Result<Option<PeriodicPoint>> {
    Ok(periodic_points(map, 1)?
        .into_iter()
        .filter(|p| !p.z0.is_infinite() && classify(p.multiplier) == PointClass::Repelling)
        .filter(|p| p.multiplier.norm() >= min_modulus)
        .min_by(|a, b| a.multiplier.norm().total_cmp(&b.multiplier.norm())))
}

/// `count` quadratics `z^2 + c`, `c` uniform in `[-2, 0.5] x [-1.25, 1.25]`
/// conditioned on a bounded critical orbit.
pub fn random_quadratics(seed: u64, count: usize) -> Result<Vec<CorpusEntry>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let c = Complex64::new(rng.gen_range(-2.0..0.5), rng.gen_range(-1.25..1.25));
        if critical_escape(2, c, MEMBERSHIP_ITER).is_some() {
            continue;
        }
        let map = RationalMap::unicritical(2, c)?;
        if let Some(point) = least_repelling_fixed_point(&map, MIN_MULTIPLIER)? {
            out.push(CorpusEntry {
                map: Arc::new(map),
                point,
                c: Some(c),
            });
        }
    }
    Ok(out)
}

/// Monic cubics with the other coefficients uniform in the unit square.
pub fn random_cubics(seed: u64, count: usize) -> Result<Vec<CorpusEntry>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut coeffs: Vec<Complex64> = (0..3)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        coeffs.push(Complex64::new(1.0, 0.0));
        let map = RationalMap::polynomial(Poly::new(coeffs))?;
        if let Some(point) = least_repelling_fixed_point(&map, MIN_MULTIPLIER)? {
            out.push(CorpusEntry {
                map: Arc::new(map),
                point,
                c: None,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_is_reproducible() {
        let a = random_quadratics(7, 5).unwrap();
        let b = random_quadratics(7, 5).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.c, y.c);
            assert!(x.point.multiplier.norm() >= MIN_MULTIPLIER);
        }
        let cubics = random_cubics(7, 3).unwrap();
        assert!(cubics.iter().all(|e| e.map.degree() == 3));
    }
}
