//! Complete covering: does some disk `U_r(a)` have only bounded preimage components?

use serde::Serialize;

use super::tracts::preimage_components;
use super::{BoxLadder, Persistence};
use crate::error::{Error, Result};
use crate::schroeder::Evaluator;
use crate::sphere::SpherePoint;

pub const DEFAULT_COVER_RADII: [f64; 4] = [0.2, 0.05, 0.0125, 0.003125];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoverVerdict {
    CoversCompletely,
    UnboundedTractFound,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct CoverRung {
    pub r: f64,
    pub components: usize,
    pub unbounded: usize,
    pub ambiguous: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct CoverReport {
    pub a: SpherePoint,
    pub half_width: f64,
    pub rungs: Vec<CoverRung>,
    pub verdict: CoverVerdict,
}

pub fn complete_covering_probe<E: Evaluator + ?Sized>(h: &E, ladder: &BoxLadder, a: SpherePoint, radii: &[f64]) -> Result<CoverReport> {
    if !h.is_entire() {
        return Err(Error::NotEntire("complete covering is probed for entire h only".into()));
    }
    let rungs: Vec<CoverRung> = radii
        .iter()
        .map(|&r| {
            let pl = preimage_components(ladder, a, r);
            CoverRung {
                r,
                components: pl.labeling.components.len(),
                unbounded: pl.ids_with(Persistence::Unbounded).len(),
                ambiguous: pl.ids_with(Persistence::Ambiguous).len(),
            }
        })
        .collect();
    let verdict = if rungs.iter().any(|c| c.unbounded == 0 && c.ambiguous == 0) {
        CoverVerdict::CoversCompletely
    } else if rungs.iter().all(|c| c.unbounded > 0) {
        CoverVerdict::UnboundedTractFound
    } else {
        CoverVerdict::Inconclusive
    };
    Ok(CoverReport {
        a,
        half_width: ladder.half_width(),
        rungs,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schroeder::FnEvaluator;
    use num_complex::Complex64;

    #[test]
    fn polynomial_control_covers_everything() {
        let h = FnEvaluator::entire(|w: Complex64| w * w - 3.0);
        let ladder = BoxLadder::evaluate(&h, 20.0, 256);
        for a in [SpherePoint::ZERO, SpherePoint::real(1.0), SpherePoint::real(-3.0)] {
            let r = complete_covering_probe(&h, &ladder, a, &DEFAULT_COVER_RADII).unwrap();
            assert_eq!(r.verdict, CoverVerdict::CoversCompletely);
        }
    }
}
