//! The action `A -> lambda A` on tracts, realized by matching components:
//! sample points of a tract are multiplied by `lambda` and looked up in the
//! family over `f^p(a)`.

use num_complex::Complex64;
use serde::Serialize;

use super::thin;
use super::tracts::TractFamily;
use crate::error::{Error, Result};
use crate::sphere::SpherePoint;

const MAX_SAMPLES: usize = 256;
/// Fraction of samples that must land in the same target tract.
pub const MIN_AGREEMENT: f64 = 0.8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TractMatch {
    pub source: usize,
    pub target: Option<usize>,
    pub agreement: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LambdaMatching {
    pub source_value: SpherePoint,
    pub target_value: SpherePoint,
    pub matches: Vec<TractMatch>,
    /// Every source tract is matched and no two share a target.
    pub injective: bool,
    /// Source and target are the same family and the matching is a bijection.
    pub permutation: Option<Vec<usize>>,
    pub cycles: Vec<Vec<usize>>,
}

/// Matches each tract of `source` to a tract of `target` (the family over `f^p(a)`).
pub fn lambda_action(source: &TractFamily, target: &TractFamily, lambda: Complex64, same_family: bool) -> Result<LambdaMatching> {
    let grid = source.deepest().labels.labeling.grid;
    if target.tracts.is_empty() && !target.vanished.is_empty() {
        // the target tract only continues past the box at the deeper radii
        return Err(Error::EnlargeBox {
            half_width: grid.half_width,
        });
    }
    let inner = grid.half_width / lambda.norm();
    let mut matches = Vec::new();
    for (ti, tract) in source.tracts.iter().enumerate() {
        // deepest rung of the chain with points whose lambda-image stays in the box
        let pts: Vec<Complex64> = source
            .rungs
            .iter()
            .zip(&tract.chain)
            .rev()
            .map(|(rung, ids)| {
                ids.iter()
                    .flat_map(|&id| rung.labels.labeling.pixels_of(id))
                    .map(|k| grid.point(k))
                    .filter(|w| w.norm() < inner)
                    .collect::<Vec<_>>()
            })
            .find(|p| !p.is_empty())
            .ok_or(Error::EnlargeBox {
                half_width: grid.half_width,
            })?;
        let samples = thin(&pts, MAX_SAMPLES);
        let mut votes = vec![0usize; target.tracts.len()];
        for w in &samples {
            if let Some(t) = locate(target, lambda * w) {
                votes[t] += 1;
            }
        }
        let best = votes.iter().enumerate().max_by_key(|(i, &v)| (v, std::cmp::Reverse(*i)));
        let m = match best {
            Some((t, &v)) if v as f64 >= MIN_AGREEMENT * samples.len() as f64 => TractMatch {
                source: ti,
                target: Some(t),
                agreement: v as f64 / samples.len() as f64,
            },
            Some((_, &v)) => TractMatch {
                source: ti,
                target: None,
                agreement: v as f64 / samples.len() as f64,
            },
            None => TractMatch {
                source: ti,
                target: None,
                agreement: 0.0,
            },
        };
        matches.push(m);
    }

    let targets: Vec<Option<usize>> = matches.iter().map(|m| m.target).collect();
    let injective = targets.iter().all(|t| t.is_some()) && {
        let mut seen: Vec<usize> = targets.iter().flatten().copied().collect();
        seen.sort_unstable();
        seen.windows(2).all(|w| w[0] != w[1])
    };
    let permutation = (same_family && injective && targets.len() == target.tracts.len())
        .then(|| targets.iter().map(|t| t.unwrap()).collect::<Vec<_>>());
    let cycles = permutation.as_deref().map(cycles_of).unwrap_or_default();
    Ok(LambdaMatching {
        source_value: source.a,
        target_value: target.a,
        matches,
        injective,
        permutation,
        cycles,
    })
}

/// The target tract containing `w`, searched from the deepest rung upward;
/// components belonging to no tract defer to the next larger radius.
fn locate(family: &TractFamily, w: Complex64) -> Option<usize> {
    for (i, rung) in family.rungs.iter().enumerate().rev() {
        let l = rung.labels.labeling.label_at(w);
        if l == 0 {
            continue;
        }
        let hits: Vec<usize> = family
            .tracts
            .iter()
            .enumerate()
            .filter(|(_, t)| t.chain[i].contains(&l))
            .map(|(k, _)| k)
            .collect();
        match hits.len() {
            0 => continue,
            1 => return Some(hits[0]),
            _ => return None,
        }
    }
    None
}

/// Cycle decomposition of a permutation, each cycle starting at its smallest element.
pub fn cycles_of(perm: &[usize]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; perm.len()];
    let mut out = Vec::new();
    for s in 0..perm.len() {
        if seen[s] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut k = s;
        while !seen[k] {
            seen[k] = true;
            cycle.push(k);
            k = perm[k];
        }
        out.push(cycle);
    }
    out
}
