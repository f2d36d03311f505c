//! Numerical transcendental singularities of `h`: preimage tracts of small
//! spherical disks, their direct/indirect classification, the action of
//! `w -> lambda w` on them, and the basin-of-infinity invariants.

pub mod arc;
pub mod basin;
pub mod census;
pub mod cover;
pub mod lambda;
pub mod ply;
pub mod tracts;

use serde::Serialize;

use crate::grid::{GridBox, Labeling, SampledGrid};
use crate::schroeder::Evaluator;

/// Box half-width multipliers used to decide unboundedness.
pub const BOX_LADDER: [f64; 3] = [1.0, 2.0, 4.0];
pub const MIN_GRID: usize = 256;

/// Whether a component reaches the box edge at every scale of the ladder.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Persistence {
    Bounded,
    Unbounded,
    /// The component could not be followed to the larger box unambiguously.
    Ambiguous,
}

/// Values of `h` on the boxes `R`, `2R`, `4R` (same resolution).
#[derive(Clone, Debug)]
pub struct BoxLadder {
    pub grids: Vec<SampledGrid>,
}

impl BoxLadder {
    pub fn evaluate<E: Evaluator + ?Sized>(h: &E, half_width: f64, n: usize) -> Self {
        let base = GridBox::centered(half_width, n);
        BoxLadder {
            grids: BOX_LADDER.iter().map(|&s| SampledGrid::evaluate(h, base.scaled(s))).collect(),
        }
    }

    pub fn base(&self) -> &SampledGrid {
        &self.grids[0]
    }

    pub fn half_width(&self) -> f64 {
        self.grids[0].grid.half_width
    }
}

/// Labeling of the base box with a persistence verdict per component.
#[derive(Clone, Debug)]
pub struct PersistentLabeling {
    pub labeling: Labeling,
    /// Indexed by component id - 1.
    pub persistence: Vec<Persistence>,
    /// Label in the largest box reached by each unbounded component; base
    /// pieces sharing a root are parts of one component cut by the box edge.
    pub roots: Vec<Option<u32>>,
}

impl PersistentLabeling {
    /// Labels `mask_of(grid)` on every box of the ladder and follows each
    /// boundary-touching base component outward.
    pub fn new(ladder: &BoxLadder, mask_of: impl Fn(&SampledGrid) -> Vec<bool>) -> Self {
        let masks: Vec<Vec<bool>> = ladder.grids.iter().map(mask_of).collect();
        let grids: Vec<GridBox> = ladder.grids.iter().map(|g| g.grid).collect();
        Self::from_masks(&grids, &masks)
    }

    /// Same as [`PersistentLabeling::new`] with precomputed masks, base box first.
    pub fn from_masks(grids: &[GridBox], masks: &[Vec<bool>]) -> Self {
        let labelings: Vec<Labeling> = grids.iter().zip(masks).map(|(g, m)| Labeling::new(*g, m)).collect();
        let members: Vec<Vec<Vec<usize>>> = labelings.iter().map(Labeling::members).collect();
        let base = &labelings[0];
        let (persistence, roots) = base
            .components
            .iter()
            .map(|c| {
                if !c.touches_boundary {
                    return (Persistence::Bounded, None);
                }
                let mut pixels: &[usize] = &members[0][c.id as usize - 1];
                let mut current = base;
                let mut root = c.id;
                for (level, next) in labelings.iter().enumerate().skip(1) {
                    match follow(current, pixels, next) {
                        Some(id) => {
                            if !next.component(id).touches_boundary {
                                return (Persistence::Bounded, None);
                            }
                            pixels = &members[level][id as usize - 1];
                            current = next;
                            root = id;
                        }
                        None => return (Persistence::Ambiguous, None),
                    }
                }
                (Persistence::Unbounded, Some(root))
            })
            .unzip();
        PersistentLabeling {
            labeling: labelings.into_iter().next().unwrap(),
            persistence,
            roots,
        }
    }

    /// Unbounded base components grouped by shared root, in order of first member.
    pub fn unbounded_groups(&self) -> Vec<Vec<u32>> {
        let mut groups: Vec<(u32, Vec<u32>)> = Vec::new();
        for id in self.unbounded_ids() {
            let root = self.roots[id as usize - 1].unwrap();
            match groups.iter_mut().find(|g| g.0 == root) {
                Some(g) => g.1.push(id),
                None => groups.push((root, vec![id])),
            }
        }
        groups.into_iter().map(|g| g.1).collect()
    }

    pub fn unbounded_ids(&self) -> Vec<u32> {
        self.ids_with(Persistence::Unbounded)
    }

    pub fn ids_with(&self, p: Persistence) -> Vec<u32> {
        self.persistence
            .iter()
            .enumerate()
            .filter(|(_, &q)| q == p)
            .map(|(i, _)| i as u32 + 1)
            .collect()
    }

    pub fn status(&self, id: u32) -> Persistence {
        self.persistence[id as usize - 1]
    }
}

/// The component of `next` holding the majority of the hits of the given
/// pixels of `from`; `None` when nothing is hit or no component has half.
fn follow(from: &Labeling, pixels: &[usize], next: &Labeling) -> Option<u32> {
    let mut votes: Vec<(u32, usize)> = Vec::new();
    for &k in pixels {
        let l = next.label_at(from.grid.point(k));
        if l == 0 {
            continue;
        }
        match votes.iter_mut().find(|(id, _)| *id == l) {
            Some(v) => v.1 += 1,
            None => votes.push((l, 1)),
        }
    }
    let total: usize = votes.iter().map(|v| v.1).sum();
    let &(id, best) = votes.iter().max_by_key(|(id, n)| (*n, std::cmp::Reverse(*id)))?;
    (2 * best >= total).then_some(id)
}

/// Evenly thinned subset of at most `max` items.
pub(crate) fn thin<T: Copy>(items: &[T], max: usize) -> Vec<T> {
    if items.len() <= max {
        return items.to_vec();
    }
    (0..max).map(|i| items[i * items.len() / max]).collect()
}
