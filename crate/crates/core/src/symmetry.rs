//! Lattice automorphisms as permutations of linear indices, used to skip
//! subsets that are not the colex-least member of their orbit.

use crate::error::{Error, Result};
use crate::lattice::{LatticeSpec, Topology};

/// Largest universe for which pruning is available (subsets fit in a `u128` mask).
pub const MAX_PRUNING_CELLS: usize = 128;
const MAX_GROUP_ORDER: usize = 1 << 20;

#[derive(Debug, Clone)]
pub struct SymmetryGroup {
    cells: usize,
    /// `perms[g][i]` is the image of cell `i` under the g-th automorphism.
    perms: Vec<Vec<u8>>,
}

fn permutations(d: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut items: Vec<usize> = (0..d).collect();
    fn heap(k: usize, items: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(items.clone());
            return;
        }
        for i in 0..k {
            heap(k - 1, items, out);
            let j = if k.is_multiple_of(2) { i } else { 0 };
            items.swap(j, k - 1);
        }
    }
    heap(d, &mut items, &mut out);
    out.sort();
    out.dedup();
    out
}

impl SymmetryGroup {
    /// Coordinate permutations and reflections `x -> n + 1 - x` (the
    /// hyperoctahedral group); on the torus also all translations.
    pub fn of(spec: &LatticeSpec) -> Result<Self> {
        let cells = spec.cell_count();
        if cells > MAX_PRUNING_CELLS {
            return Err(Error::input(format!(
                "symmetry pruning supports at most {MAX_PRUNING_CELLS} cells, lattice has {cells}"
            )));
        }
        let d = spec.d() as usize;
        let n = spec.n();
        let mut order: usize = 1;
        for k in 1..=d {
            order = order.saturating_mul(2 * k);
        }
        let translations = if spec.topology() == Topology::Torus { cells } else { 1 };
        if order.saturating_mul(translations) > MAX_GROUP_ORDER {
            return Err(Error::input("symmetry group too large for pruning"));
        }

        let coords: Vec<Vec<u32>> = (0..cells).map(|i| spec.coords_of(i)).collect();
        let mut perms = Vec::new();
        let mut image = vec![0u32; d];
        for shift in 0..translations {
            let offset = spec.coords_of(shift);
            for p in permutations(d) {
                for flips in 0..(1u32 << d) {
                    let perm: Vec<u8> = coords
                        .iter()
                        .map(|c| {
                            for (k, slot) in image.iter_mut().enumerate() {
                                let mut x = c[p[k]];
                                if flips >> k & 1 == 1 {
                                    x = n + 1 - x;
                                }
                                if translations > 1 {
                                    x = (x - 1 + offset[k] - 1) % n + 1;
                                }
                                *slot = x;
                            }
                            spec.index_of(&image).expect("automorphism stays in the lattice") as u8
                        })
                        .collect();
                    perms.push(perm);
                }
            }
        }
        perms.sort();
        perms.dedup();
        Ok(SymmetryGroup { cells, perms })
    }

    pub fn order(&self) -> usize {
        self.perms.len()
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    /// Bitmask of a subset; numeric order on masks of equal popcount is colex order.
    pub fn mask(subset: &[u32]) -> u128 {
        subset.iter().fold(0u128, |m, &i| m | 1u128 << i)
    }

    /// True iff no automorphism maps `subset` to a colex-smaller set.
    pub fn is_canonical(&self, subset: &[u32]) -> bool {
        let mask = Self::mask(subset);
        self.perms.iter().all(|perm| {
            let image = subset.iter().fold(0u128, |m, &i| m | 1u128 << perm[i as usize]);
            image >= mask
        })
    }

    /// Checks that every element maps edges to edges, i.e. is an automorphism.
    pub fn verify(&self, spec: &LatticeSpec) -> bool {
        self.perms.iter().all(|perm| {
            (0..self.cells).all(|i| {
                spec.neighbor_indices(i)
                    .all(|j| spec.are_adjacent(perm[i] as usize, perm[j] as usize))
            })
        })
    }
}
