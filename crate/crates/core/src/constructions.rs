//! Initial sets built from level sets `V_k = { v in [n]^d : v_1 + ... + v_d = k }`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cellset::CellSet;
use crate::error::{Error, Result};
use crate::lattice::LatticeSpec;

/// Calls `f` with the coordinates of every cell of `V_k` in `[n]^d`,
/// in increasing row-major order. Enumerates compositions directly, so the
/// cost is proportional to `|V_k|` rather than `n^d`.
pub fn for_each_in_level(d: u32, n: u32, k: i64, mut f: impl FnMut(&[u32])) {
    let (d_, n_) = (i64::from(d), i64::from(n));
    if d == 0 || n == 0 || k < d_ || k > d_ * n_ {
        return;
    }
    let mut coords = vec![0u32; d as usize];
    fn rec(pos: usize, remaining: i64, n: i64, coords: &mut [u32], f: &mut dyn FnMut(&[u32])) {
        let left = (coords.len() - pos - 1) as i64;
        if left == 0 {
            coords[pos] = remaining as u32;
            f(coords);
            return;
        }
        // Each of the `left` later coordinates takes a value in 1..=n.
        let lo = (remaining - left * n).max(1);
        let hi = (remaining - left).min(n);
        for v in lo..=hi {
            coords[pos] = v as u32;
            rec(pos + 1, remaining - v, n, coords, f);
        }
    }
    rec(0, k, n_, &mut coords, &mut f);
}

fn insert_level(set: &mut CellSet, k: i64) {
    let spec = *set.spec();
    for_each_in_level(spec.d(), spec.n(), k, |coords| {
        set.insert(spec.index_of(coords).expect("enumerated coordinates are in range"));
    });
}

/// `V_k` as a set in `[n]^d` (empty for `k < d` or `k > dn`).
pub fn level_set(d: u32, n: u32, k: i64) -> Result<CellSet> {
    let spec = LatticeSpec::grid(d, n)?;
    let mut set = CellSet::empty(spec);
    insert_level(&mut set, k);
    Ok(set)
}

/// `V_n ∪ V_2n ∪ ... ∪ V_dn`, a percolating set of size `n^(d-1)` for the
/// d-neighbour rule.
pub fn hyperplane_union(d: u32, n: u32) -> Result<CellSet> {
    let spec = LatticeSpec::grid(d, n)?;
    let mut set = CellSet::empty(spec);
    for i in 1..=i64::from(d) {
        insert_level(&mut set, i * i64::from(n));
    }
    Ok(set)
}

/// The hyperplane union with every level lowered by `floor(n/2)`. No
/// percolation guarantee.
pub fn shifted_union(d: u32, n: u32) -> Result<CellSet> {
    let spec = LatticeSpec::grid(d, n)?;
    let mut set = CellSet::empty(spec);
    let shift = i64::from(n / 2);
    for i in 1..=i64::from(d) {
        insert_level(&mut set, i * i64::from(n) - shift);
    }
    Ok(set)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NamedSet {
    /// `{(i, i)}` in `[n]^2`.
    Diagonal2d,
    /// Every cell with a coordinate equal to 1 or n.
    Boundary,
    /// Torus construction for `d = 3`, see [`torus3_seeds`].
    Torus3,
}

impl FromStr for NamedSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "diagonal2d" | "diagonal" => Ok(NamedSet::Diagonal2d),
            "boundary" => Ok(NamedSet::Boundary),
            "torus3" => Ok(NamedSet::Torus3),
            other => Err(Error::input(format!("unknown named set `{other}`"))),
        }
    }
}

impl fmt::Display for NamedSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NamedSet::Diagonal2d => "diagonal2d",
            NamedSet::Boundary => "boundary",
            NamedSet::Torus3 => "torus3",
        })
    }
}

/// The three extra seeds of the torus construction: `(1,1,n)`, `(1,n,1)`
/// and `(n,1,1)`, one in each wraparound slab `x_i = n`.
pub fn torus3_seeds(n: u32) -> [[u32; 3]; 3] {
    [[1, 1, n], [1, n, 1], [n, 1, 1]]
}

/// Builds a named set. `Torus3` lives on the torus, the others on the grid.
pub fn named_set(name: NamedSet, d: u32, n: u32) -> Result<CellSet> {
    match name {
        NamedSet::Diagonal2d => {
            if d != 2 {
                return Err(Error::input(format!("diagonal2d needs d = 2, got d = {d}")));
            }
            let spec = LatticeSpec::grid(2, n)?;
            CellSet::from_indices(spec, (1..=n).map(|i| spec.index_of(&[i, i]).expect("in range")))
        }
        NamedSet::Boundary => {
            let spec = LatticeSpec::grid(d, n)?;
            let mut set = CellSet::empty(spec);
            let mut buf = vec![0u32; d as usize];
            for idx in 0..spec.cell_count() {
                spec.write_coords(idx, &mut buf);
                if buf.iter().any(|&c| c == 1 || c == n) {
                    set.insert(idx);
                }
            }
            Ok(set)
        }
        NamedSet::Torus3 => {
            if d != 3 || n < 3 {
                return Err(Error::input(format!(
                    "torus3 needs d = 3 and n >= 3, got d = {d}, n = {n}"
                )));
            }
            let spec = LatticeSpec::torus(3, n)?;
            let sub = LatticeSpec::grid(3, n - 1)?;
            let mut set = CellSet::empty(spec);
            // Hyperplane union of the [n-1]^3 corner cube, same coordinates.
            for c in hyperplane_union(3, n - 1)?.iter() {
                set.insert(spec.index_of(&sub.coords_of(c))?);
            }
            for seed in torus3_seeds(n) {
                set.insert(spec.index_of(&seed)?);
            }
            Ok(set)
        }
    }
}

/// Any initial set the tools know by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Construction {
    Hyperplanes,
    Shifted,
    Named(NamedSet),
    Level(i64),
}

impl Construction {
    pub fn build(&self, d: u32, n: u32) -> Result<CellSet> {
        match *self {
            Construction::Hyperplanes => hyperplane_union(d, n),
            Construction::Shifted => shifted_union(d, n),
            Construction::Named(name) => named_set(name, d, n),
            Construction::Level(k) => level_set(d, n, k),
        }
    }
}

impl FromStr for Construction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hyperplanes" => Ok(Construction::Hyperplanes),
            "shifted" => Ok(Construction::Shifted),
            _ => {
                if let Some(k) = s.strip_prefix("level:") {
                    let k = k
                        .parse()
                        .map_err(|_| Error::input(format!("bad level in `{s}`")))?;
                    return Ok(Construction::Level(k));
                }
                s.parse().map(Construction::Named).map_err(|_| {
                    Error::input(format!(
                        "unknown construction `{s}` (expected hyperplanes, shifted, diagonal2d, boundary, torus3 or level:K)"
                    ))
                })
            }
        }
    }
}

impl fmt::Display for Construction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Construction::Hyperplanes => f.write_str("hyperplanes"),
            Construction::Shifted => f.write_str("shifted"),
            Construction::Named(name) => name.fmt(f),
            Construction::Level(k) => write!(f, "level:{k}"),
        }
    }
}
