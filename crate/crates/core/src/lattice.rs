//! Geometry of the d-dimensional grid `[n]^d` and torus.
//!
//! Cells are addressed externally by 1-based coordinates `(v_1, ..., v_d)`
//! with every `v_i` in `1..=n`. Internally each cell has a linear index in
//! `0..n^d` given by the row-major rule
//!
//! ```text
//! index = sum_i (v_i - 1) * n^(d - i)      (i = 1..d)
//! ```
//!
//! so the first coordinate is the most significant digit. Neighbours are
//! always produced in the same order: dimension 1 through d, and within a
//! dimension the `-1` step before the `+1` step.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    Grid,
    Torus,
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Topology::Grid => f.write_str("grid"),
            Topology::Torus => f.write_str("torus"),
        }
    }
}

impl std::str::FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "grid" => Ok(Topology::Grid),
            "torus" => Ok(Topology::Torus),
            other => Err(Error::input(format!("unknown topology `{other}` (expected grid or torus)"))),
        }
    }
}

/// Dimension, side length, topology and infection threshold of a lattice.
///
/// Immutable once built; all constructors validate the invariants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LatticeSpec {
    d: u32,
    n: u32,
    topology: Topology,
    r: u32,
    cells: usize,
    // n^(d-1), the stride of the first coordinate.
    top_stride: usize,
}

impl LatticeSpec {
    /// Upper limit on `n^d`.
    pub const MAX_CELLS: u64 = 1 << 32;
    pub const MAX_DIMENSION: u32 = 32;

    pub fn new(d: u32, n: u32, topology: Topology, r: u32) -> Result<Self> {
        if d == 0 {
            return Err(Error::input("dimension d must be at least 1"));
        }
        if d > Self::MAX_DIMENSION {
            return Err(Error::input(format!(
                "dimension d = {d} exceeds the supported maximum of {}",
                Self::MAX_DIMENSION
            )));
        }
        if n == 0 {
            return Err(Error::input("side length n must be at least 1"));
        }
        if topology == Topology::Torus && n < 3 {
            return Err(Error::input(format!(
                "torus requires n >= 3 (got n = {n}); smaller sides give parallel edges"
            )));
        }
        if r == 0 || r > 2 * d {
            return Err(Error::input(format!("threshold r = {r} must lie in 1..={}", 2 * d)));
        }
        let mut cells: u64 = 1;
        for _ in 0..d {
            cells = cells.saturating_mul(u64::from(n));
            if cells > Self::MAX_CELLS {
                return Err(Error::input(format!(
                    "lattice [{n}]^{d} has more than 2^32 cells"
                )));
            }
        }
        let cells = usize::try_from(cells)
            .map_err(|_| Error::input("lattice does not fit in the address space"))?;
        Ok(LatticeSpec {
            d,
            n,
            topology,
            r,
            cells,
            top_stride: cells / n as usize,
        })
    }

    /// `[n]^d` with the d-neighbour rule.
    pub fn grid(d: u32, n: u32) -> Result<Self> {
        Self::new(d, n, Topology::Grid, d)
    }

    /// The torus of side `n` with the d-neighbour rule.
    pub fn torus(d: u32, n: u32) -> Result<Self> {
        Self::new(d, n, Topology::Torus, d)
    }

    pub fn with_threshold(self, r: u32) -> Result<Self> {
        Self::new(self.d, self.n, self.topology, r)
    }

    pub fn with_topology(self, topology: Topology) -> Result<Self> {
        Self::new(self.d, self.n, topology, self.r)
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn threshold(&self) -> u32 {
        self.r
    }

    pub fn cell_count(&self) -> usize {
        self.cells
    }

    /// True when both specs describe the same cell universe and adjacency
    /// (the threshold is ignored).
    pub fn same_geometry(&self, other: &LatticeSpec) -> bool {
        self.d == other.d && self.n == other.n && self.topology == other.topology
    }

    pub fn index_of(&self, coords: &[u32]) -> Result<usize> {
        if coords.len() != self.d as usize {
            return Err(Error::input(format!(
                "cell has {} coordinates, expected {}",
                coords.len(),
                self.d
            )));
        }
        let n = self.n as usize;
        let mut idx = 0usize;
        for &c in coords {
            if c == 0 || c > self.n {
                return Err(Error::input(format!(
                    "coordinate {c} outside 1..={} in {}",
                    self.n,
                    Cell::display_coords(coords)
                )));
            }
            idx = idx * n + (c as usize - 1);
        }
        Ok(idx)
    }

    pub fn index_of_cell(&self, cell: &Cell) -> Result<usize> {
        self.index_of(cell.coords())
    }

    /// Writes the 1-based coordinates of `idx` into `out` (length `d`).
    pub fn write_coords(&self, idx: usize, out: &mut [u32]) {
        debug_assert!(idx < self.cells);
        debug_assert_eq!(out.len(), self.d as usize);
        let n = self.n as usize;
        let mut rest = idx;
        for slot in out.iter_mut().rev() {
            *slot = (rest % n) as u32 + 1;
            rest /= n;
        }
    }

    pub fn coords_of(&self, idx: usize) -> Vec<u32> {
        let mut out = vec![0; self.d as usize];
        self.write_coords(idx, &mut out);
        out
    }

    pub fn cell_at(&self, idx: usize) -> Cell {
        Cell(self.coords_of(idx))
    }

    /// Coordinate sum of the cell at `idx`.
    pub fn level_of_index(&self, idx: usize) -> u32 {
        let n = self.n as usize;
        let mut rest = idx;
        let mut sum = 0u32;
        for _ in 0..self.d {
            sum += (rest % n) as u32 + 1;
            rest /= n;
        }
        sum
    }

    /// Neighbour indices of `idx` in the fixed order.
    pub fn neighbor_indices(&self, idx: usize) -> NeighborIter<'_> {
        debug_assert!(idx < self.cells);
        NeighborIter {
            spec: self,
            idx,
            stride: self.top_stride,
            dim: 0,
            plus: false,
        }
    }

    pub fn neighbors(&self, cell: &Cell) -> Result<Vec<Cell>> {
        let idx = self.index_of_cell(cell)?;
        Ok(self.neighbor_indices(idx).map(|j| self.cell_at(j)).collect())
    }

    pub fn degree(&self, idx: usize) -> usize {
        self.neighbor_indices(idx).count()
    }

    pub fn are_adjacent(&self, a: usize, b: usize) -> bool {
        self.neighbor_indices(a).any(|j| j == b)
    }
}

impl fmt::Display for LatticeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.topology {
            Topology::Grid => write!(f, "[{}]^{} grid, r = {}", self.n, self.d, self.r),
            Topology::Torus => write!(f, "{}^{} torus, r = {}", self.n, self.d, self.r),
        }
    }
}

pub struct NeighborIter<'a> {
    spec: &'a LatticeSpec,
    idx: usize,
    stride: usize,
    dim: u32,
    plus: bool,
}

impl Iterator for NeighborIter<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        let n = self.spec.n as usize;
        while self.dim < self.spec.d {
            let stride = self.stride;
            let coord = (self.idx / stride) % n;
            let plus = self.plus;
            if plus {
                self.plus = false;
                self.dim += 1;
                self.stride /= n;
            } else {
                self.plus = true;
            }
            let found = match (self.spec.topology, plus) {
                (Topology::Grid, false) => (coord > 0).then(|| self.idx - stride),
                (Topology::Grid, true) => (coord + 1 < n).then(|| self.idx + stride),
                (Topology::Torus, false) if coord == 0 => Some(self.idx + (n - 1) * stride),
                (Topology::Torus, false) => Some(self.idx - stride),
                (Topology::Torus, true) if coord + 1 == n => Some(self.idx - (n - 1) * stride),
                (Topology::Torus, true) => Some(self.idx + stride),
            };
            if found.is_some() {
                return found;
            }
        }
        None
    }
}

/// A lattice cell given by its 1-based coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Cell(Vec<u32>);

impl Cell {
    pub fn new(coords: impl Into<Vec<u32>>) -> Self {
        Cell(coords.into())
    }

    pub fn coords(&self) -> &[u32] {
        &self.0
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }

    pub fn level(&self) -> u32 {
        level_of(self)
    }

    fn display_coords(coords: &[u32]) -> String {
        let parts: Vec<String> = coords.iter().map(u32::to_string).collect();
        format!("({})", parts.join(","))
    }
}

impl From<Vec<u32>> for Cell {
    fn from(v: Vec<u32>) -> Self {
        Cell(v)
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&Cell::display_coords(&self.0))
    }
}

/// Coordinate sum; the index `k` of the level set `V_k` holding the cell.
pub fn level_of(cell: &Cell) -> u32 {
    cell.0.iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cells(v: &[&[u32]]) -> Vec<Cell> {
        v.iter().map(|c| Cell::new(c.to_vec())).collect()
    }

    #[test]
    fn grid_corner_neighbors() {
        let spec = LatticeSpec::grid(2, 3).unwrap();
        let got = spec.neighbors(&Cell::new(vec![1, 1])).unwrap();
        assert_eq!(got, cells(&[&[2, 1], &[1, 2]]));
    }

    #[test]
    fn grid_interior_neighbors_in_fixed_order() {
        let spec = LatticeSpec::grid(2, 3).unwrap();
        let got = spec.neighbors(&Cell::new(vec![2, 2])).unwrap();
        assert_eq!(got, cells(&[&[1, 2], &[3, 2], &[2, 1], &[2, 3]]));
    }

    #[test]
    fn torus_wraps() {
        let spec = LatticeSpec::torus(2, 3).unwrap();
        let mut got = spec.neighbors(&Cell::new(vec![1, 1])).unwrap();
        got.sort();
        assert_eq!(got, cells(&[&[1, 2], &[1, 3], &[2, 1], &[3, 1]]));
    }

    #[test]
    fn invalid_coordinates_rejected() {
        let spec = LatticeSpec::grid(2, 3).unwrap();
        assert!(matches!(spec.neighbors(&Cell::new(vec![0, 1])), Err(Error::Input(_))));
        assert!(matches!(spec.neighbors(&Cell::new(vec![4, 1])), Err(Error::Input(_))));
        assert!(matches!(spec.neighbors(&Cell::new(vec![1, 1, 1])), Err(Error::Input(_))));
    }

    #[test]
    fn constructor_validation() {
        assert!(LatticeSpec::grid(0, 3).is_err());
        assert!(LatticeSpec::grid(2, 0).is_err());
        assert!(LatticeSpec::torus(2, 2).is_err());
        assert!(LatticeSpec::torus(2, 3).is_ok());
        assert!(LatticeSpec::new(2, 3, Topology::Grid, 5).is_err());
        assert!(LatticeSpec::new(2, 3, Topology::Grid, 0).is_err());
        assert!(LatticeSpec::new(2, 3, Topology::Grid, 4).is_ok());
        // 2^32 is allowed, 2^32 + anything is not.
        assert!(LatticeSpec::grid(32, 2).is_ok());
        assert!(LatticeSpec::grid(2, 65_537).is_err());
        assert!(LatticeSpec::grid(33, 1).is_err());
    }

    #[test]
    fn levels() {
        assert_eq!(level_of(&Cell::new(vec![1, 1, 1])), 3);
        assert_eq!(level_of(&Cell::new(vec![4, 2, 2])), 8);
        assert_eq!(level_of(&Cell::new(vec![5, 5, 5])), 15);
        let spec = LatticeSpec::grid(3, 5).unwrap();
        let idx = spec.index_of(&[4, 2, 2]).unwrap();
        assert_eq!(spec.level_of_index(idx), 8);
    }

    #[test]
    fn row_major_rule() {
        let spec = LatticeSpec::grid(3, 4).unwrap();
        assert_eq!(spec.index_of(&[1, 1, 1]).unwrap(), 0);
        assert_eq!(spec.index_of(&[1, 1, 2]).unwrap(), 1);
        assert_eq!(spec.index_of(&[2, 1, 1]).unwrap(), 16);
        assert_eq!(spec.index_of(&[4, 4, 4]).unwrap(), 63);
        assert_eq!(spec.coords_of(16), vec![2, 1, 1]);
    }
}
