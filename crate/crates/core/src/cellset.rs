//! Sets of lattice cells with bitset membership.
//!
//! Text form: one cell per line, `d` space-separated 1-based coordinates.
//! Blank lines and lines starting with `#` are ignored when reading.

use std::fmt::Write as _;

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::lattice::{Cell, LatticeSpec};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellSet {
    spec: LatticeSpec,
    bits: FixedBitSet,
}

impl CellSet {
    pub fn empty(spec: LatticeSpec) -> Self {
        CellSet {
            spec,
            bits: FixedBitSet::with_capacity(spec.cell_count()),
        }
    }

    pub fn full(spec: LatticeSpec) -> Self {
        let mut set = Self::empty(spec);
        set.bits.insert_range(..);
        set
    }

    pub fn from_indices(spec: LatticeSpec, indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut set = Self::empty(spec);
        for idx in indices {
            if idx >= spec.cell_count() {
                return Err(Error::input(format!(
                    "cell index {idx} outside 0..{}",
                    spec.cell_count()
                )));
            }
            set.bits.insert(idx);
        }
        Ok(set)
    }

    pub fn from_cells<'a>(spec: LatticeSpec, cells: impl IntoIterator<Item = &'a Cell>) -> Result<Self> {
        let mut set = Self::empty(spec);
        for cell in cells {
            set.insert_cell(cell)?;
        }
        Ok(set)
    }

    pub fn from_coord_lists(spec: LatticeSpec, lists: &[Vec<u32>]) -> Result<Self> {
        let mut set = Self::empty(spec);
        for coords in lists {
            set.bits.insert(spec.index_of(coords)?);
        }
        Ok(set)
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    /// The same cells viewed in another lattice of identical `d` and `n`
    /// (e.g. a grid construction placed on the torus).
    pub fn retarget(&self, spec: LatticeSpec) -> Result<Self> {
        if spec.d() != self.spec.d() || spec.n() != self.spec.n() {
            return Err(Error::input(format!(
                "cannot move a set from {} to {}",
                self.spec, spec
            )));
        }
        Ok(CellSet {
            spec,
            bits: self.bits.clone(),
        })
    }

    /// Panics if `idx` is outside the universe.
    pub fn insert(&mut self, idx: usize) -> bool {
        assert!(idx < self.spec.cell_count(), "cell index {idx} out of range");
        !self.bits.put(idx)
    }

    pub fn insert_cell(&mut self, cell: &Cell) -> Result<bool> {
        let idx = self.spec.index_of_cell(cell)?;
        Ok(!self.bits.put(idx))
    }

    pub fn remove(&mut self, idx: usize) -> bool {
        let was = self.contains(idx);
        if was {
            self.bits.set(idx, false);
        }
        was
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.bits.contains(idx)
    }

    pub fn contains_cell(&self, cell: &Cell) -> bool {
        self.spec
            .index_of_cell(cell)
            .map(|idx| self.contains(idx))
            .unwrap_or(false)
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    pub fn is_full(&self) -> bool {
        self.bits.is_full()
    }

    /// Member indices in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.ones()
    }

    pub fn cells(&self) -> Vec<Cell> {
        self.iter().map(|idx| self.spec.cell_at(idx)).collect()
    }

    pub fn coord_lists(&self) -> Vec<Vec<u32>> {
        self.iter().map(|idx| self.spec.coords_of(idx)).collect()
    }

    fn check_compatible(&self, other: &CellSet) {
        assert!(
            self.spec.same_geometry(&other.spec),
            "set operation across different lattices: {} vs {}",
            self.spec,
            other.spec
        );
    }

    pub fn union_with(&mut self, other: &CellSet) {
        self.check_compatible(other);
        self.bits.union_with(&other.bits);
    }

    pub fn difference_with(&mut self, other: &CellSet) {
        self.check_compatible(other);
        self.bits.difference_with(&other.bits);
    }

    pub fn intersect_with(&mut self, other: &CellSet) {
        self.check_compatible(other);
        self.bits.intersect_with(&other.bits);
    }

    pub fn is_subset(&self, other: &CellSet) -> bool {
        self.check_compatible(other);
        self.bits.is_subset(&other.bits)
    }

    pub fn complement(&self) -> CellSet {
        let mut bits = self.bits.clone();
        bits.toggle_range(..);
        CellSet { spec: self.spec, bits }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut buf = vec![0u32; self.spec.d() as usize];
        for idx in self.iter() {
            self.spec.write_coords(idx, &mut buf);
            for (i, c) in buf.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                let _ = write!(out, "{c}");
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(spec: LatticeSpec, text: &str) -> Result<Self> {
        let mut set = Self::empty(spec);
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let coords = line
                .split_whitespace()
                .map(|tok| tok.parse::<u32>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::input(format!("line {}: malformed coordinate: {e}", lineno + 1)))?;
            let idx = spec
                .index_of(&coords)
                .map_err(|e| Error::input(format!("line {}: {e}", lineno + 1)))?;
            set.bits.insert(idx);
        }
        Ok(set)
    }
}
