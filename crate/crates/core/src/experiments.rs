//! Verification campaigns over the dynamics: strip filling, hyperplane
//! separation, and percolation-time sweeps with quadratic fits.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constructions::{level_set, Construction};
use crate::dynamics::{self, RunOptions};
use crate::error::{Error, Result};
use crate::lattice::LatticeSpec;
use crate::witness::depth_bound;

/// Whether the two hyperplanes `V_{(s-1)n}` and `V_{sn}` infect every cell
/// strictly between them under the d-neighbour rule. Requires
/// `ceil(d/n) <= s <= d`.
pub fn verify_strip_fill(d: u32, n: u32, s: u32) -> Result<bool> {
    let spec = LatticeSpec::grid(d, n)?;
    let lo_s = d.div_ceil(n);
    if s < lo_s || s > d {
        return Err(Error::input(format!("strip index s = {s} outside {lo_s}..={d}")));
    }
    let (lower, upper) = ((s - 1) * n, s * n);
    let mut seeds = level_set(d, n, i64::from(lower))?;
    seeds.union_with(&level_set(d, n, i64::from(upper))?);
    let closure = dynamics::closure(&spec, &seeds)?;
    Ok((0..spec.cell_count()).all(|i| {
        let k = spec.level_of_index(i);
        k <= lower || k >= upper || closure.contains(i)
    }))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelReport {
    pub level: u32,
    pub size: usize,
    pub infected: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeparationReport {
    pub d: u32,
    pub n: u32,
    /// Lower seeded level; the upper one is `j + n + 1`.
    pub j: u32,
    pub closure_is_full: bool,
    /// Not full, and every nonempty level at distance >= 2 from both seeds
    /// keeps at least one healthy cell.
    pub separated: bool,
    /// One entry per nonempty level strictly between the seeds.
    pub levels: Vec<LevelReport>,
}

/// Seeds `V_j ∪ V_{j+n+1}` for the smallest `j` with both levels nonempty
/// and reports how far the two growths get.
pub fn verify_separation(d: u32, n: u32) -> Result<SeparationReport> {
    if d < 2 {
        return Err(Error::input("separation needs d >= 2"));
    }
    let spec = LatticeSpec::grid(d, n)?;
    // Levels d..=dn are the nonempty ones.
    let j = d;
    if j + n + 1 > d * n {
        return Err(Error::input(format!(
            "no pair of nonempty levels n + 1 = {} apart in [{n}]^{d}",
            n + 1
        )));
    }
    let top = j + n + 1;
    let mut seeds = level_set(d, n, i64::from(j))?;
    seeds.union_with(&level_set(d, n, i64::from(top))?);
    let closure = dynamics::closure(&spec, &seeds)?;

    let mut levels: Vec<LevelReport> = (j + 1..top)
        .map(|level| LevelReport {
            level,
            size: 0,
            infected: 0,
        })
        .collect();
    for i in 0..spec.cell_count() {
        let k = spec.level_of_index(i);
        if k > j && k < top {
            let entry = &mut levels[(k - j - 1) as usize];
            entry.size += 1;
            if closure.contains(i) {
                entry.infected += 1;
            }
        }
    }
    levels.retain(|l| l.size > 0);
    let full = closure.is_full();
    let interior_gap = levels
        .iter()
        .filter(|l| l.level >= j + 2 && l.level + 2 <= top)
        .all(|l| l.infected < l.size);
    Ok(SeparationReport {
        d,
        n,
        j,
        closure_is_full: full,
        separated: !full && interior_gap,
        levels,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: u32,
    #[serde(rename = "T")]
    pub final_time: u32,
    pub percolates: bool,
    /// Lattice size `n^d`.
    pub cells: u64,
    pub initial_size: usize,
    /// `T <= (d+2)n^2 + n`.
    pub within_bound: bool,
    pub runtime_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticFit {
    pub a2: f64,
    pub a1: f64,
    pub a0: f64,
    /// `T - fitted(n)` per fitted row, in row order.
    pub residuals: Vec<f64>,
    pub max_abs_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub d: u32,
    pub construction: String,
    pub rows: Vec<SweepRow>,
    pub fit: Option<QuadraticFit>,
    /// Values of `n` whose construction did not percolate (excluded from the fit).
    pub non_percolating: Vec<u32>,
    pub bound_violations: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepOptions {
    pub parallelism: usize,
    /// Largest `n^d` accepted.
    pub max_cells: u64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            parallelism: 1,
            max_cells: 50_000_000,
        }
    }
}

/// Least-squares fit of `y ≈ a2 x^2 + a1 x + a0`. Needs at least 4 points.
pub fn fit_quadratic(points: &[(f64, f64)]) -> Option<QuadraticFit> {
    if points.len() < 4 {
        return None;
    }
    // Normal equations on a centred, scaled abscissa for conditioning.
    let mean = points.iter().map(|p| p.0).sum::<f64>() / points.len() as f64;
    let scale = points.iter().map(|p| (p.0 - mean).abs()).fold(0.0, f64::max).max(1.0);
    let mut m = [[0.0f64; 4]; 3];
    for &(x, y) in points {
        let u = (x - mean) / scale;
        let basis = [1.0, u, u * u];
        for r in 0..3 {
            for c in 0..3 {
                m[r][c] += basis[r] * basis[c];
            }
            m[r][3] += basis[r] * y;
        }
    }
    for col in 0..3 {
        let pivot = (col..3).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[pivot][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, pivot);
        for r in 0..3 {
            if r != col {
                let f = m[r][col] / m[col][col];
                let pivot_row = m[col];
                for (x, p) in m[r].iter_mut().zip(pivot_row).skip(col) {
                    *x -= f * p;
                }
            }
        }
    }
    let (b0, b1, b2) = (m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]);
    // Undo u = (x - mean) / scale.
    let a2 = b2 / (scale * scale);
    let a1 = b1 / scale - 2.0 * b2 * mean / (scale * scale);
    let a0 = b0 - b1 * mean / scale + b2 * mean * mean / (scale * scale);
    let residuals: Vec<f64> = points.iter().map(|&(x, y)| y - (a2 * x * x + a1 * x + a0)).collect();
    let max_abs_residual = residuals.iter().fold(0.0f64, |acc, r| acc.max(r.abs()));
    Some(QuadraticFit {
        a2,
        a1,
        a0,
        residuals,
        max_abs_residual,
    })
}

/// Runs `construction` once per `n` and fits `T` against `n`.
pub fn sweep_time(d: u32, ns: &[u32], construction: Construction, options: &SweepOptions) -> Result<SweepTable> {
    if options.parallelism == 0 {
        return Err(Error::input("parallelism must be at least 1"));
    }
    let mut ns: Vec<u32> = ns.to_vec();
    ns.sort_unstable();
    ns.dedup();
    for &n in &ns {
        let cells = u64::from(n).checked_pow(d).unwrap_or(u64::MAX);
        if cells > options.max_cells {
            return Err(Error::input(format!(
                "[{n}]^{d} has {cells} cells, above the sweep limit of {}",
                options.max_cells
            )));
        }
    }

    let one = |n: u32| -> Result<SweepRow> {
        let initial = construction.build(d, n)?;
        let spec = initial.spec().with_threshold(d)?;
        let started = Instant::now();
        let rec = dynamics::run(&spec, &initial, RunOptions::default())?;
        let runtime_ms = started.elapsed().as_secs_f64() * 1e3;
        Ok(SweepRow {
            n,
            final_time: rec.final_time,
            percolates: rec.percolates,
            cells: spec.cell_count() as u64,
            initial_size: initial.len(),
            within_bound: u64::from(rec.final_time) <= depth_bound(d, n),
            runtime_ms,
        })
    };
    let rows: Vec<SweepRow> = if options.parallelism > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(options.parallelism)
            .build()
            .map_err(|e| Error::input(format!("cannot start worker pool: {e}")))?;
        pool.install(|| ns.par_iter().map(|&n| one(n)).collect::<Result<Vec<_>>>())?
    } else {
        ns.iter().map(|&n| one(n)).collect::<Result<Vec<_>>>()?
    };

    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.percolates)
        .map(|r| (f64::from(r.n), f64::from(r.final_time)))
        .collect();
    Ok(SweepTable {
        d,
        construction: construction.to_string(),
        fit: fit_quadratic(&points),
        non_percolating: rows.iter().filter(|r| !r.percolates).map(|r| r.n).collect(),
        bound_violations: rows.iter().filter(|r| !r.within_bound).map(|r| r.n).collect(),
        rows,
    })
}

#[derive(Serialize)]
struct CsvRow<'a> {
    d: u32,
    construction: &'a str,
    n: u32,
    #[serde(rename = "T")]
    final_time: u32,
    percolates: bool,
    cells: u64,
}

impl SweepTable {
    /// CSV with header `d,construction,n,T,percolates,cells`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(CsvRow {
                d: self.d,
                construction: &self.construction,
                n: r.n,
                final_time: r.final_time,
                percolates: r.percolates,
                cells: r.cells,
            })
            .map_err(|e| Error::Io(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
    }
}
