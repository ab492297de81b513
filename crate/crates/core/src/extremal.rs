//! Exhaustive searches for extremal percolating sets.
//!
//! Subsets of a given size are enumerated in colexicographic order over
//! linear indices. The enumeration is split into groups by the largest
//! element, which are contiguous blocks of the colex order, so groups can
//! run on separate workers and be folded back in order with results
//! identical to a single-threaded scan.

use std::sync::atomic::{AtomicU32, AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cellset::CellSet;
use crate::dynamics::{self, RunOptions};
use crate::error::{Error, Result};
use crate::lattice::{LatticeSpec, Topology};
use crate::symmetry::SymmetryGroup;

pub const DEFAULT_BUDGET: u64 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchOptions {
    /// Maximum number of candidate subsets to enumerate over the whole search.
    pub budget: u64,
    /// Skip subsets that are not colex-least in their symmetry orbit.
    pub symmetry_pruning: bool,
    /// Worker threads; 1 runs on the calling thread.
    pub parallelism: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            budget: DEFAULT_BUDGET,
            symmetry_pruning: false,
            parallelism: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchKind {
    MinSize,
    MinTime,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchResult {
    pub kind: SearchKind,
    /// Smallest size (`MinSize`) or smallest percolation time (`MinTime`);
    /// `None` when no size up to the requested maximum percolates.
    pub optimum: Option<u32>,
    pub witness: Option<CellSet>,
    /// Candidates enumerated, including ones skipped by symmetry pruning.
    pub instances_examined: u64,
    /// Candidates skipped as non-canonical.
    pub pruned: u64,
    pub exhaustive: bool,
    pub symmetry_pruning: bool,
}

impl SearchResult {
    pub fn to_json(&self) -> SearchResultJson {
        let spec = self.witness.as_ref().map(|w| *w.spec());
        SearchResultJson {
            kind: self.kind,
            d: spec.map(|s| s.d()),
            n: spec.map(|s| s.n()),
            topology: spec.map(|s| s.topology()),
            r: spec.map(|s| s.threshold()),
            optimum: self.optimum,
            witness: self.witness.as_ref().map(CellSet::coord_lists),
            instances_examined: self.instances_examined,
            pruned: self.pruned,
            exhaustive: self.exhaustive,
            symmetry_pruning: self.symmetry_pruning,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResultJson {
    pub kind: SearchKind,
    pub d: Option<u32>,
    pub n: Option<u32>,
    pub topology: Option<Topology>,
    pub r: Option<u32>,
    pub optimum: Option<u32>,
    pub witness: Option<Vec<Vec<u32>>>,
    pub instances_examined: u64,
    pub pruned: u64,
    pub exhaustive: bool,
    pub symmetry_pruning: bool,
}

/// Reusable closure evaluator for one lattice, with adjacency in CSR form.
struct Evaluator {
    r: u8,
    offsets: Vec<u32>,
    adjacency: Vec<u32>,
    counts: Vec<u8>,
    infected: Vec<bool>,
    current: Vec<u32>,
    next: Vec<u32>,
}

enum Outcome {
    Percolates(u32),
    Stalls,
    TooSlow,
}

impl Evaluator {
    fn new(spec: &LatticeSpec) -> Self {
        let cells = spec.cell_count();
        let mut offsets = Vec::with_capacity(cells + 1);
        let mut adjacency = Vec::new();
        offsets.push(0);
        for i in 0..cells {
            adjacency.extend(spec.neighbor_indices(i).map(|j| j as u32));
            offsets.push(adjacency.len() as u32);
        }
        Evaluator {
            r: spec.threshold() as u8,
            offsets,
            adjacency,
            counts: vec![0; cells],
            infected: vec![false; cells],
            current: Vec::with_capacity(cells),
            next: Vec::with_capacity(cells),
        }
    }

    /// Runs the process from `subset`; gives up with `TooSlow` once more
    /// than `max_time` rounds would be needed.
    fn evaluate(&mut self, subset: &[u32], max_time: u32) -> Outcome {
        self.counts.fill(0);
        self.infected.fill(false);
        self.current.clear();
        for &c in subset {
            self.infected[c as usize] = true;
            self.current.push(c);
        }
        let total = self.counts.len();
        let mut infected = subset.len();
        let mut step = 0u32;
        loop {
            if infected == total {
                return Outcome::Percolates(step);
            }
            self.next.clear();
            for &c in &self.current {
                let (lo, hi) = (self.offsets[c as usize] as usize, self.offsets[c as usize + 1] as usize);
                for &nb in &self.adjacency[lo..hi] {
                    let nb_us = nb as usize;
                    if !self.infected[nb_us] {
                        self.counts[nb_us] += 1;
                        if self.counts[nb_us] == self.r {
                            self.next.push(nb);
                        }
                    }
                }
            }
            if self.next.is_empty() {
                return Outcome::Stalls;
            }
            step += 1;
            if step > max_time {
                return Outcome::TooSlow;
            }
            for &c in &self.next {
                self.infected[c as usize] = true;
            }
            infected += self.next.len();
            std::mem::swap(&mut self.current, &mut self.next);
        }
    }
}

fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
    }
    acc
}

/// Advances `c` (strictly increasing, all `< limit`) to its colex successor.
fn next_combination(c: &mut [u32], limit: u32) -> bool {
    let k = c.len();
    for i in 0..k {
        let bound = if i + 1 < k { c[i + 1] } else { limit };
        if c[i] + 1 < bound {
            c[i] += 1;
            for (j, slot) in c[..i].iter_mut().enumerate() {
                *slot = j as u32;
            }
            return true;
        }
    }
    false
}

#[derive(Clone, Copy)]
enum Goal {
    /// First percolating subset wins.
    AnyPercolating,
    /// Smallest percolation time; first subset achieving it wins.
    FastestPercolating,
}

#[derive(Default)]
struct GroupOutcome {
    examined: u64,
    pruned: u64,
    hit: Option<(Vec<u32>, u32)>,
    over_budget: bool,
}

struct Scan<'a> {
    size: usize,
    goal: Goal,
    symmetry: Option<&'a SymmetryGroup>,
    cap: u64,
    /// Earliest group holding a hit so far (`AnyPercolating`).
    first_hit_group: &'a AtomicUsize,
    /// Best time found by any group so far (`FastestPercolating`).
    best_time: &'a AtomicU32,
}

impl Scan<'_> {
    /// Scans the subsets whose largest element is `top` (for `size = 0`,
    /// the single empty subset, with `top` ignored).
    fn group(&self, top: u32, eval: &mut Evaluator) -> GroupOutcome {
        let mut out = GroupOutcome::default();
        let mut subset: Vec<u32> = (0..self.size as u32).collect();
        if let Some(last) = subset.last_mut() {
            *last = top;
        }
        let k = self.size;
        let mut group_best = u32::MAX;
        loop {
            if matches!(self.goal, Goal::AnyPercolating)
                && self.first_hit_group.load(Ordering::Relaxed) < top as usize
            {
                // An earlier group already decided the result.
                return out;
            }
            if out.examined == self.cap {
                out.over_budget = true;
                return out;
            }
            out.examined += 1;
            let canonical = self.symmetry.is_none_or(|g| g.is_canonical(&subset));
            if !canonical {
                out.pruned += 1;
            } else {
                let max_time = match self.goal {
                    Goal::AnyPercolating => u32::MAX,
                    Goal::FastestPercolating => {
                        let global = self.best_time.load(Ordering::Relaxed);
                        global.min(group_best.saturating_sub(1))
                    }
                };
                if group_best > 0 {
                    if let Outcome::Percolates(t) = eval.evaluate(&subset, max_time) {
                        match self.goal {
                            Goal::AnyPercolating => {
                                self.first_hit_group.fetch_min(top as usize, Ordering::Relaxed);
                                out.hit = Some((subset.clone(), t));
                                return out;
                            }
                            Goal::FastestPercolating => {
                                if t < group_best {
                                    group_best = t;
                                    out.hit = Some((subset.clone(), t));
                                    self.best_time.fetch_min(t, Ordering::Relaxed);
                                }
                            }
                        }
                    }
                }
            }
            if k <= 1 || !next_combination(&mut subset[..k - 1], top) {
                return out;
            }
        }
    }
}

struct SizeOutcome {
    examined: u64,
    pruned: u64,
    hit: Option<(Vec<u32>, u32)>,
}

/// Folds group outcomes in colex order, charging the budget as a
/// sequential scan would.
fn scan_size(
    spec: &LatticeSpec,
    size: usize,
    goal: Goal,
    symmetry: Option<&SymmetryGroup>,
    options: &SearchOptions,
    spent: u64,
) -> Result<SizeOutcome> {
    let cells = spec.cell_count() as u32;
    let tops: Vec<u32> = if size == 0 { vec![0] } else { (size as u32 - 1..cells).collect() };
    let first_hit_group = AtomicUsize::new(usize::MAX);
    let best_time = AtomicU32::new(u32::MAX);
    let remaining = options.budget.saturating_sub(spent);
    let budget_error = |examined: u64| Error::Budget {
        budget: options.budget,
        progress: format!(
            "examined {} candidates; every size below {size} refuted, size {size} incomplete",
            spent + examined
        ),
    };

    let outcomes: Vec<GroupOutcome> = if options.parallelism > 1 {
        let scan = Scan {
            size,
            goal,
            symmetry,
            cap: options.budget,
            first_hit_group: &first_hit_group,
            best_time: &best_time,
        };
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(options.parallelism)
            .build()
            .map_err(|e| Error::input(format!("cannot start worker pool: {e}")))?;
        pool.install(|| {
            tops.par_iter()
                .map_init(|| Evaluator::new(spec), |eval, &top| scan.group(top, eval))
                .collect()
        })
    } else {
        let mut eval = Evaluator::new(spec);
        let mut out = Vec::new();
        let mut used = 0u64;
        for &top in &tops {
            let scan = Scan {
                size,
                goal,
                symmetry,
                cap: remaining - used.min(remaining),
                first_hit_group: &first_hit_group,
                best_time: &best_time,
            };
            let g = scan.group(top, &mut eval);
            used += g.examined;
            let stop = g.over_budget || (matches!(goal, Goal::AnyPercolating) && g.hit.is_some());
            out.push(g);
            if stop {
                break;
            }
        }
        out
    };

    let mut examined = 0u64;
    let mut pruned = 0u64;
    let mut best: Option<(Vec<u32>, u32)> = None;
    for g in outcomes {
        examined += g.examined;
        pruned += g.pruned;
        if g.over_budget || examined > remaining {
            return Err(budget_error(examined));
        }
        match (goal, g.hit) {
            (Goal::AnyPercolating, Some(hit)) => {
                best = Some(hit);
                break;
            }
            (Goal::FastestPercolating, Some(hit)) => {
                if best.as_ref().is_none_or(|(_, t)| hit.1 < *t) {
                    best = Some(hit);
                }
            }
            (_, None) => {}
        }
    }
    Ok(SizeOutcome {
        examined,
        pruned,
        hit: best,
    })
}

fn prepare(spec: &LatticeSpec, options: &SearchOptions) -> Result<Option<SymmetryGroup>> {
    if options.parallelism == 0 {
        return Err(Error::input("parallelism must be at least 1"));
    }
    if spec.cell_count() > u32::MAX as usize {
        return Err(Error::input("lattice too large for subset search"));
    }
    options
        .symmetry_pruning
        .then(|| SymmetryGroup::of(spec))
        .transpose()
}

fn witness_set(spec: &LatticeSpec, subset: &[u32]) -> CellSet {
    CellSet::from_indices(*spec, subset.iter().map(|&i| i as usize)).expect("indices in range")
}

/// Smallest `k <= max_size` such that some `k`-subset percolates.
pub fn min_percolating_size(spec: &LatticeSpec, max_size: u32, options: &SearchOptions) -> Result<SearchResult> {
    let symmetry = prepare(spec, options)?;
    let max_size = (max_size as usize).min(spec.cell_count());
    let mut examined = 0u64;
    let mut pruned = 0u64;
    for size in 0..=max_size {
        let out = scan_size(spec, size, Goal::AnyPercolating, symmetry.as_ref(), options, examined)?;
        examined += out.examined;
        pruned += out.pruned;
        if let Some((subset, _)) = out.hit {
            let witness = witness_set(spec, &subset);
            let rec = dynamics::run(spec, &witness, RunOptions::default())?;
            if !rec.percolates {
                return Err(Error::Invariant(format!(
                    "search witness of size {size} fails to percolate on re-run"
                )));
            }
            return Ok(SearchResult {
                kind: SearchKind::MinSize,
                optimum: Some(size as u32),
                witness: Some(witness),
                instances_examined: examined,
                pruned,
                exhaustive: true,
                symmetry_pruning: options.symmetry_pruning,
            });
        }
    }
    Ok(SearchResult {
        kind: SearchKind::MinSize,
        optimum: None,
        witness: None,
        instances_examined: examined,
        pruned,
        exhaustive: true,
        symmetry_pruning: options.symmetry_pruning,
    })
}

/// Minimum percolation time over percolating subsets of exactly `size` cells.
pub fn min_percolation_time(spec: &LatticeSpec, size: u32, options: &SearchOptions) -> Result<SearchResult> {
    let symmetry = prepare(spec, options)?;
    let cells = spec.cell_count() as u64;
    if u64::from(size) > cells {
        return Err(Error::input(format!("size {size} exceeds the {cells} cells of {spec}")));
    }
    let total = binomial(cells, u64::from(size));
    if total > u128::from(options.budget) {
        return Err(Error::Budget {
            budget: options.budget,
            progress: format!("C({cells}, {size}) = {total} candidates needed, nothing examined"),
        });
    }
    let out = scan_size(spec, size as usize, Goal::FastestPercolating, symmetry.as_ref(), options, 0)?;
    let Some((subset, time)) = out.hit else {
        return Err(Error::domain(format!("no set of size {size} percolates {spec}")));
    };
    let witness = witness_set(spec, &subset);
    let rec = dynamics::run(spec, &witness, RunOptions::default())?;
    if !rec.percolates || rec.final_time != time {
        return Err(Error::Invariant(format!(
            "search witness re-run gives percolates = {}, T = {} (expected T = {time})",
            rec.percolates, rec.final_time
        )));
    }
    Ok(SearchResult {
        kind: SearchKind::MinTime,
        optimum: Some(time),
        witness: Some(witness),
        instances_examined: out.examined,
        pruned: out.pruned,
        exhaustive: true,
        symmetry_pruning: options.symmetry_pruning,
    })
}

/// True iff `set` percolates but no `set \ {x}` does. For monotone
/// dynamics this is the same as no proper subset percolating.
pub fn is_minimal(spec: &LatticeSpec, set: &CellSet) -> Result<bool> {
    if !dynamics::percolates(spec, set)? {
        return Err(Error::domain(format!("the given set does not percolate {spec}")));
    }
    for x in set.iter() {
        let mut smaller = set.clone();
        smaller.remove(x);
        if dynamics::percolates(spec, &smaller)? {
            return Ok(false);
        }
    }
    Ok(true)
}
