//! Synchronous r-neighbour bootstrap percolation.
//!
//! In round `t` every healthy cell with at least `r` neighbours infected in
//! rounds `< t` becomes infected; infected cells never heal. Round 0 is the
//! initial set. `T` is the last round in which something new got infected,
//! so a closed initial set (including the empty and the full set) has `T = 0`.

use serde::{Deserialize, Serialize};

use crate::cellset::CellSet;
use crate::error::{Error, Result};
use crate::lattice::{LatticeSpec, Topology};

/// Marker for cells that are never infected.
pub const NEVER: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    pub audit: bool,
    pub record_trace: bool,
}

impl RunOptions {
    pub fn full() -> Self {
        RunOptions {
            audit: true,
            record_trace: true,
        }
    }
}

/// One infection: which cell, in which round, and how many of its
/// neighbours were already infected at that moment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AuditEvent {
    pub cell: usize,
    pub step: u32,
    pub infected_neighbors: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunRecord {
    pub spec: LatticeSpec,
    pub initial: CellSet,
    /// Infection round per linear index, [`NEVER`] for cells outside the closure.
    pub times: Vec<u32>,
    pub final_time: u32,
    pub percolates: bool,
    /// Perimeter after each round; entry 0 is the initial set.
    pub perimeter_trace: Option<Vec<u64>>,
    /// Events ordered by (step, cell index).
    pub audit: Option<Vec<AuditEvent>>,
}

impl RunRecord {
    pub fn time(&self, idx: usize) -> Option<u32> {
        match self.times[idx] {
            NEVER => None,
            t => Some(t),
        }
    }

    pub fn closure(&self) -> CellSet {
        CellSet::from_indices(
            self.spec,
            self.times.iter().enumerate().filter(|(_, &t)| t != NEVER).map(|(i, _)| i),
        )
        .expect("indices come from the record itself")
    }

    /// Cells infected exactly in round `step`, ascending.
    pub fn infected_at(&self, step: u32) -> Vec<usize> {
        self.times
            .iter()
            .enumerate()
            .filter(|(_, &t)| t == step)
            .map(|(i, _)| i)
            .collect()
    }

    /// Number of new infections per round, index 0 being the initial set.
    pub fn step_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.final_time as usize + 1];
        for &t in &self.times {
            if t != NEVER {
                counts[t as usize] += 1;
            }
        }
        counts
    }

    pub fn infected_count(&self) -> usize {
        self.times.iter().filter(|&&t| t != NEVER).count()
    }

    pub fn to_json(&self) -> RunRecordJson {
        let spec = &self.spec;
        RunRecordJson {
            d: spec.d(),
            n: spec.n(),
            topology: spec.topology(),
            r: spec.threshold(),
            initial: self.initial.coord_lists(),
            final_time: self.final_time,
            percolates: self.percolates,
            times: self
                .times
                .iter()
                .map(|&t| if t == NEVER { -1 } else { i64::from(t) })
                .collect(),
            perimeter_trace: self.perimeter_trace.clone(),
            audit: self.audit.as_ref().map(|events| {
                events
                    .iter()
                    .map(|e| AuditEventJson {
                        cell: spec.coords_of(e.cell),
                        step: e.step,
                        infected_neighbors: e.infected_neighbors,
                    })
                    .collect()
            }),
        }
    }

    pub fn from_json(json: &RunRecordJson) -> Result<Self> {
        let spec = LatticeSpec::new(json.d, json.n, json.topology, json.r)?;
        if json.times.len() != spec.cell_count() {
            return Err(Error::input(format!(
                "times has {} entries, lattice has {} cells",
                json.times.len(),
                spec.cell_count()
            )));
        }
        let times = json
            .times
            .iter()
            .map(|&t| match t {
                -1 => Ok(NEVER),
                t if (0..i64::from(NEVER)).contains(&t) => Ok(t as u32),
                t => Err(Error::input(format!("invalid infection time {t}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        let audit = match &json.audit {
            None => None,
            Some(events) => Some(
                events
                    .iter()
                    .map(|e| {
                        Ok(AuditEvent {
                            cell: spec.index_of(&e.cell)?,
                            step: e.step,
                            infected_neighbors: e.infected_neighbors,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?,
            ),
        };
        Ok(RunRecord {
            spec,
            initial: CellSet::from_coord_lists(spec, &json.initial)?,
            times,
            final_time: json.final_time,
            percolates: json.percolates,
            perimeter_trace: json.perimeter_trace.clone(),
            audit,
        })
    }
}

/// Serialized form of a [`RunRecord`]. `times` is the flat row-major array
/// with `-1` for cells that are never infected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecordJson {
    pub d: u32,
    pub n: u32,
    pub topology: Topology,
    pub r: u32,
    pub initial: Vec<Vec<u32>>,
    #[serde(rename = "T")]
    pub final_time: u32,
    pub percolates: bool,
    pub times: Vec<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perimeter_trace: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audit: Option<Vec<AuditEventJson>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditEventJson {
    pub cell: Vec<u32>,
    pub step: u32,
    pub infected_neighbors: u32,
}

fn check_inputs(spec: &LatticeSpec, initial: &CellSet, options: RunOptions) -> Result<()> {
    if !spec.same_geometry(initial.spec()) {
        return Err(Error::input(format!(
            "initial set lives on {}, run requested on {}",
            initial.spec(),
            spec
        )));
    }
    if options.record_trace && spec.topology() != Topology::Grid {
        return Err(Error::UnsupportedTopology(
            "perimeter traces are only defined for the grid".into(),
        ));
    }
    Ok(())
}

/// Runs the process to completion with the frontier stepper.
///
/// Only healthy neighbours of the cells infected in round `t` can change
/// state in round `t + 1`. Each healthy cell keeps a count of its infected
/// neighbours and joins the next frontier the moment that count reaches `r`.
pub fn run(spec: &LatticeSpec, initial: &CellSet, options: RunOptions) -> Result<RunRecord> {
    check_inputs(spec, initial, options)?;
    let cells = spec.cell_count();
    let r = spec.threshold();
    let two_d = 2 * u64::from(spec.d());

    let mut times = vec![NEVER; cells];
    let mut counts = vec![0u8; cells];
    let mut current: Vec<usize> = initial.iter().collect();
    for &c in &current {
        times[c] = 0;
    }
    let mut infected = current.len();
    let mut trace = options
        .record_trace
        .then(|| vec![perimeter_of_indices(spec, initial)]);
    let mut audit = options.audit.then(Vec::new);
    let mut next: Vec<usize> = Vec::new();
    let mut step = 0u32;

    loop {
        next.clear();
        for &c in &current {
            for nb in spec.neighbor_indices(c) {
                if times[nb] == NEVER {
                    counts[nb] += 1;
                    if u32::from(counts[nb]) == r {
                        next.push(nb);
                    }
                }
            }
        }
        if next.is_empty() {
            break;
        }
        step += 1;
        next.sort_unstable();
        for &c in &next {
            times[c] = step;
        }
        infected += next.len();
        if let Some(events) = audit.as_mut() {
            events.extend(next.iter().map(|&c| AuditEvent {
                cell: c,
                step,
                infected_neighbors: u32::from(counts[c]),
            }));
        }
        if let Some(trace) = trace.as_mut() {
            // Each new cell trades its infected-neighbour edges for its other
            // edges; edges between two cells infected this round vanish twice.
            let mut gained = 0u64;
            let mut lost = 0u64;
            for &c in &next {
                gained += two_d;
                lost += 2 * u64::from(counts[c]);
                lost += spec.neighbor_indices(c).filter(|&nb| times[nb] == step).count() as u64;
            }
            let prev = *trace.last().expect("trace starts non-empty");
            trace.push(prev + gained - lost);
        }
        std::mem::swap(&mut current, &mut next);
    }

    Ok(RunRecord {
        spec: *spec,
        initial: initial.retarget(*spec)?,
        times,
        final_time: step,
        percolates: infected == cells,
        perimeter_trace: trace,
        audit,
    })
}

/// Reference stepper: every round rescans every healthy cell. Kept simple
/// on purpose; the frontier stepper must agree with it exactly.
pub fn run_naive(spec: &LatticeSpec, initial: &CellSet, options: RunOptions) -> Result<RunRecord> {
    check_inputs(spec, initial, options)?;
    let initial = initial.retarget(*spec)?;
    let cells = spec.cell_count();
    let r = spec.threshold() as usize;
    let mut state = initial.clone();
    let mut times = vec![NEVER; cells];
    for c in state.iter() {
        times[c] = 0;
    }
    let mut trace = options.record_trace.then(|| vec![perimeter_of_indices(spec, &state)]);
    let mut audit = options.audit.then(Vec::new);
    let mut step = 0u32;
    loop {
        let mut newly = Vec::new();
        for c in 0..cells {
            if state.contains(c) {
                continue;
            }
            let k = spec.neighbor_indices(c).filter(|&nb| state.contains(nb)).count();
            if k >= r {
                newly.push((c, k));
            }
        }
        if newly.is_empty() {
            break;
        }
        step += 1;
        for &(c, k) in &newly {
            state.insert(c);
            times[c] = step;
            if let Some(events) = audit.as_mut() {
                events.push(AuditEvent {
                    cell: c,
                    step,
                    infected_neighbors: k as u32,
                });
            }
        }
        if let Some(trace) = trace.as_mut() {
            trace.push(perimeter_of_indices(spec, &state));
        }
    }
    Ok(RunRecord {
        spec: *spec,
        percolates: state.is_full(),
        initial,
        times,
        final_time: step,
        perimeter_trace: trace,
        audit,
    })
}

/// Number of edges of `Z^d` joining a cell of `set` to a cell outside it,
/// with `[n]^d` embedded in `Z^d`.
pub fn perimeter(spec: &LatticeSpec, set: &CellSet) -> Result<u64> {
    if spec.topology() != Topology::Grid {
        return Err(Error::UnsupportedTopology(
            "perimeter is only defined for the grid embedded in Z^d".into(),
        ));
    }
    if !spec.same_geometry(set.spec()) {
        return Err(Error::input("set and lattice differ"));
    }
    Ok(perimeter_of_indices(spec, set))
}

fn perimeter_of_indices(spec: &LatticeSpec, set: &CellSet) -> u64 {
    let two_d = 2 * u64::from(spec.d());
    set.iter()
        .map(|c| two_d - spec.neighbor_indices(c).filter(|&nb| set.contains(nb)).count() as u64)
        .sum()
}

/// Final infected set.
pub fn closure(spec: &LatticeSpec, initial: &CellSet) -> Result<CellSet> {
    Ok(run(spec, initial, RunOptions::default())?.closure())
}

pub fn percolates(spec: &LatticeSpec, initial: &CellSet) -> Result<bool> {
    Ok(run(spec, initial, RunOptions::default())?.percolates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Cell;

    fn set(spec: LatticeSpec, cells: &[&[u32]]) -> CellSet {
        let v: Vec<Vec<u32>> = cells.iter().map(|c| c.to_vec()).collect();
        CellSet::from_coord_lists(spec, &v).unwrap()
    }

    #[test]
    fn three_by_three_hyperplanes() {
        let spec = LatticeSpec::grid(2, 3).unwrap();
        let a = set(spec, &[&[1, 2], &[2, 1], &[3, 3]]);
        let rec = run(&spec, &a, RunOptions::full()).unwrap();
        assert!(rec.percolates);
        assert_eq!(rec.final_time, 3);
        let at = |t| -> Vec<Cell> { rec.infected_at(t).into_iter().map(|i| spec.cell_at(i)).collect() };
        assert_eq!(at(1), vec![Cell::new(vec![1, 1]), Cell::new(vec![2, 2])]);
        assert_eq!(at(2), vec![Cell::new(vec![2, 3]), Cell::new(vec![3, 2])]);
        assert_eq!(at(3), vec![Cell::new(vec![1, 3]), Cell::new(vec![3, 1])]);
        assert_eq!(rec.perimeter_trace.as_deref(), Some(&[12u64, 12, 12, 12][..]));
        assert_eq!(rec, run_naive(&spec, &a, RunOptions::full()).unwrap());
    }

    #[test]
    fn diagonal_takes_n_minus_one_rounds() {
        let spec = LatticeSpec::grid(2, 5).unwrap();
        let diag: Vec<Vec<u32>> = (1..=5).map(|i| vec![i, i]).collect();
        let a = CellSet::from_coord_lists(spec, &diag).unwrap();
        let rec = run(&spec, &a, RunOptions::default()).unwrap();
        assert!(rec.percolates);
        assert_eq!(rec.final_time, 4);
    }

    #[test]
    fn empty_and_full_are_closed() {
        let spec = LatticeSpec::grid(2, 2).unwrap();
        let rec = run(&spec, &CellSet::empty(spec), RunOptions::full()).unwrap();
        assert!(!rec.percolates);
        assert_eq!(rec.final_time, 0);
        assert_eq!(rec.perimeter_trace, Some(vec![0]));
        let rec = run(&spec, &CellSet::full(spec), RunOptions::default()).unwrap();
        assert!(rec.percolates);
        assert_eq!(rec.final_time, 0);
    }

    #[test]
    fn perimeter_examples() {
        let spec = LatticeSpec::grid(2, 3).unwrap();
        assert_eq!(perimeter(&spec, &set(spec, &[&[2, 2]])).unwrap(), 4);
        assert_eq!(perimeter(&spec, &CellSet::full(spec)).unwrap(), 12);
        assert_eq!(perimeter(&spec, &set(spec, &[&[1, 2], &[2, 1], &[3, 3]])).unwrap(), 12);
        let torus = LatticeSpec::torus(2, 3).unwrap();
        assert!(matches!(
            perimeter(&torus, &CellSet::empty(torus)),
            Err(Error::UnsupportedTopology(_))
        ));
    }

    #[test]
    fn mismatched_lattice_is_input_error() {
        let spec = LatticeSpec::grid(2, 3).unwrap();
        let other = LatticeSpec::grid(2, 4).unwrap();
        assert!(matches!(
            run(&spec, &CellSet::empty(other), RunOptions::default()),
            Err(Error::Input(_))
        ));
        let torus = LatticeSpec::torus(2, 3).unwrap();
        let on_torus = CellSet::empty(torus);
        assert!(matches!(
            run(&torus, &on_torus, RunOptions { audit: false, record_trace: true }),
            Err(Error::UnsupportedTopology(_))
        ));
    }

    #[test]
    fn json_round_trip() {
        let spec = LatticeSpec::grid(2, 3).unwrap();
        let a = set(spec, &[&[1, 2], &[3, 3]]);
        let rec = run(&spec, &a, RunOptions::full()).unwrap();
        let text = serde_json::to_string(&rec.to_json()).unwrap();
        assert!(text.contains("\"T\":"));
        assert!(text.contains("-1"));
        let back: RunRecordJson = serde_json::from_str(&text).unwrap();
        assert_eq!(RunRecord::from_json(&back).unwrap(), rec);
    }
}
