//! C ABI over `bootperc`.
//!
//! Objects are opaque heap handles released with their `_free` function.
//! Fallible calls return a [`BpStatus`]; on failure the message is available
//! from [`bp_last_error`] on the same thread. Strings returned through out
//! parameters are owned by the caller and released with [`bp_string_free`].

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use bootperc::cellset::CellSet;
use bootperc::constructions::Construction;
use bootperc::dynamics::{self, RunOptions, RunRecord};
use bootperc::error::Error;
use bootperc::extremal::{self, SearchOptions};
use bootperc::lattice::{Cell, LatticeSpec, Topology};
use bootperc::witness::{self, StripContext, WitnessDag};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BpStatus {
    Ok = 0,
    Input = 1,
    UnsupportedTopology = 2,
    Domain = 3,
    Budget = 4,
    Invariant = 5,
    Io = 6,
    NullPointer = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BpTopology {
    Grid = 0,
    Torus = 1,
}

/// Returned by [`bp_run_time_of`] for cells that are never infected.
pub const BP_NEVER: u32 = 0xFFFF_FFFF;

pub struct BpLattice {
    spec: LatticeSpec,
}

pub struct BpCellSet {
    set: CellSet,
}

pub struct BpRunRecord {
    record: RunRecord,
}

pub struct BpWitness {
    dag: WitnessDag,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> BpStatus {
    match err {
        Error::Input(_) => BpStatus::Input,
        Error::UnsupportedTopology(_) => BpStatus::UnsupportedTopology,
        Error::Domain(_) => BpStatus::Domain,
        Error::Budget { .. } => BpStatus::Budget,
        Error::Invariant(_) => BpStatus::Invariant,
        Error::Io(_) => BpStatus::Io,
    }
}

enum Failure {
    Lib(Error),
    Null(&'static str),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> BpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            BpStatus::Ok
        }
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Null(what))) => {
            set_last_error(format!("null pointer: {what}"));
            BpStatus::NullPointer
        }
        Err(_) => {
            set_last_error("internal panic".to_string());
            BpStatus::Panic
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn as_mut<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(what))
}

unsafe fn cell_from(coords: *const u32, len: usize) -> Result<Cell, Failure> {
    if coords.is_null() && len > 0 {
        return Err(Failure::Null("coords"));
    }
    let slice = if len == 0 { &[][..] } else { std::slice::from_raw_parts(coords, len) };
    Ok(Cell::new(slice.to_vec()))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null("out"));
    }
    out.write(value);
    Ok(())
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).map(CString::into_raw).unwrap_or(ptr::null_mut())
}

/// Message of the last failed call on this thread, or NULL. The pointer is
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn bp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub unsafe extern "C" fn bp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// `r = 0` selects the default threshold `r = d`.
#[no_mangle]
pub unsafe extern "C" fn bp_lattice_new(
    d: u32,
    n: u32,
    topology: BpTopology,
    r: u32,
    out: *mut *mut BpLattice,
) -> BpStatus {
    guard(|| {
        let topology = match topology {
            BpTopology::Grid => Topology::Grid,
            BpTopology::Torus => Topology::Torus,
        };
        let spec = LatticeSpec::new(d, n, topology, if r == 0 { d } else { r })?;
        write_out(out, Box::into_raw(Box::new(BpLattice { spec })))
    })
}

#[no_mangle]
pub unsafe extern "C" fn bp_lattice_free(lattice: *mut BpLattice) {
    if !lattice.is_null() {
        drop(Box::from_raw(lattice));
    }
}

/// Number of cells n^d, or 0 for a NULL handle.
#[no_mangle]
pub unsafe extern "C" fn bp_lattice_cell_count(lattice: *const BpLattice) -> u64 {
    lattice.as_ref().map_or(0, |l| l.spec.cell_count() as u64)
}

#[no_mangle]
pub unsafe extern "C" fn bp_cellset_new(lattice: *const BpLattice, out: *mut *mut BpCellSet) -> BpStatus {
    guard(|| {
        let spec = as_ref(lattice, "lattice")?.spec;
        write_out(out, Box::into_raw(Box::new(BpCellSet { set: CellSet::empty(spec) })))
    })
}

/// Builds a construction by name: `hyperplanes`, `shifted`, `diagonal2d`,
/// `boundary`, `torus3` or `level:K`.
#[no_mangle]
pub unsafe extern "C" fn bp_construction(d: u32, n: u32, name: *const c_char, out: *mut *mut BpCellSet) -> BpStatus {
    guard(|| {
        if name.is_null() {
            return Err(Failure::Null("name"));
        }
        let name = CStr::from_ptr(name)
            .to_str()
            .map_err(|_| Error::Input("construction name is not UTF-8".into()))?;
        let set = name.parse::<Construction>()?.build(d, n)?;
        write_out(out, Box::into_raw(Box::new(BpCellSet { set })))
    })
}

#[no_mangle]
pub unsafe extern "C" fn bp_cellset_free(set: *mut BpCellSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Inserts a cell given by `len` 1-based coordinates.
#[no_mangle]
pub unsafe extern "C" fn bp_cellset_insert(set: *mut BpCellSet, coords: *const u32, len: usize) -> BpStatus {
    guard(|| {
        let set = as_mut(set, "set")?;
        let cell = cell_from(coords, len)?;
        set.set.insert_cell(&cell)?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn bp_cellset_contains(
    set: *const BpCellSet,
    coords: *const u32,
    len: usize,
    out: *mut bool,
) -> BpStatus {
    guard(|| {
        let set = as_ref(set, "set")?;
        let cell = cell_from(coords, len)?;
        set.set.spec().index_of_cell(&cell)?;
        write_out(out, set.set.contains_cell(&cell))
    })
}

/// Number of cells in the set, or 0 for a NULL handle.
#[no_mangle]
pub unsafe extern "C" fn bp_cellset_len(set: *const BpCellSet) -> u64 {
    set.as_ref().map_or(0, |s| s.set.len() as u64)
}

/// Perimeter of a set on a grid lattice.
#[no_mangle]
pub unsafe extern "C" fn bp_perimeter(lattice: *const BpLattice, set: *const BpCellSet, out: *mut u64) -> BpStatus {
    guard(|| {
        let spec = as_ref(lattice, "lattice")?.spec;
        let set = as_ref(set, "set")?.set.retarget(spec)?;
        write_out(out, dynamics::perimeter(&spec, &set)?)
    })
}

/// Runs the process from `initial` on `lattice`. The set must have the
/// lattice's d and n; its topology and threshold are taken from the lattice.
#[no_mangle]
pub unsafe extern "C" fn bp_run(
    lattice: *const BpLattice,
    initial: *const BpCellSet,
    audit: bool,
    trace: bool,
    out: *mut *mut BpRunRecord,
) -> BpStatus {
    guard(|| {
        let spec = as_ref(lattice, "lattice")?.spec;
        let set = as_ref(initial, "initial")?.set.retarget(spec)?;
        let record = dynamics::run(&spec, &set, RunOptions { audit, record_trace: trace })?;
        write_out(out, Box::into_raw(Box::new(BpRunRecord { record })))
    })
}

#[no_mangle]
pub unsafe extern "C" fn bp_run_free(record: *mut BpRunRecord) {
    if !record.is_null() {
        drop(Box::from_raw(record));
    }
}

/// Last round in which a cell was infected (0 for a closed set).
#[no_mangle]
pub unsafe extern "C" fn bp_run_final_time(record: *const BpRunRecord) -> u32 {
    record.as_ref().map_or(0, |r| r.record.final_time)
}

#[no_mangle]
pub unsafe extern "C" fn bp_run_percolates(record: *const BpRunRecord) -> bool {
    record.as_ref().is_some_and(|r| r.record.percolates)
}

#[no_mangle]
pub unsafe extern "C" fn bp_run_infected_count(record: *const BpRunRecord) -> u64 {
    record.as_ref().map_or(0, |r| r.record.infected_count() as u64)
}

/// Infection round of a cell, or `BP_NEVER`.
#[no_mangle]
pub unsafe extern "C" fn bp_run_time_of(
    record: *const BpRunRecord,
    coords: *const u32,
    len: usize,
    out: *mut u32,
) -> BpStatus {
    guard(|| {
        let record = &as_ref(record, "record")?.record;
        let cell = cell_from(coords, len)?;
        let idx = record.spec.index_of_cell(&cell)?;
        write_out(out, record.times[idx])
    })
}

#[no_mangle]
pub unsafe extern "C" fn bp_run_to_json(record: *const BpRunRecord, out: *mut *mut c_char) -> BpStatus {
    guard(|| {
        let record = &as_ref(record, "record")?.record;
        let text = serde_json::to_string(&record.to_json()).map_err(|e| Error::Io(e.to_string()))?;
        write_out(out, into_c_string(text))
    })
}

/// Exhaustive search for the smallest percolating set of size at most
/// `max_size`. Writes the optimum (or `BP_NEVER` if none exists) and, when
/// `witness` is non-NULL, a new handle to the first optimal set found (NULL
/// if none). `budget = 0` selects the default budget.
#[no_mangle]
pub unsafe extern "C" fn bp_search_min_size(
    lattice: *const BpLattice,
    max_size: u32,
    budget: u64,
    parallelism: u32,
    optimum: *mut u32,
    witness: *mut *mut BpCellSet,
) -> BpStatus {
    guard(|| {
        let spec = as_ref(lattice, "lattice")?.spec;
        let mut opts = SearchOptions {
            parallelism: parallelism.max(1) as usize,
            ..SearchOptions::default()
        };
        if budget > 0 {
            opts.budget = budget;
        }
        let result = extremal::min_percolating_size(&spec, max_size, &opts)?;
        write_out(optimum, result.optimum.unwrap_or(BP_NEVER))?;
        if !witness.is_null() {
            let handle = result
                .witness
                .map_or(ptr::null_mut(), |set| Box::into_raw(Box::new(BpCellSet { set })));
            witness.write(handle);
        }
        Ok(())
    })
}

/// Builds the witness DAG of a cell in strip `s` of `[n]^d`.
#[no_mangle]
pub unsafe extern "C" fn bp_witness_build(
    d: u32,
    n: u32,
    s: u32,
    coords: *const u32,
    len: usize,
    out: *mut *mut BpWitness,
) -> BpStatus {
    guard(|| {
        let ctx = StripContext::new(d, n, s)?;
        let cell = cell_from(coords, len)?;
        let dag = witness::build_witness(&cell, &ctx)?;
        write_out(out, Box::into_raw(Box::new(BpWitness { dag })))
    })
}

#[no_mangle]
pub unsafe extern "C" fn bp_witness_free(w: *mut BpWitness) {
    if !w.is_null() {
        drop(Box::from_raw(w));
    }
}

/// Longest root-to-leaf path, in edges.
#[no_mangle]
pub unsafe extern "C" fn bp_witness_depth(w: *const BpWitness) -> u32 {
    w.as_ref().map_or(0, |w| w.dag.depth())
}

/// Distinct labels in the DAG.
#[no_mangle]
pub unsafe extern "C" fn bp_witness_node_count(w: *const BpWitness) -> u64 {
    w.as_ref().map_or(0, |w| w.dag.nodes().len() as u64)
}

#[no_mangle]
pub unsafe extern "C" fn bp_witness_to_json(w: *const BpWitness, out: *mut *mut c_char) -> BpStatus {
    guard(|| {
        let dag = &as_ref(w, "witness")?.dag;
        let text = serde_json::to_string(&dag.to_json()).map_err(|e| Error::Io(e.to_string()))?;
        write_out(out, into_c_string(text))
    })
}
