use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use bootperc_ffi::*;

fn last_error() -> String {
    let p = bp_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn lattice(d: u32, n: u32, topology: BpTopology) -> *mut BpLattice {
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { bp_lattice_new(d, n, topology, 0, &mut out) }, BpStatus::Ok);
    out
}

fn construction(d: u32, n: u32, name: &str) -> *mut BpCellSet {
    let name = CString::new(name).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { bp_construction(d, n, name.as_ptr(), &mut out) }, BpStatus::Ok);
    out
}

#[test]
fn hyperplanes_on_6_cubed() {
    unsafe {
        let lat = lattice(3, 6, BpTopology::Grid);
        let set = construction(3, 6, "hyperplanes");
        let mut rec = ptr::null_mut();
        assert_eq!(bp_run(lat, set, true, true, &mut rec), BpStatus::Ok);
        assert!(bp_run_percolates(rec));
        assert_eq!(bp_run_final_time(rec), 14);
        assert_eq!(bp_run_infected_count(rec), 216);

        let mut t = 0;
        assert_eq!(bp_run_time_of(rec, [1u32, 1, 4].as_ptr(), 3, &mut t), BpStatus::Ok);
        assert_eq!(t, 0);
        assert_eq!(bp_run_time_of(rec, [7u32, 1, 1].as_ptr(), 3, &mut t), BpStatus::Input);

        let mut json = ptr::null_mut();
        assert_eq!(bp_run_to_json(rec, &mut json), BpStatus::Ok);
        let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
        bp_string_free(json);
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(value["T"], 14);
        assert_eq!(value["percolates"], true);

        bp_run_free(rec);
        bp_cellset_free(set);
        bp_lattice_free(lat);
    }
}

#[test]
fn cellset_edits_and_perimeter() {
    unsafe {
        let lat = lattice(2, 4, BpTopology::Grid);
        let mut set = ptr::null_mut();
        assert_eq!(bp_cellset_new(lat, &mut set), BpStatus::Ok);
        assert_eq!(bp_cellset_insert(set, [2u32, 2].as_ptr(), 2), BpStatus::Ok);
        assert_eq!(bp_cellset_insert(set, [2u32, 3].as_ptr(), 2), BpStatus::Ok);
        assert_eq!(bp_cellset_len(set), 2);
        let mut inside = false;
        assert_eq!(bp_cellset_contains(set, [2u32, 3].as_ptr(), 2, &mut inside), BpStatus::Ok);
        assert!(inside);
        assert_eq!(bp_cellset_contains(set, [1u32, 1].as_ptr(), 2, &mut inside), BpStatus::Ok);
        assert!(!inside);
        let mut p = 0;
        assert_eq!(bp_perimeter(lat, set, &mut p), BpStatus::Ok);
        assert_eq!(p, 6);

        assert_eq!(bp_cellset_insert(set, [5u32, 1].as_ptr(), 2), BpStatus::Input);
        assert_eq!(bp_cellset_insert(set, [1u32].as_ptr(), 1), BpStatus::Input);
        assert!(!last_error().is_empty());

        bp_cellset_free(set);
        bp_lattice_free(lat);
    }
}

#[test]
fn error_codes() {
    unsafe {
        let mut lat = ptr::null_mut();
        assert_eq!(bp_lattice_new(0, 3, BpTopology::Grid, 0, &mut lat), BpStatus::Input);
        assert!(lat.is_null());
        assert_eq!(bp_lattice_new(2, 2, BpTopology::Torus, 0, &mut lat), BpStatus::Input);
        assert_eq!(bp_lattice_new(2, 3, BpTopology::Grid, 0, ptr::null_mut()), BpStatus::NullPointer);
        assert!(last_error().contains("null"));

        let torus = lattice(2, 4, BpTopology::Torus);
        let set = construction(2, 4, "diagonal2d");
        let mut p = 0;
        assert_eq!(bp_perimeter(torus, set, &mut p), BpStatus::UnsupportedTopology);

        let name = CString::new("nonsense").unwrap();
        let mut out = ptr::null_mut();
        assert_eq!(bp_construction(2, 4, name.as_ptr(), &mut out), BpStatus::Input);

        let grid = lattice(3, 4, BpTopology::Grid);
        let mut opt = 0;
        assert_eq!(
            bp_search_min_size(grid, 16, 10, 1, &mut opt, ptr::null_mut()),
            BpStatus::Budget
        );

        bp_lattice_free(grid);
        bp_cellset_free(set);
        bp_lattice_free(torus);
    }
}

#[test]
fn torus_run_and_search() {
    unsafe {
        let torus = lattice(3, 5, BpTopology::Torus);
        let set = construction(3, 5, "torus3");
        let mut rec = ptr::null_mut();
        assert_eq!(bp_run(torus, set, false, false, &mut rec), BpStatus::Ok);
        assert!(bp_run_percolates(rec));
        bp_run_free(rec);
        bp_cellset_free(set);
        bp_lattice_free(torus);

        let grid = lattice(2, 3, BpTopology::Grid);
        let mut opt = 0;
        let mut witness = ptr::null_mut();
        assert_eq!(bp_search_min_size(grid, 9, 0, 2, &mut opt, &mut witness), BpStatus::Ok);
        assert_eq!(opt, 3);
        assert_eq!(bp_cellset_len(witness), 3);
        bp_cellset_free(witness);

        assert_eq!(bp_search_min_size(grid, 2, 0, 1, &mut opt, &mut witness), BpStatus::Ok);
        assert_eq!(opt, BP_NEVER);
        assert!(witness.is_null());
        bp_lattice_free(grid);
    }
}

#[test]
fn witness_dag() {
    unsafe {
        let mut w = ptr::null_mut();
        assert_eq!(bp_witness_build(3, 7, 2, [4u32, 4, 3].as_ptr(), 3, &mut w), BpStatus::Ok);
        assert!(bp_witness_depth(w) >= 1);
        assert!(bp_witness_node_count(w) > 1);
        let mut json = ptr::null_mut();
        assert_eq!(bp_witness_to_json(w, &mut json), BpStatus::Ok);
        let value: serde_json::Value = serde_json::from_str(CStr::from_ptr(json).to_str().unwrap()).unwrap();
        bp_string_free(json);
        assert_eq!(value["root"], serde_json::json!([4, 4, 3]));
        bp_witness_free(w);

        // Outside the strip.
        assert_eq!(bp_witness_build(3, 7, 2, [1u32, 1, 1].as_ptr(), 3, &mut w), BpStatus::Input);
    }
}

#[test]
fn null_handles_are_harmless() {
    unsafe {
        bp_lattice_free(ptr::null_mut());
        bp_cellset_free(ptr::null_mut());
        bp_run_free(ptr::null_mut());
        bp_witness_free(ptr::null_mut());
        bp_string_free(ptr::null_mut());
        assert_eq!(bp_cellset_len(ptr::null()), 0);
        assert_eq!(bp_run_final_time(ptr::null()), 0);
        assert!(!bp_run_percolates(ptr::null()));
    }
}

fn target_dir() -> PathBuf {
    // tests run from target/<profile>/deps
    std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/bootperc.h")).unwrap();
    for name in [
        "bp_last_error", "bp_string_free", "bp_lattice_new", "bp_lattice_free", "bp_lattice_cell_count",
        "bp_cellset_new", "bp_construction", "bp_cellset_free", "bp_cellset_insert", "bp_cellset_contains",
        "bp_cellset_len", "bp_perimeter", "bp_run", "bp_run_free", "bp_run_final_time", "bp_run_percolates",
        "bp_run_infected_count", "bp_run_time_of", "bp_run_to_json", "bp_search_min_size", "bp_witness_build",
        "bp_witness_free", "bp_witness_depth", "bp_witness_node_count", "bp_witness_to_json",
    ] {
        assert!(header.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(header.contains("typedef struct BpLattice BpLattice;"));
    assert!(header.contains("#define BP_NEVER 4294967295"));
}

#[test]
fn c_program_links_against_static_library() {
    let lib = target_dir().join("libbootperc_ffi.a");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler or static library at {}", lib.display());
        return;
    }
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let exe = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("bootperc_smoke");
    let status = Command::new("cc")
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok");
}
