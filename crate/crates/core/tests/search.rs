use bootperc::cellset::CellSet;
use bootperc::dynamics::{self, RunOptions};
use bootperc::error::Error;
use bootperc::extremal::{self, SearchOptions};
use bootperc::lattice::LatticeSpec;

fn opts(symmetry_pruning: bool, parallelism: usize) -> SearchOptions {
    SearchOptions { symmetry_pruning, parallelism, ..SearchOptions::default() }
}

fn small_lattices() -> Vec<LatticeSpec> {
    vec![
        LatticeSpec::grid(2, 2).unwrap(),
        LatticeSpec::grid(2, 3).unwrap(),
        LatticeSpec::grid(2, 4).unwrap(),
        LatticeSpec::grid(3, 2).unwrap(),
        LatticeSpec::grid(1, 6).unwrap(),
        LatticeSpec::torus(2, 3).unwrap(),
        LatticeSpec::torus(2, 4).unwrap(),
        LatticeSpec::grid(2, 3).unwrap().with_threshold(1).unwrap(),
    ]
}

#[test]
fn pruning_preserves_optima() {
    for spec in small_lattices() {
        let max = spec.cell_count() as u32;
        let plain = extremal::min_percolating_size(&spec, max, &opts(false, 1)).unwrap();
        let pruned = extremal::min_percolating_size(&spec, max, &opts(true, 1)).unwrap();
        assert_eq!(plain.optimum, pruned.optimum, "{spec}");
        assert_eq!(plain.instances_examined, pruned.instances_examined, "{spec}");
        assert!(pruned.pruned > 0 || plain.optimum == Some(1), "{spec}");
        for res in [&plain, &pruned] {
            let w = res.witness.as_ref().unwrap();
            assert!(dynamics::percolates(&spec, w).unwrap());
        }
    }
}

#[test]
fn pruning_preserves_min_times() {
    for spec in small_lattices() {
        let size = (spec.cell_count() / spec.n() as usize) as u32;
        let plain = extremal::min_percolation_time(&spec, size, &opts(false, 1));
        let pruned = extremal::min_percolation_time(&spec, size, &opts(true, 1));
        match (plain, pruned) {
            (Ok(a), Ok(b)) => {
                assert_eq!(a.optimum, b.optimum, "{spec}");
                let w = b.witness.unwrap();
                let rec = dynamics::run(&spec, &w, RunOptions::default()).unwrap();
                assert!(rec.percolates);
                assert_eq!(Some(rec.final_time), b.optimum);
            }
            (Err(a), Err(b)) => assert_eq!(a, b),
            (a, b) => panic!("{spec}: {a:?} vs {b:?}"),
        }
    }
}

#[test]
fn parallel_and_sequential_agree_exactly() {
    for spec in small_lattices() {
        let max = spec.cell_count() as u32;
        let seq = extremal::min_percolating_size(&spec, max, &opts(false, 1)).unwrap();
        for threads in [2, 3, 8] {
            let par = extremal::min_percolating_size(&spec, max, &opts(false, threads)).unwrap();
            assert_eq!(seq, par, "{spec} with {threads} threads");
        }
        let size = (spec.cell_count() / spec.n() as usize) as u32;
        if let Ok(seq) = extremal::min_percolation_time(&spec, size, &opts(false, 1)) {
            let par = extremal::min_percolation_time(&spec, size, &opts(false, 4)).unwrap();
            assert_eq!(seq, par, "{spec}");
        }
    }
}

#[test]
fn witness_is_colex_first() {
    // On [3]^2 the first percolating triple in colex order is {(1,1),(1,3),(3,1)}.
    let spec = LatticeSpec::grid(2, 3).unwrap();
    let res = extremal::min_percolating_size(&spec, 9, &SearchOptions::default()).unwrap();
    let expected = CellSet::from_coord_lists(spec, &[vec![1, 1], vec![1, 3], vec![3, 1]]).unwrap();
    assert_eq!(res.witness.unwrap(), expected);
}

#[test]
fn budget_is_enforced() {
    let spec = LatticeSpec::grid(3, 3).unwrap();
    let small = SearchOptions { budget: 1000, ..SearchOptions::default() };
    assert!(matches!(extremal::min_percolating_size(&spec, 9, &small), Err(Error::Budget { .. })));
    assert!(matches!(extremal::min_percolation_time(&spec, 9, &small), Err(Error::Budget { .. })));
}

#[test]
fn bad_sizes() {
    let spec = LatticeSpec::grid(2, 3).unwrap();
    assert!(matches!(extremal::min_percolation_time(&spec, 10, &SearchOptions::default()), Err(Error::Input(_))));
    assert!(matches!(extremal::min_percolation_time(&spec, 2, &SearchOptions::default()), Err(Error::Domain(_))));
    let none = extremal::min_percolating_size(&spec, 2, &SearchOptions::default()).unwrap();
    assert_eq!(none.optimum, None);
    assert!(none.witness.is_none());
}

#[test]
fn minimality() {
    let spec = LatticeSpec::grid(2, 4).unwrap();
    let a = bootperc::constructions::hyperplane_union(2, 4).unwrap();
    assert!(extremal::is_minimal(&spec, &a).unwrap());
    let full = CellSet::full(spec);
    assert!(!extremal::is_minimal(&spec, &full).unwrap());
    let empty = CellSet::empty(spec);
    assert!(matches!(extremal::is_minimal(&spec, &empty), Err(Error::Domain(_))));
}
