use bootperc::cellset::CellSet;
use bootperc::constructions::{hyperplane_union, level_set, named_set, NamedSet};
use bootperc::dynamics::{self, RunOptions};
use bootperc::lattice::{LatticeSpec, Topology};
use proptest::prelude::*;

fn lattice() -> impl Strategy<Value = LatticeSpec> {
    (1u32..=4, 2u32..=8, any::<bool>())
        .prop_filter("at most 4096 cells", |&(d, n, _)| u64::from(n).pow(d) <= 4096)
        .prop_map(|(d, n, torus)| {
            if torus && n >= 3 {
                LatticeSpec::torus(d, n).unwrap()
            } else {
                LatticeSpec::grid(d, n).unwrap()
            }
        })
}

fn lattice_with_set() -> impl Strategy<Value = (LatticeSpec, CellSet)> {
    lattice().prop_flat_map(|spec| {
        proptest::collection::vec(proptest::bool::weighted(0.2), spec.cell_count()).prop_map(move |bits| {
            let idx = bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i);
            (spec, CellSet::from_indices(spec, idx).unwrap())
        })
    })
}

fn permute_coords(spec: &LatticeSpec, set: &CellSet, perm: &[usize]) -> CellSet {
    let lists: Vec<Vec<u32>> = set
        .coord_lists()
        .into_iter()
        .map(|c| perm.iter().map(|&k| c[k]).collect())
        .collect();
    CellSet::from_coord_lists(*spec, &lists).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn index_round_trip((spec, idx) in lattice().prop_flat_map(|s| (Just(s), 0..s.cell_count()))) {
        let coords = spec.coords_of(idx);
        prop_assert!(coords.iter().all(|&x| (1..=spec.n()).contains(&x)));
        prop_assert_eq!(spec.index_of(&coords).unwrap(), idx);
    }

    #[test]
    fn adjacency_is_symmetric_with_expected_degrees(spec in lattice()) {
        let d = spec.d() as usize;
        for i in 0..spec.cell_count() {
            let nbrs: Vec<usize> = spec.neighbor_indices(i).collect();
            for &j in &nbrs {
                prop_assert!(spec.neighbor_indices(j).any(|k| k == i));
            }
            let expected = match spec.topology() {
                Topology::Torus => 2 * d,
                Topology::Grid => spec
                    .coords_of(i)
                    .iter()
                    .map(|&x| usize::from(x > 1) + usize::from(x < spec.n()))
                    .sum(),
            };
            prop_assert_eq!(nbrs.len(), expected);
            prop_assert_eq!(spec.degree(i), expected);
        }
    }

    #[test]
    fn closure_is_monotone_and_idempotent((spec, a) in lattice_with_set(), extra in proptest::collection::vec(any::<prop::sample::Index>(), 0..6)) {
        let mut b = a.clone();
        for e in extra {
            b.insert(e.index(spec.cell_count()));
        }
        let ca = dynamics::closure(&spec, &a).unwrap();
        let cb = dynamics::closure(&spec, &b).unwrap();
        prop_assert!(a.is_subset(&ca));
        prop_assert!(ca.is_subset(&cb));
        let again = dynamics::run(&spec, &ca, RunOptions::default()).unwrap();
        prop_assert_eq!(again.final_time, 0);
        prop_assert_eq!(again.closure(), ca);
    }

    #[test]
    fn frontier_matches_naive((spec, a) in lattice_with_set()) {
        let opts = RunOptions { audit: true, record_trace: spec.topology() == Topology::Grid };
        prop_assert_eq!(dynamics::run(&spec, &a, opts).unwrap(), dynamics::run_naive(&spec, &a, opts).unwrap());
    }

    #[test]
    fn coordinate_permutations_commute_with_the_process((spec, a) in lattice_with_set(), seed in any::<u64>()) {
        let d = spec.d() as usize;
        let mut perm: Vec<usize> = (0..d).collect();
        let mut s = seed;
        for i in (1..d).rev() {
            let j = (s % (i as u64 + 1)) as usize;
            perm.swap(i, j);
            s /= i as u64 + 1;
        }
        let ra = dynamics::run(&spec, &a, RunOptions::default()).unwrap();
        let pa = permute_coords(&spec, &a, &perm);
        let rp = dynamics::run(&spec, &pa, RunOptions::default()).unwrap();
        prop_assert_eq!(ra.final_time, rp.final_time);
        prop_assert_eq!(permute_coords(&spec, &ra.closure(), &perm), rp.closure());
    }

    #[test]
    fn perimeter_never_grows((spec, a) in lattice_with_set()) {
        prop_assume!(spec.topology() == Topology::Grid);
        let rec = dynamics::run(&spec, &a, RunOptions { audit: false, record_trace: true }).unwrap();
        let trace = rec.perimeter_trace.as_ref().unwrap();
        prop_assert_eq!(trace[0], dynamics::perimeter(&spec, &a).unwrap());
        prop_assert!(trace.windows(2).all(|w| w[1] <= w[0]));
        prop_assert_eq!(*trace.last().unwrap(), dynamics::perimeter(&spec, &rec.closure()).unwrap());
    }
}

#[test]
fn levels_partition_the_grid() {
    for (d, n) in [(1, 5), (2, 4), (3, 3), (3, 5), (4, 3)] {
        let spec = LatticeSpec::grid(d, n).unwrap();
        let mut seen = CellSet::empty(spec);
        let mut total = 0;
        for k in i64::from(d)..=i64::from(d * n) {
            let level = level_set(d, n, k).unwrap();
            for i in level.iter() {
                assert_eq!(i64::from(spec.level_of_index(i)), k);
            }
            total += level.len();
            seen.union_with(&level);
        }
        assert_eq!(total, spec.cell_count());
        assert!(seen.is_full());
        assert!(level_set(d, n, i64::from(d) - 1).unwrap().is_empty());
        assert!(level_set(d, n, i64::from(d * n) + 1).unwrap().is_empty());
    }
}

#[test]
fn boundary_percolates() {
    for (d, n) in [(1, 4), (2, 5), (3, 4), (4, 3)] {
        let set = named_set(NamedSet::Boundary, d, n).unwrap();
        assert!(dynamics::percolates(set.spec(), &set).unwrap(), "d={d} n={n}");
    }
}

#[test]
fn torus3_percolates() {
    for n in 3..=8 {
        let set = named_set(NamedSet::Torus3, 3, n).unwrap();
        assert_eq!(set.spec().topology(), Topology::Torus);
        assert_eq!(set.len() as u32, (n - 1) * (n - 1) + 3);
        assert!(dynamics::percolates(set.spec(), &set).unwrap(), "n={n}");
    }
}

#[test]
fn removing_any_cell_of_a_small_hyperplane_union_stops_percolation() {
    let spec = LatticeSpec::grid(2, 4).unwrap();
    let a = hyperplane_union(2, 4).unwrap();
    for i in a.iter() {
        let mut b = a.clone();
        b.remove(i);
        assert!(!dynamics::percolates(&spec, &b).unwrap());
    }
}
