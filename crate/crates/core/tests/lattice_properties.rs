use pidkit_core::lattice::{antichains_by_filter, antichains_by_maximal, leq, mobius_invert};
use pidkit_core::{Antichain, DecompositionTable, PiLattice, VarSet};
use proptest::prelude::*;
use std::sync::OnceLock;

fn lattices() -> &'static [PiLattice] {
    static CELL: OnceLock<Vec<PiLattice>> = OnceLock::new();
    CELL.get_or_init(|| (1..=4).map(|n| PiLattice::new(n).unwrap()).collect())
}

#[test]
fn node_counts() {
    let counts: Vec<usize> = (1..=4).map(|n| PiLattice::new(n).unwrap().len()).collect();
    assert_eq!(counts, [1, 4, 18, 166]);
    assert!(PiLattice::new(5).is_err());
    assert!(PiLattice::new(0).is_err());
}

#[test]
fn enumerations_agree() {
    for n in 1..=3 {
        let mut a = antichains_by_filter(n).unwrap();
        let mut b = antichains_by_maximal(n).unwrap();
        a.sort();
        b.sort();
        assert_eq!(a, b, "n = {n}");
    }
}

#[test]
fn order_axioms_on_three_sources() {
    let l = PiLattice::new(3).unwrap();
    let m = l.len();
    for a in 0..m {
        assert!(l.leq(a, a));
        assert!(l.leq(l.bottom(), a) && l.leq(a, l.top()));
        for b in 0..m {
            if a != b && l.leq(a, b) {
                assert!(!l.leq(b, a));
                assert!(a < b, "index order is a linear extension");
                assert!(l.layer(a) < l.layer(b));
            }
            for c in 0..m {
                if l.leq(a, b) && l.leq(b, c) {
                    assert!(l.leq(a, c));
                }
            }
        }
    }
}

#[test]
fn two_source_lattice_is_a_diamond() {
    let l = PiLattice::new(2).unwrap();
    let labels: Vec<String> = l.nodes().iter().map(|a| a.label()).collect();
    assert_eq!(labels, ["1|2", "1", "2", "12"]);
    let mut covers = l.covers().to_vec();
    covers.sort();
    assert_eq!(covers, [(0, 1), (0, 2), (1, 3), (2, 3)]);
}

#[test]
fn three_source_layers() {
    let l = PiLattice::new(3).unwrap();
    let layer_of = |s: &str| l.layer(l.find(s).unwrap());
    assert_eq!(l.num_layers(), 7);
    for (label, layer) in [
        ("1|2|3", 0),
        ("1|2", 1),
        ("2|3", 1),
        ("1|23", 2),
        ("1", 3),
        ("12|13|23", 3),
        ("12|13", 4),
        ("12", 5),
        ("123", 6),
    ] {
        assert_eq!(layer_of(label), layer, "{label}");
    }
}

#[test]
fn antichain_validation() {
    assert!(Antichain::new(3, [0b001, 0b011]).is_err());
    assert!(Antichain::new(2, [0b100]).is_err());
    assert!(Antichain::parse(3, "12|13").is_ok());
    assert!(Antichain::parse(3, "1|12").is_err());
    let a = Antichain::parse(3, "1|23").unwrap();
    let b = Antichain::parse(3, "12|13").unwrap();
    assert!(leq(&a, &b).unwrap());
    assert!(!leq(&b, &a).unwrap());
    assert!(leq(&a, &Antichain::parse(2, "1").unwrap()).is_err());
}

proptest! {
    #[test]
    fn mobius_round_trip(n in 1usize..=4, seed in prop::collection::vec(-5.0f64..5.0, 166)) {
        let l = &lattices()[n - 1];
        let values = seed[..l.len()].to_vec();
        let table = DecompositionTable::from_values(VarSet::single(0), "test", values.clone());
        let inverted = mobius_invert(&table, l);
        let back = inverted.cumulate(l).unwrap();
        for (x, y) in values.iter().zip(&back) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }
}
