mod common;

use common::{random_qbf, rng};
use dtw_core::decomp::DependencyTreeDecomposition;
use dtw_core::{parse_qdimacs, PrimalGraph};
use proptest::prelude::*;

proptest! {
    #[test]
    fn qdimacs_round_trip(seed in any::<u64>(), vars in 1usize..=10, clauses in 0usize..=12) {
        let inst = random_qbf(&mut rng(seed), vars, clauses);
        let text = inst.to_qdimacs();
        let (again, report) = parse_qdimacs(&text).unwrap();
        prop_assert_eq!(again.to_qdimacs(), text);
        prop_assert_eq!(report.tautologies_dropped, 0);
        prop_assert!(report.free_variables_bound.is_empty());
    }

    #[test]
    fn primal_graph_edges_come_from_clauses(seed in any::<u64>(), vars in 1usize..=10, clauses in 0usize..=12) {
        let inst = random_qbf(&mut rng(seed), vars, clauses);
        let g = PrimalGraph::from_instance(&inst);
        for (u, v) in g.edges() {
            prop_assert!(inst.clauses().iter().any(|c| c.polarity_of(u).is_some() && c.polarity_of(v).is_some()));
        }
        for c in inst.clauses() {
            let vs: Vec<_> = c.vars().collect();
            for (i, &a) in vs.iter().enumerate() {
                for &b in &vs[i + 1..] {
                    prop_assert!(g.has_edge(a, b));
                }
            }
        }
        prop_assert_eq!(g.vertices().to_vec(), inst.vars());
    }
}

#[test]
fn normalization_counts() {
    let text = "c comment\np cnf 5 4\ne 1 0\na 2 5 0\n1 -1 0\n3 1 0\n1 3 0\n2 1 0\n";
    let (inst, report) = parse_qdimacs(text).unwrap();
    assert_eq!(report.tautologies_dropped, 1);
    assert_eq!(report.duplicate_clauses_dropped, 1);
    assert_eq!(report.free_variables_bound, vec![3]);
    assert_eq!(report.unused_variables_dropped, vec![5]);
    assert_eq!(inst.to_qdimacs(), "p cnf 3 2\ne 3 1 0\na 2 0\n1 3 0\n1 2 0\n");
}

#[test]
fn td_text_round_trip() {
    let td = DependencyTreeDecomposition::new(vec![vec![1, 2], vec![2, 3]], vec![None, Some(0)]);
    let text = td.to_text(3);
    assert_eq!(text, "s td 2 2 3\nb 1 1 2 0\nb 2 2 3 0\ne 1 2\nr 1\n");
    assert_eq!(DependencyTreeDecomposition::parse(&text).unwrap(), td);
}
