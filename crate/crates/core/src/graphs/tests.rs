use super::*;
use crate::operators::{apply_operator, q31_power, DiffOperator};
use crate::series::{closed_form_gf, master_series};

/// Graph from vertex adjacencies, filling slots in order.
fn from_vertex_pairs(n: usize, pairs: &[(usize, usize)]) -> Graph {
    let mut next = vec![0; n];
    let mut hp = Vec::new();
    for &(u, v) in pairs {
        let a = 3 * u + next[u];
        next[u] += 1;
        let b = 3 * v + next[v];
        next[v] += 1;
        hp.push((a, b));
    }
    Graph::from_pairs(n, &hp).unwrap()
}

fn dumbbell() -> Graph {
    Graph::from_pairs(2, &[(0, 1), (3, 4), (2, 5)]).unwrap()
}

fn theta() -> Graph {
    Graph::from_pairs(2, &[(0, 3), (1, 4), (2, 5)]).unwrap()
}

/// Two cycles joined by a bridge, with a chord in one cycle and trees
/// hanging off both cycles and the bridge.
fn hairy_dumbbell() -> Graph {
    let [a, b, c, d, e, g, h, i, j, k, l, m, n, o, p] = [0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14];
    from_vertex_pairs(
        15,
        &[
            (a, h),
            (a, g),
            (a, o),
            (b, o),
            (b, e),
            (b, d),
            (e, c),
            (c, d),
            (e, d),
            (c, m),
            (m, p),
            (h, i),
            (i, g),
            (g, j),
            (h, k),
            (i, l),
            (o, n),
        ],
    )
}

#[test]
fn euler_characteristic_examples() {
    assert_eq!(Graph::from_pairs(1, &[]).unwrap().euler_characteristic(), 1);
    assert_eq!(dumbbell().euler_characteristic(), -1);
    assert_eq!(theta().euler_characteristic(), -1);
    assert_eq!(hairy_dumbbell().euler_characteristic(), -2);
}

#[test]
fn invalid_involution_rejected() {
    assert!(Graph::new(vec![1, 2, 0]).is_err());
    assert!(Graph::new(vec![0, 1]).is_err());
    assert!(Graph::from_pairs(1, &[(0, 0)]).is_err());
}

#[test]
fn encoding_round_trip() {
    let g = hairy_dumbbell();
    let parsed: Graph = g.encoding().parse().unwrap();
    assert_eq!(parsed, g);
    assert_eq!(dumbbell().encoding(), "2|0-1,2-5,3-4|");
    assert_eq!(Graph::from_pairs(1, &[]).unwrap().encoding(), "1||0,1,2");
    assert!("2|0-1|2".parse::<Graph>().is_err());
}

#[test]
fn superfluous_examples() {
    assert!(superfluous_halfedges(&dumbbell()).iter().all(|&s| !s));
    assert!(superfluous_halfedges(&Graph::from_pairs(1, &[]).unwrap()).iter().all(|&s| s));

    // bridge vertex with one leaf
    let g = Graph::from_pairs(3, &[(0, 1), (3, 4), (2, 6), (5, 7)]).unwrap();
    let sup = superfluous_halfedges(&g);
    let marked: Vec<usize> = (0..9).filter(|&h| sup[h]).collect();
    assert_eq!(marked, vec![8]);
    assert_eq!(superfluous_vertices(&g), vec![false, false, true]);
}

#[test]
fn core_of_leaf_free_graph_is_itself() {
    let d = core_decomposition(&dumbbell()).unwrap();
    assert_eq!(d.core, dumbbell());
    assert_eq!(d.forest.num_vertices(), 0);
    assert!(d.trees.is_empty());
}

#[test]
fn core_of_subdivided_theta() {
    let g = Graph::from_pairs(3, &[(0, 3), (1, 4), (2, 6), (5, 7)]).unwrap();
    let d = core_decomposition(&g).unwrap();
    assert_eq!(d.core.num_vertices(), 2);
    assert_eq!(d.core.signature().adjacency[0][1], 3);
    assert_eq!(d.forest.num_vertices(), 1);
    assert_eq!(d.trees.len(), 1);
    assert_eq!(d.trees[0].roots, vec![0, 1]);
    assert_eq!(d.reconstruct().unwrap(), g);
}

#[test]
fn core_of_hairy_dumbbell() {
    let g = hairy_dumbbell();
    let d = core_decomposition(&g).unwrap();
    // a, b, d, e survive
    assert_eq!(d.core_vertices, vec![0, 1, 3, 4]);
    let sig = d.core.signature();
    assert_eq!(sig.loops, vec![1, 0, 0, 0]);
    assert_eq!(sig.adjacency[0][1], 1);
    assert_eq!(sig.adjacency[1][2], 1);
    assert_eq!(sig.adjacency[1][3], 1);
    assert_eq!(sig.adjacency[2][3], 2);
    assert_eq!(d.core.euler_characteristic(), g.euler_characteristic());
    let mut sizes: Vec<usize> = d.trees.iter().map(|t| t.vertices.len()).collect();
    sizes.sort_unstable();
    assert_eq!(sizes, vec![2, 3, 6]);
    assert!(d.trees.iter().all(|t| t.roots.len() == 2));
    assert_eq!(d.reconstruct().unwrap(), g);
}

#[test]
fn non_negative_components_have_no_core() {
    let tree = Graph::from_pairs(1, &[]).unwrap();
    assert_eq!(core_decomposition(&tree), Err(GraphError::NonNegativeComponent(1)));
    let loop_graph = Graph::from_pairs(1, &[(0, 1)]).unwrap();
    assert_eq!(core_decomposition(&loop_graph), Err(GraphError::NonNegativeComponent(0)));
}

#[test]
fn enumeration_examples() {
    assert_eq!(enumerate_ordered_trivalent(2, &GraphFilter::leaf_free()).unwrap().len(), 15);
    assert_eq!(enumerate_ordered_trivalent(1, &GraphFilter::zero_only()).unwrap().len(), 3);
    assert_eq!(enumerate_ordered_trivalent(2, &GraphFilter::positive_only().connected()).unwrap().len(), 9);
    assert_eq!(rooted_tree_count(2).unwrap(), 36);
}

#[test]
fn enumeration_totals_are_involution_counts() {
    // involutions of 3, 6, 9 and 12 points
    for (n, total) in [(0, 1), (1, 4), (2, 76), (3, 2620), (4, 140152)] {
        let mut count = 0u64;
        let visited = for_each_ordered_trivalent(n, &GraphFilter::any(), |_| count += 1).unwrap();
        assert_eq!(count, total);
        assert_eq!(visited, total);
        let formula: u64 = (0..=3 * n).map(|l| matching_count(n, l)).sum();
        assert_eq!(formula, total);
    }
}

#[test]
fn enumerated_graphs_are_distinct_and_sorted_encodings_are_stable() {
    let graphs = enumerate_ordered_trivalent(3, &GraphFilter::any()).unwrap();
    let mut enc: Vec<String> = graphs.iter().map(Graph::encoding).collect();
    enc.sort();
    enc.dedup();
    assert_eq!(enc.len(), graphs.len());
    assert_eq!(graphs, enumerate_ordered_trivalent(3, &GraphFilter::any()).unwrap());
}

#[test]
fn euler_characteristic_from_leaves() {
    for n in 0..=3 {
        for g in enumerate_ordered_trivalent(n, &GraphFilter::any()).unwrap() {
            let chi = g.num_vertices() as i64 - g.edges().len() as i64;
            assert_eq!(2 * chi, g.num_leaves() as i64 - g.num_vertices() as i64);
            assert_eq!(g.euler_characteristic(), chi);
        }
    }
}

#[test]
fn bounds_enforced() {
    assert!(matches!(enumerate_ordered_trivalent(7, &GraphFilter::leaf_free()), Err(GraphError::Bound(_))));
    assert!(matches!(enumerate_ordered_trivalent(6, &GraphFilter::any()), Err(GraphError::Bound(_))));
    assert!(multigraph_classes(7, &GraphFilter::any()).is_err());
    assert!(graph_sum_oracle(3).is_err());
}

#[test]
fn multigraph_multiplicities_reconcile_with_matching_counts() {
    for n in 0..=6 {
        assert!(multiplicities_reconcile(n).unwrap(), "n={n}");
    }
    for class in multigraph_classes(2, &GraphFilter::any()).unwrap() {
        assert_eq!(class.representative.signature(), class.signature);
    }
}

#[test]
fn multigraph_multiplicities_match_enumeration() {
    for n in 0..=4 {
        let mut seen: BTreeMap<MultigraphSignature, u64> = BTreeMap::new();
        for_each_ordered_trivalent(n, &GraphFilter::any(), |g| *seen.entry(g.signature()).or_insert(0) += 1).unwrap();
        let classes = multigraph_classes(n, &GraphFilter::any()).unwrap();
        assert_eq!(classes.len(), seen.len());
        for class in classes {
            assert_eq!(seen[&class.signature], class.multiplicity);
        }
    }
}

fn check_decomposition(g: &Graph) {
    let v = decomposition_violations(g);
    assert!(v.is_empty(), "{g}: {v:?}");
}

#[test]
fn core_decomposition_on_all_small_graphs() {
    for n in 2..=4 {
        for_each_ordered_trivalent(n, &GraphFilter::negative_only().connected(), check_decomposition).unwrap();
    }
}

#[test]
fn core_decomposition_on_five_vertex_classes() {
    for class in multigraph_classes(5, &GraphFilter::negative_only().connected()).unwrap() {
        check_decomposition(&class.representative);
    }
}

#[test]
fn closed_forms_match_enumeration() {
    for (name, order) in [
        (ClosedForm::Trr, 4),
        (ClosedForm::G0, 4),
        (ClosedForm::G0c, 4),
        (ClosedForm::GplusC, 5),
        (ClosedForm::Gplus, 4),
        (ClosedForm::GminusLF, 4),
    ] {
        assert_eq!(enumerated_gf(name, order).unwrap(), closed_form_gf(name, order).unwrap(), "{name}");
    }
}

#[test]
fn rooted_tree_counts() {
    for n in 1..=5 {
        assert_eq!(int(rooted_tree_count(n).unwrap() as i64), rooted_tree_formula(n as u32));
    }
}

#[test]
fn four_factor_product_is_master_series() {
    assert_eq!(graph_master_product(4).unwrap(), master_series(4).unwrap());
}

#[test]
fn graph_sum_matches_surface_operator() {
    let q = q31_power(2);
    let op = apply_operator(&DiffOperator::surface_minus(true), &q, 3).unwrap();
    let oracle = graph_sum_oracle(1).unwrap();
    assert_eq!(oracle, op);

    let grades = oracle.phi_grade().unwrap();
    let q02 = Polynomial::var(RingDescriptor::LambdaQHat, Variable::Q(0, 2)).unwrap();
    assert_eq!(grades[&0], q02.scale(&int(-90)));
    let qm2 = Polynomial::var(RingDescriptor::LambdaQHat, Variable::Q(0, -2)).unwrap();
    assert_eq!(grades[&3], qm2.pow(2).scale(&int(90)));
}
