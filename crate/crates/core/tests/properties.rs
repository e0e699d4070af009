use proptest::prelude::*;
use treeformat::linalg::{gaussian_vec, seeded_rng};
use treeformat::minsub::proper_subsets;
use treeformat::{
    hsvd, io, random_tree_tensor, tree_rank, verify_nestedness, verify_rank_duality, DenseTensor, DimensionTree,
    RankTol, RankTuple, TreeSpec, TreeTensor, Truncation, Vertex,
};

fn gaussian(shape: &[usize], seed: u64) -> DenseTensor<f64> {
    let mut rng = seeded_rng(seed);
    let n = shape.iter().product();
    DenseTensor::new(shape.to_vec(), gaussian_vec(&mut rng, n)).unwrap()
}

fn low_rank(shape: &[usize], terms: usize, seed: u64) -> DenseTensor<f64> {
    let mut rng = seeded_rng(seed);
    let mut v = DenseTensor::zeros(shape.to_vec());
    for _ in 0..terms {
        let f: Vec<Vec<f64>> = shape.iter().map(|&n| gaussian_vec(&mut rng, n)).collect();
        v = v.add(&DenseTensor::elementary(&f).unwrap()).unwrap();
    }
    v
}

fn trees(d: usize) -> Vec<DimensionTree> {
    vec![
        DimensionTree::tucker(d).unwrap(),
        DimensionTree::linear(d).unwrap(),
        DimensionTree::balanced(d).unwrap(),
    ]
}

/// Random tree over `1..=d`: a shuffled mode list split recursively.
fn random_spec(modes: &[usize], cuts: &mut impl Iterator<Item = usize>) -> TreeSpec {
    if modes.len() == 1 {
        return TreeSpec::Leaf(modes[0]);
    }
    let k = 1 + cuts.next().unwrap_or(0) % (modes.len() - 1);
    TreeSpec::Node(vec![random_spec(&modes[..k], cuts), random_spec(&modes[k..], cuts)])
}

fn shape_strategy() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1usize..=3, 2..=4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn matricization_round_trips(shape in shape_strategy(), seed in any::<u64>(), mask in 1u64..15) {
        let v = gaussian(&shape, seed);
        let d = shape.len();
        let rows: Vec<usize> = (0..d).filter(|b| mask >> b & 1 == 1).map(|b| b + 1).collect();
        prop_assume!(!rows.is_empty() && rows.len() < d);
        let beta = Vertex::new(rows).unwrap();
        let m = v.matricize(&beta).unwrap();
        prop_assert_eq!(DenseTensor::dematricize(&m, &shape).unwrap(), v);
    }

    #[test]
    fn duality_holds_for_random_tensors(shape in shape_strategy(), seed in any::<u64>()) {
        let v = gaussian(&shape, seed);
        let tree = DimensionTree::balanced(shape.len()).unwrap();
        let rep = verify_rank_duality(&v, &tree, true, &RankTol::default()).unwrap();
        prop_assert_eq!(rep.records.len(), proper_subsets(shape.len()).len());
        prop_assert!(rep.passed());
    }

    #[test]
    fn tree_notation_round_trips(d in 2usize..8, cuts in prop::collection::vec(any::<usize>(), 16), perm_seed in any::<u64>()) {
        let mut modes: Vec<usize> = (1..=d).collect();
        // Fisher-Yates with a seeded generator
        let mut rng = seeded_rng(perm_seed);
        for i in (1..d).rev() {
            let j = rand::Rng::random_range(&mut rng, 0..=i);
            modes.swap(i, j);
        }
        let spec = random_spec(&modes, &mut cuts.into_iter());
        let tree = DimensionTree::from_spec(d, &spec).unwrap();
        let again: DimensionTree = tree.to_string().parse().unwrap();
        prop_assert_eq!(&again, &tree);
        prop_assert_eq!(tree.len(), 2 * d - 1);
    }

    #[test]
    fn hsvd_round_trip_is_minimal(shape in shape_strategy(), seed in any::<u64>(), which in 0usize..3) {
        let v = gaussian(&shape, seed);
        let tree = trees(shape.len()).swap_remove(which);
        let t = hsvd(&v, &tree, &Truncation::exact()).unwrap();
        prop_assert!(t.evaluate().relative_error(&v).unwrap() <= 1e-10);
        prop_assert!(t.flags().minimal);
        let tol = RankTol::default();
        prop_assert_eq!(t.ranks(), &tree_rank(&v, &tree, &tol).unwrap());
        prop_assert_eq!(t.literal_core_ranks(&tol), t.ranks().clone());
    }

    #[test]
    fn orthogonalize_preserves_and_is_idempotent(seed in any::<u64>(), which in 0usize..3) {
        let tree = trees(4).swap_remove(which);
        let ranks = RankTuple::uniform(&tree, 2);
        let t: TreeTensor<f64> = random_tree_tensor(&tree, &[3, 2, 3, 2], &ranks, seed).unwrap();
        let o = t.orthogonalize();
        prop_assert!(o.evaluate().relative_error(&t.evaluate()).unwrap() <= 1e-12);
        let oo = o.orthogonalize();
        prop_assert!(oo.evaluate().relative_error(&o.evaluate()).unwrap() <= 1e-13);
        prop_assert_eq!(o.ranks(), t.ranks());
    }

    #[test]
    fn core_ranks_match_tree_rank(seed in any::<u64>(), leaf in 1usize..=3) {
        let tree = DimensionTree::linear(3).unwrap();
        let ranks = RankTuple::uniform(&tree, 2);
        let t: TreeTensor<f64> = random_tree_tensor(&tree, &[3, 3, 3], &ranks, seed).unwrap();
        // duplicate a leaf column to make the representation redundant
        let id = tree.leaf(leaf);
        let mut u = t.leaf_basis(leaf).clone();
        let first = u.column(0).clone_owned();
        u.set_column(1, &first);
        let redundant = t.with_param(id, treeformat::NodeParams::Leaf(u)).unwrap();
        let tol = RankTol::default();
        prop_assert_eq!(redundant.core_ranks(&tol), tree_rank(&redundant.evaluate(), &tree, &tol).unwrap());
        prop_assert!(redundant.core_ranks(&tol).get(id) < 2);
    }

    #[test]
    fn storage_matches_formula(seed in any::<u64>(), r in 1usize..=2) {
        let tree = DimensionTree::balanced(4).unwrap();
        let shape = [3, 2, 3, 2];
        let ranks = RankTuple::uniform(&tree, r);
        let t: TreeTensor<f64> = random_tree_tensor(&tree, &shape, &ranks, seed).unwrap();
        let leaves: usize = shape.iter().map(|n| n * r).sum();
        let interior = 2 * r * r * r;
        let root = r * r;
        prop_assert_eq!(t.storage_report().parameters, leaves + interior + root);
    }

    #[test]
    fn documents_round_trip_byte_identically(seed in any::<u64>(), which in 0usize..3) {
        let tree = trees(3).swap_remove(which);
        let t: TreeTensor<f64> = random_tree_tensor(&tree, &[2, 3, 2], &RankTuple::uniform(&tree, 2), seed).unwrap();
        let s = io::to_string(&io::tree_tensor_to_json(&t));
        let back: TreeTensor<f64> = io::parse_tree_tensor(&s).unwrap();
        prop_assert_eq!(io::to_string(&io::tree_tensor_to_json(&back)), s);
        let v = t.evaluate();
        let s = io::to_string(&io::dense_to_json(&v));
        let back: DenseTensor<f64> = io::parse_dense(&s).unwrap();
        prop_assert_eq!(back, v);
    }

    #[test]
    fn nestedness_on_low_rank_tensors(seed in any::<u64>(), terms in 1usize..=3, which in 0usize..3) {
        let v = low_rank(&[3, 3, 2, 2], terms, seed);
        let tree = trees(4).swap_remove(which);
        let rep = verify_nestedness(&v, &tree, &RankTol::default(), 1e-10).unwrap();
        prop_assert!(rep.passed(), "{}", rep.to_json_lines());
    }
}

#[test]
fn single_precision_pipeline() {
    let tree = DimensionTree::balanced(3).unwrap();
    let ranks = RankTuple::uniform(&tree, 2);
    let t: TreeTensor<f32> = random_tree_tensor(&tree, &[3, 3, 3], &ranks, 2).unwrap();
    let v = t.evaluate();
    let tol = RankTol::<f32>::default();
    assert_eq!(tree_rank(&v, &tree, &tol).unwrap(), ranks);
    let back = hsvd(&v, &tree, &Truncation::exact()).unwrap();
    assert!(back.evaluate().relative_error(&v).unwrap() <= 1e-5);
    assert!(back.flags().minimal);
}
