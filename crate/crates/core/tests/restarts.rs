use treeformat::linalg::seeded_rng;
use treeformat::minsub::gaussian_tensor;
use treeformat::{best_approx, AlsOptions, DenseTensor, DimensionTree, RankTuple};

#[test]
fn more_restarts_rarely_change_the_best_residual() {
    let tree = DimensionTree::balanced(3).unwrap();
    let caps = RankTuple::uniform(&tree, 2);
    let opts = AlsOptions::default();
    let mut agree = 0;
    for i in 0..20u64 {
        let v: DenseTensor<f64> = gaussian_tensor(&mut seeded_rng(600 + i), &[3, 3, 3]);
        let few = best_approx(&v, &tree, &caps, 5, i, &opts).unwrap().residual;
        let many = best_approx(&v, &tree, &caps, 20, i, &opts).unwrap().residual;
        assert!(many <= few);
        if (few - many).abs() <= 1e-6 * many.max(f64::MIN_POSITIVE) {
            agree += 1;
        }
    }
    assert!(agree >= 18, "only {agree}/20 agree");
}

#[test]
fn restarts_are_reproducible() {
    let tree = DimensionTree::linear(4).unwrap();
    let caps = RankTuple::uniform(&tree, 2);
    let v: DenseTensor<f64> = gaussian_tensor(&mut seeded_rng(77), &[2, 3, 2, 3]);
    let a = best_approx(&v, &tree, &caps, 4, 11, &AlsOptions::default()).unwrap();
    let b = best_approx(&v, &tree, &caps, 4, 11, &AlsOptions::default()).unwrap();
    assert_eq!(a.residual, b.residual);
    assert_eq!(a.approximant.evaluate(), b.approximant.evaluate());
}
