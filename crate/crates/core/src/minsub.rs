//! Minimal subspaces and tree-based ranks.
//!
//! In finite dimensions `U_α^min(v)` is the column space of `M_α(v)`, so
//! every quantity here reduces to numerical ranks and singular subspaces of
//! matricizations. The verification routines return [`Report`]s instead of
//! failing, so callers can aggregate them.

use std::fmt;

use nalgebra::DMatrix;
use rand::Rng;

use crate::dense::{rows_from_sorted, DenseTensor, Functional};
use crate::dtree::{DimensionTree, NodeId, Vertex};
use crate::error::{Error, Result};
use crate::linalg::{self, gaussian_vec, seeded_rng, singular_values, RankTol};
use crate::real::Real;
use crate::report::{Record, Report};
use crate::ttn::{random_tree_tensor, TreeTensor};

/// Orthonormal basis of `U_α^min(v)` together with the retained and
/// discarded singular values of `M_α(v)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SubspaceBasis<T: Real> {
    pub vertex: Vertex,
    pub basis: DMatrix<T>,
    pub singular_values: Vec<T>,
    pub discarded: Vec<T>,
}

impl<T: Real> SubspaceBasis<T> {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }
}

/// A rank `r_α` for every vertex of a tree, stored by [`NodeId`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankTuple {
    tree: DimensionTree,
    ranks: Vec<usize>,
}

impl RankTuple {
    pub fn new(tree: DimensionTree, ranks: Vec<usize>) -> Result<Self> {
        if ranks.len() != tree.len() {
            return Err(Error::MalformedRanks(format!(
                "{} ranks for a tree with {} vertices",
                ranks.len(),
                tree.len()
            )));
        }
        Ok(RankTuple { tree, ranks })
    }

    pub fn from_fn(tree: &DimensionTree, f: impl Fn(NodeId) -> usize) -> Self {
        let ranks = tree.ids().map(f).collect();
        RankTuple {
            tree: tree.clone(),
            ranks,
        }
    }

    /// `r` at every vertex except the root, which gets 1.
    pub fn uniform(tree: &DimensionTree, r: usize) -> Self {
        Self::from_fn(tree, |id| if tree.is_root(id) { 1 } else { r })
    }

    /// Parses `"all:k,root:1"`, `"leaves:k"`, `"interior:k"` or per-vertex
    /// entries such as `"1:2;1 2:3"`. Entries are separated by `,` or `;` and
    /// applied left to right. The root defaults to 1; every other vertex must
    /// be covered.
    pub fn parse_spec(tree: &DimensionTree, spec: &str) -> Result<Self> {
        let mut ranks: Vec<Option<usize>> = vec![None; tree.len()];
        ranks[tree.root()] = Some(1);
        for entry in spec.split([',', ';']).map(str::trim).filter(|e| !e.is_empty()) {
            let (key, val) = entry
                .rsplit_once(':')
                .ok_or_else(|| Error::MalformedRanks(format!("entry {entry:?} lacks ':'")))?;
            let r: usize = val
                .trim()
                .parse()
                .map_err(|_| Error::MalformedRanks(format!("bad rank in {entry:?}")))?;
            let key = key.trim();
            let targets: Vec<NodeId> = match key {
                "all" => tree.non_root_ids().collect(),
                "root" => vec![tree.root()],
                "leaves" => tree.ids().filter(|&i| tree.is_leaf(i)).collect(),
                "interior" => tree.inner_ids().collect(),
                _ => {
                    let v = Vertex::parse_key(key)
                        .map_err(|_| Error::MalformedRanks(format!("bad vertex key {key:?}")))?;
                    let id = tree
                        .node_of(&v)
                        .ok_or_else(|| Error::MalformedRanks(format!("{v} is not a vertex of {tree}")))?;
                    vec![id]
                }
            };
            for id in targets {
                ranks[id] = Some(r);
            }
        }
        let ranks = ranks
            .iter()
            .enumerate()
            .map(|(id, r)| {
                r.ok_or_else(|| {
                    Error::MalformedRanks(format!("no rank given for vertex {}", tree.vertex(id)))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(RankTuple {
            tree: tree.clone(),
            ranks,
        })
    }

    pub fn tree(&self) -> &DimensionTree {
        &self.tree
    }

    pub fn get(&self, id: NodeId) -> usize {
        self.ranks[id]
    }

    pub fn set(&mut self, id: NodeId, r: usize) {
        self.ranks[id] = r;
    }

    pub fn of(&self, v: &Vertex) -> Option<usize> {
        self.tree.node_of(v).map(|id| self.ranks[id])
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.ranks
    }

    /// Componentwise `self ≤ other` on the same tree.
    pub fn leq(&self, other: &RankTuple) -> bool {
        self.tree == other.tree && self.ranks.iter().zip(&other.ranks).all(|(a, b)| a <= b)
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, &Vertex, usize)> + '_ {
        self.tree.ids().map(move |id| (id, self.tree.vertex(id), self.ranks[id]))
    }
}

impl fmt::Display for RankTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, (_, v, r)) in self.iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            write!(f, "{v}:{r}")?;
        }
        Ok(())
    }
}

fn check_tree_shape<T: Real>(v: &DenseTensor<T>, tree: &DimensionTree) -> Result<()> {
    if v.ndim() != tree.d() {
        return Err(Error::ShapeMismatch(format!(
            "tensor has {} modes, tree {} has {}",
            v.ndim(),
            tree,
            tree.d()
        )));
    }
    Ok(())
}

/// Orthonormal basis of `U_α^min(v)` from the SVD of `M_α(v)`.
///
/// `α` must be a proper non-empty subset; the root convention
/// `U_D^min(v) = span{v}` is handled by [`tree_rank`].
pub fn minimal_subspace<T: Real>(v: &DenseTensor<T>, alpha: &Vertex, tol: &RankTol<T>) -> Result<SubspaceBasis<T>> {
    let m = v.matricize(alpha)?;
    let dec = linalg::svd(&m.matrix);
    let r = tol.rank(&dec.sigma);
    Ok(SubspaceBasis {
        vertex: alpha.clone(),
        basis: dec.u.columns(0, r).into_owned(),
        singular_values: dec.sigma[..r].to_vec(),
        discarded: dec.sigma[r..].to_vec(),
    })
}

/// Numerical rank of `M_α(v)`.
pub fn matricization_rank<T: Real>(v: &DenseTensor<T>, alpha: &Vertex, tol: &RankTol<T>) -> Result<usize> {
    let m = v.matricize(alpha)?;
    Ok(tol.matrix_rank(&m.matrix))
}

/// `rank_{T_D}(v)`: numerical ranks of `M_α(v)` off the root, and
/// `r_D = 1` for non-zero `v` (0 otherwise).
pub fn tree_rank<T: Real>(v: &DenseTensor<T>, tree: &DimensionTree, tol: &RankTol<T>) -> Result<RankTuple> {
    check_tree_shape(v, tree)?;
    let mut ranks = Vec::with_capacity(tree.len());
    for id in tree.ids() {
        if tree.is_root(id) {
            ranks.push(usize::from(!v.is_zero()));
        } else {
            ranks.push(matricization_rank(v, tree.vertex(id), tol)?);
        }
    }
    RankTuple::new(tree.clone(), ranks)
}

/// All non-empty proper subsets of `{1, …, d}` in lexicographic key order.
pub fn proper_subsets(d: usize) -> Vec<Vertex> {
    let mut out: Vec<Vertex> = (1..(1u64 << d) - 1)
        .map(|mask| Vertex::new((0..d).filter(|b| mask >> b & 1 == 1).map(|b| b + 1)).expect("non-empty"))
        .collect();
    out.sort();
    out
}

/// Largest `d` for which duality is checked over every subset.
pub const ALL_SUBSETS_MAX_D: usize = 5;

/// Checks `rank M_α(v) = rank M_{α^c}(v)` for every non-root vertex of
/// `tree`, or for every proper subset when `all_subsets` is set and
/// `d ≤ 5`.
///
/// A mismatch is not a violation when some singular value of either side
/// lies within rounding distance of the cutoff; such records carry
/// `tolerance_sensitive: true`.
pub fn verify_rank_duality<T: Real>(
    v: &DenseTensor<T>,
    tree: &DimensionTree,
    all_subsets: bool,
    tol: &RankTol<T>,
) -> Result<Report> {
    check_tree_shape(v, tree)?;
    let d = v.ndim();
    let subsets: Vec<Vertex> = if all_subsets && d <= ALL_SUBSETS_MAX_D {
        proper_subsets(d)
    } else {
        tree.non_root_ids().map(|id| tree.vertex(id).clone()).collect()
    };
    let mut report = Report::new("duality");
    for alpha in subsets {
        let comp = alpha.complement(d).expect("proper subset");
        let s_a = singular_values(&v.matricize(&alpha)?.matrix);
        let s_c = singular_values(&v.matricize(&comp)?.matrix);
        let (r_a, r_c) = (tol.rank(&s_a), tol.rank(&s_c));
        let smax = s_a.first().copied().unwrap_or_else(T::zero).max(s_c.first().copied().unwrap_or_else(T::zero));
        let tau = tol.threshold(smax);
        let band = T::of(1e3) * T::eps() * smax;
        let gap = s_a
            .iter()
            .chain(&s_c)
            .map(|&s| (s - tau).magnitude())
            .fold(None, |acc: Option<T>, g| Some(acc.map_or(g, |a| a.min(g))));
        let sensitive = smax > T::zero() && gap.is_some_and(|g| g <= band);
        let rel_gap = match gap {
            Some(g) if smax > T::zero() => (g / smax).as_f64(),
            _ => 0.0,
        };
        let diff = r_a.abs_diff(r_c) as f64;
        report.push(
            Record::new(alpha.key(), diff, 0.0, r_a == r_c || sensitive)
                .with("rank", r_a)
                .with("complement_rank", r_c)
                .with("relative_gap", rel_gap)
                .with("tolerance_sensitive", sensitive),
        );
    }
    Ok(report)
}

/// For every interior `α ≠ D`, the relative residual
/// `‖(I − P) B_α‖_F / ‖B_α‖_F` where `B_α` is the minimal-subspace basis of
/// `α` and `P` the projector onto `⊗_{β ∈ S(α)} U_β^min(v)`.
pub fn verify_nestedness<T: Real>(
    v: &DenseTensor<T>,
    tree: &DimensionTree,
    tol: &RankTol<T>,
    threshold: T,
) -> Result<Report> {
    check_tree_shape(v, tree)?;
    let mut report = Report::new("nestedness");
    for alpha in tree.inner_ids() {
        let b = minimal_subspace(v, tree.vertex(alpha), tol)?;
        let sons = tree.sons(alpha);
        let projectors = sons
            .iter()
            .map(|&s| minimal_subspace(v, tree.vertex(s), tol).map(|sb| linalg::projector(&sb.basis)))
            .collect::<Result<Vec<_>>>()?;
        let residual = if b.dim() == 0 {
            T::zero()
        } else {
            let residual = son_projection_residual(&b.basis, tree, alpha, v.shape(), &projectors);
            residual / b.basis.norm()
        };
        report.push(
            Record::new(tree.vertex(alpha).key(), residual.as_f64(), threshold.as_f64(), residual <= threshold)
                .with("dim", b.dim()),
        );
    }
    Ok(report)
}

/// `‖(I − ⊗_s P_s) B‖_F` with the rows of `B` in sorted order over the
/// modes of `alpha` and one projector per son.
fn son_projection_residual<T: Real>(
    b: &DMatrix<T>,
    tree: &DimensionTree,
    alpha: NodeId,
    shape: &[usize],
    projectors: &[DMatrix<T>],
) -> T {
    let sons = tree.sons(alpha);
    let concat: Vec<usize> = sons
        .iter()
        .flat_map(|&s| tree.vertex(s).indices().iter().copied())
        .collect();
    let b_sons = rows_from_sorted(b, &concat, shape);
    let block_sizes: Vec<usize> = sons
        .iter()
        .map(|&s| tree.vertex(s).indices().iter().map(|&j| shape[j - 1]).product())
        .collect();
    let mut total = T::zero();
    for c in 0..b_sons.ncols() {
        let col: Vec<T> = b_sons.column(c).iter().copied().collect();
        let mut t = DenseTensor::from_parts(block_sizes.clone(), col.clone());
        for (k, p) in projectors.iter().enumerate() {
            t = t.mode_product(k, p).expect("projector matches block size");
        }
        total += col
            .iter()
            .zip(t.values())
            .fold(T::zero(), |acc, (&a, &pa)| acc + (a - pa) * (a - pa));
    }
    total.sqrt()
}

/// How the functionals of [`span_from_contractions`] are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sampling {
    /// Fresh i.i.d. standard Gaussian coefficients per sample.
    Independent,
    /// The first draw reused for every sample (a degenerate control).
    Repeated,
}

/// Builds vectors `(id_β ⊗ φ^{(α∖β)})(v_α)` with `v_α = (id_α ⊗ φ^{(α^c)})(v)`
/// from random functionals and compares their span with `U_β^min(v)`.
///
/// The record passes iff the span has dimension `r_β` and the projector
/// distance to the minimal-subspace basis is at most `threshold`.
#[allow(clippy::too_many_arguments)]
pub fn span_from_contractions<T: Real>(
    v: &DenseTensor<T>,
    beta: &Vertex,
    alpha: &Vertex,
    samples: usize,
    seed: u64,
    sampling: Sampling,
    tol: &RankTol<T>,
    threshold: T,
) -> Result<Record> {
    if samples < 1 {
        return Err(Error::InvalidArgument("samples must be at least 1".into()));
    }
    let d = v.ndim();
    if alpha.highest() > d {
        return Err(Error::IndexOutOfRange { index: alpha.highest(), d });
    }
    if !beta.is_subset(alpha) || beta == alpha {
        return Err(Error::InvalidVertex(format!("{beta} is not a proper subset of {alpha}")));
    }
    let expected = minimal_subspace(v, beta, tol)?;
    let alpha_c = alpha.complement(d);
    let rest = alpha.minus(beta).expect("proper subset");
    // β and α∖β renumbered inside the contracted tensor over α
    let local = |w: &Vertex| {
        Vertex::new(w.indices().iter().map(|j| alpha.indices().iter().position(|a| a == j).expect("inside") + 1))
            .expect("non-empty")
    };
    let beta_local = local(beta);
    let rest_local = local(&rest);
    let size = |w: &Vertex| -> usize { w.indices().iter().map(|&j| v.shape()[j - 1]).product() };

    let mut rng = seeded_rng(seed);
    let draw = |rng: &mut rand_chacha::ChaCha8Rng| {
        let outer = alpha_c.as_ref().map(|c| Functional::new(c.clone(), gaussian_vec(rng, size(c))));
        let inner = Functional::new(rest_local.clone(), gaussian_vec(rng, size(&rest)));
        (outer, inner)
    };
    let first = draw(&mut rng);
    let mut cols: Vec<Vec<T>> = Vec::with_capacity(samples);
    for k in 0..samples {
        let (outer, inner) = match sampling {
            Sampling::Repeated => first.clone(),
            Sampling::Independent if k == 0 => first.clone(),
            Sampling::Independent => draw(&mut rng),
        };
        let v_alpha = match &outer {
            Some(phi) => v.contract(alpha, std::slice::from_ref(phi))?,
            None => v.clone(),
        };
        let w = v_alpha.contract(&beta_local, &[inner])?;
        cols.push(w.into_values());
    }
    let n = size(beta);
    let m = DMatrix::from_fn(n, samples, |i, k| cols[k][i]);
    let dec = linalg::svd(&m);
    let span_dim = tol.rank(&dec.sigma);
    let span = dec.u.columns(0, span_dim).into_owned();
    let dist = linalg::projector_distance(&span, &expected.basis);
    let deficient = span_dim < expected.dim();
    let pass = !deficient && span_dim == expected.dim() && dist <= threshold;
    Ok(Record::new(beta.key(), dist.as_f64(), threshold.as_f64(), pass)
        .with("alpha", alpha.key())
        .with("samples", samples)
        .with("span_dim", span_dim)
        .with("expected_dim", expected.dim())
        .with("deficient", deficient))
}

/// A violated necessary condition for admissibility.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankViolation {
    pub vertex: Vertex,
    pub constraint: String,
}

impl fmt::Display for RankViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.vertex, self.constraint)
    }
}

impl From<RankViolation> for Error {
    fn from(v: RankViolation) -> Self {
        Error::RankViolation {
            vertex: v.vertex.to_string(),
            constraint: v.constraint,
        }
    }
}

/// Structural checks on a tuple: defined on `tree`, positive, `r_D = 1`.
pub fn check_well_formed(tree: &DimensionTree, shape: &[usize], ranks: &RankTuple) -> Result<()> {
    if ranks.tree() != tree {
        return Err(Error::MalformedRanks("rank tuple belongs to a different tree".into()));
    }
    if shape.len() != tree.d() {
        return Err(Error::ShapeMismatch(format!(
            "shape has {} modes, tree has {}",
            shape.len(),
            tree.d()
        )));
    }
    if let Some((_, v, _)) = ranks.iter().find(|&(_, _, r)| r == 0) {
        return Err(Error::MalformedRanks(format!("rank at {v} must be positive")));
    }
    if ranks.get(tree.root()) != 1 {
        return Err(Error::MalformedRanks("root rank must be 1".into()));
    }
    Ok(())
}

/// First violated necessary condition, checked in this order: leaf bounds
/// `r_j ≤ n_j`; mode-size bounds `r_α ≤ ∏_{j∈α} n_j` and `r_α ≤ ∏_{j∉α} n_j`;
/// `r_α ≤ ∏_{β∈S(α)} r_β`; and `r_β ≤ r_α ∏_{γ∈S(α)∖β} r_γ` for each son.
pub fn necessary_conditions(tree: &DimensionTree, shape: &[usize], ranks: &RankTuple) -> Option<RankViolation> {
    let d = tree.d();
    let prod = |w: &Vertex| -> usize { w.indices().iter().map(|&j| shape[j - 1]).product() };
    let fail = |id: NodeId, constraint: String| {
        Some(RankViolation {
            vertex: tree.vertex(id).clone(),
            constraint,
        })
    };
    for id in tree.ids().filter(|&i| tree.is_leaf(i)) {
        let j = tree.vertex(id).lowest();
        if ranks.get(id) > shape[j - 1] {
            return fail(id, format!("r_{j} = {} > n_{j} = {}", ranks.get(id), shape[j - 1]));
        }
    }
    for id in tree.non_root_ids() {
        let v = tree.vertex(id);
        let inside = prod(v);
        let outside = prod(&v.complement(d).expect("non-root"));
        let r = ranks.get(id);
        if r > inside {
            return fail(id, format!("r = {r} > product of mode sizes inside = {inside}"));
        }
        if r > outside {
            return fail(id, format!("r = {r} > product of mode sizes outside = {outside}"));
        }
    }
    for id in tree.ids().filter(|&i| !tree.is_leaf(i)) {
        let sons = tree.sons(id);
        let son_prod: usize = sons.iter().map(|&s| ranks.get(s)).product();
        if ranks.get(id) > son_prod {
            return fail(id, format!("r = {} > product of son ranks = {son_prod}", ranks.get(id)));
        }
        for &s in sons {
            let others: usize = sons.iter().filter(|&&o| o != s).map(|&o| ranks.get(o)).product();
            let bound = ranks.get(id) * others;
            if ranks.get(s) > bound {
                return fail(
                    s,
                    format!(
                        "r = {} > parent rank times sibling ranks = {bound}",
                        ranks.get(s)
                    ),
                );
            }
        }
    }
    None
}

/// Three-valued admissibility verdict.
#[derive(Clone, Debug)]
pub enum Admissibility<T: Real> {
    /// A tensor realizing the tuple exactly.
    Admissible(Box<TreeTensor<T>>),
    NecessarilyInadmissible(RankViolation),
    /// The necessary conditions hold but no random draw realized the tuple.
    Undetermined { trials: usize },
}

impl<T: Real> Admissibility<T> {
    pub fn is_admissible(&self) -> bool {
        matches!(self, Admissibility::Admissible(_))
    }
}

/// Decides admissibility of `ranks` for `(tree, shape)` as far as a finite
/// procedure can: necessary conditions first, then up to `trials` Gaussian
/// [`TreeTensor`] draws (seeds `seed`, `seed + 1`, …) whose exact tree rank
/// is compared with the tuple.
pub fn is_admissible<T: Real>(
    tree: &DimensionTree,
    shape: &[usize],
    ranks: &RankTuple,
    trials: usize,
    seed: u64,
) -> Result<Admissibility<T>> {
    if trials < 1 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    check_well_formed(tree, shape, ranks)?;
    if let Some(v) = necessary_conditions(tree, shape, ranks) {
        return Ok(Admissibility::NecessarilyInadmissible(v));
    }
    let tol = RankTol::<T>::default();
    for k in 0..trials {
        let t: TreeTensor<T> = random_tree_tensor(tree, shape, ranks, seed.wrapping_add(k as u64))?;
        let got = tree_rank(&t.evaluate(), tree, &tol)?;
        if &got == ranks {
            return Ok(Admissibility::Admissible(Box::new(t)));
        }
    }
    Ok(Admissibility::Undetermined { trials })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Membership {
    /// `FT_r`: tree rank equal to the tuple.
    Exact,
    /// `FT_{≤r}`: tree rank bounded by the tuple.
    Bounded,
}

pub fn in_ft<T: Real>(
    v: &DenseTensor<T>,
    tree: &DimensionTree,
    ranks: &RankTuple,
    tol: &RankTol<T>,
    mode: Membership,
) -> Result<bool> {
    if ranks.tree() != tree {
        return Err(Error::MalformedRanks("rank tuple belongs to a different tree".into()));
    }
    let got = tree_rank(v, tree, tol)?;
    Ok(match mode {
        Membership::Exact => &got == ranks,
        Membership::Bounded => got.leq(ranks),
    })
}

/// Draws a Gaussian tensor of the given shape.
pub fn gaussian_tensor<T: Real, R: Rng + ?Sized>(rng: &mut R, shape: &[usize]) -> DenseTensor<T> {
    let n = shape.iter().product();
    DenseTensor::from_parts(shape.to_vec(), gaussian_vec(rng, n))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vx(ix: &[usize]) -> Vertex {
        Vertex::new(ix.iter().copied()).unwrap()
    }

    fn ghz() -> DenseTensor<f64> {
        let a = DenseTensor::elementary(&[vec![1.0, 0.0], vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let b = DenseTensor::elementary(&[vec![0.0, 1.0], vec![0.0, 1.0], vec![0.0, 1.0]]).unwrap();
        a.add(&b).unwrap()
    }

    fn elem() -> DenseTensor<f64> {
        DenseTensor::elementary(&[vec![1.0, 2.0], vec![-1.0, 0.5, 3.0], vec![2.0, 1.0]]).unwrap()
    }

    #[test]
    fn minimal_subspace_examples() {
        let y = [-1.0, 0.5, 3.0_f64];
        let ny = y.iter().map(|a| a * a).sum::<f64>().sqrt();
        let b = minimal_subspace(&elem(), &vx(&[2]), &RankTol::default()).unwrap();
        assert_eq!(b.dim(), 1);
        // sign-normalized: largest entry (3.0) positive
        for i in 0..3 {
            assert!((b.basis[(i, 0)] - y[i] / ny).abs() < 1e-14);
        }

        let g = minimal_subspace(&ghz(), &vx(&[1]), &RankTol::default()).unwrap();
        assert_eq!(g.dim(), 2);
        assert!(linalg::projector_distance(&g.basis, &DMatrix::identity(2, 2)) < 1e-14);

        let z = minimal_subspace(&DenseTensor::<f64>::zeros(vec![2, 2, 2]), &vx(&[1]), &RankTol::default()).unwrap();
        assert_eq!(z.dim(), 0);

        assert!(minimal_subspace(&ghz(), &vx(&[1, 2, 3]), &RankTol::default()).is_err());
    }

    #[test]
    fn tree_rank_examples() {
        let tol = RankTol::default();
        for tree in [
            DimensionTree::tucker(3).unwrap(),
            DimensionTree::linear(3).unwrap(),
            DimensionTree::balanced(3).unwrap(),
        ] {
            let r = tree_rank(&elem(), &tree, &tol).unwrap();
            assert!(r.as_slice().iter().all(|&x| x == 1));
        }
        let lin = DimensionTree::linear(3).unwrap();
        let r = tree_rank(&ghz(), &lin, &tol).unwrap();
        assert_eq!(r.get(0), 1);
        for v in [vx(&[1]), vx(&[2]), vx(&[3]), vx(&[2, 3])] {
            assert_eq!(r.of(&v), Some(2));
        }
        let zero = tree_rank(&DenseTensor::<f64>::zeros(vec![2, 2, 2]), &lin, &tol).unwrap();
        assert!(zero.as_slice().iter().all(|&x| x == 0));
        assert!(tree_rank(&DenseTensor::<f64>::zeros(vec![2, 2]), &lin, &tol).is_err());
    }

    #[test]
    fn generic_four_way_ranks() {
        let tree = DimensionTree::balanced(4).unwrap();
        let mut rng = seeded_rng(21);
        let v: DenseTensor<f64> = gaussian_tensor(&mut rng, &[2, 2, 2, 2]);
        let r = tree_rank(&v, &tree, &RankTol::default()).unwrap();
        assert_eq!(r.of(&vx(&[1, 2])), Some(4));
        assert_eq!(r.of(&vx(&[3, 4])), Some(4));
        for j in 1..=4 {
            assert_eq!(r.of(&vx(&[j])), Some(2));
        }
    }

    #[test]
    fn parse_rank_specs() {
        let tree = DimensionTree::balanced(4).unwrap();
        let r = RankTuple::parse_spec(&tree, "all:2,root:1").unwrap();
        assert_eq!(r, RankTuple::uniform(&tree, 2));
        let r = RankTuple::parse_spec(&tree, "leaves:2;1 2:3;3 4:3").unwrap();
        assert_eq!(r.of(&vx(&[1, 2])), Some(3));
        assert_eq!(r.of(&vx(&[4])), Some(2));
        assert_eq!(r.get(0), 1);
        assert!(RankTuple::parse_spec(&tree, "leaves:2").is_err());
        assert!(RankTuple::parse_spec(&tree, "all:x").is_err());
        assert!(RankTuple::parse_spec(&tree, "all:2;1 3:2").is_err());
    }

    #[test]
    fn duality_on_elementary_and_threshold_case() {
        let tree = DimensionTree::tucker(3).unwrap();
        let rep = verify_rank_duality(&elem(), &tree, true, &RankTol::default()).unwrap();
        assert_eq!(rep.records.len(), 6);
        for r in &rep.records {
            assert!(r.pass);
            assert_eq!(r.detail["rank"], 1);
            assert_eq!(r.detail["complement_rank"], 1);
        }
        // second singular value sits exactly on the cutoff 1e-10 * σ_max
        let a = DenseTensor::elementary(&[vec![1.0, 0.0], vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let b = DenseTensor::elementary(&[vec![0.0, 1.0], vec![0.0, 1.0], vec![0.0, 1e-10]]).unwrap();
        let v = a.add(&b).unwrap();
        let rep = verify_rank_duality(&v, &tree, true, &RankTol::default()).unwrap();
        assert!(rep.passed());
        assert!(rep.records.iter().all(|r| r.detail["tolerance_sensitive"] == true));
    }

    #[test]
    fn nestedness_examples() {
        let lin = DimensionTree::linear(3).unwrap();
        let rep = verify_nestedness(&ghz(), &lin, &RankTol::default(), 1e-12).unwrap();
        assert_eq!(rep.records.len(), 1);
        assert_eq!(rep.records[0].vertex, "2 3");
        assert!(rep.passed());
        let rep = verify_nestedness(&elem(), &lin, &RankTol::default(), 1e-14).unwrap();
        assert!(rep.passed(), "{rep:?}");
    }

    #[test]
    fn nestedness_handles_interleaved_sons() {
        // sons {1,3} and {2} of the root; interior {1,3} has sons {1},{3}
        let tree = DimensionTree::build(4, "(((1)(3))(2)(4))").unwrap();
        let mut rng = seeded_rng(5);
        let mut v = DenseTensor::<f64>::zeros(vec![2, 3, 2, 2]);
        for _ in 0..2 {
            let f: Vec<Vec<f64>> = [2, 3, 2, 2].iter().map(|&n| gaussian_vec(&mut rng, n)).collect();
            v = v.add(&DenseTensor::elementary(&f).unwrap()).unwrap();
        }
        let rep = verify_nestedness(&v, &tree, &RankTol::default(), 1e-10).unwrap();
        assert!(rep.passed(), "{rep:?}");
    }

    #[test]
    fn spans_from_contractions() {
        let tol = RankTol::default();
        let rec = span_from_contractions(&elem(), &vx(&[1]), &vx(&[1, 2]), 1, 0, Sampling::Independent, &tol, 1e-8)
            .unwrap();
        assert!(rec.pass);
        assert_eq!(rec.detail["span_dim"], 1);

        let rec = span_from_contractions(&ghz(), &vx(&[1]), &vx(&[1, 2]), 4, 3, Sampling::Independent, &tol, 1e-10)
            .unwrap();
        assert!(rec.pass, "{rec:?}");
        assert!(rec.value <= 1e-10);

        let rec = span_from_contractions(&ghz(), &vx(&[1]), &vx(&[1, 2]), 4, 3, Sampling::Repeated, &tol, 1e-8)
            .unwrap();
        assert!(!rec.pass);
        assert_eq!(rec.detail["deficient"], true);

        // α = D: no outer functional
        let rec = span_from_contractions(&ghz(), &vx(&[2, 3]), &vx(&[1, 2, 3]), 6, 1, Sampling::Independent, &tol, 1e-8)
            .unwrap();
        assert!(rec.pass, "{rec:?}");

        assert!(span_from_contractions(&ghz(), &vx(&[1]), &vx(&[1, 2]), 0, 0, Sampling::Independent, &tol, 1e-8).is_err());
        assert!(span_from_contractions(&ghz(), &vx(&[3]), &vx(&[1, 2]), 2, 0, Sampling::Independent, &tol, 1e-8).is_err());
    }

    #[test]
    fn admissibility_examples() {
        let tree = DimensionTree::balanced(3).unwrap();
        let ones = RankTuple::uniform(&tree, 1);
        let verdict = is_admissible::<f64>(&tree, &[2, 3, 2], &ones, 8, 0).unwrap();
        let Admissibility::Admissible(w) = verdict else { panic!("expected witness") };
        let r = tree_rank(&w.evaluate(), &tree, &RankTol::default()).unwrap();
        assert_eq!(r, ones);

        let tucker = DimensionTree::tucker(3).unwrap();
        let twos = RankTuple::uniform(&tucker, 2);
        assert!(is_admissible::<f64>(&tucker, &[2, 2, 2], &twos, 8, 0).unwrap().is_admissible());

        let lin = DimensionTree::linear(3).unwrap();
        let mut bad = RankTuple::uniform(&lin, 2);
        bad.set(lin.node_of(&vx(&[2, 3])).unwrap(), 5);
        match is_admissible::<f64>(&lin, &[2, 2, 2], &bad, 8, 0).unwrap() {
            Admissibility::NecessarilyInadmissible(v) => {
                assert_eq!(v.vertex, vx(&[2, 3]));
                assert!(v.constraint.contains("inside = 4"), "{}", v.constraint);
            }
            other => panic!("unexpected {other:?}"),
        }

        let mut zero = RankTuple::uniform(&lin, 1);
        zero.set(1, 0);
        assert!(is_admissible::<f64>(&lin, &[2, 2, 2], &zero, 8, 0).is_err());
    }

    #[test]
    fn membership_examples() {
        let lin = DimensionTree::linear(3).unwrap();
        let tol = RankTol::default();
        let ones = RankTuple::uniform(&lin, 1);
        let twos = RankTuple::uniform(&lin, 2);
        assert!(in_ft(&elem(), &lin, &ones, &tol, Membership::Exact).unwrap());
        assert!(!in_ft(&elem(), &lin, &twos, &tol, Membership::Exact).unwrap());
        assert!(in_ft(&elem(), &lin, &twos, &tol, Membership::Bounded).unwrap());
        assert!(in_ft(&ghz(), &lin, &twos, &tol, Membership::Exact).unwrap());
    }

    #[test]
    fn subsets_are_enumerated() {
        let s = proper_subsets(3);
        assert_eq!(s.len(), 6);
        assert_eq!(proper_subsets(5).len(), 30);
    }
}
