//! Tree-based tensor representations: leaf bases, transfer cores and a root
//! core over a [`DimensionTree`].
//!
//! A transfer core `C^(μ)` has shape `(r_μ, r_β1, …, r_βs)` with the sons in
//! canonical order; the root core has shape `(r_α1, …, r_αs)`. Leaf bases are
//! `n_j × r_j` matrices whose columns span the leaf subspaces.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dense::{rows_to_sorted, DenseTensor};
use crate::dtree::{DimensionTree, NodeId, Order, Vertex};
use crate::error::{Error, Result};
use crate::linalg::{
    self, gaussian_matrix, gaussian_vec, orthonormality_defect, orthonormality_tol, qr_positive, seeded_rng,
    RankTol,
};
use crate::minsub::{check_well_formed, necessary_conditions, RankTuple};
use crate::real::Real;

/// Parameters stored at one vertex.
#[derive(Clone, Debug, PartialEq)]
pub enum NodeParams<T: Real> {
    Leaf(DMatrix<T>),
    Transfer(DenseTensor<T>),
    Root(DenseTensor<T>),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flags {
    pub orthonormal_leaves: bool,
    pub orthonormal_cores: bool,
    pub minimal: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TreeTensor<T: Real> {
    tree: DimensionTree,
    shape: Vec<usize>,
    ranks: RankTuple,
    params: Vec<NodeParams<T>>,
    flags: Flags,
}

impl<T: Real> TreeTensor<T> {
    /// Builds a representation from per-vertex parameters indexed by
    /// [`NodeId`]. Ranks are read off the parameter shapes and checked for
    /// consistency; flags are computed, never trusted.
    pub fn from_params(tree: &DimensionTree, shape: &[usize], params: Vec<NodeParams<T>>) -> Result<Self> {
        let ranks = validate(tree, shape, &params)?;
        let mut t = TreeTensor {
            tree: tree.clone(),
            shape: shape.to_vec(),
            ranks,
            params,
            flags: Flags::default(),
        };
        t.flags = t.compute_flags();
        Ok(t)
    }

    /// Builds a representation from leaf bases (`leaf_bases[j - 1]` for mode
    /// `j`), transfer cores keyed by vertex and the root core.
    pub fn from_parts(
        tree: &DimensionTree,
        shape: &[usize],
        leaf_bases: Vec<DMatrix<T>>,
        mut transfer_cores: BTreeMap<Vertex, DenseTensor<T>>,
        root_core: DenseTensor<T>,
    ) -> Result<Self> {
        if leaf_bases.len() != tree.d() {
            return Err(Error::ShapeMismatch(format!(
                "{} leaf bases for {} modes",
                leaf_bases.len(),
                tree.d()
            )));
        }
        let mut leaves: Vec<Option<DMatrix<T>>> = leaf_bases.into_iter().map(Some).collect();
        let mut root = Some(root_core);
        let mut params = Vec::with_capacity(tree.len());
        for id in tree.ids() {
            let v = tree.vertex(id);
            params.push(if tree.is_root(id) {
                NodeParams::Root(root.take().expect("one root"))
            } else if tree.is_leaf(id) {
                NodeParams::Leaf(leaves[v.lowest() - 1].take().expect("one leaf per mode"))
            } else {
                NodeParams::Transfer(
                    transfer_cores
                        .remove(v)
                        .ok_or_else(|| Error::ShapeMismatch(format!("missing transfer core for {v}")))?,
                )
            });
        }
        if let Some(extra) = transfer_cores.keys().next() {
            return Err(Error::InvalidVertex(format!("transfer core for {extra}, which is not an interior vertex")));
        }
        Self::from_params(tree, shape, params)
    }

    /// The zero tensor: all ranks 0 and empty parameter arrays.
    pub fn zero(tree: &DimensionTree, shape: &[usize]) -> Result<Self> {
        if shape.len() != tree.d() {
            return Err(Error::ShapeMismatch(format!(
                "shape has {} modes, tree has {}",
                shape.len(),
                tree.d()
            )));
        }
        let params = tree
            .ids()
            .map(|id| {
                let s = tree.sons(id).len();
                if tree.is_root(id) {
                    NodeParams::Root(DenseTensor::zeros(vec![0; s]))
                } else if tree.is_leaf(id) {
                    NodeParams::Leaf(DMatrix::zeros(shape[tree.vertex(id).lowest() - 1], 0))
                } else {
                    NodeParams::Transfer(DenseTensor::zeros(vec![0; s + 1]))
                }
            })
            .collect();
        Self::from_params(tree, shape, params)
    }

    pub fn tree(&self) -> &DimensionTree {
        &self.tree
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn ranks(&self) -> &RankTuple {
        &self.ranks
    }

    pub fn flags(&self) -> Flags {
        self.flags
    }

    pub fn params(&self) -> &[NodeParams<T>] {
        &self.params
    }

    pub fn param(&self, id: NodeId) -> &NodeParams<T> {
        &self.params[id]
    }

    pub fn into_params(self) -> Vec<NodeParams<T>> {
        self.params
    }

    /// Leaf basis of mode `j` (1-based).
    pub fn leaf_basis(&self, j: usize) -> &DMatrix<T> {
        match &self.params[self.tree.leaf(j)] {
            NodeParams::Leaf(u) => u,
            _ => unreachable!("leaf node holds a basis"),
        }
    }

    pub fn transfer_core(&self, v: &Vertex) -> Option<&DenseTensor<T>> {
        match self.tree.node_of(v).map(|id| &self.params[id]) {
            Some(NodeParams::Transfer(c)) => Some(c),
            _ => None,
        }
    }

    pub fn root_core(&self) -> &DenseTensor<T> {
        match &self.params[self.tree.root()] {
            NodeParams::Root(c) => c,
            _ => unreachable!("root node holds the root core"),
        }
    }

    /// Replaces the parameters at one vertex.
    pub fn with_param(&self, id: NodeId, p: NodeParams<T>) -> Result<Self> {
        let mut params = self.params.clone();
        params[id] = p;
        Self::from_params(&self.tree, &self.shape, params)
    }

    fn compute_flags(&self) -> Flags {
        let tol = orthonormality_tol::<T>();
        let mut f = Flags {
            orthonormal_leaves: true,
            orthonormal_cores: true,
            minimal: false,
        };
        for p in &self.params {
            match p {
                NodeParams::Leaf(u) => f.orthonormal_leaves &= orthonormality_defect(u) <= tol,
                NodeParams::Transfer(c) => {
                    let axes: Vec<usize> = (1..c.ndim()).collect();
                    f.orthonormal_cores &= orthonormality_defect(&c.unfold(&axes)) <= tol;
                }
                NodeParams::Root(_) => {}
            }
        }
        let params = if f.orthonormal_leaves && f.orthonormal_cores {
            self.params.clone()
        } else {
            orthogonalized_params(&self.tree, &self.params)
        };
        let gram = gramian_ranks(&self.tree, &params, &RankTol::default());
        f.minimal = gram == self.ranks.as_slice();
        f
    }

    /// Materialized bases of every vertex: an `N_μ × r_μ` matrix whose rows
    /// run over the modes of `μ` in increasing order. The root entry is the
    /// full tensor as a single column (no column for the zero tensor).
    pub fn node_bases(&self) -> Vec<DMatrix<T>> {
        materialize(&self.tree, &self.shape, &self.params)
    }

    /// The full tensor.
    pub fn evaluate(&self) -> DenseTensor<T> {
        evaluate_params(&self.tree, &self.shape, &self.params)
    }

    /// Same tensor with orthonormal leaf bases and transfer cores; the
    /// normalization is pushed towards the root.
    pub fn orthogonalize(&self) -> Self {
        let params = orthogonalized_params(&self.tree, &self.params);
        let mut t = TreeTensor {
            tree: self.tree.clone(),
            shape: self.shape.clone(),
            ranks: self.ranks.clone(),
            params,
            flags: Flags::default(),
        };
        t.flags = t.compute_flags();
        t
    }

    /// Ranks read off the cores: the dimension of the subspace each vertex
    /// actually contributes to the represented tensor.
    ///
    /// Computed top-down from the reduced Gramians of an orthogonalized copy,
    /// so the result equals the tree rank of [`TreeTensor::evaluate`] for any
    /// representation, minimal or not.
    pub fn core_ranks(&self, tol: &RankTol<T>) -> RankTuple {
        let params = if self.flags.orthonormal_leaves && self.flags.orthonormal_cores {
            self.params.clone()
        } else {
            orthogonalized_params(&self.tree, &self.params)
        };
        let ranks = gramian_ranks(&self.tree, &params, tol);
        RankTuple::new(self.tree.clone(), ranks).expect("one rank per vertex")
    }

    /// The stored cores' own matricization ranks: `rank M_μ(C^(μ))` for
    /// interior `μ ≠ D`, `rank M_α(C^(D))` for each son `α` of the root,
    /// the column rank of each leaf basis and `1` for a non-zero root core.
    /// A son of the root gets the smaller of its own and the root-core rank.
    pub fn literal_core_ranks(&self, tol: &RankTol<T>) -> RankTuple {
        let root = self.tree.root();
        let mut ranks = vec![0; self.tree.len()];
        for id in self.tree.ids() {
            ranks[id] = match &self.params[id] {
                NodeParams::Leaf(u) => tol.matrix_rank(u),
                NodeParams::Transfer(c) => tol.matrix_rank(&c.unfold(&[0])),
                NodeParams::Root(c) => usize::from(!c.is_zero() && !c.is_empty()),
            };
        }
        let rc = self.root_core();
        for (k, &s) in self.tree.sons(root).iter().enumerate() {
            let lit = tol.matrix_rank(&rc.unfold(&[k]));
            ranks[s] = ranks[s].min(lit);
        }
        RankTuple::new(self.tree.clone(), ranks).expect("one rank per vertex")
    }

    pub fn storage_report(&self) -> StorageReport {
        let parameters: usize = self
            .params
            .iter()
            .map(|p| match p {
                NodeParams::Leaf(u) => u.len(),
                NodeParams::Transfer(c) | NodeParams::Root(c) => c.len(),
            })
            .sum();
        let dense: usize = self.shape.iter().product();
        StorageReport {
            parameters,
            dense,
            ratio: parameters as f64 / dense as f64,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StorageReport {
    pub parameters: usize,
    pub dense: usize,
    pub ratio: f64,
}

/// Materialized vertex bases for raw parameters; see [`TreeTensor::node_bases`].
pub(crate) fn materialize<T: Real>(tree: &DimensionTree, shape: &[usize], params: &[NodeParams<T>]) -> Vec<DMatrix<T>> {
    let mut bases: Vec<Option<DMatrix<T>>> = vec![None; tree.len()];
    for id in tree.traversal(Order::LeavesToRoot) {
        let b = match &params[id] {
            NodeParams::Leaf(u) => u.clone(),
            NodeParams::Transfer(c) | NodeParams::Root(c) => {
                let factors: Vec<&DMatrix<T>> = tree
                    .sons(id)
                    .iter()
                    .map(|&s| bases[s].as_ref().expect("sons before parent"))
                    .collect();
                let k = linalg::kron_all(&factors);
                let coeffs = if tree.is_root(id) {
                    DMatrix::from_column_slice(c.len(), usize::from(!c.is_empty()), c.values())
                } else {
                    let axes: Vec<usize> = (1..c.ndim()).collect();
                    c.unfold(&axes)
                };
                rows_to_sorted(&(k * coeffs), &son_concat_modes(tree, id), shape)
            }
        };
        bases[id] = Some(b);
    }
    bases.into_iter().map(|b| b.expect("every vertex visited")).collect()
}

/// The tensor represented by raw parameters.
pub(crate) fn evaluate_params<T: Real>(tree: &DimensionTree, shape: &[usize], params: &[NodeParams<T>]) -> DenseTensor<T> {
    let root = materialize(tree, shape, params).swap_remove(tree.root());
    let values = if root.ncols() == 0 {
        vec![T::zero(); root.nrows()]
    } else {
        root.column(0).iter().copied().collect()
    };
    DenseTensor::from_parts(shape.to_vec(), values)
}

/// Modes of the sons of `id`, concatenated in canonical son order.
pub(crate) fn son_concat_modes(tree: &DimensionTree, id: NodeId) -> Vec<usize> {
    tree.sons(id)
        .iter()
        .flat_map(|&s| tree.vertex(s).indices().iter().copied())
        .collect()
}

fn validate<T: Real>(tree: &DimensionTree, shape: &[usize], params: &[NodeParams<T>]) -> Result<RankTuple> {
    if shape.len() != tree.d() {
        return Err(Error::ShapeMismatch(format!(
            "shape has {} modes, tree has {}",
            shape.len(),
            tree.d()
        )));
    }
    if shape.contains(&0) {
        return Err(Error::ShapeMismatch("mode sizes must be positive".into()));
    }
    if params.len() != tree.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} parameter blocks for {} vertices",
            params.len(),
            tree.len()
        )));
    }
    let mut ranks = vec![0; tree.len()];
    for id in tree.traversal(Order::LeavesToRoot) {
        let v = tree.vertex(id);
        let mismatch = |msg: String| Error::ShapeMismatch(format!("at {v}: {msg}"));
        let son_ranks: Vec<usize> = tree.sons(id).iter().map(|&s| ranks[s]).collect();
        let son_prod: usize = son_ranks.iter().product();
        match (&params[id], tree.is_root(id), tree.is_leaf(id)) {
            (NodeParams::Leaf(u), false, true) => {
                let n = shape[v.lowest() - 1];
                if u.nrows() != n {
                    return Err(mismatch(format!("leaf basis has {} rows, mode size is {n}", u.nrows())));
                }
                if u.ncols() > n {
                    return Err(Error::RankViolation {
                        vertex: v.to_string(),
                        constraint: format!("r = {} > n = {n}", u.ncols()),
                    });
                }
                if let Some(i) = u.iter().position(|x| !x.finite()) {
                    return Err(Error::NonFinite(i));
                }
                ranks[id] = u.ncols();
            }
            (NodeParams::Transfer(c), false, false) => {
                if c.ndim() != son_ranks.len() + 1 || c.shape()[1..] != son_ranks[..] {
                    return Err(mismatch(format!(
                        "transfer core shape {:?} does not fit son ranks {son_ranks:?}",
                        c.shape()
                    )));
                }
                if c.shape()[0] > son_prod {
                    return Err(Error::RankViolation {
                        vertex: v.to_string(),
                        constraint: format!("r = {} > product of son ranks = {son_prod}", c.shape()[0]),
                    });
                }
                ranks[id] = c.shape()[0];
            }
            (NodeParams::Root(c), true, _) => {
                if c.shape() != son_ranks.as_slice() {
                    return Err(mismatch(format!(
                        "root core shape {:?} does not fit son ranks {son_ranks:?}",
                        c.shape()
                    )));
                }
                ranks[id] = usize::from(!c.is_empty());
            }
            _ => return Err(mismatch("parameter kind does not match the vertex".into())),
        }
    }
    RankTuple::new(tree.clone(), ranks)
}

/// Axis of the parent's core that belongs to son `id`.
fn parent_axis(tree: &DimensionTree, id: NodeId) -> (NodeId, usize) {
    let parent = tree.parent(id).expect("non-root");
    let k = tree.son_position(id).expect("non-root");
    (parent, if tree.is_root(parent) { k } else { k + 1 })
}

fn push_into_parent<T: Real>(tree: &DimensionTree, params: &mut [NodeParams<T>], id: NodeId, r: &DMatrix<T>) {
    let (parent, axis) = parent_axis(tree, id);
    match &mut params[parent] {
        NodeParams::Transfer(c) | NodeParams::Root(c) => {
            *c = c.mode_product(axis, r).expect("factor matches son rank");
        }
        NodeParams::Leaf(_) => unreachable!("leaves have no sons"),
    }
}

pub(crate) fn orthogonalized_params<T: Real>(tree: &DimensionTree, params: &[NodeParams<T>]) -> Vec<NodeParams<T>> {
    let mut out = params.to_vec();
    for id in tree.traversal(Order::LeavesToRoot) {
        let r = match &mut out[id] {
            NodeParams::Leaf(u) => {
                let (q, r) = qr_positive(u);
                *u = q;
                r
            }
            NodeParams::Transfer(c) => {
                let axes: Vec<usize> = (1..c.ndim()).collect();
                let (q, r) = qr_positive(&c.unfold(&axes));
                *c = DenseTensor::fold(&q, &axes, c.shape()).expect("same shape");
                r
            }
            NodeParams::Root(_) => continue,
        };
        push_into_parent(tree, &mut out, id, &r);
    }
    out
}

/// Ranks of the reduced Gramians, top-down, for orthonormal parameters.
fn gramian_ranks<T: Real>(tree: &DimensionTree, params: &[NodeParams<T>], tol: &RankTol<T>) -> Vec<usize> {
    let root = tree.root();
    let mut ranks = vec![0; tree.len()];
    // factor S_μ with S_μ S_μᵀ the Gramian of vertex μ in its own basis
    let mut factor: Vec<Option<DMatrix<T>>> = vec![None; tree.len()];
    for id in tree.traversal(Order::RootToLeaves) {
        if id == root {
            let NodeParams::Root(c) = &params[id] else { unreachable!() };
            ranks[id] = usize::from(!c.is_empty() && !c.is_zero());
            for (k, &s) in tree.sons(id).iter().enumerate() {
                factor[s] = Some(c.unfold(&[k]));
            }
            continue;
        }
        let s_mu = factor[id].take().expect("parent first");
        let dec = linalg::svd(&s_mu);
        ranks[id] = tol.rank(&dec.sigma);
        if let NodeParams::Transfer(c) = &params[id] {
            let compressed = &dec.u * DMatrix::from_diagonal(&DVector::from_vec(dec.sigma.clone()));
            let x = c.mode_product(0, &compressed.transpose()).expect("factor matches rank");
            for (k, &s) in tree.sons(id).iter().enumerate() {
                factor[s] = Some(x.unfold(&[k + 1]));
            }
        }
    }
    ranks
}

/// Truncation control for [`hsvd`]: a relative per-vertex tolerance
/// (`σ_i ≤ rel_tol · σ_max` is discarded) and optional rank caps. When both
/// are present the smaller rank wins.
#[derive(Clone, Debug, PartialEq)]
pub struct Truncation<T: Real> {
    pub rel_tol: T,
    pub caps: Option<RankTuple>,
}

impl<T: Real> Truncation<T> {
    /// Keeps the numerical rank at every vertex.
    pub fn exact() -> Self {
        Truncation {
            rel_tol: T::zero(),
            caps: None,
        }
    }

    pub fn tolerance(rel_tol: T) -> Self {
        Truncation { rel_tol, caps: None }
    }

    pub fn caps(caps: RankTuple) -> Self {
        Truncation {
            rel_tol: T::zero(),
            caps: Some(caps),
        }
    }

    fn rank_tol(&self) -> RankTol<T> {
        RankTol::relative(self.rel_tol.max(T::default_rank_rtol()))
    }
}

/// Result of [`hsvd_detailed`].
#[derive(Clone, Debug)]
pub struct HsvdOutput<T: Real> {
    pub tensor: TreeTensor<T>,
    /// Discarded singular values per vertex, indexed by [`NodeId`].
    pub discarded: Vec<Vec<T>>,
    pub warnings: Vec<String>,
}

/// Hierarchical SVD of a dense tensor.
pub fn hsvd<T: Real>(v: &DenseTensor<T>, tree: &DimensionTree, control: &Truncation<T>) -> Result<TreeTensor<T>> {
    hsvd_detailed(v, tree, control).map(|o| o.tensor)
}

/// Hierarchical SVD, leaves to root.
///
/// Leaf bases are leading left singular vectors of `M_{j}(v)`. The tensor is
/// then projected onto them and every interior vertex takes the leading
/// left singular vectors of the projected tensor unfolded over its sons'
/// coefficient axes. The projections commute, so the squared residual is at
/// most the sum of all discarded squared singular values.
pub fn hsvd_detailed<T: Real>(
    v: &DenseTensor<T>,
    tree: &DimensionTree,
    control: &Truncation<T>,
) -> Result<HsvdOutput<T>> {
    if v.ndim() != tree.d() {
        return Err(Error::ShapeMismatch(format!(
            "tensor has {} modes, tree {} has {}",
            v.ndim(),
            tree,
            tree.d()
        )));
    }
    if let Some(caps) = &control.caps {
        if caps.tree() != tree {
            return Err(Error::MalformedRanks("rank caps belong to a different tree".into()));
        }
        if caps.get(tree.root()) != 1 && !v.is_zero() {
            return Err(Error::RankViolation {
                vertex: tree.vertex(tree.root()).to_string(),
                constraint: format!("root rank must be 1 for a non-zero tensor, got {}", caps.get(tree.root())),
            });
        }
    }
    if control.rel_tol < T::zero() || !control.rel_tol.finite() {
        return Err(Error::InvalidArgument("tolerance must be finite and non-negative".into()));
    }
    let mut discarded: Vec<Vec<T>> = vec![Vec::new(); tree.len()];
    let mut warnings = Vec::new();
    let zero = |discarded, warnings| -> Result<HsvdOutput<T>> {
        Ok(HsvdOutput {
            tensor: TreeTensor::zero(tree, v.shape())?,
            discarded,
            warnings,
        })
    };
    if v.is_zero() {
        return zero(discarded, warnings);
    }
    let tol = control.rank_tol();
    let cap = |id: NodeId| control.caps.as_ref().map_or(usize::MAX, |c| c.get(id));
    let select = |id: NodeId, sigma: &[T], warnings: &mut Vec<String>| -> usize {
        let r = tol.rank(sigma).min(cap(id));
        if r > 0 && r < sigma.len() {
            let smax = sigma[0];
            let (a, b) = (sigma[r - 1], sigma[r]);
            if a - b <= T::of(1e-12) * smax && b > tol.threshold(smax) {
                warnings.push(format!(
                    "boundary_tie at {}: sigma_{} = {:e}, sigma_{} = {:e}",
                    tree.vertex(id),
                    r,
                    a,
                    r + 1,
                    b
                ));
            }
        }
        r
    };

    let mut params: Vec<Option<NodeParams<T>>> = vec![None; tree.len()];
    let mut work = v.clone();
    for j in 1..=tree.d() {
        let id = tree.leaf(j);
        let m = v.unfold(&[j - 1]);
        let dec = linalg::svd(&m);
        let r = select(id, &dec.sigma, &mut warnings);
        discarded[id] = dec.sigma[r..].to_vec();
        if r == 0 {
            return zero(discarded, warnings);
        }
        let u = dec.u.columns(0, r).into_owned();
        work = work.mode_product(j - 1, &u.transpose())?;
        params[id] = Some(NodeParams::Leaf(u));
    }

    // axis k of `work` carries the coefficients of vertex labels[k]
    let mut labels: Vec<NodeId> = (1..=tree.d()).map(|j| tree.leaf(j)).collect();
    for id in tree.traversal(Order::LeavesToRoot) {
        if tree.is_leaf(id) {
            continue;
        }
        let axes: Vec<usize> = tree
            .sons(id)
            .iter()
            .map(|s| labels.iter().position(|l| l == s).expect("son on the frontier"))
            .collect();
        if tree.is_root(id) {
            let core = work.permute_axes(&axes);
            params[id] = Some(NodeParams::Root(core));
            break;
        }
        let m = work.unfold(&axes);
        let dec = linalg::svd(&m);
        let r = select(id, &dec.sigma, &mut warnings);
        discarded[id] = dec.sigma[r..].to_vec();
        if r == 0 {
            return zero(discarded, warnings);
        }
        let ut = dec.u.columns(0, r).transpose();
        let mut core_shape = vec![r];
        core_shape.extend(axes.iter().map(|&a| work.shape()[a]));
        // row-major values of uᵀ
        let core = DenseTensor::from_parts(core_shape, dec.u.columns(0, r).iter().copied().collect());
        let reduced = &ut * m;
        let mut rest: Vec<usize> = (0..work.ndim()).filter(|a| !axes.contains(a)).collect();
        let mut new_shape = vec![r];
        new_shape.extend(rest.iter().map(|&a| work.shape()[a]));
        work = DenseTensor::from_parts(new_shape, reduced.transpose().iter().copied().collect());
        let mut new_labels = vec![id];
        new_labels.extend(rest.drain(..).map(|a| labels[a]));
        labels = new_labels;
        params[id] = Some(NodeParams::Transfer(core));
    }
    let params = params.into_iter().map(|p| p.expect("every vertex visited")).collect();
    Ok(HsvdOutput {
        tensor: TreeTensor::from_params(tree, v.shape(), params)?,
        discarded,
        warnings,
    })
}

/// Gaussian representation with ranks `ranks`: leaf bases are orthonormalized
/// Gaussian matrices, cores are Gaussian. Parameters are drawn in vertex-id
/// order, so a seed fixes the result bit for bit.
pub fn random_tree_tensor<T: Real>(
    tree: &DimensionTree,
    shape: &[usize],
    ranks: &RankTuple,
    seed: u64,
) -> Result<TreeTensor<T>> {
    check_well_formed(tree, shape, ranks)?;
    if let Some(v) = necessary_conditions(tree, shape, ranks) {
        return Err(v.into());
    }
    let mut rng = seeded_rng(seed);
    let mut params = Vec::with_capacity(tree.len());
    for id in tree.ids() {
        let son_ranks: Vec<usize> = tree.sons(id).iter().map(|&s| ranks.get(s)).collect();
        params.push(if tree.is_root(id) {
            let n = son_ranks.iter().product();
            NodeParams::Root(DenseTensor::from_parts(son_ranks, gaussian_vec(&mut rng, n)))
        } else if tree.is_leaf(id) {
            let n = shape[tree.vertex(id).lowest() - 1];
            let g: DMatrix<T> = gaussian_matrix(&mut rng, n, ranks.get(id));
            NodeParams::Leaf(qr_positive(&g).0)
        } else {
            let mut s = vec![ranks.get(id)];
            s.extend(son_ranks);
            let n = s.iter().product();
            NodeParams::Transfer(DenseTensor::from_parts(s, gaussian_vec(&mut rng, n)))
        });
    }
    TreeTensor::from_params(tree, shape, params)
}
