//! Approximation in `FT_{≤r}`: truncation, alternating least squares,
//! multi-start best approximation, injective-norm estimation, and the
//! semicontinuity and closedness experiments.
//!
//! All distances are Frobenius norms.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::Rng;
use serde_json::Value;

use crate::dense::{rows_from_sorted, rows_to_sorted, DenseTensor, Functional};
use crate::dtree::{DimensionTree, NodeId, Order, Vertex};
use crate::error::{Error, Result};
use crate::linalg::{self, gaussian_vec, pinv, seeded_rng, RankTol};
use crate::minsub::{check_well_formed, in_ft, necessary_conditions, tree_rank, Membership, RankTuple};
use crate::real::Real;
use crate::report::{ExperimentRecord, ExperimentReport};
use crate::ttn::{
    evaluate_params, hsvd_detailed, materialize, orthogonalized_params, random_tree_tensor, son_concat_modes,
    NodeParams, Truncation, TreeTensor,
};

/// Note attached to every experiment report.
pub const CONVERGENCE_NOTE: &str =
    "weak convergence replaced by norm convergence (equivalent in finite dimensions)";

#[derive(Clone, Debug)]
pub struct ApproxResult<T: Real> {
    pub approximant: TreeTensor<T>,
    /// `‖target − evaluate(approximant)‖_F`.
    pub residual: T,
    /// ALS sweeps of the returned run.
    pub iterations: usize,
    pub restarts_used: usize,
    /// Singular values discarded by the truncation initializer.
    pub discarded: BTreeMap<Vertex, Vec<T>>,
    /// Residual before the first sweep and after every sweep, one list per
    /// restart.
    pub histories: Vec<Vec<T>>,
    pub warnings: Vec<String>,
}

impl<T: Real> ApproxResult<T> {
    /// `sqrt(Σ_vertices Σ_discarded σ²)`.
    pub fn discarded_bound(&self) -> T {
        self.discarded
            .values()
            .flatten()
            .fold(T::zero(), |acc, &s| acc + s * s)
            .sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlsOptions<T: Real> {
    pub max_iters: usize,
    /// A sweep improving the residual by less than `stall_tol · ‖target‖` ends
    /// the iteration.
    pub stall_tol: T,
}

impl<T: Real> Default for AlsOptions<T> {
    fn default() -> Self {
        AlsOptions {
            max_iters: 50,
            stall_tol: T::of(1e-12).max(T::of(10.0) * T::eps()),
        }
    }
}

fn check_caps(tree: &DimensionTree, shape: &[usize], caps: &RankTuple) -> Result<()> {
    check_well_formed(tree, shape, caps)?;
    if let Some(v) = necessary_conditions(tree, shape, caps) {
        return Err(v.into());
    }
    Ok(())
}

fn residual_of<T: Real>(target: &DenseTensor<T>, approx: &DenseTensor<T>) -> T {
    target
        .values()
        .iter()
        .zip(approx.values())
        .fold(T::zero(), |acc, (&a, &b)| acc + (a - b) * (a - b))
        .sqrt()
}

/// Hierarchical SVD with rank caps `caps`.
pub fn truncate<T: Real>(v: &DenseTensor<T>, tree: &DimensionTree, caps: &RankTuple) -> Result<ApproxResult<T>> {
    check_caps(tree, v.shape(), caps)?;
    let out = hsvd_detailed(v, tree, &Truncation::caps(caps.clone()))?;
    let residual = residual_of(v, &out.tensor.evaluate());
    let discarded = tree
        .ids()
        .map(|id| (tree.vertex(id).clone(), out.discarded[id].clone()))
        .collect();
    Ok(ApproxResult {
        approximant: out.tensor,
        residual,
        iterations: 0,
        restarts_used: 0,
        discarded,
        histories: Vec::new(),
        warnings: out.warnings,
    })
}

/// Environments `E_μ` (`r_μ × N_{μ^c}`, columns over the complement modes
/// in increasing order) with `M_μ(v) = B_μ E_μ`; the root gets `[1]`.
fn environments<T: Real>(
    tree: &DimensionTree,
    shape: &[usize],
    params: &[NodeParams<T>],
    bases: &[DMatrix<T>],
) -> Vec<DMatrix<T>> {
    let d = tree.d();
    let mut env: Vec<Option<DMatrix<T>>> = vec![None; tree.len()];
    env[tree.root()] = Some(DMatrix::from_element(1, 1, T::one()));
    for id in tree.traversal(Order::RootToLeaves) {
        let core = match &params[id] {
            NodeParams::Leaf(_) => continue,
            NodeParams::Transfer(c) => c.clone(),
            NodeParams::Root(c) => {
                let mut s = vec![1];
                s.extend_from_slice(c.shape());
                c.reshape(s).expect("same length")
            }
        };
        let e_mu = env[id].clone().expect("parent first");
        let outside: Vec<usize> = tree.vertex(id).complement(d).map(|c| c.indices().to_vec()).unwrap_or_default();
        let sons = tree.sons(id);
        for (k, &s) in sons.iter().enumerate() {
            let mut perm = vec![1 + k];
            perm.extend((0..sons.len()).filter(|&l| l != k).map(|l| 1 + l));
            perm.push(0);
            let p = core.permute_axes(&perm).unfold(&[0]);
            let e_mu_t = e_mu.transpose();
            let mut factors: Vec<&DMatrix<T>> =
                sons.iter().filter(|&&o| o != s).map(|&o| &bases[o]).collect();
            factors.push(&e_mu_t);
            let kr = linalg::kron_all(&factors);
            let mut modes: Vec<usize> = sons
                .iter()
                .filter(|&&o| o != s)
                .flat_map(|&o| tree.vertex(o).indices().iter().copied())
                .collect();
            modes.extend(&outside);
            let e_t = rows_to_sorted(&(kr * p.transpose()), &modes, shape);
            env[s] = Some(e_t.transpose());
        }
    }
    env.into_iter().map(|e| e.expect("every vertex visited")).collect()
}

/// Least-squares optimal parameters at `id` with all others fixed.
fn solve_vertex<T: Real>(
    tree: &DimensionTree,
    target: &DenseTensor<T>,
    params: &[NodeParams<T>],
    id: NodeId,
) -> NodeParams<T> {
    let shape = target.shape();
    let bases = materialize(tree, shape, params);
    let env = environments(tree, shape, params, &bases);
    let e_pinv = pinv(&env[id]);
    let t_mu = if tree.is_root(id) {
        DMatrix::from_column_slice(target.len(), 1, target.values())
    } else {
        target.unfold(&tree.vertex(id).modes0())
    };
    match &params[id] {
        NodeParams::Leaf(_) => NodeParams::Leaf(t_mu * e_pinv),
        NodeParams::Transfer(c) | NodeParams::Root(c) => {
            let factors: Vec<&DMatrix<T>> = tree.sons(id).iter().map(|&s| &bases[s]).collect();
            let k = linalg::kron_all(&factors);
            let t_sons = rows_from_sorted(&t_mu, &son_concat_modes(tree, id), shape);
            let x = pinv(&k) * t_sons * e_pinv;
            if tree.is_root(id) {
                NodeParams::Root(DenseTensor::from_parts(c.shape().to_vec(), x.iter().copied().collect()))
            } else {
                let axes: Vec<usize> = (1..c.ndim()).collect();
                NodeParams::Transfer(DenseTensor::fold(&x, &axes, c.shape()).expect("same shape"))
            }
        }
    }
}

/// One leaves-to-root sweep on orthogonalized parameters. A vertex update
/// is kept only if it does not increase the residual.
fn sweep<T: Real>(tree: &DimensionTree, target: &DenseTensor<T>, params: Vec<NodeParams<T>>) -> (Vec<NodeParams<T>>, T) {
    let shape = target.shape();
    let mut params = orthogonalized_params(tree, &params);
    let mut current = residual_of(target, &evaluate_params(tree, shape, &params));
    for id in tree.traversal(Order::LeavesToRoot) {
        let update = solve_vertex(tree, target, &params, id);
        let old = std::mem::replace(&mut params[id], update);
        let r = residual_of(target, &evaluate_params(tree, shape, &params));
        if r.finite() && r <= current {
            current = r;
        } else {
            params[id] = old;
        }
    }
    (params, current)
}

struct AlsRun<T: Real> {
    params: Vec<NodeParams<T>>,
    residual: T,
    iterations: usize,
    history: Vec<T>,
}

fn als_run<T: Real>(target: &DenseTensor<T>, init: &TreeTensor<T>, opts: &AlsOptions<T>) -> AlsRun<T> {
    let tree = init.tree();
    let scale = target.frobenius_norm();
    let mut best = init.params().to_vec();
    let mut best_res = residual_of(target, &init.evaluate());
    let mut history = vec![best_res];
    let mut iterations = 0;
    let degenerate = init.ranks().get(tree.root()) == 0;
    if degenerate || best_res <= T::of(1e-12) * scale {
        return AlsRun {
            params: best,
            residual: best_res,
            iterations,
            history,
        };
    }
    let mut params = best.clone();
    let mut prev = best_res;
    while iterations < opts.max_iters {
        let (next, r) = sweep(tree, target, params);
        params = next;
        iterations += 1;
        history.push(r);
        if r < best_res {
            best_res = r;
            best = params.clone();
        }
        if prev - r < opts.stall_tol * scale {
            break;
        }
        prev = r;
    }
    AlsRun {
        params: best,
        residual: best_res,
        iterations,
        history,
    }
}

/// Alternating least squares from `init`, sweeping leaves to root. The
/// returned residual never exceeds that of `init`.
pub fn als_refine<T: Real>(target: &DenseTensor<T>, init: &TreeTensor<T>, opts: &AlsOptions<T>) -> Result<ApproxResult<T>> {
    if target.shape() != init.shape() {
        return Err(Error::ShapeMismatch(format!(
            "target shape {:?}, representation shape {:?}",
            target.shape(),
            init.shape()
        )));
    }
    let run = als_run(target, init, opts);
    let mut warnings = Vec::new();
    monotonicity_warnings(&run.history, 0, &mut warnings);
    Ok(ApproxResult {
        approximant: TreeTensor::from_params(init.tree(), init.shape(), run.params)?,
        residual: run.residual,
        iterations: run.iterations,
        restarts_used: 1,
        discarded: BTreeMap::new(),
        histories: vec![run.history],
        warnings,
    })
}

/// Absolute slack allowed between consecutive sweep residuals.
pub const MONOTONE_SLACK: f64 = 1e-12;

/// Number of sweeps whose residual exceeds the previous one by more than
/// [`MONOTONE_SLACK`].
pub fn monotonicity_violations<T: Real>(history: &[T]) -> usize {
    history
        .windows(2)
        .filter(|w| w[1] > w[0] + T::of(MONOTONE_SLACK))
        .count()
}

fn monotonicity_warnings<T: Real>(history: &[T], restart: usize, out: &mut Vec<String>) {
    let n = monotonicity_violations(history);
    if n > 0 {
        out.push(format!("non_monotone: restart {restart} has {n} increasing sweeps"));
    }
}

/// Multi-start ALS: restart 0 starts from [`truncate`], restart `k ≥ 1` from
/// a random representation with the truncation's ranks drawn with seed
/// `seed + k`. The lowest residual wins, ties by lowest restart index.
pub fn best_approx<T: Real>(
    target: &DenseTensor<T>,
    tree: &DimensionTree,
    caps: &RankTuple,
    restarts: usize,
    seed: u64,
    opts: &AlsOptions<T>,
) -> Result<ApproxResult<T>> {
    if restarts < 1 {
        return Err(Error::InvalidArgument("restarts must be at least 1".into()));
    }
    let trunc = truncate(target, tree, caps)?;
    let ranks = trunc.approximant.ranks().clone();
    let mut warnings = trunc.warnings.clone();
    let mut histories = Vec::with_capacity(restarts);
    let mut best: Option<(usize, AlsRun<T>)> = None;
    for k in 0..restarts {
        let init = if k == 0 {
            trunc.approximant.clone()
        } else if ranks.get(tree.root()) == 0 {
            break;
        } else {
            random_tree_tensor(tree, target.shape(), &ranks, seed.wrapping_add(k as u64))?
        };
        let run = als_run(target, &init, opts);
        monotonicity_warnings(&run.history, k, &mut warnings);
        histories.push(run.history.clone());
        if best.as_ref().is_none_or(|(_, b)| run.residual < b.residual) {
            best = Some((k, run));
        }
    }
    let used = histories.len();
    let (_, run) = best.expect("at least one restart");
    Ok(ApproxResult {
        approximant: TreeTensor::from_params(tree, target.shape(), run.params)?,
        residual: run.residual,
        iterations: run.iterations,
        restarts_used: used,
        discarded: trunc.discarded,
        histories,
        warnings,
    })
}

/// Lower bound on the injective norm with unit witness vectors achieving it.
#[derive(Clone, Debug, PartialEq)]
pub struct InjectiveNorm<T: Real> {
    pub estimate: T,
    pub witness: Vec<Vec<T>>,
    pub restart: usize,
}

/// `(id_j ⊗ ⊗_{k≠j} φ_k)(v)`.
fn contract_except<T: Real>(v: &DenseTensor<T>, phis: &[Vec<T>], j: usize) -> Vec<T> {
    let functionals: Vec<Functional<T>> = (0..phis.len())
        .filter(|&k| k != j)
        .map(|k| Functional::new(Vertex::singleton(k + 1), phis[k].clone()))
        .collect();
    v.contract(&Vertex::singleton(j + 1), &functionals)
        .expect("functionals cover the other modes")
        .into_values()
}

fn normalized<T: Real>(w: Vec<T>) -> Option<Vec<T>> {
    let n = linalg::euclid_norm(&w);
    (n > T::zero()).then(|| w.into_iter().map(|x| x / n).collect())
}

/// Estimates `‖v‖_∨ = max |⟨v, φ_1 ⊗ … ⊗ φ_d⟩|` over unit vectors by
/// alternating rank-one power iterations. Restart 0 starts from the leading
/// left singular vectors of the mode unfoldings, the others from Gaussian
/// vectors (seed `seed + k`).
pub fn injective_norm<T: Real>(v: &DenseTensor<T>, restarts: usize, iters: usize, seed: u64) -> Result<InjectiveNorm<T>> {
    if v.is_zero() {
        return Err(Error::ZeroTensor);
    }
    if restarts < 1 || iters < 1 {
        return Err(Error::InvalidArgument("restarts and iters must be at least 1".into()));
    }
    let d = v.ndim();
    let mut best: Option<InjectiveNorm<T>> = None;
    for k in 0..restarts {
        let mut phis: Vec<Vec<T>> = if k == 0 {
            (0..d)
                .map(|j| linalg::svd(&v.unfold(&[j])).u.column(0).iter().copied().collect())
                .collect()
        } else {
            let mut rng = seeded_rng(seed.wrapping_add(k as u64));
            (0..d)
                .map(|j| {
                    let g = gaussian_vec(&mut rng, v.shape()[j]);
                    normalized(g).unwrap_or_else(|| unit(v.shape()[j]))
                })
                .collect()
        };
        let mut value = T::zero();
        for _ in 0..iters {
            for j in 0..d {
                if let Some(u) = normalized(contract_except(v, &phis, j)) {
                    phis[j] = u;
                }
            }
            let w = contract_except(v, &phis, d - 1);
            let next = w.iter().zip(&phis[d - 1]).fold(T::zero(), |a, (&x, &y)| a + x * y).magnitude();
            let done = (next - value).magnitude() <= T::of(4.0) * T::eps() * next;
            value = next;
            if done {
                break;
            }
        }
        if best.as_ref().is_none_or(|b| value > b.estimate) {
            best = Some(InjectiveNorm {
                estimate: value,
                witness: phis,
                restart: k,
            });
        }
    }
    Ok(best.expect("at least one restart"))
}

fn unit<T: Real>(n: usize) -> Vec<T> {
    let mut e = vec![T::zero(); n];
    e[0] = T::one();
    e
}

/// JSON map from vertex key to rank.
pub fn rank_map(r: &RankTuple) -> Value {
    Value::Object(r.iter().map(|(_, v, k)| (v.key(), Value::from(k))).collect())
}

/// Checks `rank(limit)_α ≤ min over the tail of rank(v_n)_α` at every
/// vertex, the tail being the last `⌈len/2⌉` iterates.
pub fn lsc_check<T: Real>(
    id: usize,
    seed: u64,
    tree: &DimensionTree,
    limit: &DenseTensor<T>,
    sequence: &[DenseTensor<T>],
    tol: &RankTol<T>,
) -> Result<ExperimentRecord> {
    if sequence.is_empty() {
        return Err(Error::InvalidArgument("empty sequence".into()));
    }
    let tail = &sequence[sequence.len() / 2..];
    let limit_ranks = tree_rank(limit, tree, tol)?;
    let mut tail_min = vec![usize::MAX; tree.len()];
    for v in tail {
        let r = tree_rank(v, tree, tol)?;
        for (id, _, k) in r.iter() {
            tail_min[id] = tail_min[id].min(k);
        }
    }
    let tail_min = RankTuple::new(tree.clone(), tail_min)?;
    let violations: Vec<String> = tree
        .ids()
        .filter(|&i| limit_ranks.get(i) > tail_min.get(i))
        .map(|i| tree.vertex(i).key())
        .collect();
    let distance = limit.sub(&sequence[sequence.len() - 1])?.frobenius_norm();
    Ok(ExperimentRecord::new(id, seed, violations.is_empty())
        .with("limit_ranks", rank_map(&limit_ranks))
        .with("tail_min_ranks", rank_map(&tail_min))
        .with("violations", violations)
        .with("final_distance", distance.as_f64()))
}

/// Vertices whose directions beyond the first get damped: each non-root
/// vertex with rank ≥ 2 independently with probability 1/2, at least one.
fn pick_damped<R: Rng>(rng: &mut R, tree: &DimensionTree, ranks: &RankTuple) -> Vec<NodeId> {
    let candidates: Vec<NodeId> = tree.non_root_ids().filter(|&i| ranks.get(i) >= 2).collect();
    let mut chosen: Vec<NodeId> = candidates.iter().copied().filter(|_| rng.random_bool(0.5)).collect();
    if chosen.is_empty() && !candidates.is_empty() {
        chosen.push(candidates[rng.random_range(0..candidates.len())]);
    }
    chosen
}

/// Scales leaf columns `2..` and transfer-core slices `i_μ ≥ 2` by `lambda`.
fn damp<T: Real>(params: &[NodeParams<T>], chosen: &[NodeId], lambda: T) -> Vec<NodeParams<T>> {
    let mut out = params.to_vec();
    for &id in chosen {
        match &mut out[id] {
            NodeParams::Leaf(u) => {
                for c in 1..u.ncols() {
                    u.column_mut(c).scale_mut(lambda);
                }
            }
            NodeParams::Transfer(c) => {
                let slice: usize = c.shape()[1..].iter().product();
                let values: Vec<T> = c
                    .values()
                    .iter()
                    .enumerate()
                    .map(|(i, &x)| if i >= slice { x * lambda } else { x })
                    .collect();
                *c = DenseTensor::from_parts(c.shape().to_vec(), values);
            }
            NodeParams::Root(_) => {}
        }
    }
    out
}

fn experiment_seed(seed: u64, id: usize) -> u64 {
    seed.wrapping_add(id as u64)
}

/// Lower semicontinuity of the minimal-subspace dimensions along convergent
/// sequences: `v_n` is a random representation with ranks `ranks` whose
/// non-leading directions at random vertices are damped by `1/n`; the limit
/// has them removed.
pub fn lsc_experiment<T: Real>(
    tree: &DimensionTree,
    shape: &[usize],
    ranks: &RankTuple,
    num_sequences: usize,
    steps: usize,
    seed: u64,
    tol: &RankTol<T>,
) -> Result<ExperimentReport> {
    if steps < 1 {
        return Err(Error::InvalidArgument("steps must be at least 1".into()));
    }
    let mut records = Vec::with_capacity(num_sequences);
    for id in 0..num_sequences {
        let s = experiment_seed(seed, id);
        let t: TreeTensor<T> = random_tree_tensor(tree, shape, ranks, s)?;
        let mut rng = seeded_rng(s ^ 0x5eed_1a5c);
        let chosen = pick_damped(&mut rng, tree, ranks);
        let seq: Vec<DenseTensor<T>> = (1..=steps)
            .map(|n| evaluate_params(tree, shape, &damp(t.params(), &chosen, T::one() / T::of_usize(n))))
            .collect();
        let limit = evaluate_params(tree, shape, &damp(t.params(), &chosen, T::zero()));
        let damped: Vec<String> = chosen.iter().map(|&i| tree.vertex(i).key()).collect();
        records.push(lsc_check(id, s, tree, &limit, &seq, tol)?.with("damped", damped));
    }
    Ok(ExperimentReport {
        experiment: "lsc".into(),
        note: CONVERGENCE_NOTE.into(),
        records,
    })
}

fn add_scaled<T: Real>(a: &[NodeParams<T>], b: &[NodeParams<T>], c: T) -> Vec<NodeParams<T>> {
    a.iter()
        .zip(b)
        .map(|(x, y)| match (x, y) {
            (NodeParams::Leaf(u), NodeParams::Leaf(w)) => NodeParams::Leaf(u + w * c),
            (NodeParams::Transfer(u), NodeParams::Transfer(w)) => {
                NodeParams::Transfer(u.add(&w.scale(c)).expect("same shape"))
            }
            (NodeParams::Root(u), NodeParams::Root(w)) => NodeParams::Root(u.add(&w.scale(c)).expect("same shape")),
            _ => unreachable!("same tree"),
        })
        .collect()
}

/// Closedness of `FT_{≤r}` under limits. Even sequences damp a random
/// representation with ranks `ranks` towards a lower-rank limit. Odd
/// sequences, when every non-root rank is at least 2, take difference
/// quotients `n (f(θ + Δ/n) − f(θ))` of a representation `θ` with ranks
/// `⌊r/2⌋`, whose limit is the derivative of `f` at `θ` in direction `Δ`.
/// Every record checks that the limit lies in `FT_{≤r}`.
pub fn closedness_experiment<T: Real>(
    tree: &DimensionTree,
    shape: &[usize],
    ranks: &RankTuple,
    num_sequences: usize,
    steps: usize,
    seed: u64,
    tol: &RankTol<T>,
) -> Result<ExperimentReport> {
    if steps < 1 {
        return Err(Error::InvalidArgument("steps must be at least 1".into()));
    }
    check_caps(tree, shape, ranks)?;
    let half = RankTuple::from_fn(tree, |i| if tree.is_root(i) { 1 } else { ranks.get(i) / 2 });
    let tangent_ok = tree.non_root_ids().all(|i| ranks.get(i) >= 2) && necessary_conditions(tree, shape, &half).is_none();
    let mut records = Vec::with_capacity(num_sequences);
    for id in 0..num_sequences {
        let s = experiment_seed(seed, id);
        let (kind, seq, limit) = if tangent_ok && id % 2 == 1 {
            let theta: TreeTensor<T> = random_tree_tensor(tree, shape, &half, s)?;
            let delta: TreeTensor<T> = random_tree_tensor(tree, shape, &half, s ^ 0xde17a)?;
            let base = theta.evaluate();
            let seq: Vec<DenseTensor<T>> = (1..=steps)
                .map(|n| {
                    let h = T::one() / T::of_usize(n);
                    let moved = evaluate_params(tree, shape, &add_scaled(theta.params(), delta.params(), h));
                    moved.sub(&base).expect("same shape").scale(T::of_usize(n))
                })
                .collect();
            let mut limit = DenseTensor::zeros(shape.to_vec());
            for k in tree.ids() {
                let mut p = theta.params().to_vec();
                p[k] = delta.params()[k].clone();
                limit = limit.add(&evaluate_params(tree, shape, &p))?;
            }
            ("tangent", seq, limit)
        } else {
            let t: TreeTensor<T> = random_tree_tensor(tree, shape, ranks, s)?;
            let mut rng = seeded_rng(s ^ 0x5eed_1a5c);
            let chosen = pick_damped(&mut rng, tree, ranks);
            let seq: Vec<DenseTensor<T>> = (1..=steps)
                .map(|n| evaluate_params(tree, shape, &damp(t.params(), &chosen, T::one() / T::of_usize(n))))
                .collect();
            let limit = evaluate_params(tree, shape, &damp(t.params(), &chosen, T::zero()));
            ("damped", seq, limit)
        };
        let member = in_ft(&limit, tree, ranks, tol, Membership::Bounded)?;
        let seq_in_set = seq
            .iter()
            .map(|v| in_ft(v, tree, ranks, tol, Membership::Bounded))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .all(|b| b);
        let limit_ranks = tree_rank(&limit, tree, tol)?;
        let last = &seq[seq.len() - 1];
        let scale = limit.frobenius_norm().max(T::eps());
        let distance = limit.sub(last)?.frobenius_norm() / scale;
        records.push(
            ExperimentRecord::new(id, s, member)
                .with("kind", kind)
                .with("limit_ranks", rank_map(&limit_ranks))
                .with("sequence_in_set", seq_in_set)
                .with("final_relative_distance", distance.as_f64()),
        );
    }
    Ok(ExperimentReport {
        experiment: "closedness".into(),
        note: CONVERGENCE_NOTE.into(),
        records,
    })
}
