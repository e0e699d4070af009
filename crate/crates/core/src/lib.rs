//! Tree-based tensor formats over dimension partition trees.
//!
//! A [`DimensionTree`] splits the modes `{1, …, d}` recursively. For a dense
//! tensor `v` every vertex `α` carries the minimal subspace
//! `U_α^min(v) = range M_α(v)`; their dimensions form the tree rank, and a
//! [`TreeTensor`] stores `v` through bases of these subspaces: leaf bases,
//! transfer cores and a root core.
//!
//! Numerical code is generic over [`Real`] (`f32` or `f64`); the aliases at
//! the crate root fix the scalar type.

pub mod approx;
pub mod dense;
pub mod dtree;
pub mod error;
pub mod io;
pub mod linalg;
pub mod minsub;
pub mod real;
pub mod report;
pub mod ttn;

pub use approx::{
    als_refine, best_approx, closedness_experiment, injective_norm, lsc_check, lsc_experiment, truncate,
    AlsOptions, ApproxResult, InjectiveNorm,
};
pub use dense::{DenseTensor, Functional, Matricized};
pub use dtree::{DimensionTree, NodeId, Order, TreeSpec, Vertex};
pub use error::{Error, Result};
pub use linalg::RankTol;
pub use minsub::{
    in_ft, is_admissible, minimal_subspace, span_from_contractions, tree_rank, verify_nestedness,
    verify_rank_duality, Admissibility, Membership, RankTuple, RankViolation, Sampling, SubspaceBasis,
};
pub use real::Real;
pub use report::{ExperimentRecord, ExperimentReport, Record, Report};
pub use ttn::{hsvd, hsvd_detailed, random_tree_tensor, Flags, HsvdOutput, NodeParams, StorageReport, TreeTensor, Truncation};

pub type DenseF64 = DenseTensor<f64>;
pub type DenseF32 = DenseTensor<f32>;
pub type TreeTensorF64 = TreeTensor<f64>;
pub type TreeTensorF32 = TreeTensor<f32>;
pub type SubspaceBasisF64 = SubspaceBasis<f64>;
pub type SubspaceBasisF32 = SubspaceBasis<f32>;
pub type ApproxResultF64 = ApproxResult<f64>;
pub type ApproxResultF32 = ApproxResult<f32>;
pub type RankTolF64 = RankTol<f64>;
pub type RankTolF32 = RankTol<f32>;
