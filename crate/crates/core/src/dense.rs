//! Dense d-way tensors in row-major order (last mode fastest).
//!
//! Besides arithmetic this module provides the matricization `M_β`, its
//! inverse, mode-wise (elementary) operators and partial contractions with
//! functionals `(id_keep ⊗ φ)(v)`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::dtree::Vertex;
use crate::error::{Error, Result};
use crate::real::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct DenseTensor<T: Real> {
    shape: Vec<usize>,
    values: Vec<T>,
}

/// A linear functional on the modes of `modes`, with coefficients in
/// row-major order over the sorted mode set.
#[derive(Clone, Debug, PartialEq)]
pub struct Functional<T: Real> {
    pub modes: Vertex,
    pub coefficients: Vec<T>,
}

impl<T: Real> Functional<T> {
    pub fn new(modes: Vertex, coefficients: Vec<T>) -> Self {
        Functional { modes, coefficients }
    }

    /// Point evaluation at a 0-based multi-index over `modes`.
    pub fn coordinate(modes: Vertex, shape: &[usize], at: &[usize]) -> Self {
        let sizes: Vec<usize> = modes.indices().iter().map(|&j| shape[j - 1]).collect();
        let mut coefficients = vec![T::zero(); sizes.iter().product()];
        coefficients[flat_index(&sizes, at)] = T::one();
        Functional { modes, coefficients }
    }
}

/// `M_β(v)`: rows indexed by the modes in `rows`, columns by the rest, both
/// lexicographic over sorted index sets.
#[derive(Clone, Debug, PartialEq)]
pub struct Matricized<T: Real> {
    pub rows: Vertex,
    pub cols: Vertex,
    pub matrix: DMatrix<T>,
}

pub fn strides(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1; shape.len()];
    for k in (0..shape.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * shape[k + 1];
    }
    s
}

pub fn flat_index(shape: &[usize], idx: &[usize]) -> usize {
    idx.iter().zip(shape).fold(0, |acc, (&i, &n)| acc * n + i)
}

/// Advances a row-major multi-index; returns `false` after the last one.
pub fn next_index(shape: &[usize], idx: &mut [usize]) -> bool {
    for k in (0..shape.len()).rev() {
        idx[k] += 1;
        if idx[k] < shape[k] {
            return true;
        }
        idx[k] = 0;
    }
    false
}

impl<T: Real> DenseTensor<T> {
    /// Validated constructor: positive mode sizes, matching length, finite values.
    pub fn new(shape: Vec<usize>, values: Vec<T>) -> Result<Self> {
        if shape.is_empty() {
            return Err(Error::ShapeMismatch("a tensor needs at least one mode".into()));
        }
        if let Some(k) = shape.iter().position(|&n| n == 0) {
            return Err(Error::ShapeMismatch(format!("mode {} has size 0", k + 1)));
        }
        Self::with_shape(shape, values)
    }

    /// Like [`DenseTensor::new`] but admits zero-size modes, used for the
    /// coefficient arrays of rank-0 representations.
    pub fn with_shape(shape: Vec<usize>, values: Vec<T>) -> Result<Self> {
        let n: usize = shape.iter().product();
        if n != values.len() {
            return Err(Error::ShapeMismatch(format!(
                "shape {shape:?} needs {n} values, got {}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|x| !x.finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(DenseTensor { shape, values })
    }

    pub(crate) fn from_parts(shape: Vec<usize>, values: Vec<T>) -> Self {
        debug_assert_eq!(shape.iter().product::<usize>(), values.len());
        DenseTensor { shape, values }
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let n = shape.iter().product();
        DenseTensor {
            shape,
            values: vec![T::zero(); n],
        }
    }

    /// `f` receives 0-based multi-indices in row-major order.
    pub fn from_fn(shape: Vec<usize>, mut f: impl FnMut(&[usize]) -> T) -> Self {
        let n: usize = shape.iter().product();
        let mut values = Vec::with_capacity(n);
        if n > 0 {
            let mut idx = vec![0; shape.len()];
            loop {
                values.push(f(&idx));
                if !next_index(&shape, &mut idx) {
                    break;
                }
            }
        }
        DenseTensor { shape, values }
    }

    /// `⊗_j factors[j]`.
    pub fn elementary(factors: &[Vec<T>]) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::ShapeMismatch("no factors".into()));
        }
        let shape: Vec<usize> = factors.iter().map(Vec::len).collect();
        if shape.contains(&0) {
            return Err(Error::ShapeMismatch("empty factor".into()));
        }
        let t = Self::from_fn(shape, |idx| {
            idx.iter()
                .zip(factors)
                .fold(T::one(), |acc, (&i, f)| acc * f[i])
        });
        Self::with_shape(t.shape, t.values)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn ndim(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Entry at a 0-based multi-index.
    pub fn get(&self, idx: &[usize]) -> T {
        self.values[flat_index(&self.shape, idx)]
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        DenseTensor {
            shape: self.shape.clone(),
            values: self.values.iter().map(|&x| f(x)).collect(),
        }
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch(format!(
                "{:?} vs {:?}",
                self.shape, other.shape
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(DenseTensor {
            shape: self.shape.clone(),
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(DenseTensor {
            shape: self.shape.clone(),
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| a - b).collect(),
        })
    }

    pub fn scale(&self, c: T) -> Self {
        self.map(|x| x * c)
    }

    pub fn inner(&self, other: &Self) -> Result<T> {
        self.check_same_shape(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(T::zero(), |acc, (&a, &b)| acc + a * b))
    }

    pub fn norm_sq(&self) -> T {
        self.values.iter().fold(T::zero(), |acc, &x| acc + x * x)
    }

    pub fn frobenius_norm(&self) -> T {
        self.norm_sq().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|x| *x == T::zero())
    }

    /// `‖self − other‖_F / ‖other‖_F` (absolute error when `other` is zero).
    pub fn relative_error(&self, reference: &Self) -> Result<T> {
        let diff = self.sub(reference)?.frobenius_norm();
        let r = reference.frobenius_norm();
        Ok(if r > T::zero() { diff / r } else { diff })
    }

    /// Reorders axes: axis `k` of the result is axis `perm[k]` of `self`.
    pub fn permute_axes(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.ndim(), "permutation length");
        if perm.iter().enumerate().all(|(k, &p)| k == p) {
            return self.clone();
        }
        let old_strides = strides(&self.shape);
        let new_shape: Vec<usize> = perm.iter().map(|&p| self.shape[p]).collect();
        let src_strides: Vec<usize> = perm.iter().map(|&p| old_strides[p]).collect();
        let n = self.values.len();
        let mut values = Vec::with_capacity(n);
        if n > 0 {
            let mut idx = vec![0; new_shape.len()];
            loop {
                let off: usize = idx.iter().zip(&src_strides).map(|(i, s)| i * s).sum();
                values.push(self.values[off]);
                if !next_index(&new_shape, &mut idx) {
                    break;
                }
            }
        }
        DenseTensor {
            shape: new_shape,
            values,
        }
    }

    pub fn reshape(&self, shape: Vec<usize>) -> Result<Self> {
        if shape.iter().product::<usize>() != self.values.len() {
            return Err(Error::ShapeMismatch(format!(
                "cannot reshape {:?} into {shape:?}",
                self.shape
            )));
        }
        Ok(DenseTensor {
            shape,
            values: self.values.clone(),
        })
    }

    /// Unfolding with rows over the 0-based axes `row_axes` in the given
    /// order and columns over the remaining axes in increasing order.
    pub fn unfold(&self, row_axes: &[usize]) -> DMatrix<T> {
        let perm = unfold_permutation(self.ndim(), row_axes);
        let rows: usize = row_axes.iter().map(|&a| self.shape[a]).product();
        let cols: usize = perm[row_axes.len()..].iter().map(|&a| self.shape[a]).product();
        let p = self.permute_axes(&perm);
        DMatrix::from_row_slice(rows, cols, &p.values)
    }

    /// Inverse of [`DenseTensor::unfold`] for a tensor of shape `shape`.
    pub fn fold(m: &DMatrix<T>, row_axes: &[usize], shape: &[usize]) -> Result<Self> {
        let perm = unfold_permutation(shape.len(), row_axes);
        let permuted_shape: Vec<usize> = perm.iter().map(|&a| shape[a]).collect();
        let rows: usize = row_axes.iter().map(|&a| shape[a]).product();
        let total: usize = shape.iter().product();
        if m.nrows() != rows || m.nrows() * m.ncols() != total {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} matrix does not fold into {shape:?}",
                m.nrows(),
                m.ncols()
            )));
        }
        let values: Vec<T> = m.transpose().iter().copied().collect();
        let t = DenseTensor {
            shape: permuted_shape,
            values,
        };
        Ok(t.permute_axes(&inverse_permutation(&perm)))
    }

    fn check_proper(&self, beta: &Vertex) -> Result<Vertex> {
        let d = self.ndim();
        if beta.highest() > d {
            return Err(Error::IndexOutOfRange {
                index: beta.highest(),
                d,
            });
        }
        beta.complement(d).ok_or_else(|| {
            Error::InvalidVertex(format!("{beta} is the full mode set; matricization needs a proper subset"))
        })
    }

    /// `M_β(v)`.
    pub fn matricize(&self, beta: &Vertex) -> Result<Matricized<T>> {
        let cols = self.check_proper(beta)?;
        Ok(Matricized {
            rows: beta.clone(),
            cols,
            matrix: self.unfold(&beta.modes0()),
        })
    }

    /// Inverse of [`DenseTensor::matricize`].
    pub fn dematricize(m: &Matricized<T>, shape: &[usize]) -> Result<Self> {
        let d = shape.len();
        if m.rows.highest() > d || m.rows.complement(d).as_ref() != Some(&m.cols) {
            return Err(Error::ShapeMismatch(format!(
                "row set {} and column set {} do not split {d} modes",
                m.rows, m.cols
            )));
        }
        Self::fold(&m.matrix, &m.rows.modes0(), shape)
    }

    /// Multiplies mode `axis` (0-based) by `a`: `w[.., i, ..] = Σ_k a[i, k] v[.., k, ..]`.
    pub fn mode_product(&self, axis: usize, a: &DMatrix<T>) -> Result<Self> {
        if a.ncols() != self.shape[axis] {
            return Err(Error::ShapeMismatch(format!(
                "operator has {} columns, mode {} has size {}",
                a.ncols(),
                axis + 1,
                self.shape[axis]
            )));
        }
        let m = self.unfold(&[axis]);
        let mut shape = self.shape.clone();
        shape[axis] = a.nrows();
        Self::fold(&(a * m), &[axis], &shape)
    }

    /// `(⊗_j A_j) v` with identity on modes absent from `ops` (1-based keys).
    pub fn apply_elementary_operator(&self, ops: &BTreeMap<usize, DMatrix<T>>) -> Result<Self> {
        let mut out = self.clone();
        for (&j, a) in ops {
            if j == 0 || j > self.ndim() {
                return Err(Error::IndexOutOfRange {
                    index: j,
                    d: self.ndim(),
                });
            }
            out = out.mode_product(j - 1, a)?;
        }
        Ok(out)
    }

    /// `(id_keep ⊗ φ_1 ⊗ … ⊗ φ_m)(v)`, a tensor over the modes of `keep`.
    ///
    /// The functionals' mode sets must partition the complement of `keep`.
    pub fn contract(&self, keep: &Vertex, functionals: &[Functional<T>]) -> Result<Self> {
        let d = self.ndim();
        if keep.highest() > d {
            return Err(Error::IndexOutOfRange { index: keep.highest(), d });
        }
        let mut owner = vec![None; d];
        for j in keep.indices() {
            owner[j - 1] = Some(usize::MAX);
        }
        for (f, phi) in functionals.iter().enumerate() {
            for &j in phi.modes.indices() {
                if j > d {
                    return Err(Error::IndexOutOfRange { index: j, d });
                }
                if owner[j - 1].is_some() {
                    return Err(Error::PartitionViolation(format!(
                        "mode {j} is claimed twice"
                    )));
                }
                owner[j - 1] = Some(f);
            }
            let need: usize = phi.modes.indices().iter().map(|&j| self.shape[j - 1]).product();
            if phi.coefficients.len() != need {
                return Err(Error::ShapeMismatch(format!(
                    "functional on {} needs {need} coefficients, got {}",
                    phi.modes,
                    phi.coefficients.len()
                )));
            }
        }
        if let Some(j) = owner.iter().position(Option::is_none) {
            return Err(Error::PartitionViolation(format!("mode {} is not covered", j + 1)));
        }
        let Some(rest) = keep.complement(d) else {
            return Ok(self.clone());
        };

        // Kronecker weight over the complement, columns in lexicographic order.
        let rest_modes = rest.indices();
        let rest_shape: Vec<usize> = rest_modes.iter().map(|&j| self.shape[j - 1]).collect();
        let sub_shapes: Vec<Vec<usize>> = functionals
            .iter()
            .map(|phi| phi.modes.indices().iter().map(|&j| self.shape[j - 1]).collect())
            .collect();
        // position of each complement mode inside its functional
        let slot: Vec<(usize, usize)> = rest_modes
            .iter()
            .map(|&j| {
                let f = owner[j - 1].expect("covered");
                let p = functionals[f].modes.indices().iter().position(|&m| m == j).expect("member");
                (f, p)
            })
            .collect();
        let n_rest: usize = rest_shape.iter().product();
        let mut weight = Vec::with_capacity(n_rest);
        let mut idx = vec![0; rest_shape.len()];
        let mut sub: Vec<Vec<usize>> = sub_shapes.iter().map(|s| vec![0; s.len()]).collect();
        loop {
            for (k, &(f, p)) in slot.iter().enumerate() {
                sub[f][p] = idx[k];
            }
            let w = functionals.iter().enumerate().fold(T::one(), |acc, (f, phi)| {
                acc * phi.coefficients[flat_index(&sub_shapes[f], &sub[f])]
            });
            weight.push(w);
            if !next_index(&rest_shape, &mut idx) {
                break;
            }
        }
        let m = self.unfold(&keep.modes0());
        let w = nalgebra::DVector::from_vec(weight);
        let out = m * w;
        let shape: Vec<usize> = keep.indices().iter().map(|&j| self.shape[j - 1]).collect();
        Ok(DenseTensor {
            shape,
            values: out.iter().copied().collect(),
        })
    }
}

/// `row_axes` followed by the remaining axes in increasing order.
pub(crate) fn unfold_permutation(ndim: usize, row_axes: &[usize]) -> Vec<usize> {
    let mut perm = row_axes.to_vec();
    perm.extend((0..ndim).filter(|a| !row_axes.contains(a)));
    perm
}

pub(crate) fn inverse_permutation(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (k, &p) in perm.iter().enumerate() {
        inv[p] = k;
    }
    inv
}

/// Reorders the rows of `m`, whose row index runs over the modes `modes`
/// (in that order, sizes from `shape`, 1-based labels), into increasing
/// mode order.
pub(crate) fn rows_to_sorted<T: Real>(m: &DMatrix<T>, modes: &[usize], shape: &[usize]) -> DMatrix<T> {
    let mut order: Vec<usize> = (0..modes.len()).collect();
    order.sort_by_key(|&k| modes[k]);
    if order.iter().enumerate().all(|(k, &o)| k == o) {
        return m.clone();
    }
    let mut tshape: Vec<usize> = modes.iter().map(|&j| shape[j - 1]).collect();
    tshape.push(m.ncols());
    let t = DenseTensor::from_parts(tshape, m.transpose().iter().copied().collect());
    let mut perm = order;
    perm.push(modes.len());
    let p = t.permute_axes(&perm);
    DMatrix::from_row_slice(m.nrows(), m.ncols(), &p.values)
}

/// Inverse of [`rows_to_sorted`]: rows in increasing mode order become rows
/// over `modes` in the given order.
pub(crate) fn rows_from_sorted<T: Real>(m: &DMatrix<T>, modes: &[usize], shape: &[usize]) -> DMatrix<T> {
    let mut sorted = modes.to_vec();
    sorted.sort_unstable();
    // position in `sorted` of each requested mode
    let perm: Vec<usize> = modes
        .iter()
        .map(|j| sorted.iter().position(|s| s == j).expect("same set"))
        .collect();
    if perm.iter().enumerate().all(|(k, &p)| k == p) {
        return m.clone();
    }
    let mut tshape: Vec<usize> = sorted.iter().map(|&j| shape[j - 1]).collect();
    tshape.push(m.ncols());
    let t = DenseTensor::from_parts(tshape, m.transpose().iter().copied().collect());
    let mut full = perm;
    full.push(modes.len());
    let p = t.permute_axes(&full);
    DMatrix::from_row_slice(m.nrows(), m.ncols(), &p.values)
}
