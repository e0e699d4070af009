//! Dense matrix kernels: sorted thin SVD, numerical rank, QR with a fixed
//! sign convention, projectors, Kronecker products and seeded Gaussian draws.

use nalgebra::{DMatrix, SVD};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::real::Real;

/// Thin SVD `m = u * diag(sigma) * vt` with `sigma` sorted non-increasing.
///
/// Each column of `u` is sign-normalized so that its largest-magnitude entry
/// is positive (first such entry on ties); the matching row of `vt` flips with it.
#[derive(Clone, Debug)]
pub struct Svd<T: Real> {
    pub u: DMatrix<T>,
    pub sigma: Vec<T>,
    pub vt: DMatrix<T>,
}

pub fn svd<T: Real>(m: &DMatrix<T>) -> Svd<T> {
    let (rows, cols) = m.shape();
    let k = rows.min(cols);
    if k == 0 {
        return Svd {
            u: DMatrix::zeros(rows, 0),
            sigma: Vec::new(),
            vt: DMatrix::zeros(0, cols),
        };
    }
    let (u0, s0, vt0) = unordered_svd(m);

    let mut order: Vec<usize> = (0..k).collect();
    // stable: equal values keep their original relative order
    order.sort_by(|&a, &b| s0[b].partial_cmp(&s0[a]).unwrap_or(std::cmp::Ordering::Equal));

    let mut u = DMatrix::zeros(rows, k);
    let mut vt = DMatrix::zeros(k, cols);
    let mut sigma = Vec::with_capacity(k);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = u0.column(src).clone_owned();
        let mut row = vt0.row(src).clone_owned();
        if sign_of_dominant(col.as_slice()) < T::zero() {
            col.neg_mut();
            row.neg_mut();
        }
        u.set_column(dst, &col);
        vt.set_row(dst, &row);
        sigma.push(s0[src]);
    }
    Svd { u, sigma, vt }
}

/// Unsorted thin SVD. Tall inputs are reduced by QR first and wide inputs are
/// transposed. The small square factor goes through nalgebra; if its output
/// does not reproduce the factor (seen on some rank-deficient inputs), a
/// one-sided Jacobi iteration is used instead.
fn unordered_svd<T: Real>(m: &DMatrix<T>) -> (DMatrix<T>, Vec<T>, DMatrix<T>) {
    if m.nrows() < m.ncols() {
        let (u, s, vt) = unordered_svd(&m.transpose());
        return (vt.transpose(), s, u.transpose());
    }
    let (q, r) = if m.nrows() > m.ncols() {
        let qr = m.clone().qr();
        (Some(qr.q()), qr.r())
    } else {
        (None, m.clone())
    };
    let (ur, s, vt) = square_svd(&r);
    match q {
        Some(q) => (q * ur, s, vt),
        None => (ur, s, vt),
    }
}

fn square_svd<T: Real>(r: &DMatrix<T>) -> (DMatrix<T>, Vec<T>, DMatrix<T>) {
    let n = r.nrows();
    let scale = r.norm();
    let tol = T::of(100.0) * T::of(n as f64) * T::eps() * scale;
    let dec = SVD::new(r.clone(), true, true);
    if let (Some(u), Some(vt)) = (dec.u, dec.v_t) {
        let s: Vec<T> = dec.singular_values.iter().copied().collect();
        let rec = &u * DMatrix::from_diagonal(&dec.singular_values) * &vt;
        let unit = T::of(100.0) * T::of(n as f64) * T::eps();
        if (rec - r).norm() <= tol
            && orthonormality_defect(&u) <= unit
            && orthonormality_defect(&vt.transpose()) <= unit
        {
            return (u, s, vt);
        }
    }
    jacobi_svd(r)
}

/// One-sided Jacobi SVD of a square matrix.
fn jacobi_svd<T: Real>(r: &DMatrix<T>) -> (DMatrix<T>, Vec<T>, DMatrix<T>) {
    let n = r.nrows();
    let mut a = r.clone();
    let mut v = DMatrix::<T>::identity(n, n);
    let eps = T::eps();
    for _ in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = a.column(p).norm_squared();
                let beta = a.column(q).norm_squared();
                let gamma = a.column(p).dot(&a.column(q));
                if gamma.magnitude() <= eps * (alpha * beta).sqrt() || gamma == T::zero() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::of(2.0) * gamma);
                let sign = if zeta < T::zero() { -T::one() } else { T::one() };
                let t = sign / (zeta.magnitude() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                for mat in [&mut a, &mut v] {
                    for i in 0..n {
                        let xp = mat[(i, p)];
                        let xq = mat[(i, q)];
                        mat[(i, p)] = c * xp - s * xq;
                        mat[(i, q)] = s * xp + c * xq;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let sigma: Vec<T> = (0..n).map(|j| a.column(j).norm()).collect();
    let smax = sigma.iter().fold(T::zero(), |x, &y| if y > x { y } else { x });
    let cutoff = T::of(n as f64) * eps * smax;
    let mut u = DMatrix::<T>::zeros(n, n);
    let mut filled = vec![false; n];
    for j in 0..n {
        if sigma[j] > cutoff {
            u.set_column(j, &(a.column(j) / sigma[j]));
            filled[j] = true;
        }
    }
    // complete the null directions against the unit vectors
    let mut e = 0;
    for j in 0..n {
        if filled[j] {
            continue;
        }
        while e < n {
            let mut x = nalgebra::DVector::<T>::zeros(n);
            x[e] = T::one();
            e += 1;
            for _ in 0..2 {
                for k in (0..n).filter(|&k| filled[k]) {
                    let proj = u.column(k).dot(&x);
                    x -= u.column(k) * proj;
                }
            }
            let nx = x.norm();
            if nx > T::of(1e-3) {
                u.set_column(j, &(x / nx));
                filled[j] = true;
                break;
            }
        }
    }
    (u, sigma, v.transpose())
}

fn sign_of_dominant<T: Real>(v: &[T]) -> T {
    let mut best = T::zero();
    let mut best_abs = T::zero();
    for &x in v {
        if x.magnitude() > best_abs {
            best_abs = x.magnitude();
            best = x;
        }
    }
    if best < T::zero() {
        -T::one()
    } else {
        T::one()
    }
}

/// Singular values only, sorted non-increasing.
pub fn singular_values<T: Real>(m: &DMatrix<T>) -> Vec<T> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    svd(m).sigma
}

/// Numerical-rank cutoff: `sigma_i` counts iff `sigma_i > rel * sigma_max + abs`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RankTol<T: Real> {
    pub rel: T,
    pub abs: T,
}

impl<T: Real> Default for RankTol<T> {
    fn default() -> Self {
        RankTol {
            rel: T::default_rank_rtol(),
            abs: T::zero(),
        }
    }
}

impl<T: Real> RankTol<T> {
    pub fn new(rel: T, abs: T) -> Self {
        RankTol { rel, abs }
    }

    pub fn relative(rel: T) -> Self {
        RankTol { rel, abs: T::zero() }
    }

    pub fn threshold(&self, sigma_max: T) -> T {
        self.rel * sigma_max + self.abs
    }

    /// `sigma` must be sorted non-increasing.
    pub fn rank(&self, sigma: &[T]) -> usize {
        let Some(&smax) = sigma.first() else { return 0 };
        let tau = self.threshold(smax);
        sigma.iter().take_while(|&&s| s > tau).count()
    }

    pub fn matrix_rank(&self, m: &DMatrix<T>) -> usize {
        self.rank(&singular_values(m))
    }
}

/// Thin QR of a matrix with at least as many rows as columns; `r` has a
/// non-negative diagonal.
pub fn qr_positive<T: Real>(m: &DMatrix<T>) -> (DMatrix<T>, DMatrix<T>) {
    let (rows, cols) = m.shape();
    assert!(rows >= cols, "qr_positive needs rows >= cols ({rows} < {cols})");
    if cols == 0 {
        return (DMatrix::zeros(rows, 0), DMatrix::zeros(0, 0));
    }
    let qr = m.clone().qr();
    let mut q = qr.q();
    let mut r = qr.r();
    for k in 0..cols {
        if r[(k, k)] < T::zero() {
            q.column_mut(k).neg_mut();
            r.row_mut(k).neg_mut();
        }
    }
    (q, r)
}

/// Max-entry deviation of `qᵀq` from the identity.
pub fn orthonormality_defect<T: Real>(q: &DMatrix<T>) -> T {
    let g = q.transpose() * q;
    let mut worst = T::zero();
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let target = if i == j { T::one() } else { T::zero() };
            let e = (g[(i, j)] - target).magnitude();
            if e > worst {
                worst = e;
            }
        }
    }
    worst
}

pub(crate) fn orthonormality_tol<T: Real>() -> T {
    T::of(1e4) * T::eps()
}

/// Orthogonal projector onto the column span of an orthonormal `q`.
pub fn projector<T: Real>(q: &DMatrix<T>) -> DMatrix<T> {
    q * q.transpose()
}

pub fn spectral_norm<T: Real>(m: &DMatrix<T>) -> T {
    singular_values(m).first().copied().unwrap_or_else(T::zero)
}

/// Spectral-norm distance between the projectors onto two orthonormal bases
/// of subspaces of the same ambient space.
pub fn projector_distance<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>) -> T {
    assert_eq!(a.nrows(), b.nrows(), "ambient dimensions differ");
    spectral_norm(&(projector(a) - projector(b)))
}

pub fn kron<T: Real>(a: &DMatrix<T>, b: &DMatrix<T>) -> DMatrix<T> {
    a.kronecker(b)
}

/// Kronecker product of a list, first factor slowest; empty list gives `[1]`.
pub fn kron_all<T: Real>(factors: &[&DMatrix<T>]) -> DMatrix<T> {
    let mut acc = DMatrix::from_element(1, 1, T::one());
    for f in factors {
        acc = acc.kronecker(*f);
    }
    acc
}

/// Moore-Penrose pseudo-inverse, dropping singular values at or below
/// `max(rows, cols) * eps * sigma_max`.
pub fn pinv<T: Real>(m: &DMatrix<T>) -> DMatrix<T> {
    let (rows, cols) = m.shape();
    let dec = svd(m);
    let Some(&smax) = dec.sigma.first() else {
        return DMatrix::zeros(cols, rows);
    };
    let cut = T::of_usize(rows.max(cols)) * T::eps() * smax;
    let mut out = DMatrix::zeros(cols, rows);
    for (k, &s) in dec.sigma.iter().enumerate() {
        if s > cut {
            let v = dec.vt.row(k).transpose();
            let u = dec.u.column(k);
            out += (v * u.transpose()) / s;
        }
    }
    out
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R) -> T {
    T::of(rng.sample::<f64, _>(StandardNormal))
}

pub fn gaussian_vec<T: Real, R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<T> {
    (0..n).map(|_| gaussian(rng)).collect()
}

/// Gaussian matrix filled row by row.
pub fn gaussian_matrix<T: Real, R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<T> {
    DMatrix::from_row_iterator(rows, cols, (0..rows * cols).map(|_| gaussian(rng)))
}

pub fn euclid_norm<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |acc, &x| acc + x * x).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svd_reconstructs_rank_deficient_tall_matrix() {
        #[rustfmt::skip]
        let m = DMatrix::from_row_slice(12, 3, &[
            -0.014954850007505405, 0.39099540024619267, 0.1174113666473176,
            -0.5751399166104658, -1.485872637606267, 0.030728420364521707,
            0.7408027229403401, 0.5513714284259783, -0.4093925190236677,
            -0.7373725133170935, -3.107418093647982, -0.28696932942178544,
            -0.027416178593649615, -0.071261113997322, 0.001347669939779058,
            0.1019077888686223, 0.31084831945010516, 0.0074668944789511305,
            -0.03591284425656757, -0.14876150741285926, -0.01327579749082939,
            0.21479976336620185, 0.6205920923345896, 0.006344752295896042,
            0.5116986632354288, -0.23179899929140524, -0.4490702223546271,
            0.38959160160182793, 0.2129379703516754, -0.2362094733400893,
            -2.0924346845678268, 0.47839135455002285, 1.708906727040268,
            -0.9042645281283556, 0.9372392367450277, 0.9367944118263405,
        ]);
        let d = svd(&m);
        let rec = &d.u * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(d.sigma.clone())) * &d.vt;
        assert!((rec - &m).norm() < 1e-13 * m.norm());
        assert!(orthonormality_defect(&d.u) < 1e-13);
        assert!(d.sigma[2] < 1e-14 * d.sigma[0]);
    }

    #[test]
    fn jacobi_matches_known_spectrum() {
        let m = DMatrix::from_row_slice(3, 3, &[2.0, 0.0, 0.0, 0.0, -5.0, 0.0, 0.0, 0.0, 0.0]);
        let (u, s, vt) = jacobi_svd(&m);
        let rec = &u * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(s.clone())) * &vt;
        assert!((rec - &m).norm() < 1e-14);
        assert!(orthonormality_defect(&u) < 1e-14);
        let mut s = s;
        s.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert_eq!(s, vec![5.0, 2.0, 0.0]);
    }

    #[test]
    fn svd_is_sorted_and_sign_normalized() {
        let m = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, -3.0, 0.0, 0.0]);
        let d = svd(&m);
        assert_eq!(d.sigma.len(), 2);
        assert!((d.sigma[0] - 3.0_f64).abs() < 1e-14);
        assert!((d.sigma[1] - 1.0).abs() < 1e-14);
        // dominant entry of each column is positive
        for k in 0..2 {
            let col = d.u.column(k);
            let (i, _) = col.iter().enumerate().fold((0, 0.0_f64), |acc, (i, x)| {
                if x.abs() > acc.1 {
                    (i, x.abs())
                } else {
                    acc
                }
            });
            assert!(col[i] > 0.0);
        }
        let back = &d.u * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(d.sigma.clone())) * &d.vt;
        assert!((back - m).norm() < 1e-14);
    }

    #[test]
    fn rank_of_zero_matrix_is_zero() {
        let tol = RankTol::<f64>::default();
        assert_eq!(tol.matrix_rank(&DMatrix::zeros(3, 4)), 0);
        assert_eq!(tol.rank(&[]), 0);
    }

    #[test]
    fn rank_threshold_is_strict() {
        let tol = RankTol::new(0.5, 0.0);
        assert_eq!(tol.rank(&[2.0_f64, 1.0, 0.5]), 1);
        assert_eq!(tol.rank(&[2.0_f64, 1.0000001, 0.5]), 2);
    }

    #[test]
    fn qr_has_positive_diagonal_and_reconstructs() {
        let mut rng = seeded_rng(7);
        let m: DMatrix<f64> = gaussian_matrix(&mut rng, 5, 3);
        let (q, r) = qr_positive(&m);
        assert!(orthonormality_defect(&q) < 1e-14);
        for k in 0..3 {
            assert!(r[(k, k)] >= 0.0);
        }
        assert!((q * r - m).norm() < 1e-13);
    }

    #[test]
    fn pinv_solves_full_rank_least_squares() {
        let mut rng = seeded_rng(3);
        let a: DMatrix<f64> = gaussian_matrix(&mut rng, 6, 3);
        let p = pinv(&a);
        let eye = &p * &a;
        assert!((eye - DMatrix::identity(3, 3)).norm() < 1e-12);
    }

    #[test]
    fn projector_distance_of_equal_spans_vanishes() {
        let mut rng = seeded_rng(11);
        let a: DMatrix<f64> = gaussian_matrix(&mut rng, 5, 2);
        let (q1, _) = qr_positive(&a);
        let mix = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, -1.0, 0.5]);
        let (q2, _) = qr_positive(&(&a * mix));
        assert!(projector_distance(&q1, &q2) < 1e-12);
    }

    #[test]
    fn kron_all_of_empty_list_is_unit() {
        let k: DMatrix<f64> = kron_all(&[]);
        assert_eq!(k.shape(), (1, 1));
        assert_eq!(k[(0, 0)], 1.0);
    }
}
