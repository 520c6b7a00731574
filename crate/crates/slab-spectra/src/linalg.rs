//! Dense linear algebra helpers on top of nalgebra.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;
pub type RMat = DMatrix<f64>;
pub type RVec = DVector<f64>;

pub fn to_complex(m: &RMat) -> CMat {
    m.map(|x| C64::new(x, 0.0))
}

pub fn cvec(v: &RVec) -> CVec {
    v.map(|x| C64::new(x, 0.0))
}

/// Eigen-decomposition of a real symmetric matrix, ascending eigenvalues.
pub fn sym_eigen(m: &RMat) -> (Vec<f64>, RMat) {
    let se = nalgebra::SymmetricEigen::new(m.clone());
    let mut idx: Vec<usize> = (0..se.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let vals = idx.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vecs = RMat::zeros(m.nrows(), m.ncols());
    for (k, &i) in idx.iter().enumerate() {
        vecs.set_column(k, &se.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// Eigen-decomposition of a complex Hermitian matrix, ascending eigenvalues.
pub fn herm_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let h = hermitian_part(m);
    let se = nalgebra::SymmetricEigen::new(h);
    let mut idx: Vec<usize> = (0..se.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let vals = idx.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vecs = CMat::zeros(m.nrows(), m.ncols());
    for (k, &i) in idx.iter().enumerate() {
        vecs.set_column(k, &se.eigenvectors.column(i));
    }
    (vals, vecs)
}

pub fn herm_eigenvalues(m: &CMat) -> Vec<f64> {
    let mut v: Vec<f64> = hermitian_part(m).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// (A + A*)/2
pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// (A - A*)/(2i)
pub fn imaginary_part(m: &CMat) -> CMat {
    (m - m.adjoint()) * C64::new(0.0, -0.5)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Solve A X = B by LU; fails if A is numerically singular.
pub fn solve(a: &CMat, b: &CMat) -> Result<CMat> {
    a.clone()
        .lu()
        .solve(b)
        .ok_or_else(|| Error::Singular("LU solve failed".into()))
}

pub fn solve_vec(a: &CMat, b: &CVec) -> Result<CVec> {
    a.clone()
        .lu()
        .solve(b)
        .ok_or_else(|| Error::Singular("LU solve failed".into()))
}

pub fn singular_values(m: &CMat) -> Vec<f64> {
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub fn norm2(m: &CMat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Smallest singular value with its right singular vector.
pub fn smallest_singular(m: &CMat) -> (f64, CVec) {
    let svd = m.clone().svd(false, true);
    let vt = svd.v_t.expect("requested");
    let (k, s) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, s)| (k, *s))
        .expect("nonempty");
    let v = vt.row(k).adjoint();
    (s, v)
}

/// Condition number in the 2-norm.
pub fn cond(m: &CMat) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&a), Some(&b)) if b > 0.0 => a / b,
        _ => f64::INFINITY,
    }
}

/// ln det A from LU factors: real part is ln|det|, imaginary part the accumulated phase.
pub fn log_det(m: &CMat) -> Result<C64> {
    let (p, _l, u) = m.clone().lu().unpack();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..u.nrows() {
        let d = u[(i, i)];
        if d.norm() == 0.0 {
            return Err(Error::Singular("zero pivot in log_det".into()));
        }
        acc += d.ln();
    }
    let sign: f64 = p.determinant();
    if sign < 0.0 {
        acc += C64::new(0.0, std::f64::consts::PI);
    }
    Ok(acc)
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

pub fn frob(m: &CMat) -> f64 {
    m.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Orthonormal basis of the orthogonal complement of `v` in R^n (Householder).
pub fn complement_basis(v: &RVec) -> RMat {
    let n = v.len();
    let nv = v.norm();
    let mut u = v / nv;
    let s = if u[0] >= 0.0 { 1.0 } else { -1.0 };
    u[0] += s;
    let un = u.norm();
    let u = u / un;
    let h = RMat::identity(n, n) - (&u * u.transpose()) * 2.0;
    h.columns(1, n - 1).into_owned()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_det_matches_determinant() {
        let m = CMat::from_fn(4, 4, |i, j| C64::new((i * 3 + j) as f64 * 0.1 + if i == j { 2.0 } else { 0.0 }, (i as f64 - j as f64) * 0.2));
        let d = m.clone().lu().determinant();
        let ld = log_det(&m).unwrap();
        assert!((ld.exp() - d).norm() < 1e-12 * d.norm());
    }

    #[test]
    fn complement_is_orthonormal() {
        let v = RVec::from_vec(vec![1.0, 2.0, -0.5, 3.0]);
        let b = complement_basis(&v);
        assert!((b.transpose() * &v).norm() < 1e-13);
        assert!((b.transpose() * &b - RMat::identity(3, 3)).norm() < 1e-13);
    }

    #[test]
    fn smallest_singular_vector() {
        let mut m = CMat::identity(3, 3);
        m[(1, 1)] = C64::new(1e-3, 0.0);
        let (s, v) = smallest_singular(&m);
        assert!((s - 1e-3).abs() < 1e-15);
        assert!((v[1].norm() - 1.0).abs() < 1e-12);
    }
}
