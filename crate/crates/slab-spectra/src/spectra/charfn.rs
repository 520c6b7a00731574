//! S(z) = (I+Q)(I-Q)^{-1} = -I + 2(I-Q)^{-1} and S^{-1}(z) = -I + 2(I+Q)^{-1}.

use crate::discretize::{assemble_q, CollisionKernel, GridSpec, Label, OperatorMatrix};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec};
use crate::C64;

/// An assembled S or S^{-1} together with the condition number of the matrix that was solved.
#[derive(Debug, Clone)]
pub struct CharValue {
    pub op: OperatorMatrix,
    pub cond: f64,
}

/// Near-kernel data attached to a failed solve.
#[derive(Debug, Clone)]
pub struct NearKernel {
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub vector: CVec,
}

fn cayley(q: &CMat, sign: f64) -> Result<CMat> {
    let n = q.nrows();
    let a = linalg::identity(n) - q * C64::new(sign, 0.0);
    let two = CMat::identity(n, n) * C64::new(2.0, 0.0);
    let x = linalg::solve(&a, &two)?;
    Ok(x - linalg::identity(n))
}

/// -I + 2(I - Q)^{-1}
pub fn s_from_q(q: &CMat) -> Result<CMat> {
    cayley(q, 1.0)
}

/// -I + 2(I + Q)^{-1}
pub fn sinv_from_q(q: &CMat) -> Result<CMat> {
    cayley(q, -1.0)
}

pub fn near_kernel(a: &CMat) -> NearKernel {
    let (s, v) = linalg::smallest_singular(a);
    NearKernel { sigma_min: s, sigma_max: linalg::norm2(a), vector: v }
}

fn wrap(q: &OperatorMatrix, m: CMat, label: Label, solved: &CMat) -> CharValue {
    CharValue {
        op: OperatorMatrix { entries: m, grid: q.grid.clone(), n_basis: q.n_basis, label },
        cond: linalg::cond(solved),
    }
}

fn singular_error(what: &str, a: &CMat, z: C64) -> Error {
    let nk = near_kernel(a);
    Error::Singular(format!(
        "{what} singular at z = {z}: sigma_min = {:.3e}, sigma_max = {:.3e}",
        nk.sigma_min, nk.sigma_max
    ))
}

pub fn char_fn(z: C64, grid: &GridSpec, collision: &CollisionKernel) -> Result<CharValue> {
    let q = assemble_q(z, grid, collision)?;
    let a = linalg::identity(q.dim()) - &q.entries;
    let s = s_from_q(&q.entries).map_err(|_| singular_error("I - Q", &a, z))?;
    Ok(wrap(&q, s, Label::S, &a))
}

pub fn char_fn_inv(z: C64, grid: &GridSpec, collision: &CollisionKernel) -> Result<CharValue> {
    let q = assemble_q(z, grid, collision)?;
    let a = linalg::identity(q.dim()) + &q.entries;
    let s = sinv_from_q(&q.entries).map_err(|_| singular_error("I + Q", &a, z))?;
    Ok(wrap(&q, s, Label::Sinv, &a))
}
