//! S(0) from the rank-one structure Q̃(z) = Q̃(iδ) - α(z)ℓℓ*, α = -ln(-iz/δ).

use crate::discretize::{assemble_b, ell, CollisionKernel, GridSpec};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec};
use crate::C64;

/// Diameter of supp c and |c|₁ read off the grid.
fn geometry(grid: &GridSpec) -> (f64, f64) {
    let pos: Vec<_> = grid.cells.iter().filter(|c| c.c > 0.0).collect();
    let a = match (pos.first(), pos.last()) {
        (Some(f), Some(l)) => l.hi - f.lo,
        _ => 0.0,
    };
    (a, pos.iter().map(|c| c.c * c.h()).sum())
}

/// min{1/(2a), C_N/(a‖K‖²|c|₁²)}
pub fn admissible_delta(grid: &GridSpec, collision: &CollisionKernel, c_n: f64) -> f64 {
    let (a, l1) = geometry(grid);
    if a == 0.0 || l1 == 0.0 {
        return f64::INFINITY;
    }
    let k = collision.norm();
    (0.5 / a).min(c_n / (a * k * k * l1 * l1))
}

#[derive(Debug, Clone)]
pub struct SZero {
    pub s0: CMat,
    pub delta: f64,
    /// ϑ_c = ℓ*(I - Q̃(iδ))^{-1}ℓ
    pub vartheta: C64,
    /// A^{-1}ℓ and (ℓ*A^{-1})ᵀ with A = I - Q̃(iδ).
    pub right: CVec,
    pub left: CVec,
}

pub fn s_zero(grid: &GridSpec, collision: &CollisionKernel, delta: f64, c_n: f64) -> Result<SZero> {
    let bound = admissible_delta(grid, collision, c_n);
    if !(delta > 0.0) || delta > bound {
        return Err(Error::Invalid(format!(
            "delta = {delta} outside (0, {bound:.6e}] = (0, min{{1/(2a), C_N/(a |K|^2 |c|_1^2)}}]"
        )));
    }
    let l = ell(grid, collision);
    let n = l.len();
    let qt = assemble_b(grid, collision) + (&l * l.transpose()) * C64::new(delta.ln(), 0.0);
    let a = linalg::identity(n) - qt;
    let right = linalg::solve_vec(&a, &l)?;
    let left = linalg::solve_vec(&a.transpose(), &l)?;
    let vartheta = (l.transpose() * &right)[(0, 0)];
    if vartheta.norm() == 0.0 {
        return Err(Error::Singular("vartheta_c = 0".into()));
    }
    let ainv = linalg::solve(&a, &linalg::identity(n))?;
    let s0 = ainv * C64::new(2.0, 0.0) - linalg::identity(n) - (&right * left.transpose()) * (C64::new(2.0, 0.0) / vartheta);
    Ok(SZero { s0, delta, vartheta, right, left })
}

impl SZero {
    /// S(0) + 2/(ϑ(1+αϑ))·A^{-1}ℓℓ*A^{-1}: the model of S(z) up to O(|z ln z|).
    pub fn model(&self, z: C64) -> Result<CMat> {
        let alpha = -(crate::specfun::ln_minus_iz(z)? - C64::new(self.delta.ln(), 0.0));
        let t = self.vartheta;
        let coef = C64::new(2.0, 0.0) / (t * (C64::new(1.0, 0.0) + alpha * t));
        Ok(&self.s0 + (&self.right * self.left.transpose()) * coef)
    }
}
