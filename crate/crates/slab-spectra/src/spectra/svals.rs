//! Singular values of S(k) on the real axis: D(k) = S*(k)S(k) and the splitting by a threshold β.

use super::charfn::s_from_q;
use super::szero::{admissible_delta, s_zero};
use crate::discretize::{assemble_q, CollisionKernel, GridSpec};
use crate::error::{Error, Result};
use crate::linalg::singular_values;
use crate::{par, C64};
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct KSlice {
    pub k: f64,
    /// Descending.
    pub singular_values: Vec<f64>,
    /// Eigenvalues of D(k) below β², i.e. dim X₁(k).
    pub dim_x1: usize,
    /// Singular values below 1e-8·σ_max.
    pub near_kernel: usize,
    /// Eigenvalues of D(k) below 1 - 1e-6: the numerical rank of Δ(k) = I - D(k).
    pub delta_rank: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SingularValueProfile {
    pub beta: f64,
    pub slices: Vec<KSlice>,
    pub max_ker_dim: usize,
}

pub fn slice(k: f64, s: &[f64], beta: f64) -> KSlice {
    let smax = s.first().copied().unwrap_or(0.0);
    KSlice {
        k,
        singular_values: s.to_vec(),
        dim_x1: s.iter().filter(|&&x| x * x < beta * beta).count(),
        near_kernel: s.iter().filter(|&&x| x < 1e-8 * smax).count(),
        delta_rank: s.iter().filter(|&&x| x * x < 1.0 - 1e-6).count(),
    }
}

/// S(0) is reached through its limit formula; other k directly.
pub fn s_on_axis(k: f64, grid: &GridSpec, collision: &CollisionKernel) -> Result<crate::linalg::CMat> {
    if k == 0.0 {
        let d = 0.5 * admissible_delta(grid, collision, 1.0);
        if !d.is_finite() {
            return Ok(crate::linalg::identity(grid.n_cells() * collision.n()));
        }
        return Ok(s_zero(grid, collision, d, 1.0)?.s0);
    }
    s_from_q(&assemble_q(C64::new(k, 0.0), grid, collision)?.entries)
}

pub fn ac_splitting_profile(grid: &GridSpec, collision: &CollisionKernel, ks: &[f64], beta: f64) -> Result<SingularValueProfile> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::Invalid(format!("beta must lie in (0, 1), got {beta}")));
    }
    let slices: Vec<Result<KSlice>> = par::map(ks, |&k| {
        let s = s_on_axis(k, grid, collision)?;
        Ok(slice(k, &singular_values(&s), beta))
    });
    let slices: Vec<KSlice> = slices.into_iter().collect::<Result<_>>()?;
    let max_ker_dim = slices.iter().map(|s| s.near_kernel).max().unwrap_or(0);
    Ok(SingularValueProfile { beta, slices, max_ker_dim })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::Profile;
    use crate::spectra::bc::grid_critical_kappa;

    #[test]
    fn zero_profile_has_no_x1() {
        let g = GridSpec::from_profile(&Profile::zero(1.0), 8).unwrap();
        let p = ac_splitting_profile(&g, &CollisionKernel::isotropic(), &[-1.0, 0.0, 2.0], 0.5).unwrap();
        assert!(p.slices.iter().all(|s| s.dim_x1 == 0 && s.delta_rank == 0));
    }

    #[test]
    fn contractive_and_delta_rank_grows() {
        let k = CollisionKernel::isotropic();
        let g = GridSpec::from_profile(&Profile::step(1.0, 1.0), 16).unwrap();
        let a = ac_splitting_profile(&g, &k, &[0.5, 3.0], 0.5).unwrap();
        let b = ac_splitting_profile(&g.refined(), &k, &[0.5, 3.0], 0.5).unwrap();
        for (x, y) in a.slices.iter().zip(&b.slices) {
            assert!(x.singular_values[0] <= 1.0 + 1e-8);
            assert!(y.delta_rank > x.delta_rank, "{} {}", x.delta_rank, y.delta_rank);
        }
    }

    #[test]
    fn kernel_at_zero_only_when_critical() {
        let k = CollisionKernel::isotropic();
        let g = GridSpec::from_profile(&Profile::step(1.0, 1.0), 32).unwrap();
        let kc = grid_critical_kappa(&g, 0).unwrap();
        let crit = ac_splitting_profile(&g.scaled(kc), &k, &[0.0], 0.5).unwrap();
        let off = ac_splitting_profile(&g.scaled(0.8 * kc), &k, &[0.0], 0.5).unwrap();
        assert!(crit.max_ker_dim >= 1);
        assert_eq!(off.max_ker_dim, 0);
    }
}
