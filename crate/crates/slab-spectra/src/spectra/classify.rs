//! The singularity of S^{-1} at z = 0 for the isotropic kernel: 𝐍 = ker(I+Y) ∩ √c^⊥ decides
//! between the logarithmic and the first-order case.

use crate::discretize::{assemble_y, assemble_y1, assemble_y2, assemble_qtilde, CollisionKernel, GridSpec};
use crate::error::{Error, Result};
use crate::linalg::{self, complement_basis, sym_eigen, to_complex, CMat, CVec, RMat, RVec};
use crate::C64;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    None,
    Logarithmic,
    FirstOrder,
}

#[derive(Debug, Clone)]
pub struct NSubspace {
    pub basis: RMat,
    /// Eigenvalues of Y within tol of -1.
    pub kernel_eigs: Vec<f64>,
    /// |⟨u, √c⟩| for each kernel eigenvector.
    pub overlaps: Vec<f64>,
    /// Candidate dimensions when an eigenvalue sits between tol and 10·tol.
    pub ambiguous: Option<(usize, usize)>,
}

impl NSubspace {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }
}

pub fn n_subspace(grid: &GridSpec, tol: f64) -> NSubspace {
    let y = assemble_y(grid);
    let s = grid.sqrt_c();
    let n = y.nrows();
    let (vals, vecs) = sym_eigen(&y);
    let near: Vec<usize> = (0..n).filter(|&i| (vals[i] + 1.0).abs() <= tol).collect();
    let border = (0..n).filter(|&i| (vals[i] + 1.0).abs() > tol && (vals[i] + 1.0).abs() <= 10.0 * tol).count();
    let k = RMat::from_fn(n, near.len(), |r, c| vecs[(r, near[c])]);
    let sn = s.norm().max(1e-300);
    let a: RVec = k.transpose() * &s;
    let overlaps: Vec<f64> = a.iter().map(|x| x.abs() / sn).collect();
    let basis = if near.is_empty() {
        RMat::zeros(n, 0)
    } else if a.norm() <= tol.sqrt() * sn {
        k
    } else if near.len() == 1 {
        RMat::zeros(n, 0)
    } else {
        &k * complement_basis(&a)
    };
    let d = basis.ncols();
    NSubspace {
        basis,
        kernel_eigs: near.iter().map(|&i| vals[i]).collect(),
        overlaps,
        ambiguous: (border > 0).then_some((d, d + border)),
    }
}

/// Refinement-coupled kernel tolerance: three times the shift of the eigenvalue of Y nearest -1
/// between the grid and its refinement, floored at 1e-8.
pub fn kernel_tolerance(grid: &GridSpec) -> f64 {
    let nearest = |g: &GridSpec| {
        sym_eigen(&assemble_y(g))
            .0
            .into_iter()
            .min_by(|a, b| (a + 1.0).abs().total_cmp(&(b + 1.0).abs()))
            .unwrap_or(f64::INFINITY)
    };
    (3.0 * (nearest(grid) - nearest(&grid.refined())).abs()).max(1e-8)
}

/// Coefficients of S^{-1}(z) ≈ G - ln(-iz/ξ)⟨·,ẽ⟩ẽ.
#[derive(Debug, Clone)]
pub struct LogCoefficients {
    pub xi: f64,
    pub g: CMat,
    pub e_tilde: CVec,
    /// ϱ_c = ⟨ẽ, √c⟩
    pub rho: C64,
}

/// Coefficients of S^{-1}(z) ≈ -(2i/z)M^{-1}P_𝐍 + B₀.
#[derive(Debug, Clone)]
pub struct SimpleCoefficients {
    pub n_basis: RMat,
    pub m: RMat,
    /// Λ = ((I+Y)|_{𝐍^⊥})^{-1} in the coordinates of `perp_basis`.
    pub lambda: RMat,
    pub perp_basis: RMat,
    pub vartheta: f64,
    pub b0: CMat,
    /// -2i·V M^{-1} Vᵀ
    pub pole: CMat,
    /// Some(δ) when Ỹ = Y + ½ ln δ ⟨·,√c⟩√c replaced Y.
    pub delta_shift: Option<f64>,
}

#[derive(Debug, Clone)]
pub enum Coefficients {
    Log(LogCoefficients),
    Simple(SimpleCoefficients),
}

pub fn log_coefficients(grid: &GridSpec) -> Result<LogCoefficients> {
    let k = CollisionKernel::isotropic();
    let s = linalg::cvec(&grid.sqrt_c());
    let n = s.len();
    for xi in [1.0, 0.5, 2.0] {
        let qt = assemble_qtilde(C64::new(0.0, xi), grid, &k)?.entries;
        let dist = linalg::herm_eigenvalues(&qt).iter().map(|e| (e + 1.0).abs()).fold(f64::INFINITY, f64::min);
        if dist < 0.01 {
            continue;
        }
        let a = linalg::identity(n) + &qt;
        let g = linalg::solve(&a.transpose(), &(linalg::identity(n) - &qt).transpose())?.transpose();
        let e_tilde = linalg::solve_vec(&a, &s)?;
        let rho = (e_tilde.transpose() * &s)[(0, 0)];
        return Ok(LogCoefficients { xi, g, e_tilde, rho });
    }
    Err(Error::NoConvergence("no xi in {1, 1/2, 2} keeps -1 away from the spectrum of Q~(i xi)".into()))
}

/// Orthonormal basis of the orthogonal complement of span(v).
fn perp(v: &RMat) -> RMat {
    let n = v.nrows();
    let p = RMat::identity(n, n) - v * v.transpose();
    let (_, vecs) = sym_eigen(&p);
    vecs.columns(v.ncols(), n - v.ncols()).into_owned()
}

fn simple_from(y: &RMat, y1: &RMat, y2: &RMat, s: &RVec, v: &RMat) -> Result<Option<SimpleCoefficients>> {
    let n = y.nrows();
    let u = perp(v);
    let m = v.transpose() * y1 * v;
    let m_inv = m.clone().try_inverse().ok_or_else(|| Error::Singular("M = P_N Y1 on N is singular".into()))?;
    let w = u.transpose() * (RMat::identity(n, n) + y) * &u;
    let sv = w.clone().svd(false, false).singular_values;
    let (smin, smax) = (sv.min(), sv.max());
    if smin < 1e-10 * smax {
        return Ok(None);
    }
    let lambda = w.try_inverse().ok_or_else(|| Error::Singular("(I+Y) on N-perp".into()))?;
    let su = u.transpose() * s;
    let ls = &lambda * &su;
    let vartheta = su.dot(&ls);
    let d0 = if vartheta.abs() > 1e-12 * su.norm_squared() {
        &lambda - (&ls * ls.transpose()) / vartheta
    } else {
        lambda.clone()
    };
    let y1_12 = v.transpose() * y1 * &u;
    let y1_21 = u.transpose() * y1 * v;
    let kk = v.transpose() * y2 * v + &y1_12 * &d0 * &y1_21;
    let x11 = &m_inv * kk * &m_inv;
    let x12 = -(&m_inv * &y1_12 * &d0);
    let x21 = -(&d0 * &y1_21 * &m_inv);
    let x = v * x11 * v.transpose() + v * x12 * u.transpose() + &u * x21 * v.transpose() + &u * &d0 * u.transpose();
    let b0 = to_complex(&(x * 2.0 - RMat::identity(n, n)));
    let pole = to_complex(&(v * &m_inv * v.transpose())) * C64::new(0.0, -2.0);
    Ok(Some(SimpleCoefficients {
        n_basis: v.clone(),
        m,
        lambda,
        perp_basis: u,
        vartheta,
        b0,
        pole,
        delta_shift: None,
    }))
}

pub fn simple_coefficients(grid: &GridSpec, n: &NSubspace) -> Result<SimpleCoefficients> {
    let y = assemble_y(grid);
    let y1 = assemble_y1(grid);
    let y2 = assemble_y2(grid);
    let s = grid.sqrt_c();
    if let Some(c) = simple_from(&y, &y1, &y2, &s, &n.basis)? {
        return Ok(c);
    }
    for delta in [std::f64::consts::E, 1.0 / std::f64::consts::E, 10.0] {
        let yt = &y + (&s * s.transpose()) * (0.5 * f64::ln(delta));
        if let Some(mut c) = simple_from(&yt, &(&y1 * delta), &(&y2 * (delta * delta)), &s, &n.basis)? {
            // the pole term is invariant under the shift: (δ/z)(δM)^{-1} = M^{-1}/z
            c.m = &c.m / delta;
            c.pole = &c.pole * C64::new(delta, 0.0);
            c.delta_shift = Some(delta);
            return Ok(c);
        }
    }
    Err(Error::Singular("(I+Y) restricted to N-perp stays singular under the delta shift".into()))
}

/// Classification of z = 0 and the matching coefficients, given the 𝓔-membership verdict.
pub fn classify_singularity(grid: &GridSpec, in_e: bool, tol: f64) -> Result<(Classification, Option<Coefficients>, NSubspace)> {
    let ns = n_subspace(grid, tol);
    if !in_e {
        return Ok((Classification::None, None, ns));
    }
    if ns.dim() == 0 {
        let c = log_coefficients(grid)?;
        Ok((Classification::Logarithmic, Some(Coefficients::Log(c)), ns))
    } else {
        let c = simple_coefficients(grid, &ns)?;
        Ok((Classification::FirstOrder, Some(Coefficients::Simple(c)), ns))
    }
}

/// Both sides of ⟨Y₁h, h⟩ = -∫(∫_{-a}^x √c h)² dx for h ⊥ √c.
pub fn y1_quadratic_identity(grid: &GridSpec, h: &RVec) -> (f64, f64) {
    let y1 = assemble_y1(grid);
    let lhs = h.dot(&(&y1 * h));
    let mut f0 = 0.0;
    let mut rhs = 0.0;
    for (p, cell) in grid.cells.iter().enumerate() {
        // √c h on the cell is constant: √c_p h_p / √h_p
        let f1 = f0 + (cell.c * cell.h()).sqrt() * h[p];
        rhs -= cell.h() * (f0 * f0 + f0 * f1 + f1 * f1) / 3.0;
        f0 = f1;
    }
    (lhs, rhs)
}
