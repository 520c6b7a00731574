use crate::error::{Error, Result};
use crate::linalg::{sym_eigen, RMat};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelMode {
    Isotropic,
    Polynomial,
}

/// One term k²⟨·,P⟩P; `coeffs` are monomial coefficients of P, lowest degree first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub k: f64,
    pub coeffs: Vec<f64>,
}

/// K = Σ k_i² ⟨·,P_i⟩ P_i on L²(-1, 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollisionKernel {
    pub mode: KernelMode,
    pub terms: Vec<Term>,
}

pub fn poly_eval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

pub fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// ∫_{-1}^{1} p(μ) dμ
pub fn poly_integral(c: &[f64]) -> f64 {
    c.iter()
        .enumerate()
        .map(|(k, &a)| if k % 2 == 0 { 2.0 * a / (k + 1) as f64 } else { 0.0 })
        .sum()
}

/// Orthonormal Legendre polynomial √((2n+1)/2)·P_n as monomial coefficients.
pub fn legendre_normalized(n: usize) -> Vec<f64> {
    let mut p0 = vec![1.0];
    let mut p1 = vec![0.0, 1.0];
    let p = if n == 0 {
        p0
    } else {
        for k in 2..=n {
            let kf = k as f64;
            let mut p2 = vec![0.0; k + 1];
            for (i, &a) in p1.iter().enumerate() {
                p2[i + 1] += (2.0 * kf - 1.0) / kf * a;
            }
            for (i, &a) in p0.iter().enumerate() {
                p2[i] -= (kf - 1.0) / kf * a;
            }
            p0 = p1;
            p1 = p2;
        }
        p1
    };
    let s = ((2 * n + 1) as f64 / 2.0).sqrt();
    p.into_iter().map(|a| a * s).collect()
}

impl CollisionKernel {
    /// K = ½⟨·,𝟏⟩𝟏.
    pub fn isotropic() -> Self {
        CollisionKernel {
            mode: KernelMode::Isotropic,
            terms: vec![Term { k: 1.0, coeffs: vec![std::f64::consts::FRAC_1_SQRT_2] }],
        }
    }

    pub fn polynomial(terms: Vec<Term>) -> Result<Self> {
        let k = CollisionKernel { mode: KernelMode::Polynomial, terms };
        k.validate()?;
        Ok(k)
    }

    /// Legendre kernel Σ k_n² ⟨·,p_n⟩p_n with orthonormal Legendre p_n.
    pub fn legendre(ks: &[f64]) -> Result<Self> {
        Self::polynomial(
            ks.iter()
                .enumerate()
                .map(|(n, &k)| Term { k, coeffs: legendre_normalized(n) })
                .collect(),
        )
    }

    /// Kernel K(-μ, -μ'): the collision operator conjugated by (Jf)(μ) = f(-μ).
    pub fn flipped(&self) -> Self {
        CollisionKernel {
            mode: self.mode,
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    k: t.k,
                    coeffs: t.coeffs.iter().enumerate().map(|(i, &a)| if i % 2 == 1 { -a } else { a }).collect(),
                })
                .collect(),
        }
    }

    /// True when K(-μ, -μ') = K(μ, μ').
    pub fn is_parity_symmetric(&self) -> bool {
        let f = self.flipped();
        [-0.9, -0.3, 0.2, 0.7]
            .iter()
            .all(|&m| [-0.8, 0.1, 0.6].iter().all(|&n| (self.kernel(m, n) - f.kernel(m, n)).abs() < 1e-12))
    }

    pub fn n(&self) -> usize {
        self.terms.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.terms.is_empty() {
            return Err(Error::Invalid("collision.terms is empty".into()));
        }
        for (i, t) in self.terms.iter().enumerate() {
            if !(t.k > 0.0) || !t.k.is_finite() {
                return Err(Error::Invalid(format!("collision.terms[{i}].k must be positive")));
            }
            if t.coeffs.is_empty() {
                return Err(Error::Invalid(format!("collision.terms[{i}].coeffs is empty")));
            }
        }
        let g = self.gram();
        for i in 0..self.n() {
            for j in 0..self.n() {
                let want = if i == j { 1.0 } else { 0.0 };
                if (g[(i, j)] - want).abs() > 1e-12 {
                    return Err(Error::Invalid(format!(
                        "collision.terms: P_{i}, P_{j} not orthonormal (Gram entry {})",
                        g[(i, j)]
                    )));
                }
            }
        }
        if let Some(dev) = self.constant_eigen_defect() {
            return Err(Error::Invalid(format!(
                "collision.terms: the constant function must be an eigenfunction of K (defect {dev:.3e})"
            )));
        }
        Ok(())
    }

    pub fn gram(&self) -> RMat {
        let n = self.n();
        RMat::from_fn(n, n, |i, j| poly_integral(&poly_mul(&self.terms[i].coeffs, &self.terms[j].coeffs)))
    }

    /// Nonconstant part of K𝟏 when it exceeds roundoff, else None.
    pub fn constant_eigen_defect(&self) -> Option<f64> {
        let deg = self.terms.iter().map(|t| t.coeffs.len()).max().unwrap_or(1);
        let mut k1 = vec![0.0; deg];
        for t in &self.terms {
            let m = poly_integral(&t.coeffs);
            for (i, &a) in t.coeffs.iter().enumerate() {
                k1[i] += t.k * t.k * m * a;
            }
        }
        let scale = k1.iter().fold(0.0f64, |a, &b| a.max(b.abs())).max(1e-300);
        let dev = k1.iter().skip(1).fold(0.0f64, |a, &b| a.max(b.abs()));
        (dev > 1e-12 * scale.max(1.0)).then_some(dev)
    }

    /// Spectrum of K on the span of the P_i, used for the K ≥ 0 check.
    pub fn k_eigenvalues(&self) -> Vec<f64> {
        let g = self.gram();
        let d = RMat::from_fn(self.n(), self.n(), |i, j| if i == j { self.terms[i].k } else { 0.0 });
        sym_eigen(&(&d * g * &d)).0
    }

    /// ‖K‖ = max k_i² for orthonormal P_i.
    pub fn norm(&self) -> f64 {
        self.terms.iter().map(|t| t.k * t.k).fold(0.0, f64::max)
    }

    pub fn eval(&self, i: usize, mu: f64) -> f64 {
        poly_eval(&self.terms[i].coeffs, mu)
    }

    /// ℓ coefficients k_i P_i(0).
    pub fn g0_vector(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.k * t.coeffs[0]).collect()
    }

    pub fn max_degree(&self) -> usize {
        self.terms.iter().map(|t| t.coeffs.len() - 1).max().unwrap_or(0)
    }

    /// G_j[m,n] = k_m k_n a_j, where P_m(μ)P_n(μ) = Σ_j a_j μ^j.
    pub fn g_matrices(&self) -> Vec<RMat> {
        let n = self.n();
        let jmax = 2 * self.max_degree();
        let mut out = vec![RMat::zeros(n, n); jmax + 1];
        for m in 0..n {
            for q in 0..n {
                let prod = poly_mul(&self.terms[m].coeffs, &self.terms[q].coeffs);
                for (j, &a) in prod.iter().enumerate() {
                    out[j][(m, q)] = self.terms[m].k * self.terms[q].k * a;
                }
            }
        }
        out
    }

    /// Kernel K(μ, μ') = Σ k_i² P_i(μ) P_i(μ').
    pub fn kernel(&self, mu: f64, nu: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| t.k * t.k * poly_eval(&t.coeffs, mu) * poly_eval(&t.coeffs, nu))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isotropic_is_orthonormal_with_constant_eigenfunction() {
        let k = CollisionKernel::isotropic();
        k.validate().unwrap();
        assert!((k.g_matrices()[0][(0, 0)] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn legendre_gram_is_identity() {
        let k = CollisionKernel::legendre(&[1.0, 0.7, 0.4, 0.2]).unwrap();
        let g = k.gram();
        assert!((g - RMat::identity(4, 4)).norm() < 1e-13);
    }

    #[test]
    fn g0_is_product_at_zero() {
        let k = CollisionKernel::legendre(&[1.0, 0.8, 0.5]).unwrap();
        let g = k.g_matrices();
        let v = k.g0_vector();
        for m in 0..3 {
            for n in 0..3 {
                assert_eq!(g[0][(m, n)], v[m] * v[n]);
            }
        }
    }

    #[test]
    fn rejects_nonconstant_eigenfunction() {
        // p1 alone: K𝟏 = 0 is fine; p0 + p1 mixed in one term is not.
        let c: Vec<f64> = poly_mix(&legendre_normalized(0), &legendre_normalized(1));
        let r = CollisionKernel::polynomial(vec![
            Term { k: 1.0, coeffs: c },
            Term { k: 0.5, coeffs: poly_mix_minus(&legendre_normalized(0), &legendre_normalized(1)) },
        ]);
        assert!(r.is_err());
        assert!(format!("{}", r.unwrap_err()).contains("eigenfunction"));
    }

    fn poly_mix(a: &[f64], b: &[f64]) -> Vec<f64> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        (0..a.len().max(b.len()))
            .map(|i| s * (a.get(i).copied().unwrap_or(0.0) + b.get(i).copied().unwrap_or(0.0)))
            .collect()
    }

    fn poly_mix_minus(a: &[f64], b: &[f64]) -> Vec<f64> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        (0..a.len().max(b.len()))
            .map(|i| s * (a.get(i).copied().unwrap_or(0.0) - b.get(i).copied().unwrap_or(0.0)))
            .collect()
    }

    #[test]
    fn rejects_non_orthonormal() {
        let r = CollisionKernel::polynomial(vec![Term { k: 1.0, coeffs: vec![1.0] }]);
        assert!(r.is_err());
    }

    #[test]
    fn kernel_is_nonnegative_operator() {
        let k = CollisionKernel::legendre(&[1.0, 0.6]).unwrap();
        assert!(k.k_eigenvalues().iter().all(|&e| e >= 0.0));
        assert!((k.norm() - 1.0).abs() < 1e-15);
    }
}
