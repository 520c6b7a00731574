//! Eigenmodes of the discrete-ordinates problem: eigenvalues from Q_N(z) built with the
//! simulator's own μ rule, eigenfunctions by integrating the free resolvent along characteristics.

use super::evolve::Propagator;
use super::field::{Field, XGrid};
use super::mu::MuQuad;
use crate::discretize::{assemble_q_rule, CollisionKernel, GridSpec, KernelMode, Profile};
use crate::error::{Error, Result};
use crate::linalg::{self, sym_eigen, CMat, CVec};
use crate::spectra::{contour_roots, imaginary_axis_roots, Contour, Eigenvalue};
use crate::C64;
use serde::Serialize;

#[derive(Debug, Clone)]
pub struct Mode {
    pub z: C64,
    /// ψ and χ on the simulator grid, μ-major like [`Field`].
    pub psi: Vec<C64>,
    pub chi: Vec<C64>,
    /// ⟨ψ, χ⟩ = h Σ w ψ χ̄.
    pub pairing: C64,
    /// ‖(S_dt - e^{-iz dt})ψ‖/(dt‖ψ‖) for the one-step propagator S_dt, when measured.
    pub residual: Option<f64>,
    /// Smallest singular value of I + Q_N(z).
    pub bs_residual: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ModeSummary {
    pub z: C64,
    pub growth_rate: f64,
    pub residual: Option<f64>,
    pub bs_residual: f64,
}

impl Mode {
    /// Growth exponent λ with ψ(t) = e^{λt}ψ: λ = -iz.
    pub fn lambda(&self) -> C64 {
        -C64::i() * self.z
    }
    pub fn is_real(&self) -> bool {
        self.z.re.abs() <= 1e-12 * self.z.norm()
    }
    pub fn summary(&self) -> ModeSummary {
        ModeSummary { z: self.z, growth_rate: self.lambda().re, residual: self.residual, bs_residual: self.bs_residual }
    }
}

fn ipq(z: C64, grid: &GridSpec, collision: &CollisionKernel, half: &[(f64, f64)]) -> Result<CMat> {
    let q = assemble_q_rule(z, grid, collision, half)?;
    Ok(linalg::identity(q.dim()) + q.entries)
}

/// Eigenvalues of the discrete-ordinates problem with the simulator's μ rule. Isotropic kernels
/// are searched on the imaginary axis down to Im z = `eps_min`; others inside `contour`.
pub fn sim_eigenvalues(
    grid: &GridSpec,
    collision: &CollisionKernel,
    mu: &MuQuad,
    eps_min: f64,
    contour: Option<Contour>,
) -> Result<Vec<Eigenvalue>> {
    let half = mu.half();
    let cmax = grid.cells.iter().map(|c| c.c).fold(0.0, f64::max);
    if cmax == 0.0 {
        return Ok(Vec::new());
    }
    let top = cmax * collision.norm() + 1.0;
    match (collision.mode, contour) {
        (KernelMode::Isotropic, None) => {
            let eigs = |l: f64| -> Result<Vec<f64>> {
                let q = assemble_q_rule(C64::new(0.0, l.exp()), grid, collision, &half)?;
                Ok(sym_eigen(&q.real()).0)
            };
            let f = |z: C64| ipq(z, grid, collision, &half);
            Ok(imaginary_axis_roots(&eigs, &f, (eps_min, top))?.eigenvalues)
        }
        (_, c) => {
            let c = c.unwrap_or(Contour { re: (-top, top), im: (eps_min, top) });
            contour_roots(&|z| ipq(z, grid, collision, &half), c)
        }
    }
}

/// ψ(x, μ) = (1/|μ|)∫_upwind e^{iz|x-y|/|μ|} g(y, μ) dy with g = √c Σ_m k_m P_m(μ) φ_m.
pub fn reconstruct(z: C64, phi: &CVec, grid: &GridSpec, collision: &CollisionKernel, x: XGrid, mu: &MuQuad) -> Vec<C64> {
    let nb = collision.n();
    let nx = x.n;
    let ng = grid.n_cells();
    let lo = grid.cells[0].lo;
    let hi = grid.cells[ng - 1].hi;
    let miz = -C64::i() * z;
    let mut out = vec![C64::new(0.0, 0.0); nx * mu.len()];
    for (j, &m) in mu.nodes.iter().enumerate() {
        let am = m.abs();
        let lam = miz / am;
        let gp: Vec<C64> = grid
            .cells
            .iter()
            .enumerate()
            .map(|(p, c)| {
                let s: C64 = (0..nb).map(|k| phi[p * nb + k] * (collision.terms[k].k * collision.eval(k, m))).sum();
                s * ((c.c / c.h()).sqrt())
            })
            .collect();
        let col = &mut out[j * nx..(j + 1) * nx];
        let direct = |xv: f64| -> C64 {
            let mut acc = C64::new(0.0, 0.0);
            for (p, c) in grid.cells.iter().enumerate() {
                if gp[p] == C64::new(0.0, 0.0) {
                    continue;
                }
                let (a, b) = if m > 0.0 { ((xv - c.lo).max(0.0), (xv - c.hi).max(0.0)) } else { ((c.hi - xv).max(0.0), (c.lo - xv).max(0.0)) };
                if a == 0.0 {
                    continue;
                }
                acc += gp[p] * ((-lam * b).exp() - (-lam * a).exp());
            }
            acc / miz
        };
        let h = x.h();
        // inside [lo, hi] directly; downstream of the support by exponential decay from the edge
        let edge = if m > 0.0 { direct(hi) } else { direct(lo) };
        for (i, v) in col.iter_mut().enumerate() {
            let xv = x.center(i);
            *v = if xv >= lo - h && xv <= hi + h {
                direct(xv)
            } else if m > 0.0 && xv > hi {
                edge * (-lam * (xv - hi)).exp()
            } else if m < 0.0 && xv < lo {
                edge * (-lam * (lo - xv)).exp()
            } else {
                C64::new(0.0, 0.0)
            };
        }
    }
    out
}

fn pair(x: XGrid, mu: &MuQuad, a: &[C64], b: &[C64]) -> C64 {
    let nx = x.n;
    let s: C64 = mu
        .weights
        .iter()
        .enumerate()
        .map(|(j, w)| a[j * nx..(j + 1) * nx].iter().zip(&b[j * nx..(j + 1) * nx]).map(|(p, q)| p * q.conj()).sum::<C64>() * *w)
        .sum();
    s * x.h()
}

fn mirror_conj(v: &[C64], nx: usize, mu: &MuQuad) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); v.len()];
    for j in 0..mu.len() {
        let jm = mu.mirror(j);
        for i in 0..nx {
            out[j * nx + i] = v[jm * nx + i].conj();
        }
    }
    out
}

/// Right and left eigenvectors on the simulator grid for one eigenvalue of the discrete-ordinates problem.
/// The left vector is χ = J conj(η) with η the eigenfunction of T itself, reconstructed with the flipped kernel.
pub fn eigenmode_reconstruct(
    z: C64,
    grid: &GridSpec,
    collision: &CollisionKernel,
    x: XGrid,
    mu: &MuQuad,
    prop: Option<&Propagator>,
) -> Result<Mode> {
    if z.im <= 0.0 {
        return Err(Error::Domain(format!("eigenmode_reconstruct needs Im z > 0, got {z}")));
    }
    let half = mu.half();
    // Q is built from T = iμ∂x + icK while the simulator runs -μ∂x + cK = J(-i T̃)J with T̃ carrying
    // the flipped kernel: right modes use the null vector for the flipped kernel, left modes the
    // one for K itself.
    let symmetric = collision.is_parity_symmetric();
    let flipped = collision.flipped();
    let nk = crate::spectra::near_kernel(&ipq(z, grid, if symmetric { collision } else { &flipped }, &half)?);
    let mut psi = reconstruct(z, &nk.vector, grid, collision, x, mu);
    // fix the phase so that real eigenvalues give real fields
    let (imax, _) = psi.iter().enumerate().fold((0, 0.0), |acc, (i, v)| if v.norm() > acc.1 { (i, v.norm()) } else { acc });
    let ph = psi[imax].conj() / psi[imax].norm();
    psi.iter_mut().for_each(|v| *v *= ph);
    let n = pair(x, mu, &psi, &psi).re.sqrt();
    psi.iter_mut().for_each(|v| *v /= n);
    let psi_t = if symmetric {
        psi.clone()
    } else {
        let nf = crate::spectra::near_kernel(&ipq(z, grid, collision, &half)?);
        reconstruct(z, &nf.vector, grid, &flipped, x, mu)
    };
    let chi = mirror_conj(&psi_t, x.n, mu);
    let pairing = pair(x, mu, &psi, &chi);
    let cn = pair(x, mu, &chi, &chi).re.sqrt();
    if pairing.norm() < 1e-8 * cn {
        return Err(Error::Simulation(format!(
            "<psi, chi> = {pairing:.3e} vanishes at z = {z}: eigenvalue is not simple"
        )));
    }
    let residual = prop.map(|p| step_residual(p, z, &psi, mu));
    Ok(Mode { z, psi, chi, pairing, residual, bs_residual: nk.sigma_min })
}

fn step_residual(p: &Propagator, z: C64, psi: &[C64], mu: &MuQuad) -> f64 {
    let mut re = Field { x: p.x, mu: mu.clone(), values: psi.iter().map(|v| v.re).collect() };
    let mut im = Field { x: p.x, mu: mu.clone(), values: psi.iter().map(|v| v.im).collect() };
    p.step(&mut re);
    p.step(&mut im);
    let g = (-C64::i() * z * p.dt).exp();
    let diff: Vec<C64> = psi
        .iter()
        .zip(re.values.iter().zip(&im.values))
        .map(|(v, (a, b))| C64::new(*a, *b) - g * v)
        .collect();
    pair(p.x, mu, &diff, &diff).re.sqrt() / (p.dt * pair(p.x, mu, psi, psi).re.sqrt())
}

/// All modes of the simulator problem for a profile: eigenvalues then eigenfunctions.
#[allow(clippy::too_many_arguments)]
pub fn find_modes(
    profile: &Profile,
    collision: &CollisionKernel,
    cells: usize,
    x: XGrid,
    mu: &MuQuad,
    eps_min: f64,
    contour: Option<Contour>,
    prop: Option<&Propagator>,
) -> Result<Vec<Mode>> {
    let grid = GridSpec::from_profile(profile, cells)?;
    let ev = sim_eigenvalues(&grid, collision, mu, eps_min, contour)?;
    ev.iter().map(|e| eigenmode_reconstruct(e.z, &grid, collision, x, mu, prop)).collect()
}

/// Complex inner product on the simulator grid, exposed for projections.
pub fn inner(x: XGrid, mu: &MuQuad, a: &[C64], b: &[C64]) -> C64 {
    pair(x, mu, a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transport_sim::evolve::SimParams;
    use crate::transport_sim::mu::MuRule;

    #[test]
    fn step_profile_mode_is_an_eigenvector_of_the_stepper() {
        let p = Profile::step(1.0, 1.0);
        let k = CollisionKernel::isotropic();
        let mu = MuQuad::new(MuRule::HalfRangeGauss { per_half: 8 }).unwrap();
        let params = SimParams { x_max: 30.0, nx: 6000, dt: 0.01, max_cfl: 8.0 };
        let prop = Propagator::new(&params, &mu, &p, &k).unwrap();
        let x = XGrid { x_max: 30.0, n: 6000 };
        let modes = find_modes(&p, &k, 64, x, &mu, 1e-6, None, Some(&prop)).unwrap();
        assert_eq!(modes.len(), 1);
        let m = &modes[0];
        assert!(m.is_real() && m.z.im > 0.1);
        assert!(m.residual.unwrap() < 1e-2, "{:?}", m.residual);
        // J-symmetry for an even profile: ψ(x, μ) = ψ(-x, -μ)
        let nx = x.n;
        let mut asym: f64 = 0.0;
        for j in 0..mu.len() {
            for i in 0..nx {
                asym = asym.max((m.psi[j * nx + i] - m.psi[mu.mirror(j) * nx + (nx - 1 - i)]).norm());
            }
        }
        assert!(asym < 1e-10, "{asym}");
        // decay outside the support at rate Im z/|μ| in the μ = μ_max column
        let j = mu.len() - 1;
        let (i1, i2) = ((0.6 * nx as f64) as usize, (0.7 * nx as f64) as usize);
        let rate = -(m.psi[j * nx + i2].re / m.psi[j * nx + i1].re).ln() / (x.center(i2) - x.center(i1));
        assert!((rate - m.z.im / mu.nodes[j]).abs() < 1e-8 * rate, "{rate}");
    }

    fn mixed_parity_kernel() -> CollisionKernel {
        use crate::discretize::{legendre_normalized, Term};
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let (p1, p2) = (legendre_normalized(1), legendre_normalized(2));
        let mix = (0..3).map(|i| s * (p1.get(i).copied().unwrap_or(0.0) + p2[i])).collect();
        CollisionKernel::polynomial(vec![Term { k: 1.0, coeffs: legendre_normalized(0) }, Term { k: 1.2, coeffs: mix }])
            .unwrap()
    }

    #[test]
    fn non_parity_modes_are_biorthogonal() {
        let k = mixed_parity_kernel();
        assert!(!k.is_parity_symmetric());
        let p = Profile::step(2.5, 1.0);
        let mu = MuQuad::new(MuRule::HalfRangeGauss { per_half: 6 }).unwrap();
        let x = XGrid { x_max: 4.0, n: 800 };
        let c = Contour { re: (-2.0, 2.0), im: (0.25, 4.1) };
        let modes = find_modes(&p, &k, 16, x, &mu, 0.25, Some(c), None).unwrap();
        assert_eq!(modes.len(), 7);
        for a in &modes {
            // spectrum symmetric under z -> -conj(z)
            assert!(modes.iter().any(|b| (b.z - C64::new(-a.z.re, a.z.im)).norm() < 1e-8));
            for b in &modes {
                let r = (inner(x, &mu, &a.psi, &b.chi) / a.pairing).norm();
                if std::ptr::eq(a, b) {
                    assert!((r - 1.0).abs() < 1e-12);
                } else {
                    assert!(r < 1e-3, "{} {} {r}", a.z, b.z);
                }
            }
        }
    }

    #[test]
    fn discrete_ordinates_have_off_axis_pairs() {
        // Few μ nodes: besides the iβ modes there are complex pairs close to the real axis,
        // which a search on the imaginary axis alone does not see.
        let g = GridSpec::from_profile(&Profile::step(1.5, 1.0), 16).unwrap();
        let k = CollisionKernel::isotropic();
        let mu = MuQuad::new(MuRule::HalfRangeGauss { per_half: 6 }).unwrap();
        let axis = sim_eigenvalues(&g, &k, &mu, 0.04, None).unwrap();
        let all = sim_eigenvalues(&g, &k, &mu, 0.04, Some(Contour { re: (-1.0, 1.0), im: (0.04, 2.66) })).unwrap();
        let off: Vec<C64> = all.iter().map(|e| e.z).filter(|z| z.re.abs() > 1e-6).collect();
        assert_eq!(all.len() - off.len(), axis.len());
        assert!(off.len() >= 6 && off.len() % 2 == 0, "{off:?}");
        assert!(off.iter().all(|z| z.im < 0.06));
        for e in &all {
            assert!(e.residual < 1e-9);
        }
    }
}
