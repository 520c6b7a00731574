//! Two-grid spectral report for one profile.

use super::bc::{bc_set, default_log_eps, eta_flow, in_e, BcPoint, Membership, Verdict};
use super::classify::{classify_singularity, kernel_tolerance, Classification, Coefficients};
use super::discrete::{discrete_spectrum_general, discrete_spectrum_isotropic, Contour, Eigenvalue};
use crate::discretize::{CollisionKernel, GridSpec, KernelMode, Profile};
use crate::error::Result;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct CoefficientSummary {
    pub kind: Classification,
    pub xi: Option<f64>,
    pub rho: Option<[f64; 2]>,
    pub g_norm: Option<f64>,
    pub e_tilde_norm: Option<f64>,
    pub n_dim: Option<usize>,
    /// Row-major entries of M = P_N Y1|_N.
    pub m: Option<Vec<f64>>,
    pub vartheta: Option<f64>,
    pub b0_norm: Option<f64>,
    pub delta_shift: Option<f64>,
}

impl CoefficientSummary {
    pub fn from(kind: Classification, c: &Option<Coefficients>) -> Self {
        let mut s = CoefficientSummary {
            kind,
            xi: None,
            rho: None,
            g_norm: None,
            e_tilde_norm: None,
            n_dim: None,
            m: None,
            vartheta: None,
            b0_norm: None,
            delta_shift: None,
        };
        match c {
            Some(Coefficients::Log(l)) => {
                s.xi = Some(l.xi);
                s.rho = Some([l.rho.re, l.rho.im]);
                s.g_norm = Some(crate::linalg::norm2(&l.g));
                s.e_tilde_norm = Some(l.e_tilde.norm());
            }
            Some(Coefficients::Simple(m)) => {
                s.n_dim = Some(m.n_basis.ncols());
                s.m = Some(m.m.transpose().iter().copied().collect());
                s.vartheta = Some(m.vartheta);
                s.b0_norm = Some(crate::linalg::norm2(&m.b0));
                s.delta_shift = m.delta_shift;
            }
            None => {}
        }
        s
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralReport {
    pub cells: (usize, usize),
    pub eigenvalues: Vec<Eigenvalue>,
    pub eigenvalues_coarse: Vec<Eigenvalue>,
    /// max_j |z_j(h) - z_j(h/2)|/|z_j(h/2)|, or the count mismatch when the counts differ.
    pub eigenvalue_delta: f64,
    pub bc_set: Vec<BcPoint>,
    pub in_e: Option<Membership>,
    /// None when the two grids disagree (unresolved).
    pub classification: Option<Classification>,
    pub classification_per_grid: Vec<Classification>,
    pub coefficients: Option<CoefficientSummary>,
    pub notes: Vec<String>,
}

fn eigen(grid: &GridSpec, collision: &CollisionKernel, contour: Option<Contour>, cmax: f64, notes: &mut Vec<String>) -> Result<Vec<Eigenvalue>> {
    match collision.mode {
        KernelMode::Isotropic => {
            let s = discrete_spectrum_isotropic(grid, (1e-300, cmax + 1.0))?;
            notes.extend(s.notes);
            Ok(s.eigenvalues)
        }
        KernelMode::Polynomial => {
            let r = cmax * collision.norm() + 1.0;
            let c = contour.unwrap_or(Contour { re: (-r, r), im: (1e-3, r) });
            notes.push(format!("eigenvalue search contour {c:?}"));
            discrete_spectrum_general(grid, collision, c)
        }
    }
}

pub fn spectral_report(profile: &Profile, collision: &CollisionKernel, cells: usize, contour: Option<Contour>) -> Result<SpectralReport> {
    let g1 = GridSpec::from_profile(profile, cells)?;
    let g2 = g1.refined();
    let cmax = profile.segments.iter().map(|s| s.value).fold(0.0, f64::max);
    let mut notes = Vec::new();
    let e1 = eigen(&g1, collision, contour, cmax, &mut notes)?;
    let e2 = eigen(&g2, collision, contour, cmax, &mut notes)?;
    let eigenvalue_delta = if e1.len() == e2.len() {
        e1.iter().zip(&e2).map(|(a, b)| (a.z - b.z).norm() / b.z.norm()).fold(0.0, f64::max)
    } else {
        notes.push(format!("eigenvalue count differs between grids: {} vs {}", e1.len(), e2.len()));
        f64::INFINITY
    };
    let mut rep = SpectralReport {
        cells: (g1.n_cells(), g2.n_cells()),
        eigenvalues: e2,
        eigenvalues_coarse: e1,
        eigenvalue_delta,
        bc_set: Vec::new(),
        in_e: None,
        classification: None,
        classification_per_grid: Vec::new(),
        coefficients: None,
        notes,
    };
    if collision.mode != KernelMode::Isotropic || profile.is_zero() {
        if collision.mode != KernelMode::Isotropic {
            rep.notes.push("B_c and the classification at 0 are defined for the isotropic kernel only".into());
        } else {
            rep.classification = Some(Classification::None);
        }
        return Ok(rep);
    }
    rep.bc_set = bc_set(&eta_flow(&g2, &default_log_eps())?);
    let m = in_e(&g1)?;
    let verdict = m.verdict;
    rep.in_e = Some(m);
    if verdict == Verdict::Unresolved {
        rep.notes.push("membership in E differs between grids: classification unresolved".into());
        return Ok(rep);
    }
    let mut last = None;
    for g in [&g1, &g2] {
        let tol = kernel_tolerance(g);
        let (cls, coef, ns) = classify_singularity(g, verdict == Verdict::Yes, tol)?;
        if let Some((a, b)) = ns.ambiguous {
            rep.notes.push(format!("ambiguous kernel of I+Y on {} cells: dimension {a} or {b}", g.n_cells()));
        }
        rep.classification_per_grid.push(cls);
        last = Some((cls, coef));
    }
    let agree = rep.classification_per_grid.windows(2).all(|w| w[0] == w[1]);
    if let Some((cls, coef)) = last {
        rep.coefficients = Some(CoefficientSummary::from(cls, &coef));
        rep.classification = agree.then_some(cls);
    }
    if !agree {
        rep.notes.push("classification differs between grids: unresolved".into());
    }
    Ok(rep)
}
