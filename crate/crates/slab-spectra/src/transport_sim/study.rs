//! End-to-end growth study: modes of the simulator problem, deflation, ‖Z_t u₀‖ and its fit.

use super::deflate::{deflate_and_measure, Deflator};
use super::evolve::{Propagator, SimParams, Trajectory};
use super::field::{Field, XGrid};
use super::growth::{growth_fit, local_exponent, GrowthFit};
use super::modes::{find_modes, ModeSummary};
use super::mu::{MuQuad, MuRule};
use crate::discretize::{CollisionKernel, GridSpec, Profile};
use crate::error::{Error, Result};
use crate::spectra::bc::compressed_vector;
use crate::spectra::Contour;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialData {
    /// 1_supp(x)·(1 + a_x x)(1 + a_mu μ).
    Smooth { a_x: f64, a_mu: f64 },
    /// Sum of `terms` random bumps inside the support with random quadratic μ dependence.
    Random { seed: u64, terms: usize },
    /// F(x)·sign(μ)|μ|^{-α} with F(x) = ∫_x^∞ √c φ, φ the √c^⊥-compressed eigenvector of Y nearest -1.
    KernelFlux { alpha: f64 },
}

fn bump(x: f64) -> f64 {
    if x.abs() < 1.0 {
        (1.0 - x * x).powi(3)
    } else {
        0.0
    }
}

/// Initial field on the simulator grid; `grid` is the Galerkin grid of the profile.
pub fn initial_field(spec: &InitialData, profile: &Profile, grid: &GridSpec, x: XGrid, mu: &MuQuad) -> Result<Field> {
    let inside = |x: f64| profile.eval(x) > 0.0;
    let f = match spec {
        InitialData::Smooth { a_x, a_mu } => {
            Field::from_fn(x, mu.clone(), |x, m| if inside(x) { (1.0 + a_x * x) * (1.0 + a_mu * m) } else { 0.0 })
        }
        InitialData::Random { seed, terms } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let (lo, hi) = (grid.cells[0].lo, grid.cells[grid.n_cells() - 1].hi);
            let parts: Vec<[f64; 6]> = (0..(*terms).max(1))
                .map(|_| {
                    let w = rng.random_range(0.1..0.5) * (hi - lo);
                    let c = rng.random_range(lo + w..=hi - w);
                    [rng.random_range(-1.0..1.0), c, w, rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), 0.0]
                })
                .collect();
            Field::from_fn(x, mu.clone(), |x, m| {
                parts.iter().map(|p| p[0] * bump((x - p[1]) / p[2]) * (1.0 + 0.5 * p[3] * m + 0.5 * p[4] * m * m)).sum()
            })
        }
        InitialData::KernelFlux { alpha } => {
            if !(0.0..0.5).contains(alpha) {
                return Err(Error::Invalid(format!("initial.alpha = {alpha} must lie in [0, 0.5)")));
            }
            let (_, v) = compressed_vector(grid, -1.0);
            let g: Vec<f64> = grid.cells.iter().zip(v.iter()).map(|(c, v)| (c.c / c.h()).sqrt() * v).collect();
            let big = |x: f64| -> f64 {
                grid.cells.iter().zip(&g).map(|(c, g)| g * (c.hi - x.max(c.lo)).max(0.0)).sum()
            };
            let (lo, hi) = (grid.cells[0].lo, grid.cells[grid.n_cells() - 1].hi);
            Field::from_fn(x, mu.clone(), |x, m| {
                if x <= lo || x >= hi {
                    0.0
                } else {
                    big(x) * m.signum() * m.abs().powf(-alpha)
                }
            })
        }
    };
    Ok(f)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrowthStudy {
    pub mu: MuRule,
    pub nx: usize,
    pub dt: f64,
    pub t_end: f64,
    /// Half-width of the x domain; defaults to radius(c) + T + 0.5.
    #[serde(default)]
    pub x_max: Option<f64>,
    #[serde(default = "default_redeflate")]
    pub redeflate: f64,
    /// Galerkin cells for the mode computation.
    pub galerkin_cells: usize,
    #[serde(default = "default_eps_min")]
    pub eps_min: f64,
    #[serde(default)]
    pub contour: Option<Contour>,
    #[serde(default = "default_per_decade")]
    pub per_decade: usize,
    #[serde(default = "default_cfl")]
    pub max_cfl: f64,
    /// Samples with t below this are excluded from the fit.
    #[serde(default = "default_fit_from")]
    pub fit_from: f64,
    pub initial: InitialData,
}

fn default_redeflate() -> f64 {
    1.0
}
fn default_eps_min() -> f64 {
    1e-8
}
fn default_per_decade() -> usize {
    12
}
fn default_cfl() -> f64 {
    8.0
}
fn default_fit_from() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize)]
pub struct GrowthReport {
    pub x_max: f64,
    pub nx: usize,
    pub n_mu: usize,
    pub modes: Vec<ModeSummary>,
    pub trajectory: Trajectory,
    pub local_exponent: Vec<(f64, f64)>,
    pub fit: GrowthFit,
}

pub fn growth_run(profile: &Profile, collision: &CollisionKernel, study: &GrowthStudy) -> Result<GrowthReport> {
    let mu = MuQuad::new(study.mu)?;
    let x_max = study.x_max.unwrap_or(profile.radius() + study.t_end + 0.5);
    let params = SimParams { x_max, nx: study.nx, dt: study.dt, max_cfl: study.max_cfl };
    let prop = Propagator::new(&params, &mu, profile, collision)?;
    let x = XGrid { x_max, n: study.nx };
    let grid = GridSpec::from_profile(profile, study.galerkin_cells)?;
    let modes = find_modes(profile, collision, study.galerkin_cells, x, &mu, study.eps_min, study.contour, Some(&prop))?;
    let summaries = modes.iter().map(|m| m.summary()).collect();
    let mut u0 = initial_field(&study.initial, profile, &grid, x, &mu)?;
    let n0 = u0.norm();
    if n0 == 0.0 {
        return Err(Error::Invalid("initial field vanishes on the grid".into()));
    }
    u0.scale(1.0 / n0);
    let d = Deflator::new(modes)?;
    let tr = deflate_and_measure(&u0, &d, &prop, profile, study.t_end, study.redeflate, study.per_decade)?;
    let keep: Vec<usize> = (0..tr.t.len()).filter(|&i| tr.t[i] >= study.fit_from).collect();
    let ts: Vec<f64> = keep.iter().map(|&i| tr.t[i]).collect();
    let ns: Vec<f64> = keep.iter().map(|&i| tr.norm[i]).collect();
    let fit = growth_fit(&ts, &ns)?;
    Ok(GrowthReport {
        x_max,
        nx: study.nx,
        n_mu: mu.len(),
        modes: summaries,
        local_exponent: local_exponent(&tr.t, &tr.norm),
        trajectory: tr,
        fit,
    })
}
