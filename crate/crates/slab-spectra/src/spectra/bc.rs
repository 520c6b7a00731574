//! The set B_c of limits of the eigenvalues of Q̃(iε) = Y + ½ ln ε ⟨·,√c⟩√c as ε ↓ 0.

use crate::discretize::{assemble_y, GridSpec, Profile};
use crate::error::Result;
use crate::linalg::{complement_basis, sym_eigen, RMat};
use crate::roots::line_fit;
use crate::par;
use serde::Serialize;

/// ln ε = -10^{k/2}, k = 0..12. Only ln ε enters Q̃(iε), so ε itself may underflow.
pub fn default_log_eps() -> Vec<f64> {
    (0..=12).map(|k| -(10f64).powf(k as f64 / 2.0)).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub eta: Vec<f64>,
    pub escaping: bool,
    pub limit: f64,
    pub fit_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EtaFlow {
    pub log_eps: Vec<f64>,
    pub trajectories: Vec<Trajectory>,
    /// (step, trajectory) pairs where the overlap match was not clear-cut.
    pub ties: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BcPoint {
    pub k: f64,
    pub err: f64,
}

fn qtilde_imag(y: &RMat, s: &crate::linalg::RVec, log_eps: f64) -> RMat {
    y + (s * s.transpose()) * (0.5 * log_eps)
}

/// Greedy maximal-overlap assignment of the columns of `b` to those of `a`.
fn match_columns(a: &RMat, b: &RMat) -> (Vec<usize>, Vec<usize>) {
    let n = a.ncols();
    let ov = (a.transpose() * b).map(f64::abs);
    let mut perm = vec![usize::MAX; n];
    let mut used_r = vec![false; n];
    let mut used_c = vec![false; n];
    let mut ties = Vec::new();
    for _ in 0..n {
        let mut best = (0.0, 0, 0);
        for i in (0..n).filter(|&i| !used_r[i]) {
            for j in (0..n).filter(|&j| !used_c[j]) {
                if ov[(i, j)] > best.0 || best.0 == 0.0 && perm[i] == usize::MAX && !used_c[j] && best == (0.0, 0, 0) {
                    best = (ov[(i, j)], i, j);
                }
            }
        }
        let (v, i, j) = best;
        let second = (0..n)
            .filter(|&k| !used_c[k] && k != j)
            .map(|k| ov[(i, k)])
            .fold(0.0, f64::max);
        if v - second < 1e-3 {
            ties.push(i);
        }
        perm[i] = j;
        used_r[i] = true;
        used_c[j] = true;
    }
    (perm, ties)
}

/// Eigenvalue trajectories of Q̃(iε) along `log_eps` (ln ε, decreasing), matched by eigenvector overlap.
pub fn eta_flow(grid: &GridSpec, log_eps: &[f64]) -> Result<EtaFlow> {
    let y = assemble_y(grid);
    let s = grid.sqrt_c();
    let n = y.nrows();
    let eig: Vec<(Vec<f64>, RMat)> = par::map(log_eps, |&l| sym_eigen(&qtilde_imag(&y, &s, l)));
    let mut track: Vec<usize> = (0..n).collect();
    let mut etas: Vec<Vec<f64>> = (0..n).map(|t| vec![eig[0].0[t]]).collect();
    let mut ties = Vec::new();
    for k in 1..eig.len() {
        let prev = RMat::from_fn(n, n, |r, c| eig[k - 1].1[(r, track[c])]);
        let (perm, t) = match_columns(&prev, &eig[k].1);
        ties.extend(t.into_iter().map(|i| (k, i)));
        track = perm;
        for (t, &col) in track.iter().enumerate() {
            etas[t].push(eig[k].0[col]);
        }
    }
    let snorm = s.norm_squared();
    let l_last = *log_eps.last().unwrap_or(&-1.0);
    let trajectories = etas
        .into_iter()
        .map(|eta| {
            let escaping = snorm > 0.0 && *eta.last().unwrap() < 0.25 * l_last * snorm;
            let (limit, fit_error) = extrapolate(log_eps, &eta);
            Trajectory { eta, escaping, limit, fit_error }
        })
        .collect();
    Ok(EtaFlow { log_eps: log_eps.to_vec(), trajectories, ties })
}

/// η ≈ k + b/ln ε on the last three points; error from the residual and the shift against the previous window.
fn extrapolate(log_eps: &[f64], eta: &[f64]) -> (f64, f64) {
    let m = eta.len();
    if m < 3 {
        return (eta[m - 1], f64::INFINITY);
    }
    let fit = |lo: usize| {
        let x: Vec<f64> = log_eps[lo..lo + 3].iter().map(|l| 1.0 / l).collect();
        line_fit(&x, &eta[lo..lo + 3])
    };
    let (k, _, rms, _) = fit(m - 3);
    let shift = if m >= 4 { (k - fit(m - 4).0).abs() } else { 0.0 };
    (k, rms + shift + 1e-15 * k.abs())
}

/// Finite limits, ascending; the trajectory running off to -∞ is excluded.
pub fn bc_set(flow: &EtaFlow) -> Vec<BcPoint> {
    let mut v: Vec<BcPoint> = flow
        .trajectories
        .iter()
        .filter(|t| !t.escaping)
        .map(|t| BcPoint { k: t.limit, err: t.fit_error })
        .collect();
    v.sort_by(|a, b| a.k.total_cmp(&b.k));
    v
}

/// Brute-force oracle: eigenvalues of Y compressed to √c^⊥, ascending.
pub fn bc_compressed(grid: &GridSpec) -> Vec<f64> {
    let y = assemble_y(grid);
    let u = complement_basis(&grid.sqrt_c());
    sym_eigen(&(u.transpose() * y * &u)).0
}

/// Eigenvector of the compression with eigenvalue nearest `target`, lifted back to the cell basis.
pub fn compressed_vector(grid: &GridSpec, target: f64) -> (f64, crate::linalg::RVec) {
    let y = assemble_y(grid);
    let u = complement_basis(&grid.sqrt_c());
    let (vals, vecs) = sym_eigen(&(u.transpose() * y * &u));
    let i = (0..vals.len())
        .min_by(|&a, &b| (vals[a] - target).abs().total_cmp(&(vals[b] - target).abs()))
        .unwrap_or(0);
    (vals[i], &u * vecs.column(i))
}

#[derive(Debug, Clone, Serialize)]
pub struct KappaValue {
    pub kappa: f64,
    pub err: f64,
    pub k_coarse: f64,
    pub k_fine: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct KappaScan {
    pub cells: (usize, usize),
    pub values: Vec<KappaValue>,
}

/// κ_n = -1/k_n for the negative k_n of the unit-amplitude shape, from two grids with Richardson extrapolation.
pub fn kappa_scan(shape: &Profile, cells: usize, range: (f64, f64)) -> Result<KappaScan> {
    let g1 = GridSpec::from_profile(shape, cells)?;
    let g2 = g1.refined();
    let le = default_log_eps();
    let f1 = eta_flow(&g1, &le)?;
    let f2 = eta_flow(&g2, &le)?;
    let b1: Vec<BcPoint> = bc_set(&f1).into_iter().filter(|p| p.k < 0.0).collect();
    let b2: Vec<BcPoint> = bc_set(&f2).into_iter().filter(|p| p.k < 0.0).collect();
    let mut values = Vec::new();
    for (p1, p2) in b1.iter().zip(&b2) {
        let k_ext = p2.k + (p2.k - p1.k) / 3.0;
        let err_k = (p2.k - p1.k).abs() / 3.0 + p1.err.max(p2.err);
        let kappa = -1.0 / k_ext;
        if kappa < range.0 || kappa > range.1 {
            continue;
        }
        values.push(KappaValue { kappa, err: err_k / (k_ext * k_ext), k_coarse: p1.k, k_fine: p2.k });
    }
    values.sort_by(|a, b| a.kappa.total_cmp(&b.kappa));
    Ok(KappaScan { cells: (g1.n_cells(), g2.n_cells()), values })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Yes,
    No,
    Unresolved,
}

#[derive(Debug, Clone, Serialize)]
pub struct Membership {
    pub verdict: Verdict,
    /// min_n |k_n + 1| on the coarse and fine grids.
    pub margin: (f64, f64),
    pub tol: f64,
}

/// c ∈ 𝓔 iff -1 ∈ B_c; decided on two grids with a refinement-coupled tolerance.
pub fn in_e(grid: &GridSpec) -> Result<Membership> {
    if grid.sqrt_c().norm() == 0.0 {
        return Ok(Membership { verdict: Verdict::No, margin: (f64::INFINITY, f64::INFINITY), tol: 0.0 });
    }
    let fine = grid.refined();
    let le = default_log_eps();
    let b1 = bc_set(&eta_flow(grid, &le)?);
    let b2 = bc_set(&eta_flow(&fine, &le)?);
    let near = |b: &[BcPoint]| {
        (0..b.len())
            .min_by(|&i, &j| (b[i].k + 1.0).abs().total_cmp(&(b[j].k + 1.0).abs()))
            .unwrap_or(0)
    };
    let (i1, i2) = (near(&b1), near(&b2));
    let m1 = (b1[i1].k + 1.0).abs();
    let m2 = (b2[i2].k + 1.0).abs();
    let tol = (3.0 * (b1[i1].k - b2[i2].k).abs()).max(1e-8) + b1[i1].err.max(b2[i2].err);
    let verdict = match (m1 <= tol, m2 <= tol) {
        (true, true) => Verdict::Yes,
        (false, false) => Verdict::No,
        _ => Verdict::Unresolved,
    };
    Ok(Membership { verdict, margin: (m1, m2), tol })
}

/// Critical amplitude of the grid itself: κ with κ·k_n(h) = -1 for the n-th negative compressed eigenvalue.
pub fn grid_critical_kappa(shape_grid: &GridSpec, n: usize) -> Option<f64> {
    let neg: Vec<f64> = bc_compressed(shape_grid).into_iter().filter(|&k| k < 0.0).collect();
    neg.get(n).map(|k| -1.0 / k)
}
