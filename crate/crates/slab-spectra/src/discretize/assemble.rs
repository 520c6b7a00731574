//! Galerkin matrices of Q(z), Q̃(z), Θ(z), Y, Y₁, Y₂ in the orthonormal cell basis.
//!
//! Index convention: entry (p·N + m) for cell p and collision term m.

use super::collision::{CollisionKernel, KernelMode};
use super::grid::GridSpec;
use super::moments::{
    cell_abs_moment, cell_log_moment, cell_sign_moment, cell_sq_moment, pair_integral, span, PairQuad,
};
use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec, RMat};
use crate::par;
use crate::quad::GaussRule;
use crate::specfun::{self, EULER_GAMMA};
use num_complex::Complex64 as C64;
use serde::Serialize;
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Label {
    Q,
    Qtilde,
    Y,
    Y1,
    Y2,
    Theta,
    S,
    Sinv,
}

#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    pub entries: CMat,
    pub grid: GridSpec,
    pub n_basis: usize,
    pub label: Label,
}

impl OperatorMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn real(&self) -> RMat {
        self.entries.map(|x| x.re)
    }
}

fn key(p: (f64, f64), q: (f64, f64)) -> (i64, i64, i64) {
    let r = |x: f64| (x * 1e11).round() as i64;
    (r(p.1 - p.0), r(q.1 - q.0), r(p.0 - q.0))
}

/// n×n matrix scale(p,q)·f(p,q), with f evaluated once per distinct cell-pair geometry.
fn pair_matrix<F>(grid: &GridSpec, f: F) -> CMat
where
    F: Fn((f64, f64), (f64, f64)) -> C64 + Sync + Send,
{
    let n = grid.n_cells();
    let mut uniq: HashMap<(i64, i64, i64), usize> = HashMap::new();
    let mut reps: Vec<(usize, usize)> = Vec::new();
    let mut slot = vec![0usize; n * n];
    for p in 0..n {
        for q in 0..n {
            let k = key(span(&grid.cells[p]), span(&grid.cells[q]));
            let id = *uniq.entry(k).or_insert_with(|| {
                reps.push((p, q));
                reps.len() - 1
            });
            slot[p * n + q] = id;
        }
    }
    let vals = par::map(&reps, |&(p, q)| f(span(&grid.cells[p]), span(&grid.cells[q])));
    CMat::from_fn(n, n, |p, q| {
        let a = grid.cells[p];
        let b = grid.cells[q];
        let s = (a.c * b.c).sqrt() / (a.h() * b.h()).sqrt();
        vals[slot[p * n + q]] * s
    })
}

fn wrap(entries: CMat, grid: &GridSpec, n_basis: usize, label: Label) -> OperatorMatrix {
    OperatorMatrix { entries, grid: grid.clone(), n_basis, label }
}

/// Cell integrals of E_0(-iz|x-y|) = -ln(-iz) - γ - ln|x-y| + θ(-iz|x-y|).
fn t0_matrix(z: C64, grid: &GridSpec) -> Result<CMat> {
    let lz = specfun::ln_minus_iz(z)?;
    let opt = PairQuad::new(z.norm(), false);
    let mz = C64::new(0.0, -1.0) * z;
    Ok(pair_matrix(grid, |p, q| {
        let hh = (p.1 - p.0) * (q.1 - q.0);
        let th = pair_integral(p, q, &|u: f64| specfun::theta(mz * u.abs()), &opt);
        (-lz - EULER_GAMMA) * hh - cell_log_moment(p, q) + th
    }))
}

/// Cell integrals of sign(y-x)^j E_j(-iz|x-y|), j ≥ 1.
fn tj_matrix(j: usize, z: C64, grid: &GridSpec) -> Result<CMat> {
    specfun::ln_minus_iz(z)?;
    let opt = PairQuad::new(z.norm(), true);
    let mz = C64::new(0.0, -1.0) * z;
    Ok(pair_matrix(grid, |p, q| {
        pair_integral(
            p,
            q,
            &|u: f64| {
                let sg = if j % 2 == 1 && u > 0.0 { -1.0 } else { 1.0 };
                let s = mz * u.abs();
                let e = if s.norm() == 0.0 { C64::new(1.0 / j as f64, 0.0) } else { specfun::ej_fast(j, s).unwrap_or_default() };
                e * sg
            },
            &opt,
        )
    }))
}

/// Q(z) for K = ½⟨·,𝟏⟩𝟏 with the log singularity integrated exactly.
pub fn assemble_q_isotropic(z: C64, grid: &GridSpec) -> Result<OperatorMatrix> {
    let t0 = t0_matrix(z, grid)?;
    Ok(wrap(t0 * C64::new(-0.5, 0.0), grid, 1, Label::Q))
}

/// Kronecker-type product: (A ⊗ G)[(p,m),(q,n)] = A[p,q]·G[m,n].
pub fn kron(a: &CMat, g: &RMat) -> CMat {
    let n = a.nrows();
    let nb = g.nrows();
    CMat::from_fn(n * nb, n * nb, |i, j| a[(i / nb, j / nb)] * g[(i % nb, j % nb)])
}

/// Q(z) = -Σ_j T_j(z) ⊗ G_j.
pub fn assemble_q_expansion(z: C64, grid: &GridSpec, collision: &CollisionKernel) -> Result<OperatorMatrix> {
    expansion_guard(collision)?;
    let gs = collision.g_matrices();
    let nb = collision.n();
    let mut acc = CMat::zeros(grid.n_cells() * nb, grid.n_cells() * nb);
    for (j, g) in gs.iter().enumerate() {
        if g.iter().all(|&x| x == 0.0) {
            continue;
        }
        let t = if j == 0 { t0_matrix(z, grid)? } else { tj_matrix(j, z, grid)? };
        acc -= kron(&t, g);
    }
    Ok(wrap(acc, grid, nb, Label::Q))
}

/// Q for either kernel mode through the fastest available path.
pub fn assemble_q(z: C64, grid: &GridSpec, collision: &CollisionKernel) -> Result<OperatorMatrix> {
    match collision.mode {
        KernelMode::Isotropic => assemble_q_isotropic(z, grid),
        KernelMode::Polynomial => assemble_q_expansion(z, grid, collision),
    }
}

fn phi1(x: C64) -> C64 {
    if x.norm() < 0.5 {
        let mut t = C64::new(1.0, 0.0);
        let mut s = t;
        for k in 2..20 {
            t *= x / k as f64;
            s += t;
        }
        s
    } else {
        (x.exp() - 1.0) / x
    }
}

fn phi2(x: C64) -> C64 {
    if x.norm() < 0.5 {
        let mut t = C64::new(0.5, 0.0);
        let mut s = t;
        for k in 3..22 {
            t *= x / k as f64;
            s += t;
        }
        s
    } else {
        (x.exp() - 1.0 - x) / (x * x)
    }
}

/// Geometric Gauss panels on (0, 1] clustering toward μ = 0.
pub fn graded_mu_rule(total: usize) -> Vec<(f64, f64)> {
    let m = 8;
    let panels = total.div_ceil(m).max(2);
    let floor: f64 = 1e-11;
    let rho = (floor.ln() / panels as f64).exp();
    let g = GaussRule::new(m);
    let mut out = Vec::with_capacity(panels * m);
    let mut hi = 1.0;
    for _ in 0..panels {
        let lo = hi * rho;
        out.extend(g.on(lo, hi));
        hi = lo;
    }
    out
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DirectInfo {
    pub mu_nodes: usize,
    pub last_change: f64,
}

fn direct_once(z: C64, grid: &GridSpec, collision: &CollisionKernel, rule: &[(f64, f64)]) -> CMat {
    let n = grid.n_cells();
    let nb = collision.n();
    let kk: Vec<f64> = collision.terms.iter().map(|t| t.k).collect();
    let iz = C64::new(0.0, 1.0) * z;
    // Each μ node contributes a full matrix; rows are independent.
    let rows = par::map_range(n, |p| {
        let cp = grid.cells[p];
        let mut row = vec![C64::new(0.0, 0.0); n * nb * nb];
        for &(mu, w) in rule {
            let wv = iz / mu;
            let pp: Vec<f64> = (0..nb).map(|m| collision.eval(m, mu)).collect();
            let pm: Vec<f64> = (0..nb).map(|m| collision.eval(m, -mu)).collect();
            let hp = cp.h();
            let fp = phi1(wv * hp) * hp;
            for q in 0..n {
                let cq = grid.cells[q];
                let hq = cq.h();
                let scale = w / mu;
                let base = q * nb * nb;
                if q == p {
                    let half = phi2(wv * hp) * (hp * hp) * scale;
                    for m in 0..nb {
                        for r in 0..nb {
                            row[base + m * nb + r] += half * (pp[m] * pp[r] + pm[m] * pm[r]);
                        }
                    }
                } else {
                    let d = if q > p { cq.lo - cp.hi } else { cp.lo - cq.hi };
                    let v = (wv * d).exp() * fp * phi1(wv * hq) * hq * scale;
                    let sig = if q > p { &pp } else { &pm };
                    for m in 0..nb {
                        for r in 0..nb {
                            row[base + m * nb + r] += v * (sig[m] * sig[r]);
                        }
                    }
                }
            }
        }
        row
    });
    CMat::from_fn(n * nb, n * nb, |i, j| {
        let (p, m) = (i / nb, i % nb);
        let (q, r) = (j / nb, j % nb);
        let a = grid.cells[p];
        let b = grid.cells[q];
        let s = (a.c * b.c).sqrt() / (a.h() * b.h()).sqrt();
        -rows[p][q * nb * nb + m * nb + r] * (s * kk[m] * kk[r])
    })
}

/// Discrete-ordinates Q_N(z) for a fixed half-range rule on (0, 1]; nodes ±μ are used symmetrically.
pub fn assemble_q_rule(z: C64, grid: &GridSpec, collision: &CollisionKernel, half_rule: &[(f64, f64)]) -> Result<OperatorMatrix> {
    if z.im <= 0.0 {
        return Err(Error::Domain(format!("fixed-rule assembly needs Im z > 0; got {z}")));
    }
    Ok(wrap(direct_once(z, grid, collision, half_rule), grid, collision.n(), Label::Q))
}

/// Q(z) by direct quadrature over μ of the free resolvent kernel; nodes doubled until the
/// entrywise change drops below 1e-8 relative to the largest entry.
pub fn assemble_q_direct(
    z: C64,
    grid: &GridSpec,
    collision: &CollisionKernel,
    mu_nodes: usize,
) -> Result<(OperatorMatrix, DirectInfo)> {
    if z.im < 0.0 || z.norm() == 0.0 {
        return Err(Error::Domain(format!("direct assembly needs Im z >= 0, z != 0; got {z}")));
    }
    let mut nodes = mu_nodes.max(16);
    let mut prev = direct_once(z, grid, collision, &graded_mu_rule(nodes));
    let mut change = f64::INFINITY;
    while nodes < 25_600 {
        nodes *= 2;
        let next = direct_once(z, grid, collision, &graded_mu_rule(nodes));
        let scale = next.iter().map(|x| x.norm()).fold(0.0, f64::max).max(1e-300);
        change = (&next - &prev).iter().map(|x| x.norm()).fold(0.0, f64::max) / scale;
        prev = next;
        if change < 1e-8 {
            return Ok((wrap(prev, grid, collision.n(), Label::Q), DirectInfo { mu_nodes: nodes, last_change: change }));
        }
    }
    Err(Error::NoConvergence(format!(
        "mu quadrature: entrywise change {change:.2e} after {nodes} nodes at z = {z}"
    )))
}

/// ℓ = √c·(k_m P_m(0)) in the cell basis.
pub fn ell(grid: &GridSpec, collision: &CollisionKernel) -> CVec {
    let s = grid.sqrt_c();
    let g = collision.g0_vector();
    let nb = g.len();
    CVec::from_fn(s.len() * nb, |i, _| C64::new(s[i / nb] * g[i % nb], 0.0))
}

/// B = lim_{z→0} (Q(z) - ln(-iz)ℓℓ*).
pub fn assemble_b(grid: &GridSpec, collision: &CollisionKernel) -> CMat {
    let gs = collision.g_matrices();
    let base = pair_matrix(grid, |p, q| C64::new(EULER_GAMMA * (p.1 - p.0) * (q.1 - q.0) + cell_log_moment(p, q), 0.0));
    let mut acc = kron(&base, &gs[0]);
    for (j, g) in gs.iter().enumerate().skip(1) {
        if g.iter().all(|&x| x == 0.0) {
            continue;
        }
        let t = pair_matrix(grid, |p, q| {
            let v = if j % 2 == 1 { cell_sign_moment(p, q) } else { (p.1 - p.0) * (q.1 - q.0) };
            C64::new(v / j as f64, 0.0)
        });
        acc -= kron(&t, g);
    }
    acc
}

/// Q̃(z) = ln(-iz)ℓℓ* + B.
pub fn assemble_qtilde(z: C64, grid: &GridSpec, collision: &CollisionKernel) -> Result<OperatorMatrix> {
    let lz = specfun::ln_minus_iz(z)?;
    let l = ell(grid, collision);
    let m = assemble_b(grid, collision) + (&l * l.transpose()) * lz;
    Ok(wrap(m, grid, collision.n(), Label::Qtilde))
}

/// Θ(z) := Q(z) - Q̃(z).
pub fn assemble_theta(z: C64, grid: &GridSpec, collision: &CollisionKernel) -> Result<OperatorMatrix> {
    let q = assemble_q(z, grid, collision)?;
    let qt = assemble_qtilde(z, grid, collision)?;
    Ok(wrap(q.entries - qt.entries, grid, collision.n(), Label::Theta))
}

fn real_pair(grid: &GridSpec, f: impl Fn((f64, f64), (f64, f64)) -> f64 + Sync + Send) -> RMat {
    pair_matrix(grid, |p, q| C64::new(f(p, q), 0.0)).map(|x| x.re)
}

/// Kernel ½√c(x)(γ + ln|x-y|)√c(y).
pub fn assemble_y(grid: &GridSpec) -> RMat {
    real_pair(grid, |p, q| 0.5 * (EULER_GAMMA * (p.1 - p.0) * (q.1 - q.0) + cell_log_moment(p, q)))
}

/// Kernel ½√c(x)|x-y|√c(y).
pub fn assemble_y1(grid: &GridSpec) -> RMat {
    real_pair(grid, |p, q| 0.5 * cell_abs_moment(p, q))
}

/// Kernel -⅛√c(x)(x-y)²√c(y): the z² coefficient of Q(z).
pub fn assemble_y2(grid: &GridSpec) -> RMat {
    real_pair(grid, |p, q| -0.125 * cell_sq_moment(p, q))
}

pub fn as_operator(m: &RMat, grid: &GridSpec, label: Label) -> OperatorMatrix {
    wrap(m.map(|x| C64::new(x, 0.0)), grid, 1, label)
}

/// Extreme eigenvalues of Q(i) on a grid and its refinement; used as the grid-error measure.
pub fn grid_delta(z: C64, grid: &GridSpec, collision: &CollisionKernel, k: usize) -> Result<f64> {
    let a = assemble_q(z, grid, collision)?;
    let b = assemble_q(z, &grid.refined(), collision)?;
    let top = |m: &CMat| {
        let mut e: Vec<C64> = if crate::linalg::max_abs(&(m - m.adjoint())) < 1e-12 * crate::linalg::max_abs(m).max(1e-300) {
            crate::linalg::herm_eigenvalues(m).into_iter().map(|x| C64::new(x, 0.0)).collect()
        } else {
            nalgebra::Schur::new(m.clone()).eigenvalues().map(|v| v.iter().copied().collect()).unwrap_or_default()
        };
        e.sort_by(|x, y| y.norm().total_cmp(&x.norm()));
        e.truncate(k);
        e
    };
    let ea = top(&a.entries);
    let eb = top(&b.entries);
    Ok(ea.iter().zip(&eb).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max))
}

static GUARD: OnceLock<Mutex<HashMap<String, bool>>> = OnceLock::new();

/// Compares the expansion against direct μ quadrature on a small grid, once per kernel.
fn expansion_guard(collision: &CollisionKernel) -> Result<()> {
    if collision.mode == KernelMode::Isotropic {
        return Ok(());
    }
    let id = serde_json::to_string(collision).unwrap_or_default();
    let map = GUARD.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(&ok) = map.lock().expect("guard").get(&id) {
        return if ok { Ok(()) } else { Err(guard_error()) };
    }
    let p = super::profile::Profile::step(1.0, 0.5);
    let g = GridSpec::from_profile(&p, 6)?;
    let z = C64::new(0.3, 1.0);
    let e = expansion_raw(z, &g, collision)?;
    let (d, _) = assemble_q_direct(z, &g, collision, 200)?;
    let rel = crate::linalg::frob(&(&e - &d.entries)) / crate::linalg::frob(&d.entries).max(1e-300);
    let ok = rel < 1e-6;
    map.lock().expect("guard").insert(id, ok);
    if ok {
        Ok(())
    } else {
        Err(guard_error())
    }
}

fn guard_error() -> Error {
    Error::NoConvergence("E_j expansion disagrees with direct quadrature for this kernel".into())
}

fn expansion_raw(z: C64, grid: &GridSpec, collision: &CollisionKernel) -> Result<CMat> {
    let gs = collision.g_matrices();
    let nb = collision.n();
    let mut acc = CMat::zeros(grid.n_cells() * nb, grid.n_cells() * nb);
    for (j, g) in gs.iter().enumerate() {
        if g.iter().all(|&x| x == 0.0) {
            continue;
        }
        let t = if j == 0 { t0_matrix(z, grid)? } else { tj_matrix(j, z, grid)? };
        acc -= kron(&t, g);
    }
    Ok(acc)
}
