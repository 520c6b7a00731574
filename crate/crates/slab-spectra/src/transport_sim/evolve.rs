//! Strang splitting: half collision, exact-shift cubic advection, half collision.

use super::field::{Field, XGrid};
use super::mu::MuQuad;
use crate::discretize::{CollisionKernel, Profile};
use crate::error::{Error, Result};
use crate::linalg::RMat;
use crate::par;
use serde::Serialize;

/// Lagrange weights on nodes -2, -1, 0, 1 evaluated at -f.
fn cubic_weights(f: f64) -> [f64; 4] {
    let x = -f;
    let nodes = [-2.0, -1.0, 0.0, 1.0];
    let mut w = [0.0; 4];
    for (i, &ni) in nodes.iter().enumerate() {
        w[i] = nodes
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &nj)| (x - nj) / (ni - nj))
            .product();
    }
    w
}

#[derive(Debug, Clone)]
struct Shift {
    /// Whole cells; the source of cell i is i - m - f.
    m: isize,
    w: [f64; 4],
    /// Advect in reverse orientation (μ < 0).
    reverse: bool,
}

/// Precomputed one-step propagator for fixed grid, μ rule, profile, kernel and dt.
#[derive(Debug, Clone)]
pub struct Propagator {
    pub x: XGrid,
    pub mu: MuQuad,
    pub dt: f64,
    shifts: Vec<Shift>,
    /// Per x cell: index into `blocks`, or None where c = 0.
    cell_block: Vec<Option<usize>>,
    blocks: Vec<RMat>,
    /// P[j][i] = P_i(μ_j) and w_j P_i(μ_j).
    p: RMat,
    wp: RMat,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimParams {
    pub x_max: f64,
    pub nx: usize,
    pub dt: f64,
    /// Largest allowed |μ|dt/h.
    pub max_cfl: f64,
}

/// φ(A) = Σ A^k/(k+1)!, via the exponential of [[A, I], [0, 0]].
fn phi(a: &RMat) -> RMat {
    let n = a.nrows();
    let mut big = RMat::zeros(2 * n, 2 * n);
    big.view_mut((0, 0), (n, n)).copy_from(a);
    big.view_mut((0, n), (n, n)).fill_with_identity();
    big.exp().view((0, n), (n, n)).into_owned()
}

impl Propagator {
    pub fn new(params: &SimParams, mu: &MuQuad, profile: &Profile, collision: &CollisionKernel) -> Result<Self> {
        let x = XGrid { x_max: params.x_max, n: params.nx };
        let h = x.h();
        if !(params.dt > 0.0) {
            return Err(Error::Invalid("dt must be positive".into()));
        }
        let cfl = params.dt / h;
        if cfl > params.max_cfl {
            return Err(Error::Simulation(format!(
                "CFL violation: dt/h = {cfl:.3} exceeds max_cfl = {}",
                params.max_cfl
            )));
        }
        let shifts = mu
            .nodes
            .iter()
            .map(|&m| {
                let s = m.abs() * params.dt / h;
                let whole = s.floor();
                Shift { m: whole as isize, w: cubic_weights(s - whole), reverse: m < 0.0 }
            })
            .collect();
        let nb = collision.n();
        let p = RMat::from_fn(mu.len(), nb, |j, i| collision.eval(i, mu.nodes[j]));
        let wp = RMat::from_fn(mu.len(), nb, |j, i| mu.weights[j] * p[(j, i)]);
        let g = p.transpose() * &wp;
        let d2 = RMat::from_diagonal(&nalgebra::DVector::from_iterator(nb, collision.terms.iter().map(|t| t.k * t.k)));
        let mut levels: Vec<f64> = Vec::new();
        let mut cell_block = Vec::with_capacity(x.n);
        for i in 0..x.n {
            let c = profile.eval(x.center(i));
            if c == 0.0 {
                cell_block.push(None);
                continue;
            }
            let k = levels.iter().position(|&v| v == c).unwrap_or_else(|| {
                levels.push(c);
                levels.len() - 1
            });
            cell_block.push(Some(k));
        }
        // half step: u ← u + P φ(τ c D²G) τ c D² Pᵀ W u, τ = dt/2
        let tau = 0.5 * params.dt;
        let blocks = levels
            .iter()
            .map(|&c| {
                let a = &d2 * &g * (tau * c);
                phi(&a) * &d2 * (tau * c)
            })
            .collect();
        Ok(Propagator { x, mu: mu.clone(), dt: params.dt, shifts, cell_block, blocks, p, wp })
    }

    fn collide(&self, u: &mut [f64]) {
        let nx = self.x.n;
        let nmu = self.mu.len();
        let nb = self.p.ncols();
        let mut m = vec![0.0; nb];
        let mut e = vec![0.0; nb];
        for i in 0..nx {
            let Some(b) = self.cell_block[i] else { continue };
            for (k, mk) in m.iter_mut().enumerate() {
                *mk = (0..nmu).map(|j| self.wp[(j, k)] * u[j * nx + i]).sum();
            }
            let blk = &self.blocks[b];
            for (r, er) in e.iter_mut().enumerate() {
                *er = (0..nb).map(|k| blk[(r, k)] * m[k]).sum();
            }
            for j in 0..nmu {
                let add: f64 = (0..nb).map(|k| self.p[(j, k)] * e[k]).sum();
                u[j * nx + i] += add;
            }
        }
    }

    fn advect(&self, u: &mut [f64]) {
        let nx = self.x.n;
        par::for_each_chunk(u, nx, |j, col| {
            let s = &self.shifts[j];
            let mut out = vec![0.0; nx];
            let n = nx as isize;
            for (i, o) in out.iter_mut().enumerate() {
                // reversed columns shift toward lower indices
                let ii = if s.reverse { n - 1 - i as isize } else { i as isize };
                let mut acc = 0.0;
                for (k, off) in [-2isize, -1, 0, 1].iter().enumerate() {
                    let src = ii - s.m + off;
                    if (0..n).contains(&src) {
                        let src = if s.reverse { n - 1 - src } else { src } as usize;
                        acc += s.w[k] * col[src];
                    }
                }
                *o = acc;
            }
            col.copy_from_slice(&out);
        });
    }

    pub fn step(&self, u: &mut Field) {
        self.collide(&mut u.values);
        self.advect(&mut u.values);
        self.collide(&mut u.values);
    }

    pub fn steps(&self, u: &mut Field, n: usize) {
        for _ in 0..n {
            self.step(u);
        }
    }
}

/// Norm samples of an evolution.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub norm: Vec<f64>,
}

/// Domain check: X must cover the dilated support of u₀ and c for the whole horizon.
pub fn check_domain(u0: &Field, profile: &Profile, t_end: f64) -> Result<()> {
    let r = u0.effective_radius(1e-12).max(profile.radius());
    if u0.x.x_max < r + t_end - 1e-12 {
        return Err(Error::Simulation(format!(
            "domain too small: X = {} < r + T = {} + {}",
            u0.x.x_max, r, t_end
        )));
    }
    Ok(())
}

/// Evolves u₀ to `t_end`, recording ‖u_t‖ every `every` steps.
pub fn evolve(u0: &Field, prop: &Propagator, profile: &Profile, t_end: f64, every: usize) -> Result<(Trajectory, Field)> {
    check_domain(u0, profile, t_end)?;
    let nsteps = (t_end / prop.dt).round() as usize;
    if ((nsteps as f64) * prop.dt - t_end).abs() > 1e-9 * t_end.max(1.0) {
        return Err(Error::Invalid(format!("T = {t_end} is not a multiple of dt = {}", prop.dt)));
    }
    let every = every.max(1);
    let mut u = u0.clone();
    let mut tr = Trajectory { t: vec![0.0], norm: vec![u.norm()] };
    for k in 1..=nsteps {
        prop.step(&mut u);
        if k % every == 0 || k == nsteps {
            tr.t.push(k as f64 * prop.dt);
            tr.norm.push(u.norm());
        }
    }
    Ok((tr, u))
}
