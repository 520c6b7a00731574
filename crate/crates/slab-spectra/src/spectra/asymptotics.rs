//! Numerical check of the small-|z| expansions of S and S^{-1} along rays.

use super::classify::{LogCoefficients, SimpleCoefficients};
use super::szero::SZero;
use crate::discretize::{assemble_q, CollisionKernel, GridSpec};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::roots::line_fit;
use crate::specfun::ln_minus_iz;
use crate::{par, C64};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formula {
    Este0,
    Slog,
    SsimplePole,
    SsimpleVartheta0,
    Theorem1Power,
}

/// Model and predicted error rate for one formula.
pub enum Model<'a> {
    Este0(&'a SZero),
    Slog(&'a LogCoefficients),
    Simple(&'a SimpleCoefficients),
    Power,
}

#[derive(Debug, Clone, Serialize)]
pub struct RayFit {
    pub arg: f64,
    pub abs_z: Vec<f64>,
    pub residual: Vec<f64>,
    /// Predicted rate r(z) the residual is fitted against.
    pub rate: Vec<f64>,
    /// Slope of ln residual against ln r(z); for the power law, of ln‖S^{-1}‖ against ln(1/|z|).
    pub exponent: f64,
    pub exponent_se: f64,
    /// Smallest residual when the tail stops decreasing (grid or roundoff floor).
    pub floor: Option<f64>,
    /// ‖z S^{-1}(z) - C‖/‖C‖ for the first-order pole coefficient C.
    pub pole_rel_error: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticsReport {
    pub formula: Formula,
    pub rays: Vec<RayFit>,
}

pub fn default_radii() -> Vec<f64> {
    (0..=12).map(|k| 10f64.powf(-1.0 - k as f64 / 4.0)).collect()
}

pub fn default_rays() -> Vec<f64> {
    use std::f64::consts::PI;
    vec![PI / 4.0, PI / 2.0, 3.0 * PI / 4.0]
}

fn rate(formula: Formula, z: C64) -> f64 {
    let r = z.norm();
    let l = r.ln().abs();
    match formula {
        Formula::Este0 => r * l,
        Formula::Slog => r * l * l,
        Formula::SsimplePole | Formula::SsimpleVartheta0 => 1.0 / l,
        Formula::Theorem1Power => 1.0 / r,
    }
}

/// Residual and, for the pole form, relative error of the leading coefficient at one z.
fn residual_at(formula: Formula, model: &Model<'_>, q: &CMat, z: C64) -> Result<(f64, Option<f64>)> {
    match (formula, model) {
        (Formula::Este0, Model::Este0(sz)) => {
            let s = super::charfn::s_from_q(q)?;
            Ok((linalg::norm2(&(s - sz.model(z)?)), None))
        }
        (Formula::Slog, Model::Slog(c)) => {
            let si = super::charfn::sinv_from_q(q)?;
            let lz = ln_minus_iz(z)? - C64::new(c.xi.ln(), 0.0);
            let m = &c.g - (&c.e_tilde * c.e_tilde.transpose()) * lz;
            Ok((linalg::norm2(&(si - m)), None))
        }
        (Formula::SsimplePole, Model::Simple(c)) => {
            let si = super::charfn::sinv_from_q(q)?;
            let model = &c.pole / z + &c.b0;
            let rel = linalg::norm2(&(&si * z - &c.pole)) / linalg::norm2(&c.pole);
            Ok((linalg::norm2(&(si - model)), Some(rel)))
        }
        (Formula::SsimpleVartheta0, Model::Simple(c)) => {
            if c.vartheta.abs() > 1e-8 {
                return Err(Error::Invalid(format!("vartheta = {:.3e} is not zero", c.vartheta)));
            }
            let si = super::charfn::sinv_from_q(q)?;
            let rel = linalg::norm2(&(&si * z - &c.pole)) / linalg::norm2(&c.pole);
            let model = &c.pole / z + &c.b0;
            Ok((linalg::norm2(&(si - model)), Some(rel)))
        }
        (Formula::Theorem1Power, Model::Power) => {
            let si = super::charfn::sinv_from_q(q)?;
            Ok((linalg::norm2(&si), None))
        }
        _ => Err(Error::Invalid(format!("model does not match formula {formula:?}"))),
    }
}

fn fit_ray(formula: Formula, arg: f64, abs_z: &[f64], res: Vec<f64>, pole: Vec<f64>) -> RayFit {
    let zs: Vec<C64> = abs_z.iter().map(|&r| C64::from_polar(r, arg)).collect();
    let rate_v: Vec<f64> = zs.iter().map(|&z| rate(formula, z)).collect();
    // a tail that stops decreasing is a grid or roundoff floor; drop it
    let mut keep = res.len();
    let mut floor = None;
    if formula != Formula::Theorem1Power {
        while keep >= 2 && res[keep - 1] >= res[keep - 2] {
            keep -= 1;
        }
        if keep < res.len() {
            floor = Some(res[keep - 1..].iter().copied().fold(f64::INFINITY, f64::min));
        }
    }
    // slope from the smaller half of the window, where the leading term dominates
    let start = if keep >= 6 { keep - keep.div_ceil(2) } else { 0 };
    let x: Vec<f64> = rate_v[start..keep].iter().map(|r| r.ln()).collect();
    let y: Vec<f64> = res[start..keep].iter().map(|r| r.max(1e-300).ln()).collect();
    let (_, slope, _, se) = line_fit(&x, &y);
    RayFit { arg, abs_z: abs_z.to_vec(), residual: res, rate: rate_v, exponent: slope, exponent_se: se, floor, pole_rel_error: pole }
}

pub fn asymptotics_fit(
    formula: Formula,
    model: &Model<'_>,
    grid: &GridSpec,
    collision: &CollisionKernel,
    rays: &[f64],
    radii: &[f64],
) -> Result<AsymptoticsReport> {
    let mut out = Vec::new();
    for &arg in rays {
        let vals: Vec<Result<(f64, Option<f64>)>> = par::map(radii, |&r| {
            let z = C64::from_polar(r, arg);
            let q = assemble_q(z, grid, collision)?.entries;
            residual_at(formula, model, &q, z)
        });
        let mut res = Vec::new();
        let mut pole = Vec::new();
        for v in vals {
            let (r, p) = v?;
            res.push(r);
            pole.extend(p);
        }
        out.push(fit_ray(formula, arg, radii, res, pole));
    }
    Ok(AsymptoticsReport { formula, rays: out })
}

/// ‖S(k)h‖ for unit h ∈ 𝐍 at the given real k; first order means this is O(|k|).
pub fn first_order_strictness(grid: &GridSpec, h: &crate::linalg::RVec, ks: &[f64]) -> Result<(Vec<f64>, f64)> {
    let k = CollisionKernel::isotropic();
    let hv = linalg::cvec(&(h / h.norm()));
    let vals: Vec<Result<f64>> = par::map(ks, |&x| {
        let q = assemble_q(C64::new(x, 0.0), grid, &k)?.entries;
        let s = super::charfn::s_from_q(&q)?;
        Ok((s * &hv).norm())
    });
    let v: Vec<f64> = vals.into_iter().collect::<Result<_>>()?;
    let x: Vec<f64> = ks.iter().map(|k| k.abs().ln()).collect();
    let y: Vec<f64> = v.iter().map(|a| a.ln()).collect();
    Ok((v, line_fit(&x, &y).1))
}
