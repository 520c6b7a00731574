//! Exponential integrals E_j(s) = ∫_1^∞ e^{-st} t^{-j-1} dt, the entire remainder
//! θ(s) = E_0(s) + ln s + γ, and the branch of ln(-iz) used throughout.

use crate::error::{Error, Result};
use crate::quad;
use num_complex::Complex64 as C64;
use serde::Serialize;
use std::f64::consts::PI;
use std::sync::OnceLock;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Below this modulus E_0 is evaluated from the θ series.
pub const SERIES_RADIUS: f64 = 4.0;
/// Hard limit for the θ series; beyond it cancellation makes the series useless.
pub const THETA_SERIES_CAP: f64 = 60.0;
pub const THETA_MAX_TERMS: usize = 200;
const QUAD_SECTOR: f64 = 0.75 * PI;
const QUAD_TOL: f64 = 1e-14;

/// ln(-iz) with the cut along the negative imaginary axis.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BranchedLog {
    pub z: C64,
    pub value: C64,
}

impl BranchedLog {
    pub fn new(z: C64) -> Result<Self> {
        Ok(BranchedLog { z, value: ln_minus_iz(z)? })
    }
}

pub fn on_cut(z: C64) -> bool {
    z.re == 0.0 && z.im <= 0.0
}

pub fn ln_minus_iz(z: C64) -> Result<C64> {
    if on_cut(z) {
        return Err(Error::BranchCut(format!("ln(-iz) undefined at z = {z}")));
    }
    Ok((C64::new(0.0, -1.0) * z).ln())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Series,
    Quadrature,
    Recurrence,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ExpIntValue {
    pub order: usize,
    pub arg: C64,
    pub value: C64,
    pub regime: Regime,
}

/// θ(s) = -Σ_{m≥1} (-s)^m / (m!·m).
pub fn theta_series(s: C64, tol: f64) -> Result<C64> {
    if s.norm() > THETA_SERIES_CAP {
        return Err(Error::NoConvergence(format!(
            "theta series radius exceeded: |s| = {}",
            s.norm()
        )));
    }
    let mut sum = C64::new(0.0, 0.0);
    let mut pow = C64::new(1.0, 0.0);
    for m in 1..=THETA_MAX_TERMS {
        pow *= -s / m as f64;
        let term = pow / m as f64;
        sum -= term;
        if term.norm() < tol * sum.norm().max(1.0) {
            return Ok(sum);
        }
    }
    Err(Error::NoConvergence(format!("theta series did not converge at s = {s}")))
}

/// θ on the whole plane: series near the origin and on the left, E_0 + ln s + γ elsewhere.
pub fn theta(s: C64) -> C64 {
    if s.norm() < SERIES_RADIUS || s.arg().abs() > QUAD_SECTOR {
        if let Ok(v) = theta_series(s, 1e-17) {
            return v;
        }
    }
    rotated_quadrature(0, s) + s.ln() + EULER_GAMMA
}

fn check_domain(s: C64) -> Result<()> {
    if s.im == 0.0 && s.re <= 0.0 {
        return Err(Error::BranchCut(format!("E_j undefined on the cut, s = {s}")));
    }
    Ok(())
}

/// E_j(s) = (e^{-s}/s) ∫_0^∞ e^{-u} (1 + u/s)^{-j-1} du, valid for |arg s| < π.
fn rotated_quadrature(j: usize, s: C64) -> C64 {
    let p = -(j as f64) - 1.0;
    let integrand = |t: f64| {
        let u = t / (1.0 - t);
        let du = 1.0 / ((1.0 - t) * (1.0 - t));
        let base = C64::new(1.0, 0.0) + u / s;
        (-u).exp() * base.powf(p) * du
    };
    let r = quad::adaptive(integrand, 0.0, 1.0, QUAD_TOL, 400);
    r.value * (-s).exp() / s
}

/// E_j(s) with regime selection.
pub fn exp_int(j: usize, s: C64) -> Result<ExpIntValue> {
    if j >= 1 && s.norm() == 0.0 {
        return Ok(ExpIntValue { order: j, arg: s, value: C64::new(1.0 / j as f64, 0.0), regime: Regime::Series });
    }
    check_domain(s)?;
    let r = s.norm();
    let left = s.arg().abs() > QUAD_SECTOR;
    if r >= SERIES_RADIUS && !left {
        return Ok(ExpIntValue { order: j, arg: s, value: rotated_quadrature(j, s), regime: Regime::Quadrature });
    }
    let e0 = -s.ln() - EULER_GAMMA + theta_series(s, 1e-17)?;
    if j == 0 {
        return Ok(ExpIntValue { order: 0, arg: s, value: e0, regime: Regime::Series });
    }
    let em = (-s).exp();
    let mut e = e0;
    for k in 0..j {
        e = (em - s * e) / (k + 1) as f64;
    }
    Ok(ExpIntValue { order: j, arg: s, value: e, regime: Regime::Recurrence })
}

/// E_j(s) for bulk evaluation. In the closed right half plane with |s| ≥ SERIES_RADIUS
/// a fixed 64-point Gauss–Laguerre rule replaces the adaptive quadrature (relative error
/// about 1e-12); elsewhere this is [`exp_int`].
pub fn ej_fast(j: usize, s: C64) -> Result<C64> {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    if s.re < 0.0 || s.norm() < SERIES_RADIUS {
        return ej(j, s);
    }
    let (x, w) = RULE.get_or_init(|| quad::gauss_laguerre(64));
    let p = -(j as f64) - 1.0;
    let inv = 1.0 / s;
    let sum: C64 = x.iter().zip(w).map(|(&u, &w)| (C64::new(1.0, 0.0) + u * inv).powf(p) * w).sum();
    Ok(sum * (-s).exp() * inv)
}

/// Shorthand for the value of E_j(s).
pub fn ej(j: usize, s: C64) -> Result<C64> {
    exp_int(j, s).map(|v| v.value)
}

/// Independent check: direct quadrature of ∫_1^∞ e^{-st} t^{-j-1} dt in the variable v = ln t.
pub fn exp_int_oracle(j: usize, s: C64, tol: f64) -> Result<C64> {
    if s.re <= 0.0 {
        return Err(Error::Domain(format!("oracle needs Re s > 0, got {s}")));
    }
    let vmax = (60.0 / s.re).ln().max(1.0);
    let jf = j as f64;
    let r = quad::adaptive(|v: f64| (-s * v.exp() - jf * v).exp(), 0.0, vmax, tol, 20_000);
    if !r.converged {
        return Err(Error::NoConvergence(format!(
            "oracle tolerance {tol} not reached, estimate {}",
            r.error
        )));
    }
    Ok(r.value)
}
