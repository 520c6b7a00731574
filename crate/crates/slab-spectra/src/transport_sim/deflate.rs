//! Removal of the exponentially growing part: u ← u - Σ Re-paired (⟨u, χ⟩/⟨ψ, χ⟩) ψ.

use super::evolve::{check_domain, Propagator, Trajectory};
use super::field::Field;
use super::modes::{inner, Mode};
use crate::discretize::Profile;
use crate::error::{Error, Result};
use crate::C64;

/// Spectral projector onto the complement of the growing modes.
#[derive(Debug, Clone)]
pub struct Deflator {
    pub modes: Vec<Mode>,
    /// 1 for real modes and for complex modes whose partner -z̄ is also listed, else 2.
    factors: Vec<f64>,
}

impl Deflator {
    pub fn new(modes: Vec<Mode>) -> Result<Self> {
        for m in &modes {
            let scale = m.chi.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            if !(m.pairing.norm() > 0.0) || scale == 0.0 {
                return Err(Error::Simulation(format!("mode at z = {} has a degenerate left vector", m.z)));
            }
        }
        let factors = modes
            .iter()
            .map(|m| {
                let partner = C64::new(-m.z.re, m.z.im);
                let listed = modes.iter().any(|o| !std::ptr::eq(o, m) && (o.z - partner).norm() <= 1e-8 * m.z.norm());
                if m.is_real() || listed {
                    1.0
                } else {
                    2.0
                }
            })
            .collect();
        Ok(Deflator { modes, factors })
    }

    /// Mode amplitudes ⟨u, χ⟩/⟨ψ, χ⟩.
    pub fn amplitudes(&self, u: &Field) -> Vec<C64> {
        let uc: Vec<C64> = u.values.iter().map(|&v| C64::new(v, 0.0)).collect();
        self.modes.iter().map(|m| inner(u.x, &u.mu, &uc, &m.chi) / m.pairing).collect()
    }

    pub fn apply(&self, u: &mut Field) {
        let amps = self.amplitudes(u);
        for ((m, a), f) in self.modes.iter().zip(amps).zip(&self.factors) {
            // an unlisted conjugate partner contributes conj(aψ): remove 2 Re(aψ)
            for (v, p) in u.values.iter_mut().zip(&m.psi) {
                *v -= f * (a * p).re;
            }
        }
    }
}

/// Sampling times: log-uniform between dt and T, rounded to whole steps, ~`per_decade` per decade.
pub fn log_times(dt: f64, t_end: f64, per_decade: usize) -> Vec<usize> {
    let n_end = (t_end / dt).round() as usize;
    let decades = (t_end / dt).log10();
    let n = (decades * per_decade as f64).ceil().max(1.0) as usize;
    let mut out: Vec<usize> = (0..=n)
        .map(|k| (10f64.powf(decades * k as f64 / n as f64)).round() as usize)
        .map(|s| s.clamp(1, n_end))
        .collect();
    out.dedup();
    out
}

/// ‖Z_t u₀‖ for the deflated semigroup, re-projecting every `redeflate` time units and at every sample.
pub fn deflate_and_measure(
    u0: &Field,
    deflator: &Deflator,
    prop: &Propagator,
    profile: &Profile,
    t_end: f64,
    redeflate: f64,
    per_decade: usize,
) -> Result<Trajectory> {
    check_domain(u0, profile, t_end)?;
    let dt = prop.dt;
    let samples = log_times(dt, t_end, per_decade);
    let every = ((redeflate / dt).round() as usize).max(1);
    let n_end = *samples.last().unwrap_or(&0);
    let mut u = u0.clone();
    deflator.apply(&mut u);
    let mut tr = Trajectory { t: vec![0.0], norm: vec![u.norm()] };
    let mut next = 0;
    for k in 1..=n_end {
        prop.step(&mut u);
        let sample = samples.get(next) == Some(&k);
        if sample || k % every == 0 {
            deflator.apply(&mut u);
        }
        if sample {
            let n = u.norm();
            if !n.is_finite() {
                return Err(Error::Simulation(format!("non-finite norm at t = {}", k as f64 * dt)));
            }
            tr.t.push(k as f64 * dt);
            tr.norm.push(n);
            next += 1;
        }
    }
    Ok(tr)
}
