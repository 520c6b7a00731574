//! One function per command. Each runs on two grid levels (coarse, refined) and reports the deltas.

use super::config::Loaded;
use crate::discretize::{CollisionKernel, GridSpec, KernelMode, Profile};
use crate::error::{Error, Result};
use crate::linalg::smallest_singular;
use crate::roots::line_fit;
use crate::spectra::{
    self, admissible_delta, asymptotics_fit, bc_set, classify_singularity, discrete_spectrum_general,
    discrete_spectrum_isotropic, eta_flow, in_e, kappa_scan, kernel_tolerance, s_zero, Classification, Coefficients,
    Contour, CoefficientSummary, Eigenvalue, Formula, Model, Verdict,
};
use crate::transport_sim::{
    evolve, growth_run, initial_field, GrowthStudy, GrowthVerdict, InitialData, MuQuad, Propagator, SimParams, XGrid,
};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// What a command hands back to the report writer.
#[derive(Debug, Default)]
pub struct Outcome {
    pub levels: Vec<Value>,
    pub deltas: BTreeMap<String, f64>,
    pub unresolved: Option<String>,
    pub result: Value,
    pub csv: Option<String>,
}

/// Shortest round-trip decimal, as in the JSON reports; non-finite values become `nan`.
fn n(x: f64) -> String {
    if x.is_finite() {
        Value::from(x).to_string()
    } else {
        "nan".into()
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

fn galerkin_levels(g: &GridSpec) -> (GridSpec, GridSpec, Vec<Value>) {
    let f = g.refined();
    let levels = vec![json!({ "galerkin_cells": g.n_cells() }), json!({ "galerkin_cells": f.n_cells() })];
    (g.clone(), f, levels)
}

fn require_isotropic(l: &Loaded, command: &str) -> Result<()> {
    if l.collision.mode != KernelMode::Isotropic {
        return Err(Error::Invalid(format!("collision.mode: `{command}` needs the isotropic kernel")));
    }
    Ok(())
}

/// Configured δ, or half the admissible bound, capped by the bound of this grid.
fn delta_for(l: &Loaded, g: &GridSpec) -> f64 {
    let bound = admissible_delta(g, &l.collision, l.config.c_n);
    l.config.delta.unwrap_or(0.5 * bound).min(bound)
}

fn eigenvalues(g: &GridSpec, k: &CollisionKernel, profile: &Profile, contour: Option<Contour>) -> Result<Vec<Eigenvalue>> {
    if profile.is_zero() {
        return Ok(Vec::new());
    }
    let cmax = profile.segments.iter().map(|s| s.value).fold(0.0, f64::max);
    match (k.mode, contour) {
        (KernelMode::Isotropic, None) => Ok(discrete_spectrum_isotropic(g, (1e-300, cmax + 1.0))?.eigenvalues),
        (_, c) => {
            let r = cmax * k.norm() + 1.0;
            discrete_spectrum_general(g, k, c.unwrap_or(Contour { re: (-r, r), im: (1e-3, r) }))
        }
    }
}

pub fn spectrum(l: &Loaded) -> Result<Outcome> {
    let contour = l.config.spectrum.as_ref().and_then(|s| s.contour);
    let (g1, g2, levels) = galerkin_levels(&l.grid);
    let e1 = eigenvalues(&g1, &l.collision, &l.profile, contour)?;
    let e2 = eigenvalues(&g2, &l.collision, &l.profile, contour)?;
    let mut out = Outcome { levels, ..Default::default() };
    if e1.len() == e2.len() {
        let d = e1.iter().zip(&e2).map(|(a, b)| (a.z - b.z).norm() / b.z.norm()).fold(0.0, f64::max);
        out.deltas.insert("eigenvalue_rel".into(), d);
    } else {
        out.unresolved = Some(format!("eigenvalue count differs between levels: {} vs {}", e1.len(), e2.len()));
    }
    let mut csv = String::from("cells,re,im,residual,multiplicity\n");
    for (g, e) in [(&g1, &e1), (&g2, &e2)] {
        for v in e {
            writeln!(csv, "{},{},{},{},{}", g.n_cells(), n(v.z.re), n(v.z.im), n(v.residual), v.multiplicity).ok();
        }
    }
    out.result = json!({ "eigenvalues": e2, "eigenvalues_coarse": e1, "contour": contour });
    out.csv = Some(csv);
    Ok(out)
}

pub fn svals(l: &Loaded) -> Result<Outcome> {
    let task = l.config.svals.clone().unwrap_or_default();
    let (g1, g2, levels) = galerkin_levels(&l.grid);
    let p1 = spectra::ac_splitting_profile(&g1, &l.collision, &task.k, task.beta)?;
    let p2 = spectra::ac_splitting_profile(&g2, &l.collision, &task.k, task.beta)?;
    let smin = |s: &spectra::KSlice| s.singular_values.last().copied().unwrap_or(0.0);
    let d = p1.slices.iter().zip(&p2.slices).map(|(a, b)| (smin(a) - smin(b)).abs()).fold(0.0, f64::max);
    let mut csv = String::from("cells,k,sigma_min,sigma_max,dim_x1,near_kernel,delta_rank\n");
    for (g, p) in [(&g1, &p1), (&g2, &p2)] {
        for s in &p.slices {
            let smax = s.singular_values.first().copied().unwrap_or(0.0);
            writeln!(csv, "{},{},{},{},{},{},{}", g.n_cells(), n(s.k), n(smin(s)), n(smax), s.dim_x1, s.near_kernel, s.delta_rank).ok();
        }
    }
    let rank_growth: Vec<Value> = p1
        .slices
        .iter()
        .zip(&p2.slices)
        .map(|(a, b)| json!({ "k": a.k, "coarse": a.delta_rank, "fine": b.delta_rank }))
        .collect();
    let mut out = Outcome { levels, ..Default::default() };
    out.deltas.insert("sigma_min_abs".into(), d);
    out.result = json!({ "profile": p2, "profile_coarse": p1, "delta_rank": rank_growth });
    out.csv = Some(csv);
    Ok(out)
}

pub fn bc(l: &Loaded) -> Result<Outcome> {
    require_isotropic(l, "bc")?;
    let (g1, g2, levels) = galerkin_levels(&l.grid);
    let le = spectra::bc::default_log_eps();
    let b1 = bc_set(&eta_flow(&g1, &le)?);
    let b2 = bc_set(&eta_flow(&g2, &le)?);
    let m = in_e(&g1)?;
    let d = b1.iter().zip(&b2).map(|(a, b)| (a.k - b.k).abs()).fold(0.0, f64::max);
    let mut out = Outcome { levels, ..Default::default() };
    out.deltas.insert("bc_abs".into(), d);
    if m.verdict == Verdict::Unresolved {
        out.unresolved = Some("membership of -1 in B_c differs between levels".into());
    }
    let mut csv = String::from("cells,k,err\n");
    for (g, b) in [(&g1, &b1), (&g2, &b2)] {
        for p in b {
            writeln!(csv, "{},{},{}", g.n_cells(), n(p.k), n(p.err)).ok();
        }
    }
    out.result = json!({ "bc_set": b2, "bc_set_coarse": b1, "in_e": m });
    out.csv = Some(csv);
    Ok(out)
}

fn s0_smallest(l: &Loaded, g: &GridSpec) -> Result<f64> {
    let s = s_zero(g, &l.collision, delta_for(l, g), l.config.c_n)?;
    Ok(smallest_singular(&s.s0).0)
}

pub fn kappa_scan_cmd(l: &Loaded) -> Result<Outcome> {
    require_isotropic(l, "kappa-scan")?;
    let task = l.config.kappa_scan.clone().unwrap_or_default();
    let scan = kappa_scan(&l.profile, l.config.grid.cells, task.range)?;
    let (g1, g2, levels) = galerkin_levels(&l.grid);
    let mut out = Outcome { levels, ..Default::default() };
    out.deltas.insert("kappa_err_max".into(), scan.values.iter().map(|v| v.err).fold(0.0, f64::max));
    let mut csv = String::from("kappa,err,k_coarse,k_fine,smin_coarse,smin_fine,shrink\n");
    let mut confirm = Vec::new();
    let mut mids = Vec::new();
    for (i, v) in scan.values.iter().enumerate() {
        let (a, b) = if task.confirm {
            (s0_smallest(l, &g1.scaled(v.kappa))?, s0_smallest(l, &g2.scaled(v.kappa))?)
        } else {
            (f64::NAN, f64::NAN)
        };
        writeln!(csv, "{},{},{},{},{},{},{}", n(v.kappa), n(v.err), n(v.k_coarse), n(v.k_fine), n(a), n(b), n(a / b)).ok();
        confirm.push(json!({ "kappa": v.kappa, "smin_coarse": a, "smin_fine": b, "shrink": a / b }));
        if task.confirm {
            if let Some(w) = scan.values.get(i + 1) {
                let km = 0.5 * (v.kappa + w.kappa);
                let (a, b) = (s0_smallest(l, &g1.scaled(km))?, s0_smallest(l, &g2.scaled(km))?);
                mids.push(json!({ "kappa": km, "smin_coarse": a, "smin_fine": b }));
            }
        }
    }
    out.result = json!({ "scan": scan, "confirmation": confirm, "midpoints": mids });
    out.csv = Some(csv);
    Ok(out)
}

struct LevelClass {
    cells: usize,
    class: Classification,
    coef: Option<Coefficients>,
    n_dim: usize,
    kernel_eigs: Vec<f64>,
}

fn classify_levels(l: &Loaded) -> Result<(spectra::Membership, Vec<LevelClass>)> {
    let m = in_e(&l.grid)?;
    let mut v = Vec::new();
    for g in [l.grid.clone(), l.grid.refined()] {
        let tol = kernel_tolerance(&g);
        let (class, coef, ns) = classify_singularity(&g, m.verdict == Verdict::Yes, tol)?;
        v.push(LevelClass { cells: g.n_cells(), class, coef, n_dim: ns.dim(), kernel_eigs: ns.kernel_eigs });
    }
    Ok((m, v))
}

pub fn classify(l: &Loaded) -> Result<Outcome> {
    require_isotropic(l, "classify")?;
    let (_, _, levels) = galerkin_levels(&l.grid);
    let mut out = Outcome { levels, ..Default::default() };
    if l.profile.is_zero() {
        out.result = json!({ "classification": Classification::None });
        return Ok(out);
    }
    let (m, v) = classify_levels(l)?;
    out.deltas.insert("y_near_minus_one_shift".into(), kernel_tolerance(&l.grid) / 3.0);
    let agree = v[0].class == v[1].class && m.verdict != Verdict::Unresolved;
    if m.verdict == Verdict::Unresolved {
        out.unresolved = Some("membership of -1 in B_c differs between levels".into());
    } else if !agree {
        out.unresolved = Some("classification differs between levels".into());
    }
    let per: Vec<Value> = v
        .iter()
        .map(|c| {
            json!({
                "cells": c.cells,
                "classification": c.class,
                "n_dim": c.n_dim,
                "kernel_eigenvalues": c.kernel_eigs,
                "coefficients": CoefficientSummary::from(c.class, &c.coef),
            })
        })
        .collect();
    out.result = json!({
        "in_e": m,
        "classification": agree.then_some(v[1].class),
        "levels": per,
    });
    Ok(out)
}

fn default_formulas(class: Classification, isotropic: bool) -> Vec<Formula> {
    let mut f = vec![Formula::Este0];
    if isotropic {
        match class {
            Classification::Logarithmic => f.extend([Formula::Slog, Formula::Theorem1Power]),
            Classification::FirstOrder => f.extend([Formula::SsimplePole, Formula::Theorem1Power]),
            Classification::None => {}
        }
    }
    f
}

pub fn asymptotics(l: &Loaded) -> Result<Outcome> {
    let task = l.config.asymptotics.clone().unwrap_or_default();
    let iso = l.collision.mode == KernelMode::Isotropic;
    let (_, _, levels) = galerkin_levels(&l.grid);
    let mut out = Outcome { levels, ..Default::default() };
    if l.profile.is_zero() {
        return Err(Error::Invalid("profile: asymptotics at 0 need c != 0".into()));
    }
    let classes = if iso { Some(classify_levels(l)?) } else { None };
    let class = classes.as_ref().map(|(_, v)| v[1].class).unwrap_or(Classification::None);
    if let Some((m, v)) = &classes {
        if m.verdict == Verdict::Unresolved || v[0].class != v[1].class {
            out.unresolved = Some("classification differs between levels; formulas chosen from the fine level".into());
        }
    }
    let formulas = task.formulas.clone().unwrap_or_else(|| default_formulas(class, iso));
    let grids = [l.grid.clone(), l.grid.refined()];
    let mut reports = Vec::new();
    let mut csv = String::from("cells,formula,arg,abs_z,residual,rate\n");
    for f in &formulas {
        let mut per_level = Vec::new();
        for (i, g) in grids.iter().enumerate() {
            let sz;
            let coef = classes.as_ref().and_then(|(_, v)| v[i].coef.clone());
            let model = match f {
                Formula::Este0 => {
                    sz = s_zero(g, &l.collision, delta_for(l, g), l.config.c_n)?;
                    Model::Este0(&sz)
                }
                Formula::Slog => match &coef {
                    Some(Coefficients::Log(c)) => Model::Slog(c),
                    _ => return Err(Error::Invalid("asymptotics.formulas: slog needs a logarithmic singularity".into())),
                },
                Formula::SsimplePole | Formula::SsimpleVartheta0 => match &coef {
                    Some(Coefficients::Simple(c)) => Model::Simple(c),
                    _ => return Err(Error::Invalid("asymptotics.formulas: ssimple needs a first-order singularity".into())),
                },
                Formula::Theorem1Power => Model::Power,
            };
            if !iso && *f != Formula::Este0 {
                return Err(Error::Invalid("asymptotics.formulas: only este0 applies to anisotropic kernels".into()));
            }
            let r = asymptotics_fit(*f, &model, g, &l.collision, &task.rays, &task.radii)?;
            for ray in &r.rays {
                for (k, &a) in ray.abs_z.iter().enumerate() {
                    writeln!(csv, "{},{},{},{},{},{}", g.n_cells(), to_value(f).as_str().unwrap_or(""), n(ray.arg), n(a), n(ray.residual[k]), n(ray.rate[k])).ok();
                }
            }
            per_level.push(r);
        }
        let d = per_level[0]
            .rays
            .iter()
            .zip(&per_level[1].rays)
            .map(|(a, b)| (a.exponent - b.exponent).abs())
            .fold(0.0, f64::max);
        out.deltas.insert(format!("exponent_{}", to_value(f).as_str().unwrap_or("")), d);
        reports.push(json!({ "formula": f, "fine": per_level[1], "coarse": per_level[0] }));
    }
    out.result = json!({ "classification": class, "fits": reports });
    out.csv = Some(csv);
    Ok(out)
}

fn sim_settings(l: &Loaded, t_end: f64, cmd: &str) -> Result<(usize, f64, f64)> {
    let nx = l.config.grid.nx.ok_or_else(|| Error::Invalid(format!("grid.nx is required for `{cmd}`")))?;
    let dt = l.config.grid.dt.ok_or_else(|| Error::Invalid(format!("grid.dt is required for `{cmd}`")))?;
    let x_max = l.config.grid.x_max.unwrap_or(l.profile.radius() + t_end + 0.5);
    Ok((nx, dt, x_max))
}

/// Random initial data draws from ChaCha seeded with the config seed mixed into the task seed.
fn seeded(init: &InitialData, seed: u64) -> InitialData {
    match init {
        InitialData::Random { seed: s, terms } => InitialData::Random { seed: s ^ seed, terms: *terms },
        other => other.clone(),
    }
}

pub fn evolve_cmd(l: &Loaded) -> Result<Outcome> {
    let task = l.config.evolve.clone().ok_or_else(|| Error::Invalid("evolve: section missing".into()))?;
    let (nx, dt, x_max) = sim_settings(l, task.t_end, "evolve")?;
    let mu = MuQuad::new(l.config.grid.mu)?;
    let init = seeded(&task.initial, l.config.seed);
    let mut out = Outcome::default();
    let mut trs = Vec::new();
    for n in [nx, 2 * nx] {
        let x = XGrid { x_max, n };
        let prop = Propagator::new(&SimParams { x_max, nx: n, dt, max_cfl: task.max_cfl }, &mu, &l.profile, &l.collision)?;
        let mut u0 = initial_field(&init, &l.profile, &l.grid, x, &mu)?;
        let n0 = u0.norm();
        if n0 == 0.0 {
            return Err(Error::Invalid("evolve.initial: field vanishes on the grid".into()));
        }
        u0.scale(1.0 / n0);
        let (tr, _) = evolve(&u0, &prop, &l.profile, task.t_end, task.every)?;
        out.levels.push(json!({ "nx": n, "n_mu": mu.len(), "dt": dt, "x_max": x_max, "galerkin_cells": l.grid.n_cells() }));
        trs.push(tr);
    }
    let rate = |tr: &crate::transport_sim::Trajectory| {
        let sel: Vec<usize> = (0..tr.t.len()).filter(|&i| tr.t[i] >= 0.5 * task.t_end).collect();
        let t: Vec<f64> = sel.iter().map(|&i| tr.t[i]).collect();
        let y: Vec<f64> = sel.iter().map(|&i| tr.norm[i].max(1e-300).ln()).collect();
        if t.len() >= 2 {
            line_fit(&t, &y).1
        } else {
            f64::NAN
        }
    };
    let (r1, r2) = (rate(&trs[0]), rate(&trs[1]));
    let last = |tr: &crate::transport_sim::Trajectory| *tr.norm.last().unwrap_or(&0.0);
    out.deltas.insert("final_norm_rel".into(), (last(&trs[0]) - last(&trs[1])).abs() / last(&trs[1]).max(1e-300));
    out.deltas.insert("rate_abs".into(), (r1 - r2).abs());
    let mut csv = String::from("t,norm_coarse,norm_fine\n");
    for i in 0..trs[1].t.len().min(trs[0].t.len()) {
        writeln!(csv, "{},{},{}", n(trs[1].t[i]), n(trs[0].norm[i]), n(trs[1].norm[i])).ok();
    }
    out.result = json!({
        "initial": init,
        "rate_tail_fit": r2,
        "rate_tail_fit_coarse": r1,
        "final_norm": last(&trs[1]),
        "samples": trs[1].t.len(),
    });
    out.csv = Some(csv);
    Ok(out)
}

fn same_verdict(a: &GrowthVerdict, b: &GrowthVerdict) -> bool {
    std::mem::discriminant(a) == std::mem::discriminant(b) && !matches!(a, GrowthVerdict::Unresolved { .. })
}

pub fn growth(l: &Loaded) -> Result<Outcome> {
    let task = l.config.growth.clone().ok_or_else(|| Error::Invalid("growth: section missing".into()))?;
    let (nx, dt, x_max) = sim_settings(l, task.t_end, "growth")?;
    let init = seeded(&task.initial, l.config.seed);
    let mut out = Outcome::default();
    let mut reps = Vec::new();
    for n in [nx, 2 * nx] {
        let study = GrowthStudy {
            mu: l.config.grid.mu,
            nx: n,
            dt,
            t_end: task.t_end,
            x_max: Some(x_max),
            redeflate: task.redeflate,
            galerkin_cells: l.grid.n_cells(),
            eps_min: task.eps_min,
            contour: task.contour,
            per_decade: task.per_decade,
            max_cfl: task.max_cfl,
            fit_from: task.fit_from,
            initial: init.clone(),
        };
        let r = growth_run(&l.profile, &l.collision, &study)?;
        out.levels.push(json!({ "nx": n, "n_mu": r.n_mu, "dt": dt, "x_max": r.x_max, "galerkin_cells": l.grid.n_cells() }));
        reps.push(r);
    }
    let (a, b) = (&reps[0].fit.verdict, &reps[1].fit.verdict);
    let verdict = if same_verdict(a, b) {
        Some(b.clone())
    } else {
        out.unresolved = Some(match (a, b) {
            (_, GrowthVerdict::Unresolved { reason }) | (GrowthVerdict::Unresolved { reason }, _) => reason.clone(),
            _ => "verdict differs between levels".into(),
        });
        None
    };
    let param = |v: &GrowthVerdict| match v {
        GrowthVerdict::Logarithmic { b } => Some(*b),
        GrowthVerdict::Power { p, .. } => Some(*p),
        _ => None,
    };
    if let (Some(x), Some(y)) = (param(a), param(b)) {
        out.deltas.insert("growth_parameter_abs".into(), (x - y).abs());
    }
    let last = |r: &crate::transport_sim::GrowthReport| *r.trajectory.norm.last().unwrap_or(&0.0);
    out.deltas.insert("final_norm_rel".into(), (last(&reps[0]) - last(&reps[1])).abs() / last(&reps[1]).max(1e-300));
    let mut csv = String::from("t,norm_coarse,norm_fine\n");
    let (t0, t1) = (&reps[0].trajectory, &reps[1].trajectory);
    for i in 0..t0.t.len().min(t1.t.len()) {
        writeln!(csv, "{},{},{}", n(t1.t[i]), n(t0.norm[i]), n(t1.norm[i])).ok();
    }
    out.result = json!({
        "initial": init,
        "verdict": verdict,
        "fine": { "modes": reps[1].modes, "fit": reps[1].fit, "local_exponent": reps[1].local_exponent },
        "coarse": { "modes": reps[0].modes, "fit": reps[0].fit },
    });
    out.csv = Some(csv);
    Ok(out)
}
