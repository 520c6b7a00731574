//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`). `ACCEPTANCE_ONLY=2,5` restricts the run.
//! A criterion listed in `KNOWN_UNATTAINABLE` is still run and reported; its failure does
//! not fail the target. The list is empty: every criterion is expected to pass.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slab_spectra::discretize::{
    assemble_q_direct, assemble_q_expansion, assemble_q_isotropic, CollisionKernel, GridSpec, Profile, Segment,
};
use slab_spectra::linalg::{self, CMat, RVec};
use slab_spectra::roots::line_fit;
use slab_spectra::spectra::asymptotics::{default_radii, default_rays};
use slab_spectra::spectra::bc::grid_critical_kappa;
use slab_spectra::spectra::{
    ac_splitting_profile, admissible_delta, asymptotics_fit, discrete_spectrum_isotropic, kappa_scan, kernel_tolerance,
    log_coefficients, n_subspace, s_zero, simple_coefficients, y1_quadratic_identity, Formula, Model,
};
use slab_spectra::specfun::{exp_int, exp_int_oracle};
use slab_spectra::transport_sim::{
    evolve, growth_run, initial_field, GrowthStudy, GrowthVerdict, InitialData, MuQuad, MuRule, Propagator, SimParams,
    XGrid,
};
use slab_spectra::C64;
use std::time::Instant;

type Entry = (usize, &'static str, fn() -> Check);

const KNOWN_UNATTAINABLE: &[usize] = &[];

struct Check {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: String) -> Check {
    Check { pass, detail }
}

fn unit_step(cells: usize) -> GridSpec {
    GridSpec::from_profile(&Profile::step(1.0, 1.0), cells).unwrap()
}

fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

fn rel_diff(a: &CMat, b: &CMat) -> f64 {
    max_abs(&(a - b)) / max_abs(b)
}

fn c1_special_functions() -> Check {
    let radii: Vec<f64> = (0..20).map(|k| 1e-3 * (5e4f64).powf(k as f64 / 19.0)).collect();
    let args: Vec<f64> = (0..7).map(|k| -1.5 + 0.5 * k as f64).collect();
    let mut zs = Vec::new();
    for &r in &radii {
        for &a in &args {
            zs.push(C64::from_polar(r, a));
        }
    }
    let t0 = Instant::now();
    let mut vals = Vec::new();
    let mut rec = 0.0f64;
    for &s in &zs {
        let e: Vec<C64> = (0..=7).map(|j| exp_int(j, s).unwrap().value).collect();
        for j in 0..=6 {
            let r = (e[j + 1] * (j + 1) as f64 - (-s).exp() + s * e[j]).norm() / (1.0 + e[j].norm());
            rec = rec.max(r);
        }
        vals.push(e);
    }
    let elapsed = t0.elapsed().as_secs_f64();
    let mut worst = 0.0f64;
    for (s, e) in zs.iter().zip(&vals) {
        for (j, v) in e.iter().enumerate().take(7) {
            let o = exp_int_oracle(j, *s, 1e-13).unwrap();
            worst = worst.max((v - o).norm() / o.norm().max(1.0));
        }
    }
    check(
        worst <= 1e-9 && rec <= 1e-10 && elapsed < 1.0,
        format!("oracle {worst:.2e} (<= 1e-9), recurrence {rec:.2e} (<= 1e-10), exp_int time {elapsed:.3} s (< 1 s)"),
    )
}

fn c2_operator_laws() -> Check {
    let g = unit_step(128);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut top = f64::NEG_INFINITY;
    for _ in 0..20 {
        let r = 10f64.powf(rng.random_range(-2.0..1.0));
        let a = rng.random_range(0.01..std::f64::consts::PI - 0.01);
        let q = assemble_q_isotropic(C64::from_polar(r, a), &g).unwrap().entries;
        top = top.max(*linalg::herm_eigenvalues(&q).last().unwrap());
    }
    // ±Im Q(z) > 0 when ∓Re z > 0
    let mut sign_ok = true;
    let mut sign_worst = f64::INFINITY;
    for k in [-2.0, -0.5, 0.5, 2.0] {
        for eta in [0.0, 0.1] {
            let q = assemble_q_isotropic(C64::new(k, eta), &g).unwrap().entries;
            let im = linalg::imaginary_part(&q) * C64::new(-f64::signum(k), 0.0);
            let ev = linalg::herm_eigenvalues(&im);
            let (lo, hi) = (ev[0], *ev.last().unwrap());
            sign_worst = sign_worst.min(lo / hi);
            sign_ok &= hi > 0.0 && lo > 0.0;
        }
    }
    let eps: Vec<f64> = (0..=12).map(|k| 10f64.powf(-6.0 + 0.5 * k as f64)).collect();
    let curves: Vec<Vec<f64>> = eps
        .iter()
        .map(|&e| linalg::sym_eigen(&assemble_q_isotropic(C64::new(0.0, e), &g).unwrap().real()).0)
        .collect();
    let mut mono = f64::INFINITY;
    for w in curves.windows(2) {
        for (a, b) in w[0].iter().zip(&w[1]) {
            mono = mono.min(b - a);
        }
    }
    check(
        top <= 1e-8 && sign_ok && mono >= -1e-10,
        format!(
            "max top eig of Re Q {top:.2e} (<= 1e-8); sign law min/max eig ratio {sign_worst:.2e} (> 0); \
             smallest step of eigenvalues of Q(i eps) over 1e-6..1 {mono:.2e} (>= 0)"
        ),
    )
}

fn c3_cross_path() -> Check {
    let g = unit_step(64);
    let iso = CollisionKernel::isotropic();
    let leg1 = CollisionKernel::legendre(&[1.0]).unwrap();
    let aniso = CollisionKernel::legendre(&[1.0, 0.8, 0.5]).unwrap();
    let zs = [C64::new(1.0, 1.0), C64::new(0.0, 1.0), C64::new(0.3, 0.5), C64::new(-2.0, 0.7)];
    let mut worst_iso = 0.0f64;
    let mut worst_aniso = 0.0f64;
    for &z in &zs {
        let a = assemble_q_isotropic(z, &g).unwrap().entries;
        let (b, _) = assemble_q_direct(z, &g, &iso, 32).unwrap();
        let c = assemble_q_expansion(z, &g, &leg1).unwrap().entries;
        worst_iso = worst_iso.max(rel_diff(&a, &b.entries)).max(rel_diff(&c, &b.entries));
        let (d, _) = assemble_q_direct(z, &g, &aniso, 32).unwrap();
        let e = assemble_q_expansion(z, &g, &aniso).unwrap().entries;
        worst_aniso = worst_aniso.max(rel_diff(&e, &d.entries));
    }
    let p0: Vec<f64> = aniso.terms.iter().map(|t| t.coeffs[0]).collect();
    let g0 = &aniso.g_matrices()[0];
    let mut g0_err = 0.0f64;
    for m in 0..3 {
        for n in 0..3 {
            let want = aniso.terms[m].k * aniso.terms[n].k * p0[m] * p0[n];
            g0_err = g0_err.max((g0[(m, n)] - want).abs() / want.abs().max(f64::MIN_POSITIVE));
        }
    }
    check(
        worst_iso <= 1e-6 && worst_aniso <= 1e-6 && g0_err <= 4.0 * f64::EPSILON,
        format!("isotropic paths {worst_iso:.2e}, anisotropic direct vs expansion {worst_aniso:.2e} (<= 1e-6); G0 rel {g0_err:.1e}"),
    )
}

fn c4_quadratic_identity() -> Check {
    let p = Profile::new(vec![
        Segment { x0: -1.0, x1: 0.2, value: 1.3 },
        Segment { x0: 0.2, x1: 1.5, value: 0.4 },
    ])
    .unwrap();
    let g = GridSpec::from_profile(&p, 96).unwrap();
    let s = g.sqrt_c();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    let mut max_lhs = f64::NEG_INFINITY;
    for _ in 0..10 {
        let mut h = RVec::from_fn(s.len(), |_, _| rng.random_range(-1.0..1.0));
        h -= &s * (s.dot(&h) / s.dot(&s));
        let (lhs, rhs) = y1_quadratic_identity(&g, &h);
        worst = worst.max((lhs - rhs).abs() / rhs.abs());
        max_lhs = max_lhs.max(lhs);
    }
    check(worst <= 1e-8 && max_lhs < 0.0, format!("worst rel {worst:.2e} (<= 1e-8), max <Y1 h,h> {max_lhs:.3e} (< 0)"))
}

fn c5_spectrum_vs_simulation() -> Check {
    let kappa = 1.0;
    let profile = Profile::step(kappa, 1.0);
    let g = GridSpec::from_profile(&profile, 128).unwrap();
    let spec = discrete_spectrum_isotropic(&g, (1e-8, 2.0)).unwrap();
    if spec.eigenvalues.len() != 1 {
        return check(false, format!("expected one eigenvalue, found {}", spec.eigenvalues.len()));
    }
    let beta = spec.eigenvalues[0].z.im;
    let (t_end, dt, nx) = (30.0, 0.05, 4096);
    let x_max = profile.radius() + t_end + 0.5;
    let mu = MuQuad::new(MuRule::HalfRangeGauss { per_half: 16 }).unwrap();
    let k = CollisionKernel::isotropic();
    let prop = Propagator::new(&SimParams { x_max, nx, dt, max_cfl: 8.0 }, &mu, &profile, &k).unwrap();
    let init = InitialData::Smooth { a_x: 0.3, a_mu: 0.2 };
    let u0 = initial_field(&init, &profile, &g, XGrid { x_max, n: nx }, &mu).unwrap();
    let (tr, _) = evolve(&u0, &prop, &profile, t_end, 4).unwrap();
    let sel: Vec<usize> = (0..tr.t.len()).filter(|&i| tr.t[i] >= 0.5 * t_end).collect();
    let t: Vec<f64> = sel.iter().map(|&i| tr.t[i]).collect();
    let y: Vec<f64> = sel.iter().map(|&i| tr.norm[i].ln()).collect();
    let beta_sim = line_fit(&t, &y).1;
    let rel = (beta - beta_sim).abs() / beta;
    check(
        rel <= 0.01,
        format!("kappa {kappa}: beta_spectra {beta:.6}, beta_sim {beta_sim:.6}, rel {rel:.2e} (<= 1e-2) at {nx}x{}", mu.len()),
    )
}

fn s0_smin(g: &GridSpec) -> f64 {
    let k = CollisionKernel::isotropic();
    let s = s_zero(g, &k, 0.5 * admissible_delta(g, &k, 1.0), 1.0).unwrap();
    linalg::smallest_singular(&s.s0).0
}

fn c6_kappa_scan() -> Check {
    let shape = Profile::step(1.0, 1.0);
    let scan = kappa_scan(&shape, 128, (0.0, 6.5)).unwrap();
    let g1 = unit_step(128);
    let g2 = g1.refined();
    let mut confirmed = 0;
    let mut shrinks = Vec::new();
    for v in &scan.values {
        let r = s0_smin(&g1.scaled(v.kappa)) / s0_smin(&g2.scaled(v.kappa));
        shrinks.push(r);
        if r >= 3.0 {
            confirmed += 1;
        }
    }
    let mut mid_min = f64::INFINITY;
    for w in scan.values.windows(2) {
        let km = 0.5 * (w[0].kappa + w[1].kappa);
        mid_min = mid_min.min(s0_smin(&g1.scaled(km))).min(s0_smin(&g2.scaled(km)));
    }
    let ks: Vec<String> = scan.values.iter().zip(&shrinks).map(|(v, r)| format!("{:.4}:{r:.2}", v.kappa)).collect();
    check(
        confirmed >= 5 && confirmed == scan.values.len() && mid_min > 1e-2,
        format!("{confirmed}/{} confirmed (kappa:shrink {}), min sigma at midpoints {mid_min:.3}", scan.values.len(), ks.join(" ")),
    )
}

fn c7_asymptotics() -> Check {
    let cells = 64;
    let (rays, radii) = (default_rays(), default_radii());
    let within = |e: f64| (0.8..=1.2).contains(&e);
    let mut parts = Vec::new();
    let mut ok = true;

    let g = unit_step(cells);
    let k = CollisionKernel::legendre(&[1.0, 0.6]).unwrap();
    let sz = s_zero(&g, &k, 0.5 * admissible_delta(&g, &k, 1.0), 1.0).unwrap();
    let r = asymptotics_fit(Formula::Este0, &Model::Este0(&sz), &g, &k, &rays, &radii).unwrap();
    let e: Vec<f64> = r.rays.iter().map(|x| x.exponent).collect();
    ok &= e.iter().all(|&x| within(x));
    parts.push(format!("este0 {e:.3?}"));

    let iso = CollisionKernel::isotropic();
    let g = unit_step(cells);
    let g2 = g.scaled(grid_critical_kappa(&g, 1).unwrap());
    let c = log_coefficients(&g2).unwrap();
    let r = asymptotics_fit(Formula::Slog, &Model::Slog(&c), &g2, &iso, &rays, &radii).unwrap();
    let e: Vec<f64> = r.rays.iter().map(|x| x.exponent).collect();
    ok &= e.iter().all(|&x| within(x));
    parts.push(format!("Slog {e:.3?}"));

    let g1 = g.scaled(grid_critical_kappa(&g, 0).unwrap());
    let ns = n_subspace(&g1, kernel_tolerance(&g1));
    let c = simple_coefficients(&g1, &ns).unwrap();
    let r = asymptotics_fit(Formula::SsimplePole, &Model::Simple(&c), &g1, &iso, &rays, &radii).unwrap();
    let e: Vec<f64> = r.rays.iter().map(|x| x.exponent).collect();
    let pole: Vec<f64> = r.rays.iter().map(|x| *x.pole_rel_error.last().unwrap()).collect();
    ok &= e.iter().all(|&x| within(x)) && pole.iter().all(|&p| p <= 0.05);
    let pole_s: Vec<String> = pole.iter().map(|p| format!("{p:.2e}")).collect();
    parts.push(format!("Ssimple {e:.3?}, pole coefficient rel err at 1e-4 {pole_s:?}"));

    check(ok, format!("{} (exponents in [0.8, 1.2], pole <= 5%)", parts.join("; ")))
}

fn c8_growth_trichotomy() -> Check {
    let shape = Profile::step(1.0, 1.0);
    let kv: Vec<f64> = kappa_scan(&shape, 128, (0.0, 3.0)).unwrap().values.iter().map(|v| v.kappa).collect();
    let cases = [
        ("a", 0.5 * (kv[0] + kv[1]), InitialData::Random { seed: 1, terms: 4 }),
        ("b", kv[1], InitialData::KernelFlux { alpha: 0.45 }),
        ("c", kv[0], InitialData::KernelFlux { alpha: 0.45 }),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, kappa, init) in cases {
        let p = shape.scaled(kappa);
        let g = GridSpec::from_profile(&p, 128).unwrap();
        let dim_n = n_subspace(&g, kernel_tolerance(&g)).dim();
        let mut verdicts = Vec::new();
        for nx in [13000, 26000] {
            let study = GrowthStudy {
                mu: MuRule::LogGraded { per_half: 32, mu_min: 1e-5 },
                nx,
                dt: 0.05,
                t_end: 100.0,
                x_max: None,
                redeflate: 1.0,
                galerkin_cells: 128,
                eps_min: 1e-8,
                contour: None,
                per_decade: 12,
                max_cfl: 8.0,
                fit_from: 1.0,
                initial: init.clone(),
            };
            match growth_run(&p, &CollisionKernel::isotropic(), &study) {
                Ok(r) => verdicts.push(r.fit.verdict),
                Err(e) => verdicts.push(GrowthVerdict::Unresolved { reason: e.to_string() }),
            }
        }
        let good = verdicts.iter().all(|v| match name {
            "a" => matches!(v, GrowthVerdict::Bounded),
            "b" => matches!(v, GrowthVerdict::Logarithmic { .. }),
            _ => matches!(v, GrowthVerdict::Power { p, .. } if *p >= 0.8),
        });
        ok &= good;
        let vs: Vec<String> = verdicts
            .iter()
            .map(|v| match v {
                GrowthVerdict::Bounded => "bounded".to_string(),
                GrowthVerdict::Logarithmic { b } => format!("log b={b:.2}"),
                GrowthVerdict::Power { p, .. } => format!("power p={p:.3}"),
                GrowthVerdict::Unresolved { reason } => format!("unresolved ({reason})"),
            })
            .collect();
        parts.push(format!("({name}) kappa {kappa:.5} dim N {dim_n}: {}", vs.join(" / ")));
    }
    check(ok, parts.join("; "))
}

fn c9_splitting() -> Check {
    let ks = [-2.0, -0.5, 0.3, 1.0, 3.0];
    let iso = CollisionKernel::isotropic();
    let mut ranks: Vec<Vec<usize>> = Vec::new();
    for cells in [32, 64, 128] {
        let p = ac_splitting_profile(&unit_step(cells), &iso, &ks, 0.5).unwrap();
        ranks.push(p.slices.iter().map(|s| s.delta_rank).collect());
    }
    let grows = (0..ks.len()).all(|i| ranks[0][i] < ranks[1][i] && ranks[1][i] < ranks[2][i]);

    let g = unit_step(64);
    let near = |kappa: f64| ac_splitting_profile(&g.scaled(kappa), &iso, &[0.0], 0.5).unwrap().slices[0].near_kernel;
    let crit: Vec<f64> = (0..3).map(|n| grid_critical_kappa(&g, n).unwrap()).collect();
    let at_crit: Vec<usize> = crit.iter().map(|&k| near(k)).collect();
    let mids = [0.5 * crit[0], 0.5 * (crit[0] + crit[1]), 0.5 * (crit[1] + crit[2])];
    let at_mid: Vec<usize> = mids.iter().map(|&k| near(k)).collect();
    let exact = at_crit.iter().all(|&n| n >= 1) && at_mid.iter().all(|&n| n == 0);
    check(
        grows && exact,
        format!(
            "rank Delta(k) at k={ks:?} for 32/64/128 cells {ranks:?}; near-kernel of S(0) at critical kappa {at_crit:?}, \
             at midpoints {at_mid:?}"
        ),
    )
}

fn main() {
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let criteria: [Entry; 9] = [
        (1, "special functions", c1_special_functions),
        (2, "operator laws", c2_operator_laws),
        (3, "cross-path assembly", c3_cross_path),
        (4, "quadratic-form identity", c4_quadratic_identity),
        (5, "spectrum/simulation loop", c5_spectrum_vs_simulation),
        (6, "kappa scan", c6_kappa_scan),
        (7, "asymptotics", c7_asymptotics),
        (8, "growth trichotomy", c8_growth_trichotomy),
        (9, "splitting diagnostic", c9_splitting),
    ];
    let mut unexpected = 0;
    for (n, name, f) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&n)) {
            continue;
        }
        let t0 = Instant::now();
        let c = f();
        let secs = t0.elapsed().as_secs_f64();
        let tag = if c.pass { "PASS" } else { "FAIL" };
        let note = if !c.pass && KNOWN_UNATTAINABLE.contains(&n) { " [known unattainable]" } else { "" };
        println!("criterion {n} {tag}{note}: {name} ({secs:.1} s) {}", c.detail);
        if !c.pass && !KNOWN_UNATTAINABLE.contains(&n) {
            unexpected += 1;
        }
    }
    if unexpected > 0 {
        eprintln!("{unexpected} criterion(s) failed");
        std::process::exit(1);
    }
}
