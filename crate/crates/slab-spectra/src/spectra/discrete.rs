//! Eigenvalues of T: points z in the upper half plane where I + Q(z) is singular.

use crate::discretize::{assemble_q, assemble_q_isotropic, CollisionKernel, GridSpec};
use crate::error::{Error, Result};
use crate::linalg::{self, sym_eigen, CMat};
use crate::roots::bracket_root;
use crate::{par, C64};
use serde::Serialize;
use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Eigenvalue {
    pub z: C64,
    /// Smallest singular value of I + Q(z).
    pub residual: f64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct IsoSpectrum {
    pub eigenvalues: Vec<Eigenvalue>,
    pub notes: Vec<String>,
}

fn i_plus_q(z: C64, grid: &GridSpec, collision: &CollisionKernel) -> Result<CMat> {
    let q = assemble_q(z, grid, collision)?;
    Ok(linalg::identity(q.dim()) + q.entries)
}

fn q_imag_axis(log_eps: f64, grid: &GridSpec) -> Result<Vec<f64>> {
    let q = assemble_q_isotropic(C64::new(0.0, log_eps.exp()), grid)?;
    Ok(sym_eigen(&q.real()).0)
}

/// Isotropic eigenvalues iβ: each ascending eigenvalue η_(j) of Q(iε) is monotone in ε,
/// so β_j is where η_(j) crosses -1.
pub fn discrete_spectrum_isotropic(grid: &GridSpec, eps_range: (f64, f64)) -> Result<IsoSpectrum> {
    imaginary_axis_roots(&|l| q_imag_axis(l, grid), &|z| i_plus_q(z, grid, &CollisionKernel::isotropic()), eps_range)
}

/// Root search on the imaginary axis for any assembly whose Q(iε) is real symmetric with
/// eigenvalues monotone in ε. `eigs(ln ε)` returns them ascending; `ipq(z)` is I + Q(z).
/// Samples of ln ε per decade in the root scan.
pub const SCAN_PER_DECADE: f64 = 6.0;

pub fn imaginary_axis_roots(
    eigs: &(dyn Fn(f64) -> Result<Vec<f64>> + Sync),
    ipq: &dyn Fn(C64) -> Result<CMat>,
    eps_range: (f64, f64),
) -> Result<IsoSpectrum> {
    let (e0, e1) = eps_range;
    if !(e0 > 0.0 && e1 > e0) {
        return Err(Error::Invalid(format!("eps_range must satisfy 0 < lo < hi, got {eps_range:?}")));
    }
    let (l0, l1) = (e0.ln(), e1.ln());
    let mut notes = Vec::new();
    // Sampled scan: every sign change of a sorted curve e_j + 1 brackets a root. Discrete-ordinates
    // curves need not be monotone in ε, so counting at the ends is not enough.
    let ns = (((l1 - l0) / std::f64::consts::LN_10) * SCAN_PER_DECADE).ceil().max(2.0) as usize;
    let ls: Vec<f64> = (0..=ns).map(|k| l0 + (l1 - l0) * k as f64 / ns as f64).collect();
    let samples: Vec<Vec<f64>> = par::map_range(ls.len(), |k| eigs(ls[k])).into_iter().collect::<Result<_>>()?;
    let (lo, hi) = (&samples[0], &samples[ns]);
    let above = hi.iter().filter(|&&e| e < -1.0).count();
    if above > 0 {
        notes.push(format!(
            "{above} eigenvalue curve(s) still below -1 at eps = {e1:.3e}: widen eps_range upward"
        ));
    }
    let mut brackets = Vec::new();
    for k in 0..ns {
        let (a, b) = (&samples[k], &samples[k + 1]);
        for j in 0..a.len().min(b.len()) {
            if (a[j] + 1.0).signum() != (b[j] + 1.0).signum() {
                brackets.push((j, ls[k], ls[k + 1]));
            }
        }
    }
    let roots: Vec<Option<f64>> = par::map_range(brackets.len(), |i| {
        let (j, a, b) = brackets[i];
        let f = |l: f64| eigs(l).map(|e| e[j] + 1.0).unwrap_or(f64::NAN);
        bracket_root(f, a, b, 1e-13 * (1.0 + a.abs()))
    });
    let mut eigenvalues = Vec::new();
    for l in roots.into_iter().flatten() {
        let z = C64::new(0.0, l.exp());
        let a = ipq(z)?;
        eigenvalues.push(Eigenvalue { z, residual: linalg::smallest_singular(&a).0, multiplicity: 1 });
    }
    eigenvalues.sort_by(|a, b| b.z.im.total_cmp(&a.z.im));
    if lo.first().is_some_and(|&e| (e + 1.0).abs() < 1e-10) {
        notes.push(format!("eigenvalue curve at -1 at eps = {e0:.3e}: widen eps_range downward"));
    }
    Ok(IsoSpectrum { eigenvalues, notes })
}

/// Axis-parallel rectangle in the open upper half plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct Contour {
    pub re: (f64, f64),
    pub im: (f64, f64),
}

impl Contour {
    fn corners(&self) -> [C64; 4] {
        [
            C64::new(self.re.0, self.im.0),
            C64::new(self.re.1, self.im.0),
            C64::new(self.re.1, self.im.1),
            C64::new(self.re.0, self.im.1),
        ]
    }
    fn contains(&self, z: C64) -> bool {
        z.re >= self.re.0 && z.re <= self.re.1 && z.im >= self.im.0 && z.im <= self.im.1
    }
    fn width(&self) -> f64 {
        (self.re.1 - self.re.0).max(self.im.1 - self.im.0)
    }
    fn center(&self) -> C64 {
        C64::new(0.5 * (self.re.0 + self.re.1), 0.5 * (self.im.0 + self.im.1))
    }
}

fn wrap_phase(d: f64) -> f64 {
    let mut x = d % (2.0 * PI);
    if x > PI {
        x -= 2.0 * PI;
    } else if x <= -PI {
        x += 2.0 * PI;
    }
    x
}

struct Winder<'a> {
    ipq: &'a dyn Fn(C64) -> Result<CMat>,
    /// ln det by exact sample point; neighbouring boxes share edges.
    cache: RefCell<HashMap<(u64, u64), C64>>,
}

/// Phase increment and first moment Σ z_mid Δln det accumulated along a path.
#[derive(Clone, Copy, Default)]
struct Arc {
    dphase: f64,
    moment: C64,
}

impl std::ops::Add for Arc {
    type Output = Arc;
    fn add(self, o: Arc) -> Arc {
        Arc { dphase: self.dphase + o.dphase, moment: self.moment + o.moment }
    }
}

impl Winder<'_> {
    fn log_det(&self, z: C64) -> Result<C64> {
        let key = (z.re.to_bits(), z.im.to_bits());
        if let Some(&p) = self.cache.borrow().get(&key) {
            return Ok(p);
        }
        let p = linalg::log_det(&(self.ipq)(z)?)?;
        self.cache.borrow_mut().insert(key, p);
        Ok(p)
    }

    /// Increment from a to b. The midpoint is always sampled: a segment is accepted only if ln det
    /// is close to linear on it, since a root passing near the edge can turn the phase by a full
    /// 2π between two samples without any visible jump.
    fn edge(&self, a: C64, b: C64, fa: C64, fb: C64, depth: usize) -> Result<Arc> {
        let m = 0.5 * (a + b);
        let fm = self.log_det(m)?;
        let d1 = wrap_phase(fm.im - fa.im);
        let d2 = wrap_phase(fb.im - fm.im);
        let bend = C64::new(fm.re - 0.5 * (fa.re + fb.re), 0.5 * (d1 - d2)).norm();
        if d1.abs().max(d2.abs()) <= PI / 4.0 && bend <= 0.1 {
            let h1 = C64::new(fm.re - fa.re, d1);
            let h2 = C64::new(fb.re - fm.re, d2);
            return Ok(Arc { dphase: d1 + d2, moment: 0.5 * (a + m) * h1 + 0.5 * (m + b) * h2 });
        }
        if depth > 24 {
            return Err(Error::NoConvergence(format!(
                "ln det not resolved between {a} and {b} after subdivision cap"
            )));
        }
        Ok(self.edge(a, m, fa, fm, depth + 1)? + self.edge(m, b, fm, fb, depth + 1)?)
    }

    /// Winding number of det(I + Q) around the box and, for a single root, its location estimate.
    fn winding(&self, c: &Contour, samples: usize) -> Result<(i64, C64)> {
        let k = c.corners();
        let mut total = Arc::default();
        for e in 0..4 {
            let (a, b) = (k[e], k[(e + 1) % 4]);
            let pts: Vec<C64> = (0..=samples).map(|i| a + (b - a) * (i as f64 / samples as f64)).collect();
            let f: Vec<C64> = pts.iter().map(|&z| self.log_det(z)).collect::<Result<_>>()?;
            for i in 0..samples {
                total = total + self.edge(pts[i], pts[i + 1], f[i], f[i + 1], 0)?;
            }
        }
        let w = total.dphase / (2.0 * PI);
        if (w - w.round()).abs() > 0.05 {
            return Err(Error::NoConvergence(format!("non-integer winding {w:.4} on {c:?}")));
        }
        Ok((w.round() as i64, total.moment / C64::new(0.0, 2.0 * PI)))
    }
}

/// Newton on ln det(I + Q): z ← z - 1/(d/dz ln det), derivative by central differences.
/// Returns the last iterate and whether the step size converged.
fn newton(z0: C64, w: &Winder<'_>, box_: &Contour, iters: usize) -> Result<(C64, bool)> {
    let mut z = z0;
    let mut last = box_.width();
    for _ in 0..iters {
        // the log-derivative has a pole at the root: keep the stencil well inside |z - z*|
        let h = (1e-3 * last).clamp(1e-11 * (1.0 + z.norm()), 1e-6 * (1.0 + z.norm()));
        let hp = C64::new(h, 0.0);
        let fp = linalg::log_det(&(w.ipq)(z + hp)?)?;
        let fm = linalg::log_det(&(w.ipq)(z - hp)?)?;
        let d = C64::new(fp.re - fm.re, wrap_phase(fp.im - fm.im)) / (2.0 * h);
        let step = C64::new(1.0, 0.0) / d;
        let next = z - step;
        if !next.re.is_finite() || (next - z0).norm() > 2.0 * box_.width() {
            return Ok((z, false));
        }
        z = next;
        last = step.norm();
        if step.norm() < 1e-13 * (1.0 + z.norm()) {
            return Ok((z, true));
        }
    }
    Ok((z, last < 1e-9 * (1.0 + z.norm())))
}

/// Roots of det(I + Q(z)) inside a rectangle by recursive argument-principle bisection and Newton polish.
pub fn discrete_spectrum_general(grid: &GridSpec, collision: &CollisionKernel, contour: Contour) -> Result<Vec<Eigenvalue>> {
    contour_roots(&|z| i_plus_q(z, grid, collision), contour)
}

/// Argument-principle root finder for a matrix function on a rectangle in ℂ₊.
pub fn contour_roots(ipq: &dyn Fn(C64) -> Result<CMat>, contour: Contour) -> Result<Vec<Eigenvalue>> {
    if !(contour.im.0 > 0.0 && contour.im.1 > contour.im.0 && contour.re.1 > contour.re.0) {
        return Err(Error::Invalid(format!("contour must lie in the open upper half plane: {contour:?}")));
    }
    let w = Winder { ipq, cache: RefCell::new(HashMap::new()) };
    let mut out = Vec::new();
    let min_width = 1e-3 * contour.width();
    let (n0, m0) = w.winding(&contour, 32)?;
    let mut stack = vec![(contour, n0, m0)];
    while let Some((c, n, guess)) = stack.pop() {
        if n <= 0 {
            continue;
        }
        if n == 1 {
            // a simple root: Newton from the moment estimate, accepted if it converges inside the box
            let start = if c.contains(guess) { guess } else { c.center() };
            let (z, ok) = newton(start, &w, &c, 30)?;
            if ok && c.contains(z) {
                let a = ipq(z)?;
                out.push(Eigenvalue { z, residual: linalg::smallest_singular(&a).0, multiplicity: 1 });
                continue;
            }
        }
        if c.width() < min_width {
            let (z, _) = newton(c.center(), &w, &c, 60)?;
            let a = ipq(z)?;
            out.push(Eigenvalue { z, residual: linalg::smallest_singular(&a).0, multiplicity: n as usize });
            continue;
        }
        // off-center split so that roots on symmetry lines do not land on a cut
        let xm = c.re.0 + 0.5137 * (c.re.1 - c.re.0);
        let ym = c.im.0 + 0.4871 * (c.im.1 - c.im.0);
        let quads = [
            Contour { re: (c.re.0, xm), im: (c.im.0, ym) },
            Contour { re: (xm, c.re.1), im: (c.im.0, ym) },
            Contour { re: (xm, c.re.1), im: (ym, c.im.1) },
            Contour { re: (c.re.0, xm), im: (ym, c.im.1) },
        ];
        let mut sub = Vec::with_capacity(4);
        for samples in [12, 48] {
            sub = quads.iter().map(|q| w.winding(q, samples).map(|(k, m)| (*q, k, m))).collect::<Result<_>>()?;
            if sub.iter().map(|s| s.1).sum::<i64>() == n {
                break;
            }
        }
        let found: i64 = sub.iter().map(|s| s.1).sum();
        if found != n {
            return Err(Error::NoConvergence(format!(
                "winding {n} on {c:?} but subboxes sum to {found}"
            )));
        }
        stack.extend(sub);
    }
    out.sort_by(|a, b| b.z.im.total_cmp(&a.z.im));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::Profile;

    #[test]
    fn empty_for_zero_profile() {
        let g = GridSpec::from_profile(&Profile::zero(1.0), 8).unwrap();
        let s = discrete_spectrum_isotropic(&g, (1e-300, 1e2)).unwrap();
        assert!(s.eigenvalues.is_empty());
        let c = Contour { re: (-1.0, 1.0), im: (0.1, 2.0) };
        assert!(discrete_spectrum_general(&g, &CollisionKernel::isotropic(), c).unwrap().is_empty());
    }

    #[test]
    fn isotropic_roots_are_singular_points() {
        let g = GridSpec::from_profile(&Profile::step(2.0, 1.0), 32).unwrap();
        let s = discrete_spectrum_isotropic(&g, (1e-300, 1e2)).unwrap();
        assert!(!s.eigenvalues.is_empty());
        for e in &s.eigenvalues {
            assert!(e.z.re == 0.0 && e.z.im > 0.0);
            assert!(e.residual < 1e-9, "{e:?}");
        }
    }

    #[test]
    fn general_path_matches_isotropic() {
        let g = GridSpec::from_profile(&Profile::step(2.0, 1.0), 24).unwrap();
        let iso = discrete_spectrum_isotropic(&g, (1e-300, 1e2)).unwrap();
        let c = Contour { re: (-0.5, 0.5), im: (0.2, 3.0) };
        let gen = discrete_spectrum_general(&g, &CollisionKernel::isotropic(), c).unwrap();
        let want: Vec<C64> = iso.eigenvalues.iter().map(|e| e.z).filter(|z| z.im > 0.2).collect();
        assert_eq!(gen.len(), want.len(), "{gen:?}");
        for (a, b) in gen.iter().zip(&want) {
            assert!((a.z - b).norm() < 1e-8 * b.norm(), "{a:?} {b}");
            assert!(a.residual < 1e-9, "{a:?}");
        }
    }

    #[test]
    fn contour_roots_near_the_edge() {
        // five roots, four of them just above the bottom edge where the phase turns fast
        let roots = [C64::new(-0.1, 0.052), C64::new(0.1, 0.052), C64::new(-0.3, 0.055), C64::new(0.3, 0.055), C64::new(0.0, 0.5)];
        let f = |z: C64| -> Result<CMat> { Ok(CMat::from_fn(5, 5, |i, j| if i == j { z - roots[i] } else { C64::new(0.0, 0.0) })) };
        let c = Contour { re: (-1.0, 1.0), im: (0.05, 1.0) };
        let got = contour_roots(&f, c).unwrap();
        assert_eq!(got.len(), 5, "{got:?}");
        for r in &roots {
            assert!(got.iter().any(|e| (e.z - r).norm() < 1e-10 && e.multiplicity == 1), "{r}");
        }
    }
}
