//! Experiment configuration: schema (serde, unknown fields rejected) and physics checks.

use crate::discretize::{legendre_normalized, CollisionKernel, GridSpec, Profile, Segment, Term};
use crate::spectra::{admissible_delta, Contour, Formula};
use crate::transport_sim::{InitialData, MuRule};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileSpec {
    /// κ·indicator[-a, a].
    Step { kappa: f64, #[serde(default = "one")] a: f64 },
    Segments { segments: Vec<Segment> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum CollisionSpec {
    Isotropic,
    /// Σ k_n² ⟨·,p_n⟩p_n over orthonormal Legendre p_0, p_1, ...
    Legendre { k: Vec<f64> },
    Polynomial { terms: Vec<Term> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Galerkin cells on the coarse level; the fine level doubles them.
    pub cells: usize,
    #[serde(default)]
    pub mu: MuRule,
    /// Simulator x cells on the coarse level.
    #[serde(default)]
    pub nx: Option<usize>,
    /// Half-width of the simulator domain.
    #[serde(default)]
    pub x_max: Option<f64>,
    #[serde(default)]
    pub dt: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub path: Option<String>,
    /// Also write the CSV series when an output directory is set.
    #[serde(default = "yes")]
    pub csv: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { path: None, csv: true }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumTask {
    #[serde(default)]
    pub contour: Option<Contour>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SvalsTask {
    #[serde(default = "default_ks")]
    pub k: Vec<f64>,
    #[serde(default = "half")]
    pub beta: f64,
}

impl Default for SvalsTask {
    fn default() -> Self {
        SvalsTask { k: default_ks(), beta: 0.5 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KappaScanTask {
    #[serde(default = "default_range")]
    pub range: (f64, f64),
    /// Confirm each κ by the smallest singular value of S(0) on both levels.
    #[serde(default = "yes")]
    pub confirm: bool,
}

impl Default for KappaScanTask {
    fn default() -> Self {
        KappaScanTask { range: default_range(), confirm: true }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AsymptoticsTask {
    /// Formulas to fit; by default the ones that apply to the classification.
    #[serde(default)]
    pub formulas: Option<Vec<Formula>>,
    #[serde(default = "crate::spectra::asymptotics::default_rays")]
    pub rays: Vec<f64>,
    #[serde(default = "crate::spectra::asymptotics::default_radii")]
    pub radii: Vec<f64>,
}

impl Default for AsymptoticsTask {
    fn default() -> Self {
        AsymptoticsTask {
            formulas: None,
            rays: crate::spectra::asymptotics::default_rays(),
            radii: crate::spectra::asymptotics::default_radii(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveTask {
    pub t_end: f64,
    pub initial: InitialData,
    /// Record the norm every this many steps.
    #[serde(default = "one_usize")]
    pub every: usize,
    #[serde(default = "default_cfl")]
    pub max_cfl: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowthTask {
    pub t_end: f64,
    pub initial: InitialData,
    #[serde(default = "one")]
    pub redeflate: f64,
    #[serde(default = "default_eps_min")]
    pub eps_min: f64,
    #[serde(default)]
    pub contour: Option<Contour>,
    #[serde(default = "default_per_decade")]
    pub per_decade: usize,
    #[serde(default = "default_cfl")]
    pub max_cfl: f64,
    #[serde(default = "one")]
    pub fit_from: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "schema_version")]
    pub version: u32,
    pub profile: ProfileSpec,
    #[serde(default = "isotropic")]
    pub collision: CollisionSpec,
    pub grid: GridConfig,
    #[serde(default)]
    pub seed: u64,
    /// Constant C_N in the admissible δ bound.
    #[serde(default = "one")]
    pub c_n: f64,
    /// δ for S(0); defaults to half the admissible bound.
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub spectrum: Option<SpectrumTask>,
    #[serde(default)]
    pub svals: Option<SvalsTask>,
    #[serde(default)]
    pub kappa_scan: Option<KappaScanTask>,
    #[serde(default)]
    pub asymptotics: Option<AsymptoticsTask>,
    #[serde(default)]
    pub evolve: Option<EvolveTask>,
    #[serde(default)]
    pub growth: Option<GrowthTask>,
}

fn one() -> f64 {
    1.0
}
fn one_usize() -> usize {
    1
}
fn half() -> f64 {
    0.5
}
fn yes() -> bool {
    true
}
fn schema_version() -> u32 {
    SCHEMA_VERSION
}
fn isotropic() -> CollisionSpec {
    CollisionSpec::Isotropic
}
fn default_ks() -> Vec<f64> {
    vec![-2.0, -0.5, 0.0, 0.5, 2.0]
}
fn default_range() -> (f64, f64) {
    (0.0, 20.0)
}
fn default_cfl() -> f64 {
    8.0
}
fn default_eps_min() -> f64 {
    1e-8
}
fn default_per_decade() -> usize {
    12
}

/// A config that passed the schema, with the built physical objects.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub config: ExperimentConfig,
    pub profile: Profile,
    pub collision: CollisionKernel,
    pub grid: GridSpec,
    /// Hex SHA-256 of the canonical (key-sorted, compact) JSON of the parsed config.
    pub hash: String,
    pub canonical: serde_json::Value,
}

/// One named violation.
#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

fn violation(field: &str, message: impl Into<String>) -> Violation {
    Violation { field: field.into(), message: message.into() }
}

pub fn config_hash(v: &serde_json::Value) -> String {
    let bytes = serde_json::to_vec(v).expect("serializable value");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl ProfileSpec {
    pub fn build(&self) -> crate::Result<Profile> {
        match self {
            ProfileSpec::Step { kappa, a } => {
                Profile::new(vec![Segment { x0: -a, x1: *a, value: *kappa }])
            }
            ProfileSpec::Segments { segments } => Profile::new(segments.clone()),
        }
    }
}

impl CollisionSpec {
    pub fn build(&self) -> crate::Result<CollisionKernel> {
        match self {
            CollisionSpec::Isotropic => Ok(CollisionKernel::isotropic()),
            CollisionSpec::Legendre { k } => CollisionKernel::polynomial(
                k.iter().enumerate().map(|(n, &k)| Term { k, coeffs: legendre_normalized(n) }).collect(),
            ),
            CollisionSpec::Polynomial { terms } => CollisionKernel::polynomial(terms.clone()),
        }
    }
}

/// Parses the text against the schema; the error names the offending field and position.
pub fn parse(text: &str) -> Result<(ExperimentConfig, serde_json::Value), Vec<Violation>> {
    let raw: serde_json::Value =
        serde_json::from_str(text).map_err(|e| vec![violation("<document>", format!("not valid JSON: {e}"))])?;
    let cfg: ExperimentConfig = serde_path_to_error::deserialize(raw).map_err(|e| {
        let path = e.path().to_string();
        vec![violation(if path == "." { "<root>" } else { &path }, e.into_inner().to_string())]
    })?;
    let canonical = serde_json::to_value(&cfg).expect("config serializes");
    Ok((cfg, canonical))
}

/// Schema-level range checks and the physics checks: profile, K ≥ 0, the constant
/// eigenfunction assumption, admissible δ.
pub fn check(cfg: &ExperimentConfig) -> (Vec<Violation>, Option<(Profile, CollisionKernel, GridSpec)>) {
    let mut v = Vec::new();
    if cfg.version != SCHEMA_VERSION {
        v.push(violation("version", format!("unsupported schema version {} (expected {SCHEMA_VERSION})", cfg.version)));
    }
    if cfg.grid.cells == 0 {
        v.push(violation("grid.cells", "must be positive"));
    }
    if let Some(nx) = cfg.grid.nx {
        if nx < 8 {
            v.push(violation("grid.nx", "must be at least 8"));
        }
    }
    if let Some(dt) = cfg.grid.dt {
        if !(dt > 0.0 && dt.is_finite()) {
            v.push(violation("grid.dt", "must be positive"));
        }
    }
    if let Some(x) = cfg.grid.x_max {
        if !(x > 0.0 && x.is_finite()) {
            v.push(violation("grid.x_max", "must be positive"));
        }
    }
    if !(cfg.c_n > 0.0 && cfg.c_n.is_finite()) {
        v.push(violation("c_n", "must be positive"));
    }
    if let Err(e) = crate::transport_sim::MuQuad::new(cfg.grid.mu) {
        v.push(violation("grid.mu", e.to_string()));
    }
    if let Some(s) = &cfg.svals {
        if !(s.beta > 0.0 && s.beta < 1.0) {
            v.push(violation("svals.beta", "must lie in (0, 1)"));
        }
        if s.k.is_empty() {
            v.push(violation("svals.k", "is empty"));
        }
    }
    if let Some(k) = &cfg.kappa_scan {
        if !(k.range.0 < k.range.1) {
            v.push(violation("kappa_scan.range", "need lo < hi"));
        }
    }
    if let Some(e) = &cfg.evolve {
        if !(e.t_end > 0.0) {
            v.push(violation("evolve.t_end", "must be positive"));
        }
    }
    if let Some(g) = &cfg.growth {
        if !(g.t_end > 0.0) {
            v.push(violation("growth.t_end", "must be positive"));
        }
    }
    let profile = cfg.profile.build().map_err(|e| v.push(violation("profile", e.to_string()))).ok();
    let collision = match cfg.collision.build() {
        Ok(k) => {
            if let Some(m) = k.k_eigenvalues().into_iter().reduce(f64::min) {
                if m < -1e-12 {
                    v.push(violation("collision", format!("K is not nonnegative: Gram eigenvalue {m:.3e}")));
                }
            }
            Some(k)
        }
        Err(e) => {
            let msg = e.to_string();
            let field = if msg.contains("eigenfunction") {
                "collision.terms (the constant function must be an eigenfunction of K)"
            } else {
                "collision"
            };
            v.push(violation(field, msg));
            None
        }
    };
    let built = match (profile, collision) {
        (Some(p), Some(k)) if cfg.grid.cells > 0 => match GridSpec::from_profile(&p, cfg.grid.cells) {
            Ok(g) => Some((p, k, g)),
            Err(e) => {
                v.push(violation("grid.cells", e.to_string()));
                None
            }
        },
        _ => None,
    };
    if let (Some((_, k, g)), Some(d)) = (&built, cfg.delta) {
        let bound = admissible_delta(g, k, cfg.c_n);
        if !(d > 0.0) || d > bound {
            v.push(violation(
                "delta",
                format!("delta = {d} outside (0, {bound:.6e}], the bound min{{1/(2a), C_N/(a |K|^2 |c|_1^2)}}"),
            ));
        }
    }
    (v, built)
}

/// Parse plus checks; on success the physical objects are built.
pub fn load(text: &str) -> Result<Loaded, Vec<Violation>> {
    let (config, canonical) = parse(text)?;
    let (v, built) = check(&config);
    match built {
        Some((profile, collision, grid)) if v.is_empty() => {
            let hash = config_hash(&canonical);
            Ok(Loaded { config, profile, collision, grid, hash, canonical })
        }
        _ => Err(v),
    }
}
