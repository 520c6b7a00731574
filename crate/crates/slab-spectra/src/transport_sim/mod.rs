//! Direct time-domain integration of ∂ₜu = -μ∂ₓu + c(x)∫K(μ,μ')u(μ')dμ' by discrete ordinates.

pub mod evolve;
pub mod field;
pub mod mu;

pub use evolve::{check_domain, evolve, Propagator, SimParams, Trajectory};
pub use field::{Field, XGrid};
pub use mu::{MuQuad, MuRule};
pub mod modes;
pub use modes::{eigenmode_reconstruct, find_modes, reconstruct, sim_eigenvalues, Mode, ModeSummary};
pub mod deflate;
pub use deflate::{deflate_and_measure, log_times, Deflator};
pub mod growth;
pub use growth::{growth_fit, local_exponent, GrowthFit, GrowthVerdict};
pub mod study;
pub use study::{growth_run, initial_field, GrowthReport, GrowthStudy, InitialData};
