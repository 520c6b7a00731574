//! Spectral analysis built on Q(z): characteristic function, eigenvalues, B_c, the singularity at 0.

pub mod bc;
pub mod charfn;
pub mod discrete;

pub use bc::{bc_compressed, bc_set, eta_flow, in_e, kappa_scan, BcPoint, EtaFlow, KappaScan, Membership, Verdict};
pub use charfn::{char_fn, char_fn_inv, near_kernel, s_from_q, sinv_from_q, CharValue};
pub use discrete::{
    contour_roots, discrete_spectrum_general, discrete_spectrum_isotropic, imaginary_axis_roots, Contour, Eigenvalue,
    IsoSpectrum,
};
pub mod szero;
pub use szero::{admissible_delta, s_zero, SZero};
pub mod classify;
pub use classify::{
    classify_singularity, kernel_tolerance, log_coefficients, n_subspace, simple_coefficients, y1_quadratic_identity,
    Classification, Coefficients, LogCoefficients, NSubspace, SimpleCoefficients,
};
pub mod asymptotics;
pub use asymptotics::{asymptotics_fit, first_order_strictness, AsymptoticsReport, Formula, Model, RayFit};
pub mod svals;
pub use svals::{ac_splitting_profile, s_on_axis, KSlice, SingularValueProfile};
pub mod report;
pub use report::{spectral_report, CoefficientSummary, SpectralReport};
