//! Finite-dimensional representations of Q(z), Q̃(z), Y, Y₁ on a grid over supp c.

pub mod assemble;
pub mod collision;
pub mod grid;
pub mod moments;
pub mod profile;

pub use assemble::{
    assemble_b, assemble_q, assemble_q_direct, assemble_q_expansion, assemble_q_rule, assemble_q_isotropic, assemble_qtilde,
    assemble_theta, assemble_y, assemble_y1, assemble_y2, ell, grid_delta, Label, OperatorMatrix,
};
pub use collision::{legendre_normalized, CollisionKernel, KernelMode, Term};
pub use grid::{Cell, GridSpec};
pub use moments::{cell_abs_moment, cell_log_moment};
pub use profile::{Profile, Segment};
