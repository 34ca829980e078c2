//! Exterior algebra of `ℝ^{2n} ⊗ ℂ` with constant coefficients.
//!
//! Coordinates are ordered `x_1 … x_n, y_1 … y_n` and `z_k = x_k + i·y_k`.

mod action;
mod form;
mod hodge;
mod multi_index;

pub use action::{act, gl_act, pullback, restrict, GlElement};
pub use form::{dz, dzbar, KForm, Vector};
pub use hodge::{hodge_star, hodge_star_conj, Metric};
pub use multi_index::{binomial, MultiIndex};

pub(crate) use form::{I, ONE, ZERO};
