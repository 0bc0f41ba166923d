//! Special functions behind the outage formulas.
//!
//! Every public entry validates its domain and returns [`crate::Result`];
//! the crate-internal unchecked twins are used on hot quadrature paths.

mod bessel;
mod envelope;
mod expint;
mod gamma;
mod marcum;

pub use bessel::{bessel_i0, bessel_i0_scaled, bessel_j0};
pub use envelope::{j0_envelope_inverse, EnvelopeTable, ENVELOPE_CAP};
pub use expint::{expint_en, expint_en_scaled};
pub use marcum::marcum_q1;

pub(crate) use bessel::{i0_scaled, j0};
pub(crate) use expint::en_scaled;
pub(crate) use marcum::q1_from_means;
