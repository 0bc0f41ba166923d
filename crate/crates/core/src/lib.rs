//! Fluid antenna multiple access (FAMA) analysis.
//!
//! A user with a fluid antenna switches among `N` ports spread over `W`
//! wavelengths to the port with the best signal-to-interference ratio. This
//! crate simulates that channel, evaluates its SIR outage probability exactly
//! and through two upper bounds, turns outage into network capacity and
//! multiplexing gain, and inverts the relations into design rules for `N`,
//! `W` and the tolerable port correlation.
//!
//! ```
//! use fama_core::{make_geometry, outage_ub_integral, FamaScenario, QuadratureSettings};
//!
//! let g = make_geometry(20, 2.0)?;
//! let s = FamaScenario::identical_users(g, 100, 1.0)?;
//! let eps = outage_ub_integral(&s, &QuadratureSettings::default())?.probability;
//! let gain = 101.0 * (1.0 - eps);
//! assert!(gain > 11.5 && gain < 14.5);
//! # Ok::<(), fama_core::FamaError>(())
//! ```

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod channel;
pub mod design;
mod error;
pub mod montecarlo;
pub mod par;
pub mod plot;
pub mod quadrature;
pub mod rng;
pub mod specfun;
pub mod sweep;

pub use analytic::{
    capacity_lower_bound, mg_approx_equal_corr, mg_approx_general, more_users_capacity_ratio,
    multiplexing_gain, outage_exact, outage_ub_closed, outage_ub_integral, ClosedBound,
    QuadratureSettings, EXACT_CAP,
};
pub use channel::{
    db_to_linear, linear_to_db, make_geometry, sample_draw, sample_per_interferer, ChannelDraw,
    FamaScenario, PortGeometry,
};
pub use design::{
    critical_mu, min_ports_equal_corr, min_ports_general, min_width, DesignOutcome, DesignTarget,
};
pub use error::{FamaError, Result};
pub use montecarlo::{
    estimate_network_metrics, estimate_outage, select_port, McRun, Method, OutageEstimate,
};
pub use par::Execution;
pub use sweep::{run_sweep, SweepSpec};
