//! Robust instability analysis for unstable SISO LTI feedback loops.
//!
//! The quantity of interest is the robust instability radius (RIR) of an
//! unstable transfer function `g`: the smallest H-infinity norm of a *stable*
//! perturbation `delta(s)` that internally stabilizes the positive feedback
//! loop `1 - delta(s) g(s) = 0`. Keeping an oscillation alive in the face of
//! stabilizing parasitics is the dual of classical robust stability, so the
//! radius measures how persistently unstable the loop is.
//!
//! The crate provides
//!
//! * polynomial arithmetic, root finding and a Routh-table Hurwitz test
//!   ([`poly`]),
//! * rational transfer functions with exact L-infinity norms, a parity
//!   interlacing test and Nyquist sampling ([`xfer`]),
//! * lower bounds and parametric radii over static gains together with an
//!   assembled report ([`bounds`]),
//! * marginal stabilization by first-order all-pass perturbations and a
//!   two-sided certificate that turns the peak-gain lower bound into the
//!   exact radius ([`allpass`]),
//! * closed forms for a second-order class where the radius is known
//!   exactly, plus a one-parameter benchmark family ([`second_order`]),
//! * a FitzHugh-Nagumo case study: linearization around the equilibrium,
//!   critical static gain, synthesized destabilizing/stabilizing all-pass
//!   perturbations and nonlinear simulation ([`fhn`]).

pub mod allpass;
pub mod bounds;
pub mod fhn;
pub mod fmt;
pub mod poly;
pub mod second_order;
pub mod xfer;

/// Stability margin separating "strictly stable" from "marginal" everywhere
/// in the crate: a polynomial counts as Hurwitz only when every root has
/// real part below `-TAU_STAB`.
pub const TAU_STAB: f64 = 1e-9;

pub use allpass::{certify_exact_rir, solve_marginal, verify_marginal, AllPassPerturbation};
pub use bounds::{
    complex_rir, lower_bound_peak, lower_bound_static, real_rir, report, CertTag, ExtReal,
    RirReport,
};
pub use poly::Polynomial;
pub use xfer::RationalTF;
