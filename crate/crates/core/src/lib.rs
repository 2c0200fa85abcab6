//! Minimum-energy routing in multi-hop wireless networks under jamming.
//!
//! The crate is organised around a small number of modules:
//!
//! - [`channel`]: Rayleigh-fading link model, aggregate jamming, exact and
//!   exponential-bound outage probabilities, and numerical power inversion.
//! - [`netgen`]: seeded random instance generation and the instance file format.
//! - [`routing`]: the jamming-oblivious benchmark (MER), equal-outage routing over
//!   a hop-layered expansion (MER-EQ), and the closed-form approximate-outage
//!   router (MER-AP) with its success-ratio tightening step.
//! - [`optimal`]: exhaustive path enumeration with an exact per-path power program.
//! - [`scheduling`]: maximal transmission sets, the max-throughput LP and energy per bit.
//! - [`experiments`]: parameter sweeps, histograms and throughput studies.

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

#[cfg(test)]
#[macro_use]
mod test_macros {
    macro_rules! assert_close {
        ($a:expr, $b:expr, $tol:expr) => {{
            let (a, b): (f64, f64) = ($a, $b);
            assert!((a - b).abs() <= $tol, "{} vs {} (tol {})", a, b, $tol);
        }};
    }
}

pub mod channel;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod lp;
pub mod netgen;
pub mod optimal;
pub mod rng;
pub mod routing;
pub mod scheduling;

pub use channel::{ChannelParams, Jammer, LinkGeometry};
pub use error::{Error, Result};
pub use geometry::Point;
pub use netgen::{GenSpec, NetworkInstance, Node};
pub use routing::{Algorithm, RoutePlan};
