//! Link-level physics.
//!
//! A link from a transmitter with power `P` to a receiver at distance `d` sees
//! Rayleigh fading on the desired signal and on every jammer signal, unit mean
//! in all cases. A jammer `j` with power `P_j` at distance `d_j` from the
//! receiver is ON with probability `q` (`q = 1` is a static jammer). Outage
//! means the instantaneous SIR drops below `gamma`.
//!
//! The exact fading-averaged outage is
//!
//! ```text
//! 1 - exp(-gamma N0 d^alpha / P) * prod_j ( q / (1 + x_j) + 1 - q ),
//!     x_j = gamma (P_j / d_j^alpha) / (P / d^alpha)
//! ```
//!
//! and the exponential upper bound replaces each factor by `exp(-q x_j)`, which
//! only depends on the aggregate expected jamming `J = q sum_j P_j / d_j^alpha`:
//!
//! ```text
//! 1 - exp(-gamma d^alpha (N0 + J) / P)
//! ```
//!
//! Everything is evaluated in log-success space (`ln(1 - p)`) with `ln_1p` and
//! `exp_m1` so small outage probabilities keep full relative precision.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::geometry::Point;

/// Smallest outage target accepted by the inversions.
pub const MIN_PROBABILITY: f64 = 1e-12;
/// Largest outage target accepted by the inversions.
pub const MAX_PROBABILITY: f64 = 1.0 - 1e-12;

/// Relative bracket width at which the power bisection stops.
pub const POWER_REL_TOL: f64 = 1e-12;
/// Iteration cap shared by bracket growth and bisection.
pub const POWER_MAX_ITER: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    /// Path-loss exponent.
    pub alpha: f64,
    /// Noise power.
    pub n0: f64,
    /// Linear SIR threshold.
    pub gamma: f64,
    /// Probability that a jammer is ON. `1.0` means static jammers.
    pub q: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            alpha: 2.0,
            n0: 1.0,
            gamma: 1.0,
            q: 1.0,
        }
    }
}

impl ChannelParams {
    pub fn new(alpha: f64, n0: f64, gamma: f64, q: f64) -> Result<Self> {
        let params = Self {
            alpha,
            n0,
            gamma,
            q,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 1.0 && self.alpha.is_finite()) {
            return domain(format!("alpha must be >= 1, got {}", self.alpha));
        }
        if !(self.n0 > 0.0 && self.n0.is_finite()) {
            return domain(format!("n0 must be > 0, got {}", self.n0));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return domain(format!("gamma must be > 0, got {}", self.gamma));
        }
        if !(0.0..=1.0).contains(&self.q) {
            return domain(format!("q must lie in [0, 1], got {}", self.q));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jammer {
    pub pos: Point,
    pub power: f64,
}

impl Jammer {
    pub fn new(pos: Point, power: f64) -> Result<Self> {
        if !(power > 0.0 && power.is_finite()) {
            return domain(format!("jammer power must be > 0, got {power}"));
        }
        Ok(Self { pos, power })
    }
}

/// One jammer as seen from a particular receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JammerTerm {
    pub power: f64,
    pub distance: f64,
}

impl JammerTerm {
    pub const fn new(power: f64, distance: f64) -> Self {
        Self { power, distance }
    }
}

/// Distance and aggregate expected jamming for a single link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    pub d: f64,
    pub jam: f64,
}

impl LinkGeometry {
    pub fn new(d: f64, jam: f64) -> Result<Self> {
        let geom = Self { d, jam };
        geom.validate()?;
        Ok(geom)
    }

    fn validate(&self) -> Result<()> {
        if !(self.d > 0.0 && self.d.is_finite()) {
            return domain(format!("link distance must be > 0, got {}", self.d));
        }
        if !(self.jam >= 0.0 && self.jam.is_finite()) {
            return domain(format!("jamming power must be >= 0, got {}", self.jam));
        }
        Ok(())
    }
}

/// `gamma = 2^rho - 1` for a target spectral efficiency `rho` in bits/s/Hz.
pub fn sir_threshold(rho: f64) -> Result<f64> {
    if !(rho >= 0.0 && rho.is_finite()) {
        return domain(format!("throughput must be >= 0, got {rho}"));
    }
    Ok(rho.exp2() - 1.0)
}

/// Jammer powers and distances as seen from `rx`.
pub fn jammer_terms(rx: Point, jammers: &[Jammer]) -> Result<Vec<JammerTerm>> {
    jammers
        .iter()
        .map(|j| {
            let distance = rx.distance(&j.pos);
            if distance <= 0.0 {
                return Err(Error::Singular(format!(
                    "jammer at ({}, {}) coincides with a receiver",
                    j.pos.x, j.pos.y
                )));
            }
            Ok(JammerTerm::new(j.power, distance))
        })
        .collect()
}

/// Expected aggregate jamming power `q * sum_j P_j / d_j^alpha` at `rx`.
pub fn aggregate_jamming(rx: Point, jammers: &[Jammer], params: &ChannelParams) -> Result<f64> {
    let terms = jammer_terms(rx, jammers)?;
    Ok(aggregate_from_terms(&terms, params))
}

pub(crate) fn aggregate_from_terms(terms: &[JammerTerm], params: &ChannelParams) -> f64 {
    let sum: f64 = terms
        .iter()
        .map(|t| t.power / t.distance.powf(params.alpha))
        .sum();
    params.q * sum
}

fn check_power(p: f64) -> Result<()> {
    if !(p > 0.0 && p.is_finite()) {
        return domain(format!("transmit power must be > 0, got {p}"));
    }
    Ok(())
}

fn check_distance(d: f64) -> Result<()> {
    if !(d > 0.0 && d.is_finite()) {
        return domain(format!("distance must be > 0, got {d}"));
    }
    Ok(())
}

fn check_terms(terms: &[JammerTerm]) -> Result<()> {
    for t in terms {
        if !(t.distance > 0.0) {
            return Err(Error::Singular(
                "jammer coincides with the receiver".to_string(),
            ));
        }
        if !(t.power > 0.0) {
            return domain(format!("jammer power must be > 0, got {}", t.power));
        }
    }
    Ok(())
}

pub(crate) fn check_probability(p: f64, what: &str) -> Result<()> {
    if !(MIN_PROBABILITY..=MAX_PROBABILITY).contains(&p) {
        return domain(format!(
            "{what} must lie in [{MIN_PROBABILITY:e}, 1 - {MIN_PROBABILITY:e}], got {p}"
        ));
    }
    Ok(())
}

/// `ln(1 - p_out)` for the exact model. Inputs are assumed valid.
pub(crate) fn log_success_exact(
    p_tx: f64,
    d: f64,
    terms: &[JammerTerm],
    params: &ChannelParams,
) -> f64 {
    let path_gain = d.powf(params.alpha);
    let mut log_s = -params.gamma * params.n0 * path_gain / p_tx;
    if params.q == 0.0 {
        return log_s;
    }
    for t in terms {
        let x = params.gamma * (t.power / t.distance.powf(params.alpha)) * path_gain / p_tx;
        log_s += if params.q == 1.0 {
            -x.ln_1p()
        } else {
            (-params.q * x / (1.0 + x)).ln_1p()
        };
    }
    log_s
}

/// `ln(1 - p_out)` for the exponential bound.
pub(crate) fn log_success_approx(p_tx: f64, geom: &LinkGeometry, params: &ChannelParams) -> f64 {
    -params.gamma * geom.d.powf(params.alpha) * (params.n0 + geom.jam) / p_tx
}

pub(crate) fn outage_from_log_success(log_s: f64) -> f64 {
    -log_s.exp_m1()
}

/// Exact fading-averaged outage probability of a link.
pub fn link_outage_exact(
    p_tx: f64,
    d: f64,
    terms: &[JammerTerm],
    params: &ChannelParams,
) -> Result<f64> {
    check_power(p_tx)?;
    check_distance(d)?;
    check_terms(terms)?;
    Ok(outage_from_log_success(log_success_exact(
        p_tx, d, terms, params,
    )))
}

/// Exponential upper bound on the link outage probability.
pub fn link_outage_approx(p_tx: f64, geom: &LinkGeometry, params: &ChannelParams) -> Result<f64> {
    check_power(p_tx)?;
    geom.validate()?;
    Ok(outage_from_log_success(log_success_approx(
        p_tx, geom, params,
    )))
}

/// Closed-form inverse of [`link_outage_approx`].
pub fn required_power_approx(
    target_outage: f64,
    geom: &LinkGeometry,
    params: &ChannelParams,
) -> Result<f64> {
    check_probability(target_outage, "target outage")?;
    geom.validate()?;
    Ok(params.gamma * geom.d.powf(params.alpha) * (params.n0 + geom.jam)
        / -(-target_outage).ln_1p())
}

/// Transmit power at which [`link_outage_exact`] equals `target_outage`.
///
/// The outage is strictly decreasing in power, so a bracketed bisection in
/// log-power converges globally. The lower bracket is the jammer-free closed
/// form; the upper bracket doubles until the outage drops below the target.
/// The upper end of the final bracket is returned, so the achieved outage never
/// exceeds the target by more than rounding.
pub fn required_power_exact(
    target_outage: f64,
    d: f64,
    terms: &[JammerTerm],
    params: &ChannelParams,
) -> Result<f64> {
    check_probability(target_outage, "target outage")?;
    check_distance(d)?;
    check_terms(terms)?;

    let target_log_s = (-target_outage).ln_1p();
    let lo_closed = params.gamma * params.n0 * d.powf(params.alpha) / -target_log_s;
    if terms.is_empty() || params.q == 0.0 {
        return Ok(lo_closed);
    }

    let mut lo = lo_closed;
    let mut hi = 2.0 * lo;
    let mut iterations = 0;
    while log_success_exact(hi, d, terms, params) < target_log_s {
        lo = hi;
        hi *= 2.0;
        iterations += 1;
        if iterations >= POWER_MAX_ITER || !hi.is_finite() {
            return Err(Error::Convergence {
                iterations,
                detail: format!(
                    "no upper power bracket for target outage {target_outage} at distance {d}"
                ),
            });
        }
    }

    for _ in 0..POWER_MAX_ITER {
        if hi / lo - 1.0 <= POWER_REL_TOL {
            return Ok(hi);
        }
        let mid = (lo * hi).sqrt();
        if log_success_exact(mid, d, terms, params) < target_log_s {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Convergence {
        iterations: POWER_MAX_ITER,
        detail: format!("power bisection stalled in [{lo}, {hi}] for target {target_outage}"),
    })
}
