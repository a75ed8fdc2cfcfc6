//! Density evolution on the erasure channel and threshold search.
//!
//! The erasure probability on variable-to-check edges follows
//! `x_{t+1} = 1 - I_{E,V}(1 - I_{E,C}(x_t), q)`, starting from the first
//! variable-node activation `x_0 = 1 - I_{E,V}(1, q)` (channel first, then
//! checks). Computing `x_0` counts as the first iteration.
//!
//! Both half-iterations are evaluated in erasure form (`1 - I` computed
//! directly), which is the same map without the cancellation that would
//! otherwise swamp `x` long before it reaches `1e-12`.

use serde::Serialize;
use thiserror::Error;

use crate::ensemble::ValidatedEnsemble;
use crate::exit::{CndErasure, VndAtChannel};
use crate::format::F17;

/// Erasure probability treated as decoded.
pub const DEFAULT_TOL: f64 = 1e-12;
/// Iteration cap per probe.
///
/// Where the threshold is set by stability, convergence just below it is
/// geometric with rate `1 - O(q* - q)`, so the cap bounds how close to `q*`
/// a probe can still succeed: roughly `c / max_iters` for an ensemble
/// constant `c` of order 1 to 5. This cap keeps that bias below `1e-6`.
pub const DEFAULT_MAX_ITERS: usize = 10_000_000;
/// Bisection stops once the bracket is this narrow.
pub const BRACKET_WIDTH: f64 = 1e-7;
/// Upward step of the trajectory tolerated as rounding.
const ANOMALY_SLACK: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DeError {
    #[error("erasure probability increased from {previous} to {current} at iteration {iteration} (q = {q})")]
    Anomaly { q: f64, iteration: usize, previous: f64, current: f64 },
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("channel erasure probability {0} outside [0, 1]")]
    BadChannel(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeOutcome {
    pub success: bool,
    pub final_x: f64,
    pub iters: usize,
}

/// Runs density evolution at channel erasure probability `q`.
///
/// Succeeds once `x < tol`. Fails when `max_iters` is reached or the
/// trajectory stops decreasing above `tol` (a fixed point was hit).
pub fn de_iterate(ens: &ValidatedEnsemble, q: f64, max_iters: usize, tol: f64) -> Result<DeOutcome, DeError> {
    de_iterate_observed(ens, q, max_iters, tol, |_, _| {})
}

/// [`de_iterate`], reporting every `(iteration, x)` to `observe`.
pub fn de_iterate_observed(
    ens: &ValidatedEnsemble,
    q: f64,
    max_iters: usize,
    tol: f64,
    mut observe: impl FnMut(usize, f64),
) -> Result<DeOutcome, DeError> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(DeError::BadTolerance(tol));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(DeError::BadChannel(q));
    }
    let vnd = VndAtChannel::new(ens, q);
    let cnd = CndErasure::new(ens);
    let mut x = vnd.erasure(1.0);
    let mut iters = 1;
    observe(iters, x);
    loop {
        if x < tol {
            return Ok(DeOutcome { success: true, final_x: x, iters });
        }
        if iters >= max_iters {
            return Ok(DeOutcome { success: false, final_x: x, iters });
        }
        let next = vnd.erasure(cnd.eval(x));
        iters += 1;
        observe(iters, next);
        if next > x + ANOMALY_SLACK {
            return Err(DeError::Anomaly { q, iteration: iters, previous: x, current: next });
        }
        if next >= x {
            return Ok(DeOutcome { success: false, final_x: next, iters });
        }
        x = next;
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdOptions {
    pub max_iters: usize,
    pub tol: f64,
    /// Keep a (thinned) trajectory of the run at `q_star`.
    pub trace: bool,
}

impl Default for ThresholdOptions {
    fn default() -> Self {
        Self { max_iters: DEFAULT_MAX_ITERS, tol: DEFAULT_TOL, trace: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdResult {
    pub q_star: f64,
    /// Iterations used by the density-evolution run at `q_star`.
    pub iterations_at_threshold: usize,
    /// Density-evolution runs made: both endpoints, every bisection probe,
    /// and the final run at `q_star`.
    pub bisection_steps: usize,
    /// The bracket ends behaved as expected: success at the low end,
    /// failure at the high end.
    pub converged: bool,
    /// `(iteration, x)` of the run at `q_star`: every iteration up to 64,
    /// then powers of two, then the last one.
    pub residual_trace: Option<Vec<(usize, f64)>>,
}

impl Serialize for ThresholdResult {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Doc {
            q_star: F17,
            iterations_at_threshold: usize,
            bisection_steps: usize,
            converged: bool,
            residual_trace: Option<Vec<(usize, F17)>>,
        }
        Doc {
            q_star: F17(self.q_star),
            iterations_at_threshold: self.iterations_at_threshold,
            bisection_steps: self.bisection_steps,
            converged: self.converged,
            residual_trace: self
                .residual_trace
                .as_ref()
                .map(|t| t.iter().map(|&(i, x)| (i, F17(x))).collect()),
        }
        .serialize(s)
    }
}

/// Threshold search with the default options.
pub fn find_threshold(ens: &ValidatedEnsemble) -> Result<ThresholdResult, DeError> {
    find_threshold_with(ens, &ThresholdOptions::default())
}

/// Bisection on `q ∈ [0, 1]` for the largest channel erasure probability at
/// which density evolution succeeds.
pub fn find_threshold_with(ens: &ValidatedEnsemble, opts: &ThresholdOptions) -> Result<ThresholdResult, DeError> {
    let mut runs = 0;
    let mut probe = |q: f64| -> Result<bool, DeError> {
        runs += 1;
        Ok(de_iterate(ens, q, opts.max_iters, opts.tol)?.success)
    };
    let low_ok = probe(0.0)?;
    let high_fails = !probe(1.0)?;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    if low_ok && high_fails {
        while hi - lo > BRACKET_WIDTH {
            let mid = 0.5 * (lo + hi);
            if probe(mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    } else if !low_ok {
        hi = 0.0;
    } else {
        lo = 1.0;
    }
    let q_star = 0.5 * (lo + hi);

    let mut trace = Vec::new();
    let keep = |i: usize| i <= 64 || i.is_power_of_two();
    let at_star = de_iterate_observed(ens, q_star, opts.max_iters, opts.tol, |i, x| {
        if opts.trace && keep(i) {
            trace.push((i, x));
        }
    })?;
    runs += 1;
    if opts.trace && trace.last().map(|&(i, _)| i) != Some(at_star.iters) {
        trace.push((at_star.iters, at_star.final_x));
    }
    Ok(ThresholdResult {
        q_star,
        iterations_at_threshold: at_star.iters,
        bisection_steps: runs,
        converged: low_ok && high_fails,
        residual_trace: opts.trace.then_some(trace),
    })
}
