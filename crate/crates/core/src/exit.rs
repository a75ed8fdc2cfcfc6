//! Exact EXIT functions on the erasure channel.
//!
//! Mutual information is expressed through the erasure probability of the
//! extrinsic channel, `I_A = 1 - p`. Per-node functions are polynomials in
//! `p` (and the channel erasure probability `q` for variable nodes) whose
//! integer coefficients come from the information-function tables; only the
//! final evaluation is done in floating point.
//!
//! The polynomial evaluators accept any real `p`, which the finite-difference
//! audits of the slopes at `p = 0` rely on.

use thiserror::Error;

use crate::codeprops::ComponentCode;
use crate::ensemble::{NodeModel, ValidatedEnsemble};
use crate::format::fmt_f64;

/// Grid used to verify that the CND EXIT function can be inverted.
pub const MONOTONICITY_GRID: usize = 1024;
/// Slack allowed on a non-increasing step of the sampled CND curve.
const MONOTONICITY_SLACK: f64 = 1e-13;
/// Required accuracy of [`CndInverse::invert`].
pub const INVERSION_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExitError {
    #[error("check-node EXIT function increases between p = {p_left} and p = {p_right}")]
    NotMonotone { p_left: f64, p_right: f64 },
    #[error("target {target} outside the CND EXIT range [{low}, {high}]")]
    OutOfRange { target: f64, low: f64, high: f64 },
    #[error("need at least 2 chart points, got {0}")]
    TooFewPoints(usize),
}

/// Coefficients `a_t` and `a_{t,z}` of a generic node's EXIT polynomial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExitCoefficients {
    pub n: usize,
    pub k: usize,
    /// `a_t = (n-t) ẽ_{n-t} - (t+1) ẽ_{n-t-1}`, `t = 0..n`.
    pub a_t: Vec<i128>,
    /// `a_tz[t][z] = (n-t) ẽ_{n-t,k-z} - (t+1) ẽ_{n-t-1,k-z}`; only present
    /// when built for a variable node.
    pub a_tz: Option<Vec<Vec<i128>>>,
}

impl ExitCoefficients {
    /// Check-node form, from the plain information functions.
    pub fn for_check(code: &ComponentCode) -> Self {
        let n = code.n();
        let e = code.info_functions();
        let a_t = (0..n)
            .map(|t| (n - t) as i128 * e.get(n - t) as i128 - (t + 1) as i128 * e.get(n - t - 1) as i128)
            .collect();
        Self { n, k: code.k(), a_t, a_tz: None }
    }

    /// Variable-node form, from the full split table. `a_t` is filled too
    /// (it is the `z = k` column).
    pub fn for_variable(code: &ComponentCode) -> Self {
        let (n, k) = (code.n(), code.k());
        let split = code.split_info_functions();
        let e = |g: usize, h: usize| split.get(g, h).expect("full table") as i128;
        let a_tz: Vec<Vec<i128>> = (0..n)
            .map(|t| {
                (0..=k)
                    .map(|z| (n - t) as i128 * e(n - t, k - z) - (t + 1) as i128 * e(n - t - 1, k - z))
                    .collect()
            })
            .collect();
        let a_t = a_tz.iter().map(|row| row[k]).collect();
        Self { n, k, a_t, a_tz: Some(a_tz) }
    }

    /// `1 - (1/n) Σ_t a_t p^t (1-p)^(n-t-1)`.
    pub fn check_exit(&self, p: f64) -> f64 {
        1.0 - self.check_erasure(p)
    }

    /// `1 - check_exit(p)`, without the cancellation near `p = 0`.
    pub fn check_erasure(&self, p: f64) -> f64 {
        bernstein_sum(self.a_t.iter().map(|&a| a as f64), p) / self.n as f64
    }

    /// Folds the channel terms for a fixed `q`: `b_t = Σ_z a_{t,z} q^z (1-q)^(k-z)`.
    pub fn channel_folded(&self, q: f64) -> Vec<f64> {
        let a_tz = self.a_tz.as_ref().expect("variable-node coefficients");
        a_tz.iter()
            .map(|row| bernstein_sum(row.iter().map(|&a| a as f64), q))
            .collect()
    }

    /// `1 - (1/n) Σ_t Σ_z a_{t,z} p^t (1-p)^(n-t-1) q^z (1-q)^(k-z)`.
    pub fn variable_exit(&self, p: f64, q: f64) -> f64 {
        folded_exit(&self.channel_folded(q), p)
    }
}

/// `1 - (1/n) Σ_t b_t p^t (1-p)^(n-t-1)` with `n = b.len()`.
fn folded_exit(b: &[f64], p: f64) -> f64 {
    1.0 - folded_erasure(b, p)
}

fn folded_erasure(b: &[f64], p: f64) -> f64 {
    bernstein_sum(b.iter().copied(), p) / b.len() as f64
}

/// `Σ_i c_i x^i (1-x)^(deg-i)` with `deg = len - 1`, by running products so
/// that `x ∈ {0, 1}` gives exact zeros and ones.
fn bernstein_sum(coeffs: impl ExactSizeIterator<Item = f64>, x: f64) -> f64 {
    const CAP: usize = 64;
    let len = coeffs.len();
    assert!((1..=CAP).contains(&len), "polynomial degree out of range");
    let y = 1.0 - x;
    let mut down = [1.0; CAP];
    for i in 1..len {
        down[i] = down[i - 1] * y;
    }
    let mut up = 1.0;
    let mut sum = 0.0;
    for (i, c) in coeffs.enumerate() {
        sum += c * up * down[len - 1 - i];
        up *= x;
    }
    sum
}

/// `(j, 1)` repetition variable node: `1 - q p^(j-1)`.
pub fn exit_repetition(j: usize, p: f64, q: f64) -> f64 {
    1.0 - q * p.powi(j as i32 - 1)
}

/// `(j, j-1)` SPC check node: `(1-p)^(j-1)`.
pub fn exit_spc(j: usize, p: f64) -> f64 {
    (1.0 - p).powi(j as i32 - 1)
}

/// `1 - (1-p)^(j-1)`, accurate for small `p`.
pub fn erasure_spc(j: usize, p: f64) -> f64 {
    let m = j - 1;
    if m <= 64 {
        // p · (1 + y + ... + y^(m-1)) with y = 1 - p
        let y = 1.0 - p;
        let mut acc = 1.0;
        for _ in 1..m {
            acc = acc * y + 1.0;
        }
        p * acc
    } else {
        -(m as f64 * (-p).ln_1p()).exp_m1()
    }
}

/// Generic check node EXIT function (builds the coefficient table).
pub fn exit_check_generic(code: &ComponentCode, p: f64) -> f64 {
    ExitCoefficients::for_check(code).check_exit(p)
}

/// Generic variable node EXIT function (builds the split table).
pub fn exit_variable_generic(code: &ComponentCode, p: f64, q: f64) -> f64 {
    ExitCoefficients::for_variable(code).variable_exit(p, q)
}

/// VND EXIT function `Σ λ_i I^(i)(p, q)`.
pub fn exit_vnd(ens: &ValidatedEnsemble, p: f64, q: f64) -> f64 {
    ens.variable_types()
        .iter()
        .map(|t| {
            t.edge_fraction
                * match &t.model {
                    NodeModel::Repetition { length } => exit_repetition(*length, p, q),
                    NodeModel::Generic(g) => g.coefficients().variable_exit(p, q),
                    NodeModel::Spc { .. } => unreachable!("validated: no SPC variable nodes"),
                }
        })
        .sum()
}

/// VND EXIT with the repetition part regrouped:
/// `Σ λ_j^(r) - q λ_r(p) + Σ_gen λ_i I^(i)(p, q)`.
pub fn exit_vnd_split(ens: &ValidatedEnsemble, p: f64, q: f64) -> f64 {
    let mut rep_mass = 0.0;
    let mut lambda_r = 0.0;
    let mut generic = 0.0;
    for t in ens.variable_types() {
        match &t.model {
            NodeModel::Repetition { length } => {
                rep_mass += t.edge_fraction;
                lambda_r += t.edge_fraction * p.powi(*length as i32 - 1);
            }
            NodeModel::Generic(g) => generic += t.edge_fraction * g.coefficients().variable_exit(p, q),
            NodeModel::Spc { .. } => unreachable!("validated: no SPC variable nodes"),
        }
    }
    rep_mass - q * lambda_r + generic
}

/// CND EXIT function `Σ ρ_i I^(i)(p)`.
pub fn exit_cnd(ens: &ValidatedEnsemble, p: f64) -> f64 {
    ens.check_types()
        .iter()
        .map(|t| {
            t.edge_fraction
                * match &t.model {
                    NodeModel::Spc { length } => exit_spc(*length, p),
                    NodeModel::Generic(g) => g.coefficients().check_exit(p),
                    NodeModel::Repetition { .. } => unreachable!("validated: no repetition check nodes"),
                }
        })
        .sum()
}

/// CND EXIT with the SPC part regrouped: `ρ_SPC(1-p) + Σ_gen ρ_i I^(i)(p)`.
pub fn exit_cnd_split(ens: &ValidatedEnsemble, p: f64) -> f64 {
    let x = 1.0 - p;
    let mut rho_spc = 0.0;
    let mut generic = 0.0;
    for t in ens.check_types() {
        match &t.model {
            NodeModel::Spc { length } => rho_spc += t.edge_fraction * x.powi(*length as i32 - 1),
            NodeModel::Generic(g) => generic += t.edge_fraction * g.coefficients().check_exit(p),
            NodeModel::Repetition { .. } => unreachable!("validated: no repetition check nodes"),
        }
    }
    rho_spc + generic
}

/// `1 - exit_cnd(ens, p)`, evaluated without cancellation: the erasure
/// probability on check-to-variable edges.
pub fn erasure_cnd(ens: &ValidatedEnsemble, p: f64) -> f64 {
    CndErasure::new(ens).eval(p)
}

/// [`erasure_cnd`] with the per-type data flattened, for tight loops.
#[derive(Debug, Clone)]
pub struct CndErasure {
    spc: Vec<(f64, usize)>,
    generic: Vec<(f64, Vec<f64>)>,
}

impl CndErasure {
    pub fn new(ens: &ValidatedEnsemble) -> Self {
        let mut spc = Vec::new();
        let mut generic = Vec::new();
        for t in ens.check_types() {
            match &t.model {
                NodeModel::Spc { length } => spc.push((t.edge_fraction, *length)),
                NodeModel::Generic(g) => {
                    generic.push((t.edge_fraction, g.coefficients().a_t.iter().map(|&a| a as f64).collect()))
                }
                NodeModel::Repetition { .. } => unreachable!("validated: no repetition check nodes"),
            }
        }
        Self { spc, generic }
    }

    pub fn eval(&self, p: f64) -> f64 {
        let spc: f64 = self.spc.iter().map(|&(w, j)| w * erasure_spc(j, p)).sum();
        let gen: f64 = self.generic.iter().map(|(w, a)| w * folded_erasure(a, p)).sum();
        spc + gen
    }
}

/// VND EXIT function with the channel erasure probability folded in; cheap
/// to evaluate repeatedly at one `q`.
#[derive(Debug, Clone)]
pub struct VndAtChannel {
    q: f64,
    repetition: Vec<(f64, i32)>,
    generic: Vec<(f64, Vec<f64>)>,
}

impl VndAtChannel {
    pub fn new(ens: &ValidatedEnsemble, q: f64) -> Self {
        let mut repetition = Vec::new();
        let mut generic = Vec::new();
        for t in ens.variable_types() {
            match &t.model {
                NodeModel::Repetition { length } => repetition.push((t.edge_fraction, *length as i32 - 1)),
                NodeModel::Generic(g) => generic.push((t.edge_fraction, g.coefficients().channel_folded(q))),
                NodeModel::Spc { .. } => unreachable!("validated: no SPC variable nodes"),
            }
        }
        Self { q, repetition, generic }
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn eval(&self, p: f64) -> f64 {
        let rep: f64 = self
            .repetition
            .iter()
            .map(|&(w, e)| w * (1.0 - self.q * p.powi(e)))
            .sum();
        let gen: f64 = self.generic.iter().map(|(w, b)| w * folded_exit(b, p)).sum();
        rep + gen
    }

    /// `1 - eval(p)`, without the cancellation near `p = 0`.
    pub fn erasure(&self, p: f64) -> f64 {
        let rep: f64 = self.repetition.iter().map(|&(w, e)| w * self.q * p.powi(e)).sum();
        let gen: f64 = self.generic.iter().map(|(w, b)| w * folded_erasure(b, p)).sum();
        rep + gen
    }
}

/// Verifies that the CND EXIT function is non-increasing on a uniform grid.
pub fn check_cnd_monotone(ens: &ValidatedEnsemble) -> Result<(), ExitError> {
    let step = 1.0 / MONOTONICITY_GRID as f64;
    let mut prev = exit_cnd(ens, 0.0);
    for i in 1..=MONOTONICITY_GRID {
        let p = i as f64 * step;
        let v = exit_cnd(ens, p);
        if v > prev + MONOTONICITY_SLACK {
            return Err(ExitError::NotMonotone { p_left: p - step, p_right: p });
        }
        prev = v;
    }
    Ok(())
}

/// Inverse of the CND EXIT function, after a one-off monotonicity check.
#[derive(Debug, Clone, Copy)]
pub struct CndInverse<'a> {
    ens: &'a ValidatedEnsemble,
    high: f64,
    low: f64,
}

impl<'a> CndInverse<'a> {
    pub fn new(ens: &'a ValidatedEnsemble) -> Result<Self, ExitError> {
        check_cnd_monotone(ens)?;
        Ok(Self { ens, high: exit_cnd(ens, 0.0), low: exit_cnd(ens, 1.0) })
    }

    /// Smallest `p` in `[0, 1]` with `I_{E,C}(p) = target`, by bisection.
    pub fn invert(&self, target: f64) -> Result<f64, ExitError> {
        let out_of_range = || ExitError::OutOfRange { target, low: self.low, high: self.high };
        if target >= self.high {
            return if target <= self.high + INVERSION_TOLERANCE { Ok(0.0) } else { Err(out_of_range()) };
        }
        if target <= self.low {
            return if target >= self.low - INVERSION_TOLERANCE { Ok(1.0) } else { Err(out_of_range()) };
        }
        // invariant: exit(lo) > target >= exit(hi)
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        while hi - lo > f64::EPSILON * hi.max(f64::MIN_POSITIVE) {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if exit_cnd(self.ens, mid) > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let err_lo = (exit_cnd(self.ens, lo) - target).abs();
        let err_hi = (exit_cnd(self.ens, hi) - target).abs();
        Ok(if err_lo < err_hi { lo } else { hi })
    }
}

/// `p` with `exit_cnd(ens, p) = target`.
pub fn inverse_exit_cnd(ens: &ValidatedEnsemble, target: f64) -> Result<f64, ExitError> {
    CndInverse::new(ens)?.invert(target)
}

/// Samples of an EXIT curve against `I_A`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExitCurve {
    /// `(I_A, value)`, `I_A` strictly increasing.
    pub points: Vec<(f64, f64)>,
    /// Channel erasure probability, for VND curves.
    pub channel_q: Option<f64>,
}

impl ExitCurve {
    /// CSV with header `ia,value`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("ia,value\n");
        for &(ia, v) in &self.points {
            out.push_str(&format!("{},{}\n", fmt_f64(ia), fmt_f64(v)));
        }
        out
    }
}

/// Two-curve chart CSV, header `ia,vnd,cnd_inv`. Both curves must share the
/// same `I_A` grid.
pub fn chart_csv(vnd: &ExitCurve, cnd_inverse: &ExitCurve) -> String {
    let mut out = String::from("ia,vnd,cnd_inv\n");
    for (&(ia, v), &(_, c)) in vnd.points.iter().zip(&cnd_inverse.points) {
        out.push_str(&format!("{},{},{}\n", fmt_f64(ia), fmt_f64(v), fmt_f64(c)));
    }
    out
}

/// VND curve `I_{E,V}(I_A)` and CND inverse curve `I_{E,C}^{-1}(I_A)` on a
/// uniform `I_A` grid, ready to overlay.
///
/// The inverse curve at `I_A` is the a-priori information `1 - p` the check
/// nodes need to output `I_A`.
pub fn sample_exit_chart(
    ens: &ValidatedEnsemble,
    q: f64,
    npoints: usize,
) -> Result<(ExitCurve, ExitCurve), ExitError> {
    if npoints < 2 {
        return Err(ExitError::TooFewPoints(npoints));
    }
    let inverse = CndInverse::new(ens)?;
    let vnd = VndAtChannel::new(ens, q);
    let grid: Vec<f64> = (0..npoints).map(|i| i as f64 / (npoints - 1) as f64).collect();
    let vnd_points = grid.iter().map(|&ia| (ia, vnd.eval(1.0 - ia).clamp(0.0, 1.0))).collect();
    let cnd_points = grid
        .iter()
        .map(|&ia| Ok((ia, (1.0 - inverse.invert(ia)?).clamp(0.0, 1.0))))
        .collect::<Result<Vec<_>, ExitError>>()?;
    Ok((
        ExitCurve { points: vnd_points, channel_q: Some(q) },
        ExitCurve { points: cnd_points, channel_q: None },
    ))
}
