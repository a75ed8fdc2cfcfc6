//! Behaviour of the decoder at `p = 0`: EXIT slopes, the GLDPC stability
//! bound, the D-GLDPC stability inequality and derivative matching.
//!
//! Slopes are taken with respect to the extrinsic erasure probability `p`
//! (so they are `≤ 0`); [`StabilityReport::ia_oriented`] gives the negated,
//! `I_A`-oriented values used when reading an EXIT chart.
//!
//! Only component codes with `d_min = 2` move the slopes. Those enter through
//! their rank deficiencies `Δ_{n-2}` (check side) and `Δ_{n-2,k-z}`
//! (variable side); for declared SPC and repetition nodes the closed forms
//! `2Δ_{n-2}/n = j - 1` and `Δ = [0, 1]` (rep-2) are used directly.

use serde::Serialize;
use thiserror::Error;

use crate::ensemble::{NodeModel, ValidatedEnsemble, ValidatedType};
use crate::exit::{exit_cnd, exit_vnd};
use crate::format::{f17_vec, F17};
use crate::subsets::binomial;

/// Slack on the stability inequality.
pub const INEQUALITY_SLACK: f64 = 1e-12;
/// `|slope_gap|` below which the curves are tangent at `I_A = 1`.
pub const TANGENCY_TOLERANCE: f64 = 1e-9;
/// Sign-change scan of the boundary search.
pub const BOUNDARY_GRID: usize = 10_000;
/// Final bracket width of each boundary root.
pub const BOUNDARY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StabilityError {
    #[error("check-node EXIT slope at p = 0 is zero; inverse slope undefined")]
    InverseSlopeUndefined,
}

/// Contribution `2ρ_iΔ_{n-2}/n_i` of a `d_min = 2` check type.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckTerm {
    pub index: usize,
    pub n: usize,
    pub k: usize,
    pub term: F17,
}

/// Contributions `2λ_iΔ_{n-2,k-z}/n_i`, `z = 0..=k`, of a `d_min = 2`
/// variable type.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariableTerms {
    pub index: usize,
    pub n: usize,
    pub k: usize,
    pub by_z: Vec<F17>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Applicability {
    /// No generalized variable nodes.
    pub is_gldpc: bool,
    /// Every generalized variable type has `d_min ≥ 3`.
    pub all_var_dmin_ge3: bool,
    /// Every generalized check type has `d_min ≥ 3`.
    pub all_chk_dmin_ge3: bool,
}

/// Slopes in the `I_A` orientation (`-d/dp`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IaOriented {
    pub cnd_slope_at_one: F17,
    pub vnd_slope_fn: Vec<F17>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    /// `dI_{E,C}/dp` at `p = 0`.
    pub cnd_slope_at_zero: F17,
    /// `∂I_{E,V}/∂p` at `p = 0` as monomial coefficients in `q`
    /// (index = power).
    pub vnd_slope_fn: Vec<F17>,
    /// Upper bound on the threshold; `inf` when vacuous, `null` when the
    /// inequality cannot be solved for `q`.
    pub gldpc_bound: Option<F17>,
    pub dmin2_check_terms: Vec<CheckTerm>,
    pub dmin2_var_terms: Vec<VariableTerms>,
    pub applicability: Applicability,
    pub ia_oriented: IaOriented,
}

/// `2Δ_{n-2}/n` for a check type; zero unless `d_min = 2`.
fn check_ratio(t: &ValidatedType) -> f64 {
    match &t.model {
        NodeModel::Spc { length } => (length - 1) as f64,
        NodeModel::Generic(g) => 2.0 * g.delta.delta_n2 as f64 / g.code.n() as f64,
        NodeModel::Repetition { .. } => unreachable!("validated: no repetition check nodes"),
    }
}

/// `Δ_{n-2,k-z}` for `z = 0..=k` of a variable type.
fn variable_deltas(t: &ValidatedType) -> Vec<u128> {
    match &t.model {
        NodeModel::Repetition { length: 2 } => vec![0, 1],
        NodeModel::Repetition { .. } => vec![0, 0],
        NodeModel::Generic(g) => g.delta.delta_n2_kz.clone(),
        NodeModel::Spc { .. } => unreachable!("validated: no SPC variable nodes"),
    }
}

/// `ρ'_SPC(1) + Σ 2ρ_iΔ_{n-2}/n_i`, i.e. `-dI_{E,C}/dp` at `p = 0`.
fn cnd_bracket(ens: &ValidatedEnsemble) -> f64 {
    ens.check_types().iter().map(|t| t.edge_fraction * check_ratio(t)).sum()
}

/// `dI_{E,C}/dp` at `p = 0`: `-ρ'_SPC(1) - Σ_{d_min=2} 2ρ_iΔ_{n-2}/n_i`.
pub fn cnd_derivative_at_zero(ens: &ValidatedEnsemble) -> f64 {
    0.0 - cnd_bracket(ens)
}

/// `-∂I_{E,V}/∂p` at `p = 0`: `qλ₂ + Σ_i Σ_z q^z (1-q)^(k-z) 2λ_iΔ_{n-2,k-z}/n_i`
/// (the left side of the stability inequality).
fn vnd_bracket(ens: &ValidatedEnsemble, q: f64) -> f64 {
    ens.variable_types()
        .iter()
        .filter(|t| t.d_min() == 2)
        .map(|t| {
            let deltas = variable_deltas(t);
            let k = deltas.len() - 1;
            let scale = 2.0 * t.edge_fraction / t.n() as f64;
            let mut sum = 0.0;
            for (z, &d) in deltas.iter().enumerate() {
                if d != 0 {
                    sum += d as f64 * q.powi(z as i32) * (1.0 - q).powi((k - z) as i32);
                }
            }
            scale * sum
        })
        .sum()
}

/// `∂I_{E,V}/∂p` at `p = 0` for channel erasure probability `q`.
pub fn vnd_derivative_at_zero(ens: &ValidatedEnsemble, q: f64) -> f64 {
    0.0 - vnd_bracket(ens, q)
}

/// Monomial coefficients of `vnd_derivative_at_zero` as a polynomial in `q`.
pub fn vnd_slope_polynomial(ens: &ValidatedEnsemble) -> Vec<f64> {
    let mut poly = vec![0.0; 2];
    for t in ens.variable_types().iter().filter(|t| t.d_min() == 2) {
        let deltas = variable_deltas(t);
        let k = deltas.len() - 1;
        let scale = 2.0 * t.edge_fraction / t.n() as f64;
        if poly.len() < k + 1 {
            poly.resize(k + 1, 0.0);
        }
        // q^z (1-q)^(k-z) = Σ_m C(k-z, m-z) (-1)^(m-z) q^m, collected exactly
        for (m, slot) in poly.iter_mut().enumerate().take(k + 1) {
            let mut c: i128 = 0;
            for (z, &d) in deltas.iter().enumerate().take(m + 1) {
                let b = binomial(k - z, m - z) as i128;
                let term = d as i128 * b;
                c += if (m - z) % 2 == 0 { term } else { -term };
            }
            *slot -= scale * c as f64;
        }
    }
    poly
}

fn applicability(ens: &ValidatedEnsemble) -> Applicability {
    let generalized = |types: &[ValidatedType]| -> Vec<usize> {
        types.iter().filter(|t| t.is_generalized()).map(|t| t.d_min()).collect()
    };
    let var = generalized(ens.variable_types());
    let chk = generalized(ens.check_types());
    Applicability {
        is_gldpc: var.is_empty(),
        all_var_dmin_ge3: var.iter().all(|&d| d >= 3),
        all_chk_dmin_ge3: chk.iter().all(|&d| d >= 3),
    }
}

/// `[λ₂ (ρ'_SPC(1) + Σ 2ρ_iΔ_{n-2}/n_i)]^{-1}`, where `λ₂` collects the
/// repetition-2 variable fraction. `+∞` when the product vanishes; `None`
/// when a generalized variable type has `d_min = 2`, since the inequality
/// then does not factor in `q`.
pub fn gldpc_stability_bound(ens: &ValidatedEnsemble) -> Option<f64> {
    let flags = applicability(ens);
    if !(flags.is_gldpc || flags.all_var_dmin_ge3) {
        return None;
    }
    // every remaining d_min = 2 variable type is a repetition-2 code
    let lambda2: f64 = ens
        .variable_types()
        .iter()
        .filter(|t| t.d_min() == 2)
        .map(|t| t.edge_fraction)
        .sum();
    let product = lambda2 * cnd_bracket(ens);
    Some(if product == 0.0 { f64::INFINITY } else { 1.0 / product })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityCheck {
    pub holds: bool,
    pub lhs: F17,
    pub rhs: F17,
    pub margin: F17,
}

/// Evaluates both sides of the D-GLDPC stability inequality at `q`.
/// `rhs = +∞` (always holds) when the CND slope at `p = 0` is zero.
pub fn dgldpc_stability_check(ens: &ValidatedEnsemble, q: f64) -> StabilityCheck {
    let lhs = vnd_bracket(ens, q);
    let bracket = cnd_bracket(ens);
    let rhs = if bracket == 0.0 { f64::INFINITY } else { 1.0 / bracket };
    StabilityCheck {
        holds: lhs <= rhs + INEQUALITY_SLACK,
        lhs: F17(lhs),
        rhs: F17(rhs),
        margin: F17(rhs - lhs),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityBoundary {
    /// Sorted `q ∈ [0, 1]` where the inequality holds with equality.
    pub roots: Vec<F17>,
    /// The right side is infinite: the inequality never binds.
    pub vacuous: bool,
}

/// All `q ∈ [0, 1]` where the stability inequality is tight, by sign-change
/// scanning and bisection.
pub fn dgldpc_stability_boundary(ens: &ValidatedEnsemble) -> StabilityBoundary {
    let bracket = cnd_bracket(ens);
    if bracket == 0.0 {
        return StabilityBoundary { roots: Vec::new(), vacuous: true };
    }
    let rhs = 1.0 / bracket;
    let f = |q: f64| vnd_bracket(ens, q) - rhs;
    let mut roots: Vec<f64> = Vec::new();
    let push = |r: f64, roots: &mut Vec<f64>| {
        if roots.last().is_none_or(|&last| r - last > BOUNDARY_TOLERANCE) {
            roots.push(r);
        }
    };
    let at = |i: usize| i as f64 / BOUNDARY_GRID as f64;
    let mut prev = f(0.0);
    if prev == 0.0 {
        push(0.0, &mut roots);
    }
    for i in 1..=BOUNDARY_GRID {
        let q = at(i);
        let cur = f(q);
        if cur == 0.0 {
            push(q, &mut roots);
        } else if prev != 0.0 && (prev < 0.0) != (cur < 0.0) {
            let (mut lo, mut hi) = (at(i - 1), q);
            let lo_negative = prev < 0.0;
            while hi - lo > BOUNDARY_TOLERANCE {
                let mid = 0.5 * (lo + hi);
                if (f(mid) < 0.0) == lo_negative {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            push(0.5 * (lo + hi), &mut roots);
        }
        prev = cur;
    }
    StabilityBoundary { roots: f17_vec(&roots), vacuous: false }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivativeMatching {
    pub endpoint_ok: bool,
    /// `∂I_{E,V}/∂p|₀ - dI_{E,C}^{-1}/dp|₀`; `≥ 0` when stable.
    pub slope_gap: F17,
    pub tangent_at_zero: bool,
}

/// Derivative-matching test at `q` with the default tangency tolerance.
pub fn derivative_matching_check(ens: &ValidatedEnsemble, q: f64) -> Result<DerivativeMatching, StabilityError> {
    derivative_matching_check_with(ens, q, TANGENCY_TOLERANCE)
}

/// Derivative-matching test with an explicit tangency tolerance, for `q`
/// that is itself only known approximately.
pub fn derivative_matching_check_with(
    ens: &ValidatedEnsemble,
    q: f64,
    tolerance: f64,
) -> Result<DerivativeMatching, StabilityError> {
    let cnd = cnd_derivative_at_zero(ens);
    if cnd == 0.0 {
        return Err(StabilityError::InverseSlopeUndefined);
    }
    let endpoint_ok = (exit_vnd(ens, 0.0, q) - 1.0).abs() <= INEQUALITY_SLACK
        && (exit_cnd(ens, 0.0) - 1.0).abs() <= INEQUALITY_SLACK;
    let gap = vnd_derivative_at_zero(ens, q) - 1.0 / cnd;
    Ok(DerivativeMatching { endpoint_ok, slope_gap: F17(gap), tangent_at_zero: gap.abs() <= tolerance })
}

/// Everything above that does not depend on `q`.
pub fn stability_report(ens: &ValidatedEnsemble) -> StabilityReport {
    let cnd = cnd_derivative_at_zero(ens);
    let vnd_poly = vnd_slope_polynomial(ens);
    let dmin2_check_terms = ens
        .check_types()
        .iter()
        .enumerate()
        .filter(|(_, t)| t.d_min() == 2)
        .map(|(index, t)| CheckTerm { index, n: t.n(), k: t.k(), term: F17(t.edge_fraction * check_ratio(t)) })
        .collect();
    let dmin2_var_terms = ens
        .variable_types()
        .iter()
        .enumerate()
        .filter(|(_, t)| t.d_min() == 2)
        .map(|(index, t)| {
            let scale = 2.0 * t.edge_fraction / t.n() as f64;
            let by_z = variable_deltas(t).iter().map(|&d| F17(scale * d as f64)).collect();
            VariableTerms { index, n: t.n(), k: t.k(), by_z }
        })
        .collect();
    StabilityReport {
        cnd_slope_at_zero: F17(cnd),
        vnd_slope_fn: f17_vec(&vnd_poly),
        gldpc_bound: gldpc_stability_bound(ens).map(F17),
        dmin2_check_terms,
        dmin2_var_terms,
        applicability: applicability(ens),
        ia_oriented: IaOriented {
            cnd_slope_at_one: F17(0.0 - cnd),
            vnd_slope_fn: vnd_poly.iter().map(|&c| F17(0.0 - c)).collect(),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{Ensemble, NodeType};
    use crate::BinaryMatrix;

    const HAMMING: &str = "1000110\n0100101\n0010011\n0001111";
    const C32: &str = "101\n011";

    fn mat(text: &str) -> BinaryMatrix {
        text.parse().unwrap()
    }

    fn validated(vars: Vec<NodeType>, checks: Vec<NodeType>) -> ValidatedEnsemble {
        Ensemble { variable_nodes: vars, check_nodes: checks }.validate().unwrap()
    }

    fn ldpc(l2: f64, spc: usize) -> ValidatedEnsemble {
        let mut vars = vec![NodeType::repetition(2, l2)];
        if l2 < 1.0 {
            vars.push(NodeType::repetition(3, 1.0 - l2));
        }
        validated(vars, vec![NodeType::spc(spc, 1.0)])
    }

    fn c32_spc6() -> ValidatedEnsemble {
        validated(vec![NodeType::generic(mat(C32), 1.0)], vec![NodeType::spc(6, 1.0)])
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn cnd_slope_examples() {
        assert_eq!(cnd_derivative_at_zero(&ldpc(1.0, 6)), -5.0);
        let ham = validated(vec![NodeType::repetition(2, 1.0)], vec![NodeType::generic(mat(HAMMING), 1.0)]);
        assert_eq!(cnd_derivative_at_zero(&ham), 0.0);
        let spc3 = validated(vec![NodeType::repetition(2, 1.0)], vec![NodeType::generic(mat(C32), 1.0)]);
        assert_eq!(cnd_derivative_at_zero(&spc3), -2.0);
    }

    #[test]
    fn vnd_slope_examples() {
        let ens = validated(vec![NodeType::repetition(2, 1.0)], vec![NodeType::spc(6, 1.0)]);
        assert_eq!(vnd_derivative_at_zero(&ens, 0.37), -0.37);
        let ens = validated(vec![NodeType::generic(mat(HAMMING), 1.0)], vec![NodeType::spc(6, 1.0)]);
        assert_eq!(vnd_derivative_at_zero(&ens, 0.6), 0.0);
        assert!(close(vnd_derivative_at_zero(&c32_spc6(), 0.5), -5.0 / 6.0, 1e-15));
    }

    #[test]
    fn slope_polynomial_matches_bernstein_form() {
        let ens = validated(
            vec![
                NodeType::repetition(2, 0.2),
                NodeType::generic(mat(C32), 0.3),
                NodeType::generic(mat("11101\n01011"), 0.5),
            ],
            vec![NodeType::spc(6, 1.0)],
        );
        let poly = vnd_slope_polynomial(&ens);
        for i in 0..=20 {
            let q = i as f64 / 20.0;
            let horner = poly.iter().rev().fold(0.0, |acc, c| acc * q + c);
            assert!(close(horner, vnd_derivative_at_zero(&ens, q), 1e-13));
        }
        // (3,2) node alone: -(2/3)(2q(1-q) + 3q^2) = -(4/3)q - (2/3)q^2
        let poly = vnd_slope_polynomial(&c32_spc6());
        assert_eq!(poly.len(), 3);
        assert!(close(poly[0], 0.0, 0.0) && close(poly[1], -4.0 / 3.0, 1e-15) && close(poly[2], -2.0 / 3.0, 1e-15));
    }

    #[test]
    fn bound_examples() {
        assert!(close(gldpc_stability_bound(&ldpc(1.0, 6)).unwrap(), 0.2, 1e-15));
        let ham = validated(vec![NodeType::repetition(2, 1.0)], vec![NodeType::generic(mat(HAMMING), 1.0)]);
        assert_eq!(gldpc_stability_bound(&ham), Some(f64::INFINITY));
        let no_l2 = validated(vec![NodeType::repetition(3, 1.0)], vec![NodeType::spc(6, 1.0)]);
        assert_eq!(gldpc_stability_bound(&no_l2), Some(f64::INFINITY));
        assert_eq!(gldpc_stability_bound(&c32_spc6()), None);
        // generalized d_min ≥ 3 variables keep the bound
        let dg = validated(
            vec![NodeType::repetition(2, 0.5), NodeType::generic(mat(HAMMING), 0.5)],
            vec![NodeType::spc(6, 1.0)],
        );
        assert!(close(gldpc_stability_bound(&dg).unwrap(), 0.4, 1e-15));
    }

    #[test]
    fn check_examples() {
        let c = dgldpc_stability_check(&c32_spc6(), 0.1);
        assert!(c.holds);
        assert!(close(c.lhs.0, 0.14, 1e-15));
        assert!(close(c.rhs.0, 0.2, 1e-15));
        assert!(close(c.margin.0, 0.06, 1e-15));
        let c = dgldpc_stability_check(&c32_spc6(), 0.0);
        assert!(c.holds && c.lhs.0 == 0.0);
        // GLDPC: collapses to q <= bound
        let ens = ldpc(0.5, 6);
        let bound = gldpc_stability_bound(&ens).unwrap();
        assert!(dgldpc_stability_check(&ens, bound - 1e-9).holds);
        assert!(!dgldpc_stability_check(&ens, bound + 1e-9).holds);
        let ham = validated(vec![NodeType::repetition(2, 1.0)], vec![NodeType::generic(mat(HAMMING), 1.0)]);
        let c = dgldpc_stability_check(&ham, 1.0);
        assert!(c.holds && c.rhs.0 == f64::INFINITY);
    }

    #[test]
    fn boundary_examples() {
        let b = dgldpc_stability_boundary(&c32_spc6());
        assert!(!b.vacuous);
        assert_eq!(b.roots.len(), 1);
        assert!(close(b.roots[0].0, -1.0 + 1.3f64.sqrt(), 1e-9));

        let ens = ldpc(0.5, 6);
        let b = dgldpc_stability_boundary(&ens);
        assert_eq!(b.roots.len(), 1);
        assert!(close(b.roots[0].0, gldpc_stability_bound(&ens).unwrap(), 1e-9));

        // lhs(1) = λ₂ = 0.1 < rhs = 0.2
        let b = dgldpc_stability_boundary(&ldpc(0.1, 6));
        assert!(b.roots.is_empty() && !b.vacuous);

        let ham = validated(vec![NodeType::repetition(2, 1.0)], vec![NodeType::generic(mat(HAMMING), 1.0)]);
        let b = dgldpc_stability_boundary(&ham);
        assert!(b.roots.is_empty() && b.vacuous);
    }

    #[test]
    fn derivative_matching_examples() {
        let ens = ldpc(1.0, 6);
        let m = derivative_matching_check(&ens, 0.2).unwrap();
        assert!(m.endpoint_ok && m.tangent_at_zero);
        let m = derivative_matching_check(&ens, 0.1).unwrap();
        assert!(m.endpoint_ok && !m.tangent_at_zero && m.slope_gap.0 > 0.0);
        let ham = validated(vec![NodeType::repetition(2, 1.0)], vec![NodeType::generic(mat(HAMMING), 1.0)]);
        assert_eq!(derivative_matching_check(&ham, 0.3), Err(StabilityError::InverseSlopeUndefined));
    }

    #[test]
    fn report_json_layout() {
        let r = stability_report(&ldpc(1.0, 6));
        let json = serde_json::to_string(&r).unwrap();
        assert_eq!(
            json,
            r#"{"cnd_slope_at_zero":-5,"vnd_slope_fn":[0,-1],"gldpc_bound":0.20000000000000001,"dmin2_check_terms":[{"index":0,"n":6,"k":5,"term":5}],"dmin2_var_terms":[{"index":0,"n":2,"k":1,"by_z":[0,1]}],"applicability":{"is_gldpc":true,"all_var_dmin_ge3":true,"all_chk_dmin_ge3":true},"ia_oriented":{"cnd_slope_at_one":5,"vnd_slope_fn":[0,1]}}"#
        );
        let r = stability_report(&c32_spc6());
        assert_eq!(r.gldpc_bound, None);
        assert!(!r.applicability.is_gldpc && !r.applicability.all_var_dmin_ge3);
        let ham = validated(vec![NodeType::repetition(2, 1.0)], vec![NodeType::generic(mat(HAMMING), 1.0)]);
        let json = serde_json::to_string(&stability_report(&ham)).unwrap();
        assert!(json.contains(r#""gldpc_bound":"inf""#));
        assert!(json.contains(r#""dmin2_check_terms":[]"#));
    }
}
