//! Closed-form upper bounds on the expected optimization time under prior
//! noise, and the feasibility region in which they apply.
//!
//! Two bounds are exposed, tagged with the same selector the CLI uses.
//! Bound 1 covers one-bit mutation under one-bit noise of rate `q` and holds
//! for every `q < 1`. Bound 2 covers standard bit mutation (rate `chi/n`)
//! under bitwise noise (rate `q/n`) and only applies when the noise is weak
//! enough relative to the mutation strength; [`max_q_for_chi`] computes that
//! frontier by bisection.

use serde::Serialize;

use crate::num::Real;
use crate::{Error, Result};

/// Evaluation of one of the closed-form bounds at a concrete parameter set.
///
/// Fields that only exist for the bitwise bound (`chi`, `r`, the condition
/// sides, `max_c`) are `None` on one-bit reports.
#[derive(Clone, Debug, Serialize)]
pub struct BoundReport<R: Real> {
    /// Selector for the bound that was evaluated: 1 = one-bit noise,
    /// 2 = bitwise noise.
    pub theorem: u8,
    pub n: u64,
    pub q: R,
    pub chi: Option<R>,
    /// Combined per-position flip rate `chi + q - 2*chi*q/n` at this `n`.
    pub r: Option<R>,
    /// Left side of the applicability condition, evaluated in the large-n
    /// limit (`r = chi + q`), which is how the feasibility region is defined.
    pub condition_lhs: Option<R>,
    /// Right side `(1 - c) * exp(-(chi + q))` at the `c` the bound was
    /// evaluated at.
    pub condition_rhs_at_c: Option<R>,
    /// Largest admissible constant, `1 - condition_lhs * exp(chi + q)`;
    /// absent when that quantity is not positive.
    pub max_c: Option<R>,
    pub feasible: bool,
    /// The guaranteed iteration count, absent when infeasible.
    pub bound_iterations: Option<R>,
    pub caveats: Vec<String>,
}

fn check_n(n: u64) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    Ok(())
}

fn check_chi<R: Real>(chi: R) -> Result<()> {
    if !(chi.is_finite() && chi > R::zero()) {
        return Err(Error::invalid(format!("chi must be positive and finite, got {chi}")));
    }
    Ok(())
}

fn check_q<R: Real>(q: R) -> Result<()> {
    if !(q.is_finite() && q >= R::zero()) {
        return Err(Error::invalid(format!("q must be non-negative and finite, got {q}")));
    }
    Ok(())
}

/// Upper bound on the expected iterations of one-bit mutation under one-bit
/// noise of rate `q`: `(1+q) n^2 / (1-q)^2 + 3q / (2(1-q))`.
///
/// The bound degenerates as `q` approaches 1; `q >= 1` is reported as
/// [`Error::Infeasible`].
pub fn bound_one_bit<R: Real>(n: u64, q: R) -> Result<R> {
    check_n(n)?;
    check_q(q)?;
    if q >= R::one() {
        return Err(Error::Infeasible(format!("the one-bit bound requires q < 1, got q = {q}")));
    }
    let nf = R::of(n as f64);
    let gap = R::one() - q;
    Ok((R::one() + q) * nf * nf / (gap * gap) + R::of(1.5) * q / gap)
}

/// Report form of [`bound_one_bit`]. Infeasibility (`q >= 1`) becomes a
/// report state instead of an error so the caller can still inspect it.
pub fn bound_one_bit_report<R: Real>(n: u64, q: R) -> Result<BoundReport<R>> {
    check_n(n)?;
    check_q(q)?;
    let feasible = q < R::one();
    let bound = if feasible { Some(bound_one_bit(n, q)?) } else { None };
    Ok(BoundReport {
        theorem: 1,
        n,
        q,
        chi: None,
        r: None,
        condition_lhs: None,
        condition_rhs_at_c: None,
        max_c: None,
        feasible,
        bound_iterations: bound,
        caveats: Vec::new(),
    })
}

/// Left side of the bitwise bound's applicability condition,
/// `-ln(1 - q/r) / ln(r/q)` with `r = chi + q - 2*chi*q/n`.
///
/// Passing `n = None` evaluates the large-n limit `r = chi + q`. The value
/// at `q = 0` is the limit 0. For finite `n` with `q >= n/2` the combined
/// rate `r` does not exceed `q` and the expression is undefined; this is
/// reported as [`Error::Infeasible`] since no constant can satisfy the
/// condition there.
pub fn condition_lhs<R: Real>(chi: R, q: R, n: Option<u64>) -> Result<R> {
    check_chi(chi)?;
    check_q(q)?;
    if let Some(n) = n {
        check_n(n)?;
    }
    if q == R::zero() {
        return Ok(R::zero());
    }
    let r = match n {
        Some(n) => chi + q - R::of(2.0) * chi * q / R::of(n as f64),
        None => chi + q,
    };
    if r <= q {
        return Err(Error::Infeasible(format!(
            "combined flip rate r = {r} does not exceed the noise rate q = {q}"
        )));
    }
    Ok(-(R::one() - q / r).ln() / (r / q).ln())
}

fn bitwise_report<R: Real>(n: u64, chi: R, q: R, c: Option<R>) -> Result<BoundReport<R>> {
    check_n(n)?;
    check_chi(chi)?;
    check_q(q)?;
    let nf = R::of(n as f64);
    if chi > nf {
        return Err(Error::invalid("chi/n is a probability, so chi must not exceed n"));
    }
    if q > nf {
        return Err(Error::invalid("q/n is a probability, so q must not exceed n"));
    }

    let lhs = condition_lhs(chi, q, None)?;
    let growth = (chi + q).exp();
    let max_c = R::one() - lhs * growth;
    let feasible = max_c > R::zero();

    let eval_c = match c {
        Some(c) => {
            if !(c.is_finite() && c > R::zero() && c <= R::one()) {
                return Err(Error::invalid("c must lie in (0, 1]"));
            }
            if c > max_c {
                return Err(Error::Infeasible(format!(
                    "the condition fails at c = {c}; the largest admissible constant is {max_c}"
                )));
            }
            Some(c)
        }
        None => feasible.then_some(max_c),
    };

    let per_level = growth / chi;
    let bound = eval_c.map(|c| nf * nf / c * (per_level + q * per_level * per_level));
    let mut caveats = Vec::new();
    if bound.is_some() {
        caveats.push(
            "the iteration bound omits an additive term linear in n with an unquantified constant"
                .to_string(),
        );
    }

    Ok(BoundReport {
        theorem: 2,
        n,
        q,
        chi: Some(chi),
        r: Some(chi + q - R::of(2.0) * chi * q / nf),
        condition_lhs: Some(lhs),
        condition_rhs_at_c: eval_c.map(|c| (R::one() - c) * (-(chi + q)).exp()),
        max_c: if max_c > R::zero() { Some(max_c) } else { None },
        feasible,
        bound_iterations: bound,
        caveats,
    })
}

/// Bound for standard bit mutation under bitwise noise, evaluated at the
/// largest admissible constant: `n^2/c * (e^{chi+q}/chi + q (e^{chi+q}/chi)^2)`
/// with `c = max_c`. Infeasibility is a report state, not an error.
pub fn bound_bitwise<R: Real>(n: u64, chi: R, q: R) -> Result<BoundReport<R>> {
    bitwise_report(n, chi, q, None)
}

/// Same bound evaluated at a caller-chosen constant `c` in (0, 1]. Errors
/// with [`Error::Infeasible`] when the condition does not hold at that `c`.
pub fn bound_bitwise_at_c<R: Real>(n: u64, chi: R, q: R, c: R) -> Result<BoundReport<R>> {
    bitwise_report(n, chi, q, Some(c))
}

/// The feasibility frontier of the bitwise bound at a given mutation
/// strength.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct FrontierReport<R: Real> {
    pub chi: R,
    /// Largest noise rate (to within the requested tolerance) at which the
    /// applicability condition still holds strictly in the large-n limit;
    /// 0 when no positive rate qualifies.
    pub max_q: R,
    pub feasible: bool,
}

/// Bisects for the largest `q` with `condition_lhs(chi, q, inf) < e^{-(chi+q)}`.
///
/// The left side vanishes as `q -> 0` and reaches 1 at `q = chi` while the
/// right side stays below 1, so the crossing is unique and lies in
/// `(0, chi)`. Strict inequality is required so that some constant
/// `c` in (0, 1) remains available.
pub fn max_q_for_chi<R: Real>(chi: R, tol: R) -> Result<FrontierReport<R>> {
    check_chi(chi)?;
    if !(tol.is_finite() && tol > R::zero() && tol < chi) {
        return Err(Error::invalid("tol must be positive and smaller than chi"));
    }
    // Only an underflowing right side can make the low-q end infeasible.
    if (-chi).exp() <= R::zero() {
        return Ok(FrontierReport { chi, max_q: R::zero(), feasible: false });
    }
    let strictly_feasible = |q: R| match condition_lhs(chi, q, None) {
        Ok(lhs) => lhs < (-(chi + q)).exp(),
        Err(_) => false,
    };
    let mut lo = R::zero();
    let mut hi = chi;
    while hi - lo > tol {
        let mid = (lo + hi) / R::of(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        if strictly_feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(FrontierReport { chi, max_q: lo, feasible: lo > R::zero() })
}
