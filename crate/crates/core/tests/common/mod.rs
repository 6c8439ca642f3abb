//! Independent reference computations shared by the integration tests.
//!
//! Everything here is deliberately implemented on a different path than the
//! library: the noiseless runtime comes from a fitness-level recurrence
//! instead of the state chain, the joint-flip probability from counting
//! mask pairs instead of the closed form, and the t-tail from quadrature
//! instead of the incomplete beta function.

#![allow(dead_code)]

/// Expected iterations of one-bit mutation on LeadingOnes without noise,
/// from a uniform start, by dynamic programming over fitness levels.
///
/// Acceptance never depends on the suffix bits (flips behind the leading
/// zero keep the fitness, flips inside the prefix lower it), so the suffix
/// stays uniformly distributed and each improvement lands on fitness
/// `v + 1 + L` with `P(L = l) = 2^-(l+1)` (all-ones suffix gets the
/// leftover mass). Waiting time for the improving flip is `n`.
pub fn noiseless_one_bit_expected_runtime(n: usize) -> f64 {
    assert!(n >= 1);
    let mut level = vec![0.0f64; n + 1];
    for v in (0..n).rev() {
        let mut onward = 0.0;
        for l in 0..(n - v) {
            let p = if v + 1 + l == n {
                0.5f64.powi((n - v - 1) as i32)
            } else {
                0.5f64.powi((l + 1) as i32)
            };
            onward += p * level[v + 1 + l];
        }
        level[v] = n as f64 + onward;
    }
    (0..n).map(|v| 0.5f64.powi((v + 1) as i32) * level[v]).sum()
}

/// Signed mask-pair counts for the joint-flip probability at one `(n, i)`,
/// indexed by (mutation popcount, noise popcount). Counting is separated
/// from evaluation so one enumeration serves a whole parameter grid.
pub struct JointFlipCounts {
    n: usize,
    signed: Vec<i64>,
}

/// Enumerates all `2^n * 2^n` (mutation mask, noise mask) pairs and counts,
/// with sign, the two events whose difference the closed form expresses:
/// +1 when every position of `S` is flipped by exactly one of the masks and
/// no position outside `S` by either, -1 when the noise mask is exactly `S`
/// and the mutation mask stays within `S`. By symmetry only the size of `S`
/// matters, so the first `i` positions stand in for any `i`-subset.
pub fn count_joint_flip_masks(n: usize, i: usize) -> JointFlipCounts {
    assert!(n <= 16 && (1..=n).contains(&i));
    let full: u64 = (1 << n) - 1;
    let s: u64 = (1 << i) - 1;
    let outside = full & !s;
    let mut signed = vec![0i64; (n + 1) * (n + 1)];
    for m in 0..=full {
        for w in 0..=full {
            let cell = (m.count_ones() as usize) * (n + 1) + w.count_ones() as usize;
            if ((m ^ w) & s) == s && ((m | w) & outside) == 0 {
                signed[cell] += 1;
            }
            if w == s && (m & outside) == 0 {
                signed[cell] -= 1;
            }
        }
    }
    JointFlipCounts { n, signed }
}

impl JointFlipCounts {
    /// Weights the counts with the mask probabilities at rates `chi/n` and
    /// `q/n`.
    pub fn evaluate(&self, chi: f64, q: f64) -> f64 {
        let n = self.n;
        let pm = chi / n as f64;
        let pw = q / n as f64;
        let pow_table = |p: f64| -> Vec<f64> {
            (0..=n).map(|k| p.powi(k as i32) * (1.0 - p).powi((n - k) as i32)).collect()
        };
        let wm = pow_table(pm);
        let ww = pow_table(pw);
        let mut total = 0.0;
        for (a, &weight_m) in wm.iter().enumerate() {
            for (b, &weight_w) in ww.iter().enumerate() {
                let c = self.signed[a * (n + 1) + b];
                if c != 0 {
                    total += c as f64 * weight_m * weight_w;
                }
            }
        }
        total
    }
}

/// Convenience wrapper enumerating and evaluating in one call.
pub fn joint_flip_enumeration(n: usize, chi: f64, q: f64, i: usize) -> f64 {
    count_joint_flip_masks(n, i).evaluate(chi, q)
}

/// Two-sided Student-t p-value by adaptive quadrature on the unnormalized
/// density `(1 + x^2/df)^(-(df+1)/2)`:
/// `p = integral over [|t|, inf) / integral over [0, inf)`.
///
/// The half lines are mapped to [0, 1) with `x = base + u/(1-u)`. No gamma
/// or beta function appears anywhere, so this path shares nothing with the
/// library's evaluation.
pub fn t_two_sided_p_quadrature(t: f64, df: f64) -> f64 {
    assert!(df > 1.0, "the transformed integrand needs a vanishing endpoint");
    let tail = t_half_line_integral(t.abs(), df);
    let total = t_half_line_integral(0.0, df);
    tail / total
}

fn t_half_line_integral(base: f64, df: f64) -> f64 {
    let f = |u: f64| {
        if u >= 1.0 {
            return 0.0;
        }
        let rest = 1.0 - u;
        let x = base + u / rest;
        (1.0 + x * x / df).powf(-(df + 1.0) / 2.0) / (rest * rest)
    };
    adaptive_simpson(&f, 0.0, 1.0, 1e-13)
}

fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_refine(f, a, m, b, fa, fm, fb, whole, tol, 60)
}

#[allow(clippy::too_many_arguments)]
fn simpson_refine<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    m: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_refine(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + simpson_refine(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}
