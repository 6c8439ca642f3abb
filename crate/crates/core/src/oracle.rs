//! Exact expected runtimes for small problem sizes.
//!
//! The algorithm under the ignore policy is a Markov chain on pairs
//! `(parent, stored fitness)` with the single absorbing state
//! `(all-ones, n)`. For `n <= MAX_EXACT_N` this module assembles the chain
//! from the exact mutation kernel and the exact noisy-fitness distribution,
//! restricts it to the states reachable from initialization, and solves the
//! dense hitting-time system. The result is an exact (up to linear-algebra
//! round-off) expected runtime that simulations can be validated against.

use std::collections::BTreeMap;

use crate::bitcore::{BitString, MutationOp, NoiseModel};
use crate::ea::EvaluationPolicy;
use crate::linalg::solve_dense;
use crate::{Error, Result};

/// Largest problem size for which the chain is assembled exactly
/// (`2^n * (n + 1)` states; 2304 at the cap).
pub const MAX_EXACT_N: usize = 8;

/// Residual bound the hitting-time solve must meet.
pub const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct ChainSpec {
    pub n: usize,
    pub mutation: MutationOp,
    pub noise: NoiseModel,
    pub policy: EvaluationPolicy,
}

#[derive(Clone, Debug)]
pub struct HittingTimeSolution {
    /// Expected iterations from a uniform initial parent, counting a run
    /// that starts absorbed as zero.
    pub expected_runtime: f64,
    /// Infinity norm of `(I - Q) t - 1` over the transient states.
    pub residual_norm: f64,
    /// Expected iterations from each reachable state, keyed by the parent
    /// bits (bit `i` of the key is position `i`) and the stored fitness.
    /// The absorbing state maps to zero; unreachable states are absent.
    pub per_state_times: BTreeMap<(u64, u32), f64>,
}

fn leading_ones_word(y: u64, n: usize) -> usize {
    (y.trailing_ones() as usize).min(n)
}

/// Exact distribution of the noisy fitness of `y` as a vector indexed by
/// fitness value `0..=n`.
pub fn noisy_fitness_distribution(y: &BitString, noise: &NoiseModel) -> Result<Vec<f64>> {
    let n = y.len();
    if n == 0 || n > 64 {
        return Err(Error::invalid("distributions need 1 <= n <= 64"));
    }
    noise.validate(n)?;
    Ok(word_noisy_distribution(y.to_word(), n, noise))
}

fn word_noisy_distribution(y: u64, n: usize, noise: &NoiseModel) -> Vec<f64> {
    let mut dist = vec![0.0; n + 1];
    match *noise {
        NoiseModel::None => dist[leading_ones_word(y, n)] = 1.0,
        NoiseModel::OneBit { q } => {
            dist[leading_ones_word(y, n)] += 1.0 - q;
            for k in 0..n {
                dist[leading_ones_word(y ^ (1u64 << k), n)] += q / n as f64;
            }
        }
        NoiseModel::Bitwise { q } => {
            // P(observed = v) = prod_{i < v} p_i * (1 - p_v), where p_i is
            // the probability that position i reads as a one.
            let p = q / n as f64;
            let mut run = 1.0;
            for (v, slot) in dist.iter_mut().take(n).enumerate() {
                let p_one = if (y >> v) & 1 == 1 { 1.0 - p } else { p };
                *slot += run * (1.0 - p_one);
                run *= p_one;
            }
            dist[n] += run;
        }
    }
    dist
}

/// Exact offspring distribution of `op` applied to `x`, as pairs of
/// offspring and probability. Standard mutation enumerates all `2^n` masks
/// and is capped at [`MAX_EXACT_N`].
pub fn mutation_kernel(x: &BitString, op: &MutationOp) -> Result<Vec<(BitString, f64)>> {
    let n = x.len();
    if n == 0 || n > 64 {
        return Err(Error::invalid("kernels need 1 <= n <= 64"));
    }
    op.validate(n)?;
    if matches!(op, MutationOp::Standard { .. }) && n > MAX_EXACT_N {
        return Err(Error::Capacity { n, cap: MAX_EXACT_N });
    }
    Ok(word_mutation_kernel(x.to_word(), n, op)
        .into_iter()
        .map(|(y, p)| (BitString::from_word(y, n), p))
        .collect())
}

fn word_mutation_kernel(x: u64, n: usize, op: &MutationOp) -> Vec<(u64, f64)> {
    match *op {
        MutationOp::OneBit => (0..n).map(|k| (x ^ (1u64 << k), 1.0 / n as f64)).collect(),
        MutationOp::Standard { chi } => {
            let p = chi / n as f64;
            let mut weight = vec![0.0; n + 1];
            for (k, w) in weight.iter_mut().enumerate() {
                *w = p.powi(k as i32) * (1.0 - p).powi((n - k) as i32);
            }
            (0..1u64 << n)
                .map(|mask| (x ^ mask, weight[mask.count_ones() as usize]))
                .collect()
        }
    }
}

/// Exact probability difference for one mutation/noise mask pair and a fixed
/// set `S` of `i` positions: the probability that each position of `S` is
/// flipped by exactly one of standard mutation (rate `chi/n`) and bitwise
/// noise (rate `q/n`) while no position outside `S` is flipped by either,
/// minus the probability that the noise mask is exactly `S` while the
/// mutation mask stays inside `S`. In closed form this is
/// `((r/n)^i - (q/n)^i) * (1 - (chi+q)/n + chi*q/n^2)^(n-i)` with
/// `r = chi + q - 2*chi*q/n`.
pub fn joint_flip_probability(n: usize, chi: f64, q: f64, i: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    MutationOp::Standard { chi }.validate(n)?;
    NoiseModel::Bitwise { q }.validate(n)?;
    if i == 0 || i > n {
        return Err(Error::invalid(format!("need 1 <= i <= n, got i = {i}")));
    }
    let nf = n as f64;
    let r = chi + q - 2.0 * chi * q / nf;
    let inside = (r / nf).powi(i as i32) - (q / nf).powi(i as i32);
    let outside = (1.0 - (chi + q) / nf + chi * q / (nf * nf)).powi((n - i) as i32);
    Ok(inside * outside)
}

/// Solves the exact hitting-time system for `spec`.
pub fn exact_expected_runtime(spec: &ChainSpec) -> Result<HittingTimeSolution> {
    let n = spec.n;
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    if n > MAX_EXACT_N {
        return Err(Error::Capacity { n, cap: MAX_EXACT_N });
    }
    if spec.policy != EvaluationPolicy::Ignore {
        return Err(Error::invalid(
            "exact runtimes are computed for the ignore policy only",
        ));
    }
    spec.mutation.validate(n)?;
    spec.noise.validate(n)?;

    let size = 1usize << n;
    let absorbing = (size - 1, n);
    let dists: Vec<Vec<f64>> =
        (0..size).map(|y| word_noisy_distribution(y as u64, n, &spec.noise)).collect();
    let kernels: Vec<Vec<(u64, f64)>> =
        (0..size).map(|x| word_mutation_kernel(x as u64, n, &spec.mutation)).collect();

    // Initialization: uniform parent, one noisy evaluation.
    let uniform = 1.0 / size as f64;
    let mut initial: Vec<((usize, usize), f64)> = Vec::new();
    for (x, dist) in dists.iter().enumerate() {
        for (v, &pd) in dist.iter().enumerate() {
            if pd > 0.0 {
                initial.push(((x, v), uniform * pd));
            }
        }
    }

    // States reachable from initialization. Acceptance moves to (y, v') with
    // v' >= v; everything else stays put.
    let id = |x: usize, v: usize| x * (n + 1) + v;
    let mut seen = vec![false; size * (n + 1)];
    let mut queue: Vec<(usize, usize)> = Vec::new();
    for &((x, v), _) in &initial {
        if !seen[id(x, v)] {
            seen[id(x, v)] = true;
            queue.push((x, v));
        }
    }
    while let Some((x, v)) = queue.pop() {
        if (x, v) == absorbing {
            continue;
        }
        for &(y, _) in &kernels[x] {
            let y = y as usize;
            for v2 in v..=n {
                if dists[y][v2] > 0.0 && !seen[id(y, v2)] {
                    seen[id(y, v2)] = true;
                    queue.push((y, v2));
                }
            }
        }
    }

    let transient: Vec<(usize, usize)> = (0..size)
        .flat_map(|x| (0..=n).map(move |v| (x, v)))
        .filter(|&s| seen[id(s.0, s.1)] && s != absorbing)
        .collect();
    let m = transient.len();
    let mut column: Vec<usize> = vec![usize::MAX; size * (n + 1)];
    for (c, &(x, v)) in transient.iter().enumerate() {
        column[id(x, v)] = c;
    }

    // Row `s` of P, restricted to transient columns, written into I - Q.
    let mut matrix = vec![0.0f64; m * m];
    let fill_row = |row: &mut [f64], x: usize, v: usize| {
        let mut stay = 0.0;
        for &(y, pm) in &kernels[x] {
            let y = y as usize;
            let dy = &dists[y];
            for (v2, &pd) in dy.iter().enumerate() {
                if pd == 0.0 {
                    continue;
                }
                if v2 >= v {
                    if (y, v2) != absorbing {
                        row[column[id(y, v2)]] += pm * pd;
                    }
                } else {
                    stay += pm * pd;
                }
            }
        }
        row[column[id(x, v)]] += stay;
    };
    for (r, &(x, v)) in transient.iter().enumerate() {
        let row = &mut matrix[r * m..(r + 1) * m];
        fill_row(row, x, v);
        for entry in row.iter_mut() {
            *entry = -*entry;
        }
        row[r] += 1.0;
    }

    let times = solve_dense(matrix, m, vec![1.0; m])?;

    // Residual of the original system, recomputed from the transitions so it
    // does not depend on the factorization.
    let mut residual: f64 = 0.0;
    let mut row = vec![0.0f64; m];
    for (r, &(x, v)) in transient.iter().enumerate() {
        row.iter_mut().for_each(|e| *e = 0.0);
        fill_row(&mut row, x, v);
        let mut acc = times[r] - 1.0;
        for (c, &p) in row.iter().enumerate() {
            acc -= p * times[c];
        }
        residual = residual.max(acc.abs());
    }
    // Written so that a NaN residual also fails the gate.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(residual <= RESIDUAL_TOL) {
        return Err(Error::SingularSystem(format!(
            "hitting-time residual {residual:e} exceeds {RESIDUAL_TOL:e}"
        )));
    }

    let mut per_state_times = BTreeMap::new();
    per_state_times.insert((absorbing.0 as u64, absorbing.1 as u32), 0.0);
    for (r, &(x, v)) in transient.iter().enumerate() {
        per_state_times.insert((x as u64, v as u32), times[r]);
    }

    let mut expected = 0.0;
    for &((x, v), p) in &initial {
        if (x, v) != absorbing {
            expected += p * times[column[id(x, v)]];
        }
    }

    Ok(HittingTimeSolution {
        expected_runtime: expected,
        residual_norm: residual,
        per_state_times,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sums_to_one(dist: &[f64]) -> bool {
        (dist.iter().sum::<f64>() - 1.0).abs() < 1e-12
    }

    #[test]
    fn noisy_distributions_are_probability_vectors() {
        let n = 6;
        for y in 0..(1u64 << n) {
            let s = BitString::from_word(y, n);
            for noise in [
                NoiseModel::None,
                NoiseModel::OneBit { q: 0.3 },
                NoiseModel::OneBit { q: 1.0 },
                NoiseModel::Bitwise { q: 0.5 },
                NoiseModel::Bitwise { q: 6.0 },
            ] {
                let d = noisy_fitness_distribution(&s, &noise).unwrap();
                assert!(sums_to_one(&d), "y={y:06b} {noise:?}");
                assert!(d.iter().all(|&p| (0.0..=1.0).contains(&p)));
            }
        }
    }

    #[test]
    fn bitwise_distribution_matches_the_half_rate_hand_value() {
        // All-ones string of length 3 with per-bit flip rate 1/2 reads each
        // prefix with the probabilities (1/2, 1/4, 1/8, 1/8).
        let y = BitString::ones(3);
        let d = noisy_fitness_distribution(&y, &NoiseModel::Bitwise { q: 1.5 }).unwrap();
        assert_relative_eq!(d[0], 0.5, max_relative = 1e-15);
        assert_relative_eq!(d[1], 0.25, max_relative = 1e-15);
        assert_relative_eq!(d[2], 0.125, max_relative = 1e-15);
        assert_relative_eq!(d[3], 0.125, max_relative = 1e-15);
    }

    #[test]
    fn one_bit_distribution_enumerates_single_flips() {
        // y = 110 (leading ones 2), q = 0.3: flips of position 0, 1, 2 read
        // 0, 1, 3; no flip reads 2.
        let y: BitString = "110".parse().unwrap();
        let d = noisy_fitness_distribution(&y, &NoiseModel::OneBit { q: 0.3 }).unwrap();
        assert_relative_eq!(d[0], 0.1, max_relative = 1e-12);
        assert_relative_eq!(d[1], 0.1, max_relative = 1e-12);
        assert_relative_eq!(d[2], 0.7, max_relative = 1e-12);
        assert_relative_eq!(d[3], 0.1, max_relative = 1e-12);
    }

    #[test]
    fn mutation_kernels_are_probability_vectors() {
        let x: BitString = "10110".parse().unwrap();
        for op in [MutationOp::OneBit, MutationOp::Standard { chi: 1.4 }] {
            let k = mutation_kernel(&x, &op).unwrap();
            let total: f64 = k.iter().map(|(_, p)| p).sum();
            assert!((total - 1.0).abs() < 1e-12, "{op:?}");
        }
    }

    #[test]
    fn standard_kernel_no_change_mass_is_the_closed_form() {
        let x = BitString::zeros(4);
        let k = mutation_kernel(&x, &MutationOp::Standard { chi: 1.0 }).unwrap();
        let stay: f64 = k.iter().filter(|(y, _)| *y == x).map(|(_, p)| p).sum();
        assert_relative_eq!(stay, 81.0 / 256.0, max_relative = 1e-15);
    }

    #[test]
    fn joint_flip_probability_matches_the_hand_value() {
        // chi = 1, q = 0.5, n = 4, i = 1: r = 1.25, giving
        // (0.75 / 4) * 0.65625^3.
        let v = joint_flip_probability(4, 1.0, 0.5, 1).unwrap();
        assert_relative_eq!(v, 0.05299186706542969, max_relative = 1e-15);
    }

    #[test]
    fn joint_flip_probability_with_every_position_in_the_set() {
        let (n, chi, q) = (6, 1.4, 0.9);
        let nf = n as f64;
        let r = chi + q - 2.0 * chi * q / nf;
        let expect = (r / nf).powi(n as i32) - (q / nf).powi(n as i32);
        assert_relative_eq!(
            joint_flip_probability(n, chi, q, n).unwrap(),
            expect,
            max_relative = 1e-15
        );
    }

    #[test]
    fn joint_flip_probability_rejects_bad_inputs() {
        assert!(joint_flip_probability(4, 1.0, 0.5, 0).is_err());
        assert!(joint_flip_probability(4, 1.0, 0.5, 5).is_err());
        assert!(joint_flip_probability(4, 0.0, 0.5, 1).is_err());
        assert!(joint_flip_probability(4, 1.0, 4.5, 1).is_err());
    }

    #[test]
    fn noiseless_expected_runtimes_match_hand_derived_values() {
        // One-bit mutation without noise: levels are left at rate 1/n and
        // the uniform suffix halves, giving n^2 / 2 from a uniform start.
        for n in 1..=5usize {
            let sol = exact_expected_runtime(&ChainSpec {
                n,
                mutation: MutationOp::OneBit,
                noise: NoiseModel::None,
                policy: EvaluationPolicy::Ignore,
            })
            .unwrap();
            assert_relative_eq!(
                sol.expected_runtime,
                (n * n) as f64 / 2.0,
                max_relative = 1e-10
            );
            assert!(sol.residual_norm <= RESIDUAL_TOL);
        }
    }

    #[test]
    fn per_state_times_cover_the_absorbing_state_with_zero() {
        let sol = exact_expected_runtime(&ChainSpec {
            n: 3,
            mutation: MutationOp::OneBit,
            noise: NoiseModel::OneBit { q: 0.2 },
            policy: EvaluationPolicy::Ignore,
        })
        .unwrap();
        assert_eq!(sol.per_state_times.get(&(0b111, 3)), Some(&0.0));
        assert!(sol.per_state_times.values().all(|&t| t >= 0.0));
    }

    #[test]
    fn noise_makes_the_chain_slower_at_small_sizes() {
        let runtime = |q| {
            exact_expected_runtime(&ChainSpec {
                n: 4,
                mutation: MutationOp::OneBit,
                noise: NoiseModel::OneBit { q },
                policy: EvaluationPolicy::Ignore,
            })
            .unwrap()
            .expected_runtime
        };
        let (r0, r2, r5) = (runtime(0.0), runtime(0.2), runtime(0.5));
        assert_relative_eq!(r0, 8.0, max_relative = 1e-10);
        assert!(r0 < r2 && r2 < r5, "{r0} {r2} {r5}");
    }

    #[test]
    fn caps_and_policy_preconditions_are_enforced() {
        let base = ChainSpec {
            n: 9,
            mutation: MutationOp::OneBit,
            noise: NoiseModel::None,
            policy: EvaluationPolicy::Ignore,
        };
        assert!(matches!(
            exact_expected_runtime(&base),
            Err(Error::Capacity { n: 9, cap: MAX_EXACT_N })
        ));
        let reeval = ChainSpec {
            n: 4,
            policy: EvaluationPolicy::Reevaluate,
            ..base
        };
        assert!(exact_expected_runtime(&reeval).is_err());
        let big = BitString::zeros(MAX_EXACT_N + 1);
        assert!(mutation_kernel(&big, &MutationOp::Standard { chi: 1.0 }).is_err());
        assert!(mutation_kernel(&big, &MutationOp::OneBit).is_ok());
    }
}
