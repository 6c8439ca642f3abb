//! Bit-level core: packed bit strings, the LeadingOnes fitness, mutation
//! operators, noise models that corrupt strings before evaluation, and the
//! seedable random stream everything draws from.
//!
//! Draw-order contract (what makes trials reproducible): within one EA
//! iteration, mutation draws precede noise draws, and any operator that
//! touches several bits visits positions in ascending order. Noise models
//! consume fresh draws on every evaluation; the `None` model consumes none.

mod bitstring;
mod rng;
mod sampler;

pub use bitstring::BitString;
pub use rng::{derive_seed, RngStream};
pub(crate) use sampler::SubsetSampler;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Noise applied to a string before each fitness evaluation. The evaluated
/// value is `LeadingOnes(noisy copy)`; the string itself is never changed.
#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NoiseModel {
    /// Noise-free evaluation.
    None,
    /// With probability `q`, exactly one uniformly chosen bit reads flipped.
    OneBit { q: f64 },
    /// Every bit reads flipped independently with probability `q / n`.
    Bitwise { q: f64 },
}

impl NoiseModel {
    /// Checks the parameter range for strings of length `n`:
    /// `0 <= q <= 1` for one-bit noise, `0 <= q <= n` for bitwise noise.
    pub fn validate(&self, n: usize) -> Result<()> {
        match *self {
            NoiseModel::None => Ok(()),
            NoiseModel::OneBit { q } => {
                if q.is_finite() && (0.0..=1.0).contains(&q) {
                    Ok(())
                } else {
                    Err(Error::invalid(format!(
                        "one-bit noise needs 0 <= q <= 1, got q = {q}"
                    )))
                }
            }
            NoiseModel::Bitwise { q } => {
                if q.is_finite() && q >= 0.0 && q <= n as f64 {
                    Ok(())
                } else {
                    Err(Error::invalid(format!(
                        "bitwise noise needs 0 <= q <= n = {n}, got q = {q}"
                    )))
                }
            }
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            NoiseModel::None => "none",
            NoiseModel::OneBit { .. } => "one-bit",
            NoiseModel::Bitwise { .. } => "bitwise",
        }
    }

    pub fn q(&self) -> f64 {
        match *self {
            NoiseModel::None => 0.0,
            NoiseModel::OneBit { q } | NoiseModel::Bitwise { q } => q,
        }
    }
}

/// Offspring-generating mutation.
#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MutationOp {
    /// Flips exactly one uniformly chosen bit.
    OneBit,
    /// Flips every bit independently with probability `chi / n`.
    Standard { chi: f64 },
}

impl MutationOp {
    /// Checks the parameter range for strings of length `n`:
    /// `0 < chi <= n` for standard bit mutation.
    pub fn validate(&self, n: usize) -> Result<()> {
        match *self {
            MutationOp::OneBit => Ok(()),
            MutationOp::Standard { chi } => {
                if chi.is_finite() && chi > 0.0 && chi <= n as f64 {
                    Ok(())
                } else {
                    Err(Error::invalid(format!(
                        "standard mutation needs 0 < chi <= n = {n}, got chi = {chi}"
                    )))
                }
            }
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            MutationOp::OneBit => "one-bit",
            MutationOp::Standard { .. } => "standard",
        }
    }
}

/// Applies `op` to `y` in place. `y` is the parent copy to be turned into
/// the offspring; flips happen in ascending position order.
pub fn mutate_in_place(y: &mut BitString, op: &MutationOp, rng: &mut RngStream) {
    match *op {
        MutationOp::OneBit => {
            let i = rng.index(y.len());
            y.flip(i);
        }
        MutationOp::Standard { chi } => {
            let p = chi / y.len() as f64;
            SubsetSampler::new(p).for_each(y.len(), rng, |i| y.flip(i));
        }
    }
}

/// Returns a mutated copy of `x`.
pub fn mutate(x: &BitString, op: &MutationOp, rng: &mut RngStream) -> BitString {
    let mut y = x.clone();
    mutate_in_place(&mut y, op, rng);
    y
}

/// Applies one fresh noise draw to `y` in place (ascending position order).
pub fn apply_noise_in_place(y: &mut BitString, noise: &NoiseModel, rng: &mut RngStream) {
    match *noise {
        NoiseModel::None => {}
        NoiseModel::OneBit { q } => {
            // The occurrence draw is always consumed; the position draw only
            // when noise actually strikes.
            if rng.bernoulli(q) {
                let i = rng.index(y.len());
                y.flip(i);
            }
        }
        NoiseModel::Bitwise { q } => {
            let p = q / y.len() as f64;
            SubsetSampler::new(p).for_each(y.len(), rng, |i| y.flip(i));
        }
    }
}

/// Returns a noisy copy of `x`.
pub fn apply_noise(x: &BitString, noise: &NoiseModel, rng: &mut RngStream) -> BitString {
    let mut y = x.clone();
    apply_noise_in_place(&mut y, noise, rng);
    y
}

/// Evaluates `LeadingOnes` of a noisy copy of `x`, reusing `scratch` for the
/// copy so per-iteration evaluation allocates nothing.
pub fn noisy_fitness_into(
    x: &BitString,
    noise: &NoiseModel,
    rng: &mut RngStream,
    scratch: &mut BitString,
) -> u32 {
    scratch.clone_from(x);
    apply_noise_in_place(scratch, noise, rng);
    scratch.leading_ones()
}

/// Evaluates `LeadingOnes` of a noisy copy of `x`.
pub fn noisy_fitness(x: &BitString, noise: &NoiseModel, rng: &mut RngStream) -> u32 {
    let mut scratch = x.clone();
    apply_noise_in_place(&mut scratch, noise, rng);
    scratch.leading_ones()
}
