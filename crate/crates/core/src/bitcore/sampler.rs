use super::rng::RngStream;

/// Draws the positions of a random subset of `[0, n)` in which each position
/// is included independently with probability `p`, visiting the chosen
/// positions in ascending order.
///
/// For `p < 1/2` the skip lengths between chosen positions are sampled
/// geometrically (one uniform draw and one `ln` per chosen position plus
/// one final overshoot), which is what makes bit rates like `q/n` cheap at
/// large `n`. The per-bit path is used otherwise. Both paths realize the
/// same product distribution over subsets; a test below compares their
/// frequencies against the exact subset probabilities.
#[derive(Clone, Copy, Debug)]
pub enum SubsetSampler {
    Never,
    Always,
    Geometric { inv_ln_keep: f64 },
    PerBit { p: f64 },
}

impl SubsetSampler {
    pub fn new(p: f64) -> Self {
        if p <= 0.0 {
            SubsetSampler::Never
        } else if p >= 1.0 {
            SubsetSampler::Always
        } else if p < 0.5 {
            SubsetSampler::Geometric {
                inv_ln_keep: 1.0 / (-p).ln_1p(),
            }
        } else {
            SubsetSampler::PerBit { p }
        }
    }

    #[inline]
    pub fn for_each(&self, n: usize, rng: &mut RngStream, mut f: impl FnMut(usize)) {
        match *self {
            SubsetSampler::Never => {}
            SubsetSampler::Always => {
                for i in 0..n {
                    f(i);
                }
            }
            SubsetSampler::Geometric { inv_ln_keep } => {
                let mut pos = 0usize;
                loop {
                    // Skip ~ Geometric(p): floor(ln U / ln(1-p)), U in (0,1].
                    let skip = rng.next_f64_positive().ln() * inv_ln_keep;
                    pos = pos.saturating_add(skip as usize);
                    if pos >= n {
                        break;
                    }
                    f(pos);
                    pos += 1;
                }
            }
            SubsetSampler::PerBit { p } => {
                for i in 0..n {
                    if rng.bernoulli(p) {
                        f(i);
                    }
                }
            }
        }
    }
}
