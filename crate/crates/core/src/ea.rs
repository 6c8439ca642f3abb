//! The (1+1) evolutionary algorithm under noisy evaluation.
//!
//! One iteration: mutate the parent into an offspring, evaluate the
//! offspring through the noise model, and accept the offspring iff its noisy
//! fitness is at least the parent's stored fitness. The two evaluation
//! policies differ in what "stored" means:
//!
//! * [`EvaluationPolicy::Ignore`]: the parent keeps the noisy value it was
//!   assigned when it was accepted; it is never re-evaluated.
//! * [`EvaluationPolicy::Reevaluate`]: the parent's stored value is refreshed
//!   with a fresh noisy evaluation every iteration, before the comparison.
//!
//! A run terminates once the parent is the all-ones string *and* its stored
//! fitness equals `n`, i.e. the optimum was found and evaluated correctly. A
//! noisy evaluation can report `n` for a non-optimal offspring (noise flips
//! all its zeros); accepting such an offspring does not terminate the run.

use serde::{Deserialize, Serialize};

use crate::bitcore::{
    mutate_in_place, noisy_fitness_into, BitString, MutationOp, NoiseModel, RngStream,
};
use crate::{Error, Result};

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EvaluationPolicy {
    Ignore,
    Reevaluate,
}

impl EvaluationPolicy {
    pub fn name(&self) -> &'static str {
        match self {
            EvaluationPolicy::Ignore => "ignore",
            EvaluationPolicy::Reevaluate => "reevaluate",
        }
    }
}

/// Algorithm state between iterations.
#[derive(Clone, Debug)]
pub struct SearchState {
    pub parent: BitString,
    /// Noisy fitness the algorithm currently believes the parent has.
    pub stored_fitness: u32,
    /// Completed iterations; the next step executes this iteration index.
    pub iteration: u64,
    /// Fitness evaluations consumed so far (the initial one included).
    pub evaluations: u64,
    true_fitness: u32,
}

impl SearchState {
    /// True `LeadingOnes` value of the current parent (cached).
    pub fn true_fitness(&self) -> u32 {
        self.true_fitness
    }

    pub fn is_terminal(&self) -> bool {
        self.true_fitness as usize == self.parent.len()
            && self.stored_fitness as usize == self.parent.len()
    }
}

/// What one iteration did. Parent fields are the values at iteration start.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StepRecord {
    pub parent_true_fitness: u32,
    pub stored_fitness: u32,
    pub offspring_true_fitness: u32,
    pub offspring_noisy_fitness: u32,
    pub accepted: bool,
}

/// Outcome of a full run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialResult {
    pub found_optimum: bool,
    pub iterations_used: u64,
    pub evaluations_used: u64,
    /// Maximum true fitness over all accepted parents (never offspring).
    pub best_true_fitness: u32,
    /// Maximum stored fitness over all accepted parents.
    pub best_noisy_fitness: u32,
    pub seed: u64,
}

/// Per-iteration observer. `run_trial` uses the no-op [`NoTrace`], which the
/// compiler removes entirely, so untraced runs pay nothing per iteration.
pub trait TraceSink {
    /// Called once per iteration with the state *before* the step, and once
    /// more with the final state after the run ends.
    fn on_state(&mut self, state: &SearchState);
    /// Called after each executed step.
    fn on_step(&mut self, record: &StepRecord);
}

pub struct NoTrace;

impl TraceSink for NoTrace {
    #[inline]
    fn on_state(&mut self, _: &SearchState) {}
    #[inline]
    fn on_step(&mut self, _: &StepRecord) {}
}

/// Draws a uniform parent and evaluates it once through the noise model.
pub fn init(n: usize, noise: &NoiseModel, rng: &mut RngStream) -> SearchState {
    let parent = BitString::random(n, rng);
    let mut scratch = parent.clone();
    let stored = noisy_fitness_into(&parent, noise, rng, &mut scratch);
    SearchState {
        true_fitness: parent.leading_ones(),
        parent,
        stored_fitness: stored,
        iteration: 0,
        evaluations: 1,
    }
}

struct Scratch {
    offspring: BitString,
    eval: BitString,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Scratch {
            offspring: BitString::zeros(n),
            eval: BitString::zeros(n),
        }
    }
}

fn step_with(
    state: &mut SearchState,
    mut_op: &MutationOp,
    noise: &NoiseModel,
    policy: EvaluationPolicy,
    rng: &mut RngStream,
    scratch: &mut Scratch,
) -> StepRecord {
    let parent_true = state.true_fitness;
    let stored_before = state.stored_fitness;

    // Mutation draws come first in every iteration.
    scratch.offspring.clone_from(&state.parent);
    mutate_in_place(&mut scratch.offspring, mut_op, rng);

    // Under re-evaluation the parent is refreshed before the offspring is
    // evaluated, and both evaluations count.
    if policy == EvaluationPolicy::Reevaluate {
        state.stored_fitness = noisy_fitness_into(&state.parent, noise, rng, &mut scratch.eval);
        state.evaluations += 1;
    }
    let offspring_noisy = noisy_fitness_into(&scratch.offspring, noise, rng, &mut scratch.eval);
    state.evaluations += 1;

    let offspring_true = scratch.offspring.leading_ones();
    let accepted = offspring_noisy >= state.stored_fitness;
    if accepted {
        std::mem::swap(&mut state.parent, &mut scratch.offspring);
        state.stored_fitness = offspring_noisy;
        state.true_fitness = offspring_true;
    }
    state.iteration += 1;

    StepRecord {
        parent_true_fitness: parent_true,
        stored_fitness: stored_before,
        offspring_true_fitness: offspring_true,
        offspring_noisy_fitness: offspring_noisy,
        accepted,
    }
}

/// Executes one iteration. Prefer [`run_trial`] for whole runs; this entry
/// point allocates its scratch buffers on every call.
pub fn step(
    state: &mut SearchState,
    mut_op: &MutationOp,
    noise: &NoiseModel,
    policy: EvaluationPolicy,
    rng: &mut RngStream,
) -> StepRecord {
    let mut scratch = Scratch::new(state.parent.len());
    step_with(state, mut_op, noise, policy, rng, &mut scratch)
}

/// Runs one trial for at most `budget` iterations, reporting every state to
/// `sink`. The trial is a pure function of `seed`.
pub fn run_trial_with_sink<S: TraceSink>(
    n: usize,
    mut_op: &MutationOp,
    noise: &NoiseModel,
    policy: EvaluationPolicy,
    budget: u64,
    seed: u64,
    sink: &mut S,
) -> Result<TrialResult> {
    if n == 0 {
        return Err(Error::invalid("problem size n must be at least 1"));
    }
    mut_op.validate(n)?;
    noise.validate(n)?;

    let mut rng = RngStream::new(seed);
    let mut state = init(n, noise, &mut rng);
    let mut scratch = Scratch::new(n);
    let mut best_true = state.true_fitness;
    let mut best_noisy = state.stored_fitness;

    loop {
        sink.on_state(&state);
        if state.is_terminal() || state.iteration >= budget {
            break;
        }
        let record = step_with(&mut state, mut_op, noise, policy, &mut rng, &mut scratch);
        sink.on_step(&record);
        best_true = best_true.max(state.true_fitness);
        best_noisy = best_noisy.max(state.stored_fitness);
    }

    Ok(TrialResult {
        found_optimum: state.is_terminal(),
        iterations_used: state.iteration,
        evaluations_used: state.evaluations,
        best_true_fitness: best_true,
        best_noisy_fitness: best_noisy,
        seed,
    })
}

/// Runs one untraced trial.
pub fn run_trial(
    n: usize,
    mut_op: &MutationOp,
    noise: &NoiseModel,
    policy: EvaluationPolicy,
    budget: u64,
    seed: u64,
) -> Result<TrialResult> {
    run_trial_with_sink(n, mut_op, noise, policy, budget, seed, &mut NoTrace)
}
