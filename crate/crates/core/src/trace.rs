//! Run tracing: per-iteration state labels and phase segmentation.
//!
//! At each iteration the parent either stores its true fitness (`Eq`),
//! underestimates it (`Gt`), or overestimates it (`Lt(j)`, where `j` counts
//! the zeros inside the *active prefix*, the first `stored_fitness`
//! positions). Iterations labelled `Eq` cut the run into phases; a phase is
//! successful when the fitness at its closing boundary strictly exceeds the
//! fitness at its opening boundary, and the successful boundaries delimit
//! the super-phases (there are at most `n` of them, since each one raises
//! the fitness).

use std::io::Write;

use crate::bitcore::BitString;
use crate::ea::{SearchState, StepRecord, TraceSink};
use crate::{Error, Result};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum StateLabel {
    /// Stored fitness equals true fitness.
    Eq,
    /// True fitness exceeds the stored value (an underestimate).
    Gt,
    /// Stored value exceeds true fitness; carries the number of zeros in the
    /// active prefix (at least one).
    Lt(u32),
}

impl StateLabel {
    pub fn name(&self) -> &'static str {
        match self {
            StateLabel::Eq => "eq",
            StateLabel::Gt => "gt",
            StateLabel::Lt(_) => "lt",
        }
    }
}

/// Number of zero bits among the first `stored_fitness` positions of `x`.
pub fn zeros_in_active_prefix(x: &BitString, stored_fitness: u32) -> u32 {
    assert!(
        stored_fitness as usize <= x.len(),
        "stored fitness cannot exceed the string length"
    );
    x.zeros_in_prefix(stored_fitness as usize)
}

/// Labels a state from its true fitness, stored fitness, and zero count in
/// the active prefix. The three values are mutually constrained; violations
/// mean the inputs do not describe a real state and are rejected.
pub fn classify(true_fitness: u32, stored_fitness: u32, zeros: u32) -> Result<StateLabel> {
    use std::cmp::Ordering::*;
    match true_fitness.cmp(&stored_fitness) {
        Equal | Greater if zeros != 0 => Err(Error::invalid(format!(
            "true fitness {true_fitness} >= stored {stored_fitness} forces an all-ones active \
             prefix, yet {zeros} zeros were claimed"
        ))),
        Equal => Ok(StateLabel::Eq),
        Greater => Ok(StateLabel::Gt),
        Less if zeros == 0 || zeros > stored_fitness => Err(Error::invalid(format!(
            "true fitness {true_fitness} < stored {stored_fitness} needs between 1 and \
             {stored_fitness} zeros in the active prefix, got {zeros}"
        ))),
        Less => Ok(StateLabel::Lt(zeros)),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TraceRecord {
    pub iteration: u64,
    pub true_fitness: u32,
    pub stored_fitness: u32,
    pub label: StateLabel,
    pub zeros: u32,
}

/// Sink that keeps one [`TraceRecord`] per iteration (plus the final state).
#[derive(Default)]
pub struct TraceCollector {
    pub records: Vec<TraceRecord>,
}

impl TraceSink for TraceCollector {
    fn on_state(&mut self, state: &SearchState) {
        let zeros = zeros_in_active_prefix(&state.parent, state.stored_fitness);
        let label = classify(state.true_fitness(), state.stored_fitness, zeros)
            .expect("states reached by the algorithm are internally consistent");
        self.records.push(TraceRecord {
            iteration: state.iteration,
            true_fitness: state.true_fitness(),
            stored_fitness: state.stored_fitness,
            label,
            zeros,
        });
    }

    fn on_step(&mut self, _: &StepRecord) {}
}

/// Phase structure of a trace.
///
/// `boundaries` lists every `Eq` iteration in order. Phase `i >= 1` spans
/// `[boundaries[i-1], boundaries[i])`; its length is the boundary
/// difference, and it is successful iff the fitness strictly increased
/// between the two boundaries. Iterations before the first boundary form
/// phase 0 (possibly empty); iterations after the last boundary form the
/// trailing partial phase, reported separately and excluded from the
/// per-phase statistics.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhaseSegmentation {
    pub boundaries: Vec<u64>,
    pub boundary_fitness: Vec<u32>,
    pub phase_lengths: Vec<u64>,
    pub successful: Vec<bool>,
    pub super_phase_boundaries: Vec<u64>,
    pub phase_zero_len: u64,
    pub trailing_len: u64,
}

impl PhaseSegmentation {
    pub fn mean_phase_length(&self) -> Option<f64> {
        if self.phase_lengths.is_empty() {
            None
        } else {
            Some(self.phase_lengths.iter().sum::<u64>() as f64 / self.phase_lengths.len() as f64)
        }
    }
}

/// Segments a contiguous trace into phases.
pub fn segment(records: &[TraceRecord]) -> PhaseSegmentation {
    debug_assert!(
        records.windows(2).all(|w| w[1].iteration == w[0].iteration + 1),
        "traces cover contiguous iterations"
    );
    let mut boundaries = Vec::new();
    let mut boundary_fitness = Vec::new();
    for r in records {
        if r.label == StateLabel::Eq {
            boundaries.push(r.iteration);
            boundary_fitness.push(r.true_fitness);
        }
    }
    let phase_lengths: Vec<u64> = boundaries.windows(2).map(|w| w[1] - w[0]).collect();
    let successful: Vec<bool> = boundary_fitness.windows(2).map(|w| w[1] > w[0]).collect();
    let super_phase_boundaries: Vec<u64> = successful
        .iter()
        .zip(boundaries.iter().skip(1))
        .filter_map(|(&ok, &b)| ok.then_some(b))
        .collect();
    let (phase_zero_len, trailing_len) = match (boundaries.first(), boundaries.last()) {
        (Some(&first), Some(&last)) => {
            let start = records.first().map_or(0, |r| r.iteration);
            let end = records.last().map_or(0, |r| r.iteration);
            (first - start, end - last)
        }
        _ => (records.len() as u64, 0),
    };
    PhaseSegmentation {
        boundaries,
        boundary_fitness,
        phase_lengths,
        successful,
        super_phase_boundaries,
        phase_zero_len,
        trailing_len,
    }
}

/// Writes a trace as CSV with the header
/// `iter,true_fitness,stored_fitness,state,zeros`.
pub fn write_trace_csv<W: Write>(records: &[TraceRecord], mut out: W) -> Result<()> {
    writeln!(out, "iter,true_fitness,stored_fitness,state,zeros")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.iteration,
            r.true_fitness,
            r.stored_fitness,
            r.label.name(),
            r.zeros
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitcore::{MutationOp, NoiseModel};
    use crate::ea::{run_trial_with_sink, EvaluationPolicy};

    fn rec(iteration: u64, fitness: u32, label: StateLabel) -> TraceRecord {
        let (stored, zeros) = match label {
            StateLabel::Eq => (fitness, 0),
            StateLabel::Gt => (fitness.saturating_sub(1), 0),
            StateLabel::Lt(j) => (fitness + j, j),
        };
        TraceRecord {
            iteration,
            true_fitness: fitness,
            stored_fitness: stored,
            label,
            zeros,
        }
    }

    #[test]
    fn classify_accepts_consistent_states_and_rejects_the_rest() {
        assert_eq!(classify(3, 3, 0).unwrap(), StateLabel::Eq);
        assert_eq!(classify(5, 2, 0).unwrap(), StateLabel::Gt);
        assert_eq!(classify(1, 4, 2).unwrap(), StateLabel::Lt(2));
        assert!(classify(3, 3, 1).is_err());
        assert!(classify(5, 2, 1).is_err());
        assert!(classify(1, 4, 0).is_err());
        assert!(classify(1, 4, 5).is_err());
    }

    #[test]
    fn zeros_in_active_prefix_counts_only_the_stored_window() {
        let x: BitString = "10110".parse().unwrap();
        assert_eq!(zeros_in_active_prefix(&x, 0), 0);
        assert_eq!(zeros_in_active_prefix(&x, 1), 0);
        assert_eq!(zeros_in_active_prefix(&x, 2), 1);
        assert_eq!(zeros_in_active_prefix(&x, 4), 1);
        assert_eq!(zeros_in_active_prefix(&x, 5), 2);
    }

    #[test]
    fn segment_matches_the_small_worked_example() {
        // States EQ, EQ, GT, EQ: boundaries at 0, 1, 3; phase 0 is empty,
        // then a length-1 phase and a length-2 phase.
        let records = vec![
            rec(0, 2, StateLabel::Eq),
            rec(1, 2, StateLabel::Eq),
            rec(2, 3, StateLabel::Gt),
            rec(3, 4, StateLabel::Eq),
        ];
        let seg = segment(&records);
        assert_eq!(seg.boundaries, vec![0, 1, 3]);
        assert_eq!(seg.phase_lengths, vec![1, 2]);
        assert_eq!(seg.phase_zero_len, 0);
        assert_eq!(seg.trailing_len, 0);
        assert_eq!(seg.successful, vec![false, true]);
        assert_eq!(seg.super_phase_boundaries, vec![3]);
    }

    #[test]
    fn constant_fitness_eq_run_has_unit_phases_and_no_successes() {
        let records: Vec<_> = (0..6).map(|i| rec(i, 3, StateLabel::Eq)).collect();
        let seg = segment(&records);
        assert_eq!(seg.phase_lengths, vec![1; 5]);
        assert!(seg.successful.iter().all(|&s| !s));
        assert!(seg.super_phase_boundaries.is_empty());
        assert_eq!(seg.mean_phase_length(), Some(1.0));
    }

    #[test]
    fn trailing_partial_phase_is_reported_not_merged() {
        let records = vec![
            rec(0, 1, StateLabel::Eq),
            rec(1, 1, StateLabel::Lt(1)),
            rec(2, 1, StateLabel::Lt(1)),
        ];
        let seg = segment(&records);
        assert_eq!(seg.boundaries, vec![0]);
        assert!(seg.phase_lengths.is_empty());
        assert_eq!(seg.trailing_len, 2);
        assert_eq!(seg.mean_phase_length(), None);
    }

    #[test]
    fn trace_without_eq_states_is_all_phase_zero() {
        let records = vec![rec(0, 2, StateLabel::Gt), rec(1, 3, StateLabel::Gt)];
        let seg = segment(&records);
        assert!(seg.boundaries.is_empty());
        assert_eq!(seg.phase_zero_len, 2);
        assert_eq!(seg.trailing_len, 0);
    }

    #[test]
    fn noiseless_runs_are_entirely_eq_with_unit_phases() {
        let mut sink = TraceCollector::default();
        let r = run_trial_with_sink(
            16,
            &MutationOp::Standard { chi: 1.0 },
            &NoiseModel::None,
            EvaluationPolicy::Ignore,
            100_000,
            3,
            &mut sink,
        )
        .unwrap();
        assert!(r.found_optimum);
        assert!(sink.records.iter().all(|r| r.label == StateLabel::Eq));
        let seg = segment(&sink.records);
        assert!(seg.phase_lengths.iter().all(|&l| l == 1));
        assert_eq!(seg.boundaries.len() as u64, r.iterations_used + 1);
    }

    #[test]
    fn one_bit_noise_traces_never_hold_more_than_one_prefix_zero() {
        for seed in 0..20 {
            let mut sink = TraceCollector::default();
            run_trial_with_sink(
                16,
                &MutationOp::OneBit,
                &NoiseModel::OneBit { q: 0.4 },
                EvaluationPolicy::Ignore,
                5_000,
                seed,
                &mut sink,
            )
            .unwrap();
            for r in &sink.records {
                if let StateLabel::Lt(j) = r.label {
                    assert_eq!(j, 1, "seed {seed} iteration {}", r.iteration);
                }
            }
        }
    }

    #[test]
    fn csv_export_has_the_documented_shape() {
        let records = vec![rec(0, 2, StateLabel::Eq), rec(1, 1, StateLabel::Lt(1))];
        let mut buf = Vec::new();
        write_trace_csv(&records, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "iter,true_fitness,stored_fitness,state,zeros\n0,2,2,eq,0\n1,1,2,lt,1\n"
        );
    }
}
