//! Coarse-grained bookkeeping of the mesoscopic path: edge states, the
//! Theta sequence state machine, exhaustive enumeration of admissible
//! sequences, and the window events that decide each Theta.

mod board;
mod enumerate;
mod machine;
mod window;

pub use board::{edge_key, EdgeState, EdgeStateBoard, PathGamma};
pub use enumerate::{
    admissible_run, enumerate_admissible, enumerate_admissible_capped, enumerate_runs, enumeration_report,
    sequence_stats, stars_are_prefix_determined, sweep_paths, EnumerationReport, PathSweep, SequenceStats,
    EXHAUSTIVE_CAP,
};
pub use machine::{
    advance_stage, run_machine, Grant, MachineRun, OutcomeSource, Recording, ScriptedOutcomes, StageCase,
    StageOutput, StageRecord, StateMachine, ThetaAssignment, ThetaQuery, ThetaSequence, ThetaType, ThetaValue,
};
pub use window::{
    check_eps_tilde, eps_tilde_bound, eps_tilde_bounds, window_length, window_score, window_statistic,
    window_threshold, Orientation, WindowEventSource,
};
