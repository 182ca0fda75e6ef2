//! Monte Carlo ensembles and the statistics computed from them.

mod capture;
mod convergence;
mod dichotomy;
mod ensemble;
mod output;
mod stopping;

pub use capture::{capture_escape_frequency, envelope_sup_over_ball, CaptureReport, CaptureRow, G_R_POINTS};
pub use convergence::{gradient_convergence_stats, Checkpoint, ConvergenceReport, MomentEstimate, Summary, TerminationTally};
pub use dichotomy::{classify_dichotomy, DichotomyClassification, DichotomyVerdict, WindowEvidence};
pub use ensemble::{
    run_ensemble, simulate_ensemble, AnalysisOptions, CaptureSpec, Ensemble, EnsembleReport, EnsembleSpec, EscapeLog,
    VerdictCounts,
};
pub use output::{checkpoint_rows, write_checkpoints_csv, write_json, CheckpointRow};
pub use stopping::{compute_stopping_times, stopping_times_of_values, StoppingTimes};
