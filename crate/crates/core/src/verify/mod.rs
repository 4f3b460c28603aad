//! Monte Carlo verification engine: singular-value tails for real and complex
//! shifts, minimum-gap and Im_min tails with certificate cross-checks,
//! condition-number expectations, quadratic-form anticoncentration, and
//! singular-value stochastic dominance. Every experiment is a pure function
//! of (config, seed) with thread-count-independent output.

pub mod bounds;
pub mod dominance;
pub mod gap;
pub mod kappa;
pub mod report;
pub mod slope;
pub mod smallball;
pub mod svtail;

pub use bounds::{dkw_band, BoundConstants, BoundId, BoundValue};
pub use dominance::{run_dominance_check, DominanceConfig, DominanceReport};
pub use gap::{run_gap_experiment, GapExperimentConfig, GapReport};
pub use kappa::{run_kappa_experiment, KappaExperimentConfig, KappaReport, StripRegion};
pub use report::{EmpiricalCdf, TailReport, TailRow, Verdict};
pub use slope::{fit_loglog_slope, SlopeFit};
pub use smallball::{
    run_rect_lemma_experiment, run_smallball_experiment, QuadFormConfig, QuadFormReport,
    RectLemmaConfig,
};
pub use svtail::{run_sv_tail_experiment, TailExperimentConfig};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("need at least {min} trials, got {got}")]
    InsufficientTrials { min: usize, got: usize },
    #[error("bad grid or configuration: {0}")]
    BadGrid(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error(transparent)]
    Bound(#[from] bounds::BoundError),
    #[error(transparent)]
    Ensemble(#[from] crate::ensemble::EnsembleError),
    #[error(transparent)]
    Spectral(#[from] crate::spectral::SpectralError),
    #[error(transparent)]
    Slope(#[from] slope::SlopeError),
}
