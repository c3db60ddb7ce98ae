//! Partial extended b-metric spaces as executable objects.
//!
//! The crate checks the defining axioms of metric-type spaces by exhaustive
//! enumeration, runs Picard iteration under Banach, Kannan and modified
//! Kannan contraction conditions with their error bounds, diagnoses
//! convergence of sequences, and fuzzes random finite instances against the
//! checker.

// `!(x > 0.0)` is how NaN arguments are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod axioms;
pub mod error;
mod exact;
pub mod expr;
pub mod fixed_point;
pub mod fuzz;
pub mod gallery;
pub mod matrix;
pub mod sequence;
pub mod spaces;

pub use error::{Error, Result};
pub use fixed_point::{
    banach_tail_bound, kannan_step_bound, modkannan_bounds, modkannan_step_bound, picard_solve,
    record_trace, uniqueness_probe, verify_contraction, verify_theta_condition, ContractionReport,
    ContractionSpec, ConvergenceCertificate, Family, IterationTrace, Outcome, PicardRun,
    Precondition, ThetaReport, UniquenessReport,
};
pub use fuzz::{
    fuzz_campaign, gen_space, mutate_theta, shrink, CounterexampleReport, FuzzCampaign, FuzzConfig,
    FuzzStats, Mutation,
};
pub use gallery::{build_example, run_gallery, GalleryEntry, GalleryReport, GALLERY_IDS};
pub use matrix::SquareMatrix;
pub use sequence::{
    cauchy_tail, converges_to, orbit, zero_cauchy_tail, AnalyticMap, CauchyTail,
    ConvergenceVerdict, FiniteMap, PointSequence, SelfMap,
};
pub use spaces::{
    eval_p, eval_theta, induced_ebm, sample_grid, AnalyticSpace, AxiomProfile, EvidenceMode,
    FiniteSpace, Interval, Space, SpaceDoc,
};
