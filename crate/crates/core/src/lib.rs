//! One-pass stream diversification in bounded memory.
//!
//! The engine keeps an m-element result set in memory and scans a stream of
//! candidates exactly once. Each candidate is scored by its *possible
//! diversity gain* (PDG): the largest increase in the set's diversity that a
//! single swap with the candidate can achieve. The first `k` stream elements
//! only calibrate the acceptance threshold; the first later element that
//! beats it is swapped in and the scan stops. If nothing beats the threshold
//! the final stream element is swapped in regardless.
//!
//! Two diversity measures are provided: population variance for numeric
//! streams ([`numeric::NumericDiversity`]) and the sum of pairwise edit
//! distances for string streams ([`strings::StringDiversity`]). Both evaluate
//! candidates incrementally from cached aggregates.
//!
//! The [`sampling`] module carries the analytical side: the success
//! probability of the stopping rule, the optimal scan length, the
//! Chernoff-style sample-count bound, and a Monte Carlo validator. The
//! [`oracle`] module holds the offline brute-force best-swap oracle and a
//! greedy max-min dispersion baseline for comparison. [`dataset`] reads
//! line-oriented data files and generates synthetic streams; [`experiment`]
//! runs segment-sampled selection experiments and emits CSV records.

pub mod dataset;
pub mod engine;
pub mod experiment;
pub mod numeric;
pub mod oracle;
pub mod sampling;
pub mod strings;

pub use engine::{
    dir, initialize_memory, run_selection, CountingStream, DiversityMeasure, MemoryBuffer,
    PdgEvaluation, SelectionConfig, SelectionError, SelectionOutcome, StreamElement,
};
pub use numeric::NumericDiversity;
pub use strings::StringDiversity;
