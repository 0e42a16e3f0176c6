//! One-sided shift spaces over countable alphabets, potentials, topological
//! pressure and Gibbs states.
//!
//! Countable alphabets are handled by truncation to the first `N` letters.
//! Potentials are locally constant on `m`-cylinders; the Gibbs state of such
//! a potential is an `m`-step Markov chain whose kernel comes from the
//! Perron–Frobenius eigendata of the weighted `m`-word transition matrix.

mod gibbs;
mod potential;
mod pressure;
mod space;

pub use gibbs::{
    entropy_from_pressure, gibbs_audit, rpf_eigendata, AuditLevel, AuditReport, EigenData, GibbsMarkovMeasure,
    MeasureExport, StateGraph,
};
pub use potential::{summability_report, Potential, SummabilityReport, SummabilityVerdict};
pub use pressure::{pressure, truncation_sweep, PressureEstimate, SweepReport};
pub use space::{IncidenceMatrix, Letter, ShiftSpace, Word, DEFAULT_CYLINDER_CAP};
