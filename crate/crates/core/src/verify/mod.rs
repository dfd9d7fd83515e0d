//! Empirical certification: coreset inequalities over sampled site sets,
//! the centroid form, approximation preservation, line dissections of
//! diagrams and sensitivity lower bounds.
//!
//! Every harness is deterministic for a fixed seed and reports the seed it used.

mod dissect;
mod harness;
mod report;
mod sensitivity;

pub use dissect::{dissect_line, nested_parabola_diagram, Dissection};
pub use harness::{
    check_approx_preservation, check_centroid_form, check_coreset_properties,
    ApproxPreservationReport, CentroidReport, Instance, PropertyReport, Violation,
};
pub use report::Report;
pub use sensitivity::{
    sensitivity_estimate, sensitivity_example, SensitivityExample, SensitivityReport,
};
