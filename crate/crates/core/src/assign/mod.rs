//! Exact constrained assignment, diagrams read off its duals, and the maps
//! that move clusterings between a data set and its compressions.

mod alternate;
mod diagram;
mod merge;
mod simplex;
mod solve;

pub use alternate::{alternate, AlternatingConfig, AlternatingResult};
pub use diagram::{
    check_compatibility, compatibility_report, extract_diagram, AnisotropicDiagram, Compatibility,
    CompatibilityReport, DiagramPair,
};
pub use merge::{extend, push_forward, MergePlan, MergingFunction};
pub use solve::{solve_assignment, Assignment, DualCertificate};

pub(crate) use solve::solve_costs;
