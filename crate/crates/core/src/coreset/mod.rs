//! Coreset construction: an ε-net of directions, pencils of lines through
//! approximate centroids, projection onto the pencils and batching along
//! each line.

mod batch;
mod build;
mod net;
mod project;

pub use batch::{batch_lines, merge_batches, Batch, Merged};
pub use build::{
    build_coreset, compose, movement_coreset_certify, opt_lower_bound, Coreset, CoresetConfig,
    MovementCertificate, OptLowerBound,
};
pub use net::{build_epsilon_net, EpsilonNet};
pub use project::{project_to_pencils, Pencil, Projection};
