//! Coresets for weight-constrained anisotropic least-squares assignment.
//!
//! The crate is generic over the scalar type; the `*64` and `*32` aliases at
//! the root pin it to `f64` or `f32`.

pub mod approx;
pub mod assign;
pub mod coreset;
pub mod error;
pub mod io;
pub mod linalg;
pub mod model;
pub mod scalar;
pub mod verify;

pub use approx::{ab_approximate, opt_bruteforce, ApproxResult};
pub use assign::{
    alternate, check_compatibility, extend, extract_diagram, push_forward, solve_assignment,
    AnisotropicDiagram, Assignment, Compatibility, DualCertificate, MergePlan, MergingFunction,
};
pub use coreset::{build_coreset, compose, Coreset, CoresetConfig};
pub use error::{Error, Result};
pub use linalg::SymMatrix;
pub use model::{
    centroid_and_weight, centroids, cost, cost_matrix, opt_site_cost, variation,
    variation_euclidean, Clustering, NormFamily, SiteSet, WeightBounds, WeightedDataSet,
};
pub use scalar::Scalar;

pub type DataSet64 = WeightedDataSet<f64>;
pub type DataSet32 = WeightedDataSet<f32>;
pub type Clustering64 = Clustering<f64>;
pub type Clustering32 = Clustering<f32>;
pub type Bounds64 = WeightBounds<f64>;
pub type Bounds32 = WeightBounds<f32>;
pub type Norms64 = NormFamily<f64>;
pub type Norms32 = NormFamily<f32>;
pub type Sites64 = SiteSet<f64>;
pub type Sites32 = SiteSet<f32>;
pub type Diagram64 = AnisotropicDiagram<f64>;
pub type Diagram32 = AnisotropicDiagram<f32>;
pub type Coreset64 = Coreset<f64>;
pub type Coreset32 = Coreset<f32>;
