//! Domain types and the cost/variation algebra everything else is built on.

mod bounds;
mod clustering;
mod cost;
mod dataset;
mod norms;
mod sites;

pub use bounds::WeightBounds;
pub use clustering::Clustering;
pub use cost::{
    centroid_and_weight, centroids, cost, cost_matrix, opt_site_cost, site_distance_sum, variation,
    variation_euclidean,
};
pub use dataset::WeightedDataSet;
pub use norms::NormFamily;
pub use sites::SiteSet;
