//! Exact small-`n` ground truth: class enumeration, the weighted
//! root-cluster recursion, the uniform-attachment closed form and exact
//! series moments.

pub mod closed_form;
pub mod enumerate;
pub mod series_moments;
pub mod weights;

pub use closed_form::closed_form_pmf_alpha0;
pub use enumerate::{enumerate_small, TreeDistribution};
pub use series_moments::{series_coefficients, series_moments};
pub use weights::{exact_root_cluster_pmf, WeightTable, N_ORACLE};
