//! Attribute inference from community features.

mod cv;
mod dataset;
mod features;
mod gbdt;

pub use cv::{cross_validate, stratified_folds};
pub use dataset::{build_dataset, build_dataset_from_features, LabeledDataset};
pub use features::{neighbor_attribute_features, Column, FeatureMatrix};
pub use gbdt::{predict, train_gbdt, train_gbdt_traced, GbdtParams, Tree, TreeEnsemble, TreeNode};
