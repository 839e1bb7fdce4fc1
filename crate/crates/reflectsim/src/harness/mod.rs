//! Experiment harness: configuration files, the train / evaluate / heatmap /
//! compare commands, their output formats, and run manifests.

pub mod cli;
pub mod commands;
pub mod config;
pub mod manifest;
pub mod outputs;
pub mod scene;
