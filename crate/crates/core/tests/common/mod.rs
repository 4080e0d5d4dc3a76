#![allow(dead_code)]

pub mod classifiers;
pub mod features;
pub mod lineage;
pub mod tables;
