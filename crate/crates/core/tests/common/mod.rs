#![allow(dead_code)]

pub mod flow;
pub mod instances;
pub mod packing;
