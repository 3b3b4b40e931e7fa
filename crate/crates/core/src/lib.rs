pub mod estimate;
pub mod cli;
pub mod expr;
pub mod fields;
pub mod majorant;
pub mod measures;
pub mod problems;
pub mod quadrature;
