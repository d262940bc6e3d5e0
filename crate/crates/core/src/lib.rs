pub mod error;
pub mod numerics;
pub mod clifford;
pub mod cycle;
pub mod relations;
pub mod figure;
pub mod poincare;
pub mod contfrac;
pub mod render;
