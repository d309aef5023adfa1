//! Real harmonizable multifractional stable processes.
//!
//! `model` holds the process description, `quad` the quadrature engine,
//! `norms` the exact alpha-norm calculus, `lepage` the series simulator,
//! `localtime` occupation densities and `analysis` the verification suites.

pub mod analysis;
pub mod lepage;
pub mod localtime;
pub mod model;
pub mod norms;
pub mod quad;

pub use num_complex::Complex64;
