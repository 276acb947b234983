//! Precision-tracked real and complex arithmetic, the node lattice, gamma
//! functions and maximum-modulus estimation.

mod complex;
mod gamma;
mod maxmod;
mod real;

pub use complex::{lattice_point, node, Complex};
pub use gamma::{gamma, log_gamma, reciprocal_gamma};
pub use maxmod::{max_modulus, MaxModulus, DEFAULT_SAMPLES};
pub use real::{rational_to_f64, PrecisionPolicy, Real, DEFAULT_BITS, MAX_BITS, MIN_BITS};
