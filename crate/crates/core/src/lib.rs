pub mod error;
pub mod combinatorics;
pub mod diffeq;
pub mod numerics;
pub mod operators;
pub mod wiman_valiron;
pub mod series;
pub mod spec_io;

pub use error::{Error, Result};
