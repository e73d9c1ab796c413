//! Two-port network algebra, frequency-sweep containers and Touchstone I/O.

pub mod matrix;
pub mod network;
pub mod sparams;
pub mod touchstone;

pub use matrix::{c, cascade, Complex, ComplexMatrix2};
pub use network::{assert_common_grid, linear_grid, FrequencyNetwork, NetworkData};
pub use sparams::{s_to_t, star, t_to_s, SParams2, DEFAULT_TRANSMISSION_FLOOR, SPARAM_NAMES};
pub use touchstone::{read_touchstone, write_touchstone};
