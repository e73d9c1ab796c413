//! Synthetic measurement generation: lumped standards behind offset lines,
//! parametric transmission lines, error-box embedding and the random
//! perturbations used by the Monte Carlo harness.

pub mod config;
pub mod generate;
pub mod line;
pub mod load;
pub mod perturb;
pub mod random;

pub use config::{builtin_error_model, DutSection, KitConfig, NamedLoad};
pub use generate::{crosstalk_pair, embed, embed_one_port, make_srm_set, make_srm_set_run, SyntheticSet, SyntheticTruth};
pub use line::{LineParams, TransmissionLineModel};
pub use load::{LumpedLoadModel, Topology};
pub use perturb::{PerturbationSpec, Source};
