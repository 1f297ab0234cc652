pub mod cmatrix;
pub mod network;
pub mod rng;
pub mod feedback;
pub mod feasibility;
pub mod profile_opt;
pub mod transceiver;
pub mod quantize;
pub mod evaluate;
pub mod experiment;
