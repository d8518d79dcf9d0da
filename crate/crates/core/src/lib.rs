pub mod cluster;
pub mod config;
pub mod energy;
pub mod isa;
pub mod kernels;
pub mod numeric;
pub mod sim;
pub mod vrf;
