pub mod ccea;
pub mod cli;
pub mod contract;
pub mod distance;
pub mod fixtures;
pub mod sampler;
pub mod sim;
pub mod value;
