//! Maximum-reward search over stochastic arms whose upper tails obey a
//! polynomial envelope.

pub mod adversarial;
pub mod algorithms;
pub mod bandit_env;
pub mod bounds;
pub mod harness;
pub mod instance_file;
pub mod quadrature;
pub mod reward_models;
pub mod rng;
pub mod stats;
