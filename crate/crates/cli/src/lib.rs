//! Library surface of the flow-lab CLI: configuration, orchestration,
//! persistence, and rate fitting. The binary in `main.rs` is a thin wrapper.

pub mod commands;
pub mod config;
pub mod ratefit;
pub mod report;

pub use commands::{EXIT_BLOWUP, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_OK};
pub use config::RunConfig;
pub use ratefit::{rate_fit, RateFit};
