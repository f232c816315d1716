//! Batch orchestration: configuration, simulation of current-on/off runs,
//! subtraction, limit setting and the report files tying them together.

pub mod config;
mod run;

pub use config::{
    BackgroundModel, BackgroundShape, Binning, CcdSettings, ConfigError, LimitSettings, RunConfig, RunPlan,
    TransportSettings, OUTPUT_DIR_ENV, DEFAULT_BACKGROUND_RATE,
};
pub use run::*;
