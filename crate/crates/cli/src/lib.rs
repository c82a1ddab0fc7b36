//! Configuration, campaign execution and report emission for `symflow`.

pub mod campaign;
pub mod config;
pub mod report;

pub use campaign::{run, Outcome};
pub use config::{load_config, parse_config, Campaign, Command, ConfigError};
pub use report::{emit_report, Check, Format, Report, Status};
