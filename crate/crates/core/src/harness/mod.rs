//! Seeded multi-run regret experiments, configuration and CSV output.

pub mod config;
pub mod experiment;
pub mod records;

pub use config::{parse_config, EnvSpec, ExperimentConfig, RawConfig};
pub use experiment::{make_agent, run_agent, run_experiment, RegretRecord};
pub use records::{read_records, write_records, write_records_to, CSV_HEADER};
