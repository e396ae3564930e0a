//! Persistence formats and job configuration.

pub mod config;
pub mod export;
pub mod job;
pub mod records;

pub use config::{BackendChoice, JobConfig};
pub use job::{run_to_directory, series_file_name, RunSummary};
pub use records::{
    read_series, read_series_str, write_series, write_series_string, HeaderRecord, PacketRecord,
    RealizationRecord, SCHEMA_VERSION,
};
