//! Config files, binary field files, trajectory directories and report CSV.

mod config;
mod field_file;
mod report;
mod trajectory;

pub use config::{load_config, parse_config, ConfigDocument, LoadedConfig, OutputSection};
pub use field_file::{
    decode_field, encode_field, read_field, write_field, FieldFile, HEADER_LEN, MAGIC, VERSION,
};
pub use report::{write_reports, REPORT_HEADER};
pub use trajectory::{read_trajectory, write_trajectory, CONFIG_COPY, INDEX_FILE, META_FILE};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("validation error: {0}")]
    Validation(String),
    #[error("format error: {0}")]
    Format(String),
}

impl From<csv::Error> for IoError {
    fn from(e: csv::Error) -> Self {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => IoError::Io(io),
            other => IoError::Format(format!("{other:?}")),
        }
    }
}
