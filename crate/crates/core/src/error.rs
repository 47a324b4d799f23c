use thiserror::Error;

use crate::net::{DemandId, LinkId};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("topology: {0}")]
    Topology(String),
    #[error("demand {id}: {reason}")]
    Demand { id: DemandId, reason: String },
    #[error("parameters: {0}")]
    Params(String),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error("coincident channel: neighbour centre {neighbour_hz} Hz lies inside primary band at {primary_hz} Hz")]
    CoincidentChannel { primary_hz: f64, neighbour_hz: f64 },
    #[error("exact solver refused: {0}")]
    ExactRefused(String),
    #[error("results describe different instances: {0}")]
    InstanceMismatch(String),
    #[error("experiment: {0}")]
    Experiment(String),
    #[error("state dump: {0}")]
    Dump(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{}: {err}", path.display())]
    File { path: std::path::PathBuf, err: std::io::Error },
}

impl Error {
    /// Short machine-readable tag, used in CLI error records and report
    /// failure rows.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Topology(_) => "topology",
            Error::Demand { .. } => "demand",
            Error::Params(_) => "params",
            Error::Spectrum(_) => "spectrum",
            Error::CoincidentChannel { .. } => "coincident-channel",
            Error::ExactRefused(_) => "exact-refused",
            Error::InstanceMismatch(_) => "instance-mismatch",
            Error::Experiment(_) => "experiment",
            Error::Dump(_) => "dump",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
            Error::Io(_) | Error::File { .. } => "io",
        }
    }
}

/// `fs::read_to_string` with the path kept in the error.
pub fn read_file(path: &std::path::Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|err| Error::File { path: path.to_path_buf(), err })
}

/// Rejections raised by the slot grid. A rejected call leaves the state
/// untouched.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpectrumError {
    #[error("slot range {first}..={last} outside 1..={slots}")]
    OutOfRange { first: usize, last: usize, slots: usize },
    #[error("slot {slot} on link {link} already owned by demand {owner}")]
    Overlap { link: LinkId, slot: usize, owner: DemandId },
    #[error("demand {0} is already assigned")]
    AlreadyAssigned(DemandId),
    #[error("zero-width allocation")]
    ZeroWidth,
    #[error("path for demand {0} has no links")]
    EmptyPath(DemandId),
}
