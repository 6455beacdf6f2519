use std::path::PathBuf;

/// Failures of the harness and the front end. Every variant is a usage or
/// input problem from the caller's side, reported with exit code 2.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] vbht_core::Error),
    #[error("line {line}: cannot read {text:?} as a finite number")]
    Parse { line: usize, text: String },
    #[error("line {line}: expected a single column, found {columns}")]
    Columns { line: usize, columns: usize },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot build thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
