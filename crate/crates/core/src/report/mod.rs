//! Run persistence, comparison tables, SVG charts and the three-way
//! methods table.

pub mod format;
mod manifest;
mod svg;
mod table3;
mod tables;

use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

pub use manifest::{load_models, load_run, metrics_snapshot, persist_run, run_dir_name, scenario_digest, RunManifest, MANIFEST_FILE};
pub use svg::{render_chart, ChartKind};
pub use table3::{latest_framework_manifest, load_table3_fixture, render_table3, MeasuredValues, Table3Fixture, Table3Row};
pub use tables::{render_csv, render_markdown, table_cells};

use crate::pipeline::PipelineError;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: unreadable: {message}", .path.display())]
    Json { path: PathBuf, message: String },
    #[error("missing metric for `{0}`")]
    MissingMetric(String),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error("csv: {0}")]
    Csv(String),
}

impl ReportError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        ReportError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(path: impl Into<PathBuf>, err: impl fmt::Display) -> Self {
        ReportError::Json {
            path: path.into(),
            message: err.to_string(),
        }
    }

    pub(crate) fn csv(err: impl fmt::Display) -> Self {
        ReportError::Csv(err.to_string())
    }
}
