//! Experiment harness for `collabtop-core`: configuration, ratings ingestion,
//! parallel trial runs and CSV output.

pub mod config;
pub mod error;
pub mod ingest;
pub mod record;
pub mod trials;
pub mod verify;

pub use config::{Algo, ExperimentConfig, Point, Source, SweepAxis};
pub use error::{HarnessError, Result};
pub use ingest::{ingest_ratings, ingest_reader, Ingested, Mode};
pub use record::{emit_csv, read_csv, summarize, write_csv, Summary, TrialRecord};
pub use trials::{build_instance, heterogeneous, linear_means, run_one, run_trials, run_trials_full, Built, Trial};
