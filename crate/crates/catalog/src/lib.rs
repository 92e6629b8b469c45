//! Recording library on disk, view computation, and the HTTP API.

pub mod api;
pub mod error;
pub mod store;
pub mod views;

pub use error::{ApiError, CatalogError, ErrorCode};
pub use store::{Catalog, CrashPoint, IndexEntry, RecordingFilter, RecordingSummary, Sidecar};
pub use views::{Format, Target, VizData, VizRequest};
