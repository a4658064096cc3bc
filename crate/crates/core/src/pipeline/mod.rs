//! Stage orchestration, run configuration and the static HTML report.

mod config;
mod report;
mod run;

pub use config::{CorpusSettings, GridParams, KgSettings, PipelineConfig};
pub use report::{emit_reports, ReportOutcome, SectionStatus, REPORT_FILE};
pub use run::{
    preflight, run_pipeline, run_until, run_with_jobs, sha256_hex, RunManifest, Stage, StageRecord, StageStatus,
    MANIFEST_FILE,
};
