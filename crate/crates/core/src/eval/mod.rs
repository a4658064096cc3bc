//! Model scoring (held-out perplexity, C_v coherence) and the two-stage
//! coherence-driven search over model family and topic count.

mod coherence;
mod perplexity;
mod selection;

pub use coherence::{coherence_cv, npmi, CoherenceReport, CooccurrenceStats, DEFAULT_EPSILON};
pub use perplexity::{perplexity, PerplexityScore};
pub use selection::{
    evaluate_cell, run_selection_grid, run_staged_selection, write_eval_grid_csv, EvalCell,
    FailedCell, GridCorpora, GridSettings, Implementation, SelectionGrid, SelectionResult,
};
