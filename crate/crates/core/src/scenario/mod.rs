//! Scenario configuration, the three-case experiment matrix,
//! orchestration across a worker pool, and result emission.

mod config;
mod matrix;
mod plot;
mod runner;

pub use config::{
    parse_config, ClassOverrides, McsMode, ScenarioConfig, TraceSpec, TrajectorySpec, MODE_NAMES,
};
pub use matrix::{CaseOneSpec, CaseThreeSpec, CaseTwoSpec, MatrixSpec, ScenarioMatrix};
pub use plot::{
    emit_plot_data, parse_results_csv, summaries_from_reports, PlotAxis, PlotFile, SummaryPoint,
};
pub use runner::{results_csv, run_matrix, run_scenario, MatrixOutcome};
