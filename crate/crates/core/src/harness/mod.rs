//! Scenario configuration, the closed-loop simulator, controller comparison,
//! log export and diagnostics over finished runs.

mod analysis;
mod compare;
mod config;
mod export;
mod scenario;

pub use analysis::{estimate_constants, run_diagnostics, DiagnosticOptions, DiagnosticsReport};
pub use compare::{autocorrelation, compare_controllers, dominant_period, CompareRow, Comparison};
pub use config::{
    ConstraintSection, GovernorSection, ModelKind, ModelSection, MpcSection, NetworkSection, ScenarioConfig, SimulationSection, UncertaintyKind,
    UncertaintySection, Variant,
};
pub use export::{csv_rows, export_csv, export_plot_data, load_log_json, log_to_csv, parse_csv, plot_data, save_log_json, CsvRow};
pub use scenario::{run_scenario, Event, RunSummary, Scenario, SimulationLog, TrainingSummary};
