//! Experiment runner: built-in scenarios, rate studies, adaptive studies and
//! their CSV/VTK output.

pub mod config;
pub mod export;
pub mod scenario;
pub mod study;

pub use config::RunConfig;
pub use export::{export_vtk, save_records_csv, save_table_csv, write_records_csv, write_table_csv};
pub use scenario::{registry, scenario, Scenario, SeedMesh, StudyType, SCENARIO_NAMES};
pub use study::{
    fraction_near_points, fraction_touching_fracture_interiors, loglog_slope, predicted_bytes, records_slope,
    run_afem_study, run_estimator_comparison, run_uniform_study, slope_window, smallest_decile, AfemStudy,
    ConvergenceRow, ConvergenceTable, EstimatorComparison, UniformOptions,
};
