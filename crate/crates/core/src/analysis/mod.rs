//! Norms, repetition statistics, resource records, sampling and reports.

pub mod formulas;
pub mod montecarlo;
pub mod report;
pub mod resources;
pub mod verify;

pub use formulas::{
    fit_expected_rounds, log_spaced_grid, mps_ring_success_probability, render_repetitions, repetition_recursion,
    repetitions_table, vbs_norm, LogBase, RepetitionModel,
};
pub use montecarlo::{monte_carlo_success, sublattice_retry_simulation, MonteCarlo, RetryStatistics};
pub use report::{prepare, verify, Check, Report, RunSpec};
pub use resources::{depth_grid, method_circuit, resource_summary, Method, ResourceRecord};
pub use verify::{aklt_energy, data_register, projector_residuals, reference_vbs_state};
