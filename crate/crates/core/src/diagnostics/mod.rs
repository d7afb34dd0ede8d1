//! Runtime certification of the adaptation, value-function, ISS, tube and
//! composite-Lyapunov inequalities along logged trajectories.

mod checks;
mod constants;
mod oracle;
mod trace;

pub use checks::{
    check_iss, check_mean_square_small, check_va_decrease, estimate_beta, reports_to_csv, reports_to_text, composite_check, tube_report, va,
    CheckReport, IssReport, CompositeReport, TubeReport, VaReport,
};
pub use constants::{estimate_lipschitz_c3, estimate_value_bounds, BoxRegion, ConstantInputs, StabilityConstants};
pub use oracle::{IdealOracle, ResidualFn};
pub use trace::{StepRecord, TrajectoryTrace};
