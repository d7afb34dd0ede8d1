//! Optimization backend shared by the reference governor and the tracking MPC.

mod condense;
mod jacobian;
mod qp;
mod sqp;

pub use condense::{condense_linear_ocp, condense_ltv, AffineStage, Condensed, OcpSpec};
pub use jacobian::finite_diff_jacobian;
pub use qp::{solve_qp, solve_qp_warm, KktResiduals, OcpSolution, QpProblem, QpSettings, SolveStatus};
pub use sqp::{sqp_solve, SqpOutcome, SqpSettings};
