//! Reference governor, tracking MPC with the adaptive-aware first move,
//! constraint tightening and terminal ingredients.

mod controller;
mod reference;
mod terminal;
mod tighten;

pub use controller::{
    solve_intermediate, solve_reference_governor, solve_tracking_mpc, stage0_box, tracking_cost, GovernorConfig, MpcConfig,
    TrackingSolution,
};
pub use reference::ReferenceTrajectory;
pub use terminal::{lqr_gain, solve_dare, terminal_ingredients, verify_terminal_clf, ClfReport, TerminalIngredients, TerminalOptions};
pub use tighten::{growth_sum, tighten_constraints, TightenedSets, TighteningOptions};
