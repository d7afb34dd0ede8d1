//! Hidden-layer training: replay buffer, loss and gradient, SGD, scheduling.

mod buffer;
mod schedule;
mod sgd;

pub use buffer::{sample_dataset, Dataset, FifoSelection, Placement, ReplayBuffer, SelectionStrategy, SvdSelection};
pub use schedule::{schedule_tick, ScheduleAction, ScheduleState, TrainingJob};
pub use sgd::{dataset_loss, gradient, train, TrainerConfig, TrainingOutcome};
