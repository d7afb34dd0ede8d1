use std::thread::JoinHandle;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::network::FeatureNetwork;
use crate::rng::SimRng;

use super::buffer::Dataset;
use super::sgd::{train, TrainerConfig, TrainingOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleAction {
    Collect,
    /// A job starts at `T_k`.
    StartTraining(usize),
    /// Weights produced by the pending job are published at `t_j`.
    SwapWeights(usize),
}

/// Trigger bookkeeping for `T_k` and `t_j`. Triggers are periodic after
/// `T_1`; a trigger that arrives while a job is in flight is skipped.
#[derive(Debug, Clone)]
pub struct ScheduleState {
    next_trigger: usize,
    period: usize,
    latency: usize,
    min_samples: usize,
    pending: Option<usize>,
    completed: usize,
}

impl ScheduleState {
    pub fn new(cfg: &TrainerConfig) -> Self {
        Self {
            next_trigger: cfg.first_trigger,
            period: cfg.period,
            latency: cfg.latency,
            min_samples: cfg.p0,
            pending: None,
            completed: 0,
        }
    }

    pub fn pending_since(&self) -> Option<usize> {
        self.pending
    }

    /// Number of swaps emitted so far.
    pub fn completed(&self) -> usize {
        self.completed
    }

    /// Actions for step `t`, given how many samples the buffer holds.
    /// Swaps come before triggers so a job may start the step its
    /// predecessor lands.
    pub fn tick(&mut self, t: usize, buffered: usize) -> Vec<ScheduleAction> {
        let mut actions = vec![ScheduleAction::Collect];
        if let Some(start) = self.pending {
            if t >= start + self.latency {
                self.pending = None;
                self.completed += 1;
                actions.push(ScheduleAction::SwapWeights(t));
            }
        }
        if t >= self.next_trigger {
            if self.pending.is_none() && buffered >= self.min_samples {
                self.pending = Some(t);
                actions.push(ScheduleAction::StartTraining(t));
            }
            if buffered >= self.min_samples {
                while self.next_trigger <= t {
                    self.next_trigger += self.period;
                }
            }
        }
        actions
    }
}

/// Convenience wrapper matching the free-function form.
pub fn schedule_tick(state: &mut ScheduleState, t: usize, buffered: usize) -> Vec<ScheduleAction> {
    state.tick(t, buffered)
}

/// A training run either already finished inline or running on a worker.
#[derive(Debug)]
pub enum TrainingJob {
    Inline(Result<TrainingOutcome>),
    Worker(JoinHandle<Result<TrainingOutcome>>),
}

impl TrainingJob {
    /// Launches training on an immutable snapshot of the stack, the frozen
    /// output layer and the dataset.
    pub fn start(hidden: FeatureNetwork, k_frozen: Matrix, data: Dataset, cfg: TrainerConfig, mut rng: SimRng) -> Self {
        if cfg.asynchronous {
            TrainingJob::Worker(std::thread::spawn(move || train(&hidden, &k_frozen, &data, &cfg, &mut rng)))
        } else {
            TrainingJob::Inline(train(&hidden, &k_frozen, &data, &cfg, &mut rng))
        }
    }

    pub fn finish(self) -> Result<TrainingOutcome> {
        match self {
            TrainingJob::Inline(r) => r,
            TrainingJob::Worker(h) => h
                .join()
                .map_err(|_| Error::TrainingDiverged(f64::NAN))?,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Vector;
    use crate::network::Activation;
    use crate::rng::{stream, Stream};

    fn cfg() -> TrainerConfig {
        TrainerConfig { p0: 5, p_max: 10, first_trigger: 5, period: 10, latency: 1, ..Default::default() }
    }

    #[test]
    fn collect_only_before_first_trigger() {
        let mut s = ScheduleState::new(&cfg());
        for t in 0..5 {
            assert_eq!(s.tick(t, t), vec![ScheduleAction::Collect]);
        }
    }

    #[test]
    fn synchronous_swap_follows_start() {
        let mut s = ScheduleState::new(&cfg());
        let mut log = Vec::new();
        for t in 0..30 {
            log.push((t, s.tick(t, t.min(10))));
        }
        assert!(log[5].1.contains(&ScheduleAction::StartTraining(5)));
        assert!(log[6].1.contains(&ScheduleAction::SwapWeights(6)));
        assert!(log[15].1.contains(&ScheduleAction::StartTraining(15)));
        assert!(log[16].1.contains(&ScheduleAction::SwapWeights(16)));
        assert_eq!(s.completed(), 3);
    }

    #[test]
    fn trigger_waits_for_data() {
        let mut s = ScheduleState::new(&cfg());
        assert_eq!(s.tick(5, 3), vec![ScheduleAction::Collect]);
        assert!(s.tick(6, 5).contains(&ScheduleAction::StartTraining(6)));
    }

    #[test]
    fn swaps_increment_generation() {
        let mut rng = stream(1, Stream::NetworkInit);
        let acts = [Activation::Tanh];
        let mut net = FeatureNetwork::random(&[2, 3], &acts, &mut rng).unwrap();
        let k = Matrix::from_element(4, 1, 0.3);
        let data = Dataset {
            states: vec![Vector::from_row_slice(&[0.1, 0.2]); 5],
            labels: vec![Vector::from_element(1, 0.1); 5],
        };
        for expected in 1..=2 {
            let job = TrainingJob::start(net.clone(), k.clone(), data.clone(), cfg(), stream(expected, Stream::Training));
            net = job.finish().unwrap().network;
            assert_eq!(net.generation, expected as usize);
        }
    }

    #[test]
    fn worker_and_inline_agree() {
        let mut rng = stream(2, Stream::NetworkInit);
        let net = FeatureNetwork::random(&[2, 4, 3], &[Activation::Relu, Activation::Tanh], &mut rng).unwrap();
        let k = Matrix::from_element(4, 1, -0.2);
        let data = Dataset {
            states: (0..8).map(|i| Vector::from_row_slice(&[0.1 * i as f64, -0.05 * i as f64])).collect(),
            labels: (0..8).map(|i| Vector::from_element(1, 0.02 * i as f64)).collect(),
        };
        let inline = TrainingJob::start(net.clone(), k.clone(), data.clone(), cfg(), stream(3, Stream::Training));
        let async_cfg = TrainerConfig { asynchronous: true, ..cfg() };
        let worker = TrainingJob::start(net, k, data, async_cfg, stream(3, Stream::Training));
        assert_eq!(inline.finish().unwrap().network, worker.finish().unwrap().network);
    }
}
