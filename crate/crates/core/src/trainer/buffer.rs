use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

/// Where a pushed pair ended up.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    Appended(usize),
    Replaced(usize),
    Discarded,
}

/// Decides what to do with a new label once the buffer is full.
pub trait SelectionStrategy: Send + Sync {
    /// Returns the slot to overwrite, or `None` to drop the candidate.
    fn choose(&self, labels: &[Vector], candidate: &Vector) -> Option<usize>;
}

/// Keeps the label set whose Gram matrix `TTᵀ` has the largest smallest
/// singular value. A replacement happens only when it strictly improves on
/// the current minimum.
#[derive(Debug, Clone, Copy, Default)]
pub struct SvdSelection;

/// Relative improvement required before a replacement counts as strict.
const SVD_IMPROVEMENT_TOL: f64 = 1e-12;

fn min_eig(gram: &Matrix) -> f64 {
    if gram.nrows() == 1 {
        return gram[(0, 0)];
    }
    gram.clone().symmetric_eigenvalues().min()
}

impl SelectionStrategy for SvdSelection {
    fn choose(&self, labels: &[Vector], candidate: &Vector) -> Option<usize> {
        let m = candidate.len();
        let mut gram = Matrix::zeros(m, m);
        for t in labels {
            gram += t * t.transpose();
        }
        let current = min_eig(&gram);
        let with_new = &gram + candidate * candidate.transpose();
        let mut best: Option<(usize, f64)> = None;
        for (i, t) in labels.iter().enumerate() {
            let score = min_eig(&(&with_new - t * t.transpose()));
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((i, score));
            }
        }
        let (slot, score) = best?;
        let scale = gram.trace().abs().max(candidate.norm_squared()).max(f64::MIN_POSITIVE);
        (score - current > SVD_IMPROVEMENT_TOL * scale).then_some(slot)
    }
}

/// Overwrites the oldest entry.
#[derive(Debug, Default)]
pub struct FifoSelection {
    next: std::sync::atomic::AtomicUsize,
}

impl SelectionStrategy for FifoSelection {
    fn choose(&self, labels: &[Vector], _candidate: &Vector) -> Option<usize> {
        let slot = self.next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        Some(slot % labels.len().max(1))
    }
}

/// Labelled pairs `(x_t, u^a_t)` collected along the closed loop.
pub struct ReplayBuffer {
    capacity: usize,
    states: Vec<Vector>,
    labels: Vec<Vector>,
    strategy: Box<dyn SelectionStrategy>,
}

impl std::fmt::Debug for ReplayBuffer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ReplayBuffer")
            .field("capacity", &self.capacity)
            .field("len", &self.states.len())
            .finish()
    }
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        Self::with_strategy(capacity, Box::new(SvdSelection))
    }

    pub fn with_strategy(capacity: usize, strategy: Box<dyn SelectionStrategy>) -> Self {
        Self {
            capacity,
            states: Vec::with_capacity(capacity),
            labels: Vec::with_capacity(capacity),
            strategy,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[Vector] {
        &self.states
    }

    pub fn labels(&self) -> &[Vector] {
        &self.labels
    }

    /// `T` with one stored label per column.
    pub fn label_matrix(&self) -> Matrix {
        let m = self.labels.first().map_or(0, Vector::len);
        Matrix::from_fn(m, self.labels.len(), |r, c| self.labels[c][r])
    }

    /// Smallest singular value of `TTᵀ`.
    pub fn min_singular_value(&self) -> f64 {
        if self.labels.is_empty() {
            return 0.0;
        }
        let t = self.label_matrix();
        min_eig(&(&t * t.transpose())).max(0.0)
    }

    pub fn push_with_selection(&mut self, state: Vector, label: Vector) -> Placement {
        if self.capacity == 0 {
            return Placement::Discarded;
        }
        if self.states.len() < self.capacity {
            self.states.push(state);
            self.labels.push(label);
            return Placement::Appended(self.states.len() - 1);
        }
        match self.strategy.choose(&self.labels, &label) {
            Some(i) => {
                self.states[i] = state;
                self.labels[i] = label;
                Placement::Replaced(i)
            }
            None => Placement::Discarded,
        }
    }
}

/// Training set `D_k`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    pub states: Vec<Vector>,
    pub labels: Vec<Vector>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Draws `p0` distinct pairs.
pub fn sample_dataset<R: Rng + ?Sized>(buffer: &ReplayBuffer, p0: usize, rng: &mut R) -> Result<Dataset> {
    if p0 > buffer.len() {
        return Err(Error::NotEnoughData {
            requested: p0,
            available: buffer.len(),
        });
    }
    let picks = index::sample(rng, buffer.len(), p0);
    Ok(Dataset {
        states: picks.iter().map(|i| buffer.states[i].clone()).collect(),
        labels: picks.iter().map(|i| buffer.labels[i].clone()).collect(),
    })
}
