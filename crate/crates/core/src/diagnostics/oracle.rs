use std::sync::Arc;

use crate::error::Result;
use crate::linalg::{Matrix, Vector};
use crate::network::FeatureNetwork;
use crate::plant::MatchedUncertainty;
use crate::rng::SimRng;

pub type ResidualFn = Arc<dyn Fn(&Vector) -> Vector + Send + Sync>;

/// Ground truth `h(x) = W*ᵀφ*(x) + ε*(x)` for synthetic scenarios.
#[derive(Clone)]
pub struct IdealOracle {
    pub w_star: Matrix,
    pub features: FeatureNetwork,
    /// `ε*`; `None` means the uncertainty is exactly representable.
    pub residual: Option<ResidualFn>,
}

impl std::fmt::Debug for IdealOracle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("IdealOracle")
            .field("w_star", &self.w_star)
            .field("exact", &self.residual.is_none())
            .finish()
    }
}

impl IdealOracle {
    pub fn exact(w_star: Matrix, features: FeatureNetwork) -> Self {
        Self {
            w_star,
            features,
            residual: None,
        }
    }

    pub fn h(&self, x: &Vector) -> Vector {
        let base = self.w_star.tr_mul(&self.features.forward_features(x));
        match &self.residual {
            Some(eps) => base + eps(x),
            None => base,
        }
    }

    /// `ε_j = h − W*ᵀφ_j` for the features the controller actually used.
    pub fn reconstruction_error(&self, h: &Vector, phi: &Vector) -> Vector {
        h - self.w_star.tr_mul(phi)
    }
}

impl MatchedUncertainty for IdealOracle {
    fn input_dim(&self) -> usize {
        self.w_star.ncols()
    }

    fn evaluate(&self, x: &Vector, _t: usize, _rng: &mut SimRng) -> Result<Vector> {
        Ok(self.h(x))
    }
}
