use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::network::AuthorityBounds;
use crate::plant::{ConstraintSets, ControlAffineModel};

/// `X_r`, `U_r` and `U′` (inputs as symmetric ∞-norm boxes).
#[derive(Debug, Clone, PartialEq)]
pub struct TightenedSets {
    pub state_lower: Vector,
    pub state_upper: Vector,
    /// Radius of `U_r`.
    pub u_ref_max: f64,
    /// Radius of `U′ = {‖u‖_∞ ≤ u_max − u_max^a}`.
    pub u_prime: f64,
    /// Radius of the original input set `U`.
    pub u_max: f64,
    pub u_max_a: f64,
    pub w_max_prime: f64,
    /// Per-coordinate margin removed from `X`.
    pub state_margin: f64,
    /// Growth constant `L̄ = L_f + L_g u_max^r` used for the margin.
    pub growth: f64,
}

impl TightenedSets {
    pub fn contains_state(&self, x: &Vector) -> bool {
        x.iter()
            .zip(self.state_lower.iter().zip(self.state_upper.iter()))
            .all(|(v, (lo, hi))| *v >= *lo && *v <= *hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TighteningOptions {
    /// Fraction of `u_max − u_max^a` removed to form `U_r`.
    pub input_fraction: f64,
    /// Overrides the growth-based state margin.
    pub state_margin: Option<f64>,
}

impl Default for TighteningOptions {
    fn default() -> Self {
        Self {
            input_fraction: 0.1,
            state_margin: None,
        }
    }
}

/// `Σ_{i<N} L̄^i`.
pub fn growth_sum(growth: f64, horizon: usize) -> f64 {
    (0..horizon).map(|i| growth.powi(i as i32)).sum()
}

/// Margin-based tightening: `X_r` shrinks every coordinate of `X` by
/// `ρ_x = w′_max Σ_{i<N} L̄^i` unless overridden.
pub fn tighten_constraints(
    sets: &ConstraintSets,
    authority: &AuthorityBounds,
    model: &ControlAffineModel,
    horizon: usize,
    opts: &TighteningOptions,
) -> Result<TightenedSets> {
    if !(0.0..1.0).contains(&opts.input_fraction) {
        return Err(Error::Config(format!("input margin fraction {} must lie in [0, 1)", opts.input_fraction)));
    }
    let u_prime = sets.u_max - authority.u_max_a;
    if u_prime <= 0.0 {
        return Err(Error::Config(format!("empty U′: u_max^a = {} ≥ u_max = {}", authority.u_max_a, sets.u_max)));
    }
    let u_ref_max = u_prime * (1.0 - opts.input_fraction);
    let growth = model.lipschitz_f + model.lipschitz_g * u_ref_max;
    let margin = match opts.state_margin {
        Some(m) if m >= 0.0 => m,
        Some(m) => return Err(Error::Config(format!("state margin {m} is negative"))),
        None => authority.w_max_prime * growth_sum(growth, horizon),
    };
    let half = sets.half_widths();
    for (coordinate, hw) in half.iter().enumerate() {
        if margin >= *hw {
            return Err(Error::EmptyTightenedSet {
                coordinate,
                margin,
                half_width: *hw,
            });
        }
    }
    Ok(TightenedSets {
        state_lower: sets.state_lower.add_scalar(margin),
        state_upper: sets.state_upper.add_scalar(-margin),
        u_ref_max,
        u_prime,
        u_max: sets.u_max,
        u_max_a: authority.u_max_a,
        w_max_prime: authority.w_max_prime,
        state_margin: margin,
        growth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::control_authority_bounds;
    use crate::plant::{wing_rock_model, wing_rock_sets};

    #[test]
    fn zero_disturbance_keeps_sets() {
        let sets = wing_rock_sets(0.0);
        let auth = AuthorityBounds { u_max_a: 0.0, w_max_prime: 0.0 };
        let opts = TighteningOptions { input_fraction: 0.0, state_margin: None };
        let t = tighten_constraints(&sets, &auth, &wing_rock_model(), 20, &opts).unwrap();
        assert_eq!(t.state_lower, sets.state_lower);
        assert_eq!(t.state_upper, sets.state_upper);
        assert_eq!(t.u_ref_max, sets.u_max);
        assert_eq!(t.u_prime, sets.u_max);
    }

    #[test]
    fn oversized_disturbance_empties_first_coordinate() {
        let sets = wing_rock_sets(0.0);
        let auth = AuthorityBounds { u_max_a: 0.0, w_max_prime: std::f64::consts::PI / 6.0 };
        let err = tighten_constraints(&sets, &auth, &wing_rock_model(), 1, &TighteningOptions::default()).unwrap_err();
        assert!(matches!(err, Error::EmptyTightenedSet { coordinate: 0, .. }));
    }

    #[test]
    fn benchmark_inclusions_by_interval_comparison() {
        let sets = wing_rock_sets(0.01);
        let model = wing_rock_model();
        let auth = control_authority_bounds(&[0.15], 2.0, model.delta_g, 0.01, sets.u_max).unwrap();
        let opts = TighteningOptions { state_margin: Some(0.05), ..Default::default() };
        let t = tighten_constraints(&sets, &auth, &model, 50, &opts).unwrap();
        for j in 0..2 {
            assert!(sets.state_lower[j] < t.state_lower[j] && t.state_upper[j] < sets.state_upper[j]);
            assert!(t.state_lower[j] < t.state_upper[j]);
        }
        assert!(0.0 < t.u_ref_max && t.u_ref_max < t.u_prime && t.u_prime < sets.u_max);

        let derived = tighten_constraints(&sets, &auth, &model, 3, &TighteningOptions::default()).unwrap();
        let expected = auth.w_max_prime * (1.0 + derived.growth + derived.growth.powi(2));
        assert!((derived.state_margin - expected).abs() < 1e-15);
    }
}
