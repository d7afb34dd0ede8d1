use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{matrix_from_rows, Matrix, Vector};
use crate::mpc::TighteningOptions;
use crate::network::Activation;
use crate::ocp::QpSettings;
use crate::plant::{GainSchedule, GainWindow, UncertaintySpec, WING_ROCK_NOISE_HALF_WIDTH, WING_ROCK_V0};
use crate::trainer::TrainerConfig;

/// Controller under test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Tube MPC alone, `u^a ≡ 0`.
    Tube,
    /// One hidden layer of three neurons.
    Shallow,
    Deep,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Tube, Variant::Shallow, Variant::Deep];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Tube => "tube",
            Variant::Shallow => "shallow",
            Variant::Deep => "deep",
        }
    }

    pub fn adaptive(self) -> bool {
        self != Variant::Tube
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tube" | "tubeonly" => Ok(Variant::Tube),
            "shallow" => Ok(Variant::Shallow),
            "deep" => Ok(Variant::Deep),
            other => Err(Error::Parse(format!("unknown variant `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    WingRock,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub kind: ModelKind,
    /// Rows of `A` (linear models).
    pub a: Vec<Vec<f64>>,
    /// Rows of `B` (linear models).
    pub b: Vec<Vec<f64>>,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            kind: ModelKind::WingRock,
            a: Vec::new(),
            b: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstraintSection {
    pub state_lower: Vec<f64>,
    pub state_upper: Vec<f64>,
    pub u_max: f64,
    /// Bound on `‖g h‖`; estimated by sampling when absent.
    pub w_max: Option<f64>,
    pub disturbance_samples: usize,
    pub disturbance_safety: f64,
    pub tightening: TighteningOptions,
}

impl Default for ConstraintSection {
    fn default() -> Self {
        Self {
            state_lower: vec![-PI / 6.0, -PI / 3.0],
            state_upper: vec![PI / 6.0, PI / 3.0],
            u_max: PI / 4.0,
            w_max: None,
            disturbance_samples: 10_000,
            disturbance_safety: 1.0,
            tightening: TighteningOptions {
                state_margin: Some(0.05),
                ..TighteningOptions::default()
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UncertaintyKind {
    None,
    WingRock,
    /// `h = W*ᵀφ_0(x)` with the controller's initial deep features.
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UncertaintySection {
    pub kind: UncertaintyKind,
    pub basis_weights: Vec<f64>,
    pub windows: Vec<GainWindow>,
    pub repeat_period: Option<usize>,
    pub noise_half_width: f64,
    pub noise_std: f64,
    pub saturation: f64,
    /// Rows of `W*` (oracle only), one row per feature.
    pub w_star: Vec<Vec<f64>>,
}

impl Default for UncertaintySection {
    fn default() -> Self {
        let spec = UncertaintySpec::wing_rock();
        Self {
            kind: UncertaintyKind::WingRock,
            basis_weights: WING_ROCK_V0.to_vec(),
            windows: spec.schedule.windows,
            repeat_period: spec.schedule.repeat_period,
            noise_half_width: WING_ROCK_NOISE_HALF_WIDTH,
            noise_std: spec.noise_std,
            saturation: spec.saturation,
            w_star: Vec::new(),
        }
    }
}

impl UncertaintySection {
    pub fn spec(&self) -> UncertaintySpec {
        UncertaintySpec {
            basis_weights: self.basis_weights.clone(),
            schedule: GainSchedule {
                windows: self.windows.clone(),
                repeat_period: self.repeat_period,
            },
            noise_half_width: self.noise_half_width,
            noise_std: self.noise_std,
            saturation: self.saturation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkSection {
    pub deep_sizes: Vec<usize>,
    pub deep_activations: Vec<String>,
    pub shallow_activation: String,
    /// Column bounds `W̄_i`, one per input channel.
    pub bounds: Vec<f64>,
    pub theta: f64,
    /// Retrain the hidden stack in the background.
    pub train_hidden: bool,
    /// Store the adaptive input after the weight update as the label.
    pub label_after_update: bool,
}

impl Default for NetworkSection {
    fn default() -> Self {
        Self {
            deep_sizes: vec![2, 5, 5, 3],
            deep_activations: vec!["relu".into(), "relu".into(), "tanh".into()],
            shallow_activation: "tanh".into(),
            bounds: vec![0.2],
            theta: 0.05,
            train_hidden: true,
            label_after_update: false,
        }
    }
}

impl NetworkSection {
    pub fn deep_activations(&self) -> Result<Vec<Activation>> {
        self.deep_activations.iter().map(|s| s.parse()).collect()
    }

    /// Sizes and activations for `variant`; the shallow network is fixed to
    /// one hidden layer of three neurons.
    pub fn architecture(&self, variant: Variant, state_dim: usize) -> Result<(Vec<usize>, Vec<Activation>)> {
        match variant {
            Variant::Deep | Variant::Tube => Ok((self.deep_sizes.clone(), self.deep_activations()?)),
            Variant::Shallow => Ok((vec![state_dim, 3], vec![self.shallow_activation.parse()?])),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MpcSection {
    pub horizon: usize,
    pub q: Vec<Vec<f64>>,
    pub r: Vec<Vec<f64>>,
    /// Tube level `c`; defaults to the terminal level `α`.
    pub tube_level: Option<f64>,
    pub terminal_inflation: f64,
    pub terminal_samples: usize,
    pub solver: QpSettings,
}

impl Default for MpcSection {
    fn default() -> Self {
        Self {
            horizon: 20,
            q: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            r: vec![vec![1.0]],
            tube_level: None,
            terminal_inflation: 0.1,
            terminal_samples: 2000,
            solver: QpSettings::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GovernorSection {
    pub horizon: usize,
    pub q: Vec<Vec<f64>>,
    pub r: Vec<Vec<f64>>,
}

impl Default for GovernorSection {
    fn default() -> Self {
        Self {
            horizon: 60,
            q: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            r: vec![vec![1.0]],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationSection {
    pub steps: usize,
    pub seed: u64,
    pub x0: Vec<f64>,
    pub variant: Variant,
    /// Also solve the tracking problem from the nominal prediction so the
    /// decomposed decrease checks can run.
    pub record_intermediate: bool,
    pub output_dir: Option<String>,
}

impl Default for SimulationSection {
    fn default() -> Self {
        Self {
            steps: 300,
            seed: 0,
            x0: vec![PI / 30.0, PI / 12.0],
            variant: Variant::Deep,
            record_intermediate: true,
            output_dir: None,
        }
    }
}

/// Everything a run needs. Serialized as TOML with one table per section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub model: ModelSection,
    pub constraints: ConstraintSection,
    pub uncertainty: UncertaintySection,
    pub network: NetworkSection,
    pub trainer: TrainerConfig,
    pub mpc: MpcSection,
    pub governor: GovernorSection,
    pub simulation: SimulationSection,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            model: ModelSection::default(),
            constraints: ConstraintSection::default(),
            uncertainty: UncertaintySection::default(),
            network: NetworkSection::default(),
            trainer: TrainerConfig {
                epochs: 500,
                asynchronous: true,
                ..TrainerConfig::default()
            },
            mpc: MpcSection::default(),
            governor: GovernorSection::default(),
            simulation: SimulationSection::default(),
        }
    }
}

pub(crate) fn matrix(rows: &[Vec<f64>], what: &str) -> Result<Matrix> {
    matrix_from_rows(rows).ok_or_else(|| Error::Config(format!("{what} must be a nonempty rectangular matrix")))
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("configuration is always serializable")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn x0(&self) -> Vector {
        Vector::from_vec(self.simulation.x0.clone())
    }

    /// Structural checks that do not need any solver.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        let d = self.constraints.state_lower.len();
        if d == 0 || self.constraints.state_upper.len() != d || self.simulation.x0.len() != d {
            return bad("state bounds and x0 must share a nonzero dimension".into());
        }
        if self.model.kind == ModelKind::WingRock && d != 2 {
            return bad("the wing-rock model has two states".into());
        }
        if self.mpc.horizon == 0 || self.governor.horizon == 0 {
            return bad("horizons must be positive".into());
        }
        if !(self.network.theta > 0.0 && self.network.theta < 1.0) {
            return bad(format!("θ = {} must lie in (0, 1)", self.network.theta));
        }
        let sizes = &self.network.deep_sizes;
        if sizes.len() < 2 || sizes[0] != d || self.network.deep_activations.len() != sizes.len() - 1 {
            return bad("deep network needs sizes [d, ...] and one activation per layer".into());
        }
        self.network.deep_activations()?;
        self.network.shallow_activation.parse::<Activation>()?;
        if self.uncertainty.kind == UncertaintyKind::Oracle && self.uncertainty.w_star.is_empty() {
            return bad("oracle uncertainty needs w_star".into());
        }
        self.trainer.validate()
    }

    /// Benchmark defaults with every constant spelled out.
    pub fn wing_rock() -> Self {
        Self::default()
    }

    /// Synthetic plant `x⁺ = 0.3x + (u + h)` in two channels with
    /// `h = W*ᵀφ_0(x)` built from the controller's own initial features.
    /// The hidden stack is frozen, so the reconstruction error is zero.
    pub fn oracle() -> Self {
        Self {
            model: ModelSection {
                kind: ModelKind::Linear,
                a: vec![vec![0.3, 0.0], vec![0.0, 0.3]],
                b: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            },
            constraints: ConstraintSection {
                state_lower: vec![-4.0, -4.0],
                state_upper: vec![4.0, 4.0],
                u_max: 1.0,
                w_max: None,
                tightening: TighteningOptions::default(),
                ..Default::default()
            },
            uncertainty: UncertaintySection {
                kind: UncertaintyKind::Oracle,
                w_star: vec![vec![0.1, -0.05], vec![0.08, 0.1], vec![-0.1, 0.05], vec![0.05, 0.12]],
                ..Default::default()
            },
            network: NetworkSection {
                deep_sizes: vec![2, 5, 3],
                deep_activations: vec!["relu".into(), "tanh".into()],
                bounds: vec![0.2, 0.2],
                theta: 0.5,
                train_hidden: false,
                ..Default::default()
            },
            trainer: Self::default().trainer,
            mpc: MpcSection {
                horizon: 3,
                q: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
                r: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
                ..Default::default()
            },
            governor: GovernorSection {
                horizon: 3,
                q: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
                r: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            },
            simulation: SimulationSection {
                steps: 5000,
                x0: vec![0.8, -0.6],
                ..Default::default()
            },
        }
    }
}
