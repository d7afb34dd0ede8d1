use std::sync::Arc;

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::diagnostics::{IdealOracle, StepRecord, TrajectoryTrace};
use crate::error::{Error, Result};
use crate::linalg::{inf_norm, weighted_sq, Matrix, Vector};
use crate::mpc::{
    solve_intermediate, solve_reference_governor, solve_tracking_mpc, terminal_ingredients, tighten_constraints, GovernorConfig, MpcConfig,
    ReferenceTrajectory, TerminalOptions, TightenedSets,
};
use crate::network::{control_authority_bounds, AuthorityBounds, FeatureNetwork, OutputWeights};
use crate::ocp::{SolveStatus, SqpSettings};
use crate::plant::{
    estimate_disturbance_bound, step_true, wing_rock_model, ConstraintSets, ControlAffineModel, GainSchedule, MatchedUncertainty, NoUncertainty,
};
use crate::rng::{stream, SimRng, Stream};
use crate::trainer::{sample_dataset, ReplayBuffer, ScheduleAction, ScheduleState, TrainingJob};

use super::config::{matrix, ModelKind, ScenarioConfig, UncertaintyKind, Variant};

/// A configuration resolved into solver-ready objects: model, sets,
/// tightened sets, terminal ingredients and the governor reference.
#[derive(Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub variant: Variant,
    pub seed: u64,
    pub model: ControlAffineModel,
    pub sets: ConstraintSets,
    pub uncertainty: Arc<dyn MatchedUncertainty>,
    /// Ground truth for linear-in-features scenarios.
    pub oracle: Option<IdealOracle>,
    pub schedule: GainSchedule,
    /// Initial feature network (absent for the tube-only controller).
    pub network: Option<FeatureNetwork>,
    pub sigma: f64,
    pub authority: AuthorityBounds,
    pub tight: TightenedSets,
    pub mpc: MpcConfig,
    pub governor: GovernorConfig,
    pub reference: ReferenceTrajectory,
}

impl std::fmt::Debug for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Scenario")
            .field("variant", &self.variant)
            .field("seed", &self.seed)
            .field("model", &self.model)
            .field("authority", &self.authority)
            .field("tight", &self.tight)
            .finish_non_exhaustive()
    }
}

fn build_model(cfg: &ScenarioConfig) -> Result<ControlAffineModel> {
    match cfg.model.kind {
        ModelKind::WingRock => Ok(wing_rock_model()),
        ModelKind::Linear => ControlAffineModel::linear(matrix(&cfg.model.a, "model.a")?, matrix(&cfg.model.b, "model.b")?),
    }
}

/// Network the controller starts from. The stream depends only on the
/// seed, so the oracle and the deep controller see the same `φ_0`.
fn initial_network(cfg: &ScenarioConfig, variant: Variant, d: usize, seed: u64) -> Result<FeatureNetwork> {
    let (sizes, acts) = cfg.network.architecture(variant, d)?;
    FeatureNetwork::random(&sizes, &acts, &mut stream(seed, Stream::NetworkInit))
}

impl Scenario {
    /// Uses the variant and seed stored in the configuration.
    pub fn prepare(cfg: &ScenarioConfig) -> Result<Self> {
        Self::prepare_with(cfg, cfg.simulation.variant, cfg.simulation.seed)
    }

    pub fn prepare_with(cfg: &ScenarioConfig, variant: Variant, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let model = build_model(cfg)?;
        let d = model.state_dim();
        let m = model.input_dim();
        if cfg.network.bounds.len() != m {
            return Err(Error::Config(format!("need one column bound per input, got {} for m = {m}", cfg.network.bounds.len())));
        }
        let c = &cfg.constraints;
        let lower = Vector::from_vec(c.state_lower.clone());
        let upper = Vector::from_vec(c.state_upper.clone());
        let deep = initial_network(cfg, Variant::Deep, d, seed)?;

        let (uncertainty, oracle, schedule, estimated): (Arc<dyn MatchedUncertainty>, _, _, f64) = match cfg.uncertainty.kind {
            UncertaintyKind::None => (Arc::new(NoUncertainty { input_dim: m }), None, GainSchedule::default(), 0.0),
            UncertaintyKind::WingRock => {
                let spec = cfg.uncertainty.spec();
                let probe = ConstraintSets::new(lower.clone(), upper.clone(), c.u_max, 0.0)?;
                let w = match c.w_max {
                    Some(w) => w,
                    None => estimate_disturbance_bound(&model, &probe, &spec, c.disturbance_samples, c.disturbance_safety, 0)?,
                };
                let schedule = spec.schedule.clone();
                (Arc::new(spec), None, schedule, w)
            }
            UncertaintyKind::Oracle => {
                let w_star = matrix(&cfg.uncertainty.w_star, "uncertainty.w_star")?;
                if w_star.nrows() != deep.feature_dim() || w_star.ncols() != m {
                    return Err(Error::Dimension {
                        context: "oracle W* rows",
                        expected: deep.feature_dim(),
                        got: w_star.nrows(),
                    });
                }
                let sigma = deep.sigma()?;
                let w = c.w_max.unwrap_or(model.delta_g * w_star.norm() * sigma);
                let oracle = IdealOracle::exact(w_star, deep.clone());
                (Arc::new(oracle.clone()), Some(oracle), GainSchedule::default(), w)
            }
        };
        let sets = ConstraintSets::new(lower, upper, c.u_max, estimated)?;

        let network = if variant.adaptive() {
            Some(if variant == Variant::Deep { deep } else { initial_network(cfg, variant, d, seed)? })
        } else {
            None
        };
        let (sigma, authority) = match &network {
            Some(net) => {
                let sigma = net.sigma()?;
                (sigma, control_authority_bounds(&cfg.network.bounds, sigma, model.delta_g, sets.w_max, sets.u_max)?)
            }
            None => (
                0.0,
                AuthorityBounds {
                    u_max_a: 0.0,
                    w_max_prime: sets.w_max,
                },
            ),
        };
        let tight = tighten_constraints(&sets, &authority, &model, cfg.mpc.horizon, &c.tightening)?;

        let q = matrix(&cfg.mpc.q, "mpc.q")?;
        let r = matrix(&cfg.mpc.r, "mpc.r")?;
        let opts = TerminalOptions {
            inflation: cfg.mpc.terminal_inflation,
            samples: cfg.mpc.terminal_samples,
            input_bound: tight.u_prime,
        };
        let terminal = terminal_ingredients(&model, &q, &r, opts, &mut stream(seed, Stream::Sampling))?;
        let level = cfg.mpc.tube_level.unwrap_or(terminal.alpha);
        let mut mpc = MpcConfig::new(cfg.mpc.horizon, q, r, terminal, level)?;
        mpc.solver = cfg.mpc.solver.clone();

        let governor = GovernorConfig {
            horizon: cfg.governor.horizon,
            q: matrix(&cfg.governor.q, "governor.q")?,
            r: matrix(&cfg.governor.r, "governor.r")?,
            solver: cfg.mpc.solver.clone(),
            sqp: SqpSettings::default(),
        };
        let reference = solve_reference_governor(&model, &cfg.x0(), &governor, &tight)?;

        Ok(Self {
            config: cfg.clone(),
            variant,
            seed,
            model,
            sets,
            uncertainty,
            oracle,
            schedule,
            network,
            sigma,
            authority,
            tight,
            mpc,
            governor,
            reference,
        })
    }

    pub fn run(&self) -> Result<SimulationLog> {
        self.run_steps(self.config.simulation.steps)
    }

    /// The closed loop: features, adaptive input, tracking MPC, plant step,
    /// weight update, buffer push and schedule tick.
    pub fn run_steps(&self, steps: usize) -> Result<SimulationLog> {
        let cfg = &self.config;
        let m = self.model.input_dim();
        let adaptive = self.variant.adaptive();
        let training = adaptive && cfg.network.train_hidden;
        let mut net = self.network.clone();
        let mut weights = match &net {
            Some(n) => Some(OutputWeights::zeros(n.feature_dim(), cfg.network.bounds.clone(), cfg.network.theta)?),
            None => None,
        };
        let mut buffer = ReplayBuffer::new(cfg.trainer.p_max);
        let mut sched = ScheduleState::new(&cfg.trainer);
        let mut job: Option<(usize, TrainingJob)> = None;
        let mut plant_rng = stream(self.seed, Stream::PlantNoise);
        let mut train_rng = stream(self.seed, Stream::Training);
        let switches = self.schedule.switch_instants(steps);

        let mut x = cfg.x0();
        let mut records: Vec<StepRecord> = Vec::with_capacity(steps);
        let mut events = Vec::new();
        let mut trainings = Vec::new();
        let mut prediction: Option<Vector> = None;

        for t in 0..steps {
            let mut tags: Vec<String> = Vec::new();
            if switches.binary_search(&t).is_ok() {
                tags.push("switch".into());
            }
            if !self.sets.contains_state(&x) {
                tags.push("state_violation".into());
            }
            let (phi, u_a) = match (&net, &weights) {
                (Some(n), Some(w)) => {
                    let phi = n.forward_features(&x);
                    let u_a = w.adaptive_control(&phi);
                    (phi, u_a)
                }
                _ => (Vector::zeros(0), Vector::zeros(m)),
            };
            if let Some(pred) = prediction.take() {
                let v_hat = solve_intermediate(&self.model, &pred, &u_a, &self.reference, t, &self.mpc, &self.tight)?;
                if let Some(prev) = records.last_mut() {
                    prev.v_hat_next = Some(v_hat);
                }
            }
            let sol = solve_tracking_mpc(&self.model, &x, &u_a, &self.reference, t, &self.mpc, &self.tight)?;
            if sol.status == SolveStatus::MaxIter {
                tags.push("mpc_max_iter".into());
            }
            let raw = &u_a + &sol.u_m;
            let u = raw.map(|v| v.clamp(-self.sets.u_max, self.sets.u_max));
            if (&u - &raw).amax() > 0.0 {
                tags.push("input_clamp".into());
            }
            let step = step_true(&self.model, &self.sets, self.uncertainty.as_ref(), &x, &u, t, &mut plant_rng)?;
            let u_m = &u - &u_a;
            let x_nom = self.model.step_nominal(&x, &u_m);
            let g = self.model.input_map(&x);
            let (k, k_next) = match &weights {
                Some(w) => {
                    let next = w.update(&phi, &step.next, &x_nom, &g)?;
                    let pair = (w.matrix().clone(), next.matrix().clone());
                    weights = Some(next);
                    pair
                }
                None => (Matrix::zeros(0, m), Matrix::zeros(0, m)),
            };
            let u_tilde = &u_a + &step.h;

            if training {
                let w = weights.as_ref().expect("adaptive");
                let label = if cfg.network.label_after_update { w.adaptive_control(&phi) } else { u_a.clone() };
                buffer.push_with_selection(x.clone(), label);
                for action in sched.tick(t, buffer.len()) {
                    match action {
                        ScheduleAction::Collect => {}
                        ScheduleAction::StartTraining(_) => {
                            let data = sample_dataset(&buffer, cfg.trainer.p0, &mut train_rng)?;
                            let job_rng = SimRng::seed_from_u64(train_rng.random());
                            job = Some((t, TrainingJob::start(net.clone().expect("adaptive"), w.matrix().clone(), data, cfg.trainer.clone(), job_rng)));
                            tags.push("train_start".into());
                        }
                        ScheduleAction::SwapWeights(_) => {
                            let Some((started, running)) = job.take() else { continue };
                            match running.finish() {
                                Ok(out) => {
                                    trainings.push(TrainingSummary {
                                        started,
                                        swapped: t,
                                        generation: out.network.generation,
                                        initial_loss: out.initial_loss,
                                        final_loss: out.final_loss,
                                        epochs: out.epochs,
                                    });
                                    tags.push("swap".into());
                                    net = Some(out.network);
                                }
                                Err(e) => {
                                    log::warn!("training started at t = {started} failed: {e}; keeping the previous stack");
                                    tags.push("train_failed".into());
                                }
                            }
                        }
                    }
                }
            }

            let generation = net.as_ref().map_or(0, |n| n.generation);
            for tag in &tags {
                events.push(Event { t, kind: tag.clone() });
            }
            records.push(StepRecord {
                t,
                x_ref: self.reference.state_at(t),
                u_a,
                u_m,
                h: step.h,
                disturbance_norm: (&g * &u_tilde).norm(),
                u_tilde,
                phi,
                v_m: sol.value,
                stage_cost: self.mpc.stage_cost(&x, &sol.inputs[0], &self.reference, t),
                v_hat_next: None,
                k,
                k_next,
                generation,
                events: tags,
                x: x.clone(),
            });
            if cfg.simulation.record_intermediate {
                prediction = Some(x_nom);
            }
            x = step.next;
        }
        if let Some((_, running)) = job.take() {
            // A job still in flight at the end is joined and discarded.
            let _ = running.finish();
        }
        let trace = TrajectoryTrace { records };
        let summary = RunSummary::from_trace(&trace, &self.mpc.q, &self.sets, &x);
        Ok(SimulationLog {
            variant: self.variant,
            seed: self.seed,
            trace,
            events,
            trainings,
            final_state: x,
            summary,
        })
    }
}

/// Tagged step event (`switch`, `train_start`, `swap`, `train_failed`,
/// `state_violation`, `input_clamp`, `mpc_max_iter`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: usize,
    pub kind: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSummary {
    pub started: usize,
    pub swapped: usize,
    pub generation: usize,
    pub initial_loss: f64,
    pub final_loss: f64,
    pub epochs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub steps: usize,
    /// `Σ_t ‖x_t‖²_Q`.
    pub cumulative_cost: f64,
    pub final_norm: f64,
    /// Mean `‖x_t‖` over the last tenth of the run.
    pub final_window_mean_norm: f64,
    pub state_violations: usize,
    pub input_violations: usize,
    pub max_input: f64,
}

impl RunSummary {
    pub fn from_trace(trace: &TrajectoryTrace, q: &Matrix, sets: &ConstraintSets, final_state: &Vector) -> Self {
        let n = trace.len();
        let tail = (n / 10).max(1);
        let recs = &trace.records;
        Self {
            steps: n,
            cumulative_cost: recs.iter().map(|r| weighted_sq(&r.x, q)).sum(),
            final_norm: final_state.norm(),
            final_window_mean_norm: if n == 0 { 0.0 } else { recs[n.saturating_sub(tail)..].iter().map(|r| r.x.norm()).sum::<f64>() / tail.min(n) as f64 },
            state_violations: recs.iter().filter(|r| !sets.contains_state(&r.x)).count(),
            input_violations: recs.iter().filter(|r| !sets.input_admissible(&(&r.u_a + &r.u_m))).count(),
            max_input: recs.iter().map(|r| inf_norm(&(&r.u_a + &r.u_m))).fold(0.0, f64::max),
        }
    }
}

/// One closed-loop run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationLog {
    pub variant: Variant,
    pub seed: u64,
    pub trace: TrajectoryTrace,
    pub events: Vec<Event>,
    pub trainings: Vec<TrainingSummary>,
    pub final_state: Vector,
    pub summary: RunSummary,
}

impl SimulationLog {
    pub fn events_of(&self, kind: &str) -> Vec<usize> {
        self.events.iter().filter(|e| e.kind == kind).map(|e| e.t).collect()
    }
}

/// Prepares and runs `cfg` with its own variant and seed.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<SimulationLog> {
    Scenario::prepare(cfg)?.run()
}
