use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{
    check_iss, check_mean_square_small, check_va_decrease, estimate_beta, estimate_lipschitz_c3, estimate_value_bounds, reports_to_csv,
    reports_to_text, composite_check, tube_report, BoxRegion, CheckReport, ConstantInputs, IssReport, StabilityConstants, CompositeReport,
    TubeReport, VaReport,
};
use crate::error::Result;
use crate::linalg::Vector;
use crate::mpc::{solve_tracking_mpc, tracking_cost};
use crate::rng::{stream, Stream};

use super::scenario::{Scenario, SimulationLog};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticOptions {
    /// Slack added to every inequality.
    pub slack: f64,
    /// Window length of the mean-square check.
    pub window: usize,
    /// Anchors used to estimate `c_3`.
    pub c3_samples: usize,
}

impl Default for DiagnosticOptions {
    fn default() -> Self {
        Self {
            slack: 1e-6,
            window: 50,
            c3_samples: 200,
        }
    }
}

/// `c_1`, `c_2` in closed form, `c_3` by sampling over `X`, `β` from the
/// trace (oracle runs only).
pub fn estimate_constants(scenario: &Scenario, log: &SimulationLog, opts: &DiagnosticOptions) -> Result<(ConstantInputs, StabilityConstants)> {
    let mpc = &scenario.mpc;
    let (c1, c2) = estimate_value_bounds(&mpc.q, &mpc.terminal.q_f, scenario.tight.growth, mpc.horizon)?;
    let region = BoxRegion {
        lower: scenario.sets.state_lower.clone(),
        upper: scenario.sets.state_upper.clone(),
    };
    let m = scenario.model.input_dim();
    let t_reg = scenario.reference.horizon();
    let zero = Vector::zeros(m);
    let mut rng = stream(scenario.seed, Stream::Diagnostics);
    let c3 = estimate_lipschitz_c3(
        &region,
        opts.c3_samples,
        &mut rng,
        |anchor| {
            solve_tracking_mpc(&scenario.model, anchor, &zero, &scenario.reference, t_reg, mpc, &scenario.tight)
                .map(|s| s.inputs)
                .unwrap_or_else(|_| vec![zero.clone(); mpc.horizon])
        },
        |inputs, x| tracking_cost(&scenario.model, x, inputs, &scenario.reference, t_reg, mpc),
    );
    let beta = scenario.oracle.as_ref().map_or(0.0, |o| estimate_beta(&log.trace, o));
    let inputs = ConstantInputs {
        c1,
        c2,
        c3,
        c3_hat: None,
        tube_level: mpc.tube_level,
        w_max_prime: scenario.authority.w_max_prime,
        delta_g_hat: scenario.model.delta_g,
        sigma: scenario.sigma,
        theta: scenario.config.network.theta,
        w_bar: scenario.config.network.bounds.iter().map(|b| b * b).sum(),
        input_dim: m,
        beta,
        c_hat: None,
    };
    let constants = StabilityConstants::from_inputs(&inputs)?;
    Ok((inputs, constants))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub constants: StabilityConstants,
    /// `μ` used by the mean-square check (`ε̄²`).
    pub mu: f64,
    pub iss: IssReport,
    pub tube: TubeReport,
    pub mean_square: CheckReport,
    pub mean_square_proof: CheckReport,
    pub va: Option<VaReport>,
    pub composite: Option<CompositeReport>,
}

impl DiagnosticsReport {
    fn checks(&self) -> Vec<&CheckReport> {
        let mut out = vec![&self.iss.iss, &self.iss.nominal_decrease, &self.iss.perturbation, &self.mean_square, &self.mean_square_proof];
        if !self.tube.vacuous() {
            out.extend([&self.tube.annulus_decrease, &self.tube.invariance, &self.tube.state_constraint]);
        }
        if let Some(va) = &self.va {
            out.extend([&va.statement, &va.proof, &va.bound, &va.nonincreasing]);
        }
        if let Some(th) = &self.composite {
            out.extend(th.decrease.iter().chain(th.summability.iter()));
        }
        out
    }

    /// Every non-vacuous check passed.
    pub fn all_pass(&self) -> bool {
        self.checks().iter().all(|c| c.pass)
    }

    pub fn to_text(&self) -> String {
        let k = &self.constants;
        let mut s = String::new();
        let _ = writeln!(
            s,
            "constants: c1 = {:.4e}, c2 = {:.4e}, c3 = {:.4e}, gamma = {:.4}, c = {:.4e}, c_bar = {:.4e}, w' = {:.4e}, beta = {:.3e}, a0 = {:.3e}, eta = {:.3e}",
            k.c1, k.c2, k.c3, k.gamma, k.tube_level, k.c_bar, k.w_max_prime, k.beta, k.a0, k.eta
        );
        let _ = writeln!(s, "mean-square: mu = {:.4e}, c0 = {:.4e}, c0' = {:.4e} (proof variant c0 = {:.4e}, c0' = {:.4e})", self.mu, k.c0, k.c0_prime, k.c0_proof, k.c0_prime_proof);
        s.push_str(&reports_to_text(&self.checks()));
        let _ = writeln!(s, "{}", self.tube.summary_line());
        if let Some(th) = &self.composite {
            let _ = writeln!(s, "{}", th.summary_line());
        }
        s
    }

    pub fn to_csv(&self) -> String {
        reports_to_csv(&self.checks())
    }
}

/// Runs every checker that applies to the log: the `W*`-free ones always,
/// the adaptation and composite checks only for oracle scenarios.
pub fn run_diagnostics(scenario: &Scenario, log: &SimulationLog, opts: &DiagnosticOptions) -> Result<DiagnosticsReport> {
    let (_, constants) = estimate_constants(scenario, log, opts)?;
    let trace = &log.trace;
    let adaptive = scenario.variant.adaptive();
    let mu = match &scenario.oracle {
        Some(o) if adaptive => trace
            .records
            .iter()
            .map(|r| o.reconstruction_error(&r.h, &r.phi).norm_squared())
            .fold(0.0, f64::max),
        _ => {
            // Without W*, ‖ε‖ ≤ ‖h‖ + √W̄ σ since W* lies in the projection balls.
            let h_max = trace.records.iter().map(|r| r.h.norm()).fold(0.0, f64::max);
            (h_max + constants.w_bar.sqrt() * constants.sigma).powi(2)
        }
    };
    let u_tilde = trace.u_tilde();
    let mut mean_square = check_mean_square_small(&u_tilde, opts.window, mu, constants.c0, constants.c0_prime);
    let mut mean_square_proof = check_mean_square_small(&u_tilde, opts.window, mu, constants.c0_proof, constants.c0_prime_proof);
    mean_square_proof.id = "adaptation.mean_square_proof".into();
    if !adaptive {
        mean_square = mean_square.note("tube-only run: no adaptation");
        mean_square_proof = mean_square_proof.note("tube-only run: no adaptation");
    }
    let iss = check_iss(trace, &constants, opts.slack);
    let tube = tube_report(
        trace,
        &constants,
        scenario.governor.horizon,
        &scenario.sets.state_lower,
        &scenario.sets.state_upper,
        opts.slack,
    );
    let (va, composite) = match &scenario.oracle {
        Some(o) if adaptive => (
            Some(check_va_decrease(trace, o, constants.theta, constants.sigma, constants.w_bar, opts.slack)),
            Some(composite_check(trace, o, &constants, opts.slack)),
        ),
        _ => (None, None),
    };
    Ok(DiagnosticsReport {
        constants,
        mu,
        iss,
        tube,
        mean_square,
        mean_square_proof,
        va,
        composite,
    })
}
