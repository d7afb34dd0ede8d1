use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::linalg::{Matrix, Vector};

use super::constants::StabilityConstants;
use super::oracle::IdealOracle;
use super::trace::TrajectoryTrace;

/// Outcome of one inequality checked at many steps. Margins are
/// `lhs − rhs − slack`, so positive values are violations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub id: String,
    pub pass: bool,
    pub checked: usize,
    pub violations: usize,
    pub worst_margin: f64,
    pub worst_step: Option<usize>,
    pub margins: Vec<(usize, f64)>,
    pub notes: Vec<String>,
}

impl CheckReport {
    pub fn new(id: &str) -> Self {
        Self {
            id: id.to_string(),
            pass: true,
            checked: 0,
            violations: 0,
            worst_margin: f64::NEG_INFINITY,
            worst_step: None,
            margins: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn record(&mut self, step: usize, margin: f64) {
        self.checked += 1;
        self.margins.push((step, margin));
        if margin > self.worst_margin || self.worst_step.is_none() {
            self.worst_margin = margin;
            self.worst_step = Some(step);
        }
        if margin > 0.0 || margin.is_nan() {
            self.violations += 1;
            self.pass = false;
        }
    }

    pub fn note(mut self, text: impl Into<String>) -> Self {
        self.notes.push(text.into());
        self
    }

    pub fn summary_line(&self) -> String {
        let worst = match self.worst_step {
            Some(s) => format!("worst margin {:+.3e} at step {s}", self.worst_margin),
            None => "nothing checked".to_string(),
        };
        let mut line = format!(
            "{:<28} {} {}/{} violations, {worst}",
            self.id,
            if self.pass { "PASS" } else { "FAIL" },
            self.violations,
            self.checked
        );
        for n in &self.notes {
            let _ = write!(line, "; {n}");
        }
        line
    }
}

/// Structured text, one line per report.
pub fn reports_to_text(reports: &[&CheckReport]) -> String {
    reports.iter().map(|r| r.summary_line() + "\n").collect()
}

/// CSV rows `check,step,margin,pass`.
pub fn reports_to_csv(reports: &[&CheckReport]) -> String {
    let mut s = String::from("check,step,margin,pass\n");
    for r in reports {
        for (step, margin) in &r.margins {
            let _ = writeln!(s, "{},{step},{margin},{}", r.id, *margin <= 0.0);
        }
    }
    s
}

/// `V_a(K) = (1/θ) Σ_i ‖K^(i) − W*^(i)‖²`.
pub fn va(k: &Matrix, w_star: &Matrix, theta: f64) -> f64 {
    (k - w_star).norm_squared() / theta
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VaReport {
    /// Decrease with the `‖ε‖²` coefficient of the stated bound.
    pub statement: CheckReport,
    /// Decrease with the `‖ε‖²/m²` coefficient used in the proof.
    pub proof: CheckReport,
    /// `V_a(K_t) ≤ 4W̄/θ`.
    pub bound: CheckReport,
    /// `V_a(K_{t+1}) ≤ V_a(K_t)` at steps with `ε = 0`.
    pub nonincreasing: CheckReport,
}

pub fn check_va_decrease(trace: &TrajectoryTrace, oracle: &IdealOracle, theta: f64, sigma: f64, w_bar: f64, slack: f64) -> VaReport {
    let m = oracle.w_star.ncols() as f64;
    let mut statement = CheckReport::new("adaptation.va_decrease");
    let mut proof = CheckReport::new("adaptation.va_decrease_proof");
    let mut bound = CheckReport::new("adaptation.va_bound");
    let mut nonincreasing = CheckReport::new("adaptation.va_nonincreasing");
    let cap = 4.0 * w_bar / theta;
    for r in &trace.records {
        let before = va(&r.k, &oracle.w_star, theta);
        let after = va(&r.k_next, &oracle.w_star, theta);
        let eps = oracle.reconstruction_error(&r.h, &r.phi).norm_squared();
        let drift = -(1.0 - theta) / (sigma * sigma) * r.u_tilde.norm_squared();
        statement.record(r.t, after - before - drift - eps - slack);
        proof.record(r.t, after - before - drift - eps / (m * m) - slack);
        bound.record(r.t, before - cap - slack);
        if eps == 0.0 {
            nonincreasing.record(r.t, after - before - slack);
        }
    }
    VaReport {
        statement,
        proof,
        bound,
        nonincreasing,
    }
}

/// `Σ_{t=k}^{k+N-1} ‖ũ_t‖² ≤ N c_0 μ + c_0′` for every window.
pub fn check_mean_square_small(u_tilde: &[Vector], window: usize, mu: f64, c0: f64, c0_prime: f64) -> CheckReport {
    let mut report = CheckReport::new("adaptation.mean_square");
    if window == 0 || u_tilde.len() < window {
        return report.note(format!("trace shorter than window {window}"));
    }
    let energy: Vec<f64> = u_tilde.iter().map(Vector::norm_squared).collect();
    let rhs = window as f64 * c0 * mu + c0_prime;
    let mut sum: f64 = energy[..window].iter().sum();
    for k in 0..=energy.len() - window {
        if k > 0 {
            sum += energy[k + window - 1] - energy[k - 1];
        }
        report.record(k, sum - rhs);
    }
    report
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IssReport {
    /// `V_m(x_{t+1}) ≤ γV_m(x_t) + c_3‖gũ‖`.
    pub iss: CheckReport,
    /// `V̂_m(x_{t+1|t}) − V_m(x_t) ≤ −c_s(x_t, u*)`.
    pub nominal_decrease: CheckReport,
    /// `V_m(x_{t+1}) − V̂_m(x_{t+1|t}) ≤ c_3‖gũ‖`.
    pub perturbation: CheckReport,
}

pub fn check_iss(trace: &TrajectoryTrace, k: &StabilityConstants, slack: f64) -> IssReport {
    let mut iss = CheckReport::new("iss.iss");
    let mut nominal = CheckReport::new("iss.nominal_decrease");
    let mut pert = CheckReport::new("iss.perturbation");
    for pair in trace.records.windows(2) {
        let (now, next) = (&pair[0], &pair[1]);
        let w = k.c3 * now.disturbance_norm;
        iss.record(now.t, next.v_m - k.gamma * now.v_m - w - slack);
        if let Some(v_hat) = now.v_hat_next {
            nominal.record(now.t, v_hat - now.v_m + now.stage_cost - slack);
            pert.record(now.t, next.v_m - v_hat - w - slack);
        }
    }
    IssReport {
        iss,
        nominal_decrease: nominal,
        perturbation: pert,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TubeReport {
    pub precondition_met: bool,
    pub c_bar: f64,
    pub c: f64,
    pub inner_steps: usize,
    pub annulus_steps: usize,
    pub outside_steps: usize,
    /// Strict decrease inside `X_c(0) \ X_c̄(0)`.
    pub annulus_decrease: CheckReport,
    /// `x_t ∈ X_c̄(0) ⇒ x_{t+1} ∈ X_c̄(0)`.
    pub invariance: CheckReport,
    /// `x_t ∈ X`.
    pub state_constraint: CheckReport,
}

impl TubeReport {
    pub fn vacuous(&self) -> bool {
        !self.precondition_met
    }

    pub fn summary_line(&self) -> String {
        if self.vacuous() {
            format!(
                "tube: vacuous (precondition w' < c1 c/(c2 c3) fails: c_bar = {:.3e} >= c = {:.3e}); inner {} annulus {} outside {}",
                self.c_bar, self.c, self.inner_steps, self.annulus_steps, self.outside_steps
            )
        } else {
            format!(
                "tube: inner {} annulus {} outside {}; decrease {}, invariance {}, state {}",
                self.inner_steps,
                self.annulus_steps,
                self.outside_steps,
                verdict(&self.annulus_decrease),
                verdict(&self.invariance),
                verdict(&self.state_constraint)
            )
        }
    }
}

fn verdict(r: &CheckReport) -> &'static str {
    if r.pass {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Classifies steps `t ≥ from` against the tube levels `c̄ < c`.
pub fn tube_report(
    trace: &TrajectoryTrace,
    k: &StabilityConstants,
    from: usize,
    state_lower: &Vector,
    state_upper: &Vector,
    slack: f64,
) -> TubeReport {
    let c = k.tube_level;
    let c_bar = k.c_bar;
    let mut rep = TubeReport {
        precondition_met: k.tube_precondition(),
        c_bar,
        c,
        inner_steps: 0,
        annulus_steps: 0,
        outside_steps: 0,
        annulus_decrease: CheckReport::new("tube.annulus_decrease"),
        invariance: CheckReport::new("tube.invariance"),
        state_constraint: CheckReport::new("tube.state_constraint"),
    };
    let records: Vec<_> = trace.records.iter().filter(|r| r.t >= from).collect();
    for (i, r) in records.iter().enumerate() {
        let next = records.get(i + 1);
        if r.v_m <= c_bar {
            rep.inner_steps += 1;
            if let Some(n) = next {
                rep.invariance.record(r.t, n.v_m - c_bar - slack);
            }
        } else if r.v_m <= c {
            rep.annulus_steps += 1;
            if let Some(n) = next {
                // Strict decrease: any nonnegative change is a violation.
                let change = n.v_m - r.v_m;
                rep.annulus_decrease.record(r.t, if change < 0.0 { change } else { change.max(f64::MIN_POSITIVE) });
            }
        } else {
            rep.outside_steps += 1;
        }
        if rep.precondition_met {
            let excess = r
                .x
                .iter()
                .zip(state_lower.iter().zip(state_upper.iter()))
                .map(|(v, (lo, hi))| (lo - v).max(v - hi))
                .fold(f64::NEG_INFINITY, f64::max);
            rep.state_constraint.record(r.t, excess);
        }
    }
    if !rep.precondition_met {
        rep.state_constraint = rep.state_constraint.note("vacuous: precondition fails");
    }
    rep
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositeReport {
    pub gamma_gate: bool,
    pub beta_gate: bool,
    pub beta: f64,
    pub beta_limit: f64,
    pub eta: f64,
    pub a0: f64,
    pub decrease: Option<CheckReport>,
    pub summability: Option<CheckReport>,
    /// `‖x_t‖ ≤ 1e-3` over the last 10% of steps.
    pub converged: bool,
    pub tail_mean_norm: f64,
}

impl CompositeReport {
    pub fn hypotheses_met(&self) -> bool {
        self.gamma_gate && self.beta_gate
    }

    pub fn pass(&self) -> bool {
        self.hypotheses_met()
            && self.decrease.as_ref().is_some_and(|r| r.pass)
            && self.summability.as_ref().is_some_and(|r| r.pass)
    }

    pub fn summary_line(&self) -> String {
        if !self.hypotheses_met() {
            return format!(
                "composite: hypotheses not met (gamma gate {}, beta gate {}); checks skipped",
                self.gamma_gate, self.beta_gate
            );
        }
        format!(
            "composite: decrease {}, summability {}, converged {} (tail mean |x| = {:.3e})",
            self.decrease.as_ref().map_or("-", verdict),
            self.summability.as_ref().map_or("-", verdict),
            self.converged,
            self.tail_mean_norm
        )
    }
}

/// Largest `‖ε(x)‖/‖x‖²` along the trace (zero when ε vanishes).
pub fn estimate_beta(trace: &TrajectoryTrace, oracle: &IdealOracle) -> f64 {
    trace
        .records
        .iter()
        .map(|r| {
            let eps = oracle.reconstruction_error(&r.h, &r.phi).norm();
            let x2 = r.x.norm_squared();
            if eps == 0.0 {
                0.0
            } else if x2 > 0.0 {
                eps / x2
            } else {
                f64::INFINITY
            }
        })
        .fold(0.0, f64::max)
}

/// Composite function `V = V_m² + a_0 V_a` and its per-step decrease.
pub fn composite_check(trace: &TrajectoryTrace, oracle: &IdealOracle, k: &StabilityConstants, slack: f64) -> CompositeReport {
    let m = k.input_dim as f64;
    let beta = estimate_beta(trace, oracle);
    let beta_limit = if 2.0 * k.gamma * k.gamma < 1.0 {
        k.c1 * m / (2f64.sqrt() * k.sigma * k.c3_hat * k.delta_g_hat) * ((1.0 - 2.0 * k.gamma * k.gamma) * (1.0 - k.theta)).sqrt()
    } else {
        0.0
    };
    let eta = (1.0 - 2.0 * k.gamma * k.gamma) * k.c1 * k.c1 - 2.0 * (k.sigma * k.c3_hat * k.delta_g_hat * beta / m).powi(2) / (1.0 - k.theta);
    let gamma_gate = k.gamma * k.gamma < 0.5;
    let beta_gate = gamma_gate && beta < beta_limit;
    let n = trace.len();
    let tail = (n / 10).max(1).min(n.max(1));
    let tail_mean_norm = if n == 0 {
        0.0
    } else {
        trace.records[n - tail..].iter().map(|r| r.x.norm()).sum::<f64>() / tail as f64
    };
    let mut report = CompositeReport {
        gamma_gate,
        beta_gate,
        beta,
        beta_limit,
        eta,
        a0: k.a0,
        decrease: None,
        summability: None,
        converged: n > 0 && trace.records[n - tail..].iter().all(|r| r.x.norm() <= 1e-3),
        tail_mean_norm,
    };
    if !report.hypotheses_met() {
        return report;
    }
    let composite = |v_m: f64, kk: &Matrix| v_m * v_m + k.a0 * va(kk, &oracle.w_star, k.theta);
    let mut decrease = CheckReport::new("composite.composite_decrease");
    for pair in trace.records.windows(2) {
        let (now, next) = (&pair[0], &pair[1]);
        let change = composite(next.v_m, &now.k_next) - composite(now.v_m, &now.k);
        decrease.record(now.t, change + eta * now.x.norm_squared().powi(2) - slack);
    }
    let mut summability = CheckReport::new("composite.summability");
    let total: f64 = trace.records.iter().map(|r| r.x.norm_squared().powi(2)).sum();
    let cap = (k.c_hat * k.c_hat + 4.0 * k.a0 * k.w_bar / k.theta) / eta;
    summability.record(n.saturating_sub(1), total - cap);
    report.decrease = Some(decrease);
    report.summability = Some(summability);
    report
}
