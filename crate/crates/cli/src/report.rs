//! Report documents: a versioned, JSON-serializable mirror of the analysis
//! results, plus the terminal rendering.
//!
//! The document layer is deliberately decoupled from the core types: every
//! field is a plain string, number, or boolean, expression strings are
//! already rendered in canonical order by the core, and the layout is frozen
//! behind `schema_version`. Serializing a parsed document reproduces the
//! original bytes, so downstream tooling can archive and re-emit reports.

use std::path::Path;

use probcert_core::rules::{AnalysisReport, Outcome, Verdict, Witness};
use probcert_core::simulator::SimulationOutcome;
use probcert_core::symbolic::Sign;
use probcert_core::SimulationConfig;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// Top-level analysis report for one program.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDoc {
    pub schema_version: u32,
    pub program: String,
    /// Whether rule conditions were allowed to hold only eventually.
    pub relaxation: bool,
    pub drift: DriftDoc,
    pub verdicts: Vec<VerdictDoc>,
    pub simulation: Option<SimulationDoc>,
    pub timing: TimingDoc,
}

/// Expected one-step change of the guard value, as a function of the
/// iteration counter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftDoc {
    pub expression: Option<String>,
    /// "positive", "negative", or "zero"; absent when the sign is ambiguous
    /// or the loop never enters its body.
    pub sign: Option<String>,
}

/// One certification attempt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictDoc {
    pub goal: String,
    pub property: String,
    pub rule: String,
    /// "certified" or "unknown".
    pub result: String,
    /// True when the expected guard drift already ruled the rule out.
    pub ruled_out: bool,
    pub witness: Option<WitnessDoc>,
    pub diagnostics: Vec<String>,
    pub elapsed_ms: f64,
}

/// Evidence backing a certificate; population depends on the rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessDoc {
    pub martingale: Option<String>,
    pub bound: Option<String>,
    pub epsilon: Option<String>,
    pub decrease_branch: Option<String>,
    pub branch_probability: Option<String>,
    pub decrease: Option<String>,
    pub difference_bound: Option<String>,
}

/// Outcome of the optional Monte Carlo cross-check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationDoc {
    pub runs: u64,
    pub max_steps: u64,
    pub seed: u64,
    pub terminated: u64,
    pub diverged: u64,
    /// Exact rational, rendered.
    pub termination_fraction: String,
    pub mean_steps_terminated: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingDoc {
    pub parse_ms: f64,
    pub analysis_ms: f64,
    pub simulation_ms: Option<f64>,
}

/// Emitted instead of a report when the program is rejected up front.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorDoc {
    pub schema_version: u32,
    pub program: String,
    pub error: String,
}

pub fn sign_name(sign: Sign) -> &'static str {
    match sign {
        Sign::Positive => "positive",
        Sign::Negative => "negative",
        Sign::Zero => "zero",
    }
}

fn outcome_name(outcome: Outcome) -> &'static str {
    match outcome {
        Outcome::Certified => "certified",
        Outcome::Unknown => "unknown",
    }
}

impl WitnessDoc {
    fn from_core(witness: &Witness) -> WitnessDoc {
        WitnessDoc {
            martingale: witness.martingale.clone(),
            bound: witness.bound.clone(),
            epsilon: witness.epsilon.clone(),
            decrease_branch: witness.decrease_branch.clone(),
            branch_probability: witness.branch_probability.clone(),
            decrease: witness.decrease.clone(),
            difference_bound: witness.difference_bound.clone(),
        }
    }
}

impl VerdictDoc {
    fn from_core(verdict: &Verdict) -> VerdictDoc {
        VerdictDoc {
            goal: verdict.goal.render().to_string(),
            property: verdict.goal.describe().to_string(),
            rule: verdict.rule.render().to_string(),
            result: outcome_name(verdict.result).to_string(),
            ruled_out: verdict.ruled_out,
            witness: verdict.witness.as_ref().map(WitnessDoc::from_core),
            diagnostics: verdict.diagnostics.clone(),
            elapsed_ms: verdict.elapsed.as_secs_f64() * 1e3,
        }
    }
}

impl SimulationDoc {
    pub fn from_outcome(config: &SimulationConfig, outcome: &SimulationOutcome) -> SimulationDoc {
        SimulationDoc {
            runs: outcome.runs,
            max_steps: config.max_steps,
            seed: config.seed,
            terminated: outcome.terminated,
            diverged: outcome.diverged,
            termination_fraction: outcome.termination_fraction.to_string(),
            mean_steps_terminated: outcome.mean_steps_terminated,
        }
    }
}

impl ReportDoc {
    pub fn build(
        program: &Path,
        analysis: &AnalysisReport,
        simulation: Option<SimulationDoc>,
        timing: TimingDoc,
    ) -> ReportDoc {
        ReportDoc {
            schema_version: SCHEMA_VERSION,
            program: program.display().to_string(),
            relaxation: analysis.relaxed,
            drift: DriftDoc {
                expression: analysis.drift_expression.clone(),
                sign: analysis.drift_sign.map(|s| sign_name(s).to_string()),
            },
            verdicts: analysis.verdicts.iter().map(VerdictDoc::from_core).collect(),
            simulation,
            timing,
        }
    }
}

impl ErrorDoc {
    pub fn new(program: &Path, error: &str) -> ErrorDoc {
        ErrorDoc {
            schema_version: SCHEMA_VERSION,
            program: program.display().to_string(),
            error: error.to_string(),
        }
    }
}

/// Renders the report for the terminal.
pub fn render_text(doc: &ReportDoc, with_witness: bool) -> String {
    let mut out = String::new();
    let push = |out: &mut String, line: &str| {
        out.push_str(line);
        out.push('\n');
    };

    push(&mut out, &doc.program);
    push(
        &mut out,
        &format!("relaxation: {}", if doc.relaxation { "on" } else { "off" }),
    );
    match (&doc.drift.expression, &doc.drift.sign) {
        (Some(expr), Some(sign)) => {
            push(&mut out, &format!("expected guard drift: {expr} (eventually {sign})"));
        }
        (Some(expr), None) => {
            push(&mut out, &format!("expected guard drift: {expr} (sign ambiguous)"));
        }
        _ => {}
    }
    push(&mut out, "");

    for verdict in &doc.verdicts {
        let headline = if verdict.result == "certified" {
            format!("CERTIFIED by the {} rule", verdict.rule)
        } else {
            verdict.result.clone()
        };
        push(&mut out, &format!("  {:<10} {headline}", verdict.goal));
        if verdict.result != "certified" {
            for diag in &verdict.diagnostics {
                push(&mut out, &format!("             {diag}"));
            }
        }
        if with_witness {
            if let Some(witness) = &verdict.witness {
                let fields: [(&str, &Option<String>); 7] = [
                    ("martingale drift", &witness.martingale),
                    ("bound", &witness.bound),
                    ("epsilon", &witness.epsilon),
                    ("decreasing branch", &witness.decrease_branch),
                    ("branch probability", &witness.branch_probability),
                    ("decrease", &witness.decrease),
                    ("difference bound", &witness.difference_bound),
                ];
                for (label, value) in fields {
                    if let Some(value) = value {
                        push(&mut out, &format!("             {label}: {value}"));
                    }
                }
            }
        }
    }
    push(&mut out, "");

    let certified = doc.verdicts.iter().filter(|v| v.result == "certified").count();
    let total_ms = doc.timing.parse_ms
        + doc.timing.analysis_ms
        + doc.timing.simulation_ms.unwrap_or(0.0);
    push(
        &mut out,
        &format!(
            "certified {certified} of {} goals in {total_ms:.1} ms",
            doc.verdicts.len()
        ),
    );

    if let Some(sim) = &doc.simulation {
        push(
            &mut out,
            &format!(
                "simulation: {} runs, seed {}, up to {} steps",
                sim.runs, sim.seed, sim.max_steps
            ),
        );
        let mean = match sim.mean_steps_terminated {
            Some(m) => format!("{m:.1}"),
            None => "n/a".to_string(),
        };
        push(
            &mut out,
            &format!(
                "  terminated {} (fraction {}), diverged {}, mean steps of terminated runs {}",
                sim.terminated, sim.termination_fraction, sim.diverged, mean
            ),
        );
    }
    out
}
