//! Run-report JSON and estimate CSV emission. Field order is fixed and no
//! timing data is included by default, so identical inputs produce
//! byte-identical artifacts.

use serde::Serialize;

use dysonsim_core::gadgets::{EvolveRecord, Tier};
use dysonsim_core::resources::ResourceEstimate;

#[derive(Serialize)]
pub struct RunReport {
    pub model: String,
    pub picture: String,
    pub parameters: RunParameters,
    pub resources: RunResources,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub achieved_error: Option<f64>,
    /// Convergence delta of the propagator oracle backing `achieved_error`
    /// (zero when the reference is a closed-form exponential).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_delta: Option<f64>,
    pub bound_flags: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_clock_s: Option<f64>,
}

#[derive(Serialize)]
pub struct RunParameters {
    pub t: f64,
    pub eps: f64,
    pub l: usize,
    pub k: usize,
    pub m: usize,
    pub tau: f64,
    pub beta_prime: f64,
    pub alpha: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_b: Option<f64>,
}

#[derive(Serialize)]
pub struct RunResources {
    pub queries_ham_t: u64,
    pub queries_e_a: u64,
    pub queries_oracle_h: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qubits: Option<u32>,
    pub tier: String,
}

pub fn tier_name(tier: Tier) -> &'static str {
    match tier {
        Tier::Circuit => "circuit",
        Tier::MatrixLevel => "matrix-level",
    }
}

impl RunReport {
    pub fn from_record(
        model: &str,
        t: f64,
        record: &EvolveRecord,
        achieved_error: Option<f64>,
        oracle_delta: Option<f64>,
        wall_clock_s: Option<f64>,
    ) -> Self {
        RunReport {
            model: model.into(),
            picture: record.picture.clone(),
            parameters: RunParameters {
                t,
                eps: record.eps,
                l: record.l,
                k: record.k,
                m: record.m_max,
                tau: record.tau,
                beta_prime: record.beta_prime,
                alpha: record.alpha,
                alpha_a: record.alpha_a,
                alpha_b: record.alpha_b,
            },
            resources: RunResources {
                queries_ham_t: record.counts.ham_t,
                queries_e_a: record.counts.exp_a,
                queries_oracle_h: record.counts.oracle_h,
                qubits: record.qubits,
                tier: tier_name(record.tier).into(),
            },
            achieved_error,
            oracle_delta,
            bound_flags: record.bound_flags.clone(),
            wall_clock_s,
        }
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("report serialization");
        out.push('\n');
        out
    }
}

pub const CSV_HEADER: &str =
    "picture,alpha_A,alpha_B,t,eps,L,K,M,queries_ham_t,queries_eA,qubits,bound_source";

pub fn csv_row(est: &ResourceEstimate) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{}",
        est.picture,
        est.alpha_a,
        est.alpha_b,
        est.t,
        est.eps,
        est.l,
        est.k,
        est.m,
        est.queries_ham_t,
        est.queries_e_a,
        est.qubits,
        est.bound_source
    )
}

pub fn csv_document(rows: &[ResourceEstimate]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&csv_row(row));
        out.push('\n');
    }
    out
}
