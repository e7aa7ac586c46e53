use std::process::ExitCode;

use paracel_core::Multigraph;
use serde::Serialize;
use serde_json::Value;

pub const EXIT_PASS: u8 = 0;
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_ANOMALY: u8 = 2;
pub const EXIT_COUNTEREXAMPLE: u8 = 3;
pub const EXIT_USAGE: u8 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    Anomaly,
    Counterexample,
}

impl Outcome {
    pub fn exit_code(self) -> u8 {
        match self {
            Outcome::Pass => EXIT_PASS,
            Outcome::Fail => EXIT_FAIL,
            Outcome::Anomaly => EXIT_ANOMALY,
            Outcome::Counterexample => EXIT_COUNTEREXAMPLE,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GraphSummary {
    pub vertices: usize,
    pub edges: usize,
    pub e: String,
    pub f: String,
    pub connected: bool,
}

impl GraphSummary {
    pub fn of(g: &Multigraph) -> Self {
        Self {
            vertices: g.vertex_count(),
            edges: g.edge_count(),
            e: g.e_id().to_string(),
            f: g.f_id().to_string(),
            connected: g.is_connected(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphSummary>,
    pub outcome: Outcome,
    pub payload: Value,
    pub elapsed_ms: f64,
    /// Human-readable rendering, printed without `--json`.
    #[serde(skip)]
    pub text: String,
}

impl RunReport {
    pub fn new(
        command: &str,
        graph: Option<&Multigraph>,
        outcome: Outcome,
        payload: Value,
        text: String,
    ) -> Self {
        Self {
            command: command.to_string(),
            graph: graph.map(GraphSummary::of),
            outcome,
            payload,
            elapsed_ms: 0.0,
            text,
        }
    }

    pub fn emit(&self, json: bool) -> ExitCode {
        if json {
            println!(
                "{}",
                serde_json::to_string(self).expect("serializable report")
            );
        } else {
            print!("{}", self.text);
            if !self.text.ends_with('\n') {
                println!();
            }
        }
        ExitCode::from(self.outcome.exit_code())
    }
}
