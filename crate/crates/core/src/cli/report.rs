use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::feasibility::Mode;
use crate::model::{MStationarityCertificate, QualificationReport};
use crate::oracle::{GridSpec, OptimalityVerdict};
use crate::polyhedral::{Generators, Halfspaces};
use crate::stationarity::CertificateReport;

pub const TOOL: &str = "bilevel";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Stationary,
    NotStationary,
    QualificationFails,
    InputError,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Stationary => 0,
            Verdict::NotStationary => 1,
            Verdict::QualificationFails => 2,
            Verdict::InputError => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidatePoint {
    pub index: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// `z̄ = −∇_y f(x̄, ȳ)`
    pub z: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DerivativeCheck {
    pub rel_tol: f64,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

/// Output of `check`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportFile {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidate: Option<CandidatePoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derivatives: Option<DerivativeCheck>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qualification: Option<QualificationReport>,
    /// Whether a certificate was found. Not a reliable necessity test when
    /// the qualification fails.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stationary: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branches_checked: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<MStationarityCertificate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explanation: Option<CertificateReport>,
    pub timing_ms: f64,
}

impl ReportFile {
    pub fn new(verdict: Verdict) -> Self {
        Self {
            tool: TOOL.into(),
            version: VERSION.into(),
            command: "check".into(),
            verdict,
            errors: Vec::new(),
            candidate: None,
            mode: None,
            tolerances: None,
            derivatives: None,
            qualification: None,
            stationary: None,
            branches_checked: None,
            certificate: None,
            explanation: None,
            timing_ms: 0.0,
        }
    }

    pub fn input_error(errors: Vec<String>) -> Self {
        Self {
            errors,
            ..Self::new(Verdict::InputError)
        }
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Error output of `lower`, `cone` and `verify`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub verdict: Verdict,
    pub errors: Vec<String>,
    pub timing_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowerReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub x: Vec<f64>,
    pub grid: GridSpec,
    /// Approximate `S(x)` in lexicographic order.
    pub solutions: Vec<Vec<f64>>,
    pub lower_value: f64,
    pub phi0: f64,
    pub argmin: Vec<f64>,
    pub timing_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConeRecord {
    pub label: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub description: Vec<String>,
    /// `None` when the exact conversion exceeds its size limit.
    pub generators: Option<Generators>,
    pub halfspaces: Option<Halfspaces>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConeReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub which: &'static str,
    pub point: Vec<f64>,
    pub cones: Vec<ConeRecord>,
    pub timing_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub candidate: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub radius: f64,
    pub value_tol: f64,
    pub grid: GridSpec,
    pub result: OptimalityVerdict,
    pub timing_ms: f64,
}
