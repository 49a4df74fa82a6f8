use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::expr::parse;
use crate::model::{BilevelProblem, BoxSet, LowerSet, Polyhedron, SmoothFunction};

/// On-disk problem document. Unknown members are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub n: usize,
    pub m: usize,
    #[serde(rename = "F")]
    pub upper: String,
    #[serde(rename = "f")]
    pub lower: String,
    #[serde(rename = "Omega", default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<RowsSpec>,
    #[serde(rename = "K")]
    pub k: KSpec,
    pub candidates: Vec<CandidateSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
}

/// `{v : A v ≤ b}` with `A` row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RowsSpec {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KSpec {
    Box(BoxWrapper),
    Rows(RowsSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxWrapper {
    #[serde(rename = "box")]
    pub bounds: BoxSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub lower: Vec<Bound>,
    pub upper: Vec<Bound>,
}

/// A finite number or one of the sentinels `"-inf"`, `"inf"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Bound {
    Finite(f64),
    Sentinel(String),
}

impl Bound {
    fn value(&self) -> Result<f64, String> {
        match self {
            Bound::Finite(v) => Ok(*v),
            Bound::Sentinel(s) if s == "inf" => Ok(f64::INFINITY),
            Bound::Sentinel(s) if s == "-inf" => Ok(f64::NEG_INFINITY),
            Bound::Sentinel(s) => Err(format!("K: bound {s:?} is neither a number nor \"-inf\"/\"inf\"")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateSpec {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// A validated problem with its candidates and tolerance overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedProblem {
    pub problem: BilevelProblem,
    pub candidates: Vec<CandidateSpec>,
    pub tolerances: Option<Tolerances>,
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self, Vec<String>> {
        serde_json::from_str(text).map_err(|e| vec![format!("problem file: {e}")])
    }

    /// Parse expressions and sets, then validate; all errors are collected.
    pub fn load(text: &str) -> Result<LoadedProblem, Vec<String>> {
        Self::from_json(text)?.into_problem()
    }

    pub fn into_problem(self) -> Result<LoadedProblem, Vec<String>> {
        let (n, m) = (self.n, self.m);
        let mut errors = Vec::new();
        let upper = parse(&self.upper, n, m)
            .map_err(|e| errors.push(format!("F: {e}")))
            .ok();
        let lower = parse(&self.lower, n, m)
            .map_err(|e| errors.push(format!("f: {e}")))
            .ok();
        let omega = match self.omega {
            None => Some(Polyhedron::whole_space(n)),
            Some(r) => Polyhedron::new(n, r.a, r.b)
                .map_err(|e| errors.push(format!("Omega: {e}")))
                .ok(),
        };
        let k = match self.k {
            KSpec::Rows(r) => Polyhedron::new(m, r.a, r.b)
                .map(LowerSet::Polyhedron)
                .map_err(|e| errors.push(format!("K: {e}")))
                .ok(),
            KSpec::Box(BoxWrapper { bounds }) => {
                let convert = |v: &[Bound], errors: &mut Vec<String>| -> Vec<f64> {
                    v.iter()
                        .filter_map(|b| b.value().map_err(|e| errors.push(e)).ok())
                        .collect()
                };
                let before = errors.len();
                let lower = convert(&bounds.lower, &mut errors);
                let upper = convert(&bounds.upper, &mut errors);
                if errors.len() > before {
                    None
                } else {
                    BoxSet::new(lower, upper)
                        .map(LowerSet::Box)
                        .map_err(|e| errors.push(format!("K: {e}")))
                        .ok()
                }
            }
        };
        for (i, c) in self.candidates.iter().enumerate() {
            if c.x.len() != n || c.y.len() != m {
                errors.push(format!(
                    "candidate {i}: has dimensions ({}, {}), expected ({n}, {m})",
                    c.x.len(),
                    c.y.len()
                ));
            }
        }
        let (Some(upper), Some(lower), Some(omega), Some(k)) = (upper, lower, omega, k) else {
            return Err(errors);
        };
        let problem = BilevelProblem {
            n,
            m,
            upper: SmoothFunction::scalar(n, m, upper),
            lower: SmoothFunction::scalar(n, m, lower),
            omega,
            k,
        };
        if let Err(v) = problem.validate() {
            errors.extend(v.into_iter().map(|e| e.to_string()));
        }
        if let Some(t) = &self.tolerances {
            let all = [t.active_set, t.equation, t.cone_margin];
            if all.iter().any(|v| !v.is_finite() || *v < 0.0) {
                errors.push("tolerances: values must be finite and nonnegative".into());
            }
        }
        if !errors.is_empty() {
            return Err(errors);
        }
        Ok(LoadedProblem {
            problem,
            candidates: self.candidates,
            tolerances: self.tolerances,
        })
    }
}
