//! Scenario configs: JSON in, schema-validated, unknown keys rejected.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    /// Registered example id (see `list-examples`). Exactly one of `example`
    /// or `family` must be present except for the transport action.
    #[serde(default)]
    pub example: Option<String>,
    /// Inline family: constant base matrix, optionally conjugated by a plane
    /// rotation R(t) with angle rate * t.
    #[serde(default)]
    pub family: Option<InlineFamily>,
    pub action: String,
    #[serde(default)]
    pub t_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub eps_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub time_points: Option<usize>,
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub d_trunc: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub metrics: Option<Vec<String>>,
    /// Single adiabatic scale for `evolve`.
    #[serde(default)]
    pub t_scale: Option<f64>,
    /// Chain order for `superadiabatic`.
    #[serde(default)]
    pub order: Option<usize>,
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub transport: Option<TransportScenario>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct InlineFamily {
    pub dim: usize,
    /// Row-major entries as [re, im] pairs.
    pub base: Vec<Vec<[f64; 2]>>,
    #[serde(default)]
    pub rotation: Option<InlineRotation>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct InlineRotation {
    pub i: usize,
    pub j: usize,
    pub rate: f64,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TransportScenario {
    pub a: f64,
    pub n_x: usize,
    pub n_mu: usize,
    pub c0: f64,
    pub c1: f64,
    pub s0: f64,
    #[serde(default)]
    pub t_grid: Option<Vec<f64>>,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, String> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| format!("config error: {e}"))?;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), String> {
        const ACTIONS: [&str; 8] = [
            "list-examples",
            "evolve",
            "project",
            "defect-sweep",
            "superadiabatic",
            "stability",
            "extended-criterion",
            "transport",
        ];
        if !ACTIONS.contains(&self.action.as_str()) {
            return Err(format!("unknown action: {}", self.action));
        }
        if self.action == "transport" {
            if self.transport.is_none() && self.example.as_deref() != Some("transport-basic") {
                return Err("transport action needs a transport block or example transport-basic".into());
            }
        } else if self.action != "list-examples" && self.example.is_none() && self.family.is_none() {
            return Err("need an example id or an inline family".into());
        }
        if let Some(g) = &self.t_grid {
            if g.iter().any(|&t| !(t > 0.0)) {
                return Err("t_grid entries must be positive".into());
            }
            if g.windows(2).any(|w| w[0] >= w[1]) {
                return Err("t_grid must be strictly increasing".into());
            }
        }
        if let Some(g) = &self.eps_grid {
            if g.iter().any(|&e| !(e > 0.0)) {
                return Err("eps_grid entries must be positive".into());
            }
        }
        if let Some(m) = &self.metrics {
            for name in m {
                if ![
                    "proj-defect",
                    "reverse-defect",
                    "evolution-defect",
                    "nogap-defect",
                ]
                .contains(&name.as_str())
                {
                    return Err(format!("unknown metric: {name}"));
                }
            }
        }
        Ok(())
    }
}
