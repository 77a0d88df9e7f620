use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::IoError;
use crate::dynamics::{
    validate_inputs, OpinionMatrix, SimulationConfig, Stubbornness, ValidatedInputs,
    DEFAULT_HORIZON, DEFAULT_SIGN_EPS, DEFAULT_TOL_CONV,
};

/// On-disk shape of a scenario. Omitted config fields take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    #[serde(rename = "Y0")]
    pub y0: Vec<Vec<f64>>,
    pub theta: Vec<f64>,
    #[serde(default = "default_horizon")]
    pub horizon: u64,
    #[serde(default = "default_tol")]
    pub tol_conv: f64,
    #[serde(default = "default_sign_eps")]
    pub sign_eps: f64,
}

fn default_horizon() -> u64 {
    DEFAULT_HORIZON
}

fn default_tol() -> f64 {
    DEFAULT_TOL_CONV
}

fn default_sign_eps() -> f64 {
    DEFAULT_SIGN_EPS
}

/// A validated scenario: initial opinions, stubbornness and run config.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub inputs: ValidatedInputs,
    pub config: SimulationConfig,
}

impl Scenario {
    pub fn new(
        name: impl Into<String>,
        y0: OpinionMatrix,
        theta: Stubbornness,
        config: SimulationConfig,
    ) -> Result<Self, IoError> {
        config.validate()?;
        Ok(Self { name: name.into(), inputs: validate_inputs(y0, theta)?, config })
    }

    pub fn from_file_repr(file: ScenarioFile) -> Result<Self, IoError> {
        let config = SimulationConfig {
            horizon: file.horizon,
            tol_conv: file.tol_conv,
            sign_eps: file.sign_eps,
        };
        let y0 = OpinionMatrix::from_rows(&file.y0)?;
        Self::new(file.name, y0, Stubbornness::new(file.theta), config)
    }

    pub fn to_file_repr(&self) -> ScenarioFile {
        ScenarioFile {
            name: self.name.clone(),
            y0: self.inputs.y0().to_rows(),
            theta: self.inputs.theta().as_slice().to_vec(),
            horizon: self.config.horizon,
            tol_conv: self.config.tol_conv,
            sign_eps: self.config.sign_eps,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file_repr()).expect("scenario serializes")
    }
}

pub fn parse_scenario(text: &str) -> Result<Scenario, IoError> {
    let file: ScenarioFile = serde_json::from_str(text).map_err(|e| IoError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    Scenario::from_file_repr(file)
}

pub fn load_scenario(path: &Path) -> Result<Scenario, IoError> {
    let text = fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
    parse_scenario(&text)
}

pub fn save_scenario(scenario: &Scenario, path: &Path) -> Result<(), IoError> {
    fs::write(path, scenario.to_json() + "\n").map_err(|e| IoError::io(path, e))
}
