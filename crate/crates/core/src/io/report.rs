use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::scenario::Scenario;
use super::IoError;
use crate::dynamics::{fixed_point_residual, lock_persists, simulate, SimulationOutcome};
use crate::linalg;
use crate::single_topic::{
    check_w_lock_single_topic, damped_influence_radius, single_topic_minf, single_topic_yinf,
};
use crate::transition::{
    check_norm_bound, equilibrium_residual, iterate_transition, minf_properties, winf_properties,
    InitialGram, TransitionError, TransitionRun,
};

/// Agreement required between `M(t) Y(0)` and `Y(t)`.
pub const EQUIVALENCE_TOL: f64 = 1e-12;
/// Agreement required between the closed-form and simulated single-topic limits.
pub const CLOSED_FORM_TOL: f64 = 1e-8;
/// Equilibrium residual allowed for the closed-form transition limit.
pub const CLOSED_FORM_RESIDUAL_TOL: f64 = 1e-12;
/// Steps run past convergence to confirm the influence pattern stays put.
pub const LOCK_EXTRA_STEPS: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PropertyStatus {
    Pass,
    Fail,
    Ambiguous,
    NotApplicable,
}

impl PropertyStatus {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Self::Pass
        } else {
            Self::Fail
        }
    }

    /// Only `Fail` and `Ambiguous` count against a run.
    pub fn is_ok(self) -> bool {
        matches!(self, Self::Pass | Self::NotApplicable)
    }
}

impl fmt::Display for PropertyStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Pass => "pass",
            Self::Fail => "fail",
            Self::Ambiguous => "ambiguous",
            Self::NotApplicable => "not_applicable",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub scenario: String,
    pub agents: usize,
    pub topics: usize,
    pub converged: bool,
    pub steps: u64,
    pub lock_time: Option<u64>,
    pub y_inf: Vec<Vec<f64>>,
    /// Signs of the limit influence matrix; the matrix itself is this divided by `agents`.
    pub w_inf_signs: Vec<Vec<i8>>,
    pub m_inf: Vec<Vec<f64>>,
    pub property_results: BTreeMap<String, PropertyStatus>,
    pub residuals: BTreeMap<String, f64>,
}

impl RunReport {
    pub fn all_pass(&self) -> bool {
        self.property_results.values().all(|s| s.is_ok())
    }

    pub fn failures(&self) -> impl Iterator<Item = (&str, PropertyStatus)> {
        self.property_results.iter().filter(|(_, s)| !s.is_ok()).map(|(k, s)| (k.as_str(), *s))
    }
}

/// Everything produced by analysing one scenario.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub report: RunReport,
    pub outcome: SimulationOutcome,
    pub transition: TransitionRun,
}

/// Runs the opinion dynamics and the transition recursion side by side and
/// evaluates every invariant check on the result.
pub fn analyze(scenario: &Scenario) -> Result<Analysis, IoError> {
    let inputs = &scenario.inputs;
    let cfg = &scenario.config;
    let theta = inputs.theta();
    let y0 = inputs.y0();

    let outcome = simulate(inputs, cfg)?;
    let s0 = InitialGram::from_opinions(y0);
    let transition = iterate_transition(&s0, theta, cfg, outcome.steps)
        .expect("validated inputs have consistent dimensions");

    let mut props = BTreeMap::new();
    let mut res = BTreeMap::new();
    let mut put = |name: &str, status: PropertyStatus| {
        props.insert(name.to_string(), status);
    };

    put("converged", PropertyStatus::from_bool(outcome.converged));
    put("transition_converged", PropertyStatus::from_bool(transition.converged));
    res.insert("last_delta".into(), outcome.last_delta);

    let fp = fixed_point_residual(inputs, &outcome.y_inf, &outcome.w_inf);
    res.insert("fixed_point".into(), fp);
    put("fixed_point_residual", PropertyStatus::from_bool(fp < 10.0 * cfg.tol_conv));
    put("opinion_bound", PropertyStatus::from_bool(outcome.opinion_bound_ok));
    put("no_zero_rows", PropertyStatus::from_bool(outcome.zero_rows_absent));

    let mut equiv_max: f64 = 0.0;
    let mut signs_agree = true;
    for snap in &outcome.trajectory {
        let via_m = transition.matrices[snap.t as usize].apply(y0);
        equiv_max = equiv_max.max(linalg::max_abs_diff(via_m.as_matrix(), snap.y.as_matrix()));
        if let Some(w) = &snap.w_signs {
            signs_agree &= w == &transition.signs[snap.t as usize - 1];
        }
    }
    res.insert("transition_equivalence".into(), equiv_max);
    put("transition_equivalence", PropertyStatus::from_bool(equiv_max < EQUIVALENCE_TOL));
    put("transition_signs_agree", PropertyStatus::from_bool(signs_agree));

    let bound = check_norm_bound(&transition.matrices[1..], theta);
    res.insert("norm_bound_worst_ratio".into(), bound.worst_ratio);
    put("norm_bound", PropertyStatus::from_bool(bound.passed));

    let m_inf = transition.limit();
    let eq = equilibrium_residual(m_inf, &s0, theta, cfg.sign_eps);
    res.insert("equilibrium".into(), eq);
    put("equilibrium_residual", PropertyStatus::from_bool(eq < 10.0 * cfg.tol_conv));

    let w_inf = &outcome.w_inf;
    put("winf_diagonal", PropertyStatus::from_bool(w_inf.diagonal_all_positive()));
    match winf_properties(w_inf) {
        Ok(r) => {
            res.insert("spectral_radius".into(), r.spectral_radius);
            put("winf_dichotomy", PropertyStatus::from_bool(r.eig1 ^ r.schur));
            put(
                "winf_balanced_if_eig1",
                match r.balanced {
                    None => PropertyStatus::NotApplicable,
                    Some(b) => PropertyStatus::from_bool(b),
                },
            );
        }
        Err(TransitionError::SpectralAmbiguous { rho }) => {
            res.insert("spectral_radius".into(), rho);
            put("winf_dichotomy", PropertyStatus::Ambiguous);
            put("winf_balanced_if_eig1", PropertyStatus::Ambiguous);
        }
        Err(e) => unreachable!("winf_properties returned {e:?}"),
    }

    put(
        "lock_persistence",
        PropertyStatus::from_bool(
            outcome.converged && lock_persists(inputs, &outcome, cfg.sign_eps, LOCK_EXTRA_STEPS),
        ),
    );

    let mr = minf_properties(m_inf);
    res.insert("singular_ratio".into(), mr.singular_ratio);
    put("minf_nonsingular", PropertyStatus::from_bool(mr.nonsingular));
    put("minf_column_dominance", PropertyStatus::from_bool(mr.column_dominant));
    put("minf_diag_positive", PropertyStatus::from_bool(mr.diag_positive));

    let single_topic_names =
        ["single_topic_w_lock", "closed_form_match", "closed_form_equilibrium", "damped_stability"];
    if y0.topics() == 1 {
        let col: Vec<f64> = y0.as_matrix().column(0).iter().copied().collect();
        let lock = check_w_lock_single_topic(&outcome, cfg.sign_eps);
        put("single_topic_w_lock", PropertyStatus::from_bool(lock == Ok(true)));
        match (
            single_topic_yinf(&col, theta, cfg.sign_eps),
            single_topic_minf(&col, theta, cfg.sign_eps),
        ) {
            (Ok(y_closed), Ok(m_closed)) => {
                let diff = y_closed
                    .iter()
                    .enumerate()
                    .map(|(i, y)| (y - outcome.y_inf.get(i, 0)).abs())
                    .fold(0.0, f64::max);
                res.insert("closed_form_max_diff".into(), diff);
                put("closed_form_match", PropertyStatus::from_bool(diff < CLOSED_FORM_TOL));
                let r = equilibrium_residual(&m_closed, &s0, theta, cfg.sign_eps);
                res.insert("closed_form_equilibrium".into(), r);
                put(
                    "closed_form_equilibrium",
                    PropertyStatus::from_bool(r < CLOSED_FORM_RESIDUAL_TOL),
                );
                let (rho, disc) = damped_influence_radius(theta, w_inf);
                res.insert("damped_spectral_radius".into(), rho);
                put("damped_stability", PropertyStatus::from_bool(rho <= disc + 1e-12 && disc < 1.0));
            }
            _ => {
                // Entries inside the sign band: no closed form.
                for name in &single_topic_names[1..] {
                    put(name, PropertyStatus::Fail);
                }
            }
        }
    } else {
        for name in single_topic_names {
            put(name, PropertyStatus::NotApplicable);
        }
    }

    let report = RunReport {
        scenario: scenario.name.clone(),
        agents: y0.agents(),
        topics: y0.topics(),
        converged: outcome.converged,
        steps: outcome.steps,
        lock_time: outcome.lock_time,
        y_inf: outcome.y_inf.to_rows(),
        w_inf_signs: outcome.w_inf.to_rows(),
        m_inf: m_inf.to_rows(),
        property_results: props,
        residuals: res,
    };
    Ok(Analysis { report, outcome, transition })
}
