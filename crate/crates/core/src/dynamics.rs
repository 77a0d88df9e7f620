//! The coupled opinion/influence recursion.
//!
//! ```text
//! W(t+1) = (1/n) sgn(Y(t) Y(t)^T)
//! Y(t+1) = (I - Θ) W(t+1) Y(t) + Θ Y(0)
//! ```
//!
//! The influence matrix is stored as integer signs ([`SignMatrix`]); the
//! `1/n` scale is applied when it multiplies opinions, so two influence
//! patterns compare equal exactly when their signs do.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg;

pub const DEFAULT_HORIZON: u64 = 1_000_000;
pub const DEFAULT_TOL_CONV: f64 = 1e-10;
pub const DEFAULT_SIGN_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("stubbornness of agent {index} is {value}; it must lie strictly between 0 and 1")]
    StubbornnessOutOfRange { index: usize, value: f64 },
    #[error("initial opinions of agent {0} are all zero")]
    ZeroRow(usize),
    #[error("initial opinions on topic {0} are all zero")]
    ZeroColumn(usize),
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("non-finite entry at ({row}, {col})")]
    NonFiniteEntry { row: usize, col: usize },
    #[error("opinion matrix must have at least one agent and one topic")]
    Empty,
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("no convergence within the horizon of {steps} steps")]
    HorizonReachedWithoutConvergence { steps: u64 },
}

/// Opinions of `n` agents (rows) on `m` topics (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct OpinionMatrix(DMatrix<f64>);

impl OpinionMatrix {
    pub fn new(data: DMatrix<f64>) -> Self {
        Self(data)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, DynamicsError> {
        let expected = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != expected) {
            return Err(DynamicsError::DimensionMismatch {
                what: "opinion row length",
                expected,
                found: bad.len(),
            });
        }
        Ok(Self(linalg::from_rows(rows).expect("rows checked")))
    }

    pub fn agents(&self) -> usize {
        self.0.nrows()
    }

    pub fn topics(&self) -> usize {
        self.0.ncols()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn get(&self, agent: usize, topic: usize) -> f64 {
        self.0[(agent, topic)]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        linalg::to_rows(&self.0)
    }
}

/// Per-agent stubbornness `θ`, the diagonal of `Θ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Stubbornness(Vec<f64>);

impl Stubbornness {
    pub fn new(theta: Vec<f64>) -> Self {
        Self(theta)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `α = max_i (1 - θ_i)`.
    pub fn alpha(&self) -> f64 {
        self.0.iter().map(|t| 1.0 - t).fold(f64::NEG_INFINITY, f64::max)
    }

    /// `‖Θ‖∞ = max_i θ_i`.
    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        for (index, &value) in self.0.iter().enumerate() {
            if !(value > 0.0 && value < 1.0) {
                return Err(DynamicsError::StubbornnessOutOfRange { index, value });
            }
        }
        Ok(())
    }
}

/// Symmetric `n × n` matrix over `{-1, 0, +1}`.
///
/// The influence matrix is `(1/n)` times this pattern.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignMatrix {
    n: usize,
    signs: Vec<i8>,
}

impl SignMatrix {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> i8) -> Self {
        let mut signs = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let s = f(i, j);
                assert!((-1..=1).contains(&s), "sign out of range: {s}");
                signs.push(s);
            }
        }
        Self { n, signs }
    }

    /// Builds from rows of signs. Entries outside `{-1, 0, 1}` or non-square
    /// input are rejected; symmetry is not required here.
    pub fn from_rows(rows: &[Vec<i8>]) -> Result<Self, DynamicsError> {
        let n = rows.len();
        for row in rows {
            if row.len() != n {
                return Err(DynamicsError::DimensionMismatch {
                    what: "sign matrix row length",
                    expected: n,
                    found: row.len(),
                });
            }
            if let Some(&s) = row.iter().find(|s| !(-1..=1).contains(*s)) {
                return Err(DynamicsError::InvalidConfig(format!(
                    "sign entry {s} outside {{-1, 0, 1}}"
                )));
            }
        }
        Ok(Self::from_fn(n, |i, j| rows[i][j]))
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| i8::from(i == j))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> i8 {
        self.signs[i * self.n + j]
    }

    pub fn to_rows(&self) -> Vec<Vec<i8>> {
        self.signs.chunks(self.n.max(1)).map(<[i8]>::to_vec).take(self.n).collect()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (i + 1..self.n).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn has_zero_entries(&self) -> bool {
        self.signs.contains(&0)
    }

    pub fn diagonal_all_positive(&self) -> bool {
        (0..self.n).all(|i| self.get(i, i) == 1)
    }

    /// `(1/n) · signs` as a real matrix.
    pub fn scaled(&self) -> DMatrix<f64> {
        let scale = 1.0 / self.n as f64;
        DMatrix::from_fn(self.n, self.n, |i, j| f64::from(self.get(i, j)) * scale)
    }
}

/// Inputs that passed [`validate_inputs`].
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedInputs {
    y0: OpinionMatrix,
    theta: Stubbornness,
}

impl ValidatedInputs {
    pub fn y0(&self) -> &OpinionMatrix {
        &self.y0
    }

    pub fn theta(&self) -> &Stubbornness {
        &self.theta
    }

    pub fn agents(&self) -> usize {
        self.y0.agents()
    }

    pub fn topics(&self) -> usize {
        self.y0.topics()
    }
}

/// Checks stubbornness range, absence of all-zero rows and columns,
/// dimensions and finiteness.
pub fn validate_inputs(
    y0: OpinionMatrix,
    theta: Stubbornness,
) -> Result<ValidatedInputs, DynamicsError> {
    let (n, m) = (y0.agents(), y0.topics());
    if n == 0 || m == 0 {
        return Err(DynamicsError::Empty);
    }
    if theta.len() != n {
        return Err(DynamicsError::DimensionMismatch {
            what: "stubbornness length",
            expected: n,
            found: theta.len(),
        });
    }
    for i in 0..n {
        for j in 0..m {
            if !y0.get(i, j).is_finite() {
                return Err(DynamicsError::NonFiniteEntry { row: i, col: j });
            }
        }
    }
    theta.validate()?;
    let data = y0.as_matrix();
    if let Some(i) = (0..n).find(|&i| data.row(i).iter().all(|&x| x == 0.0)) {
        return Err(DynamicsError::ZeroRow(i));
    }
    if let Some(j) = (0..m).find(|&j| data.column(j).iter().all(|&x| x == 0.0)) {
        return Err(DynamicsError::ZeroColumn(j));
    }
    Ok(ValidatedInputs { y0, theta })
}

/// Sign with a symmetric zero band: `0` when `|x| <= sign_eps`.
pub fn sgn_scalar(x: f64, sign_eps: f64) -> i8 {
    if x.abs() <= sign_eps {
        0
    } else if x > 0.0 {
        1
    } else {
        -1
    }
}

/// Signs of a matrix that is symmetric in exact arithmetic. Each pair is
/// evaluated once on the averaged entry, so the result is exactly symmetric
/// even when roundoff breaks the symmetry of `a`.
pub(crate) fn symmetric_signs(a: &DMatrix<f64>, sign_eps: f64) -> SignMatrix {
    let n = a.nrows();
    SignMatrix::from_fn(n, |i, j| {
        let v = if i == j { a[(i, i)] } else { 0.5 * (a[(i, j)] + a[(j, i)]) };
        sgn_scalar(v, sign_eps)
    })
}

/// Homophily appraisal: signs of the pairwise inner products of opinion rows.
pub fn influence_update(y: &OpinionMatrix, sign_eps: f64) -> SignMatrix {
    let data = y.as_matrix();
    let gram = data * data.transpose();
    symmetric_signs(&gram, sign_eps)
}

/// One opinion update `(I - Θ)(1/n) W Y + Θ Y0`.
pub fn opinion_step(
    y: &OpinionMatrix,
    y0: &OpinionMatrix,
    theta: &Stubbornness,
    w_signs: &SignMatrix,
) -> Result<OpinionMatrix, DynamicsError> {
    let n = y.agents();
    let check = |what, found| {
        if found == n {
            Ok(())
        } else {
            Err(DynamicsError::DimensionMismatch { what, expected: n, found })
        }
    };
    check("initial opinion agents", y0.agents())?;
    check("stubbornness length", theta.len())?;
    check("influence size", w_signs.n())?;
    if y0.topics() != y.topics() {
        return Err(DynamicsError::DimensionMismatch {
            what: "topic count",
            expected: y.topics(),
            found: y0.topics(),
        });
    }
    Ok(OpinionMatrix(apply_update(
        &w_signs.scaled(),
        y.as_matrix(),
        y0.as_matrix(),
        theta.as_slice(),
    )))
}

/// `(I - Θ) W x + Θ anchor`, row by row. Shared by the opinion and the
/// transition recursions.
pub(crate) fn apply_update(
    w_scaled: &DMatrix<f64>,
    x: &DMatrix<f64>,
    anchor: &DMatrix<f64>,
    theta: &[f64],
) -> DMatrix<f64> {
    let mut out = w_scaled * x;
    for (i, &t) in theta.iter().enumerate() {
        let mut row = out.row_mut(i);
        row *= 1.0 - t;
        row += anchor.row(i) * t;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub horizon: u64,
    pub tol_conv: f64,
    pub sign_eps: f64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            horizon: DEFAULT_HORIZON,
            tol_conv: DEFAULT_TOL_CONV,
            sign_eps: DEFAULT_SIGN_EPS,
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        if self.horizon < 1 {
            return Err(DynamicsError::InvalidConfig("horizon must be at least 1".into()));
        }
        if !(self.tol_conv > 0.0 && self.tol_conv.is_finite()) {
            return Err(DynamicsError::InvalidConfig(format!(
                "tol_conv must be positive, got {}",
                self.tol_conv
            )));
        }
        if !(self.sign_eps >= 0.0 && self.sign_eps.is_finite()) {
            return Err(DynamicsError::InvalidConfig(format!(
                "sign_eps must be non-negative, got {}",
                self.sign_eps
            )));
        }
        Ok(())
    }
}

/// Live state of a run: `Y(t)`, `W(t)` (absent at `t = 0`) and the step at
/// which the current influence pattern first appeared.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationState {
    t: u64,
    y: OpinionMatrix,
    w_signs: Option<SignMatrix>,
    lock_time: Option<u64>,
}

impl SimulationState {
    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn y(&self) -> &OpinionMatrix {
        &self.y
    }

    pub fn w_signs(&self) -> Option<&SignMatrix> {
        self.w_signs.as_ref()
    }

    pub fn lock_time(&self) -> Option<u64> {
        self.lock_time
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    /// `‖Y(t+1) - Y(t)‖∞`.
    pub delta: f64,
    /// Whether `W(t+1)` differs from `W(t)`; always true on the first step.
    pub w_changed: bool,
}

/// Step-by-step driver over validated inputs. `Y(0)` lives in the inputs and
/// is never touched.
#[derive(Debug, Clone)]
pub struct Simulation<'a> {
    inputs: &'a ValidatedInputs,
    sign_eps: f64,
    state: SimulationState,
}

impl<'a> Simulation<'a> {
    pub fn new(inputs: &'a ValidatedInputs, sign_eps: f64) -> Self {
        Self {
            inputs,
            sign_eps,
            state: SimulationState {
                t: 0,
                y: inputs.y0.clone(),
                w_signs: None,
                lock_time: None,
            },
        }
    }

    /// Resumes from a previously reached point, e.g. a converged limit.
    pub fn resume(
        inputs: &'a ValidatedInputs,
        sign_eps: f64,
        t: u64,
        y: OpinionMatrix,
        w_signs: SignMatrix,
        lock_time: u64,
    ) -> Self {
        assert!(lock_time <= t, "lock time {lock_time} after step {t}");
        Self {
            inputs,
            sign_eps,
            state: SimulationState {
                t,
                y,
                w_signs: Some(w_signs),
                lock_time: Some(lock_time),
            },
        }
    }

    pub fn state(&self) -> &SimulationState {
        &self.state
    }

    pub fn step(&mut self) -> StepInfo {
        let inputs = self.inputs;
        let w_next = influence_update(&self.state.y, self.sign_eps);
        let y_next = OpinionMatrix(apply_update(
            &w_next.scaled(),
            self.state.y.as_matrix(),
            inputs.y0.as_matrix(),
            inputs.theta.as_slice(),
        ));
        let delta = linalg::inf_norm_diff(y_next.as_matrix(), self.state.y.as_matrix());
        let w_changed = self.state.w_signs.as_ref() != Some(&w_next);
        self.state.t += 1;
        if w_changed {
            self.state.lock_time = Some(self.state.t);
        }
        self.state.y = y_next;
        self.state.w_signs = Some(w_next);
        StepInfo { delta, w_changed }
    }
}

/// One recorded point of a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: u64,
    pub y: OpinionMatrix,
    /// `W(t)`; `None` at `t = 0`.
    pub w_signs: Option<SignMatrix>,
}

#[derive(Debug, Clone)]
pub struct SimulationOutcome {
    pub trajectory: Vec<Snapshot>,
    pub converged: bool,
    /// Step count `t*` at halt.
    pub steps: u64,
    pub y_inf: OpinionMatrix,
    pub w_inf: SignMatrix,
    /// First step of the final, unchanged run of influence patterns.
    pub lock_time: Option<u64>,
    /// `‖Y(t*) - Y(t*-1)‖∞`.
    pub last_delta: f64,
    /// Every recorded `‖Y(t)‖∞` stayed within `(α + ‖Θ‖∞) ‖Y(0)‖∞`.
    pub opinion_bound_ok: bool,
    /// No recorded opinion row fell inside the zero band.
    pub zero_rows_absent: bool,
}

impl SimulationOutcome {
    /// Turns a flagged non-converged outcome into an error.
    pub fn into_converged(self) -> Result<Self, DynamicsError> {
        if self.converged {
            Ok(self)
        } else {
            Err(DynamicsError::HorizonReachedWithoutConvergence { steps: self.steps })
        }
    }
}

/// Iterates until opinions settle to `tol_conv` with an unchanged influence
/// pattern, or until the horizon. Hitting the horizon is not an error: the
/// partial trajectory comes back with `converged = false`.
pub fn simulate(
    inputs: &ValidatedInputs,
    cfg: &SimulationConfig,
) -> Result<SimulationOutcome, DynamicsError> {
    cfg.validate()?;
    let y0_norm = linalg::inf_norm(inputs.y0.as_matrix());
    let bound = (inputs.theta.alpha() + inputs.theta.max()) * y0_norm;
    let bound_slack = 1e-12 * (1.0 + y0_norm);

    let mut sim = Simulation::new(inputs, cfg.sign_eps);
    let mut trajectory = vec![Snapshot { t: 0, y: inputs.y0.clone(), w_signs: None }];
    let mut opinion_bound_ok = true;
    let mut zero_rows_absent = true;
    let mut converged = false;
    let mut last_delta = f64::INFINITY;

    while sim.state.t < cfg.horizon {
        let info = sim.step();
        last_delta = info.delta;
        let state = &sim.state;
        let y = state.y.as_matrix();
        opinion_bound_ok &= linalg::inf_norm(y) <= bound + bound_slack;
        zero_rows_absent &= y.row_iter().all(|r| r.norm_squared() > cfg.sign_eps);
        trajectory.push(Snapshot {
            t: state.t,
            y: state.y.clone(),
            w_signs: state.w_signs.clone(),
        });
        if info.delta < cfg.tol_conv && !info.w_changed {
            converged = true;
            break;
        }
    }

    let state = sim.state;
    Ok(SimulationOutcome {
        trajectory,
        converged,
        steps: state.t,
        y_inf: state.y,
        w_inf: state.w_signs.expect("horizon >= 1 guarantees one step"),
        lock_time: state.lock_time,
        last_delta,
        opinion_bound_ok,
        zero_rows_absent,
    })
}

/// Continues a converged run for `extra` steps and reports whether the
/// influence pattern stayed bit-identical throughout.
pub fn lock_persists(
    inputs: &ValidatedInputs,
    outcome: &SimulationOutcome,
    sign_eps: f64,
    extra: u64,
) -> bool {
    let Some(lock_time) = outcome.lock_time else {
        return false;
    };
    let mut sim = Simulation::resume(
        inputs,
        sign_eps,
        outcome.steps,
        outcome.y_inf.clone(),
        outcome.w_inf.clone(),
        lock_time,
    );
    (0..extra).all(|_| !sim.step().w_changed)
}

/// `‖Y - [(I - Θ)(1/n) W Y + Θ Y0]‖∞` for a candidate limit.
pub fn fixed_point_residual(
    inputs: &ValidatedInputs,
    y: &OpinionMatrix,
    w_signs: &SignMatrix,
) -> f64 {
    let next = apply_update(
        &w_signs.scaled(),
        y.as_matrix(),
        inputs.y0.as_matrix(),
        inputs.theta.as_slice(),
    );
    linalg::inf_norm_diff(y.as_matrix(), &next)
}
