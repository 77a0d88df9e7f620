//! Transition-matrix form of the dynamics.
//!
//! `Y(t) = M(t) Y(0)` with
//!
//! ```text
//! M(0)   = I
//! W(t+1) = (1/n) sgn(M(t) S0 M(t)^T),   S0 = Y(0) Y(0)^T
//! M(t+1) = (I - Θ) W(t+1) M(t) + Θ
//! ```
//!
//! Besides the recursion itself this module holds the checks on the limit
//! objects: the norm bound along the trajectory, the equilibrium residual of
//! the limit, the spectral dichotomy of the limit influence matrix and the
//! column structure of the limit transition matrix.

use nalgebra::{DMatrix, SymmetricEigen};
use thiserror::Error;

use crate::dynamics::{
    apply_update, symmetric_signs, OpinionMatrix, SignMatrix, SimulationConfig, Stubbornness,
};
use crate::graph::{is_structurally_balanced, SignedGraph};
use crate::linalg;

/// Tolerance of the eigenvalue-1 test and width of the ambiguity band
/// around spectral radius 1.
pub const TOL_EIG: f64 = 1e-9;
/// `σ_min / σ_max` below this flags a singular matrix.
pub const SINGULAR_RATIO: f64 = 1e-10;
/// Slack on `max_j |M_ji| = |M_ii|`.
pub const COLUMN_DOMINANCE_TOL: f64 = 1e-9;
/// Absolute slack on the norm bound.
pub const NORM_BOUND_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransitionError {
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("spectral radius {rho} lies within {TOL_EIG} of 1 but no eigenvalue at 1 was found")]
    SpectralAmbiguous { rho: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix(DMatrix<f64>);

impl TransitionMatrix {
    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn new(data: DMatrix<f64>) -> Self {
        assert!(data.is_square(), "transition matrix must be square");
        Self(data)
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn inf_norm(&self) -> f64 {
        linalg::inf_norm(&self.0)
    }

    /// `M · Y(0)`.
    pub fn apply(&self, y0: &OpinionMatrix) -> OpinionMatrix {
        OpinionMatrix::new(&self.0 * y0.as_matrix())
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        linalg::to_rows(&self.0)
    }
}

/// `S0 = Y(0) Y(0)^T`, computed once.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialGram(DMatrix<f64>);

impl InitialGram {
    pub fn from_opinions(y0: &OpinionMatrix) -> Self {
        let y = y0.as_matrix();
        let mut s = y * y.transpose();
        // Force exact symmetry.
        let n = s.nrows();
        for i in 0..n {
            for j in i + 1..n {
                s[(j, i)] = s[(i, j)];
            }
        }
        Self(s)
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }
}

fn check_dims(
    m: &TransitionMatrix,
    s0: &InitialGram,
    theta: &Stubbornness,
) -> Result<(), TransitionError> {
    let n = m.n();
    for (what, found) in [("gram size", s0.n()), ("stubbornness length", theta.len())] {
        if found != n {
            return Err(TransitionError::DimensionMismatch { what, expected: n, found });
        }
    }
    Ok(())
}

fn influence_from_transition(m: &TransitionMatrix, s0: &InitialGram, sign_eps: f64) -> SignMatrix {
    let ms = &m.0 * &s0.0;
    symmetric_signs(&(ms * m.0.transpose()), sign_eps)
}

/// One step of the transition recursion; returns `M(t+1)` and `W(t+1)`.
pub fn transition_step(
    m: &TransitionMatrix,
    s0: &InitialGram,
    theta: &Stubbornness,
    sign_eps: f64,
) -> Result<(TransitionMatrix, SignMatrix), TransitionError> {
    check_dims(m, s0, theta)?;
    let w = influence_from_transition(m, s0, sign_eps);
    let n = m.n();
    let next = apply_update(&w.scaled(), &m.0, &DMatrix::identity(n, n), theta.as_slice());
    Ok((TransitionMatrix(next), w))
}

/// `‖M - [(I - Θ)(1/n) sgn(M S0 M^T) M + Θ]‖∞`. Zero exactly at equilibria.
pub fn equilibrium_residual(
    m: &TransitionMatrix,
    s0: &InitialGram,
    theta: &Stubbornness,
    sign_eps: f64,
) -> f64 {
    match transition_step(m, s0, theta, sign_eps) {
        Ok((next, _)) => linalg::inf_norm_diff(&m.0, &next.0),
        Err(_) => f64::INFINITY,
    }
}

/// `α + ‖Θ‖∞`.
pub fn norm_bound(theta: &Stubbornness) -> f64 {
    theta.alpha() + theta.max()
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormBoundCheck {
    pub passed: bool,
    pub bound: f64,
    /// Largest `‖M(t)‖∞ / bound` seen; `0` for an empty trajectory.
    pub worst_ratio: f64,
    /// Index into the checked sequence of the worst matrix.
    pub worst_index: Option<usize>,
}

/// Checks `‖M(t)‖∞ <= α + ‖Θ‖∞` on matrices for `t >= 1`; the caller leaves
/// out `M(0) = I`.
pub fn check_norm_bound<'a, I>(matrices: I, theta: &Stubbornness) -> NormBoundCheck
where
    I: IntoIterator<Item = &'a TransitionMatrix>,
{
    let bound = norm_bound(theta);
    let mut check = NormBoundCheck { passed: true, bound, worst_ratio: 0.0, worst_index: None };
    for (idx, m) in matrices.into_iter().enumerate() {
        let norm = m.inf_norm();
        if norm > bound + NORM_BOUND_SLACK {
            check.passed = false;
        }
        let ratio = norm / bound;
        if check.worst_index.is_none() || ratio > check.worst_ratio {
            check.worst_ratio = ratio;
            check.worst_index = Some(idx);
        }
    }
    check
}

#[derive(Debug, Clone, PartialEq)]
pub struct WinfReport {
    pub diag_ok: bool,
    /// `1 ∈ σ((1/n) W)` within [`TOL_EIG`].
    pub eig1: bool,
    /// `ρ((1/n) W) < 1 - TOL_EIG`.
    pub schur: bool,
    pub spectral_radius: f64,
    /// Structural balance of the signed graph; computed only when `eig1`.
    pub balanced: Option<bool>,
}

impl WinfReport {
    /// Eigenvalue 1 must come with structural balance.
    pub fn dichotomy_holds(&self) -> bool {
        (self.eig1 ^ self.schur) && (!self.eig1 || self.balanced == Some(true))
    }
}

/// Eigenvalues of the symmetric matrix `(1/n) W`, ascending.
pub fn scaled_influence_eigenvalues(w: &SignMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(w.scaled()).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Spectral properties of a converged influence pattern: either
/// `(1/n) W` has eigenvalue 1 and its graph is structurally balanced, or it
/// is Schur stable. A spectral radius inside `[1 - TOL_EIG, 1 + TOL_EIG]`
/// without an eigenvalue at 1 is reported as ambiguous.
pub fn winf_properties(w: &SignMatrix) -> Result<WinfReport, TransitionError> {
    let ev = scaled_influence_eigenvalues(w);
    let rho = ev.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let eig1 = ev.iter().any(|x| (x - 1.0).abs() <= TOL_EIG);
    let schur = rho < 1.0 - TOL_EIG;
    if !eig1 && !schur {
        return Err(TransitionError::SpectralAmbiguous { rho });
    }
    let balanced = if eig1 {
        let g = SignedGraph::from_sign_matrix(w).expect("influence patterns are symmetric");
        Some(is_structurally_balanced(&g).is_balanced())
    } else {
        None
    };
    Ok(WinfReport {
        diag_ok: w.diagonal_all_positive(),
        eig1,
        schur,
        spectral_radius: rho,
        balanced,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinfReport {
    pub nonsingular: bool,
    pub column_dominant: bool,
    pub diag_positive: bool,
    /// `σ_min / σ_max`.
    pub singular_ratio: f64,
}

impl MinfReport {
    pub fn all_pass(&self) -> bool {
        self.nonsingular && self.column_dominant && self.diag_positive
    }
}

/// Nonsingularity, column dominance of the diagonal and diagonal positivity.
pub fn minf_properties(m: &TransitionMatrix) -> MinfReport {
    let sv = m.0.clone().singular_values();
    let s_max = sv.iter().copied().fold(0.0, f64::max);
    let s_min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    let singular_ratio = if s_max > 0.0 { s_min / s_max } else { 0.0 };
    let n = m.n();
    let column_dominant = (0..n).all(|i| {
        let col_max = m.0.column(i).iter().map(|x| x.abs()).fold(0.0, f64::max);
        col_max - m.0[(i, i)].abs() <= COLUMN_DOMINANCE_TOL
    });
    MinfReport {
        nonsingular: singular_ratio >= SINGULAR_RATIO,
        column_dominant,
        diag_positive: (0..n).all(|i| m.0[(i, i)] > 0.0),
        singular_ratio,
    }
}

/// Recorded run of the transition recursion.
#[derive(Debug, Clone)]
pub struct TransitionRun {
    /// `M(0), M(1), …, M(steps)`.
    pub matrices: Vec<TransitionMatrix>,
    /// `W(1), …, W(steps)`; `signs[k]` is `W(k + 1)`.
    pub signs: Vec<SignMatrix>,
    pub converged: bool,
    pub steps: u64,
}

impl TransitionRun {
    pub fn limit(&self) -> &TransitionMatrix {
        self.matrices.last().expect("M(0) is always recorded")
    }

    pub fn limit_signs(&self) -> Option<&SignMatrix> {
        self.signs.last()
    }
}

/// Iterates from `M(0) = I` until `‖M(t+1) - M(t)‖∞ < tol_conv` with an
/// unchanged influence pattern (after at least `min_steps` steps), or until
/// the horizon.
pub fn iterate_transition(
    s0: &InitialGram,
    theta: &Stubbornness,
    cfg: &SimulationConfig,
    min_steps: u64,
) -> Result<TransitionRun, TransitionError> {
    let n = s0.n();
    let mut m = TransitionMatrix::identity(n);
    check_dims(&m, s0, theta)?;
    let mut run = TransitionRun {
        matrices: vec![m.clone()],
        signs: Vec::new(),
        converged: false,
        steps: 0,
    };
    while run.steps < cfg.horizon {
        let (next, w) = transition_step(&m, s0, theta, cfg.sign_eps)?;
        let delta = linalg::inf_norm_diff(&next.0, &m.0);
        let w_same = run.signs.last() == Some(&w);
        run.steps += 1;
        run.matrices.push(next.clone());
        run.signs.push(w);
        m = next;
        if delta < cfg.tol_conv && w_same && run.steps >= min_steps {
            run.converged = true;
            break;
        }
    }
    Ok(run)
}
