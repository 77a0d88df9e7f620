//! Closed-form limits for a single discussion topic.
//!
//! With `m = 1` the sign vector `v = sgn(y(0))` never changes, the influence
//! matrix is `(1/n) v v^T` from the first step on, and
//!
//! ```text
//! M∞ = [I + (1/Σθ) (I - Θ) v v^T] Θ,     y∞ = M∞ y(0).
//! ```

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use thiserror::Error;

use crate::dynamics::{sgn_scalar, DynamicsError, SignMatrix, SimulationOutcome, Stubbornness};
use crate::transition::TransitionMatrix;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SingleTopicError {
    #[error("initial opinion of agent {0} is zero (within the sign band)")]
    ZeroEntry(usize),
    #[error("stubbornness of agent {index} is {value}; it must lie strictly between 0 and 1")]
    StubbornnessOutOfRange { index: usize, value: f64 },
    #[error("stubbornness has length {found}, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("closed form applies to a single topic, run has {topics}")]
    NotSingleTopic { topics: usize },
}

/// `sgn(y(0))`, free of zeros.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignVector(Vec<i8>);

impl SignVector {
    pub fn from_opinions(y0: &[f64], sign_eps: f64) -> Result<Self, SingleTopicError> {
        y0.iter()
            .enumerate()
            .map(|(i, &x)| match sgn_scalar(x, sign_eps) {
                0 => Err(SingleTopicError::ZeroEntry(i)),
                s => Ok(s),
            })
            .collect::<Result<_, _>>()
            .map(Self)
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    /// `v v^T`.
    pub fn outer(&self) -> SignMatrix {
        SignMatrix::from_fn(self.0.len(), |i, j| self.0[i] * self.0[j])
    }
}

fn checked_theta(theta: &Stubbornness, n: usize) -> Result<(), SingleTopicError> {
    if theta.len() != n {
        return Err(SingleTopicError::DimensionMismatch { expected: n, found: theta.len() });
    }
    theta.validate().map_err(|e| match e {
        DynamicsError::StubbornnessOutOfRange { index, value } => {
            SingleTopicError::StubbornnessOutOfRange { index, value }
        }
        other => unreachable!("stubbornness validation returned {other:?}"),
    })
}

/// Limit influence pattern `v(0) v(0)^T`.
pub fn single_topic_winf(y0: &[f64], sign_eps: f64) -> Result<SignMatrix, SingleTopicError> {
    Ok(SignVector::from_opinions(y0, sign_eps)?.outer())
}

pub fn single_topic_minf(
    y0: &[f64],
    theta: &Stubbornness,
    sign_eps: f64,
) -> Result<TransitionMatrix, SingleTopicError> {
    let v = SignVector::from_opinions(y0, sign_eps)?;
    checked_theta(theta, y0.len())?;
    let th = theta.as_slice();
    let total = theta.sum();
    let v = v.as_slice();
    let n = y0.len();
    Ok(TransitionMatrix::new(DMatrix::from_fn(n, n, |i, j| {
        let coupling = (1.0 - th[i]) * f64::from(v[i] * v[j]) / total;
        (f64::from(u8::from(i == j)) + coupling) * th[j]
    })))
}

/// Asymptotic opinions `M∞ y(0)`.
pub fn single_topic_yinf(
    y0: &[f64],
    theta: &Stubbornness,
    sign_eps: f64,
) -> Result<Vec<f64>, SingleTopicError> {
    let m = single_topic_minf(y0, theta, sign_eps)?;
    let y = m.as_matrix() * DVector::from_column_slice(y0);
    Ok(y.iter().copied().collect())
}

/// Whether every recorded `W(t)`, `t >= 1`, of a single-topic run equals
/// `v(0) v(0)^T` exactly.
pub fn check_w_lock_single_topic(
    outcome: &SimulationOutcome,
    sign_eps: f64,
) -> Result<bool, SingleTopicError> {
    let y0 = &outcome.trajectory[0].y;
    if y0.topics() != 1 {
        return Err(SingleTopicError::NotSingleTopic { topics: y0.topics() });
    }
    let column: Vec<f64> = y0.as_matrix().column(0).iter().copied().collect();
    let expected = single_topic_winf(&column, sign_eps)?;
    Ok(outcome
        .trajectory
        .iter()
        .filter(|s| s.t >= 1)
        .all(|s| s.w_signs.as_ref() == Some(&expected)))
}

/// Spectral radius of `(I - Θ)(1/n) W` against the disc bound
/// `max_i (1 - θ_i)`. Returns `(rho, bound)`.
///
/// `(I - Θ) W` is similar to the symmetric `D W D` with `D = (I - Θ)^{1/2}`,
/// so its spectrum is real.
pub fn damped_influence_radius(theta: &Stubbornness, w: &SignMatrix) -> (f64, f64) {
    let d = DVector::from_iterator(theta.len(), theta.as_slice().iter().map(|t| (1.0 - t).sqrt()));
    let scaled = w.scaled();
    let sym = DMatrix::from_fn(w.n(), w.n(), |i, j| d[i] * scaled[(i, j)] * d[j]);
    let rho = SymmetricEigen::new(sym)
        .eigenvalues
        .iter()
        .map(|x| x.abs())
        .fold(0.0, f64::max);
    (rho, theta.alpha())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{simulate, validate_inputs, OpinionMatrix, SimulationConfig};
    use crate::graph::{is_structurally_balanced, Side, SignedGraph};
    use crate::transition::{equilibrium_residual, minf_properties, InitialGram};

    fn theta(v: &[f64]) -> Stubbornness {
        Stubbornness::new(v.to_vec())
    }

    fn column(y: &[f64]) -> OpinionMatrix {
        OpinionMatrix::from_rows(&y.iter().map(|&x| vec![x]).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn winf_patterns() {
        let w = single_topic_winf(&[2.0, 1.0], 1e-12).unwrap();
        assert_eq!(w, SignMatrix::from_fn(2, |_, _| 1));
        let w = single_topic_winf(&[1.0, -1.0], 1e-12).unwrap();
        assert_eq!(w.to_rows(), vec![vec![1, -1], vec![-1, 1]]);

        let y0 = [-18.8898, 42.3380, -6.9793, -31.5184, 40.4881];
        let v = SignVector::from_opinions(&y0, 1e-12).unwrap();
        assert_eq!(v.as_slice(), &[-1, 1, -1, -1, 1]);
        let w = single_topic_winf(&y0, 1e-12).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(w.get(i, j), v.as_slice()[i] * v.as_slice()[j]);
            }
        }
        let g = SignedGraph::from_sign_matrix(&w).unwrap();
        let p = is_structurally_balanced(&g).partition().cloned().unwrap();
        assert_eq!(p.members(Side::A), vec![0, 2, 3]);
        assert_eq!(p.members(Side::B), vec![1, 4]);
    }

    #[test]
    fn zero_entries_rejected() {
        assert_eq!(single_topic_winf(&[1.0, 0.0], 1e-12), Err(SingleTopicError::ZeroEntry(1)));
        assert_eq!(single_topic_winf(&[1e-13, 1.0], 1e-12), Err(SingleTopicError::ZeroEntry(0)));
        assert_eq!(
            single_topic_minf(&[1.0, 2.0], &theta(&[0.5, 1.0]), 1e-12),
            Err(SingleTopicError::StubbornnessOutOfRange { index: 1, value: 1.0 })
        );
        assert_eq!(
            single_topic_minf(&[1.0, 2.0], &theta(&[0.5]), 1e-12),
            Err(SingleTopicError::DimensionMismatch { expected: 2, found: 1 })
        );
    }

    #[test]
    fn minf_hand_cases() {
        let m = single_topic_minf(&[1.0, -1.0], &theta(&[0.5, 0.5]), 1e-12).unwrap();
        assert_eq!(m.to_rows(), vec![vec![0.75, -0.25], vec![-0.25, 0.75]]);
        let m = single_topic_minf(&[2.0, 1.0], &theta(&[0.5, 0.5]), 1e-12).unwrap();
        assert_eq!(m.to_rows(), vec![vec![0.75, 0.25], vec![0.25, 0.75]]);
    }

    #[test]
    fn yinf_hand_cases() {
        let y = single_topic_yinf(&[2.0, 1.0], &theta(&[0.5, 0.5]), 1e-12).unwrap();
        assert_eq!(y, vec![1.75, 1.25]);
        let y = single_topic_yinf(&[1.0, -1.0], &theta(&[0.5, 0.5]), 1e-12).unwrap();
        assert_eq!(y, vec![1.0, -1.0]);
    }

    #[test]
    fn minf_diagonal_and_equilibrium() {
        let y0 = [3.0, -0.5, 1.25, -7.0];
        let th = theta(&[0.1, 0.35, 0.8, 0.55]);
        let m = single_topic_minf(&y0, &th, 1e-12).unwrap();
        let total = th.sum();
        for (i, &t) in th.as_slice().iter().enumerate() {
            let expected = t * (1.0 + (1.0 - t) / total);
            assert!((m.as_matrix()[(i, i)] - expected).abs() < 1e-15);
        }
        assert!(minf_properties(&m).all_pass());
        let s0 = InitialGram::from_opinions(&column(&y0));
        assert!(equilibrium_residual(&m, &s0, &th, 1e-12) < 1e-12);
    }

    #[test]
    fn constant_opinions_keep_sign() {
        for c in [-2.5, 0.7] {
            let y0 = [c; 4];
            let th = theta(&[0.2, 0.4, 0.6, 0.8]);
            let y = single_topic_yinf(&y0, &th, 1e-12).unwrap();
            assert!(y.iter().all(|x| x.signum() == c.signum()));
            let inputs = validate_inputs(column(&y0), th).unwrap();
            let out = simulate(&inputs, &SimulationConfig::default()).unwrap();
            for (i, &x) in y.iter().enumerate() {
                assert!((out.y_inf.get(i, 0) - x).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn lock_check() {
        let inputs = validate_inputs(column(&[2.0, 1.0]), theta(&[0.5, 0.5])).unwrap();
        let out = simulate(&inputs, &SimulationConfig::default()).unwrap();
        assert_eq!(check_w_lock_single_topic(&out, 1e-12), Ok(true));

        let inputs = validate_inputs(column(&[1.0, -1.0, 3.0]), theta(&[0.3, 0.6, 0.45])).unwrap();
        let out = simulate(&inputs, &SimulationConfig::default()).unwrap();
        assert_eq!(check_w_lock_single_topic(&out, 1e-12), Ok(true));

        let y = OpinionMatrix::from_rows(&[vec![1.0, 0.0], vec![0.5, 1.0]]).unwrap();
        let inputs = validate_inputs(y, theta(&[0.5, 0.5])).unwrap();
        let out = simulate(&inputs, &SimulationConfig::default()).unwrap();
        assert_eq!(
            check_w_lock_single_topic(&out, 1e-12),
            Err(SingleTopicError::NotSingleTopic { topics: 2 })
        );
    }

    #[test]
    fn damped_radius_within_disc_bound() {
        let th = theta(&[0.1, 0.5, 0.9]);
        let w = single_topic_winf(&[1.0, -2.0, 3.0], 1e-12).unwrap();
        let (rho, bound) = damped_influence_radius(&th, &w);
        assert!(rho <= bound + 1e-15);
        assert!(bound < 1.0);
        // Cross-check against the nonsymmetric product directly.
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![0.9, 0.5, 0.1]));
        let ev = (d * w.scaled()).complex_eigenvalues();
        let rho2 = ev.iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!((rho - rho2).abs() < 1e-12);
    }
}
