//! Test-only helpers: an extended-precision reference iteration, random
//! instance generators and fixture paths.
#![allow(dead_code)]

pub mod dd;

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use signed_fj::{validate_inputs, OpinionMatrix, Stubbornness, ValidatedInputs};

use dd::Dd;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden").join(name)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random validated instance with `n <= max_n`, `m <= max_m`, opinions in
/// `[-10, 10]` and stubbornness in `(0.05, 0.95)`.
pub fn random_instance(rng: &mut impl Rng, max_n: usize, max_m: usize) -> ValidatedInputs {
    loop {
        let n = rng.gen_range(1..=max_n);
        let m = rng.gen_range(1..=max_m);
        let rows: Vec<Vec<f64>> =
            (0..n).map(|_| (0..m).map(|_| rng.gen_range(-10.0..=10.0)).collect()).collect();
        let theta: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..0.95)).collect();
        if let Ok(v) =
            validate_inputs(OpinionMatrix::from_rows(&rows).unwrap(), Stubbornness::new(theta))
        {
            return v;
        }
    }
}

/// Single-topic instance whose opinions avoid the zero band.
pub fn random_single_topic(rng: &mut impl Rng, max_n: usize, sign_eps: f64) -> ValidatedInputs {
    let n = rng.gen_range(1..=max_n);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| loop {
            let x: f64 = rng.gen_range(-10.0..=10.0);
            if x.abs() > sign_eps {
                break vec![x];
            }
        })
        .collect();
    let theta: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..0.95)).collect();
    validate_inputs(OpinionMatrix::from_rows(&rows).unwrap(), Stubbornness::new(theta)).unwrap()
}

/// Result of the reference iteration.
pub struct OracleRun {
    pub y: Vec<Vec<Dd>>,
    /// Signs of the last influence matrix.
    pub w_signs: Vec<Vec<i8>>,
    /// Last step at which the influence signs changed (1-based step index).
    pub last_change: usize,
}

impl OracleRun {
    pub fn y_f64(&self) -> Vec<Vec<f64>> {
        self.y.iter().map(|r| r.iter().map(|x| x.to_f64()).collect()).collect()
    }
}

/// Plain loops over double-double numbers, no shared code with the engine:
/// `W = sgn(Y Y^T)`, `Y <- (1 - θ_i)/n · (W Y)_i + θ_i · Y0_i`.
#[allow(clippy::needless_range_loop)]
pub fn reference_iteration(y0: &[Vec<f64>], theta: &[f64], steps: usize, sign_eps: f64) -> OracleRun {
    let n = y0.len();
    let m = y0[0].len();
    let y0d: Vec<Vec<Dd>> = y0.iter().map(|r| r.iter().map(|&x| Dd::from(x)).collect()).collect();
    let mut y = y0d.clone();
    let mut prev: Option<Vec<Vec<i8>>> = None;
    let mut last_change = 0;
    for step in 1..=steps {
        let mut w = vec![vec![0i8; n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut s = Dd::ZERO;
                for k in 0..m {
                    s = s + y[i][k] * y[j][k];
                }
                let v = s.to_f64();
                w[i][j] = if v.abs() <= sign_eps { 0 } else if v > 0.0 { 1 } else { -1 };
            }
        }
        let mut next = vec![vec![Dd::ZERO; m]; n];
        for i in 0..n {
            let damp = (Dd::from(1.0) - Dd::from(theta[i])).div_f64(n as f64);
            for k in 0..m {
                let mut acc = Dd::ZERO;
                for j in 0..n {
                    match w[i][j] {
                        1 => acc = acc + y[j][k],
                        -1 => acc = acc - y[j][k],
                        _ => {}
                    }
                }
                next[i][k] = damp * acc + Dd::from(theta[i]) * y0d[i][k];
            }
        }
        if prev.as_ref() != Some(&w) {
            last_change = step;
        }
        prev = Some(w);
        y = next;
    }
    OracleRun { y, w_signs: prev.unwrap_or_default(), last_change }
}
