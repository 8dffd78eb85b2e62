//! Evaluation criteria and the margin-factor comparison rule.
//!
//! A criterion scores a fitted model on a sample. Two candidates are compared
//! by [`compare_models`]: the second wins only if its criterion undercuts the
//! first by the factor `f`. When both criteria converge in probability and the
//! limits satisfy `c₂ < f·c₁`, the probability of keeping the wrong model
//! vanishes as the sample grows.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::network::OutputWeights;

/// Scoring rule applied to a reference vector (observed responses or, in
/// simulations, the true conditional means) and the model's predictions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Criterion {
    /// Mean squared residual.
    LeastSquares,
    /// Mean Huber loss with threshold `k`.
    Huber { k: f64 },
    /// Mean squared distance to the true conditional mean.
    MspeVsTruth,
}

impl Criterion {
    pub fn evaluate(&self, reference: &[f64], predicted: &[f64]) -> Result<f64> {
        match *self {
            Criterion::LeastSquares | Criterion::MspeVsTruth => mean_squared_error(reference, predicted),
            Criterion::Huber { k } => {
                check_huber_k(k)?;
                check_lengths(reference, predicted)?;
                let n = reference.len() as f64;
                Ok(reference
                    .iter()
                    .zip(predicted)
                    .map(|(y, p)| huber_rho(y - p, k))
                    .sum::<f64>()
                    / n)
            }
        }
    }
}

fn check_lengths(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::dim(format!("{} values vs {} values", a.len(), b.len())));
    }
    if a.is_empty() {
        return Err(Error::dim("criterion of an empty sample"));
    }
    Ok(())
}

fn check_huber_k(k: f64) -> Result<()> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::param("K", format!("Huber threshold must be positive, got {k}")));
    }
    Ok(())
}

/// `(1/n) Σ (aₜ − bₜ)²`.
pub fn mean_squared_error(a: &[f64], b: &[f64]) -> Result<f64> {
    check_lengths(a, b)?;
    Ok(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64)
}

/// Huber loss: `u²/2` for `|u| ≤ k`, `k(|u| − k/2)` beyond.
#[inline]
pub fn huber_rho(u: f64, k: f64) -> f64 {
    let a = u.abs();
    if a <= k {
        0.5 * u * u
    } else {
        k * (a - 0.5 * k)
    }
}

fn fitted(x: &Matrix, beta: &OutputWeights, n: usize) -> Result<Vec<f64>> {
    if beta.n_outputs() != 1 {
        return Err(Error::dim("criteria are defined for a single output"));
    }
    if x.rows() != n {
        return Err(Error::dim(format!("{n} responses but {} design rows", x.rows())));
    }
    Ok(x.matmul(beta.beta())?.into_vec())
}

/// Least squares data fidelity `(1/n) Σ (Yₜ − xₜᵀβ)²` with `X` the hidden
/// output matrix (leading constant column included).
pub fn data_fidelity(y: &[f64], x: &Matrix, beta: &OutputWeights) -> Result<f64> {
    let p = fitted(x, beta, y.len())?;
    Criterion::LeastSquares.evaluate(y, &p)
}

/// Mean Huber loss of the residuals.
pub fn huber_criterion(y: &[f64], x: &Matrix, beta: &OutputWeights, k: f64) -> Result<f64> {
    check_huber_k(k)?;
    let p = fitted(x, beta, y.len())?;
    Criterion::Huber { k }.evaluate(y, &p)
}

/// Mean squared distance of predictions from the true conditional means.
pub fn mspe_vs_truth(true_mean: &[f64], predicted: &[f64]) -> Result<f64> {
    Criterion::MspeVsTruth.evaluate(true_mean, predicted)
}

/// Empirical `p`-quantile of sorted data, linearly interpolating between
/// order statistics at position `(n − 1)·p`.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p;
    let lo = crate::math::floor(h) as usize;
    if lo + 1 >= n {
        return sorted[n - 1];
    }
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
}

/// Empirical quantile of unsorted data.
pub fn quantile(values: &[f64], p: f64) -> f64 {
    let mut s = values.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    quantile_sorted(&s, p)
}

/// Prediction error split by the size of `|ê|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MspeDecomposition {
    pub total: f64,
    /// `|ê| ≤ q_lo`.
    pub lower_tail: f64,
    /// `q_lo < |ê| ≤ q_hi`.
    pub central: f64,
    /// `|ê| > q_hi`.
    pub upper_tail: f64,
    pub q_lo: f64,
    pub q_hi: f64,
}

/// Splits `(1/n) Σ êᵢ²` over three index sets defined by the empirical
/// `p_lo` and `p_hi` quantiles of `|ê|`. The sets partition the sample, so the
/// parts add up to the total.
pub fn decompose_mspe(errors: &[f64], p_lo: f64, p_hi: f64) -> Result<MspeDecomposition> {
    if errors.len() < 2 {
        return Err(Error::param(
            "errors",
            format!("decomposition needs at least 2 errors, got {}", errors.len()),
        ));
    }
    if !(0.0 < p_lo && p_lo < p_hi && p_hi < 1.0) {
        return Err(Error::param(
            "p_lo/p_hi",
            format!("need 0 < p_lo < p_hi < 1, got {p_lo} and {p_hi}"),
        ));
    }
    let mut abs: Vec<f64> = errors.iter().map(|e| e.abs()).collect();
    abs.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    let q_lo = quantile_sorted(&abs, p_lo);
    let q_hi = quantile_sorted(&abs, p_hi);
    let n = errors.len() as f64;
    let (mut lower, mut central, mut upper) = (0.0, 0.0, 0.0);
    for e in errors {
        let a = e.abs();
        let sq = e * e;
        if a <= q_lo {
            lower += sq;
        } else if a <= q_hi {
            central += sq;
        } else {
            upper += sq;
        }
    }
    let (lower_tail, central, upper_tail) = (lower / n, central / n, upper / n);
    Ok(MspeDecomposition {
        total: lower_tail + central + upper_tail,
        lower_tail,
        central,
        upper_tail,
        q_lo,
        q_hi,
    })
}

/// Outcome of [`compare_models`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    PreferModel2,
    KeepModel1,
}

/// Prefer model 2 iff `c2 < c1·f`.
pub fn compare_models(c1: f64, c2: f64, f: f64) -> Result<Decision> {
    if !(f > 0.0 && f <= 1.0) {
        return Err(Error::param("f", format!("margin factor must lie in (0, 1], got {f}")));
    }
    Ok(if c2 < c1 * f {
        Decision::PreferModel2
    } else {
        Decision::KeepModel1
    })
}

/// Restricted model for testing the relevance of the first `keep_from`
/// inputs: keeps weight columns `keep_from..q` and the bias.
pub fn zero_out_inputs(w: &Matrix, b: &[f64], keep_from: usize) -> Result<(Matrix, Vec<f64>)> {
    if keep_from > w.cols() {
        return Err(Error::param(
            "keep_from",
            format!("must not exceed the {} input columns, got {keep_from}", w.cols()),
        ));
    }
    if b.len() != w.rows() {
        return Err(Error::dim("bias length differs from weight rows"));
    }
    Ok((w.columns_from(keep_from), b.to_vec()))
}
