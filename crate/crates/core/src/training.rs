//! Output-layer training and the data preparation around it.
//!
//! The output layer is fitted in closed form. The normal equations
//! `XᵀX β = XᵀY` (or `(XᵀX + λI) β = XᵀY` for ridge) are solved by Cholesky.
//! If the factorization fails or its condition estimate exceeds
//! [`CONDITION_LIMIT`], the fit is recomputed from an SVD of `X`. A plain
//! least squares fit then returns the minimum-norm minimizer. Underdetermined
//! systems (fewer rows than columns) go to the SVD directly.
//!
//! Ridge penalizes every coordinate of β, the intercept included.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{Cholesky, JacobiSvd, Matrix};
use crate::math;
use crate::network::{OutputWeights, SolveMethod};

/// Condition estimate of the normal-equation matrix above which the SVD
/// fallback is used.
pub const CONDITION_LIMIT: f64 = 1e12;

/// What a sample is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Training,
    Validation,
    Test,
}

/// Inputs `m × q` paired with targets `m × d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    inputs: Matrix,
    targets: Matrix,
    role: Role,
}

impl Dataset {
    pub fn new(inputs: Matrix, targets: Matrix, role: Role) -> Result<Self> {
        if inputs.rows() != targets.rows() {
            return Err(Error::dim(format!(
                "{} input rows but {} target rows",
                inputs.rows(),
                targets.rows()
            )));
        }
        if inputs.rows() == 0 {
            return Err(Error::dim("a dataset needs at least one row"));
        }
        Ok(Dataset { inputs, targets, role })
    }

    /// Single-target dataset.
    pub fn with_targets(inputs: Matrix, targets: &[f64], role: Role) -> Result<Self> {
        Dataset::new(inputs, Matrix::column_vector(targets), role)
    }

    pub fn inputs(&self) -> &Matrix {
        &self.inputs
    }

    pub fn targets(&self) -> &Matrix {
        &self.targets
    }

    /// First target column.
    pub fn target_vector(&self) -> Vec<f64> {
        self.targets.column(0)
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn with_role(mut self, role: Role) -> Self {
        self.role = role;
        self
    }

    pub fn len(&self) -> usize {
        self.inputs.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn n_inputs(&self) -> usize {
        self.inputs.cols()
    }

    /// Keeps the listed rows in the listed order.
    pub fn select(&self, rows: &[usize]) -> Result<Dataset> {
        Dataset::new(self.inputs.select_rows(rows), self.targets.select_rows(rows), self.role)
    }
}

/// Per-column minima and maxima of the training inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizationSpec {
    min: Vec<f64>,
    max: Vec<f64>,
}

impl NormalizationSpec {
    pub fn new(min: Vec<f64>, max: Vec<f64>) -> Result<Self> {
        if min.len() != max.len() {
            return Err(Error::dim("minimum and maximum vectors differ in length"));
        }
        if let Some(i) = (0..min.len()).find(|&i| !(max[i] >= min[i])) {
            return Err(Error::param(
                "normalization",
                format!("column {i} has max {} below min {}", max[i], min[i]),
            ));
        }
        Ok(NormalizationSpec { min, max })
    }

    pub fn min(&self) -> &[f64] {
        &self.min
    }

    pub fn max(&self) -> &[f64] {
        &self.max
    }

    pub fn n_inputs(&self) -> usize {
        self.min.len()
    }

    /// Constant training column; it is mapped to 0.
    pub fn is_degenerate(&self, column: usize) -> bool {
        self.max[column] == self.min[column]
    }

    /// Maps each column linearly so the training range becomes `[-1, 1]`.
    /// Values outside the training range land outside `[-1, 1]`.
    pub fn apply(&self, inputs: &Matrix) -> Result<Matrix> {
        if inputs.cols() != self.n_inputs() {
            return Err(Error::dim(format!(
                "normalization fitted on {} columns, data has {}",
                self.n_inputs(),
                inputs.cols()
            )));
        }
        let mut out = inputs.clone();
        for t in 0..out.rows() {
            for (i, v) in out.row_mut(t).iter_mut().enumerate() {
                *v = self.map(i, *v);
            }
        }
        Ok(out)
    }

    #[inline]
    fn map(&self, column: usize, v: f64) -> f64 {
        let (lo, hi) = (self.min[column], self.max[column]);
        if hi == lo {
            0.0
        } else {
            2.0 * (v - lo) / (hi - lo) - 1.0
        }
    }
}

/// Column minima and maxima of `inputs`.
pub fn fit_normalization(inputs: &Matrix) -> Result<NormalizationSpec> {
    if inputs.rows() == 0 {
        return Err(Error::dim("cannot fit a normalization on zero rows"));
    }
    let mut min = inputs.row(0).to_vec();
    let mut max = min.clone();
    for r in inputs.row_iter().skip(1) {
        for (i, &v) in r.iter().enumerate() {
            min[i] = min[i].min(v);
            max[i] = max[i].max(v);
        }
    }
    NormalizationSpec::new(min, max)
}

fn check_system(x: &Matrix, y: &Matrix) -> Result<()> {
    if x.rows() == 0 || x.cols() == 0 {
        return Err(Error::dim("least squares needs a non-empty design matrix"));
    }
    if x.rows() != y.rows() {
        return Err(Error::dim(format!(
            "design has {} rows, response has {}",
            x.rows(),
            y.rows()
        )));
    }
    Ok(())
}

/// Minimizer of `‖Y − Xβ‖²`; minimum-norm when `X` is rank deficient.
pub fn fit_least_squares(x: &Matrix, y: &Matrix) -> Result<OutputWeights> {
    solve_normal_equations(x, y, 0.0)
}

/// Solution of `(XᵀX + λI) β = XᵀY`.
pub fn fit_ridge(x: &Matrix, y: &Matrix, lambda: f64) -> Result<OutputWeights> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::param(
            "lambda",
            format!("ridge parameter must be finite and non-negative, got {lambda}"),
        ));
    }
    solve_normal_equations(x, y, lambda)
}

/// Ridge for `λ > 0`, plain least squares for `λ = 0`.
pub fn fit_output_layer(x: &Matrix, y: &Matrix, lambda: f64) -> Result<OutputWeights> {
    fit_ridge(x, y, lambda)
}

fn solve_normal_equations(x: &Matrix, y: &Matrix, lambda: f64) -> Result<OutputWeights> {
    check_system(x, y)?;
    let fast = if x.rows() >= x.cols() || lambda > 0.0 {
        let mut a = x.gram();
        for i in 0..a.rows() {
            a[(i, i)] += lambda;
        }
        Cholesky::new(&a).filter(|c| c.condition_estimate() <= CONDITION_LIMIT)
    } else {
        None
    };
    let beta = match fast {
        Some(chol) => {
            let rhs = x.t_matmul(y)?;
            OutputWeights::solved(chol.solve(&rhs), SolveMethod::Cholesky)
        }
        None => {
            let svd = JacobiSvd::new(x);
            OutputWeights::solved(svd.solve_ridge(y, lambda), SolveMethod::MinimumNorm)
        }
    };
    if beta.beta().as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::param("design", "output-layer solution is not finite"));
    }
    Ok(beta)
}

/// Diagnostic `λ·√p / n` for a ridge fit with `p` features on `n` rows.
pub fn ridge_rate_diagnostic(lambda: f64, p: usize, n: usize) -> f64 {
    lambda * math::sqrt(p as f64) / n as f64
}

/// Number of rows removed when trimming `fraction` of `m` rows.
pub fn trim_count(m: usize, fraction: f64) -> usize {
    // guard against products such as 0.07·100 = 7.000000000000001
    let raw = fraction * m as f64;
    math::ceil(raw - 1e-9 * raw.max(1.0)).max(0.0) as usize
}

/// Drops the `⌈fraction·m⌉` rows whose first target lies farthest from the
/// target median. Ties go to the earlier row. Surviving rows keep their order.
pub fn trim_extremes(data: &Dataset, fraction: f64) -> Result<Dataset> {
    if !(0.0..1.0).contains(&fraction) {
        return Err(Error::param(
            "fraction",
            format!("trim fraction must lie in [0, 1), got {fraction}"),
        ));
    }
    let m = data.len();
    let k = trim_count(m, fraction);
    if k == 0 {
        return Ok(data.clone());
    }
    if k >= m {
        return Err(Error::param(
            "fraction",
            format!("trimming {k} of {m} rows leaves nothing"),
        ));
    }
    let y = data.target_vector();
    let med = median(&y);
    let mut order: Vec<usize> = (0..m).collect();
    // stable sort keeps earlier rows first among equal deviations
    order.sort_by(|&a, &b| {
        let da = (y[a] - med).abs();
        let db = (y[b] - med).abs();
        db.partial_cmp(&da).unwrap_or(core::cmp::Ordering::Equal)
    });
    let mut drop = alloc::vec![false; m];
    for &i in &order[..k] {
        drop[i] = true;
    }
    let keep: Vec<usize> = (0..m).filter(|&i| !drop[i]).collect();
    data.select(&keep)
}

pub(crate) fn median(values: &[f64]) -> f64 {
    let mut s = values.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}
