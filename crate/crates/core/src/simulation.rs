//! Distribution of the out-of-sample error of extreme learning machines over
//! random weight draws.
//!
//! One training sample, one validation sample and one true coefficient
//! vector are fixed. For each hidden width `h` the hidden weights are redrawn
//! `runs` times, the output layer is fitted by least squares and the MSPE
//! against the true conditional mean on the validation sample is recorded.
//!
//! The data come from a generating network: a sigmoid extreme learning
//! machine with `generator_width` neurons, uniform[−1, 1] hidden weights and a
//! uniform[−1, 1] coefficient vector `β₀`, all drawn from the master seed.
//! Inputs are i.i.d. standard normal and enter the fitted networks without
//! normalization.

use alloc::format;
use alloc::vec::Vec;

use crate::criteria::{compare_models, data_fidelity, mspe_vs_truth, quantile_sorted, zero_out_inputs, Decision};
use crate::crossval::{evaluate_draws, mean, DrawEvaluator};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::math;
use crate::network::{Activation, Layer, OutputWeights, RandomizedNet};
use crate::rng::{derive_seed, draw_params, RngStream, WeightDistribution};
use crate::training::{fit_least_squares, Dataset, Role};

const GENERATOR_LABEL: u64 = 1;
const TRAINING_LABEL: u64 = 2;
const VALIDATION_LABEL: u64 = 3;
const WEIGHTS_LABEL: u64 = 4;
const NESTED_LABEL: u64 = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Training sample size.
    pub n: usize,
    /// Validation sample size.
    pub n_val: usize,
    /// Number of inputs.
    pub q: usize,
    /// Hidden widths to study.
    pub h_grid: Vec<usize>,
    /// Weight draws per width.
    pub runs: usize,
    pub noise_sd: f64,
    pub seed: u64,
    /// Hidden width of the generating network.
    pub generator_width: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n: 1000,
            n_val: 100,
            q: 5,
            h_grid: alloc::vec![2, 3, 4, 5, 6, 7, 8, 9, 10, 15, 20],
            runs: 1000,
            noise_sd: 1.0,
            seed: 0,
            generator_width: 10,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("n", self.n),
            ("nv", self.n_val),
            ("q", self.q),
            ("runs", self.runs),
            ("generator_width", self.generator_width),
        ] {
            if v == 0 {
                return Err(Error::param(name, "must be ≥ 1"));
            }
        }
        if self.h_grid.is_empty() {
            return Err(Error::param("h", "the width grid is empty"));
        }
        if self.h_grid.contains(&0) {
            return Err(Error::param("h", "hidden widths must be ≥ 1"));
        }
        if !(self.noise_sd >= 0.0) || !self.noise_sd.is_finite() {
            return Err(Error::param(
                "noise_sd",
                format!("must be finite and ≥ 0, got {}", self.noise_sd),
            ));
        }
        Ok(())
    }
}

/// Sample with known conditional mean.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSample {
    pub data: Dataset,
    /// `x_tᵀβ₀` for every row.
    pub true_mean: Vec<f64>,
}

/// `n` rows of `y_t = x_t(z_t)ᵀβ₀ + ε_t` with `z_t ~ N(0, I_q)` and
/// `ε_t ~ N(0, noise_sd²)`. The inputs are drawn row by row, then the noise.
pub fn generate_synthetic_sample(
    n: usize,
    q: usize,
    generator: &RandomizedNet,
    beta0: &OutputWeights,
    noise_sd: f64,
    rng: &mut RngStream,
) -> Result<SyntheticSample> {
    if generator.input_dim() != q {
        return Err(Error::dim(format!(
            "generator expects {} inputs, q = {q}",
            generator.input_dim()
        )));
    }
    let z: Vec<f64> = (0..n * q).map(|_| rng.standard_normal()).collect();
    let inputs = Matrix::from_vec(n, q, z)?;
    let true_mean = generator.predict(beta0, &inputs)?.into_vec();
    let targets: Vec<f64> = true_mean.iter().map(|m| m + noise_sd * rng.standard_normal()).collect();
    Ok(SyntheticSample {
        data: Dataset::with_targets(inputs, &targets, Role::Training)?,
        true_mean,
    })
}

/// Generator, coefficient vector and the fixed data realizations.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticTask {
    pub generator: RandomizedNet,
    pub beta0: OutputWeights,
    pub training: SyntheticSample,
    pub validation: SyntheticSample,
}

impl SyntheticTask {
    pub fn new(cfg: &SimConfig) -> Result<Self> {
        cfg.validate()?;
        let dist = WeightDistribution::default();
        let mut g = RngStream::new(derive_seed(cfg.seed, GENERATOR_LABEL), 0);
        let generator = draw_params(&dist, cfg.generator_width, cfg.q, Activation::Sigmoid, &mut g)?;
        let beta: Vec<f64> = (0..=cfg.generator_width).map(|_| dist.sample(&mut g)).collect();
        let beta0 = OutputWeights::from_vector(&beta);
        let mut rt = RngStream::new(derive_seed(cfg.seed, TRAINING_LABEL), 0);
        let training = generate_synthetic_sample(cfg.n, cfg.q, &generator, &beta0, cfg.noise_sd, &mut rt)?;
        let mut rv = RngStream::new(derive_seed(cfg.seed, VALIDATION_LABEL), 0);
        let mut validation = generate_synthetic_sample(cfg.n_val, cfg.q, &generator, &beta0, cfg.noise_sd, &mut rv)?;
        validation.data = validation.data.with_role(Role::Validation);
        Ok(SyntheticTask {
            generator,
            beta0,
            training,
            validation,
        })
    }
}

/// Per-draw MSPE against the true mean for one hidden width, fitted by least
/// squares on raw inputs. Draw `j` of width `h` uses its own stream.
#[derive(Debug, Clone)]
pub struct TruthDraws<'a> {
    task: &'a SyntheticTask,
    width: usize,
    seed: u64,
}

impl<'a> TruthDraws<'a> {
    pub fn new(task: &'a SyntheticTask, width: usize, seed: u64) -> Self {
        TruthDraws {
            task,
            width,
            seed: derive_seed(derive_seed(seed, WEIGHTS_LABEL), width as u64),
        }
    }

    pub fn draw(&self, j: usize) -> Result<RandomizedNet> {
        let mut rng = RngStream::new(self.seed, j as u64);
        let q = self.task.training.data.n_inputs();
        draw_params(
            &WeightDistribution::default(),
            self.width,
            q,
            Activation::Sigmoid,
            &mut rng,
        )
    }
}

impl DrawEvaluator for TruthDraws<'_> {
    type Model = ();

    fn evaluate(&self, j: usize) -> Result<(f64, ())> {
        let net = self.draw(j)?;
        let train = &self.task.training.data;
        let x = net.hidden_matrix(train.inputs())?;
        let beta = fit_least_squares(&x, train.targets())?;
        let pred = net.predict(&beta, self.task.validation.data.inputs())?;
        Ok((mspe_vs_truth(&self.task.validation.true_mean, pred.as_slice())?, ()))
    }
}

/// `runs` MSPE values for width `h`.
pub fn mspe_distribution(task: &SyntheticTask, h: usize, runs: usize, seed: u64) -> Result<Vec<f64>> {
    let draws = TruthDraws::new(task, h, seed);
    Ok(evaluate_draws(&draws, 0..runs)?.into_iter().map(|(z, _)| z).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistributionSummary {
    pub h: usize,
    pub min: f64,
    pub q25: f64,
    pub mean: f64,
    pub q95: f64,
    pub max: f64,
}

/// Min, 25% quantile, mean, 95% quantile and max of `values`, labelled `h`.
pub fn summarize_distribution(h: usize, values: &[f64]) -> Result<DistributionSummary> {
    if values.is_empty() {
        return Err(Error::param("values", "cannot summarize an empty sample"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(DistributionSummary {
        h,
        min: sorted[0],
        q25: quantile_sorted(&sorted, 0.25),
        mean: mean(values),
        q95: quantile_sorted(&sorted, 0.95),
        max: sorted[sorted.len() - 1],
    })
}

/// One summary per entry of `cfg.h_grid`, in grid order.
pub fn run_mspe_distribution_experiment(cfg: &SimConfig) -> Result<Vec<DistributionSummary>> {
    let task = SyntheticTask::new(cfg)?;
    cfg.h_grid
        .iter()
        .map(|&h| summarize_distribution(h, &mspe_distribution(&task, h, cfg.runs, cfg.seed)?))
        .collect()
}

/// Nested pair of models on data from a generating network with `q ≥ 2`
/// inputs. Model 2 uses the generator's own hidden features and is correctly
/// specified; model 1 uses the same neurons with the first input removed.
/// The noise level is calibrated so that the limiting criteria satisfy
/// `c₂/c₁ = ratio`, where `c₂ = σ²` and `c₁ = σ² + R` with `R` the
/// approximation error of model 1.
#[derive(Debug, Clone, PartialEq)]
pub struct NestedModels {
    pub generator: RandomizedNet,
    pub beta0: OutputWeights,
    pub restricted: RandomizedNet,
    pub noise_sd: f64,
    pub c1: f64,
    pub c2: f64,
    seed: u64,
}

/// Criteria of both models on one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriterionPair {
    pub c1: f64,
    pub c2: f64,
}

/// Outcome of repeated model comparisons at one sample size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionSummary {
    pub n: usize,
    /// Share of replications keeping the misspecified model 1.
    pub wrong_frequency: f64,
    /// Mean of `|C_n2/C_n1 − c₂/c₁|`.
    pub mean_ratio_error: f64,
}

impl NestedModels {
    /// `calibration` noiseless rows estimate `R`.
    pub fn new(seed: u64, q: usize, width: usize, ratio: f64, calibration: usize) -> Result<Self> {
        if q < 2 {
            return Err(Error::param("q", "nesting needs at least 2 inputs"));
        }
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::param("ratio", format!("must lie in (0, 1), got {ratio}")));
        }
        let dist = WeightDistribution::uniform(2.0)?;
        let mut g = RngStream::new(derive_seed(seed, NESTED_LABEL), 0);
        let generator = draw_params(&dist, width, q, Activation::Sigmoid, &mut g)?;
        let beta: Vec<f64> = (0..=width).map(|_| dist.sample(&mut g)).collect();
        let beta0 = OutputWeights::from_vector(&beta);
        let layer = &generator.layers()[0];
        let (w, b) = zero_out_inputs(layer.weights(), layer.bias(), 1)?;
        let restricted = RandomizedNet::new(alloc::vec![Layer::new(b, w, Activation::Sigmoid)?])?;
        let mut models = NestedModels {
            generator,
            beta0,
            restricted,
            noise_sd: 0.0,
            c1: 0.0,
            c2: 0.0,
            seed,
        };
        let mut cal = RngStream::new(derive_seed(seed, NESTED_LABEL + 1), 0);
        let r = models.criteria(calibration, &mut cal)?.c1;
        if !(r > 0.0) {
            return Err(Error::param("width", "the restricted model is not misspecified"));
        }
        let variance = ratio * r / (1.0 - ratio);
        models.noise_sd = math::sqrt(variance);
        models.c2 = variance;
        models.c1 = variance + r;
        Ok(models)
    }

    /// In-sample least-squares criteria of both models on `n` fresh rows.
    pub fn criteria(&self, n: usize, rng: &mut RngStream) -> Result<CriterionPair> {
        let q = self.generator.input_dim();
        let sample = generate_synthetic_sample(n, q, &self.generator, &self.beta0, self.noise_sd, rng)?;
        let y = sample.data.targets();
        let x2 = self.generator.hidden_matrix(sample.data.inputs())?;
        let x1 = self.restricted.hidden_matrix(&sample.data.inputs().columns_from(1))?;
        let y_vec = sample.data.target_vector();
        Ok(CriterionPair {
            c1: data_fidelity(&y_vec, &x1, &fit_least_squares(&x1, y)?)?,
            c2: data_fidelity(&y_vec, &x2, &fit_least_squares(&x2, y)?)?,
        })
    }

    /// Compares the models with margin `f` on `replications` samples of size `n`.
    pub fn selection_summary(&self, n: usize, replications: usize, f: f64) -> Result<SelectionSummary> {
        if replications == 0 {
            return Err(Error::param("replications", "must be ≥ 1"));
        }
        let reps = Replications {
            models: self,
            n,
            seed: derive_seed(derive_seed(self.seed, NESTED_LABEL + 2), n as u64),
        };
        let pairs: Vec<CriterionPair> = evaluate_draws(&reps, 0..replications)?
            .into_iter()
            .map(|(_, p)| p)
            .collect();
        let target = self.c2 / self.c1;
        let mut wrong = 0usize;
        let mut dev = 0.0;
        for p in &pairs {
            if compare_models(p.c1, p.c2, f)? == Decision::KeepModel1 {
                wrong += 1;
            }
            dev += (p.c2 / p.c1 - target).abs();
        }
        Ok(SelectionSummary {
            n,
            wrong_frequency: wrong as f64 / replications as f64,
            mean_ratio_error: dev / replications as f64,
        })
    }
}

struct Replications<'a> {
    models: &'a NestedModels,
    n: usize,
    seed: u64,
}

impl DrawEvaluator for Replications<'_> {
    type Model = CriterionPair;

    fn evaluate(&self, j: usize) -> Result<(f64, CriterionPair)> {
        let pair = self.models.criteria(self.n, &mut RngStream::new(self.seed, j as u64))?;
        Ok((pair.c2 / pair.c1, pair))
    }
}
