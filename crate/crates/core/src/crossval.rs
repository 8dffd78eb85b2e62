//! Cross-validation over random weight draws.
//!
//! For `j = 1..J` the hidden parameters are drawn from stream `j − 1` of the
//! configured seed, the output layer is fitted on the training sample and the
//! validation MSPE `Z_j` is recorded. The mean of the `Z_j` estimates the
//! expected validation error over weight draws; the draw with the smallest
//! `Z_j` is the selected network. The selected model is not refitted on the
//! validation sample.
//!
//! Indices in this API are 0-based: draw `j` uses stream `j`.

use alloc::format;
use alloc::vec::Vec;
use core::ops::Range;

use crate::criteria::mean_squared_error;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::network::{Activation, OutputWeights, RandomizedNet};
use crate::rng::{draw_network, RngStream, WeightDistribution};
use crate::training::{fit_normalization, fit_output_layer, Dataset, NormalizationSpec};

/// Hidden widths and the shared activation.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    pub widths: Vec<usize>,
    pub activation: Activation,
}

impl Topology {
    pub fn single(width: usize, activation: Activation) -> Self {
        Topology {
            widths: alloc::vec![width],
            activation,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.widths.is_empty() {
            return Err(Error::param("hidden", "at least one hidden layer is required"));
        }
        if let Some(w) = self.widths.iter().find(|&&w| w == 0) {
            return Err(Error::param("hidden", format!("layer widths must be ≥ 1, got {w}")));
        }
        self.activation.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvConfig {
    /// Number of weight draws `J`.
    pub draws: usize,
    pub topology: Topology,
    pub weight_dist: WeightDistribution,
    /// Ridge parameter; `0` means plain least squares.
    pub lambda: f64,
    pub seed: u64,
}

impl CvConfig {
    pub fn validate(&self) -> Result<()> {
        if self.draws == 0 {
            return Err(Error::param("J", "the number of draws must be ≥ 1"));
        }
        self.validate_model()
    }

    /// Everything except the draw count, which the two-stage rule picks.
    pub fn validate_model(&self) -> Result<()> {
        self.topology.validate()?;
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::param(
                "lambda",
                format!("ridge parameter must be finite and non-negative, got {}", self.lambda),
            ));
        }
        let WeightDistribution::UniformSymmetric { half_width } = self.weight_dist;
        WeightDistribution::uniform(half_width)?;
        Ok(())
    }
}

/// Source of per-draw validation errors. Implementations must be pure
/// functions of the draw index so draws can run in any order.
pub trait DrawEvaluator: Sync {
    type Model: Send;

    /// `(Z_j, model_j)` for draw `j`.
    fn evaluate(&self, draw: usize) -> Result<(f64, Self::Model)>;
}

/// Evaluates draws `range` in index order of the output; uses the rayon pool
/// when the `parallel` feature is on.
pub fn evaluate_draws<E: DrawEvaluator>(evaluator: &E, range: Range<usize>) -> Result<Vec<(f64, E::Model)>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        range.into_par_iter().map(|j| evaluator.evaluate(j)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        range.map(|j| evaluator.evaluate(j)).collect()
    }
}

/// Fitted network of one draw.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub net: RandomizedNet,
    pub weights: OutputWeights,
}

/// Draw evaluator for an extreme learning machine on a fixed
/// training/validation split. Inputs are normalized once with statistics of
/// the training sample.
#[derive(Debug, Clone)]
pub struct ElmDraws {
    train_inputs: Matrix,
    train_targets: Matrix,
    val_inputs: Matrix,
    val_targets: Vec<f64>,
    normalization: NormalizationSpec,
    topology: Topology,
    weight_dist: WeightDistribution,
    lambda: f64,
    seed: u64,
}

impl ElmDraws {
    pub fn new(training: &Dataset, validation: &Dataset, cfg: &CvConfig) -> Result<Self> {
        cfg.validate_model()?;
        if training.n_inputs() != validation.n_inputs() {
            return Err(Error::dim(format!(
                "training has {} inputs, validation has {}",
                training.n_inputs(),
                validation.n_inputs()
            )));
        }
        if validation.targets().cols() != 1 || training.targets().cols() != 1 {
            return Err(Error::dim("cross-validation expects a single target column"));
        }
        let normalization = fit_normalization(training.inputs())?;
        Ok(ElmDraws {
            train_inputs: normalization.apply(training.inputs())?,
            train_targets: training.targets().clone(),
            val_inputs: normalization.apply(validation.inputs())?,
            val_targets: validation.target_vector(),
            normalization,
            topology: cfg.topology.clone(),
            weight_dist: cfg.weight_dist,
            lambda: cfg.lambda,
            seed: cfg.seed,
        })
    }

    pub fn normalization(&self) -> &NormalizationSpec {
        &self.normalization
    }

    /// Hidden parameters of draw `j`.
    pub fn draw(&self, j: usize) -> Result<RandomizedNet> {
        let mut rng = RngStream::new(self.seed, j as u64);
        draw_network(
            &self.weight_dist,
            self.train_inputs.cols(),
            &self.topology.widths,
            self.topology.activation,
            &mut rng,
        )
    }
}

impl DrawEvaluator for ElmDraws {
    type Model = Candidate;

    fn evaluate(&self, j: usize) -> Result<(f64, Candidate)> {
        let net = self.draw(j)?;
        let x = net.hidden_matrix(&self.train_inputs)?;
        let weights = fit_output_layer(&x, &self.train_targets, self.lambda)?;
        let pred = net.predict(&weights, &self.val_inputs)?;
        let z = mean_squared_error(&self.val_targets, pred.as_slice())?;
        Ok((z, Candidate { net, weights }))
    }
}

/// Outcome of a cross-validation run.
#[derive(Debug, Clone, PartialEq)]
pub struct CvResult<M> {
    /// Validation MSPE of every draw.
    pub z: Vec<f64>,
    /// 0-based index of the first draw attaining the minimum.
    pub best: usize,
    pub mean_mspe: f64,
    pub selected: M,
}

impl<M> CvResult<M> {
    pub fn best_mspe(&self) -> f64 {
        self.z[self.best]
    }
}

/// Selected network together with the normalization it expects.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectedModel {
    pub net: RandomizedNet,
    pub weights: OutputWeights,
    pub normalization: NormalizationSpec,
}

impl SelectedModel {
    /// Predictions for raw (unnormalized) inputs.
    pub fn predict(&self, inputs: &Matrix) -> Result<Matrix> {
        self.net.predict(&self.weights, &self.normalization.apply(inputs)?)
    }
}

/// Index of the first minimum.
pub fn select_best(z: &[f64]) -> Result<usize> {
    let mut it = z.iter().enumerate();
    let (mut best, mut min) = match it.next() {
        Some((_, &v)) => (0, v),
        None => return Err(Error::param("z", "cannot select from zero draws")),
    };
    for (j, &v) in it {
        if v < min {
            min = v;
            best = j;
        }
    }
    Ok(best)
}

pub(crate) fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Runs `draws` draws of an arbitrary evaluator and keeps the best model.
pub fn run_cv_with<E: DrawEvaluator>(evaluator: &E, draws: usize) -> Result<CvResult<E::Model>> {
    if draws == 0 {
        return Err(Error::param("J", "the number of draws must be ≥ 1"));
    }
    let evaluated = evaluate_draws(evaluator, 0..draws)?;
    let z: Vec<f64> = evaluated.iter().map(|(z, _)| *z).collect();
    let best = select_best(&z)?;
    let selected = evaluated
        .into_iter()
        .nth(best)
        .map(|(_, m)| m)
        .expect("best index is in range");
    Ok(CvResult {
        mean_mspe: mean(&z),
        z,
        best,
        selected,
    })
}

/// Cross-validates an extreme learning machine over `cfg.draws` weight draws.
pub fn run_cv(training: &Dataset, validation: &Dataset, cfg: &CvConfig) -> Result<CvResult<SelectedModel>> {
    cfg.validate()?;
    let draws = ElmDraws::new(training, validation, cfg)?;
    let r = run_cv_with(&draws, cfg.draws)?;
    Ok(CvResult {
        z: r.z,
        best: r.best,
        mean_mspe: r.mean_mspe,
        selected: SelectedModel {
            net: r.selected.net,
            weights: r.selected.weights,
            normalization: draws.normalization,
        },
    })
}

/// Fits draw `draw` of `cfg.seed` on `training` alone, without validation.
pub fn train_elm(training: &Dataset, cfg: &CvConfig, draw: usize) -> Result<SelectedModel> {
    cfg.validate_model()?;
    let normalization = fit_normalization(training.inputs())?;
    let inputs = normalization.apply(training.inputs())?;
    let mut rng = RngStream::new(cfg.seed, draw as u64);
    let net = draw_network(
        &cfg.weight_dist,
        inputs.cols(),
        &cfg.topology.widths,
        cfg.topology.activation,
        &mut rng,
    )?;
    let weights = fit_output_layer(&net.hidden_matrix(&inputs)?, training.targets(), cfg.lambda)?;
    Ok(SelectedModel {
        net,
        weights,
        normalization,
    })
}

/// `(1/n_V) ‖Y − X β‖²` on the normalized validation inputs.
pub fn validation_mspe(
    net: &RandomizedNet,
    beta: &OutputWeights,
    validation: &Dataset,
    normalization: &NormalizationSpec,
) -> Result<f64> {
    if validation.targets().cols() != 1 {
        return Err(Error::dim("validation MSPE expects a single target column"));
    }
    let pred = net.predict(beta, &normalization.apply(validation.inputs())?)?;
    mean_squared_error(&validation.target_vector(), pred.as_slice())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::Layer;
    use crate::training::Role;
    use alloc::vec;

    struct FixedZ(Vec<f64>);

    impl DrawEvaluator for FixedZ {
        type Model = usize;
        fn evaluate(&self, j: usize) -> Result<(f64, usize)> {
            Ok((self.0[j], j))
        }
    }

    #[test]
    fn single_draw_training_matches_cv_draw() {
        let z = Matrix::from_rows(&[[0.0, 1.0], [1.0, 3.0], [2.0, 2.0], [3.0, 0.0], [4.0, 5.0]]).unwrap();
        let train = Dataset::with_targets(z.clone(), &[1.0, 0.0, 2.0, 1.5, 0.5], Role::Training).unwrap();
        let cfg = CvConfig {
            draws: 3,
            topology: Topology::single(3, Activation::Sigmoid),
            weight_dist: WeightDistribution::default(),
            lambda: 0.1,
            seed: 4,
        };
        let cv = run_cv(&train, &train.clone().with_role(Role::Validation), &cfg).unwrap();
        let single = train_elm(&train, &cfg, cv.best).unwrap();
        assert_eq!(single, cv.selected);
    }

    #[test]
    fn select_best_examples() {
        assert_eq!(select_best(&[3.0, 1.0, 2.0]).unwrap(), 1);
        assert_eq!(select_best(&[1.0, 1.0, 5.0]).unwrap(), 0);
        assert_eq!(select_best(&[4.0]).unwrap(), 0);
        assert!(select_best(&[]).is_err());
    }

    #[test]
    fn stubbed_draws_give_argmin_and_mean() {
        let r = run_cv_with(&FixedZ(vec![3.0, 1.0, 2.0]), 3).unwrap();
        assert_eq!(r.best, 1);
        assert_eq!(r.selected, 1);
        assert_eq!(r.mean_mspe, 2.0);
        assert!(run_cv_with(&FixedZ(vec![]), 0).is_err());
    }

    fn constant_net() -> RandomizedNet {
        let l = Layer::new(vec![0.0], Matrix::zeros(1, 2), Activation::Sigmoid).unwrap();
        RandomizedNet::new(vec![l]).unwrap()
    }

    #[test]
    fn validation_mspe_hand_cases() {
        let net = constant_net();
        let norm = NormalizationSpec::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        let val = Dataset::with_targets(Matrix::zeros(2, 2), &[1.0, 1.0], Role::Validation).unwrap();
        let zero = OutputWeights::from_vector(&[0.0, 0.0]);
        assert_eq!(validation_mspe(&net, &zero, &val, &norm).unwrap(), 1.0);
        // intercept 0.5 plus 1.0·sigmoid(0) = 1
        let exact = OutputWeights::from_vector(&[0.5, 1.0]);
        assert_eq!(validation_mspe(&net, &exact, &val, &norm).unwrap(), 0.0);
    }

    #[test]
    fn config_validation() {
        let mut cfg = CvConfig {
            draws: 0,
            topology: Topology::single(3, Activation::Sigmoid),
            weight_dist: WeightDistribution::default(),
            lambda: 0.0,
            seed: 1,
        };
        assert!(matches!(cfg.validate(), Err(Error::Parameter { name: "J", .. })));
        cfg.draws = 2;
        cfg.lambda = -1.0;
        assert!(matches!(cfg.validate(), Err(Error::Parameter { name: "lambda", .. })));
        cfg.lambda = 0.0;
        cfg.topology.widths = vec![3, 0];
        assert!(cfg.validate().is_err());
    }
}
