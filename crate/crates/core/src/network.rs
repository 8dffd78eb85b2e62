//! Forward evaluation of randomized feedforward networks.
//!
//! A hidden layer maps `z ↦ g(b + W z)` entrywise. Layers compose, and the
//! last hidden layer feeds a linear output layer `o = βᵀ (1, x)`. The leading
//! constant `1` carries the intercept, so the output weights have one more row
//! than the last hidden layer has neurons.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::math;

/// Scalar squashing function applied by each hidden neuron.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Activation {
    Sigmoid,
    Relu,
    /// `δu` for `u < 0`, `u` otherwise, with `0 < δ < 1`.
    LeakyRelu {
        delta: f64,
    },
}

impl Activation {
    pub fn leaky_relu(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::param(
                "delta",
                format!("leaky ReLU slope must lie in (0, 1), got {delta}"),
            ));
        }
        Ok(Activation::LeakyRelu { delta })
    }

    /// Rejects a `LeakyRelu` built by hand with an inadmissible slope.
    pub fn validate(&self) -> Result<()> {
        match *self {
            Activation::LeakyRelu { delta } => Activation::leaky_relu(delta).map(|_| ()),
            _ => Ok(()),
        }
    }

    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        match *self {
            Activation::Sigmoid => sigmoid(u),
            Activation::Relu => u.max(0.0),
            Activation::LeakyRelu { delta } => {
                if u < 0.0 {
                    delta * u
                } else {
                    u
                }
            }
        }
    }
}

/// Logistic function, evaluated without overflow for large `|u|`.
#[inline]
pub fn sigmoid(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + math::exp(-u))
    } else {
        let e = math::exp(u);
        e / (1.0 + e)
    }
}

/// One hidden layer: `n_k` neurons fed by `n_{k-1}` inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    bias: Vec<f64>,
    weights: Matrix,
    activation: Activation,
}

impl Layer {
    pub fn new(bias: Vec<f64>, weights: Matrix, activation: Activation) -> Result<Self> {
        if bias.len() != weights.rows() {
            return Err(Error::dim(format!(
                "bias has {} entries but the weight matrix has {} rows",
                bias.len(),
                weights.rows()
            )));
        }
        if bias.is_empty() {
            return Err(Error::dim("a layer needs at least one neuron"));
        }
        activation.validate()?;
        Ok(Layer {
            bias,
            weights,
            activation,
        })
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn width(&self) -> usize {
        self.bias.len()
    }

    pub fn fan_in(&self) -> usize {
        self.weights.cols()
    }

    /// `g(b + W z)`.
    pub fn output(&self, z: &[f64]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.width());
        self.output_into(z, &mut out)?;
        Ok(out)
    }

    fn output_into(&self, z: &[f64], out: &mut Vec<f64>) -> Result<()> {
        if z.len() != self.fan_in() {
            return Err(Error::dim(format!(
                "layer expects {} inputs, got {}",
                self.fan_in(),
                z.len()
            )));
        }
        out.clear();
        for (b, w) in self.bias.iter().zip(self.weights.row_iter()) {
            let u = b + w.iter().zip(z).map(|(wi, zi)| wi * zi).sum::<f64>();
            out.push(self.activation.eval(u));
        }
        Ok(())
    }
}

/// Randomly drawn hidden parameters of a network with `r ≥ 1` layers.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomizedNet {
    layers: Vec<Layer>,
}

impl RandomizedNet {
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::dim("a network needs at least one hidden layer"));
        }
        for (k, pair) in layers.windows(2).enumerate() {
            if pair[1].fan_in() != pair[0].width() {
                return Err(Error::dim(format!(
                    "layer {} has {} inputs but layer {} has {} neurons",
                    k + 2,
                    pair[1].fan_in(),
                    k + 1,
                    pair[0].width()
                )));
            }
        }
        Ok(RandomizedNet { layers })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    /// Input dimension `q`.
    pub fn input_dim(&self) -> usize {
        self.layers[0].fan_in()
    }

    /// Width `p` of the last hidden layer.
    pub fn width(&self) -> usize {
        self.layers[self.layers.len() - 1].width()
    }

    /// Output of the last hidden layer for one input vector.
    pub fn forward(&self, z: &[f64]) -> Result<Vec<f64>> {
        let mut cur = Vec::new();
        let mut next = Vec::new();
        self.layers[0].output_into(z, &mut cur)?;
        for layer in &self.layers[1..] {
            layer.output_into(&cur, &mut next)?;
            core::mem::swap(&mut cur, &mut next);
        }
        Ok(cur)
    }

    /// Hidden output matrix with a leading constant column: row `t` is
    /// `(1, forward(z_t))`.
    pub fn hidden_matrix(&self, inputs: &Matrix) -> Result<Matrix> {
        if inputs.cols() != self.input_dim() {
            return Err(Error::dim(format!(
                "network expects {} inputs, data has {} columns",
                self.input_dim(),
                inputs.cols()
            )));
        }
        let p = self.width();
        let mut out = Matrix::zeros(inputs.rows(), p + 1);
        for (t, z) in inputs.row_iter().enumerate() {
            let x = self.forward(z)?;
            let row = out.row_mut(t);
            row[0] = 1.0;
            row[1..].copy_from_slice(&x);
        }
        Ok(out)
    }

    /// Net output `(1, x_t)ᵀ β` for every row of `inputs`.
    pub fn predict(&self, beta: &OutputWeights, inputs: &Matrix) -> Result<Matrix> {
        if beta.beta().rows() != self.width() + 1 {
            return Err(Error::dim(format!(
                "output weights have {} rows, expected {}",
                beta.beta().rows(),
                self.width() + 1
            )));
        }
        self.hidden_matrix(inputs)?.matmul(beta.beta())
    }
}

/// How a set of output weights was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    /// Cholesky factorization of the (regularized) normal equations.
    Cholesky,
    /// SVD fallback after a failed or ill-conditioned factorization;
    /// least squares fits then carry minimum-norm semantics.
    MinimumNorm,
    /// Supplied directly, e.g. loaded from a file.
    Given,
}

/// Output-layer coefficients, `(p + 1) × d` with the intercept in row 0.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputWeights {
    beta: Matrix,
    method: SolveMethod,
}

impl OutputWeights {
    pub fn new(beta: Matrix) -> Self {
        OutputWeights {
            beta,
            method: SolveMethod::Given,
        }
    }

    pub(crate) fn solved(beta: Matrix, method: SolveMethod) -> Self {
        OutputWeights { beta, method }
    }

    /// Single-output weights from a coefficient vector `(β₀, …, β_p)`.
    pub fn from_vector(beta: &[f64]) -> Self {
        OutputWeights::new(Matrix::column_vector(beta))
    }

    pub fn beta(&self) -> &Matrix {
        &self.beta
    }

    pub fn method(&self) -> SolveMethod {
        self.method
    }

    /// True when the fit fell back to the minimum-norm solver.
    pub fn is_min_norm(&self) -> bool {
        self.method == SolveMethod::MinimumNorm
    }

    pub fn n_outputs(&self) -> usize {
        self.beta.cols()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{draw_network, RngStream, WeightDistribution};
    use alloc::vec;
    use proptest::prelude::*;

    fn layer(bias: Vec<f64>, rows: &[&[f64]], act: Activation) -> Layer {
        Layer::new(bias, Matrix::from_rows(rows).unwrap(), act).unwrap()
    }

    #[test]
    fn activation_reference_points() {
        assert_eq!(Activation::Sigmoid.eval(0.0), 0.5);
        assert_eq!(Activation::Relu.eval(-1.0), 0.0);
        let leaky = Activation::leaky_relu(0.01).unwrap();
        assert!((leaky.eval(-2.0) + 0.02).abs() < 1e-15);
        assert_eq!(leaky.eval(3.0), 3.0);
    }

    #[test]
    fn leaky_slope_must_be_in_unit_interval() {
        assert!(Activation::leaky_relu(0.0).is_err());
        assert!(Activation::leaky_relu(1.0).is_err());
        assert!(Activation::leaky_relu(-0.1).is_err());
    }

    #[test]
    fn sigmoid_is_stable_in_the_tails() {
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(-800.0).is_finite());
        assert_eq!(sigmoid(800.0), 1.0);
        assert!((sigmoid(-3.0) + sigmoid(3.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn activations_on_a_grid() {
        let leaky = Activation::leaky_relu(0.1).unwrap();
        let grid: Vec<f64> = (-400..=400).map(|i| i as f64 * 0.05).collect();
        for w in grid.windows(2) {
            let s = Activation::Sigmoid.eval(w[0]);
            assert!(s > 0.0 && s < 1.0);
            assert!(Activation::Relu.eval(w[0]) <= Activation::Relu.eval(w[1]));
            assert!(leaky.eval(w[0]) <= leaky.eval(w[1]));
            // continuity: neighbouring grid values stay close
            assert!((leaky.eval(w[1]) - leaky.eval(w[0])).abs() <= 0.05 + 1e-12);
            assert!((Activation::Relu.eval(w[1]) - Activation::Relu.eval(w[0])).abs() <= 0.05 + 1e-12);
        }
    }

    #[test]
    fn zero_layer_gives_half() {
        let l = layer(
            vec![0.0; 3],
            &[&[0.0, 0.0], &[0.0, 0.0], &[0.0, 0.0]],
            Activation::Sigmoid,
        );
        assert_eq!(l.output(&[3.0, -7.0]).unwrap(), vec![0.5; 3]);
    }

    #[test]
    fn bias_only_relu() {
        let l = layer(vec![1.0, -1.0], &[&[0.0], &[0.0]], Activation::Relu);
        assert_eq!(l.output(&[5.0]).unwrap(), vec![1.0, 0.0]);
    }

    #[test]
    fn layer_rejects_wrong_input_length() {
        let l = layer(vec![1.0, -1.0], &[&[0.0], &[0.0]], Activation::Relu);
        assert!(matches!(l.output(&[1.0, 2.0]), Err(Error::Dimension(_))));
        assert!(Layer::new(vec![0.0], Matrix::zeros(2, 1), Activation::Relu).is_err());
    }

    #[test]
    fn layer_matches_scalar_loop() {
        let mut rng = RngStream::new(11, 0);
        let dist = WeightDistribution::default();
        let net = draw_network(&dist, 3, &[4], Activation::Sigmoid, &mut rng).unwrap();
        let z = [rng.standard_normal(), rng.standard_normal(), rng.standard_normal()];
        let l = &net.layers()[0];
        let got = l.output(&z).unwrap();
        for j in 0..4 {
            let mut u = l.bias()[j];
            for i in 0..3 {
                u += l.weights()[(j, i)] * z[i];
            }
            let expect = 1.0 / (1.0 + (-u).exp());
            assert!((got[j] - expect).abs() < 1e-15);
        }
        assert_eq!(net.forward(&z).unwrap(), got);
    }

    #[test]
    fn relu_identity_layer_passes_sigmoid_output() {
        let first = layer(vec![0.3, -0.2], &[&[0.5, -1.0], &[2.0, 0.1]], Activation::Sigmoid);
        let second = layer(vec![0.0, 0.0], &[&[1.0, 0.0], &[0.0, 1.0]], Activation::Relu);
        let net = RandomizedNet::new(vec![first.clone(), second]).unwrap();
        let z = [0.7, -1.3];
        assert_eq!(net.forward(&z).unwrap(), first.output(&z).unwrap());
    }

    #[test]
    fn three_layer_net_matches_stepwise_oracle() {
        let mut rng = RngStream::new(3, 1);
        let dist = WeightDistribution::default();
        let act = Activation::leaky_relu(0.05).unwrap();
        let net = draw_network(&dist, 2, &[5, 4, 3], act, &mut rng).unwrap();
        let z = [0.25, -1.5];
        let mut x: Vec<f64> = z.to_vec();
        for l in net.layers() {
            let mut next = vec![0.0; l.width()];
            for j in 0..l.width() {
                let mut u = l.bias()[j];
                for (i, xi) in x.iter().enumerate() {
                    u += l.weights()[(j, i)] * xi;
                }
                next[j] = if u < 0.0 { 0.05 * u } else { u };
            }
            x = next;
        }
        let got = net.forward(&z).unwrap();
        for (a, b) in got.iter().zip(&x) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn mismatched_layers_rejected() {
        let a = layer(vec![0.0, 0.0], &[&[1.0], &[1.0]], Activation::Relu);
        let b = layer(vec![0.0], &[&[1.0, 1.0, 1.0]], Activation::Relu);
        assert!(RandomizedNet::new(vec![a, b]).is_err());
        assert!(RandomizedNet::new(vec![]).is_err());
    }

    #[test]
    fn hidden_matrix_rows() {
        let l = layer(vec![0.0, 0.0], &[&[0.0, 0.0], &[0.0, 0.0]], Activation::Sigmoid);
        let net = RandomizedNet::new(vec![l]).unwrap();
        let z = Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0], [-5.0, 0.0]]).unwrap();
        let x = net.hidden_matrix(&z).unwrap();
        assert_eq!((x.rows(), x.cols()), (3, 3));
        for r in x.row_iter() {
            assert_eq!(r, &[1.0, 0.5, 0.5]);
        }
        let one = Matrix::from_rows(&[[0.0, 0.0]]).unwrap();
        assert_eq!(net.hidden_matrix(&one).unwrap().rows(), 1);
        assert!(net.hidden_matrix(&Matrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn hidden_matrix_rowwise_oracle() {
        let mut rng = RngStream::new(8, 2);
        let net = draw_network(
            &WeightDistribution::default(),
            3,
            &[6, 2],
            Activation::Sigmoid,
            &mut rng,
        )
        .unwrap();
        let rows: Vec<Vec<f64>> = (0..7)
            .map(|_| (0..3).map(|_| rng.standard_normal()).collect())
            .collect();
        let z = Matrix::from_rows(&rows).unwrap();
        let x = net.hidden_matrix(&z).unwrap();
        for (t, r) in rows.iter().enumerate() {
            let f = net.forward(r).unwrap();
            assert_eq!(x.row(t)[0], 1.0);
            assert_eq!(&x.row(t)[1..], f.as_slice());
        }
    }

    #[test]
    fn predict_intercept_and_zero() {
        let mut rng = RngStream::new(4, 0);
        let net = draw_network(&WeightDistribution::default(), 2, &[3], Activation::Sigmoid, &mut rng).unwrap();
        let z = Matrix::from_rows(&[[0.1, 0.2], [1.0, -1.0]]).unwrap();
        let c = OutputWeights::from_vector(&[2.5, 0.0, 0.0, 0.0]);
        assert_eq!(net.predict(&c, &z).unwrap().as_slice(), &[2.5, 2.5]);
        let zero = OutputWeights::from_vector(&[0.0; 4]);
        assert_eq!(net.predict(&zero, &z).unwrap().as_slice(), &[0.0, 0.0]);
        assert!(net.predict(&OutputWeights::from_vector(&[1.0; 3]), &z).is_err());
    }

    #[test]
    fn predict_matches_triple_loop() {
        let mut rng = RngStream::new(6, 0);
        let net = draw_network(&WeightDistribution::default(), 2, &[4], Activation::Relu, &mut rng).unwrap();
        let beta_data: Vec<f64> = (0..10).map(|_| rng.uniform_symmetric(2.0)).collect();
        let beta = OutputWeights::new(Matrix::from_vec(5, 2, beta_data).unwrap());
        let rows: Vec<Vec<f64>> = (0..6)
            .map(|_| vec![rng.standard_normal(), rng.standard_normal()])
            .collect();
        let z = Matrix::from_rows(&rows).unwrap();
        let got = net.predict(&beta, &z).unwrap();
        let x = net.hidden_matrix(&z).unwrap();
        for t in 0..6 {
            for c in 0..2 {
                let mut s = 0.0;
                for k in 0..5 {
                    s += x[(t, k)] * beta.beta()[(k, c)];
                }
                assert!((got[(t, c)] - s).abs() < 1e-13);
            }
        }
    }

    proptest! {
        #[test]
        fn predict_is_linear_in_beta(
            seed in 0u64..1000,
            a in -3.0f64..3.0,
            b in -3.0f64..3.0,
        ) {
            let mut rng = RngStream::new(seed, 0);
            let net = draw_network(&WeightDistribution::default(), 3, &[5], Activation::Sigmoid, &mut rng).unwrap();
            let b1: Vec<f64> = (0..6).map(|_| rng.uniform_symmetric(1.0)).collect();
            let b2: Vec<f64> = (0..6).map(|_| rng.uniform_symmetric(1.0)).collect();
            let rows: Vec<Vec<f64>> = (0..4).map(|_| (0..3).map(|_| rng.standard_normal()).collect()).collect();
            let z = Matrix::from_rows(&rows).unwrap();
            let combo: Vec<f64> = b1.iter().zip(&b2).map(|(x, y)| a * x + b * y).collect();
            let lhs = net.predict(&OutputWeights::from_vector(&combo), &z).unwrap();
            let p1 = net.predict(&OutputWeights::from_vector(&b1), &z).unwrap();
            let p2 = net.predict(&OutputWeights::from_vector(&b2), &z).unwrap();
            let rhs = p1.axpby(a, &p2, b).unwrap();
            for (l, r) in lhs.as_slice().iter().zip(rhs.as_slice()) {
                prop_assert!((l - r).abs() <= 1e-12 * (1.0 + r.abs()));
            }
        }
    }
}
