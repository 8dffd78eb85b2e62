//! Fitted networks as JSON:
//! `{activation, layers: [{bias, weights}], beta, normalization: {min, max}}`.

use std::path::Path;

use randnet_core::crossval::SelectedModel;
use randnet_core::network::{Activation, Layer, OutputWeights, RandomizedNet};
use randnet_core::training::NormalizationSpec;
use randnet_core::Matrix;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::json;

pub const DEFAULT_LEAKY_SLOPE: f64 = 0.01;

/// `sigmoid`, `relu`, `leaky_relu` or `leaky_relu:<δ>`.
pub fn parse_activation(s: &str) -> Result<Activation> {
    match s.split_once(':') {
        None => match s {
            "sigmoid" => Ok(Activation::Sigmoid),
            "relu" => Ok(Activation::Relu),
            "leaky_relu" => Ok(Activation::leaky_relu(DEFAULT_LEAKY_SLOPE)?),
            _ => Err(CliError::invalid(
                "activation",
                format!("expected sigmoid, relu or leaky_relu[:slope], got {s:?}"),
            )),
        },
        Some(("leaky_relu", delta)) => {
            let delta: f64 = delta
                .parse()
                .map_err(|_| CliError::invalid("activation", format!("bad leaky ReLU slope {delta:?}")))?;
            Ok(Activation::leaky_relu(delta)?)
        }
        Some(_) => Err(CliError::invalid("activation", format!("unknown activation {s:?}"))),
    }
}

pub fn activation_name(a: Activation) -> String {
    match a {
        Activation::Sigmoid => "sigmoid".into(),
        Activation::Relu => "relu".into(),
        Activation::LeakyRelu { delta } => format!("leaky_relu:{delta}"),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerFile {
    pub bias: Vec<f64>,
    pub weights: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationFile {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub activation: String,
    pub layers: Vec<LayerFile>,
    pub beta: Vec<Vec<f64>>,
    pub normalization: NormalizationFile,
}

fn rows(m: &Matrix) -> Vec<Vec<f64>> {
    m.row_iter().map(<[f64]>::to_vec).collect()
}

impl From<&SelectedModel> for ModelFile {
    fn from(m: &SelectedModel) -> Self {
        let layers = m.net.layers();
        ModelFile {
            activation: activation_name(layers[0].activation()),
            layers: layers
                .iter()
                .map(|l| LayerFile {
                    bias: l.bias().to_vec(),
                    weights: rows(l.weights()),
                })
                .collect(),
            beta: rows(m.weights.beta()),
            normalization: NormalizationFile {
                min: m.normalization.min().to_vec(),
                max: m.normalization.max().to_vec(),
            },
        }
    }
}

impl ModelFile {
    pub fn into_model(self, path: &Path) -> Result<SelectedModel> {
        let bad = |e: randnet_core::Error| CliError::format(path, e.to_string());
        let activation = parse_activation(&self.activation).map_err(|e| CliError::format(path, e.to_string()))?;
        let layers = self
            .layers
            .into_iter()
            .map(|l| Layer::new(l.bias, Matrix::from_rows(&l.weights)?, activation))
            .collect::<randnet_core::Result<Vec<_>>>()
            .map_err(bad)?;
        let net = RandomizedNet::new(layers).map_err(bad)?;
        let beta = Matrix::from_rows(&self.beta).map_err(bad)?;
        if beta.rows() != net.width() + 1 {
            return Err(CliError::format(
                path,
                format!(
                    "beta has {} rows, last hidden layer has width {}",
                    beta.rows(),
                    net.width()
                ),
            ));
        }
        let normalization = NormalizationSpec::new(self.normalization.min, self.normalization.max).map_err(bad)?;
        if normalization.n_inputs() != net.input_dim() {
            return Err(CliError::format(
                path,
                "normalization does not match the input dimension",
            ));
        }
        Ok(SelectedModel {
            net,
            weights: OutputWeights::new(beta),
            normalization,
        })
    }
}

pub fn write_model(path: &Path, model: &SelectedModel) -> Result<()> {
    json::write(path, &ModelFile::from(model))
}

pub fn read_model(path: &Path) -> Result<SelectedModel> {
    json::read::<ModelFile>(path)?.into_model(path)
}
