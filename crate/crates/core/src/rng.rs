//! Reproducible random streams and the weight distribution of the hidden
//! layers.
//!
//! A stream is addressed by `(master_seed, stream_index)`. The master seed
//! keys a ChaCha20 generator and the index selects its stream word, so
//! jumping to any stream is O(1) and distinct indices never share output.
//! Work that must be reproducible independently of scheduling (one weight
//! draw, one simulation run) owns exactly one stream.

use alloc::vec::Vec;

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::math;
use crate::network::{Activation, Layer, RandomizedNet};

/// A single-owner deterministic random stream.
#[derive(Debug, Clone)]
pub struct RngStream {
    master_seed: u64,
    stream_index: u64,
    inner: ChaCha20Rng,
    spare_normal: Option<f64>,
}

impl RngStream {
    /// Stream `stream_index` of the family keyed by `master_seed`, positioned
    /// at its first draw.
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        let mut inner = ChaCha20Rng::seed_from_u64(master_seed);
        inner.set_stream(stream_index);
        RngStream {
            master_seed,
            stream_index,
            inner,
            spare_normal: None,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `[-half_width, half_width]`.
    #[inline]
    pub fn uniform_symmetric(&mut self, half_width: f64) -> f64 {
        half_width * (2.0 * self.uniform() - 1.0)
    }

    /// Standard normal variate (Box–Muller, pairs cached).
    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        // 1 - u lies in (0, 1], keeping the log finite
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = math::sqrt(-2.0 * math::ln(u1));
        let theta = 2.0 * core::f64::consts::PI * u2;
        self.spare_normal = Some(r * math::sin(theta));
        r * math::cos(theta)
    }

    pub fn normal(&mut self, mean: f64, sd: f64) -> f64 {
        mean + sd * self.standard_normal()
    }
}

/// Mixes a master seed with a label into an unrelated seed (SplitMix64
/// finalizer). Used to give each purpose of an experiment its own stream
/// family.
pub fn derive_seed(master_seed: u64, label: u64) -> u64 {
    let mut z = master_seed ^ label.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Law of the hidden-layer biases and weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightDistribution {
    /// i.i.d. uniform on `[-half_width, half_width]`.
    UniformSymmetric { half_width: f64 },
}

impl Default for WeightDistribution {
    fn default() -> Self {
        WeightDistribution::UniformSymmetric { half_width: 1.0 }
    }
}

impl WeightDistribution {
    pub fn uniform(half_width: f64) -> Result<Self> {
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::param(
                "half_width",
                alloc::format!("must be a positive finite number, got {half_width}"),
            ));
        }
        Ok(WeightDistribution::UniformSymmetric { half_width })
    }

    #[inline]
    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        match *self {
            WeightDistribution::UniformSymmetric { half_width } => rng.uniform_symmetric(half_width),
        }
    }
}

/// Draws one hidden layer: the bias vector first, then the weight matrix row
/// by row, `n_neurons·(n_inputs + 1)` draws in total.
pub fn draw_layer(
    dist: &WeightDistribution,
    n_neurons: usize,
    n_inputs: usize,
    activation: Activation,
    rng: &mut RngStream,
) -> Result<Layer> {
    if n_neurons == 0 || n_inputs == 0 {
        return Err(Error::dim(alloc::format!(
            "a layer needs at least one neuron and one input, got {n_neurons}x{n_inputs}"
        )));
    }
    let bias: Vec<f64> = (0..n_neurons).map(|_| dist.sample(rng)).collect();
    let weights: Vec<f64> = (0..n_neurons * n_inputs).map(|_| dist.sample(rng)).collect();
    Layer::new(bias, Matrix::from_vec(n_neurons, n_inputs, weights)?, activation)
}

/// Draws a single-hidden-layer net.
pub fn draw_params(
    dist: &WeightDistribution,
    n_neurons: usize,
    n_inputs: usize,
    activation: Activation,
    rng: &mut RngStream,
) -> Result<RandomizedNet> {
    RandomizedNet::new(alloc::vec![draw_layer(dist, n_neurons, n_inputs, activation, rng)?])
}

/// Draws a net with the given hidden widths, layer by layer from one stream.
pub fn draw_network(
    dist: &WeightDistribution,
    n_inputs: usize,
    widths: &[usize],
    activation: Activation,
    rng: &mut RngStream,
) -> Result<RandomizedNet> {
    if widths.is_empty() {
        return Err(Error::param("widths", "at least one hidden layer is required"));
    }
    let mut layers = Vec::with_capacity(widths.len());
    let mut fan_in = n_inputs;
    for &w in widths {
        layers.push(draw_layer(dist, w, fan_in, activation, rng)?);
        fan_in = w;
    }
    RandomizedNet::new(layers)
}
