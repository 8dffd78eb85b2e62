use randnet_core::network::Activation;
use randnet_core::rng::{draw_params, RngStream, WeightDistribution};
use randnet_core::training::fit_least_squares;
use randnet_core::Matrix;

/// Max-norm of the training residual with as many neurons as rows.
fn residual(seed: u64, n: usize, q: usize) -> f64 {
    let mut rng = RngStream::new(seed, 0);
    let z: Vec<f64> = (0..n * q).map(|_| rng.standard_normal()).collect();
    let y: Vec<f64> = (0..n).map(|_| rng.standard_normal()).collect();
    let z = Matrix::from_vec(n, q, z).unwrap();
    let y = Matrix::from_vec(n, 1, y).unwrap();
    let net = draw_params(
        &WeightDistribution::default(),
        n,
        q,
        Activation::Sigmoid,
        &mut RngStream::new(seed, 1),
    )
    .unwrap();
    let x = net.hidden_matrix(&z).unwrap();
    let beta = fit_least_squares(&x, &y).unwrap();
    let fitted = x.matmul(beta.beta()).unwrap();
    fitted
        .as_slice()
        .iter()
        .zip(y.as_slice())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

#[test]
fn width_equal_to_sample_size_interpolates() {
    for n in [10, 30, 50] {
        let hits = (0..100).filter(|&s| residual(s, n, 3) < 1e-6).count();
        assert!(hits >= 95, "n={n}: {hits} of 100 interpolated");
    }
}

#[test]
fn narrow_network_does_not_interpolate() {
    let mut rng = RngStream::new(5, 0);
    let z: Vec<f64> = (0..60).map(|_| rng.standard_normal()).collect();
    let y: Vec<f64> = (0..20).map(|_| rng.standard_normal()).collect();
    let z = Matrix::from_vec(20, 3, z).unwrap();
    let y = Matrix::from_vec(20, 1, y).unwrap();
    let net = draw_params(&WeightDistribution::default(), 3, 3, Activation::Sigmoid, &mut rng).unwrap();
    let x = net.hidden_matrix(&z).unwrap();
    let fitted = x.matmul(fit_least_squares(&x, &y).unwrap().beta()).unwrap();
    let max = fitted
        .as_slice()
        .iter()
        .zip(y.as_slice())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(max > 1e-3);
}
