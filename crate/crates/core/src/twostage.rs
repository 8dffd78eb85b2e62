//! Fixed-width confidence interval for the expected validation MSPE with a
//! data-driven number of weight draws.
//!
//! 1. A few pilot draws give the sample standard deviation `σ̂`.
//! 2. `J₀ = max{J̄₀, ⌊Φ⁻¹(1−α/2)·σ̂/d⌋ + 1}`.
//! 3. With `J₀` draws, `σ̂²_{J₀} = (1/J₀) Σ (Z_j − Z̄)²`.
//! 4. `Ĵ_opt = max{J₀, ⌊σ̂²_{J₀}·Φ⁻¹(1−α/2)²/d²⌋}`.
//! 5. The interval is `Z̄_{Ĵ_opt} ± d`.
//!
//! Draws are cumulative: stage two only evaluates the draws it adds, and the
//! first `k` draws of any run are the same for a given seed.

use alloc::format;
use alloc::vec::Vec;

use crate::crossval::{evaluate_draws, mean, CvConfig, DrawEvaluator, ElmDraws};
use crate::error::{Error, Result};
use crate::math;
use crate::training::Dataset;

/// `Φ⁻¹(p)` to about 1e-15: a rational approximation (Acklam) followed by a
/// Newton step on `Φ(x) − p` with `Φ` from `erfc`.
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::param("p", format!("probability must lie in (0, 1), got {p}")));
    }
    if p > 0.5 {
        // 1 − p is exact here, and this makes the function odd about 1/2
        return Ok(-lower_quantile(1.0 - p));
    }
    Ok(lower_quantile(p))
}

/// Standard normal distribution function.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * math::erfc(-x / core::f64::consts::SQRT_2)
}

const A: [f64; 6] = [
    -3.969683028665376e+01,
    2.209460984245205e+02,
    -2.759285104469687e+02,
    1.383577518672690e+02,
    -3.066479806614716e+01,
    2.506628277459239e+00,
];
const B: [f64; 5] = [
    -5.447609879822406e+01,
    1.615858368580409e+02,
    -1.556989798598866e+02,
    6.680131188771972e+01,
    -1.328068155288572e+01,
];
const C: [f64; 6] = [
    -7.784894002430293e-03,
    -3.223964580411365e-01,
    -2.400758277161838e+00,
    -2.549732539343734e+00,
    4.374664141464968e+00,
    2.938163982698783e+00,
];
const D: [f64; 4] = [
    7.784695709041462e-03,
    3.224671290700398e-01,
    2.445134137142996e+00,
    3.754408661907416e+00,
];
const P_LOW: f64 = 0.02425;

fn lower_quantile(p: f64) -> f64 {
    let x = if p < P_LOW {
        let q = math::sqrt(-2.0 * math::ln(p));
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };
    let density = math::exp(-0.5 * x * x) / math::sqrt(2.0 * core::f64::consts::PI);
    if density > 0.0 {
        x - (std_normal_cdf(x) - p) / density
    } else {
        x
    }
}

fn check_common(d: f64, alpha: f64) -> Result<()> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::param("d", format!("half-width must be positive, got {d}")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param("alpha", format!("must lie in (0, 1), got {alpha}")));
    }
    Ok(())
}

fn two_sided_quantile(alpha: f64) -> Result<f64> {
    std_normal_quantile(1.0 - alpha / 2.0)
}

fn floor_to_count(v: f64) -> usize {
    // saturating: absurd sizes are caught by the draw cap
    if v >= usize::MAX as f64 {
        usize::MAX
    } else {
        math::floor(v).max(0.0) as usize
    }
}

/// First-stage size `J₀`.
pub fn initial_stage_size(d: f64, alpha: f64, sigma_hat: f64, min_initial: usize) -> Result<usize> {
    check_common(d, alpha)?;
    if !(sigma_hat >= 0.0) {
        return Err(Error::param(
            "sigma_hat",
            format!("must be non-negative, got {sigma_hat}"),
        ));
    }
    let z = two_sided_quantile(alpha)?;
    let j = floor_to_count(z * sigma_hat / d).saturating_add(1);
    Ok(min_initial.max(j))
}

/// Final number of draws `Ĵ_opt` from the first-stage variance (divisor `J₀`).
pub fn final_stage_size(j0: usize, variance_j0: f64, d: f64, alpha: f64) -> Result<usize> {
    check_common(d, alpha)?;
    if j0 == 0 {
        return Err(Error::param("J0", "first-stage size must be ≥ 1"));
    }
    if !(variance_j0 >= 0.0) {
        return Err(Error::param(
            "variance",
            format!("must be non-negative, got {variance_j0}"),
        ));
    }
    let z = two_sided_quantile(alpha)?;
    Ok(j0.max(floor_to_count(variance_j0 * z * z / (d * d))))
}

/// `(mean(z) − d, mean(z) + d)`.
pub fn fixed_width_interval(z: &[f64], d: f64) -> Result<(f64, f64)> {
    if z.is_empty() {
        return Err(Error::param("z", "interval of zero draws"));
    }
    if !(d > 0.0) {
        return Err(Error::param("d", format!("half-width must be positive, got {d}")));
    }
    let m = mean(z);
    Ok((m - d, m + d))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoStageConfig {
    /// Half-width `d` of the interval, in MSPE units.
    pub half_width: f64,
    pub alpha: f64,
    /// Minimal first-stage size `J̄₀`.
    pub min_initial: usize,
    /// Pilot draws for `σ̂`; at least 2.
    pub pilot: usize,
    /// Upper bound on `Ĵ_opt`; exceeding it is an error.
    pub max_draws: usize,
}

impl Default for TwoStageConfig {
    fn default() -> Self {
        TwoStageConfig {
            half_width: 0.1,
            alpha: 0.05,
            min_initial: 10,
            pilot: 3,
            max_draws: 1_000_000,
        }
    }
}

impl TwoStageConfig {
    pub fn validate(&self) -> Result<()> {
        check_common(self.half_width, self.alpha)?;
        if self.min_initial == 0 {
            return Err(Error::param("min-j0", "minimal first-stage size must be ≥ 1"));
        }
        if self.pilot < 2 {
            return Err(Error::param("pilot", "a variance needs at least 2 pilot draws"));
        }
        if self.max_draws < self.min_initial.max(self.pilot) {
            return Err(Error::param("max_draws", "cap is below the first-stage size"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoStageResult {
    /// Pilot sample standard deviation (divisor `pilot − 1`).
    pub sigma_pilot: f64,
    pub j0: usize,
    /// First-stage standard deviation (divisor `J₀`).
    pub sigma_j0: f64,
    pub j_opt: usize,
    pub mean: f64,
    pub interval: (f64, f64),
    /// `Z_1..Z_{Ĵ_opt}`.
    pub z: Vec<f64>,
}

/// Sample standard deviation with divisor `n − 1`.
pub fn sample_sd(z: &[f64]) -> f64 {
    let m = mean(z);
    math::sqrt(z.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (z.len() - 1) as f64)
}

/// Variance with divisor `n`.
pub fn plugin_variance(z: &[f64]) -> f64 {
    let m = mean(z);
    z.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / z.len() as f64
}

struct Cumulative<'a, E: DrawEvaluator> {
    evaluator: &'a E,
    z: Vec<f64>,
}

impl<E: DrawEvaluator> Cumulative<'_, E> {
    fn extend_to(&mut self, n: usize) -> Result<()> {
        if n > self.z.len() {
            let more = evaluate_draws(self.evaluator, self.z.len()..n)?;
            self.z.extend(more.into_iter().map(|(z, _)| z));
        }
        Ok(())
    }
}

/// Two-stage procedure on any source of per-draw errors.
pub fn run_two_stage_with<E: DrawEvaluator>(evaluator: &E, cfg: &TwoStageConfig) -> Result<TwoStageResult> {
    cfg.validate()?;
    let mut draws = Cumulative {
        evaluator,
        z: Vec::new(),
    };
    draws.extend_to(cfg.pilot)?;
    let sigma_pilot = sample_sd(&draws.z[..cfg.pilot]);

    let j0 = initial_stage_size(cfg.half_width, cfg.alpha, sigma_pilot, cfg.min_initial)?;
    check_cap(j0, cfg)?;
    draws.extend_to(j0)?;
    let variance_j0 = plugin_variance(&draws.z[..j0]);

    let j_opt = final_stage_size(j0, variance_j0, cfg.half_width, cfg.alpha)?;
    check_cap(j_opt, cfg)?;
    draws.extend_to(j_opt)?;

    let mut z = draws.z;
    z.truncate(j_opt);
    let interval = fixed_width_interval(&z, cfg.half_width)?;
    Ok(TwoStageResult {
        sigma_pilot,
        j0,
        sigma_j0: math::sqrt(variance_j0),
        j_opt,
        mean: mean(&z),
        interval,
        z,
    })
}

fn check_cap(n: usize, cfg: &TwoStageConfig) -> Result<()> {
    if n > cfg.max_draws {
        return Err(Error::param(
            "d",
            format!(
                "half-width {} requires {n} draws, more than the cap of {}",
                cfg.half_width, cfg.max_draws
            ),
        ));
    }
    Ok(())
}

/// Two-stage interval for an extreme learning machine; `cv.draws` is ignored.
pub fn run_two_stage(
    training: &Dataset,
    validation: &Dataset,
    cv: &CvConfig,
    cfg: &TwoStageConfig,
) -> Result<TwoStageResult> {
    let draws = ElmDraws::new(training, validation, cv)?;
    run_two_stage_with(&draws, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use alloc::vec;

    // reference values from a 30-digit evaluation of √2·erf⁻¹(2p − 1)
    const REFERENCE: [(f64, f64); 12] = [
        (1e-12, -7.0344838253011319298),
        (1e-6, -4.7534243088228989482),
        (0.001, -3.0902323061678135415),
        (0.02425, -1.9729610513118848503),
        (0.1, -1.281551565544600467),
        (0.3, -0.52440051270804078404),
        (0.5, 0.0),
        (0.7, 0.52440051270804078404),
        (0.9, 1.281551565544600467),
        (0.975, 1.9599639845400542355),
        (0.99, 2.3263478740408411009),
        (0.999999, 4.7534243088228989482),
    ];

    #[test]
    fn quantile_matches_reference_table() {
        for (p, x) in REFERENCE {
            let got = std_normal_quantile(p).unwrap();
            assert!((got - x).abs() < 1e-9, "p={p}: {got} vs {x}");
        }
        assert_eq!(std_normal_quantile(0.5).unwrap(), 0.0);
        assert!((std_normal_quantile(0.975).unwrap() - 1.959964).abs() < 1e-6);
    }

    #[test]
    fn quantile_is_odd() {
        for i in 1..200 {
            let p = i as f64 / 200.0;
            let a = std_normal_quantile(p).unwrap();
            let b = std_normal_quantile(1.0 - p).unwrap();
            assert!((a + b).abs() < 1e-12, "p={p}");
        }
    }

    #[test]
    fn quantile_rejects_endpoints() {
        for p in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(std_normal_quantile(p).is_err());
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        for i in 1..100 {
            let p = i as f64 / 100.0;
            let x = std_normal_quantile(p).unwrap();
            assert!((std_normal_cdf(x) - p).abs() < 1e-14);
        }
    }

    #[test]
    fn initial_stage_examples() {
        assert_eq!(initial_stage_size(0.1, 0.05, 0.0, 3).unwrap(), 3);
        assert_eq!(initial_stage_size(0.1, 0.05, 1.0, 3).unwrap(), 20);
        assert_eq!(initial_stage_size(100.0, 0.05, 1.0, 3).unwrap(), 3);
        assert!(initial_stage_size(0.0, 0.05, 1.0, 3).is_err());
    }

    #[test]
    fn final_stage_examples() {
        assert_eq!(final_stage_size(20, 0.0, 0.1, 0.05).unwrap(), 20);
        // 1.959964² / 0.01 = 384.1459
        assert_eq!(final_stage_size(20, 1.0, 0.1, 0.05).unwrap(), 384);
        let base = final_stage_size(1, 0.5, 0.1, 0.05).unwrap();
        let four = final_stage_size(1, 2.0, 0.1, 0.05).unwrap();
        assert!(four >= 4 * base && four <= 4 * base + 3);
    }

    #[test]
    fn interval_examples() {
        assert_eq!(fixed_width_interval(&[1.0, 3.0], 0.5).unwrap(), (1.5, 2.5));
        assert_eq!(fixed_width_interval(&[2.0], 1.0).unwrap(), (1.0, 3.0));
        let (a, b) = fixed_width_interval(&[1.0, 3.0], 0.5).unwrap();
        let (c, e) = fixed_width_interval(&[11.0, 13.0], 0.5).unwrap();
        assert_eq!((c - a, e - b), (10.0, 10.0));
        assert!(fixed_width_interval(&[], 1.0).is_err());
    }

    struct Constant(f64);

    impl DrawEvaluator for Constant {
        type Model = ();
        fn evaluate(&self, _: usize) -> Result<(f64, ())> {
            Ok((self.0, ()))
        }
    }

    pub(crate) struct NormalZ {
        pub seed: u64,
        pub mean: f64,
        pub sd: f64,
    }

    impl DrawEvaluator for NormalZ {
        type Model = ();
        fn evaluate(&self, j: usize) -> Result<(f64, ())> {
            Ok((RngStream::new(self.seed, j as u64).normal(self.mean, self.sd), ()))
        }
    }

    #[test]
    fn constant_draws_stop_at_first_stage() {
        let cfg = TwoStageConfig {
            half_width: 0.3,
            min_initial: 7,
            ..TwoStageConfig::default()
        };
        let r = run_two_stage_with(&Constant(4.0), &cfg).unwrap();
        assert_eq!(r.sigma_pilot, 0.0);
        assert_eq!(r.j0, 7);
        assert_eq!(r.j_opt, 7);
        assert_eq!(r.interval, (3.7, 4.3));
        assert_eq!(r.z, vec![4.0; 7]);
    }

    #[test]
    fn sizes_are_ordered_and_interval_has_width_2d() {
        for seed in 0..30 {
            let cfg = TwoStageConfig {
                half_width: 0.25,
                min_initial: 5,
                ..TwoStageConfig::default()
            };
            let r = run_two_stage_with(
                &NormalZ {
                    seed,
                    mean: 3.0,
                    sd: 1.0,
                },
                &cfg,
            )
            .unwrap();
            assert!(r.j_opt >= r.j0 && r.j0 >= cfg.min_initial);
            assert!(((r.interval.1 - r.interval.0) - 0.5).abs() < 1e-12);
            assert_eq!(r.z.len(), r.j_opt);
            assert!((r.mean - mean(&r.z)).abs() < 1e-15);
        }
    }

    #[test]
    fn halving_d_never_reduces_draws() {
        for seed in 0..20 {
            let src = NormalZ {
                seed,
                mean: 1.0,
                sd: 0.5,
            };
            let mut prev = 0;
            for d in [0.4, 0.2, 0.1, 0.05] {
                let cfg = TwoStageConfig {
                    half_width: d,
                    ..TwoStageConfig::default()
                };
                let r = run_two_stage_with(&src, &cfg).unwrap();
                assert!(r.j_opt >= prev);
                prev = r.j_opt;
            }
        }
    }

    #[test]
    fn larger_budget_keeps_earlier_draws() {
        let src = NormalZ {
            seed: 3,
            mean: 0.0,
            sd: 1.0,
        };
        let a = run_two_stage_with(
            &src,
            &TwoStageConfig {
                half_width: 0.5,
                ..Default::default()
            },
        )
        .unwrap();
        let b = run_two_stage_with(
            &src,
            &TwoStageConfig {
                half_width: 0.1,
                ..Default::default()
            },
        )
        .unwrap();
        let k = a.z.len().min(b.z.len());
        assert_eq!(a.z[..k], b.z[..k]);
    }

    #[test]
    fn config_validation() {
        let ok = TwoStageConfig::default();
        assert!(ok.validate().is_ok());
        assert!(TwoStageConfig { pilot: 1, ..ok }.validate().is_err());
        assert!(TwoStageConfig { half_width: -1.0, ..ok }.validate().is_err());
        assert!(TwoStageConfig { alpha: 1.0, ..ok }.validate().is_err());
        assert!(TwoStageConfig { min_initial: 0, ..ok }.validate().is_err());
    }

    #[test]
    fn draw_cap_is_enforced() {
        let cfg = TwoStageConfig {
            half_width: 1e-6,
            max_draws: 1000,
            ..TwoStageConfig::default()
        };
        let err = run_two_stage_with(
            &NormalZ {
                seed: 0,
                mean: 0.0,
                sd: 1.0,
            },
            &cfg,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Parameter { name: "d", .. }));
    }
}
