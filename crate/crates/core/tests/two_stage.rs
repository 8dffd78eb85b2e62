use randnet_core::crossval::{CvConfig, DrawEvaluator, Topology};
use randnet_core::network::Activation;
use randnet_core::rng::{RngStream, WeightDistribution};
use randnet_core::simulation::{SimConfig, SyntheticTask};
use randnet_core::twostage::{run_two_stage, run_two_stage_with, TwoStageConfig};
use randnet_core::Result;

/// i.i.d. `N(mean, sd²)` draws, draw `j` from stream `j`.
struct NormalZ {
    seed: u64,
    mean: f64,
    sd: f64,
}

impl DrawEvaluator for NormalZ {
    type Model = ();
    fn evaluate(&self, j: usize) -> Result<(f64, ())> {
        Ok((RngStream::new(self.seed, j as u64).normal(self.mean, self.sd), ()))
    }
}

fn cfg(min_initial: usize) -> TwoStageConfig {
    TwoStageConfig {
        half_width: 0.2,
        alpha: 0.05,
        min_initial,
        pilot: 3,
        ..TwoStageConfig::default()
    }
}

fn median(mut v: Vec<usize>) -> f64 {
    v.sort_unstable();
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2] as f64
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2]) as f64
    }
}

#[test]
fn final_size_concentrates_near_optimum() {
    let sizes: Vec<usize> = (0..200)
        .map(|s| {
            run_two_stage_with(
                &NormalZ {
                    seed: s,
                    mean: 10.0,
                    sd: 1.0,
                },
                &cfg(70),
            )
            .unwrap()
            .j_opt
        })
        .collect();
    let m = median(sizes);
    assert!((77.0..=116.0).contains(&m), "median {m}");
}

#[test]
fn interval_covers_the_mean() {
    let hits = (0..1000)
        .filter(|&s| {
            let r = run_two_stage_with(
                &NormalZ {
                    seed: 10_000 + s,
                    mean: 10.0,
                    sd: 1.0,
                },
                &cfg(70),
            )
            .unwrap();
            r.interval.0 <= 10.0 && 10.0 <= r.interval.1
        })
        .count();
    let coverage = hits as f64 / 1000.0;
    assert!((0.93..=0.98).contains(&coverage), "coverage {coverage}");
}

#[test]
fn small_first_stage_undercovers() {
    // with J̄₀ = 3 the first-stage variance is too noisy for nominal coverage
    let hits = (0..1000)
        .filter(|&s| {
            let r = run_two_stage_with(
                &NormalZ {
                    seed: 50_000 + s,
                    mean: 10.0,
                    sd: 1.0,
                },
                &cfg(3),
            )
            .unwrap();
            r.interval.0 <= 10.0 && 10.0 <= r.interval.1
        })
        .count();
    assert!(hits < 930, "{hits}");
}

#[test]
fn elm_two_stage_is_consistent() {
    let task = SyntheticTask::new(&SimConfig {
        n: 200,
        n_val: 50,
        seed: 4,
        ..SimConfig::default()
    })
    .unwrap();
    let cv = CvConfig {
        draws: 1,
        topology: Topology::single(5, Activation::Sigmoid),
        weight_dist: WeightDistribution::default(),
        lambda: 0.0,
        seed: 8,
    };
    let ts = TwoStageConfig {
        half_width: 0.05,
        min_initial: 10,
        ..TwoStageConfig::default()
    };
    let r = run_two_stage(&task.training.data, &task.validation.data, &cv, &ts).unwrap();
    assert!(r.j_opt >= r.j0 && r.j0 >= 10);
    assert_eq!(r.z.len(), r.j_opt);
    assert!(((r.interval.1 - r.interval.0) - 0.1).abs() < 1e-12);
    let again = run_two_stage(&task.training.data, &task.validation.data, &cv, &ts).unwrap();
    assert_eq!(r, again);
}
