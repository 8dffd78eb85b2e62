use randnet_core::simulation::NestedModels;

#[test]
fn wrong_selection_vanishes_with_sample_size() {
    let models = NestedModels::new(2024, 2, 8, 0.5, 100_000).unwrap();
    let summaries: Vec<_> = [100, 400, 1600]
        .iter()
        .map(|&n| models.selection_summary(n, 500, 0.9).unwrap())
        .collect();
    for s in &summaries {
        println!(
            "n={} wrong={} ratio_error={}",
            s.n, s.wrong_frequency, s.mean_ratio_error
        );
    }
    for w in summaries.windows(2) {
        assert!(w[1].wrong_frequency <= w[0].wrong_frequency);
        assert!(w[1].mean_ratio_error < w[0].mean_ratio_error);
    }
    assert!(summaries[2].wrong_frequency < 0.05);
}

#[test]
fn calibration_is_close_to_large_sample_criteria() {
    let models = NestedModels::new(7, 3, 10, 0.5, 50_000).unwrap();
    let s = models.selection_summary(5_000, 20, 0.9).unwrap();
    assert_eq!(s.wrong_frequency, 0.0);
    assert!(s.mean_ratio_error < 0.05, "{s:?}");
}
