use qsklab::ensemble::{grid_configs, run_ensemble, sweep, EnsembleConfig, EnsembleMode};
use qsklab::model::{DisorderSpec, ModelParams};

fn base(n: usize, samples: usize, seed: u64) -> EnsembleConfig {
    let params = ModelParams::new(n, 5.0, 0.5, 1.0).unwrap();
    EnsembleConfig::new(
        params,
        DisorderSpec::gaussian(),
        samples,
        seed,
        EnsembleMode::MonteCarlo,
    )
}

#[test]
fn overlap_variance_grows_toward_cold_weak_field_corner() {
    let configs = grid_configs(&base(8, 60, 2024), &[5.0, 20.0], &[0.05, 0.5]).unwrap();
    let records = sweep(&configs).unwrap();
    assert_eq!(records.len(), 4);
    let var = |beta: f64, h: f64| {
        let r = records
            .iter()
            .find(|r| r.params.beta == beta && r.params.h == h)
            .unwrap();
        r.stats.as_ref().unwrap().overlap_variance
    };
    let corner = var(20.0, 0.05);
    assert!(corner > var(5.0, 0.5), "{corner} vs {}", var(5.0, 0.5));
    assert!(corner > var(20.0, 0.5));
    assert!(corner > var(5.0, 0.05));
    assert!(var(5.0, 0.05) > var(5.0, 0.5));
}

#[test]
fn standard_error_shrinks_like_inverse_root() {
    let small = run_ensemble(&base(4, 100, 5)).unwrap().overlap_sq.std_error;
    let large = run_ensemble(&base(4, 1600, 5))
        .unwrap()
        .overlap_sq
        .std_error;
    let ratio = small / large;
    assert!((2.8..5.6).contains(&ratio), "ratio {ratio}");
}
