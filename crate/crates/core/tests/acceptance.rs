//! Exit criteria. Each test prints one `criterion N: PASS|FAIL` line.
//!
//! Tests hold a shared lock so runtime limits are measured without the other
//! criteria competing for cores.

use std::process::Command;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use qsklab::bounds::{aip_remainder, BOUND_TOL};
use qsklab::ensemble::{
    assemble_rau_identity, derive_seed, run_ensemble, run_ensemble_with_reports, stream,
    EnsembleConfig, EnsembleMode, RAU_ENUMERATE_TOL,
};
use qsklab::hilbert::z_string;
use qsklab::model::{gauge_transform, pairs, sample_couplings, DisorderSpec, ModelParams};
use qsklab::observables::{correlator_matrix, ReportOptions};
use qsklab::par::Workers;
use qsklab::spectral::{
    diagonalize, duhamel2, expectation_real, gibbs_for_sample, log_partition_perturbed, make_gibbs,
};
use qsklab::verify::{
    commuting_check, dls_grid_check, falk_bruch_grid, gaussian_identity_check,
    ground_state_density, lemma_pass, pauli_algebra_checks, single_spin_check,
    synthetic_remainder_checks, theorem_run, z2_invariance_check, Check,
};

// Straight to the process stdout: the harness captures println! of passing tests.
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let mut out = std::io::stdout().lock();
        let _ = writeln!(out, $($arg)*);
        let _ = out.flush();
    }};
}

static SERIAL: Mutex<()> = Mutex::new(());

fn serial() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

fn verdict(k: usize, checks: &[Check], elapsed: Duration, limit: Option<Duration>) -> bool {
    use std::fmt::Write as _;
    let mut ok = checks.iter().all(|c| c.passed);
    let mut text = String::new();
    for c in checks {
        let _ = writeln!(text, "  {c}");
    }
    if let Some(limit) = limit {
        let in_time = elapsed <= limit;
        let _ = writeln!(
            text,
            "  {} runtime: {:.1}s <= {:.0}s",
            if in_time { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            limit.as_secs_f64()
        );
        ok &= in_time;
    }
    let _ = writeln!(text, "criterion {k}: {}", if ok { "PASS" } else { "FAIL" });
    say!("{}", text.trim_end());
    ok
}

#[test]
fn criterion_1_pauli_algebra() {
    let _g = serial();
    let start = Instant::now();
    let mut checks = Vec::new();
    for n in 1..=6 {
        checks.extend(pauli_algebra_checks(n).unwrap());
        checks.extend(z2_invariance_check(n, derive_seed(101, n as u64)).unwrap());
    }
    assert!(verdict(
        1,
        &checks,
        start.elapsed(),
        Some(Duration::from_secs(10))
    ));
}

/// Largest `|β²(A,A) − ∂²log Z − β²⟨A⟩²|` over instances drawn here, with
/// the derivative from a sixth-order stencil independent of the library's.
fn duhamel_second_derivative_error(count: usize, seed: u64) -> f64 {
    use rand::Rng;
    let mut worst: f64 = 0.0;
    for k in 0..count {
        let mut rng = stream(derive_seed(seed, k as u64));
        let n = rng.random_range(2..=5usize);
        let beta = rng.random_range(0.2..2.5);
        let h = rng.random_range(0.05..1.5);
        let params = ModelParams::new(n, beta, h, 1.0).unwrap();
        let spec = [
            DisorderSpec::gaussian(),
            DisorderSpec::rademacher(),
            DisorderSpec::uniform(),
        ][k % 3]
            .clone();
        let sample = sample_couplings(&spec, n, &mut rng).unwrap();
        let i = rng.random_range(0..n - 1);
        let j = rng.random_range(i + 1..n);
        let a = z_string(&[i, j], n).unwrap();
        let h_op = qsklab::model::build_hamiltonian(&params, &sample).unwrap();
        let state = make_gibbs(diagonalize(&h_op).unwrap(), beta).unwrap();
        let aa = duhamel2(&state, &a, &a).unwrap();
        let mean = expectation_real(&state, &a).unwrap();
        let d = 0.02 / beta;
        let f = |x: f64| log_partition_perturbed(&h_op, &a, x, beta).unwrap();
        let second = (2.0 * f(3.0 * d) - 27.0 * f(2.0 * d) + 270.0 * f(d) - 490.0 * f(0.0)
            + 270.0 * f(-d)
            - 27.0 * f(-2.0 * d)
            + 2.0 * f(-3.0 * d))
            / (180.0 * d * d);
        worst = worst.max((beta * beta * aa - second - beta * beta * mean * mean).abs());
    }
    worst
}

#[test]
fn criterion_2_duhamel() {
    let _g = serial();
    let start = Instant::now();
    let mut checks = Vec::new();
    for bh in [0.01, 0.1, 1.0, 10.0] {
        checks.push(single_spin_check(bh).unwrap());
    }
    checks.push(Check::at_most(
        "duhamel_second_derivative_50",
        duhamel_second_derivative_error(50, 202),
        1e-6,
    ));
    checks.push(commuting_check(40, 203).unwrap());
    assert!(verdict(2, &checks, start.elapsed(), None));
}

#[test]
fn criterion_3_falk_bruch_chain() {
    let _g = serial();
    let start = Instant::now();
    let (grid, evaluated) = falk_bruch_grid(
        &[
            DisorderSpec::gaussian(),
            DisorderSpec::rademacher(),
            DisorderSpec::uniform(),
        ],
        &[2, 4, 6, 8],
        &[1.0, 5.0, 20.0],
        &[0.05, 0.3, 1.0],
        100,
        303,
        Workers::default(),
    )
    .unwrap();
    say!("  {evaluated} samples");
    let checks = vec![grid, dls_grid_check(100).unwrap()];
    assert!(verdict(
        3,
        &checks,
        start.elapsed(),
        Some(Duration::from_secs(600))
    ));
}

#[test]
fn criterion_4_remainders() {
    let _g = serial();
    let start = Instant::now();
    let mut checks = synthetic_remainder_checks();
    let spec = DisorderSpec::rademacher();
    let mut worst_excess = f64::NEG_INFINITY;
    let mut worst_c3: f64 = 0.0;
    for beta in [1.0, 5.0, 20.0] {
        for h in [0.05, 0.4, 1.0] {
            let params = ModelParams::new(4, beta, h, 1.0).unwrap();
            let config = EnsembleConfig::new(params, spec.clone(), 0, 0, EnsembleMode::Enumerate)
                .with_options(ReportOptions {
                    pair_terms: false,
                    third_cumulant: true,
                });
            let pass = lemma_pass(&config, usize::MAX).unwrap();
            worst_c3 = worst_c3.max(pass.stats.third_cumulant_max.unwrap());
            for sample in &pass.kept {
                for pair in pairs(4) {
                    let r = aip_remainder(&params, sample, pair, &spec).unwrap();
                    worst_excess = worst_excess.max(r.delta_value.abs() - r.bound_value);
                }
            }
        }
    }
    checks.push(Check::at_most(
        "physical_remainder_minus_bound",
        worst_excess,
        BOUND_TOL,
    ));
    checks.push(Check::at_most("third_cumulant_abs", worst_c3, 6.0 + 1e-3));
    assert!(verdict(4, &checks, start.elapsed(), None));
}

#[test]
fn criterion_5_overlap_identity() {
    let _g = serial();
    let start = Instant::now();
    let params = ModelParams::new(4, 1.0, 0.4, 1.0).unwrap();
    let spec = DisorderSpec::rademacher();
    let config = EnsembleConfig::new(params, spec.clone(), 0, 0, EnsembleMode::Enumerate)
        .with_options(ReportOptions {
            pair_terms: true,
            third_cumulant: false,
        });
    let pass = lemma_pass(&config, usize::MAX).unwrap();
    let stats = &pass.stats;

    // Δ_N from conditional remainders: every assignment, every pair, each
    // averaged over its own coupling only.
    let n = 4.0f64;
    let weight = 1.0 / pass.kept.len() as f64;
    let mut conditional = 0.0;
    for sample in &pass.kept {
        for pair in pairs(4) {
            conditional += weight
                * aip_remainder(&params, sample, pair, &spec)
                    .unwrap()
                    .delta_value;
        }
    }
    let delta_conditional = -conditional / n.powf(1.5);
    let bj = params.beta * params.j_coupling;
    let rhs = (n - 1.0) / n * stats.duhamel_aa.mean + 2.0 / (bj * n) * stats.exchange_energy.mean
        - 2.0 / bj * delta_conditional
        + 1.0 / n;
    let identity = assemble_rau_identity(stats, &params).unwrap();
    let (gauss, _) = gaussian_identity_check(1.0, 0.4, 1.0, Workers::default()).unwrap();
    let checks = vec![
        Check::at_most(
            "rademacher_residual",
            (stats.overlap_sq.mean - rhs).abs(),
            RAU_ENUMERATE_TOL,
        ),
        Check::at_most(
            "delta_n_estimators_agree",
            (delta_conditional - identity.delta_n).abs(),
            1e-12,
        ),
        Check::at_most("gaussian_residual", gauss.residual.abs(), 1e-6),
        Check::at_most("gaussian_delta_n", gauss.delta_n.abs(), 1e-6),
    ];
    say!("  rademacher delta_n = {delta_conditional:.12}");
    assert!(verdict(
        5,
        &checks,
        start.elapsed(),
        Some(Duration::from_secs(300))
    ));
}

#[test]
fn criterion_6_symmetry() {
    let _g = serial();
    let start = Instant::now();
    let params = ModelParams::new(4, 1.0, 0.4, 1.0).unwrap();
    let config = EnsembleConfig::new(
        params,
        DisorderSpec::rademacher(),
        0,
        0,
        EnsembleMode::Enumerate,
    );
    let pass = lemma_pass(&config, 0).unwrap();
    let mc = EnsembleConfig::new(
        ModelParams::new(6, 5.0, 0.1, 1.0).unwrap(),
        DisorderSpec::gaussian(),
        30,
        606,
        EnsembleMode::MonteCarlo,
    );
    let mc_pass = lemma_pass(&mc, 0).unwrap();
    let n = 4.0f64;

    use rand::Rng;
    let mut rng = stream(607);
    let gparams = ModelParams::new(5, 2.0, 0.3, 1.0).unwrap();
    let sample = sample_couplings(&DisorderSpec::gaussian(), 5, &mut rng).unwrap();
    let base = correlator_matrix(&gibbs_for_sample(&gparams, &sample).unwrap(), 5).unwrap();
    let mut gauge_err: f64 = 0.0;
    for _ in 0..20 {
        let signs: Vec<i8> = (0..5)
            .map(|_| if rng.random_bool(0.5) { 1 } else { -1 })
            .collect();
        let moved = gauge_transform(&sample, &signs).unwrap();
        let corr = correlator_matrix(&gibbs_for_sample(&gparams, &moved).unwrap(), 5).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let want = (signs[i] * signs[j]) as f64 * base.zz(i, j);
                gauge_err = gauge_err.max((corr.zz(i, j) - want).abs());
            }
        }
    }
    let checks = vec![
        Check::at_most(
            "per_sample_magnetization",
            pass.max_abs_magnetization
                .max(mc_pass.max_abs_magnetization),
            1e-10,
        ),
        Check::at_most("mean_m2", (pass.stats.m2.mean - 1.0 / n).abs(), 1e-10),
        Check::at_most(
            "mean_m4",
            (pass.stats.m4.mean - (3.0 * n - 2.0) / n.powi(3)).abs(),
            1e-10,
        ),
        Check::at_most("gauge_covariance", gauge_err, 1e-9),
    ];
    assert!(verdict(6, &checks, start.elapsed(), None));
}

#[test]
fn criterion_7_overlap_variance_corner() {
    let _g = serial();
    let start = Instant::now();
    let config = EnsembleConfig::new(
        ModelParams::new(8, 20.0, 0.05, 1.0).unwrap(),
        DisorderSpec::gaussian(),
        200,
        707,
        EnsembleMode::MonteCarlo,
    );
    let run = theorem_run(&config).unwrap();
    let s = &run.stats;
    say!(
        "  E<R^2> = {:.6} +- {:.6}, finite rhs = {:.6} (margin {:.6}), asymptotic rhs = {:.6}",
        s.overlap_sq.mean,
        s.overlap_sq.std_error,
        run.bound.finite.rhs,
        run.bound.finite.margin,
        run.bound.asymptotic.rhs
    );
    let checks = vec![
        Check::at_least("overlap_variance", s.overlap_variance, 0.05),
        Check::at_most("overlap_first_moment", s.overlap_first.mean.abs(), 1e-12),
        Check::at_most(
            "asymptotic_rhs_value",
            (run.bound.asymptotic.rhs - 0.356).abs(),
            5e-4,
        ),
    ];
    assert!(verdict(
        7,
        &checks,
        start.elapsed(),
        Some(Duration::from_secs(900))
    ));
}

#[test]
fn criterion_8_ground_state_density() {
    let _g = serial();
    let start = Instant::now();
    let (mean, se) = ground_state_density(&DisorderSpec::gaussian(), 12, 100, 808).unwrap();
    say!("  N=12 ground-state density {mean:.6} +- {se:.6}");

    // ⟨U⟩ against the ground state per sample, at the largest N whose Gibbs
    // state is affordable here.
    let mut worst = f64::INFINITY;
    for (beta, h) in [(20.0, 0.05), (1.0, 0.5)] {
        let config = EnsembleConfig::new(
            ModelParams::new(8, beta, h, 1.0).unwrap(),
            DisorderSpec::gaussian(),
            100,
            809,
            EnsembleMode::MonteCarlo,
        );
        let (_, reports) = run_ensemble_with_reports(&config).unwrap();
        for (r, _) in &reports {
            worst = worst.min(r.exchange_energy - r.ground_energy);
        }
    }
    let checks = vec![
        Check::at_most("density_distance_from_kappa", (mean + 0.763).abs(), 0.1),
        Check::at_least("exchange_minus_ground", worst, -1e-9),
    ];
    assert!(verdict(8, &checks, start.elapsed(), None));
}

const SWEEP_FILE: &str = r#"seed = 42

[model]
n = 6
j = 1.0
law = "gaussian"

[ensemble]
mode = "monte_carlo"
samples = 100

[grid]
beta = [1.0, 5.0, 20.0]
h = [0.05, 0.3, 1.0]

[output]
csv = "unused.csv"
"#;

#[test]
fn criterion_9_sweep_determinism() {
    let _g = serial();
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("sweep.toml");
    std::fs::write(&file, SWEEP_FILE).unwrap();
    let run = |workers: &str, name: &str| -> Vec<u8> {
        let out = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_qsklab"))
            .args([
                "sweep",
                file.to_str().unwrap(),
                "--workers",
                workers,
                "--out",
                out.to_str().unwrap(),
            ])
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(out).unwrap()
    };
    let one = run("1", "w1.csv");
    let eight = run("8", "w8.csv");
    let again = run("1", "w1b.csv");
    let rows = String::from_utf8_lossy(&one)
        .lines()
        .filter(|l| !l.starts_with('#'))
        .count();
    let mut checks = vec![
        Check::at_least("identical_1_vs_8", f64::from(u8::from(one == eight)), 1.0),
        Check::at_least("identical_rerun", f64::from(u8::from(one == again)), 1.0),
        Check::at_least("rows", rows as f64, 10.0),
    ];
    // Stats, not only the CSV, are worker-invariant.
    let c = EnsembleConfig::new(
        ModelParams::new(5, 3.0, 0.2, 1.0).unwrap(),
        DisorderSpec::uniform(),
        40,
        9,
        EnsembleMode::MonteCarlo,
    );
    let a = run_ensemble(&c.clone().with_workers(Workers::SEQUENTIAL)).unwrap();
    let b = run_ensemble(&c.with_workers(Workers(Some(8)))).unwrap();
    checks.push(Check::at_least(
        "stats_identical",
        f64::from(u8::from(a == b)),
        1.0,
    ));
    assert!(verdict(9, &checks, start.elapsed(), None));
}
