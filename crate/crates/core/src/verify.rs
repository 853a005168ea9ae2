//! Invariant suites behind `qsklab verify`.
//!
//! Every check is a number compared against a threshold, so reports are
//! uniform: `value <= threshold` for error-type checks and
//! `value >= threshold` for margins and floors.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bounds::{
    aip_remainder, classical_ground_state, dls_lower, falk_bruch_check,
    integration_by_parts_remainder, phi, theorem_bound, BoundReport, TheoremReport, BOUND_TOL,
    C3_BOUND,
};
use crate::ensemble::{
    assemble_rau_identity, derive_seed, run_ensemble_streaming, stream, EnsembleConfig,
    EnsembleMode, EnsembleStats, IdentityReport,
};
use crate::error::{Error, Result};
use crate::hilbert::{flip_unitary, pauli_op, z_string, Axis, Operator, C64};
use crate::model::{
    build_hamiltonian, gauge_transform, pairs, sample_couplings, CouplingSample, DisorderSpec,
    ModelParams,
};
use crate::observables::{correlator_matrix, ReportOptions};
use crate::par::{map_indexed, Workers};
use crate::quadrature::gauss_hermite;
use crate::spectral::{
    connected_duhamel3, diagonalize, disorder_derivative_check, duhamel2, expectation_real,
    gibbs_for_sample, gibbs_from_hamiltonian, log_partition_perturbed, make_gibbs,
};

pub const ALGEBRA_TOL: f64 = 1e-10;
pub const CLOSED_FORM_TOL: f64 = 1e-10;
pub const FINITE_DIFF_TOL: f64 = 1e-6;
pub const DERIVATIVE_TOL: f64 = 1e-6;
/// Third differences at the step rule keep roughly two fifths of the digits.
pub const STENCIL_TOL: f64 = 1e-5;
pub const SYMMETRY_TOL: f64 = 1e-10;
pub const GAUGE_TOL: f64 = 1e-9;
pub const EXACT_MOMENT_TOL: f64 = 1e-10;
pub const CANCELLATION_TOL: f64 = 1e-12;
/// Slack on `|(A;A;A)| ≤ 6` for the finite-difference estimate.
pub const C3_SLACK: f64 = 1e-3;
pub const STEIN_TOL: f64 = 1e-10;
pub const DLS_TOL: f64 = 1e-12;
/// Weakened overlap-variance floor asserted at small `N`.
pub const THEOREM_FLOOR: f64 = 0.05;
pub const FIRST_MOMENT_TOL: f64 = 1e-12;

/// Gauss-Hermite nodes per coupling for the Gaussian identity check.
pub const GAUSSIAN_IDENTITY_NODES: usize = 24;
/// In Monte Carlo mode only this many samples get per-pair remainders.
pub const REMAINDER_SAMPLES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Algebra,
    Duhamel,
    Lemmas,
    Theorem,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "algebra" => Ok(Suite::Algebra),
            "duhamel" => Ok(Suite::Duhamel),
            "lemmas" => Ok(Suite::Lemmas),
            "theorem" => Ok(Suite::Theorem),
            other => Err(Error::InvalidParameter(format!(
                "unknown suite '{other}' (algebra, duhamel, lemmas, theorem)"
            ))),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Suite::Algebra => "algebra",
            Suite::Duhamel => "duhamel",
            Suite::Lemmas => "lemmas",
            Suite::Theorem => "theorem",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            value,
            relation: Relation::AtMost,
            threshold,
            passed: value <= threshold,
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            value,
            relation: Relation::AtLeast,
            threshold,
            passed: value >= threshold,
        }
    }

    /// Margin of a bound report against `−BOUND_TOL`.
    pub fn bound(report: &BoundReport) -> Self {
        Check::at_least(report.name.clone(), report.margin, -BOUND_TOL)
    }

    pub fn identity(report: &IdentityReport) -> Self {
        Check::at_most(report.name.clone(), report.residual.abs(), report.tolerance)
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rel = match self.relation {
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
        };
        write!(
            f,
            "{} {}: {:.6e} {} {:.3e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.value,
            rel,
            self.threshold
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub version: String,
    pub checks: Vec<Check>,
    /// Bound reports behind the checks, printed on failure.
    pub bounds: Vec<BoundReport>,
    pub identities: Vec<IdentityReport>,
    /// Informational numbers (not gated).
    pub notes: Vec<(String, f64)>,
}

impl SuiteReport {
    fn new(suite: Suite) -> Self {
        SuiteReport {
            suite,
            version: crate::VERSION.to_string(),
            checks: Vec::new(),
            bounds: Vec::new(),
            identities: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    fn note(&mut self, name: &str, value: f64) {
        self.notes.push((name.to_string(), value));
    }
}

/// Overrides for the built-in suite defaults.
#[derive(Debug, Clone, Default)]
pub struct VerifyOptions {
    pub n: Option<usize>,
    pub beta: Option<f64>,
    pub h: Option<f64>,
    pub j: Option<f64>,
    pub law: Option<DisorderSpec>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub mode: Option<EnsembleMode>,
    pub workers: Workers,
}

pub fn run_suite(suite: Suite, options: &VerifyOptions) -> Result<SuiteReport> {
    match suite {
        Suite::Algebra => algebra_suite(options),
        Suite::Duhamel => duhamel_suite(options),
        Suite::Lemmas => lemmas_suite(options),
        Suite::Theorem => theorem_suite(options),
    }
}

fn sample_for(spec: &DisorderSpec, n: usize, seed: u64) -> Result<CouplingSample> {
    sample_couplings(spec, n, &mut stream(seed))
}

// ---- algebra ----

/// Commutators, same-site anticommutators and squares of all Pauli
/// operators on `n` sites; each entry is the largest entrywise deviation.
pub fn pauli_algebra_checks(n: usize) -> Result<Vec<Check>> {
    let ops: Vec<[Operator; 3]> = (0..n)
        .map(|s| {
            Ok([
                pauli_op(Axis::X, s, n)?,
                pauli_op(Axis::Y, s, n)?,
                pauli_op(Axis::Z, s, n)?,
            ])
        })
        .collect::<Result<_>>()?;
    let id = Operator::identity(n)?;
    let zero = Operator::zeros(n)?;
    let axis_index = |a: Axis| a as usize;
    let mut comm_dev: f64 = 0.0;
    let mut anti_dev: f64 = 0.0;
    let mut square_dev: f64 = 0.0;
    for j in 0..n {
        for a in Axis::ALL {
            let sa = &ops[j][axis_index(a)];
            square_dev = square_dev.max(sa.product(sa)?.max_abs_diff(&id)?);
            for k in 0..n {
                for b in Axis::ALL {
                    let sb = &ops[k][axis_index(b)];
                    let comm = sa.commutator(sb)?;
                    let expected = if j != k || a == b {
                        zero.clone()
                    } else {
                        let (next, third) = a.cyclic_partner();
                        let c = &ops[j][axis_index(if b == next { third } else { next })];
                        let sign = if b == next { 1.0 } else { -1.0 };
                        c.scale_complex(C64::new(0.0, 2.0 * sign))
                    };
                    comm_dev = comm_dev.max(comm.max_abs_diff(&expected)?);
                    if j == k {
                        let anti = sa.product(sb)?.add(&sb.product(sa)?)?;
                        let expected = if a == b { id.scale(2.0) } else { zero.clone() };
                        anti_dev = anti_dev.max(anti.max_abs_diff(&expected)?);
                    }
                }
            }
        }
    }
    Ok(vec![
        Check::at_most(format!("commutators_n{n}"), comm_dev, ALGEBRA_TOL),
        Check::at_most(format!("anticommutators_n{n}"), anti_dev, ALGEBRA_TOL),
        Check::at_most(format!("squares_n{n}"), square_dev, ALGEBRA_TOL),
    ])
}

/// `F H F† = H` for the global flip `F`, plus hermiticity of `H`.
pub fn z2_invariance_check(n: usize, seed: u64) -> Result<Vec<Check>> {
    let h_op = if n == 1 {
        pauli_op(Axis::X, 0, 1)?.scale(-0.7)
    } else {
        let sample = sample_for(&DisorderSpec::gaussian(), n, seed)?;
        build_hamiltonian(&ModelParams::new(n, 1.0, 0.7, 1.0)?, &sample)?
    };
    let f = flip_unitary((1 << n) - 1, n)?;
    let conj = f.product(&h_op)?.product(&f.adjoint())?;
    Ok(vec![
        Check::at_most(
            format!("z2_invariance_n{n}"),
            conj.max_abs_diff(&h_op)?,
            ALGEBRA_TOL,
        ),
        Check::at_most(
            format!("hermitian_n{n}"),
            h_op.hermitian_deviation(),
            ALGEBRA_TOL,
        ),
    ])
}

fn algebra_suite(options: &VerifyOptions) -> Result<SuiteReport> {
    let mut report = SuiteReport::new(Suite::Algebra);
    let max_n = options.n.unwrap_or(6);
    let seed = options.seed.unwrap_or(1);
    for n in 1..=max_n {
        report.checks.extend(pauli_algebra_checks(n)?);
        report
            .checks
            .extend(z2_invariance_check(n, derive_seed(seed, n as u64))?);
    }
    Ok(report)
}

// ---- duhamel ----

/// `(σ^z, σ^z)` for `H = −σ^x` at inverse temperature `βh` against
/// `tanh(βh)/(βh)`.
pub fn single_spin_check(beta_h: f64) -> Result<Check> {
    let h_op = pauli_op(Axis::X, 0, 1)?.scale(-1.0);
    let z = pauli_op(Axis::Z, 0, 1)?;
    let state = gibbs_from_hamiltonian(&h_op, beta_h)?;
    let got = duhamel2(&state, &z, &z)?;
    let expected = beta_h.tanh() / beta_h;
    Ok(Check::at_most(
        format!("single_spin_bh{beta_h}"),
        (got - expected).abs(),
        CLOSED_FORM_TOL,
    ))
}

/// Largest `|β²(A,A) − ∂²_x log Z(H − xA) − β²⟨A⟩²|` over `count` random
/// instances with `2 ≤ N ≤ 5`.
pub fn finite_difference_check(count: usize, seed: u64, workers: Workers) -> Result<Check> {
    let errors = map_indexed(count, workers, |k| -> Result<f64> {
        use rand::Rng;
        let mut rng = stream(derive_seed(seed, k as u64));
        let n = rng.random_range(2..=5usize);
        let beta = rng.random_range(0.3..2.0);
        let h = rng.random_range(0.1..1.0);
        let params = ModelParams::new(n, beta, h, 1.0)?;
        let sample = sample_couplings(&DisorderSpec::gaussian(), n, &mut rng)?;
        let a_op = if k % 3 == 2 {
            z_string(&[rng.random_range(0..n)], n)?
        } else {
            let i = rng.random_range(0..n - 1);
            let j = rng.random_range(i + 1..n);
            z_string(&[i, j], n)?
        };
        let h_op = build_hamiltonian(&params, &sample)?;
        let state = make_gibbs(diagonalize(&h_op)?, beta)?;
        let aa = duhamel2(&state, &a_op, &a_op)?;
        let mean = expectation_real(&state, &a_op)?;
        // Fourth-order stencil in u = βx.
        let d = 1e-2;
        let f = |u: f64| log_partition_perturbed(&h_op, &a_op, u / beta, beta);
        let g2 = (-f(2.0 * d)? + 16.0 * f(d)? - 30.0 * f(0.0)? + 16.0 * f(-d)? - f(-2.0 * d)?)
            / (12.0 * d * d);
        let second = beta * beta * g2;
        Ok((beta * beta * aa - second - beta * beta * mean * mean).abs())
    });
    let worst = errors
        .into_iter()
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(Check::at_most(
        "duhamel_finite_difference",
        worst,
        FINITE_DIFF_TOL,
    ))
}

/// At `h = 0`, `(A, A) = ⟨A²⟩ = 1` for `A = σ_1^z σ_2^z`.
pub fn commuting_check(count: usize, seed: u64) -> Result<Check> {
    let mut worst: f64 = 0.0;
    for k in 0..count {
        let n = 2 + k % 4;
        let params = ModelParams::new(n, 0.5 + k as f64 * 0.25, 0.0, 1.0)?;
        let sample = sample_for(&DisorderSpec::gaussian(), n, derive_seed(seed, k as u64))?;
        let state = gibbs_for_sample(&params, &sample)?;
        let a_op = z_string(&[0, 1], n)?;
        worst = worst.max((duhamel2(&state, &a_op, &a_op)? - 1.0).abs());
    }
    Ok(Check::at_most("duhamel_commuting", worst, CLOSED_FORM_TOL))
}

/// `(σ^x; σ^x; σ^x) = −2 tanh(βh) sech²(βh)` for `H = −hσ^x`.
pub fn third_cumulant_closed_form(beta: f64, h: f64) -> Result<Check> {
    let h_op = pauli_op(Axis::X, 0, 1)?.scale(-h);
    let x = pauli_op(Axis::X, 0, 1)?;
    let c3 = connected_duhamel3(&h_op, &x, beta)?;
    let t = (beta * h).tanh();
    let expected = -2.0 * t * (1.0 - t * t);
    Ok(Check::at_most(
        format!("third_cumulant_free_spin_bh{}", beta * h),
        (c3.value - expected).abs(),
        STENCIL_TOL,
    ))
}

fn duhamel_suite(options: &VerifyOptions) -> Result<SuiteReport> {
    let mut report = SuiteReport::new(Suite::Duhamel);
    let seed = options.seed.unwrap_or(2);
    for bh in [0.01, 0.1, 1.0, 10.0] {
        report.checks.push(single_spin_check(bh)?);
    }
    let count = options.samples.unwrap_or(50);
    report
        .checks
        .push(finite_difference_check(count, seed, options.workers)?);
    report.checks.push(commuting_check(12, seed)?);
    for (beta, h) in [(0.5, 1.0), (2.0, 0.3)] {
        report.checks.push(third_cumulant_closed_form(beta, h)?);
    }
    let mut worst: f64 = 0.0;
    for k in 0..6 {
        let n = 2 + k % 3;
        let params = ModelParams::new(n, 1.0, 0.5, 1.0)?;
        let sample = sample_for(
            &DisorderSpec::gaussian(),
            n,
            derive_seed(seed ^ 0xd0, k as u64),
        )?;
        worst = worst.max(disorder_derivative_check(&params, &sample, (0, n - 1))?);
    }
    report
        .checks
        .push(Check::at_most("disorder_derivative", worst, DERIVATIVE_TOL));
    Ok(report)
}

// ---- lemmas ----

/// Remainders of `f(γ) = γ³` against closed forms: `E γ⁴ − 3 E γ²`.
pub fn synthetic_remainder_checks() -> Vec<Check> {
    let cube = |g: f64| g * g * g;
    let cube_prime = |g: f64| 3.0 * g * g;
    let rad = integration_by_parts_remainder(
        &DisorderSpec::rademacher().support().expect("discrete"),
        cube,
        cube_prime,
    );
    let gauss = integration_by_parts_remainder(
        &gauss_hermite(crate::quadrature::DEFAULT_NODES),
        cube,
        cube_prime,
    );
    let uni = integration_by_parts_remainder(
        &DisorderSpec::uniform().quadrature(crate::quadrature::DEFAULT_NODES),
        cube,
        cube_prime,
    );
    vec![
        Check::at_most(
            "remainder_rademacher_cube",
            (rad + 2.0).abs(),
            CANCELLATION_TOL,
        ),
        Check::at_most("remainder_gaussian_cube", gauss.abs(), STEIN_TOL),
        Check::at_most("remainder_uniform_cube", (uni + 1.2).abs(), STEIN_TOL),
    ]
}

/// `Φ(2βh) ≥ (1 − e^{−2βh})/(2βh)` on `points` log-spaced values of `2βh`.
pub fn dls_grid_check(points: usize) -> Result<Check> {
    let mut worst = f64::INFINITY;
    for k in 0..points {
        let t = 10f64.powf(-3.0 + 6.0 * k as f64 / (points.max(2) - 1) as f64);
        worst = worst.min(phi(t)? - dls_lower(t));
    }
    Ok(Check::at_least("phi_above_dls_grid", worst, -DLS_TOL))
}

/// Smallest Falk-Bruch chain margin over `samples` draws at every grid point.
pub fn falk_bruch_grid(
    laws: &[DisorderSpec],
    ns: &[usize],
    betas: &[f64],
    hs: &[f64],
    samples: usize,
    seed: u64,
    workers: Workers,
) -> Result<(Check, usize)> {
    let mut points = Vec::new();
    for law in laws {
        for &n in ns {
            for &beta in betas {
                for &h in hs {
                    points.push((law.clone(), ModelParams::new(n, beta, h, 1.0)?));
                }
            }
        }
    }
    let total = points.len() * samples;
    let margins = map_indexed(total, workers, |k| -> Result<f64> {
        let (law, params) = &points[k / samples];
        let sample = sample_for(law, params.n_sites, derive_seed(seed, k as u64))?;
        let h_op = build_hamiltonian(params, &sample)?;
        let state = make_gibbs(diagonalize(&h_op)?, params.beta)?;
        let a_op = z_string(&[0, 1], params.n_sites)?;
        Ok(falk_bruch_check(&state, &h_op, &a_op, params.beta)?.min_margin())
    });
    let worst = margins
        .into_iter()
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    Ok((
        Check::at_least("falk_bruch_chain_margin", worst, -BOUND_TOL),
        total,
    ))
}

/// Per-pair conditional remainders `|Δ|` against `(3/2)E|γ|³·6β²J²/N`;
/// returns the worst `|Δ| − bound`.
pub fn physical_remainder_check(
    params: &ModelParams,
    spec: &DisorderSpec,
    samples: &[CouplingSample],
    workers: Workers,
) -> Result<(Check, f64)> {
    let n = params.n_sites;
    let jobs: Vec<(usize, (usize, usize))> = (0..samples.len())
        .flat_map(|s| pairs(n).map(move |p| (s, p)))
        .collect();
    let results = map_indexed(jobs.len(), workers, |k| {
        let (s, pair) = jobs[k];
        aip_remainder(params, &samples[s], pair, spec)
    });
    let mut worst_excess = f64::NEG_INFINITY;
    let mut worst_abs: f64 = 0.0;
    for r in results {
        let r = r?;
        worst_excess = worst_excess.max(r.delta_value.abs() - r.bound_value);
        worst_abs = worst_abs.max(r.delta_value.abs());
    }
    Ok((
        Check::at_most("remainder_within_bound", worst_excess, BOUND_TOL),
        worst_abs,
    ))
}

/// Everything the lemma checks need from one ensemble pass.
#[derive(Debug, Clone)]
pub struct LemmaPass {
    pub stats: EnsembleStats,
    /// Coupling samples (with weights) kept for the per-pair remainders.
    pub kept: Vec<CouplingSample>,
    pub max_abs_magnetization: f64,
    /// `min ⟨U⟩ − E_gs` per sample.
    pub min_energy_gap: f64,
    /// Largest `|⟨R²⟩ − 1/N − (1/N²)Σ_{i≠j} zz²|`.
    pub overlap_decomposition: f64,
    pub pair_sq_means: Vec<f64>,
}

pub fn lemma_pass(config: &EnsembleConfig, keep: usize) -> Result<LemmaPass> {
    let n = config.params.n_sites;
    let mut kept = Vec::new();
    let mut max_abs_magnetization: f64 = 0.0;
    let mut min_energy_gap = f64::INFINITY;
    let mut overlap_decomposition: f64 = 0.0;
    let mut pair_sq_means = vec![0.0; crate::model::pair_count(n)];
    let stats = run_ensemble_streaming(config, |r, sample, w| {
        if kept.len() < keep {
            kept.push(sample.clone());
        }
        for m in &r.z_magnetizations {
            max_abs_magnetization = max_abs_magnetization.max(m.abs());
        }
        max_abs_magnetization = max_abs_magnetization.max(r.m_moments.m1.abs());
        min_energy_gap = min_energy_gap.min(r.exchange_energy - r.ground_energy);
        let mut off = 0.0;
        for (k, (i, j)) in pairs(n).enumerate() {
            let z = r.correlators.zz(i, j);
            off += 2.0 * z * z;
            pair_sq_means[k] += w * z * z;
        }
        let nf = n as f64;
        overlap_decomposition =
            overlap_decomposition.max((r.overlap_sq - 1.0 / nf - off / (nf * nf)).abs());
    })?;
    Ok(LemmaPass {
        stats,
        kept,
        max_abs_magnetization,
        min_energy_gap,
        overlap_decomposition,
        pair_sq_means,
    })
}

/// Gauge covariance `zz → ε_iε_j zz` for `count` random sign vectors.
pub fn gauge_covariance_check(
    params: &ModelParams,
    sample: &CouplingSample,
    count: usize,
    seed: u64,
) -> Result<Check> {
    use rand::Rng;
    let n = params.n_sites;
    let base = correlator_matrix(&gibbs_for_sample(params, sample)?, n)?;
    let mut rng = stream(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..count {
        let signs: Vec<i8> = (0..n)
            .map(|_| if rng.random_bool(0.5) { 1 } else { -1 })
            .collect();
        let moved = gauge_transform(sample, &signs)?;
        let corr = correlator_matrix(&gibbs_for_sample(params, &moved)?, n)?;
        for i in 0..n {
            for j in 0..n {
                let expected = (signs[i] * signs[j]) as f64 * base.zz(i, j);
                worst = worst.max((corr.zz(i, j) - expected).abs());
            }
        }
    }
    Ok(Check::at_most("gauge_covariance", worst, GAUGE_TOL))
}

/// The overlap/exchange identity on Gaussian disorder with a tensor Gauss-Hermite rule at `N = 3`.
pub fn gaussian_identity_check(
    beta: f64,
    h: f64,
    j: f64,
    workers: Workers,
) -> Result<(IdentityReport, Check)> {
    let params = ModelParams::new(3, beta, h, j)?;
    let config = EnsembleConfig::new(
        params,
        DisorderSpec::gaussian(),
        0,
        0,
        EnsembleMode::Quadrature {
            nodes: GAUSSIAN_IDENTITY_NODES,
        },
    )
    .with_options(ReportOptions {
        pair_terms: true,
        third_cumulant: false,
    })
    .with_workers(workers);
    let stats = crate::ensemble::run_ensemble(&config)?;
    let identity = assemble_rau_identity(&stats, &params)?;
    let stein = Check::at_most("delta_n_gaussian", identity.delta_n.abs(), RAU_STEIN_TOL);
    Ok((identity, stein))
}

/// `|Δ_N|` allowed under Gaussian quadrature.
pub const RAU_STEIN_TOL: f64 = 1e-6;

fn lemmas_suite(options: &VerifyOptions) -> Result<SuiteReport> {
    let mut report = SuiteReport::new(Suite::Lemmas);
    let seed = options.seed.unwrap_or(3);
    let law = options.law.clone().unwrap_or_else(DisorderSpec::rademacher);
    let mode = options.mode.unwrap_or(if law.is_discrete() {
        EnsembleMode::Enumerate
    } else {
        EnsembleMode::MonteCarlo
    });
    let params = ModelParams::new(
        options.n.unwrap_or(4),
        options.beta.unwrap_or(1.0),
        options.h.unwrap_or(0.4),
        options.j.unwrap_or(1.0),
    )?;
    params.require_pairs()?;
    if !law.theorem_eligible() {
        return Err(Error::UnsupportedLaw(format!(
            "{} is not a centered unit-variance symmetric law",
            law.name()
        )));
    }
    let samples = options.samples.unwrap_or(50);
    let config = EnsembleConfig::new(params, law.clone(), samples, seed, mode)
        .with_options(ReportOptions {
            pair_terms: true,
            third_cumulant: true,
        })
        .with_workers(options.workers);
    let keep = if mode.is_exact() {
        usize::MAX
    } else {
        REMAINDER_SAMPLES
    };
    let pass = lemma_pass(&config, keep)?;
    let stats = &pass.stats;
    let n = params.n_sites as f64;

    // Integration by parts remainders.
    report.checks.extend(synthetic_remainder_checks());
    let (rem, worst_abs) = physical_remainder_check(&params, &law, &pass.kept, options.workers)?;
    report.checks.push(rem);
    report.note("max_abs_conditional_remainder", worst_abs);
    let c3 = stats.third_cumulant_max.unwrap_or(0.0);
    report.checks.push(Check::at_most(
        "third_cumulant_abs",
        c3,
        C3_BOUND + C3_SLACK,
    ));
    report.checks.push(Check::at_least(
        "third_cumulant_stencil_consistent",
        f64::from(u8::from(
            stats.third_cumulant_all_consistent.unwrap_or(true),
        )),
        1.0,
    ));

    // Overlap/exchange identity.
    let identity = assemble_rau_identity(stats, &params)?;
    report.checks.push(Check::identity(&identity));
    report.note("delta_n", identity.delta_n);
    report.identities.push(identity);
    if params.j_coupling > 0.0 {
        let (gauss, stein) =
            gaussian_identity_check(params.beta, params.h, params.j_coupling, options.workers)?;
        report.checks.push(Check::at_most(
            "overlap_identity_gaussian_quadrature",
            gauss.residual.abs(),
            gauss.tolerance,
        ));
        report.checks.push(stein);
        report.identities.push(gauss);
    }

    // Falk-Bruch chain.
    report.checks.push(Check::at_least(
        "falk_bruch_ensemble_margin",
        stats.fb_chain_margin.min,
        -BOUND_TOL,
    ));
    report.checks.push(dls_grid_check(100)?);
    let (grid, _) = falk_bruch_grid(
        &[
            DisorderSpec::gaussian(),
            DisorderSpec::rademacher(),
            DisorderSpec::uniform(),
        ],
        &[2, 4, 6, 8],
        &[1.0, 5.0, 20.0],
        &[0.05, 0.3, 1.0],
        options.samples.map_or(3, |s| s.min(100)),
        seed,
        options.workers,
    )?;
    report.checks.push(grid);

    // Exchange energy above the classical ground state.
    report.checks.push(Check::at_least(
        "exchange_above_ground_state",
        pass.min_energy_gap,
        -BOUND_TOL,
    ));
    report.note("ground_state_density_mean", stats.gs_density.mean);

    // Z2 and gauge symmetry.
    report.checks.push(Check::at_most(
        "magnetization_zero",
        pass.max_abs_magnetization,
        SYMMETRY_TOL,
    ));
    report.checks.push(Check::at_most(
        "overlap_decomposition",
        pass.overlap_decomposition,
        SYMMETRY_TOL,
    ));
    if mode.is_exact() {
        report.checks.push(Check::at_most(
            "mean_zz_cancels",
            stats.zz01.mean.abs(),
            CANCELLATION_TOL,
        ));
        if let Some(fp) = stats.four_point {
            report.checks.push(Check::at_most(
                "mean_four_point_cancels",
                fp.mean.abs(),
                CANCELLATION_TOL,
            ));
        }
        report.checks.push(Check::at_most(
            "mean_m2",
            (stats.m2.mean - 1.0 / n).abs(),
            EXACT_MOMENT_TOL,
        ));
        report.checks.push(Check::at_most(
            "mean_m4",
            (stats.m4.mean - (3.0 * n - 2.0) / n.powi(3)).abs(),
            EXACT_MOMENT_TOL,
        ));
        let sq = stats.zz01_sq.mean;
        let spread = pass
            .pair_sq_means
            .iter()
            .map(|m| (m - sq).abs())
            .fold(0.0, f64::max);
        report.checks.push(Check::at_most(
            "pair_permutation_symmetry",
            spread,
            EXACT_MOMENT_TOL,
        ));
        report.checks.push(Check::at_most(
            "overlap_from_pair_correlation",
            (stats.overlap_sq.mean - 1.0 / n - (n - 1.0) / n * sq).abs(),
            EXACT_MOMENT_TOL,
        ));
    }
    let probe = sample_for(&law, params.n_sites, derive_seed(seed, u64::MAX))?;
    report.checks.push(gauge_covariance_check(
        &params,
        &probe,
        20,
        derive_seed(seed, u64::MAX - 1),
    )?);
    Ok(report)
}

// ---- theorem ----

#[derive(Debug, Clone)]
pub struct TheoremRun {
    pub stats: EnsembleStats,
    pub bound: TheoremReport,
}

pub fn theorem_run(config: &EnsembleConfig) -> Result<TheoremRun> {
    if !config.spec.theorem_eligible() {
        return Err(Error::UnsupportedLaw(format!(
            "{} is not a centered unit-variance symmetric law",
            config.spec.name()
        )));
    }
    let stats = crate::ensemble::run_ensemble(config)?;
    let bound = theorem_bound(&config.params, &stats, stats.gs_density.mean)?;
    Ok(TheoremRun { stats, bound })
}

fn theorem_suite(options: &VerifyOptions) -> Result<SuiteReport> {
    let mut report = SuiteReport::new(Suite::Theorem);
    let params = ModelParams::new(
        options.n.unwrap_or(8),
        options.beta.unwrap_or(20.0),
        options.h.unwrap_or(0.05),
        options.j.unwrap_or(1.0),
    )?;
    let config = EnsembleConfig::new(
        params,
        options.law.clone().unwrap_or_else(DisorderSpec::gaussian),
        options.samples.unwrap_or(200),
        options.seed.unwrap_or(4),
        options.mode.unwrap_or(EnsembleMode::MonteCarlo),
    )
    .with_workers(options.workers);
    let run = theorem_run(&config)?;
    let s = &run.stats;
    report.checks.push(Check::at_least(
        "overlap_variance_floor",
        s.overlap_variance,
        THEOREM_FLOOR,
    ));
    report.checks.push(Check::at_most(
        "overlap_first_moment",
        s.overlap_first.mean.abs(),
        FIRST_MOMENT_TOL,
    ));
    report.checks.push(Check::bound(&run.bound.finite));
    report.note("overlap_sq_mean", s.overlap_sq.mean);
    report.note("overlap_sq_std_error", s.overlap_sq.std_error);
    report.note("overlap_variance", s.overlap_variance);
    report.note("finite_rhs", run.bound.finite.rhs);
    report.note("finite_margin", run.bound.finite.margin);
    report.note("delta_bound", run.bound.delta_bound);
    report.note("asymptotic_rhs", run.bound.asymptotic.rhs);
    report.note("asymptotic_margin", run.bound.asymptotic.margin);
    report.note("ground_state_density_mean", s.gs_density.mean);
    report.bounds.push(run.bound.finite.clone());
    report.bounds.push(run.bound.asymptotic.clone());
    Ok(report)
}

/// Mean brute-force ground-state energy density over `samples` draws.
pub fn ground_state_density(
    spec: &DisorderSpec,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let mut acc = Vec::with_capacity(samples);
    for k in 0..samples {
        let sample = sample_for(spec, n, derive_seed(seed, k as u64))?;
        acc.push(classical_ground_state(&sample)?.energy / n as f64);
    }
    let mean = acc.iter().sum::<f64>() / samples as f64;
    let var = acc.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (samples.max(2) - 1) as f64;
    Ok((mean, (var / samples as f64).sqrt()))
}
