//! Disorder averaging.
//!
//! Four ways to build the disorder expectation `E`:
//!
//! * `monte_carlo`: independent draws, sample `k` seeded by
//!   [`derive_seed`]`(master_seed, k)`;
//! * `enumerate`: every assignment of a discrete law with its exact
//!   probability;
//! * `quadrature`: tensor-product Gauss rule in every coupling (continuous
//!   laws, small `N`);
//! * `gauge_paired`: Monte Carlo draws whose odd correlators are replaced by
//!   their exact gauge-orbit averages.
//!
//! Samples are evaluated in parallel in fixed-size chunks and folded in index
//! order, so results do not depend on the worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::model::{pair_count, sample_couplings, CouplingSample, DisorderSpec, ModelParams};
use crate::observables::{
    sample_report, CorrelatorMatrix, Provenance, ReportOptions, SampleReport,
};
use crate::par::{map_indexed, Workers};
use crate::quadrature::Rule;

/// Largest number of coupling assignments an exact mode will visit.
pub const MAX_ASSIGNMENTS: u64 = 1 << 24;

/// Tolerance on the overlap identity under exact enumeration.
pub const RAU_ENUMERATE_TOL: f64 = 1e-8;
/// Tolerance on the overlap identity under tensor quadrature.
pub const RAU_QUADRATURE_TOL: f64 = 1e-6;
/// Standard errors allowed for the overlap identity under sampling.
pub const RAU_SIGMAS: f64 = 3.0;

const CHUNK: usize = 1024;
const GRID_TAG: u64 = 0x6772_6964_706f_696e;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleMode {
    MonteCarlo,
    Enumerate,
    GaugePaired,
    Quadrature { nodes: usize },
}

/// Gauss nodes per coupling when `quadrature` is named without a count.
pub const DEFAULT_QUADRATURE_NODES: usize = 16;

impl std::str::FromStr for EnsembleMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "monte_carlo" => Ok(EnsembleMode::MonteCarlo),
            "enumerate" => Ok(EnsembleMode::Enumerate),
            "gauge_paired" => Ok(EnsembleMode::GaugePaired),
            "quadrature" => Ok(EnsembleMode::Quadrature {
                nodes: DEFAULT_QUADRATURE_NODES,
            }),
            other => Err(Error::InvalidParameter(format!(
                "unknown mode '{other}' (monte_carlo, enumerate, gauge_paired, quadrature)"
            ))),
        }
    }
}

impl EnsembleMode {
    pub fn name(&self) -> &'static str {
        match self {
            EnsembleMode::MonteCarlo => "monte_carlo",
            EnsembleMode::Enumerate => "enumerate",
            EnsembleMode::GaugePaired => "gauge_paired",
            EnsembleMode::Quadrature { .. } => "quadrature",
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(
            self,
            EnsembleMode::Enumerate | EnsembleMode::Quadrature { .. }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub params: ModelParams,
    pub spec: DisorderSpec,
    pub n_samples: usize,
    pub master_seed: u64,
    pub mode: EnsembleMode,
    pub options: ReportOptions,
    /// Scheduling only; never changes results.
    #[serde(skip)]
    pub workers: Workers,
}

impl EnsembleConfig {
    pub fn new(
        params: ModelParams,
        spec: DisorderSpec,
        n_samples: usize,
        master_seed: u64,
        mode: EnsembleMode,
    ) -> Self {
        EnsembleConfig {
            params,
            spec,
            n_samples,
            master_seed,
            mode,
            options: ReportOptions::default(),
            workers: Workers::default(),
        }
    }

    pub fn with_options(mut self, options: ReportOptions) -> Self {
        self.options = options;
        self
    }

    pub fn with_workers(mut self, workers: Workers) -> Self {
        self.workers = workers;
        self
    }
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of stream `index` under `master`: `mix(mix(master) ^ index)`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    mix(mix(master) ^ index)
}

/// Master seed of grid point `index` in a sweep.
pub fn derive_point_seed(master: u64, index: u64) -> u64 {
    derive_seed(master ^ GRID_TAG, index)
}

pub fn stream(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservableStats {
    pub mean: f64,
    pub variance: f64,
    pub std_error: f64,
    pub n: usize,
    pub min: f64,
    pub max: f64,
}

/// Weighted streaming mean and variance (West's update of Welford's method).
#[derive(Debug, Clone, Copy)]
struct Accumulator {
    weight: f64,
    mean: f64,
    m2: f64,
    n: usize,
    min: f64,
    max: f64,
}

impl Default for Accumulator {
    fn default() -> Self {
        Accumulator {
            weight: 0.0,
            mean: 0.0,
            m2: 0.0,
            n: 0,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        }
    }
}

impl Accumulator {
    fn push(&mut self, x: f64, w: f64) {
        self.n += 1;
        self.min = self.min.min(x);
        self.max = self.max.max(x);
        if w == 0.0 {
            return;
        }
        self.weight += w;
        let delta = x - self.mean;
        self.mean += w / self.weight * delta;
        self.m2 += w * delta * (x - self.mean);
    }

    fn finish(&self, exact: bool) -> ObservableStats {
        let population = if self.weight > 0.0 {
            (self.m2 / self.weight).max(0.0)
        } else {
            0.0
        };
        let (variance, std_error) = if exact {
            (population, 0.0)
        } else if self.n > 1 {
            let v = population * self.n as f64 / (self.n as f64 - 1.0);
            (v, (v / self.n as f64).sqrt())
        } else {
            (0.0, 0.0)
        };
        ObservableStats {
            mean: self.mean,
            variance,
            std_error,
            n: self.n,
            min: self.min,
            max: self.max,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub version: String,
    pub mode: EnsembleMode,
    pub law: String,
    pub params: ModelParams,
    pub master_seed: u64,
    pub samples: usize,
    pub third_abs_moment: f64,

    pub overlap_sq: ObservableStats,
    pub overlap_first: ObservableStats,
    pub exchange_energy: ObservableStats,
    pub exchange_density: ObservableStats,
    pub m1: ObservableStats,
    pub m2: ObservableStats,
    pub m4: ObservableStats,
    pub zz01: ObservableStats,
    pub zz01_sq: ObservableStats,
    pub four_point: Option<ObservableStats>,
    pub x_mean: ObservableStats,
    pub duhamel_aa: ObservableStats,
    pub connected_aa: ObservableStats,
    pub fb_lower: ObservableStats,
    pub fb_margin: ObservableStats,
    pub fb_chain_margin: ObservableStats,
    pub gs_energy: ObservableStats,
    pub gs_density: ObservableStats,
    pub remainder_sum: Option<ObservableStats>,
    pub rau_residual: Option<ObservableStats>,
    pub third_cumulant_abs: Option<ObservableStats>,

    /// `E⟨R₁₂²⟩ − (E⟨R₁₂⟩)²`.
    pub overlap_variance: f64,
    /// `Δ_N = −N^{−3/2} Σ_{i<j} Δ(⟨σ_iσ_j⟩)` when pair terms were computed.
    pub delta_n: Option<f64>,
    pub fb_margin_min: f64,
    /// All Falk-Bruch chain links satisfied on every sample.
    pub fb_all_satisfied: bool,
    pub third_cumulant_max: Option<f64>,
    pub third_cumulant_all_consistent: Option<bool>,
}

impl EnsembleStats {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("stats serialize")
    }
}

#[derive(Default)]
struct Accumulators {
    overlap_sq: Accumulator,
    overlap_first: Accumulator,
    exchange_energy: Accumulator,
    exchange_density: Accumulator,
    m1: Accumulator,
    m2: Accumulator,
    m4: Accumulator,
    zz01: Accumulator,
    zz01_sq: Accumulator,
    four_point: Option<Accumulator>,
    x_mean: Accumulator,
    duhamel_aa: Accumulator,
    connected_aa: Accumulator,
    fb_lower: Accumulator,
    fb_margin: Accumulator,
    fb_chain_margin: Accumulator,
    gs_energy: Accumulator,
    gs_density: Accumulator,
    remainder_sum: Option<Accumulator>,
    rau_residual: Option<Accumulator>,
    third_cumulant_abs: Option<Accumulator>,
    fb_all_satisfied: bool,
    c3_consistent: bool,
}

fn push_opt(acc: &mut Option<Accumulator>, value: Option<f64>, w: f64) {
    if let Some(v) = value {
        acc.get_or_insert_with(Accumulator::default).push(v, w);
    }
}

/// Per-sample estimator of `lhs − rhs` in the overlap identity.
fn rau_residual_of(r: &SampleReport) -> Option<f64> {
    let p = &r.params;
    let remainder = r.remainder_sum?;
    if p.j_coupling <= 0.0 {
        return None;
    }
    let n = p.n_sites as f64;
    let bj = p.beta * p.j_coupling;
    let delta = -remainder / n.powf(1.5);
    let rhs = (n - 1.0) / n * r.duhamel_aa + 2.0 / (bj * n) * r.exchange_energy - 2.0 / bj * delta
        + 1.0 / n;
    Some(r.overlap_sq - rhs)
}

impl Accumulators {
    fn new() -> Self {
        Accumulators {
            fb_all_satisfied: true,
            c3_consistent: true,
            ..Default::default()
        }
    }

    fn push(&mut self, r: &SampleReport, w: f64) {
        let n = r.params.n_sites as f64;
        self.overlap_sq.push(r.overlap_sq, w);
        self.overlap_first.push(r.overlap_first, w);
        self.exchange_energy.push(r.exchange_energy, w);
        self.exchange_density.push(r.exchange_energy / n, w);
        self.m1.push(r.m_moments.m1, w);
        self.m2.push(r.m_moments.m2, w);
        self.m4.push(r.m_moments.m4, w);
        self.zz01.push(r.zz01(), w);
        self.zz01_sq.push(r.zz01().powi(2), w);
        push_opt(&mut self.four_point, r.four_point, w);
        self.x_mean
            .push(r.correlators.x_field.iter().sum::<f64>() / n, w);
        self.duhamel_aa.push(r.duhamel_aa, w);
        self.connected_aa.push(r.duhamel_aa - r.zz01().powi(2), w);
        self.fb_lower.push(r.fb_lower, w);
        self.fb_margin.push(r.falk_bruch.exact.margin, w);
        self.fb_chain_margin.push(r.falk_bruch.min_margin(), w);
        self.fb_all_satisfied &= r.falk_bruch.all_satisfied();
        self.gs_energy.push(r.ground_energy, w);
        self.gs_density.push(r.ground_energy / n, w);
        push_opt(&mut self.remainder_sum, r.remainder_sum, w);
        push_opt(&mut self.rau_residual, rau_residual_of(r), w);
        if let Some(c3) = r.third_cumulant {
            push_opt(&mut self.third_cumulant_abs, Some(c3.value.abs()), w);
            self.c3_consistent &= c3.consistent;
        }
    }

    fn finish(self, config: &EnsembleConfig) -> EnsembleStats {
        let exact = config.mode.is_exact();
        let f = |a: &Accumulator| a.finish(exact);
        let n = config.params.n_sites as f64;
        let overlap_sq = f(&self.overlap_sq);
        let overlap_first = f(&self.overlap_first);
        let remainder_sum = self.remainder_sum.as_ref().map(f);
        let third = self.third_cumulant_abs.as_ref().map(f);
        EnsembleStats {
            version: crate::VERSION.to_string(),
            mode: config.mode,
            law: config.spec.name().to_string(),
            params: config.params,
            master_seed: config.master_seed,
            samples: overlap_sq.n,
            third_abs_moment: config.spec.third_abs_moment,
            overlap_variance: overlap_sq.mean - overlap_first.mean.powi(2),
            delta_n: remainder_sum.map(|r| -r.mean / n.powf(1.5)),
            fb_margin_min: self.fb_margin.min,
            fb_all_satisfied: self.fb_all_satisfied,
            third_cumulant_max: third.map(|t| t.max),
            third_cumulant_all_consistent: third.map(|_| self.c3_consistent),
            overlap_sq,
            overlap_first,
            exchange_energy: f(&self.exchange_energy),
            exchange_density: f(&self.exchange_density),
            m1: f(&self.m1),
            m2: f(&self.m2),
            m4: f(&self.m4),
            zz01: f(&self.zz01),
            zz01_sq: f(&self.zz01_sq),
            four_point: self.four_point.as_ref().map(f),
            x_mean: f(&self.x_mean),
            duhamel_aa: f(&self.duhamel_aa),
            connected_aa: f(&self.connected_aa),
            fb_lower: f(&self.fb_lower),
            fb_margin: f(&self.fb_margin),
            fb_chain_margin: f(&self.fb_chain_margin),
            gs_energy: f(&self.gs_energy),
            gs_density: f(&self.gs_density),
            remainder_sum,
            rau_residual: self.rau_residual.as_ref().map(f),
            third_cumulant_abs: third,
        }
    }
}

/// How sample `k` is produced.
enum SampleSource {
    Random,
    Grid(Rule),
}

struct Plan {
    source: SampleSource,
    count: usize,
    pairs: usize,
}

fn plan(config: &EnsembleConfig) -> Result<Plan> {
    config.params.validate()?;
    config.params.require_pairs()?;
    let pairs = pair_count(config.params.n_sites);
    let grid = |rule: Rule| -> Result<Plan> {
        let total = (rule.len() as f64).powi(pairs as i32);
        if total > MAX_ASSIGNMENTS as f64 {
            return Err(Error::ResourceCap(format!(
                "{}^{} coupling assignments exceed the cap of {}",
                rule.len(),
                pairs,
                MAX_ASSIGNMENTS
            )));
        }
        Ok(Plan {
            count: total as usize,
            source: SampleSource::Grid(rule),
            pairs,
        })
    };
    match config.mode {
        EnsembleMode::MonteCarlo | EnsembleMode::GaugePaired => {
            if config.n_samples == 0 {
                return Err(Error::InvalidParameter("n_samples >= 1 required".into()));
            }
            if config.mode == EnsembleMode::GaugePaired && !config.spec.theorem_eligible() {
                return Err(Error::UnsupportedLaw(
                    "gauge pairing needs a symmetric centered law".into(),
                ));
            }
            Ok(Plan {
                source: SampleSource::Random,
                count: config.n_samples,
                pairs,
            })
        }
        EnsembleMode::Enumerate => {
            let rule = config.spec.support().ok_or_else(|| {
                Error::UnsupportedLaw(format!(
                    "enumerate mode needs a discrete law, got {}",
                    config.spec.name()
                ))
            })?;
            grid(rule)
        }
        EnsembleMode::Quadrature { nodes } => {
            if nodes == 0 {
                return Err(Error::InvalidParameter(
                    "quadrature needs nodes >= 1".into(),
                ));
            }
            grid(config.spec.quadrature(nodes))
        }
    }
}

/// Validates `config` and returns how many samples it will evaluate, without
/// evaluating any.
pub fn planned_samples(config: &EnsembleConfig) -> Result<usize> {
    Ok(plan(config)?.count)
}

/// Coupling assignment `k` of a tensor grid (mixed radix, first pair fastest).
fn grid_sample(
    rule: &Rule,
    pairs: usize,
    n_sites: usize,
    mut k: usize,
) -> Result<(CouplingSample, f64)> {
    let q = rule.len();
    let mut gamma = Vec::with_capacity(pairs);
    let mut weight = 1.0;
    for _ in 0..pairs {
        let digit = k % q;
        k /= q;
        gamma.push(rule.nodes[digit]);
        weight *= rule.weights[digit];
    }
    Ok((CouplingSample::new(n_sites, gamma)?, weight))
}

fn evaluate(
    config: &EnsembleConfig,
    plan: &Plan,
    k: usize,
) -> Result<(SampleReport, CouplingSample, f64)> {
    let n = config.params.n_sites;
    let (sample, weight, seed) = match &plan.source {
        SampleSource::Random => {
            let seed = derive_seed(config.master_seed, k as u64);
            let sample = sample_couplings(&config.spec, n, &mut stream(seed))?;
            (sample, 1.0 / plan.count as f64, seed)
        }
        SampleSource::Grid(rule) => {
            let (sample, w) = grid_sample(rule, plan.pairs, n, k)?;
            (sample, w, k as u64)
        }
    };
    let provenance = Provenance::new(&config.spec, config.master_seed, k as u64, seed, &sample);
    let mut report = sample_report(&config.params, &sample, config.options, provenance)?;
    if config.mode == EnsembleMode::GaugePaired {
        apply_gauge_average(&mut report)?;
    }
    Ok((report, sample, weight))
}

/// Runs the ensemble, handing every report with its couplings and weight to
/// `sink` in index order.
pub fn run_ensemble_streaming(
    config: &EnsembleConfig,
    mut sink: impl FnMut(&SampleReport, &CouplingSample, f64),
) -> Result<EnsembleStats> {
    let plan = plan(config)?;
    let mut acc = Accumulators::new();
    let mut start = 0;
    while start < plan.count {
        let len = CHUNK.min(plan.count - start);
        let chunk = map_indexed(len, config.workers, |off| {
            evaluate(config, &plan, start + off)
        });
        for item in chunk {
            let (report, sample, w) = item?;
            sink(&report, &sample, w);
            acc.push(&report, w);
        }
        start += len;
    }
    Ok(acc.finish(config))
}

pub fn run_ensemble(config: &EnsembleConfig) -> Result<EnsembleStats> {
    run_ensemble_streaming(config, |_, _, _| {})
}

/// Ensemble statistics together with every sample report and its weight.
pub fn run_ensemble_with_reports(
    config: &EnsembleConfig,
) -> Result<(EnsembleStats, Vec<(SampleReport, f64)>)> {
    let mut reports = Vec::new();
    let stats = run_ensemble_streaming(config, |r, _, w| reports.push((r.clone(), w)))?;
    Ok((stats, reports))
}

/// Gauge-orbit average of the correlators: off-diagonal `zz` vanish, the
/// diagonal and the transverse field are invariant.
pub fn gauge_average_correlators(corr: &CorrelatorMatrix) -> CorrelatorMatrix {
    CorrelatorMatrix::uncorrelated(corr.n_sites, corr.x_field.clone())
}

pub fn gauge_average_two_point(report: &SampleReport) -> Result<CorrelatorMatrix> {
    if !report.provenance.symmetric {
        return Err(Error::UnsupportedLaw(format!(
            "gauge averaging needs a symmetric law, sample came from {}",
            report.provenance.law
        )));
    }
    Ok(gauge_average_correlators(&report.correlators))
}

/// Replace gauge-odd observables by their orbit averages. `⟨R₁₂²⟩`, the
/// Duhamel function and the energies are gauge invariant and stay.
fn apply_gauge_average(report: &mut SampleReport) -> Result<()> {
    let n = report.params.n_sites as f64;
    report.correlators = gauge_average_two_point(report)?;
    report.m_moments.m2 = 1.0 / n;
    report.m_moments.m4 = (3.0 * n - 2.0) / n.powi(3);
    if report.four_point.is_some() {
        report.four_point = Some(0.0);
    }
    Ok(())
}

/// Check of an identity `lhs = rhs` at a tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub std_error: f64,
    pub tolerance: f64,
    pub satisfied: bool,
    pub delta_n: f64,
}

impl IdentityReport {
    pub fn to_json_line(&self) -> String {
        json!({
            "kind": "identity",
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "residual": self.residual,
            "std_error": self.std_error,
            "tolerance": self.tolerance,
            "satisfied": self.satisfied,
            "delta_n": self.delta_n,
        })
        .to_string()
    }
}

/// `E⟨R₁₂²⟩ = ((N−1)/N) E(A,A) + (2/βJN) E⟨U⟩ − (2/βJ) Δ_N + 1/N`.
pub fn assemble_rau_identity(
    stats: &EnsembleStats,
    params: &ModelParams,
) -> Result<IdentityReport> {
    if stats.params != *params {
        return Err(Error::Mismatch(
            "statistics belong to different parameters".into(),
        ));
    }
    let (delta_n, residual_stats) = match (stats.delta_n, stats.rau_residual) {
        (Some(d), Some(r)) => (d, r),
        _ => {
            return Err(Error::Mismatch(
                "pair remainder terms missing; rerun with pair terms enabled".into(),
            ))
        }
    };
    let n_set = [
        stats.duhamel_aa.n,
        stats.exchange_energy.n,
        residual_stats.n,
    ];
    if n_set.iter().any(|&k| k != stats.overlap_sq.n) {
        return Err(Error::Mismatch(
            "ingredients come from different sample sets".into(),
        ));
    }
    if params.j_coupling <= 0.0 {
        return Err(Error::InvalidParameter("J > 0 required".into()));
    }
    let n = params.n_sites as f64;
    let bj = params.beta * params.j_coupling;
    let lhs = stats.overlap_sq.mean;
    let rhs = (n - 1.0) / n * stats.duhamel_aa.mean + 2.0 / (bj * n) * stats.exchange_energy.mean
        - 2.0 / bj * delta_n
        + 1.0 / n;
    let residual = lhs - rhs;
    let tolerance = match stats.mode {
        EnsembleMode::Enumerate => RAU_ENUMERATE_TOL,
        EnsembleMode::Quadrature { .. } => RAU_QUADRATURE_TOL,
        _ => RAU_SIGMAS * residual_stats.std_error,
    };
    Ok(IdentityReport {
        name: "overlap_identity".into(),
        lhs,
        rhs,
        residual,
        std_error: residual_stats.std_error,
        tolerance,
        satisfied: residual.abs() <= tolerance,
        delta_n,
    })
}

/// One grid point of a sweep; failures are kept per point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub index: usize,
    pub params: ModelParams,
    pub master_seed: u64,
    pub stats: Option<EnsembleStats>,
    pub error: Option<String>,
}

/// Configs for a `(β, h)` grid, β outermost, with per-point seeds derived
/// from the base config's master seed.
pub fn grid_configs(
    base: &EnsembleConfig,
    betas: &[f64],
    hs: &[f64],
) -> Result<Vec<EnsembleConfig>> {
    let mut out = Vec::with_capacity(betas.len() * hs.len());
    for &beta in betas {
        for &h in hs {
            let mut c = base.clone();
            c.params.beta = beta;
            c.params.h = h;
            c.master_seed = derive_point_seed(base.master_seed, out.len() as u64);
            out.push(c);
        }
    }
    Ok(out)
}

pub fn sweep(configs: &[EnsembleConfig]) -> Result<Vec<SweepRecord>> {
    if configs.is_empty() {
        return Err(Error::InvalidParameter("sweep grid is empty".into()));
    }
    Ok(configs
        .iter()
        .enumerate()
        .map(|(index, c)| {
            let (stats, error) = match run_ensemble(c) {
                Ok(s) => (Some(s), None),
                Err(e) => (None, Some(e.to_string())),
            };
            SweepRecord {
                index,
                params: c.params,
                master_seed: c.master_seed,
                stats,
                error,
            }
        })
        .collect())
}

pub const SWEEP_CSV_HEADER: &str =
    "beta,h,j,n,samples,overlap_sq_mean,overlap_sq_se,overlap_var,exchange_density_mean,fb_margin_min,rau_residual";

/// Shortest round-trip decimal, switching to exponent form for very small
/// or large magnitudes.
pub fn format_number(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// CSV table: `#`-prefixed comment lines, then the header, then one row per
/// record. Failed points keep their parameters and leave the rest empty.
pub fn sweep_csv(records: &[SweepRecord], comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        for line in c.lines() {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
    }
    out.push_str(SWEEP_CSV_HEADER);
    out.push('\n');
    for r in records {
        let p = &r.params;
        let mut fields = vec![
            format_number(p.beta),
            format_number(p.h),
            format_number(p.j_coupling),
            p.n_sites.to_string(),
        ];
        match &r.stats {
            Some(s) => {
                let rau = s
                    .rau_residual
                    .map(|r| format_number(r.mean))
                    .unwrap_or_default();
                fields.extend([
                    s.samples.to_string(),
                    format_number(s.overlap_sq.mean),
                    format_number(s.overlap_sq.std_error),
                    format_number(s.overlap_variance),
                    format_number(s.exchange_density.mean),
                    format_number(s.fb_margin_min),
                    rau,
                ]);
            }
            None => fields.extend(std::iter::repeat_n(String::new(), 7)),
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}
