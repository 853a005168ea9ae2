//! Inequalities of the overlap lower-bound chain.
//!
//! * `Φ`, defined implicitly by `Φ(r tanh r) = tanh r / r`, and its
//!   elementary lower bound `(1 − e^{−t})/t`;
//! * the Falk-Bruch bound `(A, A) ≥ ⟨A²⟩ Φ(β⟨[A,[H,A]]⟩ / 4⟨A²⟩)` and the
//!   two weakenings used for `A = σ_1^z σ_2^z`;
//! * the approximate integration-by-parts remainder
//!   `Δ(f) = E γf(γ) − E f'(γ)`, `|Δ(f)| ≤ (3/2) E|γ|³ sup|f''|`;
//! * exhaustive classical ground states;
//! * the assembled finite-N and asymptotic lower bounds on `E⟨R₁₂²⟩`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::ensemble::EnsembleStats;
use crate::error::{Error, Result};
use crate::hilbert::{z_string, Operator};
use crate::model::{pair_count, pair_index, pairs, CouplingSample, DisorderSpec, ModelParams};
use crate::par::{map_indexed, Workers};
use crate::spectral::{
    connected_duhamel2, duhamel2, expectation_real, gibbs_for_sample, GibbsState,
};

/// Slack below which a bound still counts as satisfied.
pub const BOUND_TOL: f64 = 1e-9;

/// Ground-state energy density of the classical SK model, used as a constant.
pub const KAPPA: f64 = 0.763;

/// Certified bound on `|(A; A; A)|` for `A² = 1`.
pub const C3_BOUND: f64 = 6.0;

/// Default enumeration cap for [`classical_ground_state`].
pub const GROUND_STATE_CAP: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub satisfied: bool,
    pub context: BTreeMap<String, f64>,
}

impl BoundReport {
    /// Report for the claim `lhs ≥ rhs`.
    pub fn new(name: &str, lhs: f64, rhs: f64, context: &[(&str, f64)]) -> Self {
        let margin = lhs - rhs;
        BoundReport {
            name: name.to_string(),
            lhs,
            rhs,
            margin,
            satisfied: margin >= -BOUND_TOL,
            context: context.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }

    pub fn to_json_line(&self) -> String {
        json!({
            "kind": "bound",
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "satisfied": self.satisfied,
            "context": self.context,
        })
        .to_string()
    }
}

/// Root `r ≥ 0` of `r tanh r = t`.
pub fn phi_root(t: f64) -> Result<f64> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::InvalidParameter(format!("Φ needs t >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let g = |r: f64| r * r.tanh() - t;
    let mut lo = 0.0;
    // r tanh r ≥ r − 1/e past r = 1, so t + 1 always brackets
    let mut hi = 2f64.max(t.sqrt() + 1.0).max(t + 1.0);
    let mut r = if t < 1.0 { t.sqrt() } else { t };
    r = r.clamp(lo, hi);
    for _ in 0..200 {
        let val = g(r);
        if val == 0.0 {
            return Ok(r);
        }
        if val > 0.0 {
            hi = r;
        } else {
            lo = r;
        }
        let th = r.tanh();
        let slope = th + r * (1.0 - th * th);
        let mut next = if slope > 0.0 {
            r - val / slope
        } else {
            f64::NAN
        };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - r).abs() <= 1e-16 * r.max(1e-300) || hi - lo <= 1e-16 * hi {
            return Ok(next);
        }
        r = next;
    }
    Ok(r)
}

/// `Φ(t)` with `Φ(r tanh r) = tanh r / r`, `Φ(0) = 1`.
pub fn phi(t: f64) -> Result<f64> {
    let r = phi_root(t)?;
    if r < 1e-4 {
        let r2 = r * r;
        return Ok(1.0 - r2 / 3.0 + 2.0 * r2 * r2 / 15.0);
    }
    Ok(r.tanh() / r)
}

/// `(1 − e^{−t})/t`, equal to 1 at `t = 0`.
pub fn dls_lower(t: f64) -> f64 {
    if t == 0.0 {
        1.0
    } else {
        -(-t).exp_m1() / t
    }
}

/// `[A, [H, A]]`.
pub fn double_commutator(h_op: &Operator, a_op: &Operator) -> Result<Operator> {
    let inner = h_op.commutator(a_op)?;
    a_op.commutator(&inner)
}

/// Falk-Bruch bound and its weakenings, all with `lhs = (A, A)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FalkBruchChain {
    /// `⟨A²⟩ Φ(β⟨[A,[H,A]]⟩ / 4⟨A²⟩)`.
    pub exact: BoundReport,
    /// `Φ(βh⟨σ_1^x + σ_2^x⟩)`.
    pub transverse: BoundReport,
    /// `Φ(2βh)`.
    pub constant: BoundReport,
    /// `(1 − e^{−2βh})/(2βh)`.
    pub elementary: BoundReport,
    pub a_squared: f64,
    pub double_commutator: f64,
}

impl FalkBruchChain {
    pub fn links(&self) -> [&BoundReport; 4] {
        [
            &self.exact,
            &self.transverse,
            &self.constant,
            &self.elementary,
        ]
    }

    pub fn all_satisfied(&self) -> bool {
        self.links().iter().all(|l| l.satisfied)
    }

    /// Smallest margin over the chain.
    pub fn min_margin(&self) -> f64 {
        self.links()
            .iter()
            .map(|l| l.margin)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Falk-Bruch chain for `A` in the Gibbs state of `H`.
///
/// The transverse and constant links are specific to `A = σ_1^z σ_2^z` and
/// `H` of the model form, where `[A, [H, A]] = 4h(σ_1^x + σ_2^x)`; `h` is
/// read from `H` as minus its `⟨0|H|1⟩` element.
pub fn falk_bruch_check(
    state: &GibbsState,
    h_op: &Operator,
    a_op: &Operator,
    beta: f64,
) -> Result<FalkBruchChain> {
    let lhs = duhamel2(state, a_op, a_op)?;
    let a_squared = expectation_real(state, &a_op.product(a_op)?)?;
    if a_squared.is_nan() || a_squared <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "⟨A²⟩ = {a_squared} must be positive"
        )));
    }
    let comm = double_commutator(h_op, a_op)?;
    let dc = expectation_real(state, &comm)?;
    let h = if h_op.dim() >= 2 {
        0.0 - h_op.matrix()[(0, 1)].re
    } else {
        0.0
    };
    let x_sum = if h_op.n_sites() >= 2 {
        state.flip_expectation(0b01) + state.flip_expectation(0b10)
    } else {
        state.flip_expectation(0b01)
    };
    let ctx = [
        ("beta", beta),
        ("h", h),
        ("a_squared", a_squared),
        ("double_commutator", dc),
    ];
    let exact = BoundReport::new(
        "falk_bruch",
        lhs,
        a_squared * phi((beta * dc / (4.0 * a_squared)).max(0.0))?,
        &ctx,
    );
    let transverse = BoundReport::new(
        "falk_bruch_transverse",
        lhs,
        phi((beta * h * x_sum).max(0.0))?,
        &[("beta", beta), ("h", h), ("x_sum", x_sum)],
    );
    let constant = BoundReport::new(
        "falk_bruch_constant",
        lhs,
        phi(2.0 * beta * h)?,
        &[("beta", beta), ("h", h)],
    );
    let elementary = BoundReport::new(
        "duhamel_elementary",
        lhs,
        dls_lower(2.0 * beta * h),
        &[("beta", beta), ("h", h)],
    );
    Ok(FalkBruchChain {
        exact,
        transverse,
        constant,
        elementary,
        a_squared,
        double_commutator: dc,
    })
}

/// `Σ_k w_k [γ_k f(γ_k) − f'(γ_k)]` over a quadrature or support rule.
pub fn integration_by_parts_remainder(
    rule: &crate::quadrature::Rule,
    f: impl Fn(f64) -> f64,
    f_prime: impl Fn(f64) -> f64,
) -> f64 {
    rule.iter().map(|(g, w)| w * (g * f(g) - f_prime(g))).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AipRemainder {
    pub pair: (usize, usize),
    /// `Δ(⟨σ_iσ_j⟩)` averaged over `γ_ij` alone, other couplings fixed.
    pub delta_value: f64,
    /// `(3/2) E|γ|³ · sup_f2_estimate`.
    pub bound_value: f64,
    /// `6 β²J²/N`.
    pub sup_f2_estimate: f64,
    pub nodes: usize,
}

impl AipRemainder {
    pub fn within_bound(&self) -> bool {
        self.delta_value.abs() <= self.bound_value + BOUND_TOL
    }
}

/// `(3/2) E|γ|³ · 6β²J²/N`.
pub fn aip_bound(params: &ModelParams, spec: &DisorderSpec) -> f64 {
    let sup = C3_BOUND * (params.beta * params.j_coupling).powi(2) / params.n_sites as f64;
    1.5 * spec.third_abs_moment * sup
}

/// Conditional remainder for `f(γ_ij) = ⟨σ_i^z σ_j^z⟩`, with
/// `f' = (βJ/√N)(σ_iσ_j; σ_iσ_j)`, using the exact support of discrete laws
/// or [`crate::quadrature::DEFAULT_NODES`] Gauss nodes otherwise.
pub fn aip_remainder(
    params: &ModelParams,
    sample: &CouplingSample,
    pair: (usize, usize),
    spec: &DisorderSpec,
) -> Result<AipRemainder> {
    aip_remainder_with_nodes(params, sample, pair, spec, crate::quadrature::DEFAULT_NODES)
}

pub fn aip_remainder_with_nodes(
    params: &ModelParams,
    sample: &CouplingSample,
    pair: (usize, usize),
    spec: &DisorderSpec,
    nodes: usize,
) -> Result<AipRemainder> {
    if !spec.is_standard() {
        return Err(Error::UnsupportedLaw(format!(
            "{} law with mean {} and variance {}",
            spec.name(),
            spec.mean,
            spec.variance
        )));
    }
    params.require_pairs()?;
    let (i, j) = pair;
    let n = params.n_sites;
    let a_op = z_string(&[i, j], n)?;
    let rule = spec.quadrature(nodes);
    let scale = params.beta * params.j_coupling / (n as f64).sqrt();
    let mut delta = 0.0;
    for (g, w) in rule.iter() {
        let s = sample.with_coupling(i, j, g)?;
        let state = gibbs_for_sample(params, &s)?;
        let f = expectation_real(&state, &a_op)?;
        let fp = scale * connected_duhamel2(&state, &a_op)?;
        delta += w * (g * f - fp);
    }
    let sup_f2_estimate = C3_BOUND * (params.beta * params.j_coupling).powi(2) / n as f64;
    Ok(AipRemainder {
        pair,
        delta_value: delta,
        bound_value: 1.5 * spec.third_abs_moment * sup_f2_estimate,
        sup_f2_estimate,
        nodes: rule.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundState {
    /// Minimum of `−(1/√N) Σ γ_ij s_i s_j` (total, not per site).
    pub energy: f64,
    /// Minimizer with `s_{N−1} = +1`.
    pub config: Vec<i8>,
    /// Basis index of the minimizer.
    pub index: usize,
}

/// Minimum over the half of a precomputed classical energy table with the
/// top site up; ties go to the lowest index.
pub fn classical_ground_state_from_diagonal(diag: &[f64], n_sites: usize) -> (f64, usize) {
    let half = 1usize << (n_sites - 1);
    let mut best = (f64::INFINITY, 0usize);
    for (b, &e) in diag.iter().enumerate().take(half) {
        if e < best.0 {
            best = (e, b);
        }
    }
    best
}

pub fn classical_ground_state(sample: &CouplingSample) -> Result<GroundState> {
    classical_ground_state_capped(sample, GROUND_STATE_CAP)
}

const GRAY_BLOCK_BITS: usize = 12;

fn energy_of(sample: &CouplingSample, b: usize) -> f64 {
    let n = sample.n_sites();
    let s: f64 = pairs(n)
        .zip(sample.gamma())
        .map(|((i, j), g)| g * crate::hilbert::spin(b, i) * crate::hilbert::spin(b, j))
        .sum();
    -s / (n as f64).sqrt()
}

/// Exhaustive search over `2^{N−1}` configurations (the global flip is
/// fixed by `s_{N−1} = +1`), Gray-code ordered within fixed-size blocks.
pub fn classical_ground_state_capped(sample: &CouplingSample, cap: usize) -> Result<GroundState> {
    let n = sample.n_sites();
    if n > cap.min(30) {
        return Err(Error::ResourceCap(format!(
            "ground-state enumeration over {n} sites exceeds cap {cap}"
        )));
    }
    if n == 1 {
        return Ok(GroundState {
            energy: 0.0,
            config: vec![1],
            index: 0,
        });
    }
    let free = n - 1;
    let low = free.min(GRAY_BLOCK_BITS);
    let blocks = 1usize << (free - low);
    let norm = 1.0 / (n as f64).sqrt();
    let coupling = |a: usize, b: usize| sample.gamma()[pair_index(a.min(b), a.max(b), n)];

    let block_best = |block: usize| -> (f64, usize) {
        let mut b = block << low;
        let mut spins: Vec<f64> = (0..n).map(|i| crate::hilbert::spin(b, i)).collect();
        let mut field: Vec<f64> = (0..n)
            .map(|k| {
                (0..n)
                    .filter(|&j| j != k)
                    .map(|j| coupling(k, j) * spins[j])
                    .sum()
            })
            .collect();
        let mut energy = energy_of(sample, b);
        let mut best = (energy, b);
        for t in 1..(1usize << low) {
            let k = t.trailing_zeros() as usize;
            energy += 2.0 * norm * spins[k] * field[k];
            let old = spins[k];
            for (j, f) in field.iter_mut().enumerate() {
                if j != k {
                    *f -= 2.0 * old * coupling(j, k);
                }
            }
            spins[k] = -old;
            b ^= 1 << k;
            if energy < best.0 || (energy == best.0 && b < best.1) {
                best = (energy, b);
            }
        }
        best
    };
    let results = map_indexed(blocks, Workers::default(), block_best);
    let (_, index) = results
        .into_iter()
        .fold((f64::INFINITY, usize::MAX), |acc, cand| {
            if cand.0 < acc.0 || (cand.0 == acc.0 && cand.1 < acc.1) {
                cand
            } else {
                acc
            }
        });
    let config = (0..n)
        .map(|i| crate::hilbert::spin(index, i) as i8)
        .collect();
    debug_assert_eq!(pair_count(n), sample.gamma().len());
    Ok(GroundState {
        energy: energy_of(sample, index),
        config,
        index,
    })
}

/// Finite-N chain and asymptotic form of the overlap lower bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    /// `E⟨R²⟩ ≥ ((N−1)/N)·L(2βh) + (2/βJ)·e_gs − (2/βJ)·Δ̄_N + 1/N`.
    pub finite: BoundReport,
    /// `E⟨R²⟩` against `L(2βh) − 2κ/(βJ)`.
    pub asymptotic: BoundReport,
    /// Certified bound on `|Δ_N|`.
    pub delta_bound: f64,
}

/// `(3β²J²c₃ / 4√N)(1 − 1/N) E|γ|³` with `c₃ = 6`.
pub fn delta_n_bound(params: &ModelParams, third_abs_moment: f64) -> f64 {
    let n = params.n_sites as f64;
    3.0 * (params.beta * params.j_coupling).powi(2) * C3_BOUND / (4.0 * n.sqrt())
        * (1.0 - 1.0 / n)
        * third_abs_moment
}

/// Asymptotic right-hand side `(1 − e^{−2βh})/(2βh) − 2κ/(βJ)`.
pub fn asymptotic_rhs(beta: f64, h: f64, j_coupling: f64) -> f64 {
    dls_lower(2.0 * beta * h) - 2.0 * KAPPA / (beta * j_coupling)
}

pub fn theorem_bound(
    params: &ModelParams,
    stats: &EnsembleStats,
    gs_mean_density: f64,
) -> Result<TheoremReport> {
    if stats.params != *params {
        return Err(Error::Mismatch(
            "ensemble statistics were computed for different parameters".into(),
        ));
    }
    if stats.gs_density.n != stats.overlap_sq.n {
        return Err(Error::Mismatch(
            "ground-state densities and overlaps come from different sample sets".into(),
        ));
    }
    if params.j_coupling <= 0.0 {
        return Err(Error::InvalidParameter("J > 0 required".into()));
    }
    let n = params.n_sites as f64;
    let bj = params.beta * params.j_coupling;
    let lhs = stats.overlap_sq.mean;
    let elementary = dls_lower(2.0 * params.beta * params.h);
    let delta_bound = delta_n_bound(params, stats.third_abs_moment);
    let finite_rhs =
        (n - 1.0) / n * elementary + 2.0 / bj * gs_mean_density - 2.0 / bj * delta_bound + 1.0 / n;
    let ctx = [
        ("n", n),
        ("beta", params.beta),
        ("h", params.h),
        ("j", params.j_coupling),
        ("gs_density", gs_mean_density),
        ("delta_bound", delta_bound),
        ("samples", stats.overlap_sq.n as f64),
    ];
    Ok(TheoremReport {
        finite: BoundReport::new("overlap_lower_bound_finite", lhs, finite_rhs, &ctx),
        asymptotic: BoundReport::new(
            "overlap_lower_bound_asymptotic",
            lhs,
            asymptotic_rhs(params.beta, params.h, params.j_coupling),
            &[
                ("beta", params.beta),
                ("h", params.h),
                ("j", params.j_coupling),
                ("kappa", KAPPA),
            ],
        ),
        delta_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_hamiltonian, exchange_diagonal};
    use crate::spectral::gibbs_from_hamiltonian;

    #[test]
    fn phi_values() {
        assert_eq!(phi(0.0).unwrap(), 1.0);
        let t = 1f64.tanh();
        assert!((phi(t).unwrap() - t).abs() < 1e-14);
        for t in [0.1, 1.0, 10.0] {
            assert!(phi(t).unwrap() >= dls_lower(t));
        }
        assert!(phi(-0.1).is_err());
        // large arguments: r ≈ t
        let big = phi(1e4).unwrap();
        assert!((big - 1e-4).abs() < 1e-12);
    }

    #[test]
    fn phi_defining_relation() {
        for k in 1..=60 {
            let r = k as f64 * 0.25;
            let got = phi(r * r.tanh()).unwrap() * r;
            assert!((got - r.tanh()).abs() < 1e-10, "r = {r}");
        }
    }

    #[test]
    fn double_commutator_identity() {
        let p = ModelParams::new(3, 1.0, 0.7, 1.0).unwrap();
        let s = CouplingSample::new(3, vec![0.3, -1.1, 0.5]).unwrap();
        let h = build_hamiltonian(&p, &s).unwrap();
        let a = z_string(&[0, 1], 3).unwrap();
        let got = double_commutator(&h, &a).unwrap();
        let want = crate::hilbert::pauli_op(crate::hilbert::Axis::X, 0, 3)
            .unwrap()
            .add(&crate::hilbert::pauli_op(crate::hilbert::Axis::X, 1, 3).unwrap())
            .unwrap()
            .scale(4.0 * 0.7);
        assert!(got.max_abs_diff(&want).unwrap() < 1e-10);
        let id = Operator::identity(3).unwrap();
        assert_eq!(double_commutator(&h, &id).unwrap().max_abs(), 0.0);
        let p0 = ModelParams::new(3, 1.0, 0.0, 1.0).unwrap();
        let h0 = build_hamiltonian(&p0, &s).unwrap();
        assert_eq!(double_commutator(&h0, &a).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn falk_bruch_saturates_without_field() {
        let p = ModelParams::new(3, 2.0, 0.0, 1.0).unwrap();
        let s = CouplingSample::new(3, vec![0.3, -1.1, 0.5]).unwrap();
        let h = build_hamiltonian(&p, &s).unwrap();
        let st = gibbs_from_hamiltonian(&h, p.beta).unwrap();
        let a = z_string(&[0, 1], 3).unwrap();
        let fb = falk_bruch_check(&st, &h, &a, p.beta).unwrap();
        assert!((fb.exact.lhs - 1.0).abs() < 1e-12);
        assert!((fb.exact.rhs - 1.0).abs() < 1e-12);
        assert!(fb.exact.margin.abs() < 1e-12);
        assert!(fb.all_satisfied());
    }

    #[test]
    fn synthetic_remainders() {
        let rad = DisorderSpec::rademacher().quadrature(0);
        let gauss = DisorderSpec::gaussian().quadrature(crate::quadrature::DEFAULT_NODES);
        assert_eq!(
            integration_by_parts_remainder(&rad, |g| g * g, |g| 2.0 * g),
            0.0
        );
        let cube = integration_by_parts_remainder(&rad, |g| g.powi(3), |g| 3.0 * g * g);
        assert_eq!(cube, -2.0);
        let stein = integration_by_parts_remainder(&gauss, |g| g.powi(3), |g| 3.0 * g * g);
        assert!(stein.abs() < 1e-10);
    }

    #[test]
    fn ground_state_examples() {
        let s = CouplingSample::new(2, vec![1.0]).unwrap();
        let gs = classical_ground_state(&s).unwrap();
        assert!((gs.energy + 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(gs.config[0], gs.config[1]);

        let s = CouplingSample::uniform_value(3, 1.0).unwrap();
        assert!((classical_ground_state(&s).unwrap().energy + 3f64.sqrt()).abs() < 1e-14);

        let s = CouplingSample::new(3, vec![1.0, 1.0, -1.0]).unwrap();
        // brute force over all 8 configurations
        let brute = (0..8)
            .map(|b| exchange_diagonal(&s)[b])
            .fold(f64::INFINITY, f64::min);
        let gs = classical_ground_state(&s).unwrap();
        assert!((gs.energy - brute).abs() < 1e-15);
        assert!((gs.energy + 1.0 / 3f64.sqrt()).abs() < 1e-14);

        let big = CouplingSample::uniform_value(21, 1.0).unwrap();
        assert!(matches!(
            classical_ground_state(&big),
            Err(Error::ResourceCap(_))
        ));
    }

    #[test]
    fn asymptotic_corner_arithmetic() {
        let rhs = asymptotic_rhs(20.0, 0.05, 1.0);
        assert!((rhs - 0.356032).abs() < 1e-5, "{rhs}");
        assert!(asymptotic_rhs(20.0, 1e6, 1.0) < 0.0);
    }
}
