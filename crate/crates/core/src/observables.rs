//! Per-sample observables: correlators, overlap and magnetization moments,
//! exchange energy, and the bundled [`SampleReport`].
//!
//! Replica quantities never touch the doubled space. The two replicas share
//! the disorder and the product Gibbs state factorizes, so
//! `⟨R₁₂²⟩ = N⁻² Σ_ij ⟨σ_i^z σ_j^z⟩²`.

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::bounds::{classical_ground_state_from_diagonal, falk_bruch_check, FalkBruchChain};
use crate::error::{Error, Result};
use crate::hilbert::{spin, z_string, Operator};
use crate::model::{
    build_hamiltonian, exchange_diagonal, pairs, CouplingSample, DisorderSpec, ModelParams,
};
use crate::spectral::{
    connected_duhamel2, connected_duhamel3, diagonalize, duhamel2, expectation_real, make_gibbs,
    GibbsState, ThirdCumulant,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelatorMatrix {
    pub n_sites: usize,
    /// Row-major `N×N` matrix of `⟨σ_i^z σ_j^z⟩`.
    pub zz: Vec<f64>,
    /// `⟨σ_i^x⟩`.
    pub x_field: Vec<f64>,
}

impl CorrelatorMatrix {
    pub fn zz(&self, i: usize, j: usize) -> f64 {
        self.zz[i * self.n_sites + j]
    }

    /// Matrix with unit diagonal and vanishing off-diagonal correlators.
    pub fn uncorrelated(n_sites: usize, x_field: Vec<f64>) -> Self {
        let mut zz = vec![0.0; n_sites * n_sites];
        for i in 0..n_sites {
            zz[i * n_sites + i] = 1.0;
        }
        CorrelatorMatrix {
            n_sites,
            zz,
            x_field,
        }
    }
}

fn check_state(state: &GibbsState, n_sites: usize) -> Result<()> {
    if n_sites == 0 || n_sites >= usize::BITS as usize || state.dim() != 1 << n_sites {
        return Err(Error::DimensionMismatch {
            left: state.dim(),
            right: 1usize.checked_shl(n_sites as u32).unwrap_or(0),
        });
    }
    Ok(())
}

pub fn correlator_matrix(state: &GibbsState, n_sites: usize) -> Result<CorrelatorMatrix> {
    check_state(state, n_sites)?;
    let n = n_sites;
    let p = state.populations();
    let mut zz = vec![0.0; n * n];
    for i in 0..n {
        zz[i * n + i] = 1.0;
        for j in i + 1..n {
            let mask = (1usize << i) | (1usize << j);
            // s_i s_j = −1 exactly when one of the two bits is set
            let v: f64 = p
                .iter()
                .enumerate()
                .map(|(b, &pb)| {
                    if (b & mask).count_ones() == 1 {
                        -pb
                    } else {
                        pb
                    }
                })
                .sum();
            zz[i * n + j] = v;
            zz[j * n + i] = v;
        }
    }
    let x_field = (0..n).map(|i| state.flip_expectation(1 << i)).collect();
    Ok(CorrelatorMatrix {
        n_sites: n,
        zz,
        x_field,
    })
}

/// `⟨σ_i^z⟩` for every site.
pub fn z_magnetizations(state: &GibbsState, n_sites: usize) -> Result<Vec<f64>> {
    check_state(state, n_sites)?;
    let p = state.populations();
    Ok((0..n_sites)
        .map(|i| p.iter().enumerate().map(|(b, &pb)| pb * spin(b, i)).sum())
        .collect())
}

/// `⟨Π_{i∈sites} σ_i^z⟩`.
pub fn z_string_expectation(state: &GibbsState, sites: &[usize]) -> f64 {
    state
        .populations()
        .iter()
        .enumerate()
        .map(|(b, &pb)| pb * sites.iter().map(|&s| spin(b, s)).product::<f64>())
        .sum()
}

/// `⟨R₁₂²⟩ = N⁻² Σ_ij zz_ij²`.
pub fn overlap_square(corr: &CorrelatorMatrix) -> f64 {
    let n = corr.n_sites as f64;
    corr.zz.iter().map(|v| v * v).sum::<f64>() / (n * n)
}

/// `⟨R₁₂⟩ = N⁻¹ Σ_i ⟨σ_i^z⟩²`.
pub fn overlap_first_moment(corr: &CorrelatorMatrix, magnetizations: &[f64]) -> Result<f64> {
    if magnetizations.len() != corr.n_sites {
        return Err(Error::DimensionMismatch {
            left: corr.n_sites,
            right: magnetizations.len(),
        });
    }
    Ok(magnetizations.iter().map(|m| m * m).sum::<f64>() / corr.n_sites as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MagnetizationMoments {
    pub m1: f64,
    pub m2: f64,
    pub m4: f64,
}

/// Moments of `m = N⁻¹ Σ σ_i^z`, a z-diagonal operator.
pub fn magnetization_moments(state: &GibbsState, n_sites: usize) -> Result<MagnetizationMoments> {
    check_state(state, n_sites)?;
    let n = n_sites as f64;
    let mut out = MagnetizationMoments {
        m1: 0.0,
        m2: 0.0,
        m4: 0.0,
    };
    for (b, &p) in state.populations().iter().enumerate() {
        let m = (n - 2.0 * b.count_ones() as f64) / n;
        let m2 = m * m;
        out.m1 += p * m;
        out.m2 += p * m2;
        out.m4 += p * m2 * m2;
    }
    Ok(out)
}

/// `⟨m²⟩ = N⁻² Σ_ij zz_ij`.
pub fn m2_from_correlators(corr: &CorrelatorMatrix) -> f64 {
    let n = corr.n_sites as f64;
    corr.zz.iter().sum::<f64>() / (n * n)
}

pub fn exchange_energy(state: &GibbsState, u_op: &Operator) -> Result<f64> {
    expectation_real(state, u_op)
}

/// Where a sample came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub law: String,
    pub symmetric: bool,
    pub master_seed: u64,
    pub sample_index: u64,
    /// Seed of the sample's own random stream.
    pub seed: u64,
    pub sample_hash: u64,
}

impl Provenance {
    pub fn new(
        spec: &DisorderSpec,
        master_seed: u64,
        sample_index: u64,
        seed: u64,
        sample: &CouplingSample,
    ) -> Self {
        Provenance {
            law: spec.name().to_string(),
            symmetric: spec.theorem_eligible(),
            master_seed,
            sample_index,
            seed,
            sample_hash: sample.hash(),
        }
    }

    /// For samples supplied directly rather than drawn.
    pub fn manual(sample: &CouplingSample) -> Self {
        Provenance {
            law: "manual".into(),
            symmetric: false,
            master_seed: 0,
            sample_index: 0,
            seed: 0,
            sample_hash: sample.hash(),
        }
    }
}

/// Optional extra work per sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ReportOptions {
    /// Connected Duhamel functions of every pair, feeding the
    /// integration-by-parts remainder.
    pub pair_terms: bool,
    /// `(A; A; A)` for `A = σ_1^z σ_2^z` (eight extra eigenvalue solves).
    pub third_cumulant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleReport {
    pub params: ModelParams,
    pub correlators: CorrelatorMatrix,
    pub z_magnetizations: Vec<f64>,
    pub overlap_sq: f64,
    pub overlap_first: f64,
    pub exchange_energy: f64,
    pub m_moments: MagnetizationMoments,
    /// `⟨σ_1^z σ_2^z σ_3^z σ_4^z⟩` when `N ≥ 4`.
    pub four_point: Option<f64>,
    /// `(A, A)` for `A = σ_1^z σ_2^z`.
    pub duhamel_aa: f64,
    /// Exact Falk-Bruch lower bound on `duhamel_aa`.
    pub fb_lower: f64,
    pub falk_bruch: FalkBruchChain,
    /// Minimum classical energy of `U` for this sample.
    pub ground_energy: f64,
    /// `Σ_{i<j} [γ_ij ⟨σ_iσ_j⟩ − (βJ/√N)(σ_iσ_j; σ_iσ_j)]`; its disorder
    /// mean is `Σ Δ(⟨σ_iσ_j⟩)`.
    pub remainder_sum: Option<f64>,
    pub third_cumulant: Option<ThirdCumulant>,
    pub provenance: Provenance,
}

impl SampleReport {
    pub fn zz01(&self) -> f64 {
        self.correlators.zz(0, 1)
    }

    /// One JSON-lines record with the fixed field set.
    pub fn to_json_line(&self) -> String {
        json!({
            "kind": "sample",
            "n": self.params.n_sites,
            "beta": self.params.beta,
            "h": self.params.h,
            "j": self.params.j_coupling,
            "overlap_sq": self.overlap_sq,
            "exchange_energy": self.exchange_energy,
            "m1": self.m_moments.m1,
            "m2": self.m_moments.m2,
            "m4": self.m_moments.m4,
            "duhamel_aa": self.duhamel_aa,
            "fb_lower": self.fb_lower,
            "seed": self.provenance.seed,
            "sample_hash": format!("{:016x}", self.provenance.sample_hash),
        })
        .to_string()
    }
}

/// One diagonalization, every observable of the sample.
pub fn sample_report(
    params: &ModelParams,
    sample: &CouplingSample,
    options: ReportOptions,
    provenance: Provenance,
) -> Result<SampleReport> {
    params.validate()?;
    params.require_pairs()?;
    let n = params.n_sites;
    let h_op = build_hamiltonian(params, sample)?;
    let state = make_gibbs(diagonalize(&h_op)?, params.beta)?;
    let u_diag = exchange_diagonal(sample);
    let correlators = correlator_matrix(&state, n)?;
    let z_mags = z_magnetizations(&state, n)?;
    let a_op = z_string(&[0, 1], n)?;
    let duhamel_aa = duhamel2(&state, &a_op, &a_op)?;
    let falk_bruch = falk_bruch_check(&state, &h_op, &a_op, params.beta)?;
    let (ground_energy, _) = classical_ground_state_from_diagonal(&u_diag, n);

    let remainder_sum = if options.pair_terms {
        let scale = params.beta * params.j_coupling / (n as f64).sqrt();
        let mut acc = 0.0;
        for (k, (i, j)) in pairs(n).enumerate() {
            let aij = if (i, j) == (0, 1) {
                a_op.clone()
            } else {
                z_string(&[i, j], n)?
            };
            let connected = if (i, j) == (0, 1) {
                duhamel_aa - correlators.zz(0, 1).powi(2)
            } else {
                connected_duhamel2(&state, &aij)?
            };
            acc += sample.gamma()[k] * correlators.zz(i, j) - scale * connected;
        }
        Some(acc)
    } else {
        None
    };
    let third_cumulant = if options.third_cumulant {
        Some(connected_duhamel3(&h_op, &a_op, params.beta)?)
    } else {
        None
    };

    Ok(SampleReport {
        params: *params,
        overlap_sq: overlap_square(&correlators),
        overlap_first: overlap_first_moment(&correlators, &z_mags)?,
        exchange_energy: state.diagonal_expectation(&u_diag),
        m_moments: magnetization_moments(&state, n)?,
        four_point: (n >= 4).then(|| z_string_expectation(&state, &[0, 1, 2, 3])),
        duhamel_aa,
        fb_lower: falk_bruch.exact.rhs,
        falk_bruch,
        ground_energy,
        remainder_sum,
        third_cumulant,
        correlators,
        z_magnetizations: z_mags,
        provenance,
    })
}
