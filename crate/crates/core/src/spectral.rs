//! Eigendecomposition, Gibbs states and Duhamel correlation functions.
//!
//! The two-point Duhamel function is evaluated through the eigenbasis,
//!
//! ```text
//! (A, B) = Σ_{m,n} Ã_mn B̃_nm K(E_m, E_n),
//! K(E_m, E_n) = (w_n − w_m) / (β (E_m − E_n)),   K(E, E) = w,
//! ```
//!
//! with `Ã = V†AV` and Boltzmann weights `w`. Connected functions of higher
//! order come from derivatives of `log Tr exp(−β(H − xA))` in `x`.

use std::sync::OnceLock;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::hilbert::{Operator, C64};
use crate::model::{build_hamiltonian, CouplingSample, ModelParams};

/// Relative width under which two levels count as degenerate.
pub const DEGENERACY_REL_TOL: f64 = 1e-12;

/// Disagreement between the coarse and refined third-derivative stencils
/// above which both are flagged.
pub const STENCIL_AGREEMENT_TOL: f64 = 1e-4;

#[derive(Debug, Clone)]
enum Basis {
    Real(DMatrix<f64>),
    Complex(DMatrix<C64>),
}

/// Ascending eigenvalues and the unitary whose columns are eigenvectors.
#[derive(Debug, Clone)]
pub struct SpectralData {
    eigenvalues: Vec<f64>,
    basis: Basis,
}

/// Operator expressed in an eigenbasis.
#[derive(Debug, Clone)]
pub enum EigenMatrix {
    Real(DMatrix<f64>),
    Complex(DMatrix<C64>),
}

impl EigenMatrix {
    pub fn get(&self, r: usize, c: usize) -> C64 {
        match self {
            EigenMatrix::Real(m) => C64::new(m[(r, c)], 0.0),
            EigenMatrix::Complex(m) => m[(r, c)],
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            EigenMatrix::Real(m) => m.nrows(),
            EigenMatrix::Complex(m) => m.nrows(),
        }
    }
}

fn sorted_columns<T: Clone + nalgebra::Scalar>(
    values: &[f64],
    vectors: &DMatrix<T>,
) -> (Vec<f64>, DMatrix<T>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let eigenvalues = order.iter().map(|&k| values[k]).collect();
    let vectors = DMatrix::from_fn(vectors.nrows(), vectors.ncols(), |r, c| {
        vectors[(r, order[c])].clone()
    });
    (eigenvalues, vectors)
}

fn check_finite(values: &[f64]) -> Result<()> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigenFailure("non-finite eigenvalue".into()));
    }
    Ok(())
}

fn require_hermitian(op: &Operator) -> Result<()> {
    if !op.is_hermitian() {
        return Err(Error::NotHermitian {
            deviation: op.hermitian_deviation(),
        });
    }
    Ok(())
}

pub fn diagonalize(h_op: &Operator) -> Result<SpectralData> {
    require_hermitian(h_op)?;
    if h_op.is_real() {
        let eig = SymmetricEigen::try_new(h_op.real_part(), f64::EPSILON, 0)
            .ok_or_else(|| Error::EigenFailure("real symmetric solver did not converge".into()))?;
        let values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        check_finite(&values)?;
        let (eigenvalues, vectors) = sorted_columns(&values, &eig.eigenvectors);
        Ok(SpectralData {
            eigenvalues,
            basis: Basis::Real(vectors),
        })
    } else {
        let eig = SymmetricEigen::try_new(h_op.matrix().clone(), f64::EPSILON, 0)
            .ok_or_else(|| Error::EigenFailure("Hermitian solver did not converge".into()))?;
        let values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        check_finite(&values)?;
        let (eigenvalues, vectors) = sorted_columns(&values, &eig.eigenvectors);
        Ok(SpectralData {
            eigenvalues,
            basis: Basis::Complex(vectors),
        })
    }
}

/// Eigenvalues only (cheaper than [`diagonalize`]).
pub fn eigenvalues(h_op: &Operator) -> Result<Vec<f64>> {
    require_hermitian(h_op)?;
    let mut values: Vec<f64> = if h_op.is_real() {
        h_op.real_part()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect()
    } else {
        h_op.matrix()
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect()
    };
    check_finite(&values)?;
    values.sort_by(f64::total_cmp);
    Ok(values)
}

impl SpectralData {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn is_real(&self) -> bool {
        matches!(self.basis, Basis::Real(_))
    }

    /// Eigenvectors as columns of a complex unitary.
    pub fn eigenvectors(&self) -> DMatrix<C64> {
        match &self.basis {
            Basis::Real(v) => v.map(|x| C64::new(x, 0.0)),
            Basis::Complex(v) => v.clone(),
        }
    }

    pub fn spectral_width(&self) -> f64 {
        match (self.eigenvalues.first(), self.eigenvalues.last()) {
            (Some(lo), Some(hi)) => hi - lo,
            _ => 0.0,
        }
    }

    /// `V D V†`.
    pub fn reconstruct(&self) -> DMatrix<C64> {
        match &self.basis {
            Basis::Real(v) => {
                let mut vd = v.clone();
                for (c, &e) in self.eigenvalues.iter().enumerate() {
                    vd.column_mut(c).scale_mut(e);
                }
                (vd * v.transpose()).map(|x| C64::new(x, 0.0))
            }
            Basis::Complex(v) => {
                let mut vd = v.clone();
                for (c, &e) in self.eigenvalues.iter().enumerate() {
                    for x in vd.column_mut(c).iter_mut() {
                        *x *= e;
                    }
                }
                vd * v.adjoint()
            }
        }
    }

    /// `V†V − 1`, entrywise maximum modulus.
    pub fn orthonormality_defect(&self) -> f64 {
        let g = match &self.basis {
            Basis::Real(v) => (v.transpose() * v).map(|x| C64::new(x, 0.0)),
            Basis::Complex(v) => v.adjoint() * v,
        };
        let d = g.nrows();
        let mut worst: f64 = 0.0;
        for c in 0..d {
            for r in 0..d {
                let target = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((g[(r, c)] - C64::new(target, 0.0)).norm());
            }
        }
        worst
    }

    /// `V† A V`, with fast paths for diagonal and real operators.
    pub fn to_eigenbasis(&self, op: &Operator) -> Result<EigenMatrix> {
        if op.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: op.dim(),
            });
        }
        let diag = op.diagonal_entries();
        Ok(match (&self.basis, diag) {
            (Basis::Real(v), Some(d)) => {
                let mut dv = v.clone();
                for (r, &a) in d.iter().enumerate() {
                    dv.row_mut(r).scale_mut(a);
                }
                EigenMatrix::Real(v.tr_mul(&dv))
            }
            (Basis::Real(v), None) if op.is_real() => {
                EigenMatrix::Real(v.tr_mul(&(op.real_part() * v)))
            }
            (Basis::Real(v), None) => {
                let vc = v.map(|x| C64::new(x, 0.0));
                EigenMatrix::Complex(vc.adjoint() * op.matrix() * &vc)
            }
            (Basis::Complex(v), _) => EigenMatrix::Complex(v.adjoint() * op.matrix() * v),
        })
    }
}

/// `log Σ exp(−β E_n)`, shifted by the ground energy.
pub fn log_partition(eigenvalues: &[f64], beta: f64) -> f64 {
    let e0 = eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let s: f64 = eigenvalues.iter().map(|&e| (-beta * (e - e0)).exp()).sum();
    -beta * e0 + s.ln()
}

/// Gibbs state `e^{−βH}/Z` in the eigenbasis of `H`.
#[derive(Debug)]
pub struct GibbsState {
    spectral: SpectralData,
    beta: f64,
    log_z: f64,
    weights: Vec<f64>,
    populations: Vec<f64>,
    density: OnceLock<EigenMatrix>,
}

impl Clone for GibbsState {
    fn clone(&self) -> Self {
        GibbsState {
            spectral: self.spectral.clone(),
            beta: self.beta,
            log_z: self.log_z,
            weights: self.weights.clone(),
            populations: self.populations.clone(),
            density: OnceLock::new(),
        }
    }
}

pub fn make_gibbs(spectral: SpectralData, beta: f64) -> Result<GibbsState> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::InvalidParameter("beta > 0 required".into()));
    }
    let log_z = log_partition(spectral.eigenvalues(), beta);
    let weights: Vec<f64> = spectral
        .eigenvalues()
        .iter()
        .map(|&e| (-beta * e - log_z).exp())
        .collect();
    let d = spectral.dim();
    let mut populations = vec![0.0; d];
    match &spectral.basis {
        Basis::Real(v) => {
            for (n, &w) in weights.iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                for (b, p) in populations.iter_mut().enumerate() {
                    *p += w * v[(b, n)] * v[(b, n)];
                }
            }
        }
        Basis::Complex(v) => {
            for (n, &w) in weights.iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                for (b, p) in populations.iter_mut().enumerate() {
                    *p += w * v[(b, n)].norm_sqr();
                }
            }
        }
    }
    Ok(GibbsState {
        spectral,
        beta,
        log_z,
        weights,
        populations,
        density: OnceLock::new(),
    })
}

/// Diagonalize `h_op` and build its Gibbs state at `beta`.
pub fn gibbs_from_hamiltonian(h_op: &Operator, beta: f64) -> Result<GibbsState> {
    make_gibbs(diagonalize(h_op)?, beta)
}

pub fn gibbs_for_sample(params: &ModelParams, sample: &CouplingSample) -> Result<GibbsState> {
    gibbs_from_hamiltonian(&build_hamiltonian(params, sample)?, params.beta)
}

impl GibbsState {
    pub fn spectral(&self) -> &SpectralData {
        &self.spectral
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn log_z(&self) -> f64 {
        self.log_z
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.spectral.dim()
    }

    /// Diagonal of the density matrix in the z basis.
    pub fn populations(&self) -> &[f64] {
        &self.populations
    }

    pub fn degeneracy_tol(&self) -> f64 {
        DEGENERACY_REL_TOL * self.spectral.spectral_width().max(1.0)
    }

    /// Density matrix in the z basis, built on first use.
    pub fn density_matrix(&self) -> &EigenMatrix {
        self.density.get_or_init(|| match &self.spectral.basis {
            Basis::Real(v) => {
                let mut vw = v.clone();
                for (c, &w) in self.weights.iter().enumerate() {
                    vw.column_mut(c).scale_mut(w);
                }
                EigenMatrix::Real(vw * v.transpose())
            }
            Basis::Complex(v) => {
                let mut vw = v.clone();
                for (c, &w) in self.weights.iter().enumerate() {
                    for x in vw.column_mut(c).iter_mut() {
                        *x *= w;
                    }
                }
                EigenMatrix::Complex(vw * v.adjoint())
            }
        })
    }

    /// `⟨D⟩` for a z-diagonal observable given by its diagonal.
    pub fn diagonal_expectation(&self, diag: &[f64]) -> f64 {
        self.populations.iter().zip(diag).map(|(p, d)| p * d).sum()
    }

    /// `Σ_n w_n Σ_b conj(V_bn) V_{b⊕mask, n}`, i.e. `⟨Π_{i∈mask} σ_i^x⟩`.
    pub fn flip_expectation(&self, mask: usize) -> f64 {
        let d = self.dim();
        match &self.spectral.basis {
            Basis::Real(v) => {
                let mut acc = 0.0;
                for (n, &w) in self.weights.iter().enumerate() {
                    if w == 0.0 {
                        continue;
                    }
                    let col = v.column(n);
                    let s: f64 = (0..d).map(|b| col[b] * col[b ^ mask]).sum();
                    acc += w * s;
                }
                acc
            }
            Basis::Complex(v) => {
                let mut acc = 0.0;
                for (n, &w) in self.weights.iter().enumerate() {
                    if w == 0.0 {
                        continue;
                    }
                    let col = v.column(n);
                    let s: C64 = (0..d).map(|b| col[b].conj() * col[b ^ mask]).sum();
                    acc += w * s.re;
                }
                acc
            }
        }
    }
}

pub fn gibbs_expectation(state: &GibbsState, a_op: &Operator) -> Result<C64> {
    if a_op.dim() != state.dim() {
        return Err(Error::DimensionMismatch {
            left: state.dim(),
            right: a_op.dim(),
        });
    }
    if let Some(diag) = a_op.diagonal_entries() {
        return Ok(C64::new(state.diagonal_expectation(&diag), 0.0));
    }
    let d = state.dim();
    let a = a_op.matrix();
    // Tr(ρA) = Σ_{b,c} ρ_bc A_cb
    let value = match state.density_matrix() {
        EigenMatrix::Real(rho) => {
            let mut acc = C64::new(0.0, 0.0);
            for c in 0..d {
                for b in 0..d {
                    acc += a[(c, b)] * rho[(b, c)];
                }
            }
            acc
        }
        EigenMatrix::Complex(rho) => {
            let mut acc = C64::new(0.0, 0.0);
            for c in 0..d {
                for b in 0..d {
                    acc += rho[(b, c)] * a[(c, b)];
                }
            }
            acc
        }
    };
    Ok(value)
}

/// Real part of the expectation; for Hermitian observables the imaginary
/// part vanishes up to rounding.
pub fn expectation_real(state: &GibbsState, a_op: &Operator) -> Result<f64> {
    Ok(gibbs_expectation(state, a_op)?.re)
}

/// `(1 − e^{−y})/y` with its limit 1 at `y = 0`.
#[inline]
fn relative_decay(y: f64) -> f64 {
    if y == 0.0 {
        1.0
    } else {
        -(-y).exp_m1() / y
    }
}

/// Duhamel kernel `K(E_m, E_n)`, evaluated from the larger weight.
#[inline]
pub fn duhamel_kernel(e_m: f64, e_n: f64, w_m: f64, w_n: f64, beta: f64, delta: f64) -> f64 {
    let gap = e_m - e_n;
    if gap.abs() <= delta {
        w_n
    } else if gap > 0.0 {
        w_n * relative_decay(beta * gap)
    } else {
        w_m * relative_decay(-beta * gap)
    }
}

fn duhamel_sum(state: &GibbsState, a: &EigenMatrix, b: Option<&EigenMatrix>) -> f64 {
    let e = state.spectral.eigenvalues();
    let w = &state.weights;
    let beta = state.beta;
    let delta = state.degeneracy_tol();
    let d = e.len();
    let mut total = 0.0;
    for m in 0..d {
        for n in 0..d {
            if w[m] == 0.0 && w[n] == 0.0 {
                continue;
            }
            let weight = match (a, b) {
                (EigenMatrix::Real(x), None) => x[(m, n)] * x[(m, n)],
                (EigenMatrix::Complex(x), None) => x[(m, n)].norm_sqr(),
                (EigenMatrix::Real(x), Some(EigenMatrix::Real(y))) => x[(m, n)] * y[(n, m)],
                (x, Some(y)) => (x.get(m, n) * y.get(n, m)).re,
            };
            if weight == 0.0 {
                continue;
            }
            total += weight * duhamel_kernel(e[m], e[n], w[m], w[n], beta, delta);
        }
    }
    total
}

/// Two-point Duhamel function `(A, B)`.
pub fn duhamel2(state: &GibbsState, a_op: &Operator, b_op: &Operator) -> Result<f64> {
    require_hermitian(a_op)?;
    require_hermitian(b_op)?;
    let a = state.spectral.to_eigenbasis(a_op)?;
    if a_op == b_op {
        return Ok(duhamel_sum(state, &a, None));
    }
    let b = state.spectral.to_eigenbasis(b_op)?;
    Ok(duhamel_sum(state, &a, Some(&b)))
}

/// Connected two-point function `(A; A) = (A, A) − ⟨A⟩²`.
pub fn connected_duhamel2(state: &GibbsState, a_op: &Operator) -> Result<f64> {
    let aa = duhamel2(state, a_op, a_op)?;
    let mean = expectation_real(state, a_op)?;
    Ok(aa - mean * mean)
}

/// `log Tr exp(−β(H − xA))`.
pub fn log_partition_perturbed(h_op: &Operator, a_op: &Operator, x: f64, beta: f64) -> Result<f64> {
    require_hermitian(h_op)?;
    require_hermitian(a_op)?;
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::InvalidParameter("beta > 0 required".into()));
    }
    let perturbed = if x == 0.0 {
        h_op.clone()
    } else {
        h_op.sub(&a_op.scale(x))?
    };
    Ok(log_partition(&eigenvalues(&perturbed)?, beta))
}

/// Third connected Duhamel function `(A; A; A)` from the perturbed
/// log-partition function.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ThirdCumulant {
    /// Richardson-combined estimate.
    pub value: f64,
    /// Stencil estimate at step `step`.
    pub coarse: f64,
    /// Stencil estimate at step `step / 2`.
    pub refined: f64,
    pub step: f64,
    /// Whether coarse and refined agree to [`STENCIL_AGREEMENT_TOL`].
    pub consistent: bool,
}

/// Stencil step `ε^{1/5} · max(1, ‖H‖_∞ / β)`.
pub fn third_derivative_step(h_op: &Operator, beta: f64) -> f64 {
    f64::EPSILON.powf(0.2) * (h_op.inf_norm() / beta).max(1.0)
}

pub fn connected_duhamel3(h_op: &Operator, a_op: &Operator, beta: f64) -> Result<ThirdCumulant> {
    let step = third_derivative_step(h_op, beta);
    let f = |x: f64| log_partition_perturbed(h_op, a_op, x, beta);
    let stencil = |s: f64| -> Result<f64> {
        if !(s > 0.0 && s.is_normal()) {
            return Err(Error::Numerical("stencil step underflow".into()));
        }
        let value = (f(2.0 * s)? - 2.0 * f(s)? + 2.0 * f(-s)? - f(-2.0 * s)?) / (2.0 * s.powi(3));
        if !value.is_finite() {
            return Err(Error::Numerical("non-finite stencil value".into()));
        }
        Ok(value / beta.powi(3))
    };
    let coarse = stencil(step)?;
    let refined = stencil(0.5 * step)?;
    let value = (4.0 * refined - coarse) / 3.0;
    let scale = coarse.abs().max(refined.abs()).max(1e-3);
    Ok(ThirdCumulant {
        value,
        coarse,
        refined,
        step,
        consistent: (coarse - refined).abs() <= STENCIL_AGREEMENT_TOL * scale,
    })
}

/// `|∂⟨A⟩/∂γ_ij − (βJ/√N)(A; A)|` for `A = σ_i^z σ_j^z`, the derivative
/// taken by a fourth-order central difference in the coupling.
pub fn disorder_derivative_check(
    params: &ModelParams,
    sample: &CouplingSample,
    pair: (usize, usize),
) -> Result<f64> {
    let (i, j) = pair;
    let n = params.n_sites;
    let a_op = crate::hilbert::z_string(&[i, j], n)?;
    let g0 = sample.get(i, j);
    let corr = |g: f64| -> Result<f64> {
        let s = sample.with_coupling(i, j, g)?;
        let state = gibbs_for_sample(params, &s)?;
        expectation_real(&state, &a_op)
    };
    let eps = 1e-3;
    let derivative = (-corr(g0 + 2.0 * eps)? + 8.0 * corr(g0 + eps)? - 8.0 * corr(g0 - eps)?
        + corr(g0 - 2.0 * eps)?)
        / (12.0 * eps);
    let state = gibbs_for_sample(params, sample)?;
    let predicted =
        params.beta * params.j_coupling / (n as f64).sqrt() * connected_duhamel2(&state, &a_op)?;
    Ok((derivative - predicted).abs())
}
