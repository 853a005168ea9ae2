//! Spin Hilbert space of `N` qubits and the Pauli operator algebra on it.
//!
//! Basis convention: the basis index `b` in `0..2^N` encodes the σᶻ
//! eigenvalues site by site. Bit `i` of `b` equal to 0 means `s_i = +1`,
//! equal to 1 means `s_i = -1`. Site 0 is the least significant bit.

use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Default cap on the number of sites (a 2^14 dense complex matrix is 4 GiB).
pub const DEFAULT_SITE_CAP: usize = 14;

/// Environment variable overriding [`DEFAULT_SITE_CAP`].
pub const SITE_CAP_ENV: &str = "QSKLAB_MAX_N";

const HERMITIAN_TOL: f64 = 1e-12;

static CAP_OVERRIDE: AtomicUsize = AtomicUsize::new(0);

/// Process-wide cap set by an experiment file; takes precedence over
/// `QSKLAB_MAX_N`. `None` clears it.
pub fn set_site_cap(cap: Option<usize>) {
    CAP_OVERRIDE.store(cap.unwrap_or(0), Ordering::Relaxed);
}

/// Current cap on `N`, honoring `QSKLAB_MAX_N`.
pub fn site_cap() -> usize {
    let forced = CAP_OVERRIDE.load(Ordering::Relaxed);
    if forced > 0 {
        return forced;
    }
    std::env::var(SITE_CAP_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|n| (1..31).contains(n))
        .unwrap_or(DEFAULT_SITE_CAP)
}

pub fn check_site_count(n_sites: usize) -> Result<()> {
    let cap = site_cap();
    if n_sites == 0 {
        return Err(Error::InvalidParameter("n_sites must be at least 1".into()));
    }
    if n_sites > cap {
        return Err(Error::TooManySites { n_sites, cap });
    }
    Ok(())
}

/// σᶻ eigenvalue of site `i` in basis state `b`.
#[inline]
pub fn spin(b: usize, i: usize) -> f64 {
    if (b >> i) & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    /// The axis `w` with `[self, next] = 2i w` in cyclic order.
    pub fn cyclic_partner(self) -> (Axis, Axis) {
        match self {
            Axis::X => (Axis::Y, Axis::Z),
            Axis::Y => (Axis::Z, Axis::X),
            Axis::Z => (Axis::X, Axis::Y),
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SiteIndex(usize);

impl SiteIndex {
    pub fn new(value: usize, n_sites: usize) -> Result<Self> {
        if n_sites == 0 || value >= n_sites {
            return Err(Error::SiteOutOfRange {
                site: value,
                n_sites,
            });
        }
        Ok(SiteIndex(value))
    }

    pub fn get(self) -> usize {
        self.0
    }

    pub fn mask(self) -> usize {
        1 << self.0
    }
}

/// Dense complex operator on the `2^N`-dimensional spin space.
///
/// `hermitian` is only ever set after verification, `real` tracks whether
/// every imaginary part is exactly zero so that products and
/// eigendecompositions can take the real-arithmetic path.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    n_sites: usize,
    matrix: DMatrix<C64>,
    hermitian: bool,
    real: bool,
}

impl Operator {
    /// Wraps a matrix; dimension must be a power of two.
    pub fn from_matrix(matrix: DMatrix<C64>) -> Result<Self> {
        let dim = matrix.nrows();
        if matrix.ncols() != dim {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: matrix.ncols(),
            });
        }
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(dim));
        }
        let n_sites = dim.trailing_zeros() as usize;
        Ok(Self::classify(n_sites, matrix))
    }

    pub fn from_real(matrix: DMatrix<f64>) -> Result<Self> {
        Self::from_matrix(matrix.map(|x| C64::new(x, 0.0)))
    }

    fn classify(n_sites: usize, matrix: DMatrix<C64>) -> Self {
        let real = matrix.iter().all(|z| z.im == 0.0);
        let hermitian = hermitian_deviation(&matrix) <= HERMITIAN_TOL * max_abs(&matrix).max(1.0);
        Operator {
            n_sites,
            matrix,
            hermitian,
            real,
        }
    }

    pub fn identity(n_sites: usize) -> Result<Self> {
        check_site_count(n_sites)?;
        let dim = 1 << n_sites;
        Ok(Operator {
            n_sites,
            matrix: DMatrix::identity(dim, dim),
            hermitian: true,
            real: true,
        })
    }

    pub fn zeros(n_sites: usize) -> Result<Self> {
        check_site_count(n_sites)?;
        let dim = 1 << n_sites;
        Ok(Operator {
            n_sites,
            matrix: DMatrix::zeros(dim, dim),
            hermitian: true,
            real: true,
        })
    }

    /// Real diagonal operator from its z-basis entries.
    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        let dim = diag.len();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(dim));
        }
        let n_sites = dim.trailing_zeros() as usize;
        check_site_count(n_sites.max(1))?;
        let mut matrix = DMatrix::zeros(dim, dim);
        for (b, &d) in diag.iter().enumerate() {
            matrix[(b, b)] = C64::new(d, 0.0);
        }
        Ok(Operator {
            n_sites,
            matrix,
            hermitian: true,
            real: true,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn real_part(&self) -> DMatrix<f64> {
        self.matrix.map(|z| z.re)
    }

    /// Diagonal entries (real parts) when every off-diagonal entry is zero.
    pub fn diagonal_entries(&self) -> Option<Vec<f64>> {
        let dim = self.dim();
        for c in 0..dim {
            for r in 0..dim {
                if r != c && self.matrix[(r, c)] != C64::new(0.0, 0.0) {
                    return None;
                }
            }
        }
        if (0..dim).any(|b| self.matrix[(b, b)].im != 0.0) {
            return None;
        }
        Some((0..dim).map(|b| self.matrix[(b, b)].re).collect())
    }

    fn check_same_dim(&self, other: &Operator) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(())
    }

    /// Matrix product `self · other`.
    pub fn product(&self, other: &Operator) -> Result<Operator> {
        self.check_same_dim(other)?;
        // Diagonal factors scale rows or columns.
        if let Some(d) = self.diagonal_entries() {
            let mut m = other.matrix.clone();
            for (r, &x) in d.iter().enumerate() {
                m.row_mut(r).scale_mut(x);
            }
            return Ok(Self::classify(self.n_sites, m));
        }
        if let Some(d) = other.diagonal_entries() {
            let mut m = self.matrix.clone();
            for (c, &x) in d.iter().enumerate() {
                m.column_mut(c).scale_mut(x);
            }
            return Ok(Self::classify(self.n_sites, m));
        }
        let matrix = if self.real && other.real {
            let p = self.real_part() * other.real_part();
            p.map(|x| C64::new(x, 0.0))
        } else {
            &self.matrix * &other.matrix
        };
        Ok(Self::classify(self.n_sites, matrix))
    }

    pub fn add(&self, other: &Operator) -> Result<Operator> {
        self.check_same_dim(other)?;
        Ok(Self::classify(self.n_sites, &self.matrix + &other.matrix))
    }

    pub fn sub(&self, other: &Operator) -> Result<Operator> {
        self.check_same_dim(other)?;
        Ok(Self::classify(self.n_sites, &self.matrix - &other.matrix))
    }

    pub fn scale(&self, factor: f64) -> Operator {
        Operator {
            n_sites: self.n_sites,
            matrix: &self.matrix * C64::new(factor, 0.0),
            hermitian: self.hermitian,
            real: self.real,
        }
    }

    pub fn scale_complex(&self, factor: C64) -> Operator {
        Self::classify(self.n_sites, &self.matrix * factor)
    }

    /// `[self, other] = self·other − other·self`.
    pub fn commutator(&self, other: &Operator) -> Result<Operator> {
        self.product(other)?.sub(&other.product(self)?)
    }

    pub fn adjoint(&self) -> Operator {
        Self::classify(self.n_sites, self.matrix.adjoint())
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Operator) -> Result<f64> {
        self.check_same_dim(other)?;
        Ok(self
            .matrix
            .iter()
            .zip(other.matrix.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.matrix)
    }

    /// Largest absolute row sum; an upper bound on the spectral norm.
    pub fn inf_norm(&self) -> f64 {
        self.matrix
            .row_iter()
            .map(|row| row.iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn hermitian_deviation(&self) -> f64 {
        hermitian_deviation(&self.matrix)
    }
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn hermitian_deviation(m: &DMatrix<C64>) -> f64 {
    let dim = m.nrows();
    let mut dev: f64 = 0.0;
    for c in 0..dim {
        for r in c..dim {
            dev = dev.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    dev
}

/// `σ^axis` on `site`, identity elsewhere.
pub fn pauli_op(axis: Axis, site: usize, n_sites: usize) -> Result<Operator> {
    check_site_count(n_sites)?;
    let site = SiteIndex::new(site, n_sites)?;
    let dim = 1usize << n_sites;
    let mask = site.mask();
    let mut matrix = DMatrix::<C64>::zeros(dim, dim);
    for b in 0..dim {
        let up = b & mask == 0;
        match axis {
            Axis::Z => matrix[(b, b)] = C64::new(if up { 1.0 } else { -1.0 }, 0.0),
            Axis::X => matrix[(b ^ mask, b)] = C64::new(1.0, 0.0),
            // σʸ|↑⟩ = i|↓⟩, σʸ|↓⟩ = −i|↑⟩
            Axis::Y => matrix[(b ^ mask, b)] = C64::new(0.0, if up { 1.0 } else { -1.0 }),
        }
    }
    Ok(Operator {
        n_sites,
        matrix,
        hermitian: true,
        real: axis != Axis::Y,
    })
}

/// `Σ_i σ_i^axis`.
pub fn total_axis_sum(axis: Axis, n_sites: usize) -> Result<Operator> {
    let mut acc = Operator::zeros(n_sites)?;
    for i in 0..n_sites {
        acc = acc.add(&pauli_op(axis, i, n_sites)?)?;
    }
    Ok(acc)
}

/// `Π_{i ∈ mask} exp(iπ/2 σ_i^x) = i^{|mask|} Π_{i ∈ mask} σ_i^x`.
///
/// With `mask` covering every site this is the global spin flip.
pub fn flip_unitary(mask: usize, n_sites: usize) -> Result<Operator> {
    check_site_count(n_sites)?;
    let dim = 1usize << n_sites;
    if mask >= dim {
        return Err(Error::InvalidParameter(format!(
            "flip mask {mask:#b} has bits beyond {n_sites} sites"
        )));
    }
    let phase = match mask.count_ones() % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    };
    let mut matrix = DMatrix::<C64>::zeros(dim, dim);
    for b in 0..dim {
        matrix[(b ^ mask, b)] = phase;
    }
    Ok(Operator::classify(n_sites, matrix))
}

/// Diagonal operator `Π_{i ∈ sites} σ_i^z`.
pub fn z_string(sites: &[usize], n_sites: usize) -> Result<Operator> {
    check_site_count(n_sites)?;
    for &s in sites {
        SiteIndex::new(s, n_sites)?;
    }
    let diag: Vec<f64> = (0..1usize << n_sites)
        .map(|b| sites.iter().map(|&s| spin(b, s)).product())
        .collect();
    Operator::diagonal(&diag)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn single_site_paulis() {
        let z = pauli_op(Axis::Z, 0, 1).unwrap();
        let x = pauli_op(Axis::X, 0, 1).unwrap();
        let y = pauli_op(Axis::Y, 0, 1).unwrap();
        assert_eq!(z.matrix()[(0, 0)], c(1.0, 0.0));
        assert_eq!(z.matrix()[(1, 1)], c(-1.0, 0.0));
        assert_eq!(z.matrix()[(0, 1)], c(0.0, 0.0));
        assert_eq!(x.matrix()[(0, 1)], c(1.0, 0.0));
        assert_eq!(x.matrix()[(1, 0)], c(1.0, 0.0));
        assert_eq!(x.matrix()[(0, 0)], c(0.0, 0.0));
        assert_eq!(y.matrix()[(0, 1)], c(0.0, -1.0));
        assert_eq!(y.matrix()[(1, 0)], c(0.0, 1.0));
        assert!(y.is_hermitian() && !y.is_real());
    }

    #[test]
    fn commutator_y_z_on_three_sites() {
        let y = pauli_op(Axis::Y, 1, 3).unwrap();
        let z = pauli_op(Axis::Z, 1, 3).unwrap();
        let x = pauli_op(Axis::X, 1, 3).unwrap();
        let comm = y.commutator(&z).unwrap();
        let expected = x.scale_complex(c(0.0, 2.0));
        assert_eq!(comm.max_abs_diff(&expected).unwrap(), 0.0);
    }

    #[test]
    fn squares_are_identity() {
        let id = Operator::identity(3).unwrap();
        for axis in Axis::ALL {
            for site in 0..3 {
                let p = pauli_op(axis, site, 3).unwrap();
                assert_eq!(p.product(&p).unwrap().max_abs_diff(&id).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn zz_product_in_bit_order() {
        let z0 = pauli_op(Axis::Z, 0, 2).unwrap();
        let z1 = pauli_op(Axis::Z, 1, 2).unwrap();
        let p = z0.product(&z1).unwrap();
        assert_eq!(p.diagonal_entries().unwrap(), vec![1.0, -1.0, -1.0, 1.0]);
        let id = Operator::identity(2).unwrap();
        assert_eq!(id.product(&p).unwrap(), p);
    }

    #[test]
    fn axis_sums() {
        let x = total_axis_sum(Axis::X, 1).unwrap();
        assert_eq!(x, pauli_op(Axis::X, 0, 1).unwrap());
        let z = total_axis_sum(Axis::Z, 2).unwrap();
        assert_eq!(z.diagonal_entries().unwrap(), vec![2.0, 0.0, 0.0, -2.0]);
        for n in 1..=5 {
            assert_eq!(total_axis_sum(Axis::Z, n).unwrap().trace(), c(0.0, 0.0));
        }
    }

    #[test]
    fn errors() {
        assert_eq!(
            pauli_op(Axis::X, 3, 3).unwrap_err(),
            Error::SiteOutOfRange {
                site: 3,
                n_sites: 3
            }
        );
        assert!(matches!(
            pauli_op(Axis::X, 0, 40),
            Err(Error::TooManySites { .. })
        ));
        let a = Operator::identity(1).unwrap();
        let b = Operator::identity(2).unwrap();
        assert!(matches!(
            a.product(&b),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            Operator::from_real(DMatrix::zeros(3, 3)),
            Err(Error::NotPowerOfTwo(3))
        ));
    }

    #[test]
    fn flip_unitary_conjugates_sigma_z() {
        let u = flip_unitary(0b01, 2).unwrap();
        let z0 = pauli_op(Axis::Z, 0, 2).unwrap();
        let z1 = pauli_op(Axis::Z, 1, 2).unwrap();
        let conj0 = u.product(&z0).unwrap().product(&u.adjoint()).unwrap();
        let conj1 = u.product(&z1).unwrap().product(&u.adjoint()).unwrap();
        assert_eq!(conj0.max_abs_diff(&z0.scale(-1.0)).unwrap(), 0.0);
        assert_eq!(conj1.max_abs_diff(&z1).unwrap(), 0.0);
    }

    #[test]
    fn deterministic_construction() {
        let a = pauli_op(Axis::Y, 2, 4).unwrap();
        let b = pauli_op(Axis::Y, 2, 4).unwrap();
        assert_eq!(a, b);
    }
}
