//! Disorder laws, coupling samples, and the transverse-field SK Hamiltonian
//!
//! ```text
//! H = J·U − h Σ_j σ_j^x,    U = −(1/√N) Σ_{i<j} γ_ij σ_i^z σ_j^z
//! ```

use std::fmt::Write as _;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{check_site_count, spin, Operator, C64};
use crate::quadrature::{self, Rule};

const MOMENT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DisorderKind {
    Gaussian,
    Rademacher,
    /// Uniform on `[-√3, √3]` before the affine map.
    Uniform,
    /// Finite support with explicit probabilities.
    Table {
        points: Vec<f64>,
        weights: Vec<f64>,
    },
}

/// Law of a single coupling `γ_ij`, drawn as `location + scale·ξ` with `ξ`
/// from the base kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisorderSpec {
    pub kind: DisorderKind,
    pub location: f64,
    pub scale: f64,
    pub mean: f64,
    pub variance: f64,
    pub third_abs_moment: f64,
    pub symmetric: bool,
}

impl DisorderSpec {
    pub fn gaussian() -> Self {
        DisorderSpec {
            kind: DisorderKind::Gaussian,
            location: 0.0,
            scale: 1.0,
            mean: 0.0,
            variance: 1.0,
            third_abs_moment: 2.0 * (2.0 / std::f64::consts::PI).sqrt(),
            symmetric: true,
        }
    }

    pub fn rademacher() -> Self {
        DisorderSpec {
            kind: DisorderKind::Rademacher,
            location: 0.0,
            scale: 1.0,
            mean: 0.0,
            variance: 1.0,
            third_abs_moment: 1.0,
            symmetric: true,
        }
    }

    pub fn uniform() -> Self {
        DisorderSpec {
            kind: DisorderKind::Uniform,
            location: 0.0,
            scale: 1.0,
            mean: 0.0,
            variance: 1.0,
            third_abs_moment: 3.0 * 3f64.sqrt() / 4.0,
            symmetric: true,
        }
    }

    /// Built-in law by name: `gaussian`, `rademacher` or `uniform`.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "gaussian" => Ok(Self::gaussian()),
            "rademacher" => Ok(Self::rademacher()),
            "uniform" => Ok(Self::uniform()),
            other => Err(Error::InvalidLaw(format!("unknown law {other:?}"))),
        }
    }

    /// Discrete law on `points` with probabilities `weights`. Unless
    /// `allow_nonstandard`, the law must be centered with unit variance.
    pub fn table(points: Vec<f64>, weights: Vec<f64>, allow_nonstandard: bool) -> Result<Self> {
        if points.is_empty() || points.len() != weights.len() {
            return Err(Error::InvalidLaw(
                "table needs equally many points and weights".into(),
            ));
        }
        if points.iter().chain(weights.iter()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidLaw("table entries must be finite".into()));
        }
        if weights.iter().any(|&w| w <= 0.0) {
            return Err(Error::InvalidLaw("table weights must be positive".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidLaw(format!(
                "table weights sum to {total}, not 1"
            )));
        }
        let weights: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let moment = |f: &dyn Fn(f64) -> f64| -> f64 {
            points.iter().zip(&weights).map(|(&x, &w)| w * f(x)).sum()
        };
        let mean = moment(&|x| x);
        let variance = moment(&|x| (x - mean).powi(2));
        let third_abs_moment = moment(&|x| x.abs().powi(3));
        let symmetric = points.iter().zip(&weights).all(|(&x, &w)| {
            points
                .iter()
                .zip(&weights)
                .any(|(&y, &v)| (x + y).abs() <= MOMENT_TOL && (w - v).abs() <= MOMENT_TOL)
        });
        let spec = DisorderSpec {
            kind: DisorderKind::Table {
                points: points.clone(),
                weights,
            },
            location: 0.0,
            scale: 1.0,
            mean,
            variance,
            third_abs_moment,
            symmetric,
        };
        if third_abs_moment <= 0.0 {
            return Err(Error::InvalidLaw(
                "third absolute moment must be positive".into(),
            ));
        }
        if !allow_nonstandard && !spec.is_standard() {
            return Err(Error::InvalidLaw(format!(
                "table has mean {mean} and variance {variance}; pass the override to allow it"
            )));
        }
        Ok(spec)
    }

    /// Built-in kind mapped through `location + scale·ξ`. Anything other
    /// than `(0, 1)` requires `allow_nonstandard`.
    pub fn affine(
        base: DisorderSpec,
        location: f64,
        scale: f64,
        allow_nonstandard: bool,
    ) -> Result<Self> {
        if matches!(base.kind, DisorderKind::Table { .. }) {
            return Err(Error::InvalidLaw(
                "affine maps apply to built-in kinds only".into(),
            ));
        }
        if !(location.is_finite() && scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidLaw(
                "location must be finite and scale positive".into(),
            ));
        }
        let nonstandard = location != 0.0 || scale != 1.0;
        if nonstandard && !allow_nonstandard {
            return Err(Error::InvalidLaw(
                "non-centered or non-unit-variance law requires the override".into(),
            ));
        }
        let mut spec = base;
        spec.location = location;
        spec.scale = scale;
        spec.mean = location;
        spec.variance = scale * scale;
        spec.symmetric = location == 0.0;
        if nonstandard {
            // |·|³ is not polynomial, so use a fine rule
            let rule = spec.base_rule(200);
            spec.third_abs_moment = rule
                .iter()
                .map(|(x, w)| w * (location + scale * x).abs().powi(3))
                .sum();
        }
        Ok(spec)
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            DisorderKind::Gaussian => "gaussian",
            DisorderKind::Rademacher => "rademacher",
            DisorderKind::Uniform => "uniform",
            DisorderKind::Table { .. } => "table",
        }
    }

    /// Centered, unit variance (the setting every identity is stated for).
    pub fn is_standard(&self) -> bool {
        self.mean.abs() <= MOMENT_TOL && (self.variance - 1.0).abs() <= MOMENT_TOL
    }

    /// Symmetric and standard; only such laws enter theorem checks.
    pub fn theorem_eligible(&self) -> bool {
        self.symmetric && self.is_standard()
    }

    pub fn is_discrete(&self) -> bool {
        matches!(
            self.kind,
            DisorderKind::Rademacher | DisorderKind::Table { .. }
        )
    }

    /// Exact support of a discrete law.
    pub fn support(&self) -> Option<Rule> {
        match &self.kind {
            DisorderKind::Rademacher => Some(Rule {
                nodes: vec![self.location - self.scale, self.location + self.scale],
                weights: vec![0.5, 0.5],
            }),
            DisorderKind::Table { points, weights } => Some(Rule {
                nodes: points.clone(),
                weights: weights.clone(),
            }),
            _ => None,
        }
    }

    fn base_rule(&self, nodes: usize) -> Rule {
        match &self.kind {
            DisorderKind::Gaussian => quadrature::gauss_hermite(nodes),
            DisorderKind::Uniform => quadrature::gauss_legendre(nodes, 3f64.sqrt()),
            DisorderKind::Rademacher => Rule {
                nodes: vec![-1.0, 1.0],
                weights: vec![0.5, 0.5],
            },
            DisorderKind::Table { points, weights } => Rule {
                nodes: points.clone(),
                weights: weights.clone(),
            },
        }
    }

    /// Exact support for discrete laws, an `nodes`-point Gauss rule for
    /// continuous ones.
    pub fn quadrature(&self, nodes: usize) -> Rule {
        if let Some(rule) = self.support() {
            return rule;
        }
        let mut rule = self.base_rule(nodes);
        for x in rule.nodes.iter_mut() {
            *x = self.location + self.scale * *x;
        }
        rule
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let xi = match &self.kind {
            DisorderKind::Gaussian => StandardNormal.sample(rng),
            DisorderKind::Rademacher => {
                if rng.random_bool(0.5) {
                    1.0
                } else {
                    -1.0
                }
            }
            DisorderKind::Uniform => {
                let a = 3f64.sqrt();
                rng.random_range(-a..a)
            }
            DisorderKind::Table { points, weights } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut pick = points[points.len() - 1];
                for (&p, &w) in points.iter().zip(weights) {
                    acc += w;
                    if u < acc {
                        pick = p;
                        break;
                    }
                }
                return pick;
            }
        };
        self.location + self.scale * xi
    }
}

/// Number of unordered pairs on `n_sites` sites.
pub fn pair_count(n_sites: usize) -> usize {
    n_sites * n_sites.saturating_sub(1) / 2
}

/// Position of pair `(i, j)`, `i < j`, in lexicographic order.
pub fn pair_index(i: usize, j: usize, n_sites: usize) -> usize {
    debug_assert!(i < j && j < n_sites);
    i * n_sites - i * (i + 1) / 2 + (j - i - 1)
}

/// All pairs `(i, j)` with `i < j` in storage order.
pub fn pairs(n_sites: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n_sites).flat_map(move |i| (i + 1..n_sites).map(move |j| (i, j)))
}

/// Couplings `γ_ij`, `i < j`, stored in [`pairs`] order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingSample {
    n_sites: usize,
    gamma: Vec<f64>,
}

impl CouplingSample {
    pub fn new(n_sites: usize, gamma: Vec<f64>) -> Result<Self> {
        if n_sites == 0 {
            return Err(Error::InvalidParameter("n_sites must be at least 1".into()));
        }
        if gamma.len() != pair_count(n_sites) {
            return Err(Error::InvalidParameter(format!(
                "{} couplings given, {} sites need {}",
                gamma.len(),
                n_sites,
                pair_count(n_sites)
            )));
        }
        if gamma.iter().any(|g| !g.is_finite()) {
            return Err(Error::InvalidParameter("couplings must be finite".into()));
        }
        Ok(CouplingSample { n_sites, gamma })
    }

    pub fn uniform_value(n_sites: usize, value: f64) -> Result<Self> {
        Self::new(n_sites, vec![value; pair_count(n_sites)])
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        self.gamma[pair_index(i, j, self.n_sites)]
    }

    pub fn with_coupling(&self, i: usize, j: usize, value: f64) -> Result<Self> {
        check_pair(i, j, self.n_sites)?;
        let mut out = self.clone();
        out.gamma[pair_index(i, j, self.n_sites)] = value;
        Ok(out)
    }

    /// FNV-1a over the site count and the coupling bit patterns.
    pub fn hash(&self) -> u64 {
        const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
        const PRIME: u64 = 0x0000_0100_0000_01b3;
        let mut h = OFFSET;
        let mut feed = |bytes: [u8; 8]| {
            for b in bytes {
                h ^= b as u64;
                h = h.wrapping_mul(PRIME);
            }
        };
        feed((self.n_sites as u64).to_le_bytes());
        for g in &self.gamma {
            feed(g.to_bits().to_le_bytes());
        }
        h
    }

    /// Canonical text form: a header line then one `i j gamma` per pair.
    pub fn to_canonical_text(&self, kind: &str, seed: u64) -> String {
        let mut out = format!("N={} kind={} seed={}\n", self.n_sites, kind, seed);
        for ((i, j), g) in pairs(self.n_sites).zip(&self.gamma) {
            let _ = writeln!(out, "{i} {j} {g:.16e}");
        }
        out
    }

    /// Inverse of [`to_canonical_text`](Self::to_canonical_text); returns
    /// the sample, the kind label and the seed.
    pub fn parse_canonical_text(text: &str) -> Result<(Self, String, u64)> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty coupling file".into()))?;
        let mut n = None;
        let mut kind = None;
        let mut seed = None;
        for field in header.split_whitespace() {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad header field {field:?}")))?;
            match key {
                "N" => n = value.parse::<usize>().ok(),
                "kind" => kind = Some(value.to_string()),
                "seed" => seed = value.parse::<u64>().ok(),
                _ => return Err(Error::Parse(format!("unknown header key {key:?}"))),
            }
        }
        let (n, kind, seed) = match (n, kind, seed) {
            (Some(n), Some(k), Some(s)) => (n, k, s),
            _ => return Err(Error::Parse("header needs N, kind and seed".into())),
        };
        let mut gamma = vec![f64::NAN; pair_count(n)];
        for (lineno, line) in lines.enumerate() {
            let parts: Vec<&str> = line.split_whitespace().collect();
            let bad = || Error::Parse(format!("line {}: expected `i j gamma`", lineno + 2));
            if parts.len() != 3 {
                return Err(bad());
            }
            let i: usize = parts[0].parse().map_err(|_| bad())?;
            let j: usize = parts[1].parse().map_err(|_| bad())?;
            let g: f64 = parts[2].parse().map_err(|_| bad())?;
            check_pair(i, j, n)?;
            gamma[pair_index(i, j, n)] = g;
        }
        if gamma.iter().any(|g| g.is_nan()) {
            return Err(Error::Parse("missing coupling lines".into()));
        }
        Ok((CouplingSample::new(n, gamma)?, kind, seed))
    }
}

fn check_pair(i: usize, j: usize, n_sites: usize) -> Result<()> {
    if !(i < j && j < n_sites) {
        return Err(Error::InvalidParameter(format!(
            "pair ({i}, {j}) invalid for {n_sites} sites"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n_sites: usize,
    pub beta: f64,
    pub h: f64,
    pub j_coupling: f64,
}

impl ModelParams {
    pub fn new(n_sites: usize, beta: f64, h: f64, j_coupling: f64) -> Result<Self> {
        let p = ModelParams {
            n_sites,
            beta,
            h,
            j_coupling,
        };
        p.validate()?;
        Ok(p)
    }

    /// `J = 0` is admitted (decoupled spins); identities that divide by `βJ`
    /// check for it themselves.
    pub fn validate(&self) -> Result<()> {
        check_site_count(self.n_sites)?;
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(Error::InvalidParameter("beta > 0 required".into()));
        }
        if !(self.h.is_finite() && self.h >= 0.0) {
            return Err(Error::InvalidParameter("h >= 0 required".into()));
        }
        if !(self.j_coupling.is_finite() && self.j_coupling >= 0.0) {
            return Err(Error::InvalidParameter("J >= 0 required".into()));
        }
        Ok(())
    }

    pub fn require_pairs(&self) -> Result<()> {
        if self.n_sites < 2 {
            return Err(Error::InvalidParameter(
                "n_sites >= 2 required: pairs needed".into(),
            ));
        }
        Ok(())
    }
}

pub fn sample_couplings<R: Rng + ?Sized>(
    spec: &DisorderSpec,
    n_sites: usize,
    rng: &mut R,
) -> Result<CouplingSample> {
    if n_sites < 2 {
        return Err(Error::InvalidParameter("n_sites >= 2 required".into()));
    }
    if !(spec.variance > 0.0 && spec.third_abs_moment.is_finite()) {
        return Err(Error::InvalidLaw("degenerate law".into()));
    }
    let gamma = (0..pair_count(n_sites)).map(|_| spec.draw(rng)).collect();
    CouplingSample::new(n_sites, gamma)
}

/// z-basis diagonal of `U`: the classical energy of every configuration.
pub fn exchange_diagonal(sample: &CouplingSample) -> Vec<f64> {
    let n = sample.n_sites();
    let norm = 1.0 / (n as f64).sqrt();
    (0..1usize << n)
        .map(|b| {
            let s: f64 = pairs(n)
                .zip(sample.gamma())
                .map(|((i, j), g)| g * spin(b, i) * spin(b, j))
                .sum();
            -norm * s
        })
        .collect()
}

pub fn exchange_operator(sample: &CouplingSample) -> Result<Operator> {
    check_site_count(sample.n_sites())?;
    Operator::diagonal(&exchange_diagonal(sample))
}

pub fn build_hamiltonian(params: &ModelParams, sample: &CouplingSample) -> Result<Operator> {
    params.validate()?;
    if sample.n_sites() != params.n_sites {
        return Err(Error::DimensionMismatch {
            left: params.n_sites,
            right: sample.n_sites(),
        });
    }
    let n = params.n_sites;
    let dim = 1usize << n;
    let diag = exchange_diagonal(sample);
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    for b in 0..dim {
        m[(b, b)] = params.j_coupling * diag[b];
        if params.h != 0.0 {
            for i in 0..n {
                m[(b ^ (1 << i), b)] = -params.h;
            }
        }
    }
    Operator::from_matrix(m.map(|x| C64::new(x, 0.0)))
}

/// `γ'_ij = ε_i ε_j γ_ij`.
pub fn gauge_transform(sample: &CouplingSample, signs: &[i8]) -> Result<CouplingSample> {
    let n = sample.n_sites();
    if signs.len() != n {
        return Err(Error::InvalidParameter(format!(
            "sign vector has length {}, expected {}",
            signs.len(),
            n
        )));
    }
    if signs.iter().any(|&s| s != 1 && s != -1) {
        return Err(Error::InvalidParameter("signs must be ±1".into()));
    }
    let gamma = pairs(n)
        .zip(sample.gamma())
        .map(|((i, j), g)| (signs[i] * signs[j]) as f64 * g)
        .collect();
    CouplingSample::new(n, gamma)
}

/// Bitmask of sites with `ε_i = −1`.
pub fn sign_mask(signs: &[i8]) -> usize {
    signs
        .iter()
        .enumerate()
        .filter(|(_, &s)| s < 0)
        .fold(0, |m, (i, _)| m | (1 << i))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rademacher_support() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = sample_couplings(&DisorderSpec::rademacher(), 3, &mut rng).unwrap();
        assert_eq!(s.gamma().len(), 3);
        assert!(s.gamma().iter().all(|&g| g == 1.0 || g == -1.0));
    }

    #[test]
    fn sampling_is_deterministic() {
        let spec = DisorderSpec::gaussian();
        let a = sample_couplings(&spec, 4, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        let b = sample_couplings(&spec, 4, &mut ChaCha8Rng::seed_from_u64(11)).unwrap();
        assert_eq!(a.gamma().len(), 6);
        assert_eq!(a, b);
    }

    #[test]
    fn gaussian_second_moment() {
        let spec = DisorderSpec::gaussian();
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let n = 100_000;
        let m2: f64 = (0..n).map(|_| spec.draw(&mut rng).powi(2)).sum::<f64>() / n as f64;
        assert!((m2 - 1.0).abs() < 0.02, "E γ² = {m2}");
    }

    #[test]
    fn builtin_moments_match_quadrature() {
        for spec in [
            DisorderSpec::gaussian(),
            DisorderSpec::uniform(),
            DisorderSpec::rademacher(),
        ] {
            let rule = spec.quadrature(60);
            assert!(rule.expect(|x| x).abs() < 1e-14);
            assert!((rule.expect(|x| x * x) - 1.0).abs() < 1e-12);
            // |x|³ is only piecewise smooth
            let e3 = rule.expect(|x| x.abs().powi(3));
            assert!(
                (e3 - spec.third_abs_moment).abs() < 2e-3,
                "{}: {e3}",
                spec.name()
            );
        }
    }

    #[test]
    fn table_law_validation() {
        let t = DisorderSpec::table(vec![-1.0, 1.0], vec![0.5, 0.5], false).unwrap();
        assert!(t.symmetric && t.theorem_eligible());
        assert!(DisorderSpec::table(vec![0.0, 2.0], vec![0.5, 0.5], false).is_err());
        let shifted = DisorderSpec::table(vec![0.0, 2.0], vec![0.5, 0.5], true).unwrap();
        assert!(!shifted.theorem_eligible());
        assert!((shifted.mean - 1.0).abs() < 1e-15);
        assert!(DisorderSpec::affine(DisorderSpec::gaussian(), 0.5, 1.0, false).is_err());
        let ferro = DisorderSpec::affine(DisorderSpec::gaussian(), 0.5, 1.0, true).unwrap();
        assert!(!ferro.symmetric);
    }

    #[test]
    fn exchange_two_sites() {
        let s = CouplingSample::new(2, vec![1.0]).unwrap();
        let r = 1.0 / 2f64.sqrt();
        let d = exchange_operator(&s).unwrap().diagonal_entries().unwrap();
        let want = [-r, r, r, -r];
        for (a, b) in d.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        let zero = CouplingSample::new(2, vec![0.0]).unwrap();
        assert_eq!(exchange_operator(&zero).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn exchange_aligned_minimum() {
        let s = CouplingSample::uniform_value(3, 1.0).unwrap();
        let d = exchange_diagonal(&s);
        let min = d.iter().copied().fold(f64::INFINITY, f64::min);
        assert!((min + 3f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn exchange_operator_is_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = sample_couplings(&DisorderSpec::gaussian(), 4, &mut rng).unwrap();
        let u = exchange_operator(&s).unwrap();
        assert!(u.diagonal_entries().is_some());
    }

    #[test]
    fn single_site_hamiltonian() {
        let p = ModelParams::new(1, 1.0, 1.0, 1.0).unwrap();
        let s = CouplingSample::new(1, vec![]).unwrap();
        let h = build_hamiltonian(&p, &s).unwrap();
        let x = crate::hilbert::pauli_op(crate::hilbert::Axis::X, 0, 1).unwrap();
        assert_eq!(h.max_abs_diff(&x.scale(-1.0)).unwrap(), 0.0);
    }

    #[test]
    fn gauge_examples() {
        let s = CouplingSample::new(3, vec![0.3, -1.2, 0.7]).unwrap();
        assert_eq!(gauge_transform(&s, &[1, 1, 1]).unwrap(), s);
        let t = gauge_transform(&s, &[-1, 1, 1]).unwrap();
        assert_eq!(t.gamma(), &[-0.3, 1.2, 0.7]);
        assert_eq!(gauge_transform(&t, &[-1, 1, 1]).unwrap(), s);
        assert!(gauge_transform(&s, &[1, 1]).is_err());
    }

    #[test]
    fn canonical_text_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let s = sample_couplings(&DisorderSpec::gaussian(), 5, &mut rng).unwrap();
        let text = s.to_canonical_text("gaussian", 9);
        assert!(text.starts_with("N=5 kind=gaussian seed=9\n"));
        let (back, kind, seed) = CouplingSample::parse_canonical_text(&text).unwrap();
        assert_eq!(back, s);
        assert_eq!((kind.as_str(), seed), ("gaussian", 9));
        assert!(CouplingSample::parse_canonical_text("N=3 kind=x seed=1\n0 1 1.0\n").is_err());
    }

    #[test]
    fn pair_indexing() {
        let n = 5;
        for (k, (i, j)) in pairs(n).enumerate() {
            assert_eq!(pair_index(i, j, n), k);
        }
        assert_eq!(pairs(n).count(), pair_count(n));
    }
}
