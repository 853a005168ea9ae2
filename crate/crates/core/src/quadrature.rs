//! Gauss rules for the continuous disorder laws, normalized as probability
//! measures (weights sum to one).

use nalgebra::DMatrix;

/// Nodes used by default when a continuous law has to be integrated exactly
/// in one coupling.
pub const DEFAULT_NODES: usize = 40;

#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn expect(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.iter().map(|(x, w)| w * f(x)).sum()
    }
}

/// Golub-Welsch eigenvalues of a symmetric tridiagonal Jacobi matrix.
fn jacobi_nodes(off_diag: &[f64]) -> Vec<f64> {
    let n = off_diag.len() + 1;
    let mut m = DMatrix::<f64>::zeros(n, n);
    for (k, &b) in off_diag.iter().enumerate() {
        m[(k, k + 1)] = b;
        m[(k + 1, k)] = b;
    }
    let mut nodes: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    nodes.sort_by(f64::total_cmp);
    nodes
}

/// Probabilists' Hermite polynomial `He_n(x)` and `He_{n-1}(x)`.
fn hermite_pair(n: usize, x: f64) -> (f64, f64) {
    let (mut prev, mut cur) = (0.0, 1.0);
    for k in 0..n {
        let next = x * cur - k as f64 * prev;
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

/// Rule for the standard normal law.
pub fn gauss_hermite(n: usize) -> Rule {
    assert!(n >= 1, "at least one node");
    let off: Vec<f64> = (1..n).map(|k| (k as f64).sqrt()).collect();
    let mut nodes = jacobi_nodes(&off);
    // polish with Newton on He_n, He_n' = n He_{n-1}
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let (p, q) = hermite_pair(n, *x);
            if q == 0.0 {
                break;
            }
            *x -= p / (n as f64 * q);
        }
    }
    // w_i = n! / (n He_{n-1}(x_i))^2, in log space
    let log_fact: f64 = (1..=n).map(|k| (k as f64).ln()).sum();
    let mut weights: Vec<f64> = nodes
        .iter()
        .map(|&x| {
            let (_, q) = hermite_pair(n, x);
            (log_fact - 2.0 * (n as f64).ln() - 2.0 * q.abs().ln()).exp()
        })
        .collect();
    symmetrize(&mut nodes, &mut weights);
    Rule { nodes, weights }
}

fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let (mut prev, mut cur) = (0.0, 1.0);
    for k in 0..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * x * cur - kf * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

/// Rule for the uniform law on `[-half_width, half_width]`.
pub fn gauss_legendre(n: usize, half_width: f64) -> Rule {
    assert!(n >= 1, "at least one node");
    let off: Vec<f64> = (1..n)
        .map(|k| {
            let k = k as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        })
        .collect();
    let mut nodes = jacobi_nodes(&off);
    let nf = n as f64;
    let derivative = |x: f64| {
        let (p, q) = legendre_pair(n, x);
        (p, nf * (x * p - q) / (x * x - 1.0))
    };
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = derivative(*x);
            if dp == 0.0 {
                break;
            }
            *x -= p / dp;
        }
    }
    let mut weights: Vec<f64> = nodes
        .iter()
        .map(|&x| {
            let (_, dp) = derivative(x);
            1.0 / ((1.0 - x * x) * dp * dp)
        })
        .collect();
    symmetrize(&mut nodes, &mut weights);
    for x in nodes.iter_mut() {
        *x *= half_width;
    }
    Rule { nodes, weights }
}

/// Enforce exact mirror symmetry of nodes and weights, then renormalize.
fn symmetrize(nodes: &mut [f64], weights: &mut [f64]) {
    let n = nodes.len();
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let x = 0.5 * (nodes[j] - nodes[i]);
        let w = 0.5 * (weights[i] + weights[j]);
        nodes[i] = -x;
        nodes[j] = x;
        weights[i] = w;
        weights[j] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    let total: f64 = weights.iter().sum();
    for w in weights.iter_mut() {
        *w /= total;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_moments() {
        let rule = gauss_hermite(DEFAULT_NODES);
        let moments = [
            (0, 1.0),
            (1, 0.0),
            (2, 1.0),
            (3, 0.0),
            (4, 3.0),
            (6, 15.0),
            (8, 105.0),
        ];
        for (k, expected) in moments {
            let got = rule.expect(|x| x.powi(k));
            assert!(
                (got - expected).abs() < 1e-11 * expected.max(1.0),
                "E x^{k} = {got}"
            );
        }
    }

    #[test]
    fn hermite_small_rules_are_exact() {
        let rule = gauss_hermite(2);
        assert!((rule.nodes[1] - 1.0).abs() < 1e-15);
        assert!((rule.weights[0] - 0.5).abs() < 1e-15);
        let rule = gauss_hermite(3);
        assert!((rule.nodes[2] - 3f64.sqrt()).abs() < 1e-14);
        assert!((rule.weights[1] - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn legendre_uniform_moments() {
        let a = 3f64.sqrt();
        let rule = gauss_legendre(20, a);
        assert!((rule.expect(|x| x * x) - 1.0).abs() < 1e-13);
        assert!((rule.expect(|x| x.powi(4)) - 9.0 / 5.0).abs() < 1e-13);
        assert!(rule.expect(|x| x.powi(3)).abs() < 1e-15);
    }
}
