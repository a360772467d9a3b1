//! Gauss–Hermite rules from the eigen-decomposition of the Jacobi matrix.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Gauss–Hermite rule of order `K` for the weight `exp(-y^2)`.
///
/// `vectors[(n, k)]` is the `n`-th component of the normalized eigenvector that
/// belongs to `nodes[k]`; it equals `h_n(nodes[k])` up to a `k`-dependent
/// positive factor.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    vectors: DMatrix<f64>,
}

impl QuadratureRule {
    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// `sqrt(pi) * vectors[(0, k)]^2`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    /// `∫ exp(-y^2) f(y) dy`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&y, &w)| w * f(y))
            .sum()
    }
}

/// Builds the rule by diagonalizing the symmetric tridiagonal matrix with
/// off-diagonal entries `sqrt(n/2)`.
pub fn gauss_hermite(order: usize) -> Result<QuadratureRule> {
    if order == 0 {
        return Err(Error::Domain("quadrature order must be positive".into()));
    }
    let mut jacobi = DMatrix::<f64>::zeros(order, order);
    for n in 1..order {
        let b = (n as f64 / 2.0).sqrt();
        jacobi[(n, n - 1)] = b;
        jacobi[(n - 1, n)] = b;
    }
    let eig = SymmetricEigen::try_new(jacobi, f64::EPSILON, 0).ok_or(Error::Eigensolver { order })?;

    let mut idx: Vec<usize> = (0..order).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let mut nodes: Vec<f64> = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    // the spectrum is symmetric; enforce it exactly
    for k in 0..order / 2 {
        let m = 0.5 * (nodes[order - 1 - k] - nodes[k]);
        nodes[k] = -m;
        nodes[order - 1 - k] = m;
    }
    if order % 2 == 1 {
        nodes[order / 2] = 0.0;
    }

    let mut vectors = DMatrix::<f64>::zeros(order, order);
    for (k, &i) in idx.iter().enumerate() {
        let col = eig.eigenvectors.column(i);
        let sign = if col[0] < 0.0 { -1.0 } else { 1.0 };
        for n in 0..order {
            vectors[(n, k)] = sign * col[n];
        }
    }
    // h_n(-y) = (-1)^n h_n(y)
    for k in 0..order.div_ceil(2) {
        let mirror = order - 1 - k;
        for n in 0..order {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let m = 0.5 * (vectors[(n, k)] + sign * vectors[(n, mirror)]);
            vectors[(n, k)] = m;
            vectors[(n, mirror)] = sign * m;
        }
    }
    let weights = (0..order)
        .map(|k| PI.sqrt() * vectors[(0, k)] * vectors[(0, k)])
        .collect();
    Ok(QuadratureRule {
        nodes,
        weights,
        vectors,
    })
}

/// Process-wide cache of rules keyed by order.
pub fn cached_gauss_hermite(order: usize) -> Result<Arc<QuadratureRule>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<QuadratureRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(rule) = cache.lock().unwrap().get(&order) {
        return Ok(Arc::clone(rule));
    }
    let rule = Arc::new(gauss_hermite(order)?);
    cache
        .lock()
        .unwrap()
        .entry(order)
        .or_insert_with(|| Arc::clone(&rule));
    Ok(rule)
}
