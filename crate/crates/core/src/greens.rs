//! Finite-matrix Green functions `G(z) = (H - z Omega)^{-1}` for symmetric
//! `H` and positive diagonal `Omega`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Generalized eigen-decomposition `H Gamma = Omega Gamma diag(eps)` with
/// `Gamma^T Omega Gamma = I` and ascending eigenvalues.
#[derive(Debug, Clone)]
pub struct GreenEigen {
    pub eigenvalues: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

fn check_square_symmetric(h: &DMatrix<f64>) -> Result<()> {
    if h.nrows() != h.ncols() || h.nrows() == 0 {
        return Err(Error::Domain(format!("matrix is {}x{}", h.nrows(), h.ncols())));
    }
    let asym = (h - h.transpose()).amax();
    if asym > 1e-10 * h.amax().max(f64::MIN_POSITIVE) {
        return Err(Error::Domain(format!("matrix is not symmetric (defect {asym:.3e})")));
    }
    Ok(())
}

fn sorted_eigen(h: DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let order = h.nrows();
    let eig = SymmetricEigen::try_new(h, f64::EPSILON, 0).ok_or(Error::Eigensolver { order })?;
    let mut idx: Vec<usize> = (0..order).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(order, order, |r, c| eig.eigenvectors[(r, idx[c])]);
    Ok((values, vectors))
}

fn symmetric_eigenvalues(h: DMatrix<f64>) -> Result<Vec<f64>> {
    if h.nrows() == 0 {
        return Ok(Vec::new());
    }
    let order = h.nrows();
    let mut v: Vec<f64> = SymmetricEigen::try_new(h, f64::EPSILON, 0)
        .ok_or(Error::Eigensolver { order })?
        .eigenvalues
        .iter()
        .copied()
        .collect();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

fn inverse_sqrt_overlap(omega: &[f64], dim: usize) -> Result<Vec<f64>> {
    if omega.len() != dim {
        return Err(Error::Domain(format!("overlap has {} entries for dimension {dim}", omega.len())));
    }
    omega
        .iter()
        .map(|&o| {
            if o > 0.0 && o.is_finite() {
                Ok(1.0 / o.sqrt())
            } else {
                Err(Error::Domain(format!("overlap entry {o} is not positive")))
            }
        })
        .collect()
}

/// `Omega^{-1/2} H Omega^{-1/2}`.
fn orthonormalized(h: &DMatrix<f64>, omega: &[f64]) -> Result<DMatrix<f64>> {
    check_square_symmetric(h)?;
    let r = inverse_sqrt_overlap(omega, h.nrows())?;
    let mut m = DMatrix::from_fn(h.nrows(), h.ncols(), |i, j| r[i] * h[(i, j)] * r[j]);
    m = 0.5 * (&m + m.transpose());
    Ok(m)
}

pub fn diagonalize(h: &DMatrix<f64>, omega: &[f64]) -> Result<GreenEigen> {
    let hp = orthonormalized(h, omega)?;
    let r = inverse_sqrt_overlap(omega, h.nrows())?;
    let (eigenvalues, mut vectors) = sorted_eigen(hp)?;
    for (i, mut row) in vectors.row_iter_mut().enumerate() {
        row *= r[i];
    }
    Ok(GreenEigen { eigenvalues, vectors })
}

impl GreenEigen {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    fn spectral_scale(&self) -> f64 {
        self.eigenvalues.iter().fold(1.0, |a, &e| a.max(e.abs()))
    }

    /// Nearest eigenvalue and its distance to `z`.
    pub fn nearest_eigenvalue(&self, z: f64) -> (f64, f64) {
        self.eigenvalues
            .iter()
            .map(|&e| (e, (e - z).abs()))
            .fold((f64::NAN, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a })
    }

    /// Fails with a pole error when `z` sits within `1e-12` of the spectrum
    /// (relative to its scale).
    pub fn check_regular(&self, z: f64) -> Result<()> {
        let (eigenvalue, distance) = self.nearest_eigenvalue(z);
        if distance <= 1e-12 * self.spectral_scale() {
            return Err(Error::Pole { z, eigenvalue, distance });
        }
        Ok(())
    }

    /// `1 / (eps_i - z)` for every eigenvalue.
    pub fn resolvent_weights(&self, z: f64) -> Result<Vec<f64>> {
        self.check_regular(z)?;
        Ok(self.eigenvalues.iter().map(|&e| 1.0 / (e - z)).collect())
    }

    /// `G_nm(z) = sum_i Gamma_ni Gamma_mi / (eps_i - z)`.
    pub fn green_element(&self, n: usize, m: usize, z: f64) -> Result<f64> {
        if n >= self.dim() || m >= self.dim() {
            return Err(Error::Domain(format!("index ({n}, {m}) outside dimension {}", self.dim())));
        }
        let w = self.resolvent_weights(z)?;
        Ok(self.element_with(&w, n, m))
    }

    pub(crate) fn element_with(&self, w: &[f64], n: usize, m: usize) -> f64 {
        let g = &self.vectors;
        w.iter().enumerate().map(|(i, &wi)| g[(n, i)] * g[(m, i)] * wi).sum()
    }

    /// `G(z) b`.
    pub fn apply(&self, z: f64, b: &DVector<f64>) -> Result<DVector<f64>> {
        let w = self.resolvent_weights(z)?;
        Ok(self.apply_with(&w, b))
    }

    pub(crate) fn apply_with(&self, w: &[f64], b: &DVector<f64>) -> DVector<f64> {
        let mut c = self.vectors.tr_mul(b);
        for (ci, wi) in c.iter_mut().zip(w) {
            *ci *= wi;
        }
        &self.vectors * c
    }

    /// Dense `G(z)`.
    pub fn matrix(&self, z: f64) -> Result<DMatrix<f64>> {
        let w = self.resolvent_weights(z)?;
        let mut scaled = self.vectors.clone();
        for (i, mut col) in scaled.column_iter_mut().enumerate() {
            col *= w[i];
        }
        Ok(&scaled * self.vectors.transpose())
    }
}

/// `prod_i (a_i - z) / prod_j (b_j - z)` for sorted, interlacing `a` (length
/// `len(b) - 1`), evaluated as a product of ratios.
fn interlaced_ratio(a: &[f64], b: &[f64], z: f64) -> f64 {
    let mut p = 1.0 / (b[b.len() - 1] - z);
    for (ai, bi) in a.iter().zip(b) {
        p *= (ai - z) / (bi - z);
    }
    p
}

fn delete_row_col(h: &DMatrix<f64>, n: usize) -> DMatrix<f64> {
    h.clone().remove_row(n).remove_column(n)
}

/// Compression of `h` onto the orthogonal complement of the unit vector `u`,
/// via the Householder reflector that maps `u` to `e_0`.
fn compress_complement(h: &DMatrix<f64>, u: &DVector<f64>) -> DMatrix<f64> {
    let d = h.nrows();
    let mut v = u.clone();
    v[0] -= 1.0;
    let vv = v.norm_squared();
    let p = if vv < 1e-30 {
        DMatrix::identity(d, d)
    } else {
        DMatrix::identity(d, d) - (2.0 / vv) * &v * v.transpose()
    };
    let mut c = &p * h * &p;
    c = 0.5 * (&c + c.transpose());
    delete_row_col(&c, 0)
}

/// `G_nm(z)` from eigenvalues alone.
///
/// Diagonal elements use the eigenvalues of `H` with row and column `n`
/// deleted. Off-diagonal elements follow by polarization:
/// `G_nm = u^T G u - (G_nn + G_mm)/2` with `u = (e_n + e_m)/sqrt(2)`, where
/// `u^T G u` is the same eigenvalue ratio for the compression of `H` onto the
/// complement of `u`. A diagonal overlap enters through
/// `Omega^{-1/2} H Omega^{-1/2}`.
pub fn green_element_eigenvalues_only(h: &DMatrix<f64>, omega: &[f64], n: usize, m: usize, z: f64) -> Result<f64> {
    let hp = orthonormalized(h, omega)?;
    let d = hp.nrows();
    if n >= d || m >= d {
        return Err(Error::Domain(format!("index ({n}, {m}) outside dimension {d}")));
    }
    let full = symmetric_eigenvalues(hp.clone())?;
    let scale = full.iter().fold(1.0f64, |a, &e| a.max(e.abs()));
    if let Some(&e) = full.iter().find(|&&e| (e - z).abs() <= 1e-12 * scale) {
        return Err(Error::Pole {
            z,
            eigenvalue: e,
            distance: (e - z).abs(),
        });
    }
    let diag = |k: usize| -> Result<f64> {
        let sub = symmetric_eigenvalues(delete_row_col(&hp, k))?;
        Ok(interlaced_ratio(&sub, &full, z))
    };
    let r = |k: usize| 1.0 / omega[k].sqrt();
    if n == m {
        return Ok(diag(n)? * r(n) * r(n));
    }
    let mut u = DVector::zeros(d);
    u[n] = std::f64::consts::FRAC_1_SQRT_2;
    u[m] = std::f64::consts::FRAC_1_SQRT_2;
    let sub = symmetric_eigenvalues(compress_complement(&hp, &u))?;
    let quad = interlaced_ratio(&sub, &full, z);
    Ok((quad - 0.5 * (diag(n)? + diag(m)?)) * r(n) * r(m))
}

/// `Gamma_nk^2` for symmetric `H` with identity overlap, from the eigenvalues
/// of `H` and of `H` with row and column `n` deleted.
pub fn eigenvector_squares_from_eigenvalues(h: &DMatrix<f64>, k: usize, n: usize) -> Result<f64> {
    check_square_symmetric(h)?;
    let d = h.nrows();
    if k >= d || n >= d {
        return Err(Error::Domain(format!("index ({k}, {n}) outside dimension {d}")));
    }
    let full = symmetric_eigenvalues(h.clone())?;
    let range = (full[d - 1] - full[0]).max(f64::MIN_POSITIVE);
    if let Some(w) = full.windows(2).find(|w| w[1] - w[0] <= 1e-10 * range) {
        return Err(Error::Domain(format!(
            "degenerate spectrum: gap {:.3e} near {}",
            w[1] - w[0],
            w[0]
        )));
    }
    if d == 1 {
        return Ok(1.0);
    }
    let sub = symmetric_eigenvalues(delete_row_col(h, n))?;
    let ek = full[k];
    let others: Vec<f64> = full.iter().enumerate().filter(|&(j, _)| j != k).map(|(_, &e)| e).collect();
    let mut p = 1.0;
    for (a, b) in sub.iter().zip(&others) {
        p *= (a - ek) / (b - ek);
    }
    Ok(p)
}
