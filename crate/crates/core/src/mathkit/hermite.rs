//! Hermite polynomials and Hermite functions.

use std::f64::consts::PI;

use statrs::function::gamma::ln_gamma;

/// Physicists' Hermite polynomial `H_n(y)` from the three-term recursion.
///
/// Overflows for `n` beyond a few hundred at large `|y|`; use
/// [`hermite_normalized`] or [`hermite_functions`] there.
pub fn hermite(n: usize, y: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 2.0 * y;
    for j in 1..n {
        let next = 2.0 * y * cur - 2.0 * j as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `H_n(y) / sqrt(sqrt(pi) 2^n n!)`, orthonormal against the weight `exp(-y^2)`.
pub fn hermite_normalized(n: usize, y: f64) -> f64 {
    let mut prev = PI.powf(-0.25);
    if n == 0 {
        return prev;
    }
    let mut cur = 2f64.sqrt() * y * prev;
    for j in 1..n {
        let jf = j as f64;
        let next = (2.0 / (jf + 1.0)).sqrt() * y * cur - (jf / (jf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Orthonormal Hermite functions `h_j(y) = exp(-y^2/2) H_j(y) / sqrt(sqrt(pi) 2^j j!)`
/// for `j = 0..=n_max`.
///
/// The Gaussian factor is carried as a separate exponent while recursing, so
/// the result is free of underflow for any `y` where the true value is
/// representable.
pub fn hermite_functions(n_max: usize, y: f64) -> Vec<f64> {
    const BIG: f64 = 1e150;
    let mut out = vec![0.0; n_max + 1];
    // true value = mantissa * exp(log_scale)
    let mut log_scale = -0.5 * y * y;
    let scaled = |m: f64, ls: f64| {
        if m == 0.0 {
            0.0
        } else {
            m.signum() * (m.abs().ln() + ls).exp()
        }
    };
    let mut prev = PI.powf(-0.25);
    out[0] = scaled(prev, log_scale);
    if n_max == 0 {
        return out;
    }
    let mut cur = 2f64.sqrt() * y * prev;
    out[1] = scaled(cur, log_scale);
    for j in 1..n_max {
        let jf = j as f64;
        let next = (2.0 / (jf + 1.0)).sqrt() * y * cur - (jf / (jf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > BIG {
            prev /= BIG;
            cur /= BIG;
            log_scale += BIG.ln();
        }
        out[j + 1] = scaled(cur, log_scale);
    }
    out
}

/// Derivatives `dh_j/dy` for `j = 0..=n_max`, from
/// `h_j' = sqrt(j/2) h_{j-1} - sqrt((j+1)/2) h_{j+1}`.
pub fn hermite_function_derivatives(n_max: usize, y: f64) -> Vec<f64> {
    let h = hermite_functions(n_max + 1, y);
    (0..=n_max)
        .map(|j| {
            let jf = j as f64;
            let down = if j > 0 { (jf / 2.0).sqrt() * h[j - 1] } else { 0.0 };
            down - ((jf + 1.0) / 2.0).sqrt() * h[j + 1]
        })
        .collect()
}

/// Natural log of the normalization `A_s = [pi^(1/4) 2^s sqrt(Gamma(2s+1))]^(-1)`,
/// valid for integer and half-integer `s`.
pub fn ln_hermite_norm(s: f64) -> f64 {
    -(0.25 * PI.ln() + s * 2f64.ln() + 0.5 * ln_gamma(2.0 * s + 1.0))
}
