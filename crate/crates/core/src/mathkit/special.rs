use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Dawson's integral `D(x) = exp(-x^2) ∫_0^x exp(t^2) dt`.
///
/// Taylor series near the origin, Rybicki's exponentially convergent sampling
/// sum elsewhere.
pub fn dawson(x: f64) -> f64 {
    if x < 0.0 {
        return -dawson(-x);
    }
    if x < 0.2 {
        let x2 = x * x;
        // D(x) = sum (-1)^n 2^n x^(2n+1) / (2n+1)!!
        let mut term = x;
        let mut sum = x;
        for n in 1..30 {
            term *= -2.0 * x2 / (2 * n + 1) as f64;
            sum += term;
            if term.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        return sum;
    }
    const H: f64 = 0.25;
    const TERMS: i64 = 81;
    let n0 = 2 * (x / (2.0 * H)).round() as i64;
    let xp = x - n0 as f64 * H;
    let mut sum = 0.0;
    let mut n = -TERMS;
    while n <= TERMS {
        let m = n0 + n;
        sum += (-(xp - n as f64 * H).powi(2)).exp() / m as f64;
        n += 2;
    }
    sum / PI.sqrt()
}

/// Kummer's confluent hypergeometric function `1F1(a; c; z)` by its power series.
///
/// For negative `z` the series is taken after the transformation
/// `1F1(a;c;z) = e^z 1F1(c-a;c;-z)`, which keeps the terms of one sign when
/// `0 < a < c`. The documented domain is `|z| <= 50`.
pub fn kummer_1f1(a: f64, c: f64, z: f64) -> Result<f64> {
    if c <= 0.0 && c == c.round() {
        return Err(Error::Domain(format!(
            "1F1 lower parameter {c} is a non-positive integer"
        )));
    }
    if z < 0.0 {
        return Ok(z.exp() * series_1f1(c - a, c, -z)?);
    }
    series_1f1(a, c, z)
}

fn series_1f1(a: f64, c: f64, z: f64) -> Result<f64> {
    const MAX_TERMS: usize = 10_000;
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 0..MAX_TERMS {
        let nf = n as f64;
        term *= (a + nf) * z / ((c + nf) * (nf + 1.0));
        sum += term;
        if term == 0.0 || (term.abs() <= 1e-15 * sum.abs() && nf > z) {
            return Ok(sum);
        }
    }
    Err(Error::NoConvergence(format!(
        "1F1({a}; {c}; {z}) after {MAX_TERMS} terms"
    )))
}
