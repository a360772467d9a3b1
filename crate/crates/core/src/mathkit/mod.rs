//! Special functions and quadrature.

mod hermite;
mod quadrature;
mod special;

pub use hermite::{
    hermite, hermite_function_derivatives, hermite_functions, hermite_normalized, ln_hermite_norm,
};
pub use quadrature::{cached_gauss_hermite, gauss_hermite, QuadratureRule};
pub use special::{dawson, kummer_1f1};
pub use statrs::function::gamma::ln_gamma;

/// Smooth partition-of-unity taper: 1 for `t <= 0`, 0 for `t >= 1`, C∞ in between.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        1.0
    } else if t >= 1.0 {
        0.0
    } else {
        let a = (-1.0 / t).exp();
        let b = (-1.0 / (1.0 - t)).exp();
        b / (a + b)
    }
}
