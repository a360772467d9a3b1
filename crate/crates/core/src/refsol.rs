//! Free (reference) Dirac solutions and their expansion in the outer basis.
//!
//! The sine-like solutions are `S+ = A (cos kx, -w sin kx)` and
//! `S- = B (sin kx, w cos kx)`; the cosine-like pair `C±` is regular at the
//! origin only after the outer tails are summed, and behaves like
//! `sign(x) S∓` far out.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mathkit::{dawson, hermite_functions, smooth_step};

/// Kinematic quantities at one energy. Units with `hbar = c = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kinematics {
    pub mass: f64,
    pub energy: f64,
    /// Basis scale `lambda` (inverse length).
    pub scale: f64,
    /// Wavenumber `sqrt(e^2 - M^2)`.
    pub k: f64,
    /// Dimensionless wavenumber `k / lambda`.
    pub mu: f64,
    /// `sqrt((e - M)/(e + M))`.
    pub omega: f64,
}

impl Kinematics {
    pub fn new(mass: f64, energy: f64, scale: f64) -> Result<Self> {
        if !(scale > 0.0) {
            return Err(Error::Domain(format!("basis scale must be positive, got {scale}")));
        }
        if !(energy > mass) || mass < 0.0 {
            return Err(Error::Domain(format!(
                "energy {energy} is not above the rest mass {mass}: bound/negative-energy regime not supported"
            )));
        }
        let k = ((energy - mass) * (energy + mass)).sqrt();
        Ok(Self {
            mass,
            energy,
            scale,
            k,
            mu: k / scale,
            omega: ((energy - mass) / (energy + mass)).sqrt(),
        })
    }

    /// Ratio `lambda / (M + e)` tying the lower outer components to the upper ones.
    pub fn kappa(&self) -> f64 {
        self.scale / (self.mass + self.energy)
    }
}

/// Sine-like coefficients `s_n±` for `n = 0..=n_max`.
pub fn sine_coefficients(kin: &Kinematics, n_max: usize, norm_even: f64, norm_odd: f64) -> (Vec<f64>, Vec<f64>) {
    let h = hermite_functions(2 * n_max + 1, kin.mu);
    let root = (2.0 * PI).sqrt();
    let sign = |n: usize| if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let plus = (0..=n_max).map(|n| sign(n) * root * norm_even * h[2 * n]).collect();
    let minus = (0..=n_max).map(|n| sign(n) * root * norm_odd * h[2 * n + 1]).collect();
    (plus, minus)
}

/// Upward recursion of the even (`shift = 0`) or odd (`shift = 1/2`) channel.
fn recur(f0: f64, f1: f64, mu: f64, shift: f64, n_max: usize) -> Vec<f64> {
    let mut f = Vec::with_capacity(n_max + 1);
    f.push(f0);
    if n_max >= 1 {
        f.push(f1);
    }
    for n in 1..n_max {
        let s = n as f64 + shift;
        let next = ((2.0 * s + 0.5 - mu * mu) * f[n] - (s * (s - 0.5)).sqrt() * f[n - 1])
            / ((s + 1.0) * (s + 0.5)).sqrt();
        f.push(next);
    }
    f
}

/// Residual of the inhomogeneous first row for the cosine-like coefficients,
/// relative to the largest term.
fn initial_residual(c0: f64, c1: f64, mu: f64, odd: bool, norm: f64) -> f64 {
    let g = (0.5 * mu * mu).exp() * PI.powf(-0.25) * norm;
    let (diag, off, src) = if odd {
        (1.5, 1.5f64.sqrt(), -g)
    } else {
        (0.5, 0.5f64.sqrt(), 2f64.sqrt() * g * mu)
    };
    let r = mu * mu * c0 - (diag * c0 - off * c1 + src);
    let scale = (mu * mu * c0).abs().max((diag * c0).abs()).max((off * c1).abs()).max(src.abs());
    if scale == 0.0 {
        0.0
    } else {
        r.abs() / scale
    }
}

/// Cosine-like coefficients `c_n±` for `n = 0..=n_max`.
///
/// The first two are closed forms through Dawson's integral; the rest follow
/// from the same recursion as the sine-like coefficients.
pub fn cosine_coefficients(kin: &Kinematics, n_max: usize, norm_even: f64, norm_odd: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let mu = kin.mu;
    let g = (0.5 * mu * mu).exp();
    let quarter = PI.powf(-0.25);

    // 1F1(1/2; 3/2; mu^2) = e^{mu^2} D(mu)/mu
    let c0p = 2.0 * norm_even * (2.0 / PI.sqrt()).sqrt() * g * dawson(mu);
    let c1p = ((0.5 - mu * mu) * c0p + 2f64.sqrt() * norm_even * quarter * mu * g) / 0.5f64.sqrt();
    // 1F1(-1/2; 1/2; mu^2) = e^{mu^2} (1 - 2 mu D(mu))
    let c0m = norm_odd * (4.0 / PI.sqrt()).sqrt() * g * (1.0 - 2.0 * mu * dawson(mu));
    let c1m = ((1.5 - mu * mu) * c0m - norm_odd * quarter * g) / 1.5f64.sqrt();

    for (c0, c1, odd, norm) in [(c0p, c1p, false, norm_even), (c0m, c1m, true, norm_odd)] {
        let residual = initial_residual(c0, c1, mu, odd, norm);
        if !(residual <= 1e-9) {
            return Err(Error::InitialRelation { mu, residual });
        }
    }
    Ok((recur(c0p, c1p, mu, 0.0, n_max), recur(c0m, c1m, mu, 0.5, n_max)))
}

/// Sine- and cosine-like coefficients for both channels at one energy.
#[derive(Debug, Clone)]
pub struct ReferenceCoeffs {
    pub kinematics: Kinematics,
    pub s_plus: Vec<f64>,
    pub s_minus: Vec<f64>,
    pub c_plus: Vec<f64>,
    pub c_minus: Vec<f64>,
    pub norm_even: f64,
    pub norm_odd: f64,
}

impl ReferenceCoeffs {
    pub fn new(kin: &Kinematics, n_max: usize) -> Result<Self> {
        Self::with_norms(kin, n_max, 1.0, 1.0)
    }

    pub fn with_norms(kin: &Kinematics, n_max: usize, norm_even: f64, norm_odd: f64) -> Result<Self> {
        let n_max = n_max.max(1);
        let (s_plus, s_minus) = sine_coefficients(kin, n_max, norm_even, norm_odd);
        let (c_plus, c_minus) = cosine_coefficients(kin, n_max, norm_even, norm_odd)?;
        Ok(Self {
            kinematics: *kin,
            s_plus,
            s_minus,
            c_plus,
            c_minus,
            norm_even,
            norm_odd,
        })
    }

    pub fn n_max(&self) -> usize {
        self.s_plus.len() - 1
    }

    /// `p_n^± = (s_n+ ± i c_n+) / 2A`; `upper` selects the `+` sign.
    pub fn p(&self, n: usize, upper: bool) -> Complex64 {
        let sign = if upper { 1.0 } else { -1.0 };
        Complex64::new(self.s_plus[n], sign * self.c_plus[n]) / (2.0 * self.norm_even)
    }

    /// `q_n^± = (c_n- ± i s_n-) / 2B`; `upper` selects the `+` sign.
    pub fn q(&self, n: usize, upper: bool) -> Complex64 {
        let sign = if upper { 1.0 } else { -1.0 };
        Complex64::new(self.c_minus[n], sign * self.s_minus[n]) / (2.0 * self.norm_odd)
    }
}

/// Ratios of the outgoing/incoming combinations at the truncation index `N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KinematicRatios {
    pub n: usize,
    /// `p_N^± / p_{N-1}^±`
    pub alpha_plus: Complex64,
    pub alpha_minus: Complex64,
    /// `q_N^± / q_{N-1}^±`
    pub beta_plus: Complex64,
    pub beta_minus: Complex64,
    /// `p_N^± / q_N^±`
    pub gamma_plus: Complex64,
    pub gamma_minus: Complex64,
    /// `p_n^- / p_n^+` at `n = N` and `n = N - 1`
    pub rho_n: Complex64,
    pub rho_prev: Complex64,
    /// `q_n^- / q_n^+` at `n = N` and `n = N - 1`
    pub sigma_n: Complex64,
    pub sigma_prev: Complex64,
}

pub fn kinematic_ratios(coeffs: &ReferenceCoeffs, n: usize) -> Result<KinematicRatios> {
    if n == 0 || n > coeffs.n_max() {
        return Err(Error::Domain(format!(
            "ratio index {n} outside 1..={}",
            coeffs.n_max()
        )));
    }
    let check = |z: Complex64, index: usize, what: &'static str| {
        if z.norm() > 0.0 && z.is_finite() {
            Ok(z)
        } else {
            Err(Error::VanishingCoefficient { index, what })
        }
    };
    let pp = check(coeffs.p(n, true), n, "p+")?;
    let pm = check(coeffs.p(n, false), n, "p-")?;
    let pp1 = check(coeffs.p(n - 1, true), n - 1, "p+")?;
    let pm1 = check(coeffs.p(n - 1, false), n - 1, "p-")?;
    let qp = check(coeffs.q(n, true), n, "q+")?;
    let qm = check(coeffs.q(n, false), n, "q-")?;
    let qp1 = check(coeffs.q(n - 1, true), n - 1, "q+")?;
    let qm1 = check(coeffs.q(n - 1, false), n - 1, "q-")?;
    Ok(KinematicRatios {
        n,
        alpha_plus: pp / pp1,
        alpha_minus: pm / pm1,
        beta_plus: qp / qp1,
        beta_minus: qm / qm1,
        gamma_plus: pp / qp,
        gamma_minus: pm / qm,
        rho_n: pm / pp,
        rho_prev: pm1 / pp1,
        sigma_n: qm / qp,
        sigma_prev: qm1 / qp1,
    })
}

/// Two-component spinor value `(upper, lower)`.
pub type Spinor = [f64; 2];

/// Exact sine-like solutions `(S+(x), S-(x))`.
pub fn sine_solutions(kin: &Kinematics, x: f64, norm_even: f64, norm_odd: f64) -> (Spinor, Spinor) {
    let (s, c) = (kin.k * x).sin_cos();
    (
        [norm_even * c, -norm_even * kin.omega * s],
        [norm_odd * s, norm_odd * kin.omega * c],
    )
}

/// Smooth summation weights for indices `start..=end`: flat over the first
/// 30% of the range, then tapered to zero at `end`.
///
/// Plain partial sums of the reference expansions converge only like
/// `n^(-1/2)`; the tapered sums converge faster than any power.
pub fn series_weights(start: usize, end: usize) -> Vec<f64> {
    if start > end {
        return Vec::new();
    }
    let len = end - start;
    if len == 0 {
        return vec![1.0];
    }
    let flat = 0.3 * len as f64;
    (0..=len)
        .map(|i| smooth_step((i as f64 - flat) / (len as f64 - flat)))
        .collect()
}

/// Values of the outer basis spinors `phi_n^±(x)` for all `n <= n_max`.
/// Returns `(even, odd)`, each a list of `[upper, lower]`.
pub fn outer_basis_values(kin: &Kinematics, n_max: usize, x: f64) -> (Vec<Spinor>, Vec<Spinor>) {
    let y = kin.scale * x;
    let h = hermite_functions(2 * n_max + 2, y);
    let kappa = kin.kappa();
    let lower = |j: usize| {
        let jf = j as f64;
        let down = if j > 0 { (jf / 2.0).sqrt() * h[j - 1] } else { 0.0 };
        kappa * (down - ((jf + 1.0) / 2.0).sqrt() * h[j + 1])
    };
    let even = (0..=n_max).map(|n| [h[2 * n], lower(2 * n)]).collect();
    let odd = (0..=n_max).map(|n| [h[2 * n + 1], lower(2 * n + 1)]).collect();
    (even, odd)
}

/// Weighted sums `sum_{n=start}^{n_max} w_n coef_n phi_n(x)` for the four
/// reference expansions, in the order `(S+, S-, C+, C-)`.
pub fn reference_sums(coeffs: &ReferenceCoeffs, start: usize, x: f64) -> [Spinor; 4] {
    let n_max = coeffs.n_max();
    let (even, odd) = outer_basis_values(&coeffs.kinematics, n_max, x);
    let w = series_weights(start, n_max);
    let mut out = [[0.0; 2]; 4];
    for (i, n) in (start..=n_max).enumerate() {
        for comp in 0..2 {
            out[0][comp] += w[i] * coeffs.s_plus[n] * even[n][comp];
            out[1][comp] += w[i] * coeffs.s_minus[n] * odd[n][comp];
            out[2][comp] += w[i] * coeffs.c_plus[n] * even[n][comp];
            out[3][comp] += w[i] * coeffs.c_minus[n] * odd[n][comp];
        }
    }
    out
}

/// Exact `S±(x)` together with the summed cosine-like solutions `C±(x)`.
#[derive(Debug, Clone, Copy)]
pub struct ReferenceValues {
    pub s_plus: Spinor,
    pub s_minus: Spinor,
    pub c_plus: Spinor,
    pub c_minus: Spinor,
}

pub fn eval_reference_wavefunctions(coeffs: &ReferenceCoeffs, x: f64) -> ReferenceValues {
    let (s_plus, s_minus) = sine_solutions(&coeffs.kinematics, x, coeffs.norm_even, coeffs.norm_odd);
    let sums = reference_sums(coeffs, 0, x);
    ReferenceValues {
        s_plus,
        s_minus,
        c_plus: sums[2],
        c_minus: sums[3],
    }
}

/// Tails `sum_{n >= N}` of the four reference expansions on a grid.
pub fn truncated_tail(coeffs: &ReferenceCoeffs, n: usize, grid: &[f64]) -> Vec<[Spinor; 4]> {
    grid.iter().map(|&x| reference_sums(coeffs, n, x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kinematics_definitions() {
        let kin = Kinematics::new(1.0, 1.25, 1.0).unwrap();
        assert!((kin.k - 0.75).abs() < 1e-15);
        assert!((kin.omega - 1.0 / 3.0).abs() < 1e-15);
        let massless = Kinematics::new(0.0, 2.0, 2.0).unwrap();
        assert_eq!((massless.k, massless.mu, massless.omega), (2.0, 1.0, 1.0));
        let near = Kinematics::new(1.0, 1.0 + 1e-12, 1.0).unwrap();
        assert!(near.k < 2e-6 && near.omega < 1e-6);
        assert!(Kinematics::new(1.0, 1.0, 1.0).is_err());
        assert!(Kinematics::new(1.0, 0.5, 1.0).is_err());
        assert!(Kinematics::new(1.0, 2.0, 0.0).is_err());
    }

    #[test]
    fn sine_coefficients_at_zero_index_and_zero_mu() {
        let kin = Kinematics::new(1.0, 1.7, 0.9).unwrap();
        let (sp, _) = sine_coefficients(&kin, 3, 2.0, 1.0);
        let expected = (2.0 * PI).sqrt() * 2.0 * PI.powf(-0.25) * (-0.5 * kin.mu * kin.mu).exp();
        assert!((sp[0] - expected).abs() < 1e-14);

        let mut zero = kin;
        zero.mu = 0.0;
        let (_, sm) = sine_coefficients(&zero, 10, 1.0, 1.0);
        assert!(sm.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn cosine_coefficients_small_mu_limits() {
        let mut kin = Kinematics::new(1.0, 1.5, 1.0).unwrap();
        kin.mu = 1e-9;
        let (cp, cm) = cosine_coefficients(&kin, 6, 1.0, 1.0).unwrap();
        assert!(cp.iter().all(|v| v.abs() < 1e-8));
        // B sqrt(2 Gamma(1) / Gamma(3/2))
        let expected = (2.0 / (PI.sqrt() / 2.0)).sqrt();
        assert!((cm[0] - expected).abs() < 1e-12);
    }

    #[test]
    fn sine_and_cosine_rows_are_consistent() {
        let kin = Kinematics::new(1.0, 2.3, 1.1).unwrap();
        let c = ReferenceCoeffs::new(&kin, 40).unwrap();
        let mu2 = kin.mu * kin.mu;
        let r = mu2 * c.s_plus[0] - (0.5 * c.s_plus[0] - 0.5f64.sqrt() * c.s_plus[1]);
        assert!(r.abs() < 1e-12);
        let r = mu2 * c.s_minus[0] - (1.5 * c.s_minus[0] - 1.5f64.sqrt() * c.s_minus[1]);
        assert!(r.abs() < 1e-12);
    }

    #[test]
    fn ratio_index_bounds() {
        let kin = Kinematics::new(1.0, 1.25, 1.0).unwrap();
        let c = ReferenceCoeffs::new(&kin, 20).unwrap();
        assert!(kinematic_ratios(&c, 0).is_err());
        assert!(kinematic_ratios(&c, 21).is_err());
        let r = kinematic_ratios(&c, 20).unwrap();
        assert!(r.alpha_plus.is_finite() && r.sigma_prev.is_finite());
        // rho_n = conj(p+) / p+ has unit modulus
        assert!((r.rho_n.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn sine_solutions_at_origin() {
        let kin = Kinematics::new(1.0, 1.25, 1.0).unwrap();
        let (sp, sm) = sine_solutions(&kin, 0.0, 2.0, 3.0);
        assert_eq!(sp, [2.0, 0.0]);
        assert_eq!(sm, [0.0, 3.0 * kin.omega]);
    }

    #[test]
    fn weights_shape() {
        let w = series_weights(10, 110);
        assert_eq!(w.len(), 101);
        assert_eq!(w[0], 1.0);
        assert_eq!(w[30], 1.0);
        assert_eq!(w[100], 0.0);
        assert!(w.windows(2).all(|p| p[1] <= p[0]));
    }
}
