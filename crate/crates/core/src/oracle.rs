//! Reference transmission and reflection by direct integration of the
//! Dirac (and Schrödinger) equation.

use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::potential::PotentialSpec;
use crate::refsol::Kinematics;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    LeftToRight,
    RightToLeft,
}

#[derive(Debug, Clone, Copy)]
pub struct OracleResult {
    pub energy: f64,
    pub t: Complex64,
    pub r: Complex64,
    pub unitarity_defect: f64,
    pub steps: u32,
    pub rejected_steps: u32,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct OracleOptions {
    pub tolerance: f64,
    pub direction: Direction,
    /// Free margin added on both sides of the potential range.
    pub margin: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-12,
            direction: Direction::LeftToRight,
            margin: 2.0,
        }
    }
}

/// Right-hand side of a first-order system with four real components.
trait Rhs {
    fn eval(&self, x: f64, y: &[f64; 4]) -> [f64; 4];
}

struct DiracSystem<'a> {
    spec: &'a PotentialSpec,
    mass: f64,
    energy: f64,
}

impl Rhs for DiracSystem<'_> {
    fn eval(&self, x: f64, y: &[f64; 4]) -> [f64; 4] {
        let (v, s, u) = (self.spec.v(x), self.spec.s(x), self.spec.u(x));
        let a = self.energy + self.mass - v + s;
        let b = self.mass + v + s - self.energy;
        let mut dy = [0.0; 4];
        for c in 0..2 {
            let (up, lo) = (y[2 * c], y[2 * c + 1]);
            dy[2 * c] = -u * up + a * lo;
            dy[2 * c + 1] = b * up + u * lo;
        }
        dy
    }
}

struct SchrodingerSystem<'a> {
    spec: &'a PotentialSpec,
    mass: f64,
    energy: f64,
}

impl Rhs for SchrodingerSystem<'_> {
    fn eval(&self, x: f64, y: &[f64; 4]) -> [f64; 4] {
        let w = 2.0 * self.mass * (self.spec.v_plus(x) - self.energy);
        [y[1], w * y[0], y[3], w * y[2]]
    }
}

#[derive(Default)]
struct Counts {
    steps: u32,
    rejected: u32,
}

const MAX_STEPS: u32 = 1_000_000;

// Dormand–Prince 5(4) tableau
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const BHAT: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Adaptive Dormand–Prince 5(4) integration of `y` from `a` to `b`.
fn integrate_segment(rhs: &impl Rhs, a: f64, b: f64, mut y: [f64; 4], tol: f64, counts: &mut Counts) -> Result<[f64; 4]> {
    let atol = tol * 1e-2;
    let length = b - a;
    let dir = length.signum();
    let mut x = a;
    let mut h = dir * (0.01 * length.abs()).min(0.05);
    let mut k = [[0.0; 4]; 7];
    k[0] = rhs.eval(x, &y);
    let mut steps = 0u32;
    while (b - x) * dir > 0.0 {
        if steps >= MAX_STEPS {
            return Err(Error::Integration(format!("more than {MAX_STEPS} steps at x = {x}")));
        }
        if h.abs() <= 1e-14 * (1.0 + x.abs()) {
            return Err(Error::Integration(format!("step size underflow at x = {x}")));
        }
        if (x + h - b) * dir > 0.0 {
            h = b - x;
        }
        for s in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                for c in 0..4 {
                    ys[c] += h * A[s][j] * kj[c];
                }
            }
            k[s] = rhs.eval(x + C[s] * h, &ys);
        }
        let mut y_new = y;
        let mut err: f64 = 0.0;
        for c in 0..4 {
            let mut hi = 0.0;
            let mut lo = 0.0;
            for s in 0..7 {
                hi += B[s] * k[s][c];
                lo += BHAT[s] * k[s][c];
            }
            y_new[c] += h * hi;
            let sc = atol + tol * y[c].abs().max(y_new[c].abs());
            err += (h * (hi - lo) / sc).powi(2);
        }
        let err = (err / 4.0).sqrt();
        steps += 1;
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        if err <= 1.0 {
            x = if (x + h - b) * dir >= 0.0 { b } else { x + h };
            y = y_new;
            k[0] = k[6];
            counts.steps += 1;
            h *= factor;
        } else {
            counts.rejected += 1;
            h *= factor.min(1.0);
        }
    }
    Ok(y)
}

/// Fundamental matrix across `points`, integrated piecewise between breakpoints.
fn propagate(rhs: &impl Rhs, points: &[f64], tol: f64, counts: &mut Counts) -> Result<Matrix2<f64>> {
    let mut state = [1.0, 0.0, 0.0, 1.0];
    for w in points.windows(2) {
        if w[0] != w[1] {
            state = integrate_segment(rhs, w[0], w[1], state, tol, counts)?;
        }
    }
    Ok(Matrix2::new(state[0], state[2], state[1], state[3]))
}

type C2 = [Complex64; 2];

fn apply(f: &Matrix2<f64>, v: C2) -> C2 {
    [
        v[0] * f[(0, 0)] + v[1] * f[(0, 1)],
        v[0] * f[(1, 0)] + v[1] * f[(1, 1)],
    ]
}

/// Solves `x a + y b = c` for `(x, y)`.
fn solve2(a: C2, b: C2, c: C2) -> Result<(Complex64, Complex64)> {
    let det = a[0] * b[1] - a[1] * b[0];
    let scale = (a[0].norm() + a[1].norm()) * (b[0].norm() + b[1].norm());
    if !(det.norm() > 1e-14 * scale) {
        return Err(Error::Integration("singular matching system".into()));
    }
    Ok(((c[0] * b[1] - c[1] * b[0]) / det, (a[0] * c[1] - a[1] * c[0]) / det))
}

/// Matching for solutions that behave like `exp(+-ikx) (1, +-i c)`.
fn match_plane_waves(f: &Matrix2<f64>, k: f64, c: f64, left: f64, right: f64, direction: Direction) -> Result<(Complex64, Complex64)> {
    let i = Complex64::i();
    let wave = |sign: f64, x: f64| {
        let e = (i * sign * k * x).exp();
        [e, i * sign * c * e]
    };
    let (incoming, reflected, transmitted) = (wave(1.0, left), wave(-1.0, left), wave(1.0, right));
    match direction {
        Direction::LeftToRight => {
            // F (in + R ref) = T tr
            let fin = apply(f, incoming);
            let fref = apply(f, reflected);
            let (r, t) = solve2(fref, transmitted.map(|z| -z), fin.map(|z| -z))?;
            Ok((t, r))
        }
        Direction::RightToLeft => {
            // here F maps right to left: F T tr = in + R ref
            let back = apply(f, transmitted);
            solve2(back, reflected.map(|z| -z), incoming)
        }
    }
}

fn grid(spec: &PotentialSpec, margin: f64, direction: Direction) -> Vec<f64> {
    let mut pts = vec![-spec.range - margin];
    pts.extend(spec.breakpoints());
    pts.push(spec.range + margin);
    if direction == Direction::RightToLeft {
        pts.reverse();
    }
    pts
}

/// Dirac `T(e)`, `R(e)` by integrating across `[-X - margin, X + margin]`.
pub fn integrate_dirac(spec: &PotentialSpec, kin: &Kinematics, options: &OracleOptions) -> Result<OracleResult> {
    let pts = grid(spec, options.margin, options.direction);
    let mut counts = Counts::default();
    let sys = DiracSystem {
        spec,
        mass: kin.mass,
        energy: kin.energy,
    };
    let f = propagate(&sys, &pts, options.tolerance, &mut counts)?;
    let (left, right) = (-spec.range - options.margin, spec.range + options.margin);
    let (t, r) = match_plane_waves(&f, kin.k, kin.omega, left, right, options.direction)?;
    Ok(OracleResult {
        energy: kin.energy,
        t,
        r,
        unitarity_defect: (t.norm_sqr() + r.norm_sqr() - 1.0).abs(),
        steps: counts.steps,
        rejected_steps: counts.rejected,
        tolerance: options.tolerance,
    })
}

/// Schrödinger `T`, `R` for kinetic energy `energy`, mass `mass` and potential `V + S`.
pub fn nonrelativistic_oracle(spec: &PotentialSpec, energy: f64, mass: f64, options: &OracleOptions) -> Result<OracleResult> {
    if !(energy > 0.0) || !(mass > 0.0) {
        return Err(Error::Domain(format!(
            "kinetic energy and mass must be positive, got {energy} and {mass}"
        )));
    }
    let k = (2.0 * mass * energy).sqrt();
    let pts = grid(spec, options.margin, options.direction);
    let mut counts = Counts::default();
    let sys = SchrodingerSystem { spec, mass, energy };
    let f = propagate(&sys, &pts, options.tolerance, &mut counts)?;
    let (left, right) = (-spec.range - options.margin, spec.range + options.margin);
    let (t, r) = match_plane_waves(&f, k, k, left, right, options.direction)?;
    Ok(OracleResult {
        energy,
        t,
        r,
        unitarity_defect: (t.norm_sqr() + r.norm_sqr() - 1.0).abs(),
        steps: counts.steps,
        rejected_steps: counts.rejected,
        tolerance: options.tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Profile;

    fn square(height: f64, half_width: f64) -> PotentialSpec {
        PotentialSpec::vector(Profile::SquareBarrier {
            height,
            half_width,
            center: 0.0,
        })
    }

    /// Three-region plane-wave matching for a Dirac square barrier.
    fn dirac_square_exact(mass: f64, energy: f64, v0: f64, a: f64) -> (Complex64, Complex64) {
        let i = Complex64::i();
        let k = (energy * energy - mass * mass).sqrt();
        let q = Complex64::new((energy - v0) * (energy - v0) - mass * mass, 0.0).sqrt();
        let lower = |wav: Complex64, v: f64| i * wav / (energy + mass - v);
        // columns: e^{+iqx}, e^{-iqx} spinors at x
        let basis = |wav: Complex64, v: f64, x: f64| {
            let ep = (i * wav * x).exp();
            let em = (-i * wav * x).exp();
            [[ep, em], [lower(wav, v) * ep, -lower(wav, v) * em]]
        };
        let inv = |m: [[Complex64; 2]; 2]| {
            let d = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            [[m[1][1] / d, -m[0][1] / d], [-m[1][0] / d, m[0][0] / d]]
        };
        let mul = |a: [[Complex64; 2]; 2], b: [[Complex64; 2]; 2]| {
            let mut c = [[Complex64::new(0.0, 0.0); 2]; 2];
            for r in 0..2 {
                for s in 0..2 {
                    c[r][s] = a[r][0] * b[0][s] + a[r][1] * b[1][s];
                }
            }
            c
        };
        let kc = Complex64::new(k, 0.0);
        // amplitudes right = M amplitudes left
        let m = mul(
            inv(basis(kc, 0.0, a)),
            mul(basis(q, v0, a), mul(inv(basis(q, v0, -a)), basis(kc, 0.0, -a))),
        );
        // left (1, R), right (T, 0)
        let r = -m[1][0] / m[1][1];
        let t = m[0][0] + m[0][1] * r;
        (t, r)
    }

    #[test]
    fn free_propagation() {
        let kin = Kinematics::new(1.0, 1.7, 1.0).unwrap();
        let res = integrate_dirac(&PotentialSpec::zero().with_range(1.0), &kin, &OracleOptions::default()).unwrap();
        assert!((res.t - 1.0).norm() < 1e-11 && res.r.norm() < 1e-11);
        let nr = nonrelativistic_oracle(&PotentialSpec::zero().with_range(1.0), 0.3, 1.0, &OracleOptions::default()).unwrap();
        assert!((nr.t - 1.0).norm() < 1e-11);
    }

    #[test]
    fn dirac_square_barrier_matches_piecewise_solution() {
        for (energy, v0) in [(1.8, 0.5), (1.5, 1.2), (1.3, 4.0)] {
            let kin = Kinematics::new(1.0, energy, 1.0).unwrap();
            let res = integrate_dirac(&square(v0, 1.0), &kin, &OracleOptions::default()).unwrap();
            let (t, r) = dirac_square_exact(1.0, energy, v0, 1.0);
            assert!((res.t - t).norm() < 1e-8, "e = {energy}: {} vs {t}", res.t);
            assert!((res.r - r).norm() < 1e-8);
            assert!(res.unitarity_defect < 1e-8);
        }
    }

    #[test]
    fn klein_zone_transmission() {
        let kin = Kinematics::new(1.0, 1.5, 1.0).unwrap();
        let res = integrate_dirac(&square(5.0, 0.7), &kin, &OracleOptions::default()).unwrap();
        let t2 = res.t.norm_sqr();
        assert!(t2 > 0.0 && t2 <= 1.0);
        assert!(res.unitarity_defect < 1e-8);
        let (t, _) = dirac_square_exact(1.0, 1.5, 5.0, 0.7);
        assert!((res.t - t).norm() < 1e-8);
    }

    #[test]
    fn schrodinger_square_barrier() {
        let (m, e, v0, a) = (1.0, 0.7, 1.2, 0.8);
        let res = nonrelativistic_oracle(&square(v0, a), e, m, &OracleOptions::default()).unwrap();
        let k = (2.0 * m * e).sqrt();
        let kappa = (2.0 * m * (v0 - e)).sqrt();
        let w = 2.0 * a;
        let exact = 1.0 / (1.0 + (v0 * v0 * (kappa * w).sinh().powi(2)) / (4.0 * e * (v0 - e)));
        assert!((res.t.norm_sqr() - exact).abs() < 1e-10);
        let _ = k;
    }

    #[test]
    fn reversibility() {
        let spec = PotentialSpec::new(
            Profile::Gaussian {
                height: 2.0,
                width: 1.0,
                center: 0.4,
            },
            Profile::Zero,
            Profile::OddGaussian {
                height: 0.7,
                width: 1.0,
                center: 0.0,
            },
        );
        let kin = Kinematics::new(1.0, 2.2, 1.0).unwrap();
        let a = integrate_dirac(&spec, &kin, &OracleOptions::default()).unwrap();
        let b = integrate_dirac(
            &spec,
            &kin,
            &OracleOptions {
                direction: Direction::RightToLeft,
                ..OracleOptions::default()
            },
        )
        .unwrap();
        assert!((a.t - b.t).norm() < 1e-8);
        assert!(a.unitarity_defect < 1e-8);
    }
}
