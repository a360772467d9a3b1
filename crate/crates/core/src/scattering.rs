//! Transmission and reflection amplitudes from the finite middle system
//! glued to the reference tails.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::basis::{derivative_element, BasisParams, HermiteSpinor, MiddleBasis, MiddleBasisKind};
use crate::error::{Error, Result};
use crate::greens::{diagonalize, GreenEigen};
use crate::mathkit::cached_gauss_hermite;
use crate::potential::{middle_potential_matrix, HermiteMatrices, Parity, PotentialSpec};
use crate::refsol::{kinematic_ratios, series_weights, KinematicRatios, Kinematics, ReferenceCoeffs};

/// How the two channel amplitudes are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Generalized 2x2 solve that keeps the potential acting on the
    /// reference tail (when `tail_correction` is on).
    Dressed,
    /// Closed forms built from the four corner Green elements only.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathChoice {
    /// Decoupled when the potential is even and the corner coupling vanishes.
    Auto,
    Coupled,
    Decoupled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Path {
    Coupled,
    Decoupled,
}

impl Path {
    pub fn name(self) -> &'static str {
        match self {
            Path::Coupled => "coupled",
            Path::Decoupled => "decoupled",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub method: Method,
    pub tail_correction: bool,
    /// Number of tail terms beyond `N`; default `2N + 40`.
    pub tail_length: Option<usize>,
    /// Quadrature order for tail matrix elements; default `2(N + L) + 44`.
    pub tail_quadrature: Option<usize>,
    pub path: PathChoice,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            method: Method::Dressed,
            tail_correction: true,
            tail_length: None,
            tail_quadrature: None,
            path: PathChoice::Auto,
        }
    }
}

/// Corner elements of the middle Green function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CornerGreens {
    pub energy: f64,
    /// even corner, even corner
    pub pp: f64,
    /// odd corner, odd corner
    pub mm: f64,
    /// even corner, odd corner
    pub pm: f64,
    /// odd corner, even corner
    pub mp: f64,
}

impl CornerGreens {
    pub fn coupling(&self) -> f64 {
        self.pm.abs().max(self.mp.abs())
    }

    pub fn decoupled(&self) -> Self {
        Self {
            pm: 0.0,
            mp: 0.0,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Flags {
    /// Energy moved off a middle-Hamiltonian eigenvalue.
    pub nudged: bool,
    /// `| |T|^2 + |R|^2 - 1 | > 1e-3`.
    pub nonunitary: bool,
}

impl fmt::Display for Flags {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.nudged {
            parts.push("nudged");
        }
        if self.nonunitary {
            parts.push("nonunitary");
        }
        write!(f, "{}", parts.join(";"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringResult {
    /// Energy actually used (after a possible nudge).
    pub energy: f64,
    pub requested_energy: f64,
    pub k: f64,
    pub t: Complex64,
    pub r: Complex64,
    pub w_plus: Complex64,
    pub w_minus: Complex64,
    /// `arg(W±)/2`, decoupled path only.
    pub theta_plus: Option<f64>,
    pub theta_minus: Option<f64>,
    pub unitarity_defect: f64,
    pub coupling: f64,
    pub path: Path,
    pub flags: Flags,
}

impl ScatteringResult {
    fn new(energy: f64, requested_energy: f64, k: f64, w: (Complex64, Complex64), path: Path, coupling: f64, nudged: bool) -> Self {
        let (w_plus, w_minus) = w;
        let t = 0.5 * (w_plus + w_minus);
        let r = 0.5 * (w_plus - w_minus);
        let unitarity_defect = (t.norm_sqr() + r.norm_sqr() - 1.0).abs();
        let (theta_plus, theta_minus) = match path {
            Path::Decoupled => (Some(0.5 * w_plus.arg()), Some(0.5 * w_minus.arg())),
            Path::Coupled => (None, None),
        };
        Self {
            energy,
            requested_energy,
            k,
            t,
            r,
            w_plus,
            w_minus,
            theta_plus,
            theta_minus,
            unitarity_defect,
            coupling,
            path,
            flags: Flags {
                nudged,
                nonunitary: unitarity_defect > 1e-3,
            },
        }
    }

    pub fn transmission(&self) -> f64 {
        self.t.norm_sqr()
    }

    pub fn reflection(&self) -> f64 {
        self.r.norm_sqr()
    }
}

fn check_denominator(d: Complex64, energy: f64) -> Result<Complex64> {
    if d.norm() < 1e-300 || !d.is_finite() {
        Err(Error::Singular { energy })
    } else {
        Ok(d)
    }
}

/// Channel amplitudes for decoupled channels.
pub fn amplitudes_decoupled(cg: &CornerGreens, kr: &KinematicRatios, j_plus: f64, j_minus: f64) -> Result<(Complex64, Complex64)> {
    let dp = check_denominator(1.0 + cg.pp * j_plus * kr.alpha_plus, cg.energy)?;
    let dm = check_denominator(1.0 + cg.mm * j_minus * kr.beta_plus, cg.energy)?;
    let w_plus = -kr.rho_prev * (1.0 + cg.pp * j_plus * kr.alpha_minus) / dp;
    let w_minus = kr.sigma_prev * (1.0 + cg.mm * j_minus * kr.beta_minus) / dm;
    Ok((w_plus, w_minus))
}

/// Channel amplitudes including the cross-channel corner elements.
pub fn amplitudes_coupled(cg: &CornerGreens, kr: &KinematicRatios, j_plus: f64, j_minus: f64) -> Result<(Complex64, Complex64)> {
    let dp = check_denominator(1.0 + cg.pp * j_plus * kr.alpha_plus, cg.energy)?;
    let dm = check_denominator(1.0 + cg.mm * j_minus * kr.beta_plus, cg.energy)?;
    let lead = check_denominator(
        1.0 - kr.alpha_plus * kr.beta_plus * j_plus * j_minus * cg.pm * cg.mp / (dp * dm),
        cg.energy,
    )?;
    let a = -kr.rho_prev * (1.0 + cg.pp * j_plus * kr.alpha_minus) / dp;
    let b = kr.sigma_prev * (1.0 + cg.mm * j_minus * kr.beta_minus) / dm;
    let gamma = kr.gamma_plus;
    let x_plus = cg.pm * j_minus * kr.alpha_plus / dp;
    let x_minus = cg.mp * j_plus * kr.beta_plus / dm;
    let w_plus = (a + x_plus / gamma * (kr.sigma_n - b + gamma * kr.rho_n * x_minus)) / lead;
    let w_minus = (b - gamma * x_minus * (kr.rho_n + a + kr.sigma_n / gamma * x_plus)) / lead;
    Ok((w_plus, w_minus))
}

/// Energy-independent middle system `H = H0 + V`, `Omega`.
#[derive(Debug, Clone)]
pub struct MiddleSystem {
    pub basis: MiddleBasis,
    pub h0: DMatrix<f64>,
    pub potential: DMatrix<f64>,
    pub overlap: Vec<f64>,
    pub eigen: GreenEigen,
}

impl MiddleSystem {
    pub fn new(mass: f64, spec: &PotentialSpec, params: &BasisParams) -> Result<Self> {
        let basis = MiddleBasis::new(params.kind, params.size);
        let (h0, omega) = basis.h0_overlap(mass, params.scale);
        let overlap: Vec<f64> = omega.diagonal().iter().copied().collect();
        let rule = cached_gauss_hermite(params.quadrature_order)?;
        let potential = if spec.is_zero() {
            DMatrix::zeros(basis.dim(), basis.dim())
        } else {
            let hm = HermiteMatrices::new(spec, params.scale, &rule, basis.max_index() + 1)?;
            middle_potential_matrix(&basis, &hm)?
        };
        let eigen = diagonalize(&(&h0 + &potential), &overlap)?;
        Ok(Self {
            basis,
            h0,
            potential,
            overlap,
            eigen,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn hamiltonian(&self) -> DMatrix<f64> {
        &self.h0 + &self.potential
    }

    pub fn corner_greens(&self, z: f64) -> Result<CornerGreens> {
        let w = self.eigen.resolvent_weights(z)?;
        let (e, o) = (self.basis.even_corner, self.basis.odd_corner);
        Ok(CornerGreens {
            energy: z,
            pp: self.eigen.element_with(&w, e, e),
            mm: self.eigen.element_with(&w, o, o),
            pm: self.eigen.element_with(&w, e, o),
            mp: self.eigen.element_with(&w, o, e),
        })
    }

    /// Inner products `<xi_i | (up, lo)>` for Hermite coefficient vectors.
    fn project(&self, up: &[f64], lo: &[f64]) -> DVector<f64> {
        let take = |c: &[(usize, f64)], v: &[f64]| c.iter().map(|&(j, a)| a * v.get(j).copied().unwrap_or(0.0)).sum::<f64>();
        DVector::from_iterator(
            self.dim(),
            self.basis.functions.iter().map(|f: &HermiteSpinor| take(&f.upper, up) + take(&f.lower, lo)),
        )
    }
}

/// `D x` with `D_ij = <h_i | d/dy h_j>`, truncated to `x.len()`.
fn apply_derivative(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|i| {
            let mut s = 0.0;
            if i + 1 < n {
                s += derivative_element(i, i + 1) * x[i + 1];
            }
            if i > 0 {
                s += derivative_element(i, i - 1) * x[i - 1];
            }
            s
        })
        .collect()
}

fn mat_vec_rows(m: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    let cols = m.ncols().min(x.len());
    (0..m.nrows())
        .map(|i| (0..cols).map(|j| m[(i, j)] * x[j]).sum())
        .collect()
}

/// The four channel sources and the two boundary rows at one energy.
struct Sources {
    u_plus: DVector<Complex64>,
    u_minus: DVector<Complex64>,
    v_plus: DVector<Complex64>,
    v_minus: DVector<Complex64>,
    row_even: DVector<f64>,
    row_odd: DVector<f64>,
}

/// Solver for one mass, potential and basis; reusable across energies.
pub struct Solver {
    pub mass: f64,
    pub spec: PotentialSpec,
    pub params: BasisParams,
    pub options: SolverOptions,
    pub parity: Parity,
    pub middle: MiddleSystem,
    tail: Option<HermiteMatrices>,
    tail_length: usize,
}

impl fmt::Debug for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Solver")
            .field("mass", &self.mass)
            .field("params", &self.params)
            .field("options", &self.options)
            .field("parity", &self.parity)
            .finish()
    }
}

impl Solver {
    pub fn new(mass: f64, spec: PotentialSpec, params: BasisParams, options: SolverOptions) -> Result<Self> {
        if !(mass >= 0.0) {
            return Err(Error::Domain(format!("mass must be nonnegative, got {mass}")));
        }
        let parity = spec.effective_parity()?;
        let middle = MiddleSystem::new(mass, &spec, &params)?;
        let size = params.size;
        let use_tail = options.tail_correction && options.method == Method::Dressed;
        let tail_length = if use_tail {
            options.tail_length.unwrap_or(2 * size + 40)
        } else {
            0
        };
        let tail = if use_tail && !spec.is_zero() {
            let cols = 2 * (size + tail_length) + 4;
            let order = options.tail_quadrature.unwrap_or(cols + 40).max(cols);
            let rule = cached_gauss_hermite(order)?;
            let rows = middle.basis.max_index() + 1;
            Some(HermiteMatrices::block(&spec, params.scale, &rule, rows, cols)?)
        } else {
            None
        };
        Ok(Self {
            mass,
            spec,
            params,
            options,
            parity,
            middle,
            tail,
            tail_length,
        })
    }

    pub fn with_defaults(mass: f64, spec: PotentialSpec, scale: f64, size: usize) -> Result<Self> {
        let params = BasisParams::new(scale, size, MiddleBasisKind::Spinor)?;
        Self::new(mass, spec, params, SolverOptions::default())
    }

    pub fn size(&self) -> usize {
        self.params.size
    }

    pub fn kinematics(&self, energy: f64) -> Result<Kinematics> {
        Kinematics::new(self.mass, energy, self.params.scale)
    }

    /// Number of reference coefficients needed per channel.
    fn coefficient_count(&self) -> usize {
        self.size() + self.tail_length.max(1)
    }

    /// `<xi | (H - e) | sum_n c_n phi_n>` for a Hermite vector `x` of upper
    /// components; the potential part is dropped when `with_potential` is false.
    fn column(&self, kin: &Kinematics, x: &[f64], with_potential: bool) -> DVector<f64> {
        let (m, e, lam, kappa) = (self.mass, kin.energy, kin.scale, kin.kappa());
        let lo: Vec<f64> = apply_derivative(x).into_iter().map(|v| kappa * v).collect();
        let d_lo = apply_derivative(&lo);
        let d_up = apply_derivative(x);
        let mut up_out: Vec<f64> = (0..x.len()).map(|i| (m - e) * x[i] - lam * d_lo[i]).collect();
        let mut lo_out: Vec<f64> = (0..x.len()).map(|i| lam * d_up[i] - (m + e) * lo[i]).collect();
        if with_potential {
            if let Some(t) = &self.tail {
                let vx = mat_vec_rows(&t.v_plus, x);
                let ul = mat_vec_rows(&t.u, &lo);
                let ux = mat_vec_rows(&t.u, x);
                let vl = mat_vec_rows(&t.v_minus, &lo);
                for i in 0..vx.len() {
                    up_out[i] += vx[i] + ul[i];
                    lo_out[i] += ux[i] + vl[i];
                }
            }
        }
        self.middle.project(&up_out, &lo_out)
    }

    fn sources(&self, kin: &Kinematics, coeffs: &ReferenceCoeffs) -> Sources {
        let size = self.size();
        let with_tail = self.tail.is_some();
        let last = if with_tail { size + self.tail_length } else { size };
        let len = 2 * last + 4;
        let w = series_weights(size, last);
        let mut xs = [vec![0.0; len], vec![0.0; len], vec![0.0; len], vec![0.0; len]];
        for (i, n) in (size..=last).enumerate() {
            xs[0][2 * n] = w[i] * coeffs.s_plus[n];
            xs[1][2 * n] = w[i] * coeffs.c_plus[n];
            xs[2][2 * n + 1] = w[i] * coeffs.s_minus[n];
            xs[3][2 * n + 1] = w[i] * coeffs.c_minus[n];
        }
        let [es, ec, os, oc] = xs.map(|x| self.column(kin, &x, with_tail));
        let (a2, b2) = (2.0 * coeffs.norm_even, 2.0 * coeffs.norm_odd);
        let combine = |re: &DVector<f64>, im: &DVector<f64>, sign: f64, norm: f64| {
            DVector::from_iterator(
                re.len(),
                re.iter().zip(im.iter()).map(|(&r, &i)| Complex64::new(r, sign * i) / norm),
            )
        };
        let mut unit = vec![0.0; 2 * size + 4];
        unit[2 * size] = 1.0;
        let row_even = self.column(kin, &unit, false);
        unit[2 * size] = 0.0;
        unit[2 * size + 1] = 1.0;
        let row_odd = self.column(kin, &unit, false);
        Sources {
            u_plus: combine(&es, &ec, 1.0, a2),
            u_minus: combine(&es, &ec, -1.0, a2),
            v_plus: combine(&oc, &os, 1.0, b2),
            v_minus: combine(&oc, &os, -1.0, b2),
            row_even,
            row_odd,
        }
    }

    /// Energy actually used and whether it was moved off a pole.
    fn regular_energy(&self, energy: f64) -> Result<(f64, bool)> {
        match self.middle.eigen.check_regular(energy) {
            Ok(()) => Ok((energy, false)),
            Err(Error::Pole { .. }) => {
                let nudged = energy + 1e-8 * self.mass.max(f64::MIN_POSITIVE.sqrt());
                self.middle.eigen.check_regular(nudged)?;
                Ok((nudged, true))
            }
            Err(e) => Err(e),
        }
    }

    fn choose_path(&self, cg: &CornerGreens) -> Path {
        match self.options.path {
            PathChoice::Coupled => Path::Coupled,
            PathChoice::Decoupled => Path::Decoupled,
            PathChoice::Auto => {
                let scale = cg.pp.abs().max(cg.mm.abs());
                if self.parity == Parity::Even && cg.coupling() <= 1e-10 * scale {
                    Path::Decoupled
                } else {
                    Path::Coupled
                }
            }
        }
    }

    pub fn corner_greens(&self, energy: f64) -> Result<CornerGreens> {
        self.middle.corner_greens(energy)
    }

    pub fn solve(&self, energy: f64) -> Result<ScatteringResult> {
        self.solve_detailed(energy).map(|(r, _)| r)
    }

    /// Result together with the middle expansion coefficients.
    pub fn solve_detailed(&self, energy: f64) -> Result<(ScatteringResult, DVector<Complex64>)> {
        self.kinematics(energy)?;
        let (e, nudged) = self.regular_energy(energy)?;
        let kin = self.kinematics(e)?;
        let coeffs = ReferenceCoeffs::new(&kin, self.coefficient_count())?;
        let cg = self.middle.corner_greens(e)?;
        let path = self.choose_path(&cg);
        let src = self.sources(&kin, &coeffs);
        let w = match self.options.method {
            Method::Literal => {
                let kr = kinematic_ratios(&coeffs, self.size())?;
                let (jp, jm) = crate::basis::boundary_couplings(&kin, self.size());
                match path {
                    Path::Decoupled => amplitudes_decoupled(&cg, &kr, jp, jm)?,
                    Path::Coupled => amplitudes_coupled(&cg, &kr, jp, jm)?,
                }
            }
            Method::Dressed => self.dressed_amplitudes(&kin, &coeffs, &src, path)?,
        };
        let a = self.middle_coefficients(e, &src, w)?;
        Ok((ScatteringResult::new(e, energy, kin.k, w, path, cg.coupling(), nudged), a))
    }

    fn dressed_amplitudes(&self, kin: &Kinematics, coeffs: &ReferenceCoeffs, src: &Sources, path: Path) -> Result<(Complex64, Complex64)> {
        let n = self.size();
        let e = kin.energy;
        let (jp, jm) = crate::basis::boundary_couplings(kin, n);
        let w = self.middle.eigen.resolvent_weights(e)?;
        let g_even = self.middle.eigen.apply_with(&w, &src.row_even);
        let g_odd = self.middle.eigen.apply_with(&w, &src.row_odd);
        let dot = |g: &DVector<f64>, v: &DVector<Complex64>| g.iter().zip(v.iter()).map(|(&a, &b)| b * a).sum::<Complex64>();
        let (pp1, pm1) = (coeffs.p(n - 1, true), coeffs.p(n - 1, false));
        let (qp1, qm1) = (coeffs.q(n - 1, true), coeffs.q(n - 1, false));
        let cross = if path == Path::Coupled { 1.0 } else { 0.0 };
        let a11 = jp * pp1 + dot(&g_even, &src.u_plus);
        let a12 = cross * dot(&g_even, &src.v_plus);
        let b1 = -jp * pm1 - dot(&g_even, &src.u_minus) + cross * dot(&g_even, &src.v_minus);
        let a21 = cross * dot(&g_odd, &src.u_plus);
        let a22 = jm * qp1 + dot(&g_odd, &src.v_plus);
        let b2 = jm * qm1 - cross * dot(&g_odd, &src.u_minus) + dot(&g_odd, &src.v_minus);
        let det = check_denominator(a11 * a22 - a12 * a21, e)?;
        Ok(((b1 * a22 - a12 * b2) / det, (a11 * b2 - a21 * b1) / det))
    }

    /// `a = -G (W+ u+ + u- + W- v+ - v-)`.
    fn middle_coefficients(&self, e: f64, src: &Sources, w: (Complex64, Complex64)) -> Result<DVector<Complex64>> {
        let rhs: DVector<Complex64> = &src.u_plus * w.0 + &src.u_minus + &src.v_plus * w.1 - &src.v_minus;
        let re = DVector::from_iterator(rhs.len(), rhs.iter().map(|z| z.re));
        let im = DVector::from_iterator(rhs.len(), rhs.iter().map(|z| z.im));
        let wts = self.middle.eigen.resolvent_weights(e)?;
        let gr = self.middle.eigen.apply_with(&wts, &re);
        let gi = self.middle.eigen.apply_with(&wts, &im);
        Ok(DVector::from_iterator(
            rhs.len(),
            gr.iter().zip(gi.iter()).map(|(&r, &i)| -Complex64::new(r, i)),
        ))
    }

    /// Residual `max |(H - e Omega) a + sources|` of the middle rows.
    pub fn middle_residual(&self, result: &ScatteringResult, a: &DVector<Complex64>) -> Result<f64> {
        let kin = self.kinematics(result.energy)?;
        let coeffs = ReferenceCoeffs::new(&kin, self.coefficient_count())?;
        let src = self.sources(&kin, &coeffs);
        let mut lhs = self.middle.hamiltonian().map(Complex64::from) * a;
        for (i, v) in lhs.iter_mut().enumerate() {
            *v -= result.energy * self.middle.overlap[i] * a[i];
        }
        let total = lhs + &src.u_plus * result.w_plus + &src.u_minus + &src.v_plus * result.w_minus - &src.v_minus;
        Ok(total.iter().fold(0.0, |m, z| m.max(z.norm())))
    }

    /// Results in grid order; per-point failures are kept.
    pub fn energy_sweep(&self, energies: &[f64]) -> Vec<Result<ScatteringResult>> {
        let mut out: Vec<Result<ScatteringResult>> = energies.par_iter().map(|&e| self.solve(e)).collect();
        unwrap_phases(&mut out);
        out
    }
}

/// Shifts phases by multiples of pi so that they vary continuously along the sweep.
fn unwrap_phases(results: &mut [Result<ScatteringResult>]) {
    let pi = std::f64::consts::PI;
    let mut prev: (Option<f64>, Option<f64>) = (None, None);
    for r in results.iter_mut().flatten() {
        let fix = |theta: &mut Option<f64>, last: &mut Option<f64>| {
            if let Some(t) = theta.as_mut() {
                if let Some(p) = *last {
                    *t += pi * ((p - *t) / pi).round();
                }
                *last = Some(*t);
            }
        };
        fix(&mut r.theta_plus, &mut prev.0);
        fix(&mut r.theta_minus, &mut prev.1);
    }
}

/// Longest run of consecutive grid points whose values spread less than `tol`.
/// Returns `(start, end)` inclusive and the spread.
pub fn longest_flat_run(values: &[f64], tol: f64) -> Option<(usize, usize, f64)> {
    let mut best: Option<(usize, usize, f64)> = None;
    for i in 0..values.len() {
        if !values[i].is_finite() {
            continue;
        }
        let (mut lo, mut hi) = (values[i], values[i]);
        for (j, &v) in values.iter().enumerate().skip(i) {
            if !v.is_finite() {
                break;
            }
            lo = lo.min(v);
            hi = hi.max(v);
            if hi - lo >= tol {
                break;
            }
            if best.is_none_or(|(a, b, _)| j - i > b - a) {
                best = Some((i, j, hi - lo));
            }
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlateauEntry {
    pub size: usize,
    pub tau: f64,
    /// `|T|^2` on the scale grid for this `tau`; NaN where the solve failed.
    pub values: Vec<f64>,
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    pub width: f64,
    pub spread: f64,
    /// `|T|^2` at the grid point nearest the plateau centre.
    pub center_value: f64,
    pub center_lambda: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlateauReport {
    pub energy: f64,
    pub tolerance: f64,
    pub scales: Vec<f64>,
    /// Best `tau` row per basis size.
    pub entries: Vec<PlateauEntry>,
    /// Widths non-decreasing with basis size.
    pub growing: bool,
}

/// Grids and tolerance of a plateau scan.
#[derive(Debug, Clone, PartialEq)]
pub struct PlateauGrid {
    pub energy: f64,
    pub scales: Vec<f64>,
    /// Ignored for the spinor basis.
    pub taus: Vec<f64>,
    pub sizes: Vec<usize>,
    pub kind: MiddleBasisKind,
    /// Largest spread of `|T|^2` inside a plateau.
    pub tolerance: f64,
}

/// Stability scan of `|T(e0)|^2` over scale and `tau` grids for several
/// basis sizes.
pub fn plateau_scan(mass: f64, spec: &PotentialSpec, options: SolverOptions, grid: &PlateauGrid) -> Result<PlateauReport> {
    let PlateauGrid {
        energy,
        ref scales,
        ref taus,
        ref sizes,
        kind,
        tolerance,
    } = *grid;
    if scales.is_empty() || sizes.is_empty() {
        return Err(Error::Domain("plateau grids must be non-empty".into()));
    }
    let taus: Vec<f64> = match kind {
        MiddleBasisKind::Spinor => vec![f64::NAN],
        MiddleBasisKind::KineticBalance { .. } if taus.is_empty() => {
            return Err(Error::Domain("tau grid must be non-empty".into()))
        }
        MiddleBasisKind::KineticBalance { .. } => taus.to_vec(),
    };
    let mut entries = Vec::new();
    for &size in sizes.iter() {
        let mut best: Option<PlateauEntry> = None;
        for &tau in &taus {
            let values: Vec<f64> = scales
                .par_iter()
                .map(|&scale| {
                    let kind = match kind {
                        MiddleBasisKind::Spinor => MiddleBasisKind::Spinor,
                        MiddleBasisKind::KineticBalance { .. } => MiddleBasisKind::KineticBalance { tau },
                    };
                    BasisParams::new(scale, size, kind)
                        .and_then(|p| Solver::new(mass, spec.clone(), p, options))
                        .and_then(|s| s.solve(energy))
                        .map(|r| r.transmission())
                        .unwrap_or(f64::NAN)
                })
                .collect();
            let entry = match longest_flat_run(&values, tolerance) {
                Some((i, j, spread)) => {
                    let c = (i + j) / 2;
                    PlateauEntry {
                        size,
                        tau,
                        lambda_lo: scales[i],
                        lambda_hi: scales[j],
                        width: scales[j] - scales[i],
                        spread,
                        center_value: values[c],
                        center_lambda: scales[c],
                        values,
                    }
                }
                None => PlateauEntry {
                    size,
                    tau,
                    lambda_lo: f64::NAN,
                    lambda_hi: f64::NAN,
                    width: 0.0,
                    spread: f64::INFINITY,
                    center_value: f64::NAN,
                    center_lambda: f64::NAN,
                    values,
                },
            };
            if best.as_ref().is_none_or(|b| entry.width > b.width) {
                best = Some(entry);
            }
        }
        entries.extend(best);
    }
    let growing = entries.windows(2).all(|w| w[1].width >= w[0].width);
    Ok(PlateauReport {
        energy,
        tolerance,
        scales: scales.to_vec(),
        entries,
        growing,
    })
}
