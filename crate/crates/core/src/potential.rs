//! Potentials `V` (vector), `S` (scalar) and `U` (pseudo-scalar) and their
//! Hermite-basis matrix elements.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::basis::{Channel, MiddleBasis, MiddleBasisIndex};
use crate::error::{Error, Result};
use crate::mathkit::QuadratureRule;

/// Natural cubic spline through strictly increasing abscissae. Zero outside
/// the table.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n < 2 || y.len() != n {
            return Err(Error::Domain(format!(
                "spline needs at least two matching samples, got {} and {}",
                n,
                y.len()
            )));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) || x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::Domain("spline abscissae must be finite and strictly increasing".into()));
        }
        // second derivatives, natural end conditions, Thomas algorithm
        let mut m = vec![0.0; n];
        if n > 2 {
            let k = n - 2;
            let mut diag = vec![0.0; k];
            let mut rhs = vec![0.0; k];
            let mut sup = vec![0.0; k];
            for i in 0..k {
                let h0 = x[i + 1] - x[i];
                let h1 = x[i + 2] - x[i + 1];
                diag[i] = 2.0 * (h0 + h1);
                sup[i] = h1;
                rhs[i] = 6.0 * ((y[i + 2] - y[i + 1]) / h1 - (y[i + 1] - y[i]) / h0);
            }
            for i in 1..k {
                let sub = x[i + 1] - x[i];
                let f = sub / diag[i - 1];
                diag[i] -= f * sup[i - 1];
                rhs[i] -= f * rhs[i - 1];
            }
            m[k] = rhs[k - 1] / diag[k - 1];
            for i in (0..k - 1).rev() {
                m[i + 1] = (rhs[i] - sup[i] * m[i + 2]) / diag[i];
            }
        }
        Ok(Self { x, y, m })
    }

    /// Reads whitespace- or comma-separated `x value` rows; `#` starts a comment.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .collect();
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|_| Error::Config {
                    line: i + 1,
                    message: format!("{}: cannot parse '{s}'", path.display()),
                })
            };
            if fields.len() != 2 {
                return Err(Error::Config {
                    line: i + 1,
                    message: format!("{}: expected two columns", path.display()),
                });
            }
            xs.push(parse(fields[0])?);
            ys.push(parse(fields[1])?);
        }
        Self::new(xs, ys)
    }

    pub fn extent(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    pub fn eval(&self, t: f64) -> f64 {
        let (lo, hi) = self.extent();
        if !(t >= lo && t <= hi) {
            return 0.0;
        }
        let i = match self.x.partition_point(|&v| v <= t) {
            0 => 0,
            p => (p - 1).min(self.x.len() - 2),
        };
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }
}

pub type CustomFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// One scalar potential profile.
#[derive(Clone)]
pub enum Profile {
    Zero,
    /// `height exp(-((x - center)/width)^2)`
    Gaussian { height: f64, width: f64, center: f64 },
    /// `height (x - center)/width exp(-((x - center)/width)^2)`
    OddGaussian { height: f64, width: f64, center: f64 },
    /// `height` on `|x - center| < half_width`, zero elsewhere.
    SquareBarrier { height: f64, half_width: f64, center: f64 },
    /// Barrier with Fermi-function edges of thickness `edge`.
    SmoothedStep {
        height: f64,
        half_width: f64,
        edge: f64,
        center: f64,
    },
    Tabulated(Arc<CubicSpline>),
    /// Arbitrary function; `reach` bounds its support.
    Custom { f: CustomFn, reach: f64 },
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Zero => write!(f, "Zero"),
            Profile::Gaussian { height, width, center } => {
                write!(f, "Gaussian({height}, {width}, {center})")
            }
            Profile::OddGaussian { height, width, center } => {
                write!(f, "OddGaussian({height}, {width}, {center})")
            }
            Profile::SquareBarrier {
                height,
                half_width,
                center,
            } => write!(f, "SquareBarrier({height}, {half_width}, {center})"),
            Profile::SmoothedStep {
                height,
                half_width,
                edge,
                center,
            } => write!(f, "SmoothedStep({height}, {half_width}, {edge}, {center})"),
            Profile::Tabulated(s) => write!(f, "Tabulated({:?})", s.extent()),
            Profile::Custom { reach, .. } => write!(f, "Custom(reach {reach})"),
        }
    }
}

fn fermi(t: f64) -> f64 {
    if t > 0.0 {
        let e = (-t).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + t.exp())
    }
}

impl Profile {
    pub fn custom(reach: f64, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Profile::Custom { f: Arc::new(f), reach }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Profile::Zero => 0.0,
            Profile::Gaussian { height, width, center } => {
                let t = (x - center) / width;
                height * (-t * t).exp()
            }
            Profile::OddGaussian { height, width, center } => {
                let t = (x - center) / width;
                height * t * (-t * t).exp()
            }
            Profile::SquareBarrier {
                height,
                half_width,
                center,
            } => {
                if (x - center).abs() < half_width {
                    height
                } else {
                    0.0
                }
            }
            Profile::SmoothedStep {
                height,
                half_width,
                edge,
                center,
            } => height * fermi(((x - center).abs() - half_width) / edge),
            Profile::Tabulated(ref s) => s.eval(x),
            Profile::Custom { ref f, .. } => f(x),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Profile::Zero)
    }

    /// Points where the profile or its low derivatives jump.
    pub fn breakpoints(&self) -> Vec<f64> {
        match *self {
            Profile::SquareBarrier { half_width, center, .. } => vec![center - half_width, center + half_width],
            Profile::Tabulated(ref s) => {
                let (a, b) = s.extent();
                vec![a, b]
            }
            _ => Vec::new(),
        }
    }

    /// Distance from the origin beyond which `|f| < tol`.
    pub fn reach(&self, tol: f64) -> f64 {
        let decay = |height: f64, width: f64| {
            let ratio = height.abs() / tol;
            if ratio > 1.0 {
                width.abs() * (ratio.ln() + 2.0).sqrt()
            } else {
                0.0
            }
        };
        match *self {
            Profile::Zero => 0.0,
            Profile::Gaussian { height, width, center } | Profile::OddGaussian { height, width, center } => {
                center.abs() + decay(height, width)
            }
            Profile::SquareBarrier { half_width, center, .. } => center.abs() + half_width,
            Profile::SmoothedStep {
                height,
                half_width,
                edge,
                center,
            } => {
                let ratio = height.abs() / tol;
                center.abs() + half_width + if ratio > 1.0 { edge * ratio.ln() } else { 0.0 }
            }
            Profile::Tabulated(ref s) => {
                let (a, b) = s.extent();
                a.abs().max(b.abs())
            }
            Profile::Custom { reach, .. } => reach,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
    None,
}

impl Parity {
    pub fn name(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
            Parity::None => "none",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParityDecl {
    Auto,
    Declared(Parity),
}

/// The three potential profiles with a support bound `range` beyond which
/// they are treated as zero.
#[derive(Debug, Clone)]
pub struct PotentialSpec {
    pub v: Profile,
    pub s: Profile,
    pub u: Profile,
    pub range: f64,
    pub parity: ParityDecl,
}

const REACH_TOL: f64 = 1e-14;

impl PotentialSpec {
    /// Range chosen from the profiles so that the clamp is invisible at 1e-14.
    pub fn new(v: Profile, s: Profile, u: Profile) -> Self {
        let range = [&v, &s, &u]
            .iter()
            .map(|p| p.reach(REACH_TOL))
            .fold(0.0, f64::max);
        Self {
            v,
            s,
            u,
            range,
            parity: ParityDecl::Auto,
        }
    }

    pub fn zero() -> Self {
        Self::new(Profile::Zero, Profile::Zero, Profile::Zero)
    }

    pub fn vector(v: Profile) -> Self {
        Self::new(v, Profile::Zero, Profile::Zero)
    }

    pub fn with_range(mut self, range: f64) -> Self {
        self.range = range;
        self
    }

    pub fn with_parity(mut self, parity: ParityDecl) -> Self {
        self.parity = parity;
        self
    }

    pub fn is_zero(&self) -> bool {
        self.v.is_zero() && self.s.is_zero() && self.u.is_zero()
    }

    /// Sorted breakpoints inside `[-range, range]`, including both ends.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = [&self.v, &self.s, &self.u]
            .iter()
            .flat_map(|p| p.breakpoints())
            .filter(|x| x.abs() < self.range)
            .chain([-self.range, self.range])
            .collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    fn clamp(&self, p: &Profile, x: f64) -> f64 {
        if x.abs() > self.range {
            0.0
        } else {
            p.eval(x)
        }
    }

    pub fn v(&self, x: f64) -> f64 {
        self.clamp(&self.v, x)
    }

    pub fn s(&self, x: f64) -> f64 {
        self.clamp(&self.s, x)
    }

    pub fn u(&self, x: f64) -> f64 {
        self.clamp(&self.u, x)
    }

    /// `V + S`
    pub fn v_plus(&self, x: f64) -> f64 {
        self.v(x) + self.s(x)
    }

    /// `V - S`
    pub fn v_minus(&self, x: f64) -> f64 {
        self.v(x) - self.s(x)
    }

    /// Largest `|V| + |S| + |U|` of the unclamped profiles sampled just outside `range`.
    pub fn leakage(&self, samples: usize) -> f64 {
        let samples = samples.max(1);
        let mut worst: f64 = 0.0;
        for i in 0..samples {
            let x = self.range * (1.0 + 4.0 * i as f64 / samples as f64) + 1e-9;
            for x in [x, -x] {
                worst = worst.max(self.v.eval(x).abs() + self.s.eval(x).abs() + self.u.eval(x).abs());
            }
        }
        worst
    }

    fn magnitude(&self, samples: usize) -> f64 {
        sample_points(self.range, samples)
            .flat_map(|x| [x, -x])
            .map(|x| self.v(x).abs().max(self.s(x).abs()).max(self.u(x).abs()))
            .fold(0.0, f64::max)
    }

    fn parity_defects(&self, samples: usize) -> (f64, f64) {
        let mut even: f64 = 0.0;
        let mut odd: f64 = 0.0;
        for x in sample_points(self.range, samples) {
            let (v0, v1) = (self.v(x), self.v(-x));
            let (s0, s1) = (self.s(x), self.s(-x));
            let (u0, u1) = (self.u(x), self.u(-x));
            even = even.max((v0 - v1).abs()).max((s0 - s1).abs()).max((u0 + u1).abs());
            odd = odd.max((v0 + v1).abs()).max((s0 + s1).abs()).max((u0 - u1).abs());
        }
        (even, odd)
    }

    /// Parity actually used: the declared one after a sampled check, or the
    /// classified one.
    pub fn effective_parity(&self) -> Result<Parity> {
        match self.parity {
            ParityDecl::Auto => Ok(classify_parity(self, 64)),
            ParityDecl::Declared(Parity::None) => Ok(Parity::None),
            ParityDecl::Declared(p) => {
                let (even, odd) = self.parity_defects(64);
                let defect = if p == Parity::Even { even } else { odd };
                let tol = 1e-8 * self.magnitude(64).max(1.0);
                if defect > tol {
                    Err(Error::Parity {
                        declared: p.name(),
                        detail: format!("largest mirror defect {defect:.3e}"),
                    })
                } else {
                    Ok(p)
                }
            }
        }
    }
}

fn sample_points(range: f64, samples: usize) -> impl Iterator<Item = f64> {
    let samples = samples.max(1);
    let range = if range > 0.0 { range } else { 1.0 };
    // irrational offset keeps samples off the profile breakpoints
    (1..=samples).map(move |i| range * (i as f64 - 0.381_966) / samples as f64)
}

/// Matrix parity of the potential. Identically zero profiles count as both
/// even and odd; `even` wins ties.
pub fn classify_parity(spec: &PotentialSpec, samples: usize) -> Parity {
    let samples = samples.max(16);
    let (even, odd) = spec.parity_defects(samples);
    let tol = 1e-10 * spec.magnitude(samples).max(1.0);
    if even < tol {
        Parity::Even
    } else if odd < tol {
        Parity::Odd
    } else {
        Parity::None
    }
}

/// `F_{ij} = sum_k L_ik L_jk F(eta_k / lambda)` for `i, j < size`.
pub fn function_matrix(f: impl Fn(f64) -> f64, scale: f64, rule: &QuadratureRule, size: usize) -> Result<DMatrix<f64>> {
    let m = function_matrix_block(f, scale, rule, size, size)?;
    Ok(0.5 * (&m + m.transpose()))
}

/// Rectangular block `i < rows`, `j < cols` of the function matrix.
pub fn function_matrix_block(f: impl Fn(f64) -> f64, scale: f64, rule: &QuadratureRule, rows: usize, cols: usize) -> Result<DMatrix<f64>> {
    if rows.max(cols) > rule.order() {
        return Err(Error::Domain(format!(
            "{} basis functions exceed quadrature order {}",
            rows.max(cols),
            rule.order()
        )));
    }
    let v = rule.vectors();
    let mut left = v.rows(0, rows).clone_owned();
    for (k, mut col) in left.column_iter_mut().enumerate() {
        col *= f(rule.nodes()[k] / scale);
    }
    Ok(left * v.rows(0, cols).transpose())
}

pub fn function_matrix_element(f: impl Fn(f64) -> f64, n: usize, m: usize, scale: f64, rule: &QuadratureRule) -> Result<f64> {
    if n >= rule.order() || m >= rule.order() {
        return Err(Error::Domain(format!(
            "indices ({n}, {m}) outside quadrature order {}",
            rule.order()
        )));
    }
    let v = rule.vectors();
    Ok(rule
        .nodes()
        .iter()
        .enumerate()
        .map(|(k, &e)| v[(n, k)] * v[(m, k)] * f(e / scale))
        .sum())
}

/// `V+ = V + S`, `V- = V - S` and `U` as Hermite matrices.
#[derive(Debug, Clone)]
pub struct HermiteMatrices {
    pub v_plus: DMatrix<f64>,
    pub v_minus: DMatrix<f64>,
    pub u: DMatrix<f64>,
}

impl HermiteMatrices {
    pub fn new(spec: &PotentialSpec, scale: f64, rule: &QuadratureRule, size: usize) -> Result<Self> {
        let mut m = Self::block(spec, scale, rule, size, size)?;
        for a in [&mut m.v_plus, &mut m.v_minus, &mut m.u] {
            *a = 0.5 * (&*a + a.transpose());
        }
        Ok(m)
    }

    /// Rows `< rows`, columns `< cols`.
    pub fn block(spec: &PotentialSpec, scale: f64, rule: &QuadratureRule, rows: usize, cols: usize) -> Result<Self> {
        let build = |f: &dyn Fn(f64) -> f64, zero: bool| {
            if zero {
                Ok(DMatrix::zeros(rows, cols))
            } else {
                function_matrix_block(f, scale, rule, rows, cols)
            }
        };
        let vs_zero = spec.v.is_zero() && spec.s.is_zero();
        Ok(Self {
            v_plus: build(&|x| spec.v_plus(x), vs_zero)?,
            v_minus: build(&|x| spec.v_minus(x), vs_zero)?,
            u: build(&|x| spec.u(x), spec.u.is_zero())?,
        })
    }

    pub fn size(&self) -> usize {
        self.u.nrows().min(self.u.ncols())
    }
}

/// `<a|V|b>` for spinors given as Hermite combinations.
fn spinor_element(hm: &HermiteMatrices, a: &crate::basis::HermiteSpinor, b: &crate::basis::HermiteSpinor) -> f64 {
    let pair = |m: &DMatrix<f64>, x: &[(usize, f64)], y: &[(usize, f64)]| {
        let mut s = 0.0;
        for &(i, ci) in x {
            for &(j, cj) in y {
                s += ci * cj * m[(i, j)];
            }
        }
        s
    };
    pair(&hm.v_plus, &a.upper, &b.upper)
        + pair(&hm.u, &a.upper, &b.lower)
        + pair(&hm.u, &a.lower, &b.upper)
        + pair(&hm.v_minus, &a.lower, &b.lower)
}

/// Potential matrix of any middle basis.
pub fn middle_potential_matrix(basis: &MiddleBasis, hm: &HermiteMatrices) -> Result<DMatrix<f64>> {
    if basis.max_index() >= hm.size() {
        return Err(Error::Domain(format!(
            "middle basis needs Hermite index {} but matrices have size {}",
            basis.max_index(),
            hm.size()
        )));
    }
    let d = basis.dim();
    let mut m = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let v = spinor_element(hm, &basis.functions[i], &basis.functions[j]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    Ok(m)
}

/// The four `N x N` potential blocks of the kinetically balanced basis.
/// Row/column `n` is the channel index `n`, not the merged slot.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialBlocks {
    pub size: usize,
    /// even/even
    pub even_pp: DMatrix<f64>,
    /// odd/odd
    pub even_mm: DMatrix<f64>,
    /// even row, odd column
    pub odd_pm: DMatrix<f64>,
    /// odd row, even column
    pub odd_mp: DMatrix<f64>,
}

impl PotentialBlocks {
    /// Full `2N x 2N` matrix in the merged slot ordering.
    pub fn assemble(&self) -> DMatrix<f64> {
        let size = self.size;
        let mut m = DMatrix::zeros(2 * size, 2 * size);
        let slot = |c, n| MiddleBasisIndex::from_channel(c, n, size).unwrap().slot;
        for n in 0..size {
            for k in 0..size {
                m[(slot(Channel::Even, n), slot(Channel::Even, k))] = self.even_pp[(n, k)];
                m[(slot(Channel::Odd, n), slot(Channel::Odd, k))] = self.even_mm[(n, k)];
                m[(slot(Channel::Even, n), slot(Channel::Odd, k))] = self.odd_pm[(n, k)];
                m[(slot(Channel::Odd, n), slot(Channel::Even, k))] = self.odd_mp[(n, k)];
            }
        }
        m
    }
}

/// Closed-form blocks from Hermite matrices of size at least `2N`.
pub fn potential_blocks_from(hm: &HermiteMatrices, size: usize, tau: f64) -> Result<PotentialBlocks> {
    if hm.size() < 2 * size {
        return Err(Error::Domain(format!(
            "need Hermite matrices of size {} for {size} functions per channel",
            2 * size
        )));
    }
    let (vp, vm, u) = (&hm.v_plus, &hm.v_minus, &hm.u);
    let r = |n: usize| (n as f64).sqrt();
    let h = |n: usize| (n as f64 + 0.5).sqrt();
    // entries with a vanishing sqrt(n) prefactor are dropped, never indexed
    let lower_even = |n: usize, f: &dyn Fn(usize) -> f64| if n == 0 { 0.0 } else { r(n) * f(2 * n - 1) };
    let mut b = PotentialBlocks {
        size,
        even_pp: DMatrix::zeros(size, size),
        even_mm: DMatrix::zeros(size, size),
        odd_pm: DMatrix::zeros(size, size),
        odd_mp: DMatrix::zeros(size, size),
    };
    for n in 0..size {
        for m in 0..size {
            let (n2, m2) = (2 * n, 2 * m);
            let vv = lower_even(n, &|i| lower_even(m, &|j| vm[(i, j)]));
            let uu = lower_even(n, &|i| u[(i, m2)]) + lower_even(m, &|j| u[(n2, j)]);
            b.even_pp[(n, m)] = vp[(n2, m2)] + tau * tau * vv + tau * uu;

            b.even_mm[(n, m)] = vp[(n2 + 1, m2 + 1)]
                + tau * tau * h(n) * h(m) * vm[(n2, m2)]
                + tau * (h(n) * u[(n2, m2 + 1)] + h(m) * u[(n2 + 1, m2)]);

            b.odd_pm[(n, m)] = vp[(n2, m2 + 1)]
                + tau * tau * h(m) * lower_even(n, &|i| vm[(i, m2)])
                + tau * (lower_even(n, &|i| u[(i, m2 + 1)]) + h(m) * u[(n2, m2)]);

            b.odd_mp[(n, m)] = vp[(n2 + 1, m2)]
                + tau * tau * h(n) * lower_even(m, &|j| vm[(n2, j)])
                + tau * (lower_even(m, &|j| u[(n2 + 1, j)]) + h(n) * u[(n2, m2)]);
        }
    }
    Ok(b)
}

pub fn assemble_potential_blocks(spec: &PotentialSpec, scale: f64, size: usize, tau: f64, rule: &QuadratureRule) -> Result<PotentialBlocks> {
    if rule.order() < 2 * size {
        return Err(Error::Domain(format!(
            "quadrature order {} below 2N = {}",
            rule.order(),
            2 * size
        )));
    }
    spec.effective_parity()?;
    let hm = HermiteMatrices::new(spec, scale, rule, 2 * size)?;
    potential_blocks_from(&hm, size, tau)
}
