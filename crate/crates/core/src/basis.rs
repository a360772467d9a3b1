//! Spinor bases: energy-dependent outer functions and the energy-independent
//! middle block.
//!
//! Every function here is a finite combination of orthonormal Hermite
//! functions `h_j(y)`, `y = lambda x`, in each spinor component. Inner
//! products use the measure `lambda dx = dy`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::mathkit::hermite_functions;
use crate::refsol::{Kinematics, Spinor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    /// Upper component even in `x`.
    Even,
    /// Upper component odd in `x`.
    Odd,
}

impl Channel {
    /// Offset of the Hermite index of the upper component: `j = 2n + offset`.
    pub fn offset(self) -> usize {
        match self {
            Channel::Even => 0,
            Channel::Odd => 1,
        }
    }

    /// Half-integer shift that maps even-channel formulas onto the odd channel.
    pub fn shift(self) -> f64 {
        0.5 * self.offset() as f64
    }
}

/// Choice of middle-block basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MiddleBasisKind {
    /// Independent Hermite functions in each component: uppers `h_0..h_{2N-1}`,
    /// lowers `h_0..h_{2N}`. Dimension `4N + 1`, identity overlap.
    Spinor,
    /// `2N` kinetically balanced spinors whose lower components are tied to
    /// the uppers through the dimensionless parameter `tau`.
    KineticBalance { tau: f64 },
}

impl MiddleBasisKind {
    pub fn name(&self) -> &'static str {
        match self {
            MiddleBasisKind::Spinor => "spinor",
            MiddleBasisKind::KineticBalance { .. } => "kinetic_balance",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisParams {
    /// `lambda`, inverse length.
    pub scale: f64,
    /// Number of upper-component functions per channel in the middle block.
    pub size: usize,
    /// Gauss–Hermite order used for the middle potential matrix.
    pub quadrature_order: usize,
    pub kind: MiddleBasisKind,
}

impl BasisParams {
    pub fn new(scale: f64, size: usize, kind: MiddleBasisKind) -> Result<Self> {
        Self::with_quadrature(scale, size, default_quadrature_order(size), kind)
    }

    pub fn with_quadrature(scale: f64, size: usize, quadrature_order: usize, kind: MiddleBasisKind) -> Result<Self> {
        if !(scale > 0.0) {
            return Err(Error::Domain(format!("scale must be positive, got {scale}")));
        }
        if size < 2 {
            return Err(Error::Domain(format!("basis size must be at least 2, got {size}")));
        }
        if let MiddleBasisKind::KineticBalance { tau } = kind {
            if !(tau > 0.0) {
                return Err(Error::Domain(format!("tau must be positive, got {tau}")));
            }
        }
        let needed = match kind {
            MiddleBasisKind::Spinor => 2 * size + 1,
            MiddleBasisKind::KineticBalance { .. } => 2 * size,
        };
        if quadrature_order < needed {
            return Err(Error::Domain(format!(
                "quadrature order {quadrature_order} below the middle dimension requirement {needed}"
            )));
        }
        Ok(Self {
            scale,
            size,
            quadrature_order,
            kind,
        })
    }
}

pub fn default_quadrature_order(size: usize) -> usize {
    3 * size + 40
}

/// `<h_i | d/dy h_j>`.
pub fn derivative_element(i: usize, j: usize) -> f64 {
    if i + 1 == j {
        (j as f64 / 2.0).sqrt()
    } else if i == j + 1 {
        -((j as f64 + 1.0) / 2.0).sqrt()
    } else {
        0.0
    }
}

/// Sparse Hermite expansion `sum_j c_j h_j`.
pub type HermiteCombination = Vec<(usize, f64)>;

/// `d/dy h_j` as a Hermite combination.
pub fn derivative_combination(j: usize) -> HermiteCombination {
    let jf = j as f64;
    let mut out = Vec::with_capacity(2);
    if j > 0 {
        out.push((j - 1, (jf / 2.0).sqrt()));
    }
    out.push((j + 1, -((jf + 1.0) / 2.0).sqrt()));
    out
}

/// A spinor written as Hermite combinations in each component.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteSpinor {
    pub channel: Channel,
    pub upper: HermiteCombination,
    pub lower: HermiteCombination,
}

impl HermiteSpinor {
    pub fn max_index(&self) -> usize {
        self.upper
            .iter()
            .chain(&self.lower)
            .map(|&(j, _)| j)
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, scale: f64, x: f64) -> Spinor {
        let h = hermite_functions(self.max_index(), scale * x);
        let sum = |c: &HermiteCombination| c.iter().map(|&(j, a)| a * h[j]).sum();
        [sum(&self.upper), sum(&self.lower)]
    }
}

fn dot(a: &HermiteCombination, b: &HermiteCombination) -> f64 {
    let mut s = 0.0;
    for &(i, x) in a {
        for &(j, y) in b {
            if i == j {
                s += x * y;
            }
        }
    }
    s
}

fn dot_derivative(a: &HermiteCombination, b: &HermiteCombination) -> f64 {
    let mut s = 0.0;
    for &(i, x) in a {
        for &(j, y) in b {
            s += x * y * derivative_element(i, j);
        }
    }
    s
}

/// `<a | H0 | b>` with the free Dirac Hamiltonian `[[M, -d/dx], [d/dx, -M]]`.
pub fn free_hamiltonian_element(a: &HermiteSpinor, b: &HermiteSpinor, mass: f64, scale: f64) -> f64 {
    mass * (dot(&a.upper, &b.upper) - dot(&a.lower, &b.lower))
        + scale * (dot_derivative(&a.lower, &b.upper) - dot_derivative(&a.upper, &b.lower))
}

pub fn overlap_element(a: &HermiteSpinor, b: &HermiteSpinor) -> f64 {
    dot(&a.upper, &b.upper) + dot(&a.lower, &b.lower)
}

/// Outer basis spinor `phi_n` of a channel: upper `h_j`, lower
/// `lambda/(M+e) d/dy h_j`, with `j = 2n` (even) or `2n+1` (odd).
pub fn outer_spinor(channel: Channel, n: usize, kin: &Kinematics) -> HermiteSpinor {
    let j = 2 * n + channel.offset();
    let kappa = kin.kappa();
    HermiteSpinor {
        channel,
        upper: vec![(j, 1.0)],
        lower: derivative_combination(j)
            .into_iter()
            .map(|(i, c)| (i, kappa * c))
            .collect(),
    }
}

pub fn eval_outer_basis(channel: Channel, n: usize, kin: &Kinematics, x: f64) -> Spinor {
    outer_spinor(channel, n, kin).eval(kin.scale, x)
}

/// Position of a kinetically balanced spinor in the merged `2N` ordering:
/// slots `0..N` hold the odd channel with `n = N-1-i`, slots `N..2N` the even
/// channel with `n = i - N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MiddleBasisIndex {
    pub slot: usize,
    pub channel: Channel,
    pub n: usize,
}

impl MiddleBasisIndex {
    pub fn from_slot(slot: usize, size: usize) -> Result<Self> {
        if slot >= 2 * size {
            return Err(Error::Domain(format!("slot {slot} outside 0..{}", 2 * size)));
        }
        Ok(if slot < size {
            Self {
                slot,
                channel: Channel::Odd,
                n: size - 1 - slot,
            }
        } else {
            Self {
                slot,
                channel: Channel::Even,
                n: slot - size,
            }
        })
    }

    pub fn from_channel(channel: Channel, n: usize, size: usize) -> Result<Self> {
        if n >= size {
            return Err(Error::Domain(format!("index {n} outside 0..{size}")));
        }
        let slot = match channel {
            Channel::Odd => size - 1 - n,
            Channel::Even => size + n,
        };
        Ok(Self { slot, channel, n })
    }
}

/// Kinetically balanced spinor: upper `h_{2n}` with lower `tau sqrt(n) h_{2n-1}`
/// (even), or upper `h_{2n+1}` with lower `tau sqrt(n + 1/2) h_{2n}` (odd).
pub fn kinetic_balance_spinor(channel: Channel, n: usize, tau: f64) -> HermiteSpinor {
    match channel {
        Channel::Even => HermiteSpinor {
            channel,
            upper: vec![(2 * n, 1.0)],
            lower: if n > 0 {
                vec![(2 * n - 1, tau * (n as f64).sqrt())]
            } else {
                Vec::new()
            },
        },
        Channel::Odd => HermiteSpinor {
            channel,
            upper: vec![(2 * n + 1, 1.0)],
            lower: vec![(2 * n, tau * (n as f64 + 0.5).sqrt())],
        },
    }
}

pub fn eval_middle_basis(index: MiddleBasisIndex, tau: f64, scale: f64, x: f64) -> Spinor {
    kinetic_balance_spinor(index.channel, index.n, tau).eval(scale, x)
}

/// The ordered set of middle spinors together with the two boundary slots
/// that touch the outer tails.
#[derive(Debug, Clone)]
pub struct MiddleBasis {
    pub kind: MiddleBasisKind,
    pub size: usize,
    pub functions: Vec<HermiteSpinor>,
    /// Slot of the even-channel function with upper `h_{2N-2}`.
    pub even_corner: usize,
    /// Slot of the odd-channel function with upper `h_{2N-1}`.
    pub odd_corner: usize,
}

impl MiddleBasis {
    pub fn new(kind: MiddleBasisKind, size: usize) -> Self {
        match kind {
            MiddleBasisKind::KineticBalance { tau } => {
                let functions = (0..2 * size)
                    .map(|slot| {
                        let idx = MiddleBasisIndex::from_slot(slot, size).unwrap();
                        kinetic_balance_spinor(idx.channel, idx.n, tau)
                    })
                    .collect();
                Self {
                    kind,
                    size,
                    functions,
                    even_corner: 2 * size - 1,
                    odd_corner: 0,
                }
            }
            MiddleBasisKind::Spinor => {
                // odd channel first, corner at slot 0; even channel last, corner at the end
                let single = |channel, upper: bool, j: usize| HermiteSpinor {
                    channel,
                    upper: if upper { vec![(j, 1.0)] } else { Vec::new() },
                    lower: if upper { Vec::new() } else { vec![(j, 1.0)] },
                };
                let mut functions = Vec::with_capacity(4 * size + 1);
                for n in (0..size).rev() {
                    functions.push(single(Channel::Odd, true, 2 * n + 1));
                }
                for n in (0..=size).rev() {
                    functions.push(single(Channel::Odd, false, 2 * n));
                }
                for n in 0..size {
                    functions.push(single(Channel::Even, false, 2 * n + 1));
                }
                for n in 0..size {
                    functions.push(single(Channel::Even, true, 2 * n));
                }
                let last = functions.len() - 1;
                Self {
                    kind,
                    size,
                    functions,
                    even_corner: last,
                    odd_corner: 0,
                }
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.functions.len()
    }

    pub fn max_index(&self) -> usize {
        self.functions.iter().map(HermiteSpinor::max_index).max().unwrap_or(0)
    }

    pub fn channel(&self, slot: usize) -> Channel {
        self.functions[slot].channel
    }

    /// `(H0, Omega)` by Hermite algebra.
    pub fn h0_overlap(&self, mass: f64, scale: f64) -> (DMatrix<f64>, DMatrix<f64>) {
        let d = self.dim();
        let mut h = DMatrix::zeros(d, d);
        let mut o = DMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                let (a, b) = (&self.functions[i], &self.functions[j]);
                h[(i, j)] = free_hamiltonian_element(a, b, mass, scale);
                o[(i, j)] = overlap_element(a, b);
            }
        }
        (h, o)
    }
}

/// Closed-form tridiagonal `H0` and diagonal overlap of the kinetically
/// balanced basis, in the merged slot ordering.
pub fn middle_h0_overlap(size: usize, scale: f64, tau: f64, mass: f64) -> (DMatrix<f64>, Vec<f64>) {
    let d = 2 * size;
    let mut h = DMatrix::zeros(d, d);
    let mut overlap = vec![0.0; d];
    for channel in [Channel::Even, Channel::Odd] {
        let s = channel.shift();
        for n in 0..size {
            let ns = n as f64 + s;
            let i = MiddleBasisIndex::from_channel(channel, n, size).unwrap().slot;
            h[(i, i)] = mass + tau * (2.0 * scale - tau * mass) * ns;
            overlap[i] = 1.0 + tau * tau * ns;
            if n + 1 < size {
                let j = MiddleBasisIndex::from_channel(channel, n + 1, size).unwrap().slot;
                let off = -scale * tau * ((ns + 1.0) * (ns + 0.5)).sqrt();
                h[(i, j)] = off;
                h[(j, i)] = off;
            }
        }
    }
    (h, overlap)
}

/// Element `<phi_n|(H0 - e)|phi_m>` of the tridiagonal outer wave operator.
pub fn outer_j_matrix(channel: Channel, kin: &Kinematics, n: usize, m: usize) -> f64 {
    let pre = kin.scale * kin.scale / (kin.energy + kin.mass);
    let s = channel.shift();
    let (nf, mf) = (n as f64 + s, m as f64 + s);
    if n == m {
        pre * ((2.0 * nf + 0.5) - kin.mu * kin.mu)
    } else if n == m + 1 {
        -pre * (nf * (nf - 0.5)).sqrt()
    } else if m == n + 1 {
        -pre * (mf * (mf - 0.5)).sqrt()
    } else {
        0.0
    }
}

/// `(J+, J-)`: the couplings `J_{N,N-1}` of the even and odd channels.
pub fn boundary_couplings(kin: &Kinematics, size: usize) -> (f64, f64) {
    (
        outer_j_matrix(Channel::Even, kin, size, size - 1),
        outer_j_matrix(Channel::Odd, kin, size, size - 1),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kin() -> Kinematics {
        Kinematics::new(1.0, 1.7, 1.2).unwrap()
    }

    #[test]
    fn outer_basis_at_origin() {
        let k = kin();
        let v = eval_outer_basis(Channel::Even, 0, &k, 0.0);
        assert!((v[0] - std::f64::consts::PI.powf(-0.25)).abs() < 1e-15);
        assert_eq!(v[1], 0.0);
        for n in 0..5 {
            assert_eq!(eval_outer_basis(Channel::Odd, n, &k, 0.0)[0], 0.0);
        }
    }

    #[test]
    fn outer_lower_is_scaled_derivative() {
        let k = kin();
        let step = 1e-5;
        for (channel, n, x) in [(Channel::Even, 3, 0.4), (Channel::Odd, 2, -0.9)] {
            let up = |x| eval_outer_basis(channel, n, &k, x)[0];
            let fd = (up(x + step) - up(x - step)) / (2.0 * step) / (k.mass + k.energy);
            let lower = eval_outer_basis(channel, n, &k, x)[1];
            assert!((fd - lower).abs() < 1e-6 * lower.abs().max(1e-3));
        }
    }

    #[test]
    fn kinetic_balance_basis_shapes() {
        let size = 4;
        let zero = MiddleBasisIndex::from_channel(Channel::Even, 0, size).unwrap();
        for x in [-1.3, 0.0, 0.7] {
            assert_eq!(eval_middle_basis(zero, 0.8, 1.1, x)[1], 0.0);
        }
        let idx = MiddleBasisIndex::from_channel(Channel::Odd, 2, size).unwrap();
        let a = eval_middle_basis(idx, 0.8, 1.1, 0.6);
        let b = eval_middle_basis(idx, 0.8, 1.1, -0.6);
        assert!((a[0] + b[0]).abs() < 1e-15 && (a[1] - b[1]).abs() < 1e-15);
        let k = Kinematics::new(1.0, 2.0, 1.1).unwrap();
        let outer = eval_outer_basis(Channel::Odd, 2, &k, 0.6);
        assert_eq!(a[0], outer[0]);
    }

    #[test]
    fn slot_mapping_is_a_bijection() {
        let size = 5;
        let mut seen = vec![false; 2 * size];
        for channel in [Channel::Even, Channel::Odd] {
            for n in 0..size {
                let idx = MiddleBasisIndex::from_channel(channel, n, size).unwrap();
                assert_eq!(MiddleBasisIndex::from_slot(idx.slot, size).unwrap(), idx);
                assert!(!seen[idx.slot]);
                seen[idx.slot] = true;
            }
        }
        assert!(MiddleBasisIndex::from_slot(10, size).is_err());
    }

    #[test]
    fn closed_form_h0_matches_hermite_algebra() {
        let (size, scale, tau, mass) = (6, 1.3, 0.7, 2.0);
        let (h, o) = middle_h0_overlap(size, scale, tau, mass);
        let basis = MiddleBasis::new(MiddleBasisKind::KineticBalance { tau }, size);
        let (hg, og) = basis.h0_overlap(mass, scale);
        assert!((&h - &hg).amax() < 1e-13);
        for i in 0..2 * size {
            assert!((o[i] - og[(i, i)]).abs() < 1e-14);
        }
        assert!((og.clone() - DMatrix::from_diagonal(&og.diagonal())).amax() == 0.0);
        // even n = 0 and odd n = 0 entries
        let e0 = MiddleBasisIndex::from_channel(Channel::Even, 0, size).unwrap().slot;
        let o0 = MiddleBasisIndex::from_channel(Channel::Odd, 0, size).unwrap().slot;
        assert_eq!(h[(e0, e0)], mass);
        assert!((h[(o0, o0)] - (mass + tau * (2.0 * scale - tau * mass) / 2.0)).abs() < 1e-14);
        assert!((o[o0] - (1.0 + tau * tau / 2.0)).abs() < 1e-15);
    }

    #[test]
    fn cross_channel_h0_vanishes() {
        for kind in [MiddleBasisKind::Spinor, MiddleBasisKind::KineticBalance { tau: 0.4 }] {
            let basis = MiddleBasis::new(kind, 5);
            let (h, _) = basis.h0_overlap(1.0, 0.9);
            for i in 0..basis.dim() {
                for j in 0..basis.dim() {
                    if basis.channel(i) != basis.channel(j) {
                        assert_eq!(h[(i, j)], 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn spinor_basis_layout() {
        let basis = MiddleBasis::new(MiddleBasisKind::Spinor, 4);
        assert_eq!(basis.dim(), 17);
        assert_eq!(basis.max_index(), 8);
        assert_eq!(basis.functions[basis.odd_corner].upper, vec![(7, 1.0)]);
        assert_eq!(basis.functions[basis.even_corner].upper, vec![(6, 1.0)]);
        let (_, o) = basis.h0_overlap(1.0, 1.0);
        assert_eq!(o, DMatrix::identity(17, 17));
    }

    #[test]
    fn outer_wave_operator_matches_hermite_algebra() {
        let k = kin();
        for channel in [Channel::Even, Channel::Odd] {
            for n in 0..6 {
                for m in 0..6 {
                    let a = outer_spinor(channel, n, &k);
                    let b = outer_spinor(channel, m, &k);
                    let direct = free_hamiltonian_element(&a, &b, k.mass, k.scale)
                        - k.energy * overlap_element(&a, &b);
                    let closed = outer_j_matrix(channel, &k, n, m);
                    assert!((direct - closed).abs() < 1e-13, "{channel:?} {n} {m}");
                }
            }
        }
        assert_eq!(outer_j_matrix(Channel::Even, &k, 5, 3), 0.0);
    }

    #[test]
    fn boundary_couplings_are_negative() {
        let k = kin();
        let (jp, jm) = boundary_couplings(&k, 7);
        assert!(jp < 0.0 && jm < 0.0);
        let pre = k.scale * k.scale / (k.energy + k.mass);
        assert!((jp + pre * (7.0f64 * 6.5).sqrt()).abs() < 1e-14);
        assert!((jm + pre * (7.0f64 * 7.5).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn parameter_validation() {
        assert!(BasisParams::new(0.0, 10, MiddleBasisKind::Spinor).is_err());
        assert!(BasisParams::new(1.0, 1, MiddleBasisKind::Spinor).is_err());
        assert!(BasisParams::new(1.0, 10, MiddleBasisKind::KineticBalance { tau: 0.0 }).is_err());
        assert!(BasisParams::with_quadrature(1.0, 10, 19, MiddleBasisKind::KineticBalance { tau: 1.0 }).is_err());
        assert!(BasisParams::with_quadrature(1.0, 10, 20, MiddleBasisKind::Spinor).is_err());
        let p = BasisParams::new(1.0, 10, MiddleBasisKind::Spinor).unwrap();
        assert_eq!(p.quadrature_order, 70);
    }
}
