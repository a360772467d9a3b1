//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria 7 and 9 are known to be red (see README). They are evaluated as
//! stated and reported; the process fails only on unexpected results, or on
//! any red line when `ACCEPTANCE_STRICT=1`.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use jmatrix_dirac::basis::{outer_j_matrix, BasisParams, Channel, MiddleBasisKind};
use jmatrix_dirac::greens::{diagonalize, eigenvector_squares_from_eigenvalues, green_element_eigenvalues_only};
use jmatrix_dirac::oracle::{integrate_dirac, nonrelativistic_oracle, OracleOptions};
use jmatrix_dirac::potential::{PotentialSpec, Profile};
use jmatrix_dirac::refsol::{
    eval_reference_wavefunctions, outer_basis_values, sine_solutions, Kinematics, ReferenceCoeffs,
};
use jmatrix_dirac::scattering::{
    amplitudes_coupled, amplitudes_decoupled, plateau_scan, Method, PlateauGrid, PathChoice, Solver, SolverOptions,
};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const EXPECTED_RED: [u32; 2] = [7, 9];

type Check = (bool, String);
type Criterion = (u32, &'static str, f64, fn() -> Check);

fn gaussian(height: f64, center: f64) -> Profile {
    Profile::Gaussian {
        height,
        width: 1.0,
        center,
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn oracle(spec: &PotentialSpec, mass: f64, energy: f64) -> (Complex64, Complex64) {
    let kin = Kinematics::new(mass, energy, 1.0).unwrap();
    let r = integrate_dirac(spec, &kin, &OracleOptions::default()).unwrap();
    (r.t, r.r)
}

fn spinor(scale: f64, size: usize) -> BasisParams {
    BasisParams::new(scale, size, MiddleBasisKind::Spinor).unwrap()
}

fn criterion_1() -> Check {
    let solver = Solver::new(1.0, PotentialSpec::zero(), spinor(1.0, 20), SolverOptions::default()).unwrap();
    let (mut dt, mut dr) = (0.0f64, 0.0f64);
    for e in linspace(1.05, 3.0, 50) {
        let r = solver.solve(e).unwrap();
        dt = dt.max((r.t - 1.0).norm());
        dr = dr.max(r.r.norm());
    }
    (dt < 1e-8 && dr < 1e-8, format!("max|T-1| = {dt:.2e}, max|R| = {dr:.2e}"))
}

fn criterion_2() -> Check {
    let spec = PotentialSpec::vector(gaussian(2.0, 0.0));
    let energies = linspace(1.05, 3.0, 100);
    let max_defect = |params: BasisParams| {
        let solver = Solver::new(1.0, spec.clone(), params, SolverOptions::default()).unwrap();
        solver
            .energy_sweep(&energies)
            .into_iter()
            .map(|r| r.unwrap().unitarity_defect)
            .fold(0.0f64, f64::max)
    };
    let d40 = max_defect(BasisParams::with_quadrature(1.5, 40, 100, MiddleBasisKind::Spinor).unwrap());
    let d80 = max_defect(spinor(1.5, 80));
    (
        d40 < 1e-4 && d80 < 1e-6,
        format!("max defect N=40,K=100: {d40:.2e}; N=80: {d80:.2e}"),
    )
}

/// Centre of the widest flat region of |T(e)|^2 over a coarse scale grid.
fn interior_scale(spec: &PotentialSpec, size: usize) -> f64 {
    let grid = PlateauGrid {
        energy: 2.0,
        scales: linspace(0.8, 2.4, 9),
        taus: Vec::new(),
        sizes: vec![size],
        kind: MiddleBasisKind::Spinor,
        tolerance: 1e-4,
    };
    let report = plateau_scan(1.0, spec, SolverOptions::default(), &grid).unwrap();
    let c = report.entries[0].center_lambda;
    if c.is_finite() {
        c
    } else {
        1.5
    }
}

fn criterion_3() -> Check {
    let cases = [
        ("even Gaussian V", PotentialSpec::vector(gaussian(2.0, 0.0))),
        (
            "odd U",
            PotentialSpec::new(
                Profile::Zero,
                Profile::Zero,
                Profile::OddGaussian {
                    height: 1.0,
                    width: 1.0,
                    center: 0.0,
                },
            ),
        ),
        ("off-centre Gaussian V", PotentialSpec::vector(gaussian(2.0, 0.5))),
    ];
    let energies = linspace(1.1, 3.0, 20);
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, spec) in cases {
        let scale = interior_scale(&spec, 60);
        let solver = Solver::new(1.0, spec.clone(), spinor(scale, 60), SolverOptions::default()).unwrap();
        let dev = energies
            .iter()
            .map(|&e| (solver.solve(e).unwrap().t - oracle(&spec, 1.0, e).0).norm())
            .fold(0.0f64, f64::max);
        pass &= dev < 1e-3;
        parts.push(format!("{name} (lambda {scale:.2}, {}): {dev:.2e}", solver.parity.name()));
    }
    (pass, format!("max|T - T_oracle|: {}", parts.join("; ")))
}

fn criterion_4() -> Check {
    let spec = PotentialSpec::vector(gaussian(2.0, 0.0));
    let params = spinor(1.5, 60);
    let literal = Solver::new(
        1.0,
        spec.clone(),
        params,
        SolverOptions {
            method: Method::Literal,
            ..SolverOptions::default()
        },
    )
    .unwrap();
    let forced = |path| {
        Solver::new(
            1.0,
            spec.clone(),
            params,
            SolverOptions {
                path,
                ..SolverOptions::default()
            },
        )
        .unwrap()
    };
    let (coupled, decoupled) = (forced(PathChoice::Coupled), forced(PathChoice::Decoupled));
    let (mut ratio, mut lit_diff, mut dressed_diff) = (0.0f64, 0.0f64, 0.0f64);
    for e in linspace(1.1, 3.0, 20) {
        let cg = literal.corner_greens(e).unwrap();
        ratio = ratio.max(cg.coupling() / cg.pp.abs());
        let kin = literal.kinematics(e).unwrap();
        let coeffs = ReferenceCoeffs::new(&kin, 61).unwrap();
        let kr = jmatrix_dirac::refsol::kinematic_ratios(&coeffs, 60).unwrap();
        let (jp, jm) = jmatrix_dirac::basis::boundary_couplings(&kin, 60);
        let a = amplitudes_coupled(&cg, &kr, jp, jm).unwrap();
        let b = amplitudes_decoupled(&cg, &kr, jp, jm).unwrap();
        lit_diff = lit_diff.max((a.0 - b.0).norm()).max((a.1 - b.1).norm());
        let (c, d) = (coupled.solve(e).unwrap(), decoupled.solve(e).unwrap());
        dressed_diff = dressed_diff.max((c.w_plus - d.w_plus).norm()).max((c.w_minus - d.w_minus).norm());
    }
    (
        ratio < 1e-10 && lit_diff < 1e-10 && dressed_diff < 1e-10,
        format!(
            "max coupling/|G++| = {ratio:.2e}; coupled vs decoupled: corner form {lit_diff:.2e}, tail-corrected {dressed_diff:.2e}"
        ),
    )
}

fn random_symmetric(rng: &mut StdRng, n: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    0.5 * (&a + a.transpose())
}

fn criterion_5() -> Check {
    let mut rng = StdRng::seed_from_u64(20_240_501);
    let (mut a12_a17, mut a11_dense, mut a18) = (0.0f64, 0.0f64, 0.0f64);
    let mut systems = 0;
    while systems < 50 {
        let n = rng.random_range(3..=10);
        let h = random_symmetric(&mut rng, n);
        let eig = h.clone().symmetric_eigen();
        let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        if ev.windows(2).any(|w| w[1] - w[0] < 1e-3) {
            continue;
        }
        systems += 1;
        let z = loop {
            let z = rng.random_range(-3.0..3.0);
            if ev.iter().all(|e| (e - z).abs() > 1e-2) {
                break z;
            }
        };
        let ones = vec![1.0; n];
        let g = diagonalize(&h, &ones).unwrap();
        for i in 0..n {
            for j in 0..n {
                let spectral = g.green_element(i, j, z).unwrap();
                let eig_only = green_element_eigenvalues_only(&h, &ones, i, j, z).unwrap();
                a12_a17 = a12_a17.max((spectral - eig_only).abs() / spectral.abs().max(1e-300).max(eig_only.abs()));
            }
        }
        let omega: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..2.0)).collect();
        let go = diagonalize(&h, &omega).unwrap();
        let shifted = &h - z * DMatrix::from_diagonal(&DVector::from_vec(omega.clone()));
        let lu = shifted.lu();
        for m in 0..n {
            let col = lu.solve(&DVector::from_fn(n, |i, _| if i == m { 1.0 } else { 0.0 })).unwrap();
            let norm = col.amax();
            for i in 0..n {
                a11_dense = a11_dense.max((go.green_element(i, m, z).unwrap() - col[i]).abs() / norm);
            }
        }
        let vecs = &eig.eigenvectors;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        for (k, &col) in order.iter().enumerate() {
            for i in 0..n {
                let direct = vecs[(i, col)].powi(2);
                a18 = a18.max((eigenvector_squares_from_eigenvalues(&h, k, i).unwrap() - direct).abs());
            }
        }
    }
    (
        a12_a17 < 1e-9 && a11_dense < 1e-9 && a18 < 1e-10,
        format!("spectral vs eigenvalues-only {a12_a17:.2e}; general overlap vs dense solve {a11_dense:.2e}; eigenvector squares {a18:.2e}"),
    )
}

/// Coefficients as functions of `mu` (with `lambda = 1`, `M = 1`).
fn coeffs_at_mu(mu: f64, n_max: usize) -> ReferenceCoeffs {
    let kin = Kinematics::new(1.0, (1.0 + mu * mu).sqrt(), 1.0).unwrap();
    ReferenceCoeffs::new(&kin, n_max).unwrap()
}

fn criterion_6() -> Check {
    let mut rec = 0.0f64;
    let mut init = 0.0f64;
    for mu in [0.5, 1.0, 2.0] {
        let c = coeffs_at_mu(mu, 41);
        let kin = c.kinematics;
        for (channel, s, cc) in [
            (Channel::Even, &c.s_plus, &c.c_plus),
            (Channel::Odd, &c.s_minus, &c.c_minus),
        ] {
            for f in [s, cc] {
                for n in 0..=40 {
                    let terms = [
                        if n > 0 { outer_j_matrix(channel, &kin, n, n - 1) * f[n - 1] } else { 0.0 },
                        outer_j_matrix(channel, &kin, n, n) * f[n],
                        outer_j_matrix(channel, &kin, n, n + 1) * f[n + 1],
                    ];
                    // the cosine-like row n = 0 carries the source of the initial relation
                    if n == 0 && std::ptr::eq(f, cc) {
                        continue;
                    }
                    let scale = terms.iter().fold(0.0f64, |a, t| a.max(t.abs()));
                    rec = rec.max(terms.iter().sum::<f64>().abs() / scale);
                }
            }
        }
        let g = (0.5 * mu * mu).exp() * PI.powf(-0.25);
        let even_src = 2f64.sqrt() * c.norm_even * g * mu;
        let even = mu * mu * c.c_plus[0] - (0.5 * c.c_plus[0] - 0.5f64.sqrt() * c.c_plus[1] + even_src);
        let odd_src = -c.norm_odd * g;
        let odd = mu * mu * c.c_minus[0] - (1.5 * c.c_minus[0] - 1.5f64.sqrt() * c.c_minus[1] + odd_src);
        init = init
            .max(even.abs() / (mu * mu * c.c_plus[0]).abs().max(even_src.abs()))
            .max(odd.abs() / (mu * mu * c.c_minus[0]).abs().max(odd_src.abs()));
    }
    // (d^2/dmu^2 - mu^2 + 4n + 2 ∓ 1) s_n± = 0 by central differences
    let mu0 = 1.3;
    let residual = |h: f64| {
        let (a, b, c) = (coeffs_at_mu(mu0 - h, 6), coeffs_at_mu(mu0, 6), coeffs_at_mu(mu0 + h, 6));
        let mut r = 0.0f64;
        for n in 0..=5 {
            let nf = n as f64;
            let fp = |x: &ReferenceCoeffs| x.s_plus[n];
            let fm = |x: &ReferenceCoeffs| x.s_minus[n];
            let dp = (fp(&a) - 2.0 * fp(&b) + fp(&c)) / (h * h);
            let dm = (fm(&a) - 2.0 * fm(&b) + fm(&c)) / (h * h);
            r = r.max((dp + (-mu0 * mu0 + 4.0 * nf + 1.0) * fp(&b)).abs());
            r = r.max((dm + (-mu0 * mu0 + 4.0 * nf + 3.0) * fm(&b)).abs());
        }
        r
    };
    let rs: Vec<f64> = [1e-3, 5e-4, 2.5e-4].iter().map(|&h| residual(h)).collect();
    let orders: Vec<f64> = rs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let second_order = orders.iter().all(|&p| (1.7..=2.3).contains(&p));
    (
        rec <= 1e-10 && init <= 1e-9 && second_order,
        format!(
            "recursion {rec:.2e}; initial relations {init:.2e}; energy ODE residuals {:.2e}, {:.2e}, {:.2e} (orders {:.2}, {:.2})",
            rs[0], rs[1], rs[2], orders[0], orders[1]
        ),
    )
}

fn criterion_7() -> Check {
    // Fixed nonrelativistic problem: k = lambda, 2 M V0 = 2.
    let scale: f64 = 1.0;
    let mut devs = Vec::new();
    let mut complete = Vec::new();
    for ratio in [1e2, 1e3, 1e4] {
        let mass = ratio * scale;
        let kinetic = scale * scale / (2.0 * mass);
        let spec = PotentialSpec::vector(gaussian(1.0 / mass, 0.0));
        let params = BasisParams::new(scale, 40, MiddleBasisKind::KineticBalance { tau: scale / mass }).unwrap();
        let dirac = Solver::new(mass, spec.clone(), params, SolverOptions::default())
            .and_then(|s| s.solve(mass + kinetic))
            .map(|r| r.transmission());
        let schrodinger = nonrelativistic_oracle(&spec, kinetic, mass, &OracleOptions::default()).map(|r| r.t.norm_sqr());
        let reference = Solver::new(mass, spec.clone(), BasisParams::new(scale, 40, MiddleBasisKind::Spinor).unwrap(), SolverOptions::default())
            .and_then(|s| s.solve(mass + kinetic))
            .map(|r| r.transmission());
        match (dirac, schrodinger) {
            (Ok(d), Ok(s)) => {
                devs.push((d - s).abs());
                complete.push(reference.map_or(f64::NAN, |c| (c - s).abs()));
            }
            (d, s) => return (false, format!("solve failed at M/lambda = {ratio}: {d:?} {s:?}")),
        }
    }
    let ratios: Vec<f64> = devs.windows(2).map(|w| w[1] / w[0]).collect();
    let pass = ratios.iter().all(|r| (0.05..=0.2).contains(r));
    (
        pass,
        format!(
            "||T_D|^2 - |T_S|^2| = {:.3e}, {:.3e}, {:.3e}; successive ratios {:.3e}, {:.3e}; complete basis {:.3e}, {:.3e}, {:.3e}",
            devs[0], devs[1], devs[2], ratios[0], ratios[1], complete[0], complete[1], complete[2]
        ),
    )
}

fn criterion_8() -> Check {
    let spec = PotentialSpec::vector(gaussian(2.0, 0.0));
    let grid = PlateauGrid {
        energy: 1.5,
        scales: linspace(0.4, 3.0, 27),
        taus: Vec::new(),
        sizes: vec![20, 40, 60],
        kind: MiddleBasisKind::Spinor,
        tolerance: 1e-4,
    };
    let report = plateau_scan(1.0, &spec, SolverOptions::default(), &grid).unwrap();
    let t_oracle = oracle(&spec, 1.0, 1.5).0.norm_sqr();
    let dev = report
        .entries
        .iter()
        .map(|e| (e.center_value - t_oracle).abs())
        .fold(0.0f64, |a, b| if b.is_nan() { f64::INFINITY } else { a.max(b) });
    let widths: Vec<String> = report
        .entries
        .iter()
        .map(|e| format!("N={}: {:.2} [{:.2}, {:.2}]", e.size, e.width, e.lambda_lo, e.lambda_hi))
        .collect();
    (
        report.growing && dev < 1e-3,
        format!("widths {}; interior |T|^2 deviation {dev:.2e}", widths.join(", ")),
    )
}

fn criterion_9() -> Check {
    let kin = Kinematics::new(1.0, 2f64.sqrt(), 1.0).unwrap();
    let grid = linspace(0.0, 10.0, 1001);
    let mut half_widths = Vec::new();
    for n in [10usize, 20, 40] {
        let coeffs = ReferenceCoeffs::new(&kin, n).unwrap();
        let tail_size = |x: f64| {
            let (sp, sm) = sine_solutions(&kin, x, 1.0, 1.0);
            let (even, odd) = outer_basis_values(&kin, n, x);
            let mut head_p = [0.0; 2];
            let mut head_m = [0.0; 2];
            for j in 0..n {
                for c in 0..2 {
                    head_p[c] += coeffs.s_plus[j] * even[j][c];
                    head_m[c] += coeffs.s_minus[j] * odd[j][c];
                }
            }
            (0..2)
                .map(|c| (sp[c] - head_p[c]).abs().max((sm[c] - head_m[c]).abs()))
                .fold(0.0f64, f64::max)
        };
        let x_n = grid
            .iter()
            .take_while(|&&x| tail_size(x) < 1e-3 && tail_size(-x) < 1e-3)
            .last()
            .copied()
            .unwrap_or(0.0);
        let at_origin = tail_size(0.0);
        half_widths.push((n, x_n, at_origin));
    }
    let increasing = half_widths.windows(2).all(|w| w[1].1 > w[0].1);
    let parts: Vec<String> = half_widths
        .iter()
        .map(|(n, x, o)| format!("N={n}: x_N = {x:.2} (|tail(0)| = {o:.1e})"))
        .collect();
    (increasing, parts.join("; "))
}

fn criterion_10() -> Check {
    let scale: f64 = 1.0;
    let mut worst = 0.0f64;
    for mu in [0.5, 1.0, 2.0] {
        let mass: f64 = 1.0;
        let kin = Kinematics::new(mass, (mass * mass + (mu * scale).powi(2)).sqrt(), scale).unwrap();
        let coeffs = ReferenceCoeffs::new(&kin, 200).unwrap();
        for x in [8.0 / scale, -8.0 / scale] {
            let v = eval_reference_wavefunctions(&coeffs, x);
            let sign = x.signum();
            let (s, c) = ((kin.k * x).sin(), (kin.k * x).cos());
            let c_plus = [sign * s, sign * kin.omega * c];
            let c_minus = [sign * c, -sign * kin.omega * s];
            for i in 0..2 {
                worst = worst
                    .max((v.c_plus[i] - c_plus[i]).abs())
                    .max((v.c_minus[i] - c_minus[i]).abs());
            }
        }
    }
    (worst < 1e-3, format!("max componentwise deviation {worst:.2e} (mu = 0.5, 1, 2)"))
}

fn main() {
    // (id, name, runtime budget in seconds, check)
    let criteria: [Criterion; 10] = [
        (1, "free-particle identity", 5.0, criterion_1),
        (2, "unitarity", 30.0, criterion_2),
        (3, "oracle agreement", 120.0, criterion_3),
        (4, "parity decoupling", f64::INFINITY, criterion_4),
        (5, "Green function cross-validation", 5.0, criterion_5),
        (6, "reference-solution identities", f64::INFINITY, criterion_6),
        (7, "nonrelativistic limit", f64::INFINITY, criterion_7),
        (8, "plateau of stability", f64::INFINITY, criterion_8),
        (9, "truncated-tail region", f64::INFINITY, criterion_9),
        (10, "cosine-like asymptotics", f64::INFINITY, criterion_10),
    ];
    let strict = std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    let mut unexpected = Vec::new();
    for (id, name, budget, f) in criteria {
        let start = Instant::now();
        let (ok, detail) = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            (false, format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        let in_time = secs < budget;
        let pass = ok && in_time;
        let time_note = if budget.is_finite() {
            format!("{secs:.2} s of {budget:.0} s")
        } else {
            format!("{secs:.2} s")
        };
        let note = match (pass, EXPECTED_RED.contains(&id)) {
            (false, true) => " [known red]",
            (true, true) => " [known red now passes]",
            _ => "",
        };
        println!(
            "{} criterion {id:>2} ({name}): {detail} ({time_note}){note}",
            if pass { "PASS" } else { "FAIL" }
        );
        if !pass && (strict || !EXPECTED_RED.contains(&id)) {
            unexpected.push(id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected acceptance results for criteria {unexpected:?}");
        std::process::exit(1);
    }
}
