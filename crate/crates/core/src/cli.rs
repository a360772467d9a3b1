//! Configuration-driven runs writing CSV.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::config::{Mode, RunConfig};
use crate::error::Result;
use crate::oracle::{integrate_dirac, OracleOptions};
use crate::refsol::Kinematics;
use crate::scattering::{plateau_scan, PlateauGrid, ScatteringResult, Solver};

pub const SWEEP_COLUMNS: &str = "energy,k,re_T,im_T,re_R,im_R,T2,R2,unitarity_defect,coupling,flags";
pub const PLATEAU_COLUMNS: &str = "N,tau,lambda,T2,in_plateau";
pub const VALIDATE_COLUMNS: &str =
    "energy,re_T,im_T,re_T_oracle,im_T_oracle,re_R,im_R,re_R_oracle,im_R_oracle,abs_dT,abs_dR,flags";

/// Outcome of a run; `failed == points` means every point failed.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub mode: Mode,
    pub points: usize,
    pub failed: usize,
    /// Largest `|T - T_oracle|` in validate mode.
    pub max_deviation: Option<f64>,
    /// Plateau widths per basis size in plateau mode.
    pub plateau_widths: Vec<(usize, f64)>,
    pub plateau_growing: Option<bool>,
}

impl RunSummary {
    pub fn exit_code(&self) -> i32 {
        if self.points > 0 && self.failed == self.points {
            2
        } else {
            0
        }
    }
}

/// 17 significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_header(out: &mut dyn Write, config: &RunConfig, columns: &str) -> Result<()> {
    for line in config.to_text().lines() {
        writeln!(out, "# {line}")?;
    }
    writeln!(out, "{columns}")?;
    Ok(())
}

fn clean(message: &str) -> String {
    message.replace([',', '\n'], ";")
}

fn sweep_row(r: &std::result::Result<ScatteringResult, crate::Error>, energy: f64) -> String {
    match r {
        Ok(r) => {
            let f = [
                r.requested_energy,
                r.k,
                r.t.re,
                r.t.im,
                r.r.re,
                r.r.im,
                r.transmission(),
                r.reflection(),
                r.unitarity_defect,
                r.coupling,
            ];
            let mut row: Vec<String> = f.iter().map(|&x| fmt_float(x)).collect();
            row.push(r.flags.to_string());
            row.join(",")
        }
        Err(e) => {
            let mut row = vec![fmt_float(energy)];
            row.extend(std::iter::repeat_n("NaN".to_string(), 9));
            row.push(format!("error: {}", clean(&e.to_string())));
            row.join(",")
        }
    }
}

/// Runs the configured mode, writing CSV to `out`.
pub fn run(config: &RunConfig, out: &mut dyn Write) -> Result<RunSummary> {
    let spec = config.potential()?;
    match config.mode {
        Mode::Sweep => {
            write_header(out, config, SWEEP_COLUMNS)?;
            let energies = config.energies();
            let results = match Solver::new(config.mass, spec, config.basis_params()?, config.solver_options()) {
                Ok(s) => s.energy_sweep(&energies),
                Err(e) => {
                    let msg = e.to_string();
                    energies.iter().map(|_| Err(crate::Error::Domain(msg.clone()))).collect()
                }
            };
            for (r, &e) in results.iter().zip(&energies) {
                writeln!(out, "{}", sweep_row(r, e))?;
            }
            Ok(RunSummary {
                mode: Mode::Sweep,
                points: energies.len(),
                failed: results.iter().filter(|r| r.is_err()).count(),
                max_deviation: None,
                plateau_widths: Vec::new(),
                plateau_growing: None,
            })
        }
        Mode::Validate => {
            write_header(out, config, VALIDATE_COLUMNS)?;
            let energies = config.energies();
            let solver = Solver::new(config.mass, spec.clone(), config.basis_params()?, config.solver_options());
            let opts = OracleOptions {
                tolerance: config.oracle_tolerance,
                ..OracleOptions::default()
            };
            let rows: Vec<Result<(ScatteringResult, Complex64, Complex64)>> = energies
                .par_iter()
                .map(|&e| {
                    let s = solver.as_ref().map_err(|err| crate::Error::Domain(err.to_string()))?;
                    let r = s.solve(e)?;
                    let kin = Kinematics::new(config.mass, r.energy, config.lambda)?;
                    let o = integrate_dirac(&spec, &kin, &opts)?;
                    Ok((r, o.t, o.r))
                })
                .collect();
            let mut max_dev: f64 = 0.0;
            let mut failed = 0;
            for (row, &e) in rows.iter().zip(&energies) {
                match row {
                    Ok((r, t, rr)) => {
                        let dt = (r.t - t).norm();
                        let dr = (r.r - rr).norm();
                        max_dev = max_dev.max(dt);
                        let f = [e, r.t.re, r.t.im, t.re, t.im, r.r.re, r.r.im, rr.re, rr.im, dt, dr];
                        let mut cells: Vec<String> = f.iter().map(|&x| fmt_float(x)).collect();
                        cells.push(r.flags.to_string());
                        writeln!(out, "{}", cells.join(","))?;
                    }
                    Err(err) => {
                        failed += 1;
                        let mut cells = vec![fmt_float(e)];
                        cells.extend(std::iter::repeat_n("NaN".to_string(), 10));
                        cells.push(format!("error: {}", clean(&err.to_string())));
                        writeln!(out, "{}", cells.join(","))?;
                    }
                }
            }
            let max_deviation = (failed < energies.len()).then_some(max_dev);
            if let Some(m) = max_deviation {
                writeln!(out, "# max_abs_dT = {}", fmt_float(m))?;
            }
            Ok(RunSummary {
                mode: Mode::Validate,
                points: energies.len(),
                failed,
                max_deviation,
                plateau_widths: Vec::new(),
                plateau_growing: None,
            })
        }
        Mode::Plateau => {
            write_header(out, config, PLATEAU_COLUMNS)?;
            let scales = config.plateau_scales();
            let grid = PlateauGrid {
                energy: config.plateau_energy,
                scales: scales.clone(),
                taus: config.plateau_taus.clone(),
                sizes: config.plateau_sizes.clone(),
                kind: config.basis_kind(),
                tolerance: config.plateau_tolerance,
            };
            let report = plateau_scan(config.mass, &spec, config.solver_options(), &grid)?;
            let mut points = 0;
            let mut failed = 0;
            for entry in &report.entries {
                for (&lambda, &t2) in scales.iter().zip(&entry.values) {
                    points += 1;
                    if !t2.is_finite() {
                        failed += 1;
                    }
                    let inside = lambda >= entry.lambda_lo && lambda <= entry.lambda_hi;
                    let tau = if entry.tau.is_nan() { "NaN".to_string() } else { fmt_float(entry.tau) };
                    writeln!(
                        out,
                        "{},{},{},{},{}",
                        entry.size,
                        tau,
                        fmt_float(lambda),
                        fmt_float(t2),
                        u8::from(inside)
                    )?;
                }
            }
            for entry in &report.entries {
                writeln!(
                    out,
                    "# plateau N = {} width = {} lambda = [{}, {}] T2 = {}",
                    entry.size,
                    fmt_float(entry.width),
                    fmt_float(entry.lambda_lo),
                    fmt_float(entry.lambda_hi),
                    fmt_float(entry.center_value)
                )?;
            }
            writeln!(out, "# plateau widths non-decreasing = {}", report.growing)?;
            Ok(RunSummary {
                mode: Mode::Plateau,
                points,
                failed,
                max_deviation: None,
                plateau_widths: report.entries.iter().map(|e| (e.size, e.width)).collect(),
                plateau_growing: Some(report.growing),
            })
        }
    }
}
