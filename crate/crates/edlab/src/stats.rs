//! Expectations, variances, and covariances of position and the four
//! momenta, plus the uncertainty-relation slack values.
//!
//! Local momenta (drift, osmotic, current) are averaged with weight `rho`;
//! quantum-momentum moments are computed spectrally from `-i hbar d/dx`
//! acting on the wavefunction, so the cross-representation identities
//! (equal means, variance decomposition) are genuine checks rather than
//! tautologies.

use num_complex::Complex64;
use serde::Serialize;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Grid1D, PhysicalParams};
use crate::spectral::Spectral;
use crate::state::{decompose, gaussian_density, WaveState};

/// Saturation flag threshold on |slack|.
pub const SATURATION_TOL: f64 = 1e-6;

/// First and second moments of position and all four momenta.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MomentReport {
    pub t: f64,
    pub mean_x: f64,
    pub var_x: f64,
    pub mean_pd: f64,
    pub var_pd: f64,
    pub mean_po: f64,
    pub var_po: f64,
    pub mean_pc: f64,
    pub var_pc: f64,
    pub mean_pq: f64,
    pub second_moment_pq: f64,
    pub var_pq: f64,
    pub cov_x_pd: f64,
    pub cov_x_po: f64,
    pub cov_x_pc: f64,
    pub cov_x_pq: f64,
}

impl MomentReport {
    fn check_variances(&self) -> Result<()> {
        for (name, v) in [
            ("var_x", self.var_x),
            ("var_pd", self.var_pd),
            ("var_po", self.var_po),
            ("var_pc", self.var_pc),
            ("var_pq", self.var_pq),
        ] {
            if v < -1e-12 {
                return Err(Error::IdentityViolation {
                    what: name,
                    deviation: v,
                });
            }
        }
        Ok(())
    }
}

/// Slack values (left minus right side) of the uncertainty relations;
/// nonnegative for any valid state, zero at saturation.
#[derive(Debug, Clone, Serialize)]
pub struct URReport {
    pub t: f64,
    pub slack_osmotic: f64,
    pub slack_drift: f64,
    pub slack_current: f64,
    pub slack_schrodinger: f64,
    pub slack_heisenberg: f64,
    pub decomposition_residual: f64,
    pub saturated: Vec<String>,
}

/// Which momentum to correlate with position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentumKind {
    Drift,
    Osmotic,
    Current,
    Quantum,
}

/// rho-weighted quadrature `sum rho f dx`.
pub fn rho_expectation(f: &[f64], rho: &[f64], dx: f64) -> Result<f64> {
    if f.len() != rho.len() {
        return Err(Error::GridMismatch(f.len(), rho.len()));
    }
    Ok(f.iter().zip(rho).map(|(&a, &r)| r * a).sum::<f64>() * dx)
}

fn weighted_mean_var(f: &[f64], rho: &[f64], dx: f64) -> (f64, f64) {
    let mean = f.iter().zip(rho).map(|(&a, &r)| r * a).sum::<f64>() * dx;
    let var = f
        .iter()
        .zip(rho)
        .map(|(&a, &r)| r * (a - mean) * (a - mean))
        .sum::<f64>()
        * dx;
    (mean, var)
}

fn weighted_cov(f: &[f64], g: &[f64], rho: &[f64], dx: f64, mf: f64, mg: f64) -> f64 {
    f.iter()
        .zip(g)
        .zip(rho)
        .map(|((&a, &b), &r)| r * (a - mf) * (b - mg))
        .sum::<f64>()
        * dx
}

/// Full moment report for a state. Requires boundary negligibility: the
/// momentum identities assume the density vanishes at the domain edges.
pub fn momentum_moments(state: &WaveState) -> Result<MomentReport> {
    state.validate()?;
    state.check_boundary()?;
    let h = decompose(state)?;
    let grid = *state.grid();
    let params = state.params();
    let dx = grid.dx();
    let xs = grid.points();

    let (mean_x, var_x) = weighted_mean_var(&xs, &h.rho, dx);
    let (mean_pd, var_pd) = weighted_mean_var(&h.p_d, &h.rho, dx);
    let (mean_po, var_po) = weighted_mean_var(&h.p_o, &h.rho, dx);
    let (mean_pc, var_pc) = weighted_mean_var(&h.p_c, &h.rho, dx);

    let sp = Spectral::new(&grid);
    let dpsi = sp.derivative(state.psi());
    let d2psi = sp.second_derivative(state.psi());
    let hbar = params.hbar;

    let mut mom1 = Complex64::new(0.0, 0.0);
    let mut mom2 = Complex64::new(0.0, 0.0);
    let mut xp = Complex64::new(0.0, 0.0);
    for j in 0..grid.n() {
        let conj = state.psi()[j].conj();
        let p_psi = Complex64::new(0.0, -hbar) * dpsi[j];
        mom1 += conj * p_psi;
        mom2 += conj * (-hbar * hbar) * d2psi[j];
        xp += conj * xs[j] * p_psi;
    }
    mom1 *= dx;
    mom2 *= dx;
    xp *= dx;

    if mom1.im.abs() > 1e-10 {
        return Err(Error::IdentityViolation {
            what: "Im <p_q>",
            deviation: mom1.im,
        });
    }
    if mom2.im.abs() > 1e-8 {
        return Err(Error::IdentityViolation {
            what: "Im <p_q^2>",
            deviation: mom2.im,
        });
    }

    let mean_pq = mom1.re;
    let second_moment_pq = mom2.re;
    let var_pq = second_moment_pq - mean_pq * mean_pq;

    let report = MomentReport {
        t: state.t(),
        mean_x,
        var_x,
        mean_pd,
        var_pd,
        mean_po,
        var_po,
        mean_pc,
        var_pc,
        mean_pq,
        second_moment_pq,
        var_pq,
        cov_x_pd: weighted_cov(&xs, &h.p_d, &h.rho, dx, mean_x, mean_pd),
        cov_x_po: weighted_cov(&xs, &h.p_o, &h.rho, dx, mean_x, mean_po),
        cov_x_pc: weighted_cov(&xs, &h.p_c, &h.rho, dx, mean_x, mean_pc),
        // Symmetrized operator covariance: (1/2)<x p_q + p_q x> = Re <x p_q>.
        cov_x_pq: xp.re - mean_x * mean_pq,
    };
    report.check_variances()?;
    Ok(report)
}

/// Position-momentum covariance for one momentum notion. For the quantum
/// momentum the symmetrized operator form is used and cross-checked against
/// `Cov(x, p_c)`, to which it must be equal for boundary-negligible states.
pub fn covariance_x_p(state: &WaveState, which: MomentumKind) -> Result<f64> {
    let m = momentum_moments(state)?;
    match which {
        MomentumKind::Drift => Ok(m.cov_x_pd),
        MomentumKind::Osmotic => Ok(m.cov_x_po),
        MomentumKind::Current => Ok(m.cov_x_pc),
        MomentumKind::Quantum => {
            let dev = m.cov_x_pq - m.cov_x_pc;
            if dev.abs() > 1e-9 {
                return Err(Error::IdentityViolation {
                    what: "Cov(x,p_q) = Cov(x,p_c)",
                    deviation: dev,
                });
            }
            Ok(m.cov_x_pq)
        }
    }
}

/// Derive every uncertainty-relation slack from a moment report.
pub fn ur_from_moments(m: &MomentReport, hbar: f64) -> URReport {
    let q = 0.25 * hbar * hbar;
    let slack_osmotic = m.var_x * m.var_po - q;
    let slack_drift = m.var_x * m.var_pd - m.cov_x_pd * m.cov_x_pd;
    let slack_current = m.var_x * m.var_pc - m.cov_x_pc * m.cov_x_pc;
    let slack_schrodinger = m.var_x * m.var_pq - m.cov_x_pq * m.cov_x_pq - q;
    let slack_heisenberg = m.var_x * m.var_pq - q;
    let mut saturated = Vec::new();
    for (name, s) in [
        ("osmotic", slack_osmotic),
        ("drift", slack_drift),
        ("current", slack_current),
        ("schrodinger", slack_schrodinger),
        ("heisenberg", slack_heisenberg),
    ] {
        if s.abs() < SATURATION_TOL {
            saturated.push(name.to_string());
        }
    }
    URReport {
        t: m.t,
        slack_osmotic,
        slack_drift,
        slack_current,
        slack_schrodinger,
        slack_heisenberg,
        decomposition_residual: m.var_pq - m.var_pc - m.var_po,
        saturated,
    }
}

/// Uncertainty-relation report for a state.
pub fn uncertainty_report(state: &WaveState) -> Result<URReport> {
    let m = momentum_moments(state)?;
    Ok(ur_from_moments(&m, state.params().hbar))
}

/// One row of the drift-covariance scan.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DriftCovRow {
    pub sigma: f64,
    pub cov_x_pd: f64,
    pub analytic: f64,
}

/// Scan `Cov(x, p_d)` over synthetic states with `rho = N(0, sigma^2)` and
/// an independent entropy field `S = k x^2 / 2`, so `p_d = hbar k x` and the
/// covariance is `hbar k sigma^2`: it shrinks with the distribution, which
/// is why the drift-momentum bound has no hbar/2 floor.
pub fn drift_cov_scan(
    grid: &Grid1D,
    sigma_list: &[f64],
    curvature: f64,
    params: PhysicalParams,
) -> Result<Vec<DriftCovRow>> {
    let mut rows = Vec::with_capacity(sigma_list.len());
    for &sigma in sigma_list {
        let limit = 4.0 * grid.dx();
        if sigma < limit {
            return Err(Error::SigmaTooNarrow { sigma, limit });
        }
        let rho = gaussian_density(grid, 0.0, sigma);
        // phi = S - log rho^{1/2}; clamp the log where rho underflows
        // (amplitude is zero there so the phase value is immaterial).
        let phi: Vec<f64> = grid
            .points()
            .iter()
            .zip(&rho)
            .map(|(&x, &r)| {
                0.5 * curvature * x * x - 0.5 * r.max(f64::MIN_POSITIVE).ln()
            })
            .collect();
        let state = WaveState::compose(*grid, &rho, &phi, 0.0, params)?;
        let cov = covariance_x_p(&state, MomentumKind::Drift)?;
        rows.push(DriftCovRow {
            sigma,
            cov_x_pd: cov,
            analytic: params.hbar * curvature * sigma * sigma,
        });
    }
    Ok(rows)
}

/// Moment and uncertainty reports for a batch of states, sequentially.
pub fn corpus_reports_seq(states: &[WaveState]) -> Result<Vec<(MomentReport, URReport)>> {
    states
        .iter()
        .map(|s| {
            let m = momentum_moments(s)?;
            let ur = ur_from_moments(&m, s.params().hbar);
            Ok((m, ur))
        })
        .collect()
}

/// Moment and uncertainty reports for a batch of states. States are
/// independent, so the evaluation parallelizes over them with results
/// identical to the sequential path.
#[cfg(feature = "parallel")]
pub fn corpus_reports(states: &[WaveState]) -> Result<Vec<(MomentReport, URReport)>> {
    states
        .par_iter()
        .map(|s| {
            let m = momentum_moments(s)?;
            let ur = ur_from_moments(&m, s.params().hbar);
            Ok((m, ur))
        })
        .collect()
}

#[cfg(not(feature = "parallel"))]
pub fn corpus_reports(states: &[WaveState]) -> Result<Vec<(MomentReport, URReport)>> {
    corpus_reports_seq(states)
}
