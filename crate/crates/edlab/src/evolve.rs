//! Time evolution: Strang-split spectral steppers for the linear and
//! general-osmotic-mass equations, a conservative upwind Fokker-Planck
//! update, the energy functional, the quantum Hamilton-Jacobi residual,
//! and the regraduation map between osmotic-mass theories.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Grid1D, PhysicalParams};
use crate::spectral::Spectral;
use crate::state::{decompose, reconstruct_phase, WaveState};

/// External potential sampled on the grid.
#[derive(Debug, Clone, Serialize)]
pub struct Potential {
    values: Vec<f64>,
    label: String,
}

impl Potential {
    pub fn free(grid: &Grid1D) -> Self {
        Potential {
            values: vec![0.0; grid.n()],
            label: "free".to_string(),
        }
    }

    /// `V(x) = m omega^2 x^2 / 2`.
    pub fn harmonic(grid: &Grid1D, omega: f64, params: PhysicalParams) -> Self {
        let values = grid
            .points()
            .iter()
            .map(|&x| 0.5 * params.m * omega * omega * x * x)
            .collect();
        Potential {
            values,
            label: format!("harmonic(omega={omega})"),
        }
    }

    pub fn from_samples(grid: &Grid1D, values: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::GridMismatch(values.len(), grid.n()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericAbort("potential samples"));
        }
        Ok(Potential {
            values,
            label: label.into(),
        })
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn label(&self) -> &str {
        &self.label
    }
}

/// Step-size policy for a run. The splitting is unconditionally stable;
/// `dt_max` is an accuracy advisory tied to the grid's maximum wavenumber,
/// not a hard bound (see `accuracy_ok`).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EvolveConfig {
    pub dt: f64,
    pub steps_per_output: usize,
}

impl EvolveConfig {
    pub fn new(dt: f64, steps_per_output: usize) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidTimeStep(dt));
        }
        Ok(EvolveConfig {
            dt,
            steps_per_output: steps_per_output.max(1),
        })
    }

    /// Advisory step bound `2 m dx^2 / (hbar pi^2) * 0.5` that keeps the
    /// kinetic phase at the grid Nyquist mode small.
    pub fn dt_max(grid: &Grid1D, params: PhysicalParams) -> f64 {
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        2.0 * params.m * grid.dx() * grid.dx() / (params.hbar * pi2) * 0.5
    }

    pub fn accuracy_ok(&self, grid: &Grid1D, params: PhysicalParams) -> bool {
        self.dt <= Self::dt_max(grid, params)
    }
}

fn check_finite(psi: &[Complex64]) -> Result<()> {
    if psi.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NumericAbort("wavefunction after step"));
    }
    Ok(())
}

fn half_kinetic(sp: &Spectral, psi: &mut [Complex64], params: PhysicalParams, dt: f64) {
    let coeff = params.hbar * dt / (4.0 * params.m);
    sp.apply_in_k(psi, |k| Complex64::from_polar(1.0, -coeff * k * k));
}

/// One Strang step of the linear equation: half kinetic (spectral phase
/// `exp(-i hbar k^2 dt / 4m)`), full potential, half kinetic. Norm is
/// preserved to roundoff; the time stamp advances by `dt`.
pub fn step_schrodinger(state: &WaveState, v: &Potential, dt: f64) -> Result<WaveState> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidTimeStep(dt));
    }
    let grid = *state.grid();
    if v.values.len() != grid.n() {
        return Err(Error::GridMismatch(v.values.len(), grid.n()));
    }
    let params = state.params();
    let sp = Spectral::new(&grid);
    let mut psi = state.psi().to_vec();

    half_kinetic(&sp, &mut psi, params, dt);
    let scale = dt / params.hbar;
    for (z, &vj) in psi.iter_mut().zip(&v.values) {
        *z *= Complex64::from_polar(1.0, -vj * scale);
    }
    half_kinetic(&sp, &mut psi, params, dt);

    check_finite(&psi)?;
    Ok(WaveState::from_parts(grid, psi, state.t() + dt, params))
}

/// Quantum-potential field `d2(sqrt rho) / sqrt rho`, excised below the
/// density floor.
fn quantum_potential_ratio(grid: &Grid1D, sp: &Spectral, psi: &[Complex64]) -> Result<Vec<f64>> {
    let sqrt_rho: Vec<f64> = psi.iter().map(|z| z.norm()).collect();
    let max = sqrt_rho.iter().cloned().fold(0.0, f64::max);
    if !(max > 0.0) {
        return Err(Error::ZeroDensity);
    }
    let floor = (crate::state::DENSITY_FLOOR_REL).sqrt() * max;
    let d2 = sp.second_derivative_real(&sqrt_rho);
    Ok((0..grid.n())
        .map(|j| {
            if sqrt_rho[j] >= floor {
                d2[j] / sqrt_rho[j]
            } else {
                0.0
            }
        })
        .collect())
}

/// One Strang step of the general-osmotic-mass equation. The potential
/// substep uses the effective potential
/// `V_eff = V + (hbar^2/2m)(1 - mu/m) d2(sqrt rho)/sqrt rho`
/// frozen at the current density; since a pure phase rotation leaves the
/// density untouched, the substep is self-consistent without iteration.
/// Reduces exactly to `step_schrodinger` for `mu = m`.
pub fn step_general_mu(state: &WaveState, v: &Potential, dt: f64) -> Result<WaveState> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidTimeStep(dt));
    }
    let grid = *state.grid();
    if v.values.len() != grid.n() {
        return Err(Error::GridMismatch(v.values.len(), grid.n()));
    }
    let params = state.params();
    let sp = Spectral::new(&grid);
    let mut psi = state.psi().to_vec();

    half_kinetic(&sp, &mut psi, params, dt);

    let q = quantum_potential_ratio(&grid, &sp, &psi)?;
    let coeff =
        (params.hbar * params.hbar / (2.0 * params.m)) * (1.0 - params.mu / params.m);
    let scale = dt / params.hbar;
    let max_phase = q
        .iter()
        .map(|&qj| (coeff * qj * scale).abs())
        .fold(0.0, f64::max);
    if max_phase > std::f64::consts::PI {
        return Err(Error::QuantumPotentialOverflow(max_phase));
    }
    for (j, z) in psi.iter_mut().enumerate() {
        let v_eff = v.values[j] + coeff * q[j];
        *z *= Complex64::from_polar(1.0, -v_eff * scale);
    }

    half_kinetic(&sp, &mut psi, params, dt);

    check_finite(&psi)?;
    Ok(WaveState::from_parts(grid, psi, state.t() + dt, params))
}

/// Conservative first-order upwind update of `d rho/dt = -d(rho v)/dx` on
/// the periodic grid. Total mass is conserved exactly up to roundoff.
/// Errors if the CFL number `max|v| dt/dx` exceeds 0.9.
pub fn step_fokker_planck(rho: &[f64], v: &[f64], dt: f64, grid: &Grid1D) -> Result<Vec<f64>> {
    let n = grid.n();
    if rho.len() != n {
        return Err(Error::GridMismatch(rho.len(), n));
    }
    if v.len() != n {
        return Err(Error::GridMismatch(v.len(), n));
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidTimeStep(dt));
    }
    let vmax = v.iter().fold(0.0_f64, |a, &b| a.max(b.abs()));
    let cfl = vmax * dt / grid.dx();
    if cfl > 0.9 {
        return Err(Error::CflViolation(cfl));
    }
    // Face j sits between cells j and j+1; upwind by the face velocity sign.
    let mut flux = vec![0.0; n];
    for j in 0..n {
        let jp = (j + 1) % n;
        let vf = 0.5 * (v[j] + v[jp]);
        flux[j] = if vf >= 0.0 { vf * rho[j] } else { vf * rho[jp] };
    }
    let lambda = dt / grid.dx();
    let mut out = vec![0.0; n];
    for j in 0..n {
        let jm = (j + n - 1) % n;
        out[j] = rho[j] - lambda * (flux[j] - flux[jm]);
    }
    Ok(out)
}

/// Energy functional `E = sum rho (m v^2/2 + mu u^2/2 + V) dx` evaluated
/// from the hydrodynamic decomposition. `mu` is passed explicitly so the
/// functional can be probed away from the state's own osmotic mass.
pub fn energy(state: &WaveState, v: &Potential, mu: f64) -> Result<f64> {
    let grid = *state.grid();
    if v.values.len() != grid.n() {
        return Err(Error::GridMismatch(v.values.len(), grid.n()));
    }
    let h = decompose(state)?;
    let m = state.params().m;
    let mut e = 0.0;
    for j in 0..grid.n() {
        e += h.rho[j] * (0.5 * m * h.v[j] * h.v[j] + 0.5 * mu * h.u[j] * h.u[j] + v.values[j]);
    }
    Ok(e * grid.dx())
}

/// Pointwise quantum Hamilton-Jacobi residual between two consecutive
/// states, centered to quotient out the additive constant in the phase.
#[derive(Debug, Clone)]
pub struct QhjResidual {
    /// Centered residual field (zero in floored regions).
    pub field: Vec<f64>,
    /// rho-weighted L2 norm of the centered field.
    pub norm: f64,
}

/// Evaluate the phase-evolution residual
/// `R = eta dphi/dt + (eta^2/2m)(dphi)^2 + V - (mu eta^2/2m^2) d2(sqrt rho)/sqrt rho`
/// at the midpoint of one step. `dphi` is `Im log(Psi_b/Psi_a)` pointwise;
/// no unwrapping is needed for small steps. Returns the centered field and
/// its rho-weighted norm.
pub fn qhj_residual(
    state_a: &WaveState,
    state_b: &WaveState,
    v: &Potential,
    mu: f64,
) -> Result<QhjResidual> {
    let grid = *state_a.grid();
    if state_b.grid() != &grid {
        return Err(Error::GridMismatch(state_b.grid().n(), grid.n()));
    }
    if v.values.len() != grid.n() {
        return Err(Error::GridMismatch(v.values.len(), grid.n()));
    }
    if state_a.params() != state_b.params() {
        return Err(Error::ParamsMismatch);
    }
    let dt = state_b.t() - state_a.t();
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::TimeMismatch(state_a.t(), state_b.t()));
    }
    let params = state_a.params();
    let eta = params.hbar;
    let m = params.m;
    let n = grid.n();

    let ha = decompose(state_a)?;
    let hb = decompose(state_b)?;
    let rho_mid: Vec<f64> = ha
        .rho
        .iter()
        .zip(&hb.rho)
        .map(|(&a, &b)| 0.5 * (a + b))
        .collect();
    let max_mid = rho_mid.iter().cloned().fold(0.0, f64::max);
    let floor = crate::state::DENSITY_FLOOR_REL * max_mid;

    let sp = Spectral::new(&grid);
    let sqrt_mid: Vec<f64> = rho_mid.iter().map(|&r| r.sqrt()).collect();
    let d2 = sp.second_derivative_real(&sqrt_mid);

    let mut field = vec![0.0; n];
    let mut mean = 0.0;
    for j in 0..n {
        if rho_mid[j] >= floor {
            let dphi = (state_b.psi()[j] * state_a.psi()[j].conj()).arg();
            let v_mid = 0.5 * (ha.v[j] + hb.v[j]);
            let q = d2[j] / sqrt_mid[j];
            field[j] = eta * dphi / dt + 0.5 * m * v_mid * v_mid + v.values[j]
                - mu * eta * eta / (2.0 * m * m) * q;
            mean += rho_mid[j] * field[j];
        }
    }
    mean *= grid.dx();
    let mut norm = 0.0;
    for j in 0..n {
        if rho_mid[j] >= floor {
            field[j] -= mean;
            norm += rho_mid[j] * field[j] * field[j];
        }
    }
    Ok(QhjResidual {
        field,
        norm: (norm * grid.dx()).sqrt(),
    })
}

/// Regraduation map between osmotic-mass theories. The phase is rescaled as
/// `phi -> kappa phi` with `eta -> eta/kappa` and `mu -> kappa^2 mu`, which
/// leaves the density evolution invariant: the current velocity
/// `(eta/m) dphi` and the quantum-potential coefficient `mu eta^2` are both
/// unchanged. Choosing `kappa = sqrt(m/mu)` maps any `mu > 0` theory onto
/// the linear one.
pub fn regraduate(state: &WaveState, kappa: f64) -> Result<(WaveState, PhysicalParams)> {
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(Error::InvalidKappa(kappa));
    }
    let params = state.params();
    let new_params = PhysicalParams::new(
        params.hbar / kappa,
        params.m,
        kappa * kappa * params.mu,
    )?;
    if kappa == 1.0 {
        return Ok((state.clone(), new_params));
    }
    let h = decompose(state)?;
    // Continuous phase from the current velocity, anchored at the density
    // maximum with the principal phase there (a global phase offset is
    // physically irrelevant).
    let j0 = h
        .rho
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(j, _)| j)
        .unwrap();
    let anchor = state.psi()[j0].arg();
    let phi = reconstruct_phase(&h, anchor);
    let psi: Vec<Complex64> = h
        .rho
        .iter()
        .zip(&phi)
        .map(|(&r, &p)| Complex64::from_polar(r.sqrt(), kappa * p))
        .collect();
    let mapped = WaveState::from_parts(*state.grid(), psi, state.t(), new_params);
    Ok((mapped, new_params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::{gaussian_packet, harmonic_ground};
    use crate::state::gaussian_density;
    use crate::stats::momentum_moments;

    fn setup() -> (Grid1D, PhysicalParams) {
        (
            Grid1D::new(1024, -20.0, 20.0).unwrap(),
            PhysicalParams::new(1.0, 1.0, 1.0).unwrap(),
        )
    }

    fn evolve_n(
        mut state: WaveState,
        v: &Potential,
        dt: f64,
        steps: usize,
        general: bool,
    ) -> WaveState {
        for _ in 0..steps {
            state = if general {
                step_general_mu(&state, v, dt).unwrap()
            } else {
                step_schrodinger(&state, v, dt).unwrap()
            };
        }
        state
    }

    #[test]
    fn free_packet_spreads_to_var_two() {
        let (grid, params) = setup();
        let (state, _) = gaussian_packet(1.0, 0.0, 0.0, 0.0, &grid, params).unwrap();
        let v = Potential::free(&grid);
        let out = evolve_n(state, &v, 1e-3, 2000, false);
        let m = momentum_moments(&out).unwrap();
        assert!((m.var_x - 2.0).abs() < 1e-4, "var_x = {}", m.var_x);
        assert!((out.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn harmonic_ground_state_is_stationary() {
        let (grid, params) = setup();
        let (state, _) = harmonic_ground(1.0, &grid, params).unwrap();
        let v = Potential::harmonic(&grid, 1.0, params);
        let rho0 = state.density();
        let out = evolve_n(state, &v, 1e-4, 5000, false);
        let rho = out.density();
        let dev = rho
            .iter()
            .zip(&rho0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(dev < 1e-8, "density drift {dev:e}");
    }

    #[test]
    fn boosted_packet_obeys_ehrenfest_drift() {
        let (grid, params) = setup();
        let (state, _) = gaussian_packet(1.0, 0.0, 1.0, 0.0, &grid, params).unwrap();
        let v = Potential::free(&grid);
        let out = evolve_n(state, &v, 1e-3, 1000, false);
        let m = momentum_moments(&out).unwrap();
        assert!((m.mean_x - 1.0).abs() < 1e-6, "mean_x = {}", m.mean_x);
    }

    #[test]
    fn general_mu_equals_linear_when_mu_is_m() {
        let (grid, params) = setup();
        let (state, _) = gaussian_packet(1.0, 0.0, 0.5, 0.0, &grid, params).unwrap();
        let v = Potential::harmonic(&grid, 1.0, params);
        let a = step_schrodinger(&state, &v, 1e-3).unwrap();
        let b = step_general_mu(&state, &v, 1e-3).unwrap();
        for (za, zb) in a.psi().iter().zip(b.psi()) {
            assert!((za - zb).norm() < 1e-12);
        }
    }

    #[test]
    fn hybrid_static_gaussian_does_not_spread() {
        let grid = Grid1D::new(1024, -20.0, 20.0).unwrap();
        let params = PhysicalParams::new(1.0, 1.0, 0.0).unwrap();
        let rho = gaussian_density(&grid, 0.0, 1.0);
        let phi = vec![0.0; grid.n()];
        let state = WaveState::compose(grid, &rho, &phi, 0.0, params).unwrap();
        let v = Potential::free(&grid);
        let out = evolve_n(state, &v, 1e-3, 2000, true);
        let m = momentum_moments(&out).unwrap();
        assert!((m.var_x - 1.0).abs() < 1e-3, "var_x = {}", m.var_x);
    }

    #[test]
    fn energy_examples() {
        let (grid, params) = setup();
        let (packet, _) = gaussian_packet(1.0, 0.0, 0.0, 0.0, &grid, params).unwrap();
        let e = energy(&packet, &Potential::free(&grid), 1.0).unwrap();
        assert!((e - 0.125).abs() < 1e-9, "free packet energy {e}");

        let (hg, _) = harmonic_ground(1.0, &grid, params).unwrap();
        let v = Potential::harmonic(&grid, 1.0, params);
        let e = energy(&hg, &v, 1.0).unwrap();
        assert!((e - 0.5).abs() < 1e-9, "harmonic ground energy {e}");

        let hybrid = PhysicalParams::new(1.0, 1.0, 0.0).unwrap();
        let rho = gaussian_density(&grid, 0.0, 1.0);
        let phi = vec![0.0; grid.n()];
        let st = WaveState::compose(grid, &rho, &phi, 0.0, hybrid).unwrap();
        let e = energy(&st, &Potential::free(&grid), 0.0).unwrap();
        assert!(e.abs() < 1e-12, "hybrid static energy {e}");
    }

    #[test]
    fn hybrid_energy_stays_zero_under_evolution() {
        let grid = Grid1D::new(1024, -20.0, 20.0).unwrap();
        let params = PhysicalParams::new(1.0, 1.0, 0.0).unwrap();
        let rho = gaussian_density(&grid, 0.0, 1.0);
        let phi = vec![0.0; grid.n()];
        let state = WaveState::compose(grid, &rho, &phi, 0.0, params).unwrap();
        let v = Potential::free(&grid);
        let out = evolve_n(state, &v, 1e-3, 500, true);
        let e = energy(&out, &v, 0.0).unwrap();
        assert!(e.abs() < 1e-9, "hybrid energy {e}");
    }

    #[test]
    fn fokker_planck_zero_velocity_is_identity() {
        let (grid, _) = setup();
        let rho = gaussian_density(&grid, 0.0, 1.0);
        let v = vec![0.0; grid.n()];
        let out = step_fokker_planck(&rho, &v, 1e-3, &grid).unwrap();
        assert_eq!(out, rho);
    }

    #[test]
    fn fokker_planck_advects_mean_exactly() {
        let (grid, _) = setup();
        let mut rho = gaussian_density(&grid, 0.0, 1.0);
        let c = 0.5;
        let v = vec![c; grid.n()];
        let dt = 1e-2;
        let steps = 100;
        let xs = grid.points();
        let mean0: f64 = xs.iter().zip(&rho).map(|(&x, &r)| x * r).sum::<f64>() * grid.dx();
        let mass0: f64 = rho.iter().sum::<f64>() * grid.dx();
        for _ in 0..steps {
            rho = step_fokker_planck(&rho, &v, dt, &grid).unwrap();
        }
        let mean: f64 = xs.iter().zip(&rho).map(|(&x, &r)| x * r).sum::<f64>() * grid.dx();
        let mass: f64 = rho.iter().sum::<f64>() * grid.dx();
        assert!(((mean - mean0) - c * dt * steps as f64).abs() < 1e-10);
        assert!((mass - mass0).abs() < 1e-13);
        assert!(rho.iter().all(|&r| r >= 0.0));
        // First-order upwind smears but the profile stays close to the
        // translated Gaussian.
        let target = gaussian_density(&grid, c * dt * steps as f64, 1.0);
        let l1: f64 = rho
            .iter()
            .zip(&target)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            * grid.dx();
        assert!(l1 < 0.05, "L1 deviation {l1}");
    }

    #[test]
    fn fokker_planck_rejects_cfl_violation() {
        let (grid, _) = setup();
        let rho = gaussian_density(&grid, 0.0, 1.0);
        let v = vec![100.0; grid.n()];
        assert!(matches!(
            step_fokker_planck(&rho, &v, 1e-2, &grid),
            Err(Error::CflViolation(..))
        ));
    }

    #[test]
    fn fokker_planck_tracks_schrodinger_density() {
        let (grid, params) = setup();
        let (mut psi_state, _) = gaussian_packet(1.0, 0.0, 0.0, 0.0, &grid, params).unwrap();
        let v_pot = Potential::free(&grid);
        let dt = 1e-3;
        let mut rho_fp = psi_state.density();
        for _ in 0..1000 {
            let h = decompose(&psi_state).unwrap();
            rho_fp = step_fokker_planck(&rho_fp, &h.v, dt, &grid).unwrap();
            psi_state = step_schrodinger(&psi_state, &v_pot, dt).unwrap();
        }
        let rho_se = psi_state.density();
        let dev = rho_fp
            .iter()
            .zip(&rho_se)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(dev < 5e-3, "FP/SE deviation {dev:e}");
    }

    #[test]
    fn qhj_residual_examples() {
        let (grid, params) = setup();

        // Stationary state: the residual is spatially constant and vanishes
        // after centering.
        let (hg, _) = harmonic_ground(1.0, &grid, params).unwrap();
        let v = Potential::harmonic(&grid, 1.0, params);
        let hg1 = step_schrodinger(&hg, &v, 1e-3).unwrap();
        let r = qhj_residual(&hg, &hg1, &v, params.mu).unwrap();
        assert!(r.norm < 1e-6, "stationary residual {:e}", r.norm);

        // Free packet: centered residual small and O(dt^2) convergent.
        let (packet, _) = gaussian_packet(1.0, 0.0, 0.0, 0.0, &grid, params).unwrap();
        let free = Potential::free(&grid);
        let b1 = step_schrodinger(&packet, &free, 1e-3).unwrap();
        let r1 = qhj_residual(&packet, &b1, &free, params.mu).unwrap();
        assert!(r1.norm < 1e-4, "free residual {:e}", r1.norm);
        let b2 = step_schrodinger(&packet, &free, 5e-4).unwrap();
        let r2 = qhj_residual(&packet, &b2, &free, params.mu).unwrap();
        let ratio = r1.norm / r2.norm;
        assert!(
            (3.5..=4.5).contains(&ratio),
            "convergence ratio {ratio} (norms {:e}, {:e})",
            r1.norm,
            r2.norm
        );

        // Hybrid static Gaussian: every term vanishes.
        let hybrid = PhysicalParams::new(1.0, 1.0, 0.0).unwrap();
        let rho = gaussian_density(&grid, 0.0, 1.0);
        let phi = vec![0.0; grid.n()];
        let sa = WaveState::compose(grid, &rho, &phi, 0.0, hybrid).unwrap();
        let sb = step_general_mu(&sa, &free, 1e-5).unwrap();
        let r = qhj_residual(&sa, &sb, &free, 0.0).unwrap();
        assert!(r.norm < 1e-8, "hybrid residual {:e}", r.norm);
    }

    #[test]
    fn qhj_rejects_out_of_order_states() {
        let (grid, params) = setup();
        let (a, _) = gaussian_packet(1.0, 0.0, 0.0, 0.0, &grid, params).unwrap();
        let free = Potential::free(&grid);
        let b = step_schrodinger(&a, &free, 1e-3).unwrap();
        assert!(matches!(
            qhj_residual(&b, &a, &free, params.mu),
            Err(Error::TimeMismatch(..))
        ));
    }

    #[test]
    fn regraduate_identity_and_arithmetic() {
        let grid = Grid1D::new(1024, -20.0, 20.0).unwrap();
        let params = PhysicalParams::new(1.0, 1.0, 0.25).unwrap();
        let rho = gaussian_density(&grid, 0.0, 1.0);
        let phi = vec![0.0; grid.n()];
        let state = WaveState::compose(grid, &rho, &phi, 0.0, params).unwrap();

        let (mapped, p1) = regraduate(&state, 1.0).unwrap();
        assert_eq!(p1, params);
        for (a, b) in mapped.psi().iter().zip(state.psi()) {
            assert_eq!(a, b);
        }

        // kappa = sqrt(m/mu) = 2 maps the mu = 0.25 theory onto mu = m with
        // eta halved; the density field is untouched.
        let (mapped, p2) = regraduate(&state, 2.0).unwrap();
        assert!((p2.mu - 1.0).abs() < 1e-15);
        assert!((p2.hbar - 0.5).abs() < 1e-15);
        let rho_mapped = mapped.density();
        let rho_orig = state.density();
        for (a, b) in rho_mapped.iter().zip(&rho_orig) {
            assert!((a - b).abs() < 1e-13);
        }

        assert!(matches!(
            regraduate(&state, -2.0),
            Err(Error::InvalidKappa(..))
        ));
    }

    #[test]
    fn regraduated_run_matches_original_density() {
        let grid = Grid1D::new(1024, -20.0, 20.0).unwrap();
        let params = PhysicalParams::new(1.0, 1.0, 0.25).unwrap();
        let rho = gaussian_density(&grid, 0.0, 1.0);
        let phi = vec![0.0; grid.n()];
        let state = WaveState::compose(grid, &rho, &phi, 0.0, params).unwrap();
        let v = Potential::free(&grid);
        let dt = 2e-4;
        let steps = 1250; // t = 0.25

        let (mapped, mapped_params) = regraduate(&state, 2.0).unwrap();
        assert!((mapped_params.mu - mapped_params.m).abs() < 1e-15);

        let out_a = evolve_n(state, &v, dt, steps, true);
        let out_b = evolve_n(mapped, &v, dt, steps, true);
        let rho_a = out_a.density();
        let rho_b = out_b.density();
        let dev = rho_a
            .iter()
            .zip(&rho_b)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(dev < 1e-7, "regraduation mismatch {dev:e}");

        // The mapped arm has mu = m, so it must also agree with the linear
        // stepper at hbar = eta/kappa.
        let out_c = step_general_mu(&out_b, &v, dt).unwrap();
        let out_d = step_schrodinger(&out_b, &v, dt).unwrap();
        for (a, b) in out_c.psi().iter().zip(out_d.psi()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn mu_zero_harmonic_conserves_energy() {
        let grid = Grid1D::new(1024, -20.0, 20.0).unwrap();
        let params = PhysicalParams::new(1.0, 1.0, 0.0).unwrap();
        let (ground_shape, _) = harmonic_ground(1.0, &grid, PhysicalParams::new(1.0, 1.0, 1.0).unwrap()).unwrap();
        let rho = ground_shape.density();
        let phi = vec![0.0; grid.n()];
        let state = WaveState::compose(grid, &rho, &phi, 0.0, params).unwrap();
        let v = Potential::harmonic(&grid, 1.0, params);
        let e0 = energy(&state, &v, 0.0).unwrap();
        let out = evolve_n(state, &v, 1e-3, 1000, true);
        let e1 = energy(&out, &v, 0.0).unwrap();
        assert!(
            ((e1 - e0) / e0).abs() < 1e-6,
            "hybrid harmonic energy drift {:e}",
            (e1 - e0) / e0
        );
        // The density must move: quantum pressure is gone.
        let dev = out
            .density()
            .iter()
            .zip(&rho)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(dev > 1e-3, "hybrid density did not evolve ({dev:e})");
    }
}
