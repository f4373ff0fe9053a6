//! Discretized wavefunctions and their hydrodynamic decomposition.
//!
//! A `WaveState` stores complex samples of `Psi = rho^{1/2} e^{i phi}`.
//! `decompose` recovers the density together with the current, osmotic, and
//! drift velocities and the three local momentum fields. Phases are never
//! unwrapped: the current velocity comes from `Im(conj(Psi) dPsi) / rho`,
//! and the entropy field is rebuilt only for reporting by integrating the
//! phase gradient outward from the density maximum.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Grid1D, PhysicalParams};
use crate::spectral::Spectral;

/// Relative density floor: velocity and momentum fields are evaluated only
/// where `rho >= DENSITY_FLOOR_REL * max(rho)` and set to zero below it.
pub const DENSITY_FLOOR_REL: f64 = 1e-12;

/// Relative boundary-negligibility bound on `|Psi|^2` at the domain edges.
pub const BOUNDARY_LEAK_REL: f64 = 1e-12;

const NORM_TOL: f64 = 1e-9;

/// Complex amplitude samples plus time and physical constants.
#[derive(Debug, Clone)]
pub struct WaveState {
    grid: Grid1D,
    psi: Vec<Complex64>,
    t: f64,
    params: PhysicalParams,
}

impl WaveState {
    /// Build `Psi = rho^{1/2} e^{i phi}` from density and phase samples.
    /// The density must be nonnegative and normalized within 1e-9; it is
    /// renormalized exactly on composition.
    pub fn compose(
        grid: Grid1D,
        rho: &[f64],
        phi: &[f64],
        t: f64,
        params: PhysicalParams,
    ) -> Result<Self> {
        if rho.len() != grid.n() {
            return Err(Error::GridMismatch(rho.len(), grid.n()));
        }
        if phi.len() != grid.n() {
            return Err(Error::GridMismatch(phi.len(), grid.n()));
        }
        for (j, &r) in rho.iter().enumerate() {
            if !(r >= 0.0) {
                return Err(Error::NegativeDensity { index: j, value: r });
            }
        }
        let norm: f64 = rho.iter().sum::<f64>() * grid.dx();
        if norm <= 0.0 {
            return Err(Error::ZeroDensity);
        }
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        let scale = 1.0 / norm;
        let psi = rho
            .iter()
            .zip(phi)
            .map(|(&r, &p)| Complex64::from_polar((r * scale).sqrt(), p))
            .collect();
        Ok(WaveState { grid, psi, t, params })
    }

    /// Wrap raw samples produced by an integrator; callers guarantee the norm.
    pub(crate) fn from_parts(
        grid: Grid1D,
        psi: Vec<Complex64>,
        t: f64,
        params: PhysicalParams,
    ) -> Self {
        WaveState { grid, psi, t, params }
    }

    #[inline]
    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    #[inline]
    pub fn psi(&self) -> &[Complex64] {
        &self.psi
    }

    #[inline]
    pub fn t(&self) -> f64 {
        self.t
    }

    #[inline]
    pub fn params(&self) -> PhysicalParams {
        self.params
    }

    /// `|Psi|^2` on the grid.
    pub fn density(&self) -> Vec<f64> {
        self.psi.iter().map(|z| z.norm_sqr()).collect()
    }

    /// `sum |Psi|^2 dx`.
    pub fn norm(&self) -> f64 {
        self.psi.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    /// Check the normalization invariant (1e-12) and sample finiteness.
    pub fn validate(&self) -> Result<()> {
        if self.psi.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NumericAbort("wavefunction samples"));
        }
        let norm = self.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::NormDrift(norm));
        }
        Ok(())
    }

    /// Check that `|Psi|^2` at the domain edges is negligible relative to its
    /// maximum; the momentum identities assume the density vanishes there.
    pub fn check_boundary(&self) -> Result<()> {
        let rho = self.density();
        let max = rho.iter().cloned().fold(0.0, f64::max);
        let edge = rho[0].max(rho[self.grid.n() - 1]);
        let limit = BOUNDARY_LEAK_REL * max;
        if edge >= limit {
            return Err(Error::BoundaryLeakage { edge, limit });
        }
        Ok(())
    }
}

/// Density, velocity, momentum, and entropy fields derived from a state.
/// `S` is defined up to an additive constant and is rebuilt for reporting
/// only; all fields are zero where `rho` falls below the density floor.
#[derive(Debug, Clone)]
pub struct HydroFields {
    pub grid: Grid1D,
    pub params: PhysicalParams,
    pub rho: Vec<f64>,
    pub v: Vec<f64>,
    pub u: Vec<f64>,
    pub b: Vec<f64>,
    pub p_d: Vec<f64>,
    pub p_o: Vec<f64>,
    pub p_c: Vec<f64>,
    pub s: Vec<f64>,
    /// Absolute density floor used for this decomposition.
    pub floor: f64,
}

impl HydroFields {
    /// Nodes where the density is at or above the floor.
    pub fn defined(&self) -> Vec<bool> {
        self.rho.iter().map(|&r| r >= self.floor).collect()
    }
}

/// Cumulative trapezoid of `g` started at `j0` with value `anchor`,
/// marching forward around the periodic grid.
pub(crate) fn integrate_from(grid: &Grid1D, g: &[f64], j0: usize, anchor: f64) -> Vec<f64> {
    let n = grid.n();
    let dx = grid.dx();
    let mut out = vec![0.0; n];
    out[j0] = anchor;
    let mut acc = anchor;
    for step in 1..n {
        let prev = (j0 + step - 1) % n;
        let cur = (j0 + step) % n;
        acc += 0.5 * (g[prev] + g[cur]) * dx;
        out[cur] = acc;
    }
    out
}

/// Hydrodynamic decomposition `Psi -> (rho, v, u, b, momenta, S)`.
///
/// `v = (hbar/m) Im(conj(Psi) dPsi) / rho`, `u = -(hbar/2m) drho / rho`,
/// `b = v - u`; all derivatives are spectral and the fields are excised
/// below the density floor.
pub fn decompose(state: &WaveState) -> Result<HydroFields> {
    let grid = *state.grid();
    let params = state.params();
    let n = grid.n();
    let rho = state.density();
    let max_rho = rho.iter().cloned().fold(0.0, f64::max);
    if !(max_rho > 0.0) {
        return Err(Error::ZeroDensity);
    }
    let floor = DENSITY_FLOOR_REL * max_rho;

    let sp = Spectral::new(&grid);
    let dpsi = sp.derivative(state.psi());
    let drho = sp.derivative_real(&rho);

    let hom = params.hbar / params.m;
    let mut v = vec![0.0; n];
    let mut u = vec![0.0; n];
    for j in 0..n {
        if rho[j] >= floor {
            let cross = state.psi()[j].conj() * dpsi[j];
            v[j] = hom * cross.im / rho[j];
            u[j] = -0.5 * hom * drho[j] / rho[j];
        }
    }
    let b: Vec<f64> = v.iter().zip(&u).map(|(&vj, &uj)| vj - uj).collect();
    let p_d: Vec<f64> = b.iter().map(|&x| params.m * x).collect();
    let p_o: Vec<f64> = u.iter().map(|&x| params.m * x).collect();
    let p_c: Vec<f64> = v.iter().map(|&x| params.m * x).collect();

    // S = phi_ref + log rho^{1/2}, with the phase integrated out from the
    // density maximum and anchored so S(argmax rho) = log rho^{1/2} there.
    let j0 = rho
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(j, _)| j)
        .unwrap();
    let grad_phi: Vec<f64> = v.iter().map(|&vj| vj / hom).collect();
    let phi_ref = integrate_from(&grid, &grad_phi, j0, 0.0);
    let s = phi_ref
        .iter()
        .zip(&rho)
        .map(|(&p, &r)| p + 0.5 * r.max(f64::MIN_POSITIVE).ln())
        .collect();

    Ok(HydroFields {
        grid,
        params,
        rho,
        v,
        u,
        b,
        p_d,
        p_o,
        p_c,
        s,
        floor,
    })
}

/// Local momentum fields `(p_d, p_o, p_c) = m (b, u, v)`.
pub fn momentum_fields(h: &HydroFields, params: PhysicalParams) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let scale = |f: &[f64]| f.iter().map(|&x| params.m * x).collect::<Vec<f64>>();
    (scale(&h.b), scale(&h.u), scale(&h.v))
}

/// Reconstruct a continuous phase field from the current velocity, anchored
/// at the density maximum with the given value.
pub(crate) fn reconstruct_phase(h: &HydroFields, anchor: f64) -> Vec<f64> {
    let hom = h.params.hbar / h.params.m;
    let j0 = h
        .rho
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(j, _)| j)
        .unwrap();
    let grad_phi: Vec<f64> = h.v.iter().map(|&vj| vj / hom).collect();
    integrate_from(&h.grid, &grad_phi, j0, anchor)
}

/// Normalized Gaussian density samples `N(x0, sigma^2)` on the grid.
pub fn gaussian_density(grid: &Grid1D, x0: f64, sigma: f64) -> Vec<f64> {
    let mut rho: Vec<f64> = grid
        .points()
        .iter()
        .map(|&x| (-0.5 * ((x - x0) / sigma).powi(2)).exp())
        .collect();
    let norm: f64 = rho.iter().sum::<f64>() * grid.dx();
    for r in rho.iter_mut() {
        *r /= norm;
    }
    rho
}
