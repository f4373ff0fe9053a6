//! Closed-form reference states and moments used as ground truth by tests
//! and acceptance runs. Everything here comes from independent analytic
//! integrals, never from the integrators being validated.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Grid1D, PhysicalParams};
use crate::state::WaveState;
use crate::stats::MomentReport;

/// Free Gaussian packet with initial width `sigma0` (`Var x(0) = sigma0^2`),
/// center `x0`, and boost `p0`, under free linear evolution.
#[derive(Debug, Clone, Copy)]
pub struct AnalyticPacket {
    pub sigma0: f64,
    pub x0: f64,
    pub p0: f64,
}

impl AnalyticPacket {
    pub fn new(sigma0: f64, x0: f64, p0: f64) -> Self {
        AnalyticPacket { sigma0, x0, p0 }
    }

    /// Spreading law `Var x(t) = sigma0^2 + (hbar t / 2 m sigma0)^2`.
    pub fn var_x(&self, t: f64, p: PhysicalParams) -> f64 {
        let w = p.hbar * t / (2.0 * p.m * self.sigma0);
        self.sigma0 * self.sigma0 + w * w
    }

    pub fn mean_x(&self, t: f64, p: PhysicalParams) -> f64 {
        self.x0 + self.p0 * t / p.m
    }

    pub fn var_pq(&self, p: PhysicalParams) -> f64 {
        (p.hbar / (2.0 * self.sigma0)).powi(2)
    }

    pub fn cov_x_pq(&self, t: f64, p: PhysicalParams) -> f64 {
        t * p.hbar * p.hbar / (4.0 * p.m * self.sigma0 * self.sigma0)
    }

    pub fn var_po(&self, t: f64, p: PhysicalParams) -> f64 {
        p.hbar * p.hbar / (4.0 * self.var_x(t, p))
    }

    /// Slope of the current-momentum field, `p_c = slope (x - <x>) + p0`.
    fn pc_slope(&self, t: f64, p: PhysicalParams) -> f64 {
        t * p.hbar * p.hbar / (4.0 * p.m * self.sigma0 * self.sigma0 * self.var_x(t, p))
    }

    pub fn var_pc(&self, t: f64, p: PhysicalParams) -> f64 {
        let s = self.pc_slope(t, p);
        s * s * self.var_x(t, p)
    }

    pub fn var_pd(&self, t: f64, p: PhysicalParams) -> f64 {
        let s = self.pc_slope(t, p) - 0.5 * p.hbar / self.var_x(t, p);
        s * s * self.var_x(t, p)
    }

    /// Total energy `<p_q^2>/2m` of the free packet.
    pub fn energy(&self, p: PhysicalParams) -> f64 {
        (self.p0 * self.p0 + self.var_pq(p)) / (2.0 * p.m)
    }

    /// Analytic moment report at time `t`.
    pub fn moments(&self, t: f64, p: PhysicalParams) -> MomentReport {
        let var_x = self.var_x(t, p);
        let cov = self.cov_x_pq(t, p);
        MomentReport {
            t,
            mean_x: self.mean_x(t, p),
            var_x,
            mean_pd: self.p0,
            var_pd: self.var_pd(t, p),
            mean_po: 0.0,
            var_po: self.var_po(t, p),
            mean_pc: self.p0,
            var_pc: self.var_pc(t, p),
            mean_pq: self.p0,
            second_moment_pq: self.var_pq(p) + self.p0 * self.p0,
            var_pq: self.var_pq(p),
            cov_x_pd: cov - 0.5 * p.hbar,
            cov_x_po: 0.5 * p.hbar,
            cov_x_pc: cov,
            cov_x_pq: cov,
        }
    }

    /// Exact wavefunction samples at time `t`, renormalized on the grid.
    pub fn state(&self, t: f64, grid: &Grid1D, p: PhysicalParams) -> Result<WaveState> {
        let width = self.var_x(t, p).sqrt();
        let limit = grid.length() / 10.0;
        if width >= limit {
            return Err(Error::PacketTooWide { width, limit });
        }
        let tau = p.hbar * t / (2.0 * p.m * self.sigma0 * self.sigma0);
        let c = Complex64::new(1.0, tau);
        let xc = self.mean_x(t, p);
        let mut psi: Vec<Complex64> = grid
            .points()
            .iter()
            .map(|&x| {
                let xi = x - xc;
                let envelope = Complex64::new(-xi * xi / (4.0 * self.sigma0 * self.sigma0), 0.0) / c;
                let plane = Complex64::new(
                    0.0,
                    (self.p0 * (x - self.x0) - 0.5 * self.p0 * self.p0 * t / p.m) / p.hbar,
                );
                (envelope + plane).exp() / c.sqrt()
            })
            .collect();
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>() * grid.dx();
        let scale = 1.0 / norm.sqrt();
        for z in psi.iter_mut() {
            *z *= scale;
        }
        Ok(WaveState::from_parts(*grid, psi, t, p))
    }
}

/// Sampled exact free-evolution packet together with its analytic moments.
pub fn gaussian_packet(
    sigma0: f64,
    x0: f64,
    p0: f64,
    t: f64,
    grid: &Grid1D,
    params: PhysicalParams,
) -> Result<(WaveState, MomentReport)> {
    let packet = AnalyticPacket::new(sigma0, x0, p0);
    Ok((packet.state(t, grid, params)?, packet.moments(t, params)))
}

/// Ground state of the harmonic well `V = m omega^2 x^2 / 2` and its moments.
pub fn harmonic_ground(
    omega: f64,
    grid: &Grid1D,
    params: PhysicalParams,
) -> Result<(WaveState, MomentReport)> {
    let var_x = params.hbar / (2.0 * params.m * omega);
    let width = var_x.sqrt();
    let limit = grid.length() / 10.0;
    if width >= limit {
        return Err(Error::PacketTooWide { width, limit });
    }
    let mut psi: Vec<Complex64> = grid
        .points()
        .iter()
        .map(|&x| Complex64::new((-0.25 * x * x / var_x).exp(), 0.0))
        .collect();
    let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>() * grid.dx();
    let scale = 1.0 / norm.sqrt();
    for z in psi.iter_mut() {
        *z *= scale;
    }
    let var_pq = 0.5 * params.hbar * params.m * omega;
    let report = MomentReport {
        t: 0.0,
        mean_x: 0.0,
        var_x,
        mean_pd: 0.0,
        var_pd: var_pq,
        mean_po: 0.0,
        var_po: var_pq,
        mean_pc: 0.0,
        var_pc: 0.0,
        mean_pq: 0.0,
        second_moment_pq: var_pq,
        var_pq,
        cov_x_pd: -0.5 * params.hbar,
        cov_x_po: 0.5 * params.hbar,
        cov_x_pc: 0.0,
        cov_x_pq: 0.0,
    };
    Ok((WaveState::from_parts(*grid, psi, 0.0, params), report))
}

/// Named oracle states exercised by identity sweeps: packets at rest and
/// boosted, early and late, plus the harmonic ground state.
pub fn reference_states(
    grid: &Grid1D,
    params: PhysicalParams,
) -> Result<Vec<(String, WaveState)>> {
    let mut out = Vec::new();
    for (name, sigma0, x0, p0, t) in [
        ("packet_t0", 1.0, 0.0, 0.0, 0.0),
        ("packet_t2", 1.0, 0.0, 0.0, 2.0),
        ("packet_boosted_t0", 1.0, 0.0, 1.0, 0.0),
        ("packet_boosted_t1", 1.0, -1.0, 1.0, 1.0),
        ("packet_narrow_t1", 0.5, 2.0, -0.5, 1.0),
    ] {
        let (state, _) = gaussian_packet(sigma0, x0, p0, t, grid, params)?;
        out.push((name.to_string(), state));
    }
    let (hg, _) = harmonic_ground(1.0, grid, params)?;
    out.push(("harmonic_ground".to_string(), hg));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn packet_examples() {
        let params = PhysicalParams::new(1.0, 1.0, 1.0).unwrap();
        let p = AnalyticPacket::new(1.0, 0.0, 0.0);
        assert_eq!(p.var_x(0.0, params), 1.0);
        assert_eq!(p.var_pq(params), 0.25);
        assert!((p.var_x(2.0, params) - 2.0).abs() < 1e-15);
        assert!((p.cov_x_pq(2.0, params) - 0.5).abs() < 1e-15);
        let boosted = AnalyticPacket::new(1.0, 0.0, 1.0);
        assert_eq!(boosted.moments(0.7, params).mean_pq, 1.0);
    }

    #[test]
    fn harmonic_examples() {
        let grid = Grid1D::new(1024, -20.0, 20.0).unwrap();
        let params = PhysicalParams::new(1.0, 1.0, 1.0).unwrap();
        let (_, m) = harmonic_ground(1.0, &grid, params).unwrap();
        assert!((m.var_x - 0.5).abs() < 1e-15);
        assert!((m.var_pq - 0.5).abs() < 1e-15);
        assert!((m.var_x * m.var_pq - 0.25).abs() < 1e-15);
        assert_eq!(m.mean_pq, 0.0);
    }

    #[test]
    fn packet_too_wide_is_rejected() {
        let grid = Grid1D::new(256, -5.0, 5.0).unwrap();
        let params = PhysicalParams::new(1.0, 1.0, 1.0).unwrap();
        assert!(matches!(
            AnalyticPacket::new(1.5, 0.0, 0.0).state(0.0, &grid, params),
            Err(Error::PacketTooWide { .. })
        ));
    }

    /// The analytic moments must satisfy every momentum identity on their
    /// own: zero osmotic mean, equal means, covariance hbar/2, variance
    /// decomposition, and exact Schrodinger saturation.
    #[test]
    fn oracle_self_consistency_random_draws() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..10 {
            let hbar = rng.random_range(0.2..3.0);
            let m = rng.random_range(0.2..3.0);
            let params = PhysicalParams::new(hbar, m, m).unwrap();
            let packet = AnalyticPacket::new(
                rng.random_range(0.4..2.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-1.5..1.5),
            );
            let t = rng.random_range(0.0..3.0);
            let rep = packet.moments(t, params);

            assert_eq!(rep.mean_po, 0.0);
            assert!((rep.mean_pq - rep.mean_pc).abs() < 1e-12);
            assert!((rep.mean_pq - rep.mean_pd).abs() < 1e-12);
            assert!((rep.cov_x_po - 0.5 * hbar).abs() < 1e-12);
            assert!(
                (rep.var_pq - rep.var_pc - rep.var_po).abs() < 1e-12 * rep.var_pq.max(1.0),
                "variance decomposition"
            );
            let q = 0.25 * hbar * hbar;
            let slack = rep.var_x * rep.var_pq - rep.cov_x_pq * rep.cov_x_pq - q;
            assert!(
                slack.abs() < 1e-12 * q.max(1.0),
                "Schrodinger saturation, slack = {slack:e}"
            );
            // Cov(x, p_c) + Cov(x, p_o) = Cov(x, p_q) with Cov(x,p_o) = hbar/2
            // folded into the drift covariance.
            assert!((rep.cov_x_pd + rep.cov_x_po - rep.cov_x_pq).abs() < 1e-12);
        }
    }

    #[test]
    fn sampled_state_is_normalized() {
        let grid = Grid1D::new(1024, -20.0, 20.0).unwrap();
        let params = PhysicalParams::new(1.0, 1.0, 1.0).unwrap();
        let (state, _) = gaussian_packet(1.0, 0.0, 1.0, 2.0, &grid, params).unwrap();
        state.validate().unwrap();
        state.check_boundary().unwrap();
    }
}
