//! Brownian walker ensembles realizing the entropic trajectory picture:
//! maximum-entropy Gaussian steps `dx = b dt + dw` with `<dw^2> = (hbar/m) dt`.
//!
//! Reproducibility contract: every random draw comes from a ChaCha8 stream
//! keyed by `(seed, walker stream id, step counter, purpose)`. Walker updates
//! within a step are mutually independent, so parallel execution is
//! bitwise-identical to sequential execution for any thread count.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::grid::PhysicalParams;
use crate::state::{decompose, HydroFields, WaveState};

const PURPOSE_INIT: u64 = 0x494e_4954; // "INIT"
const PURPOSE_STEP: u64 = 0x5354_4550; // "STEP"

/// Drift velocity samples on the grid plus the mask of nodes where the
/// density was above the floor; walkers landing in excised cells take zero
/// drift and are counted in the step report.
#[derive(Debug, Clone)]
pub struct DriftField {
    grid: Grid1D,
    values: Vec<f64>,
    defined: Vec<bool>,
}

impl DriftField {
    pub fn from_hydro(h: &HydroFields) -> Self {
        DriftField {
            grid: h.grid,
            values: h.b.clone(),
            defined: h.defined(),
        }
    }

    /// Zero drift everywhere (valid on the whole grid).
    pub fn zero(grid: Grid1D) -> Self {
        DriftField {
            grid,
            values: vec![0.0; grid.n()],
            defined: vec![true; grid.n()],
        }
    }

    #[inline]
    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Linear interpolation at `x`; `None` when either bracketing node is
    /// excised.
    fn interpolate(&self, x: f64) -> Option<f64> {
        let grid = &self.grid;
        let w = grid.wrap(x);
        let s = (w - grid.x_min()) / grid.dx();
        let j = (s as usize).min(grid.n() - 1);
        let jp = (j + 1) % grid.n();
        if !self.defined[j] || !self.defined[jp] {
            return None;
        }
        let frac = s - j as f64;
        Some(self.values[j] * (1.0 - frac) + self.values[jp] * frac)
    }
}

/// Drift field `b = v - u` of a state, for use by the walker stepper.
pub fn drift_field(state: &WaveState) -> Result<DriftField> {
    Ok(DriftField::from_hydro(&decompose(state)?))
}

/// Walker positions plus the RNG lineage needed to reproduce them.
#[derive(Debug, Clone)]
pub struct Ensemble {
    positions: Vec<f64>,
    t: f64,
    seed: u64,
    stream_ids: Vec<u64>,
    step_count: u64,
}

/// Per-step diagnostics.
#[derive(Debug, Clone, Copy, Default)]
pub struct StepReport {
    /// Walkers that landed in an excised-density cell and took zero drift.
    pub excised_hits: usize,
}

fn stream_rng(seed: u64, stream: u64, counter: u64, purpose: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&stream.to_le_bytes());
    key[16..24].copy_from_slice(&counter.to_le_bytes());
    key[24..32].copy_from_slice(&purpose.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

fn init_position(grid: &Grid1D, cdf: &[f64], seed: u64, stream: u64) -> f64 {
    let total = cdf[cdf.len() - 1];
    let u: f64 = stream_rng(seed, stream, 0, PURPOSE_INIT).random();
    let target = u * total;
    // First cell whose right edge exceeds the target.
    let j = cdf[1..].partition_point(|&c| c <= target).min(grid.n() - 1);
    let mass = cdf[j + 1] - cdf[j];
    let frac = if mass > 0.0 { (target - cdf[j]) / mass } else { 0.0 };
    grid.point(j) + grid.dx() * frac
}

/// Draw `m_walkers` i.i.d. positions from `rho0` by inverse CDF with
/// within-cell linear interpolation. Identical `(seed, M)` reproduce the
/// same ensemble bitwise.
pub fn init_ensemble(
    rho0: &[f64],
    grid: &Grid1D,
    m_walkers: usize,
    seed: u64,
) -> Result<Ensemble> {
    if m_walkers == 0 {
        return Err(Error::EmptyEnsemble);
    }
    if rho0.len() != grid.n() {
        return Err(Error::GridMismatch(rho0.len(), grid.n()));
    }
    let integral: f64 = rho0.iter().sum::<f64>() * grid.dx();
    if (integral - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized(integral));
    }
    let mut cdf = vec![0.0; grid.n() + 1];
    for j in 0..grid.n() {
        cdf[j + 1] = cdf[j] + rho0[j] * grid.dx();
    }

    let stream_ids: Vec<u64> = (0..m_walkers as u64).collect();
    #[cfg(feature = "parallel")]
    let positions: Vec<f64> = stream_ids
        .par_iter()
        .map(|&s| init_position(grid, &cdf, seed, s))
        .collect();
    #[cfg(not(feature = "parallel"))]
    let positions: Vec<f64> = stream_ids
        .iter()
        .map(|&s| init_position(grid, &cdf, seed, s))
        .collect();

    Ok(Ensemble {
        positions,
        t: 0.0,
        seed,
        stream_ids,
        step_count: 0,
    })
}

impl Ensemble {
    #[inline]
    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    #[inline]
    pub fn t(&self) -> f64 {
        self.t
    }

    #[inline]
    pub fn seed(&self) -> u64 {
        self.seed
    }

    #[inline]
    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub fn sample_mean(&self) -> f64 {
        self.positions.iter().sum::<f64>() / self.len() as f64
    }

    pub fn sample_variance(&self) -> f64 {
        let mean = self.sample_mean();
        self.positions
            .iter()
            .map(|&x| (x - mean) * (x - mean))
            .sum::<f64>()
            / self.len() as f64
    }
}

fn advance_walker(
    pos: f64,
    stream: u64,
    seed: u64,
    counter: u64,
    b: &DriftField,
    dt: f64,
    noise_std: f64,
) -> (f64, bool) {
    let (drift, excised) = match b.interpolate(pos) {
        Some(v) => (v, false),
        None => (0.0, true),
    };
    let z: f64 = stream_rng(seed, stream, counter, PURPOSE_STEP).sample(StandardNormal);
    let next = b.grid().wrap(pos + drift * dt + z * noise_std);
    (next, excised)
}

/// One Euler-Maruyama step for every walker, sequential reference path.
pub fn step_ensemble_seq(
    e: &Ensemble,
    b: &DriftField,
    dt: f64,
    params: PhysicalParams,
) -> Result<(Ensemble, StepReport)> {
    step_impl(e, b, dt, params, false)
}

/// One Euler-Maruyama step for every walker: drift interpolated at the
/// walker, fluctuation `dw ~ N(0, (hbar/m) dt)`, positions wrapped
/// periodically. Parallel when the `parallel` feature is enabled, with
/// results bitwise-identical to the sequential path.
pub fn step_ensemble(
    e: &Ensemble,
    b: &DriftField,
    dt: f64,
    params: PhysicalParams,
) -> Result<(Ensemble, StepReport)> {
    step_impl(e, b, dt, params, cfg!(feature = "parallel"))
}

fn step_impl(
    e: &Ensemble,
    b: &DriftField,
    dt: f64,
    params: PhysicalParams,
    parallel: bool,
) -> Result<(Ensemble, StepReport)> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidTimeStep(dt));
    }
    let noise_std = (params.hbar / params.m * dt).sqrt();
    let counter = e.step_count;
    let seed = e.seed;

    let results: Vec<(f64, bool)> = if parallel {
        #[cfg(feature = "parallel")]
        {
            e.positions
                .par_iter()
                .zip(e.stream_ids.par_iter())
                .map(|(&pos, &s)| advance_walker(pos, s, seed, counter, b, dt, noise_std))
                .collect()
        }
        #[cfg(not(feature = "parallel"))]
        unreachable!()
    } else {
        e.positions
            .iter()
            .zip(&e.stream_ids)
            .map(|(&pos, &s)| advance_walker(pos, s, seed, counter, b, dt, noise_std))
            .collect()
    };

    let excised_hits = results.iter().filter(|r| r.1).count();
    let positions = results.into_iter().map(|r| r.0).collect();
    Ok((
        Ensemble {
            positions,
            t: e.t + dt,
            seed,
            stream_ids: e.stream_ids.clone(),
            step_count: counter + 1,
        },
        StepReport { excised_hits },
    ))
}

fn histogram_counts_seq(e: &Ensemble, grid: &Grid1D) -> Vec<u64> {
    let mut counts = vec![0u64; grid.n()];
    for &x in &e.positions {
        counts[grid.cell_of(x)] += 1;
    }
    counts
}

#[cfg(feature = "parallel")]
fn histogram_counts_par(e: &Ensemble, grid: &Grid1D) -> Vec<u64> {
    e.positions
        .par_chunks(16_384)
        .map(|chunk| {
            let mut counts = vec![0u64; grid.n()];
            for &x in chunk {
                counts[grid.cell_of(x)] += 1;
            }
            counts
        })
        .reduce(
            || vec![0u64; grid.n()],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        )
}

/// Normalized histogram of walker positions on the grid cells.
pub fn ensemble_density(e: &Ensemble, grid: &Grid1D) -> Vec<f64> {
    #[cfg(feature = "parallel")]
    let counts = histogram_counts_par(e, grid);
    #[cfg(not(feature = "parallel"))]
    let counts = histogram_counts_seq(e, grid);
    let scale = 1.0 / (e.len() as f64 * grid.dx());
    counts.into_iter().map(|c| c as f64 * scale).collect()
}

/// Sequential histogram, kept as the reference path for the parallel one.
pub fn ensemble_density_seq(e: &Ensemble, grid: &Grid1D) -> Vec<f64> {
    let counts = histogram_counts_seq(e, grid);
    let scale = 1.0 / (e.len() as f64 * grid.dx());
    counts.into_iter().map(|c| c as f64 * scale).collect()
}

/// Kolmogorov-Smirnov and total-variation distances between two normalized
/// densities on the same grid: `ks = max |CDF difference|` over cell edges,
/// `tv = (1/2) sum |difference| dx`.
pub fn distribution_distance(empirical: &[f64], rho: &[f64], dx: f64) -> Result<(f64, f64)> {
    if empirical.len() != rho.len() {
        return Err(Error::GridMismatch(empirical.len(), rho.len()));
    }
    let mut acc = 0.0;
    let mut ks = 0.0_f64;
    let mut tv = 0.0;
    for (&a, &b) in empirical.iter().zip(rho) {
        acc += (a - b) * dx;
        ks = ks.max(acc.abs());
        tv += (a - b).abs() * dx;
    }
    Ok((ks, 0.5 * tv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::gaussian_packet;
    use crate::state::gaussian_density;

    fn setup() -> (Grid1D, PhysicalParams) {
        (
            Grid1D::new(1024, -20.0, 20.0).unwrap(),
            PhysicalParams::new(1.0, 1.0, 1.0).unwrap(),
        )
    }

    #[test]
    fn one_hot_density_confines_walkers() {
        let (grid, _) = setup();
        let mut rho = vec![0.0; grid.n()];
        let cell = 600;
        rho[cell] = 1.0 / grid.dx();
        let e = init_ensemble(&rho, &grid, 500, 1).unwrap();
        let lo = grid.point(cell);
        let hi = lo + grid.dx();
        assert!(e.positions().iter().all(|&x| x >= lo && x < hi));
    }

    #[test]
    fn same_seed_reproduces_positions() {
        let (grid, _) = setup();
        let rho = gaussian_density(&grid, 0.0, 1.0);
        let a = init_ensemble(&rho, &grid, 1000, 99).unwrap();
        let b = init_ensemble(&rho, &grid, 1000, 99).unwrap();
        assert_eq!(a.positions(), b.positions());
        let c = init_ensemble(&rho, &grid, 1000, 100).unwrap();
        assert_ne!(a.positions(), c.positions());
    }

    #[test]
    fn init_variance_matches_density() {
        let (grid, _) = setup();
        let rho = gaussian_density(&grid, 0.0, 1.0);
        let e = init_ensemble(&rho, &grid, 100_000, 7).unwrap();
        assert!((e.sample_variance() - 1.0).abs() < 0.02);
        assert!(e.sample_mean().abs() < 0.02);
    }

    #[test]
    fn parallel_and_sequential_steps_agree_bitwise() {
        let (grid, params) = setup();
        let rho = gaussian_density(&grid, 0.0, 1.0);
        let e = init_ensemble(&rho, &grid, 5000, 3).unwrap();
        let (state, _) = gaussian_packet(1.0, 0.0, 0.3, 0.0, &grid, params).unwrap();
        let b = drift_field(&state).unwrap();
        let (par, rp) = step_ensemble(&e, &b, 1e-3, params).unwrap();
        let (seq, rs) = step_ensemble_seq(&e, &b, 1e-3, params).unwrap();
        assert_eq!(par.positions(), seq.positions());
        assert_eq!(rp.excised_hits, rs.excised_hits);
        assert_eq!(ensemble_density(&par, &grid), ensemble_density_seq(&par, &grid));
    }

    #[test]
    fn zero_drift_variance_growth_matches_fluctuation_law() {
        let (grid, params) = setup();
        let rho = gaussian_density(&grid, 0.0, 1.0);
        let mut e = init_ensemble(&rho, &grid, 100_000, 11).unwrap();
        let b = DriftField::zero(grid);
        let v0 = e.sample_variance();
        let dt = 1e-3;
        let steps = 100;
        for _ in 0..steps {
            e = step_ensemble(&e, &b, dt, params).unwrap().0;
        }
        let growth = e.sample_variance() - v0;
        let expect = params.hbar / params.m * dt * steps as f64;
        // 3 sigma on the variance-increment estimate at M walkers.
        let tol = 3.0 * (2.0 / e.len() as f64).sqrt() * (v0 + expect);
        assert!(
            (growth - expect).abs() < tol,
            "growth {growth}, expected {expect}, tol {tol}"
        );
    }

    #[test]
    fn ou_process_preserves_stationary_variance() {
        let (grid, params) = setup();
        let rho = gaussian_density(&grid, 0.0, 1.0);
        let mut e = init_ensemble(&rho, &grid, 20_000, 5).unwrap();
        // Static hybrid Gaussian drift b = -x/2.
        let values: Vec<f64> = grid.points().iter().map(|&x| -0.5 * x).collect();
        let b = DriftField {
            grid,
            values,
            defined: vec![true; grid.n()],
        };
        for _ in 0..1000 {
            e = step_ensemble(&e, &b, 1e-3, params).unwrap().0;
        }
        assert!(
            (e.sample_variance() - 1.0).abs() < 0.03,
            "variance {}",
            e.sample_variance()
        );
    }

    #[test]
    fn excised_cells_are_flagged_not_fatal() {
        let (grid, params) = setup();
        let (state, _) = gaussian_packet(0.5, 0.0, 0.0, 0.0, &grid, params).unwrap();
        let b = drift_field(&state).unwrap();
        // Walkers spread over the whole box land mostly in excised cells.
        let uniform = vec![1.0 / grid.length(); grid.n()];
        let e = init_ensemble(&uniform, &grid, 2000, 17).unwrap();
        let (stepped, report) = step_ensemble(&e, &b, 1e-3, params).unwrap();
        assert!(report.excised_hits > 0);
        assert_eq!(stepped.len(), e.len());
    }

    #[test]
    fn histogram_spike_and_linearity() {
        let (grid, _) = setup();
        let mut rho = vec![0.0; grid.n()];
        rho[100] = 1.0 / grid.dx();
        let e = init_ensemble(&rho, &grid, 1000, 2).unwrap();
        let hist = ensemble_density(&e, &grid);
        let mass: f64 = hist.iter().sum::<f64>() * grid.dx();
        assert!((mass - 1.0).abs() < 1e-12);
        assert!(hist[100] > 0.0);
        assert_eq!(hist.iter().filter(|&&h| h > 0.0).count(), 1);
    }

    #[test]
    fn distances_on_trivial_inputs() {
        let (grid, _) = setup();
        let rho = gaussian_density(&grid, 0.0, 1.0);
        let (ks, tv) = distribution_distance(&rho, &rho, grid.dx()).unwrap();
        assert_eq!(ks, 0.0);
        assert_eq!(tv, 0.0);

        let mut a = vec![0.0; grid.n()];
        let mut b = vec![0.0; grid.n()];
        a[10] = 1.0 / grid.dx();
        b[500] = 1.0 / grid.dx();
        let (_, tv) = distribution_distance(&a, &b, grid.dx()).unwrap();
        assert!((tv - 1.0).abs() < 1e-12);

        assert!(distribution_distance(&a[..5], &b, grid.dx()).is_err());
    }

    #[test]
    fn sampled_gaussian_ks_is_small() {
        let (grid, _) = setup();
        let rho = gaussian_density(&grid, 0.0, 1.0);
        let e = init_ensemble(&rho, &grid, 100_000, 23).unwrap();
        let hist = ensemble_density(&e, &grid);
        let (ks, _) = distribution_distance(&hist, &rho, grid.dx()).unwrap();
        assert!(ks < 0.01, "ks = {ks}");
    }

    #[test]
    fn interleaved_half_ensembles_average() {
        let (grid, _) = setup();
        let rho = gaussian_density(&grid, 0.0, 1.0);
        let e = init_ensemble(&rho, &grid, 2000, 31).unwrap();
        let half_a = Ensemble {
            positions: e.positions()[..1000].to_vec(),
            t: 0.0,
            seed: 31,
            stream_ids: (0..1000).collect(),
            step_count: 0,
        };
        let half_b = Ensemble {
            positions: e.positions()[1000..].to_vec(),
            t: 0.0,
            seed: 31,
            stream_ids: (0..1000).collect(),
            step_count: 0,
        };
        let full = ensemble_density(&e, &grid);
        let ha = ensemble_density(&half_a, &grid);
        let hb = ensemble_density(&half_b, &grid);
        for j in 0..grid.n() {
            assert!((full[j] - 0.5 * (ha[j] + hb[j])).abs() < 1e-12);
        }
    }
}
