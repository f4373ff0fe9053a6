// scratch diagnostics
use edlab::grid::{Grid1D, PhysicalParams};
use edlab::state::{gaussian_density, WaveState, decompose};
use edlab::evolve::{Potential, step_general_mu};
use edlab::sampler::init_ensemble;
use edlab::spectral::Spectral;

fn main() {
    // Part 1: hybrid static run, track max quantum-potential ratio.
    let grid = Grid1D::new(1024, -20.0, 20.0).unwrap();
    let params = PhysicalParams::new(1.0, 1.0, 0.0).unwrap();
    let rho = gaussian_density(&grid, 0.0, 1.0);
    let phi = vec![0.0; grid.n()];
    let mut state = WaveState::compose(grid, &rho, &phi, 0.0, params).unwrap();
    let pot = Potential::free(&grid);
    let sp = Spectral::new(&grid);
    for step in 1..=2000usize {
        match step_general_mu(&state, &pot, 1e-3) {
            Ok(s) => state = s,
            Err(e) => { println!("step {step}: ERROR {e}"); break; }
        }
        if step % 100 == 0 {
            let sqrt_rho: Vec<f64> = state.psi().iter().map(|z| z.norm()).collect();
            let maxs = sqrt_rho.iter().cloned().fold(0.0, f64::max);
            let floor = 1e-6 * maxs;
            let d2 = sp.second_derivative_real(&sqrt_rho);
            let mut qmax = 0.0f64; let mut jmax = 0usize;
            for j in 0..grid.n() {
                if sqrt_rho[j] >= floor {
                    let q = (d2[j]/sqrt_rho[j]).abs();
                    if q > qmax { qmax = q; jmax = j; }
                }
            }
            let h = decompose(&state).unwrap();
            let var: f64 = grid.points().iter().zip(&h.rho).map(|(&x,&r)| r*x*x).sum::<f64>()*grid.dx();
            println!("step {step}: qmax={qmax:.3e} at x={:.2} (sqrt_rho there {:.2e}, rel {:.1e}), var={var:.6}", grid.point(jmax), sqrt_rho[jmax], sqrt_rho[jmax]/maxs);
        }
    }

    // Part 2: init_ensemble mean bias.
    let e = init_ensemble(&rho, &grid, 100_000, 7).unwrap();
    println!("sample mean = {:.5}, var = {:.5}", e.sample_mean(), e.sample_variance());
    for seed in [1u64, 2, 3, 4, 5] {
        let e = init_ensemble(&rho, &grid, 100_000, seed).unwrap();
        println!("seed {seed}: mean = {:.5} var = {:.5}", e.sample_mean(), e.sample_variance());
    }
}
