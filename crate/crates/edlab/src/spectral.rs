//! Fourier differentiation on the periodic grid: derivatives are computed as
//! `F^-1 { (ik)^p F{f} }`, exponentially accurate for smooth fields.

use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::grid::Grid1D;

fn planner() -> &'static Mutex<FftPlanner<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()))
}

/// FFT pair plus the wavenumber table for one grid size.
pub struct Spectral {
    n: usize,
    k: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Spectral {
    pub fn new(grid: &Grid1D) -> Self {
        let mut p = planner().lock().expect("fft planner poisoned");
        Spectral {
            n: grid.n(),
            k: grid.wavenumbers(),
            fwd: p.plan_fft_forward(grid.n()),
            inv: p.plan_fft_inverse(grid.n()),
        }
    }

    #[inline]
    pub fn wavenumbers(&self) -> &[f64] {
        &self.k
    }

    fn forward(&self, buf: &mut [Complex64]) {
        self.fwd.process(buf);
    }

    fn inverse(&self, buf: &mut [Complex64]) {
        self.inv.process(buf);
        let scale = 1.0 / self.n as f64;
        for z in buf.iter_mut() {
            *z *= scale;
        }
    }

    /// Multiply the spectrum of `f` by `factor(k)` in place.
    pub fn apply_in_k<F: Fn(f64) -> Complex64>(&self, f: &mut [Complex64], factor: F) {
        debug_assert_eq!(f.len(), self.n);
        self.forward(f);
        for (z, &k) in f.iter_mut().zip(&self.k) {
            *z *= factor(k);
        }
        self.inverse(f);
    }

    pub fn derivative(&self, f: &[Complex64]) -> Vec<Complex64> {
        let mut buf = f.to_vec();
        self.apply_in_k(&mut buf, |k| Complex64::new(0.0, k));
        buf
    }

    pub fn second_derivative(&self, f: &[Complex64]) -> Vec<Complex64> {
        let mut buf = f.to_vec();
        self.apply_in_k(&mut buf, |k| Complex64::new(-k * k, 0.0));
        buf
    }

    pub fn derivative_real(&self, f: &[f64]) -> Vec<f64> {
        let buf: Vec<Complex64> = f.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.derivative(&buf).iter().map(|z| z.re).collect()
    }

    pub fn second_derivative_real(&self, f: &[f64]) -> Vec<f64> {
        let buf: Vec<Complex64> = f.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.second_derivative(&buf).iter().map(|z| z.re).collect()
    }
}
