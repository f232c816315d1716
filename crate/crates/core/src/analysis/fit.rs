//! Gaussian peak fitting.

use crate::error::{Error, Result};
use crate::physics::FWHM_PER_SIGMA;

use super::spectrum::Spectrum;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianFit {
    pub amplitude: f64,
    pub mean: f64,
    pub sigma: f64,
}

impl GaussianFit {
    pub fn fwhm(&self) -> f64 {
        FWHM_PER_SIGMA * self.sigma
    }

    pub fn eval(&self, x: f64) -> f64 {
        let z = (x - self.mean) / self.sigma;
        self.amplitude * (-0.5 * z * z).exp()
    }
}

/// Fits `A exp(−(x−μ)²/2σ²)` to histogram points by iteratively
/// reweighted least squares on `ln y` (Guo's refinement of Caruana's
/// method). Points below `min_fraction` of the peak are ignored.
pub fn fit_gaussian(xs: &[f64], ys: &[f64], min_fraction: f64) -> Result<GaussianFit> {
    if xs.len() != ys.len() {
        return Err(Error::domain("x and y arrays differ in length"));
    }
    let peak = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(peak > 0.0) {
        return Err(Error::domain("nothing to fit"));
    }
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(_, &y)| y > 0.0 && y >= min_fraction * peak)
        .map(|(&x, &y)| (x, y))
        .collect();
    if pts.len() < 3 {
        return Err(Error::domain("need at least three points above the fit threshold"));
    }
    // Centre x for conditioning.
    let x0 = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;

    let mut weights: Vec<f64> = pts.iter().map(|p| p.1 * p.1).collect();
    let mut coef = [0.0; 3];
    for _ in 0..10 {
        let mut m = [[0.0; 3]; 3];
        let mut v = [0.0; 3];
        for ((x, y), w) in pts.iter().zip(&weights) {
            let t = x - x0;
            let basis = [1.0, t, t * t];
            for i in 0..3 {
                for j in 0..3 {
                    m[i][j] += w * basis[i] * basis[j];
                }
                v[i] += w * basis[i] * y.ln();
            }
        }
        coef = solve3(m, v).ok_or_else(|| Error::domain("singular fit"))?;
        for ((x, _), w) in pts.iter().zip(weights.iter_mut()) {
            let t = x - x0;
            let model = (coef[0] + coef[1] * t + coef[2] * t * t).exp();
            *w = model * model;
        }
    }
    let [a, b, c] = coef;
    if !(c < 0.0) {
        return Err(Error::domain("data are not peaked"));
    }
    let sigma = (-1.0 / (2.0 * c)).sqrt();
    let shift = -b / (2.0 * c);
    Ok(GaussianFit {
        amplitude: (a - b * b / (4.0 * c)).exp(),
        mean: x0 + shift,
        sigma,
    })
}

/// Fits the bins of a spectrum.
pub fn fit_spectrum_peak(spectrum: &Spectrum, min_fraction: f64) -> Result<GaussianFit> {
    let xs: Vec<f64> = (0..spectrum.bin_count()).map(|i| spectrum.center(i)).collect();
    fit_gaussian(&xs, &spectrum.counts, min_fraction)
}

fn solve3(mut m: [[f64; 3]; 3], mut v: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[pivot][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, pivot);
        v.swap(col, pivot);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            let pivot_row = m[col];
            for (x, p) in m[row].iter_mut().zip(pivot_row).skip(col) {
                *x -= f * p;
            }
            v[row] -= f * v[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let s: f64 = (row + 1..3).map(|k| m[row][k] * x[k]).sum();
        x[row] = (v[row] - s) / m[row][row];
    }
    Some(x)
}
