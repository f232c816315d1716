use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::physics::FWHM_PER_SIGMA;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ResolutionScaling {
    /// Same width at every energy.
    Constant,
    /// FWHM grows as √E (Fano-limited).
    SqrtEnergy,
}

/// Gaussian energy response of the CCDs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResolutionModel {
    pub fwhm_at_ref_kev: f64,
    pub ref_energy_kev: f64,
    pub scaling: ResolutionScaling,
}

impl Default for ResolutionModel {
    /// 320 eV FWHM at 8 keV.
    fn default() -> Self {
        Self {
            fwhm_at_ref_kev: 0.320,
            ref_energy_kev: 8.0,
            scaling: ResolutionScaling::Constant,
        }
    }
}

impl ResolutionModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.fwhm_at_ref_kev >= 0.0 && self.fwhm_at_ref_kev.is_finite()) {
            return Err(Error::domain(format!("FWHM must be >= 0 keV, got {}", self.fwhm_at_ref_kev)));
        }
        if !(self.ref_energy_kev > 0.0) {
            return Err(Error::domain(format!(
                "reference energy must be > 0 keV, got {}",
                self.ref_energy_kev
            )));
        }
        Ok(())
    }

    pub fn fwhm_at(&self, energy_kev: f64) -> f64 {
        match self.scaling {
            ResolutionScaling::Constant => self.fwhm_at_ref_kev,
            ResolutionScaling::SqrtEnergy => self.fwhm_at_ref_kev * (energy_kev / self.ref_energy_kev).sqrt(),
        }
    }

    pub fn sigma_at(&self, energy_kev: f64) -> f64 {
        self.fwhm_at(energy_kev) / FWHM_PER_SIGMA
    }
}

/// Measured energy for a photon of `true_energy_kev`. Negative draws are
/// redrawn, which keeps the Gaussian shape above zero.
pub fn smear_energy<R: Rng + ?Sized>(true_energy_kev: f64, model: &ResolutionModel, rng: &mut R) -> Result<f64> {
    if !(true_energy_kev > 0.0) || !true_energy_kev.is_finite() {
        return Err(Error::domain(format!("true energy must be > 0 keV, got {true_energy_kev}")));
    }
    let sigma = model.sigma_at(true_energy_kev);
    if sigma == 0.0 {
        return Ok(true_energy_kev);
    }
    loop {
        let z: f64 = StandardNormal.sample(rng);
        let e = true_energy_kev + sigma * z;
        if e >= 0.0 {
            return Ok(e);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedTree;

    #[test]
    fn sigma_of_default_model() {
        let s = ResolutionModel::default().sigma_at(8.0);
        assert!((s - 0.3200 / 2.35482).abs() < 1e-5);
        assert!((s - 0.13589).abs() < 1e-5);
    }

    #[test]
    fn sqrt_scaling() {
        let m = ResolutionModel {
            scaling: ResolutionScaling::SqrtEnergy,
            ..ResolutionModel::default()
        };
        assert!((m.fwhm_at(2.0) - 0.160).abs() < 1e-12);
    }

    #[test]
    fn zero_width_is_exact() {
        let m = ResolutionModel {
            fwhm_at_ref_kev: 0.0,
            ..ResolutionModel::default()
        };
        let mut rng = SeedTree::new(1).stream("t", 0);
        assert_eq!(smear_energy(7.729, &m, &mut rng).unwrap(), 7.729);
    }

    #[test]
    fn never_negative() {
        let m = ResolutionModel {
            fwhm_at_ref_kev: 5.0,
            ..ResolutionModel::default()
        };
        let mut rng = SeedTree::new(2).stream("t", 0);
        for _ in 0..10_000 {
            assert!(smear_energy(0.5, &m, &mut rng).unwrap() >= 0.0);
        }
        assert!(smear_energy(0.0, &m, &mut rng).is_err());
        assert!(smear_energy(-1.0, &m, &mut rng).is_err());
    }

    #[test]
    fn unbiased_mean() {
        let m = ResolutionModel::default();
        let mut rng = SeedTree::new(3).stream("t", 0);
        let n = 100_000;
        let mean = (0..n).map(|_| smear_energy(8.04, &m, &mut rng).unwrap()).sum::<f64>() / n as f64;
        let sigma = m.sigma_at(8.04);
        assert!((mean - 8.04).abs() < 3.0 * sigma / (n as f64).sqrt(), "{mean}");
    }
}
