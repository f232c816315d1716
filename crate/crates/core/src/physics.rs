//! Constants, the copper transition lines, and the electron-counting
//! formulas that turn a measured count excess into a bound on β²/2.
//!
//! All counts are `f64`: the electron numbers involved are of order 10²⁶
//! and the signal coefficient of order 10²⁹.

use crate::error::{Error, Result};

/// Elementary charge in coulombs, at the four-digit precision used for the
/// 2005 LNF result so that its coefficient and limit reproduce exactly.
pub const ELEMENTARY_CHARGE_C: f64 = 1.602e-19;

/// FWHM of a Gaussian in units of its standard deviation, 2√(2 ln 2).
pub const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949;

pub const SECONDS_PER_MINUTE: f64 = 60.0;

/// Total number of CCD chips around the target.
pub const MAX_CCD_COUNT: u32 = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TransitionKind {
    /// Ordinary copper Kα (2p → 1s).
    NormalKAlpha,
    /// 2p → 1s into a 1s shell that already holds two electrons.
    PepViolatingKAlpha,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransitionLine {
    pub kind: TransitionKind,
    /// keV
    pub energy: f64,
    /// keV; theoretical uncertainty on the line position.
    pub energy_uncertainty: f64,
}

impl TransitionLine {
    pub const fn normal_k_alpha() -> Self {
        Self {
            kind: TransitionKind::NormalKAlpha,
            energy: 8.040,
            energy_uncertainty: 0.0,
        }
    }

    /// The shifted line. Elsewhere the same line is loosely quoted as
    /// "about 7.6 keV"; the catalog keeps the calculated 7.729 keV.
    pub const fn pep_violating_k_alpha() -> Self {
        Self {
            kind: TransitionKind::PepViolatingKAlpha,
            energy: 7.729,
            energy_uncertainty: 0.010,
        }
    }

    pub fn of(kind: TransitionKind) -> Self {
        match kind {
            TransitionKind::NormalKAlpha => Self::normal_k_alpha(),
            TransitionKind::PepViolatingKAlpha => Self::pep_violating_k_alpha(),
        }
    }
}

/// Energy difference between the normal and the violating Kα line, keV.
pub fn k_alpha_shift() -> f64 {
    TransitionLine::normal_k_alpha().energy - TransitionLine::pep_violating_k_alpha().energy
}

/// The copper electrode the current flows through.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConductorSpec {
    /// Electrode length along the current, cm.
    pub length_cm: f64,
    /// Electron mean free path in copper, cm.
    pub mean_free_path_cm: f64,
    /// Lower bound on capture probability relative to scattering probability.
    pub capture_to_scatter_floor: f64,
}

impl ConductorSpec {
    pub fn new(length_cm: f64, mean_free_path_cm: f64, capture_to_scatter_floor: f64) -> Result<Self> {
        let spec = Self {
            length_cm,
            mean_free_path_cm,
            capture_to_scatter_floor,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length_cm > 0.0 && self.length_cm.is_finite()) {
            return Err(Error::domain(format!("conductor length must be > 0 cm, got {}", self.length_cm)));
        }
        if !(self.mean_free_path_cm > 0.0 && self.mean_free_path_cm.is_finite()) {
            return Err(Error::domain(format!(
                "mean free path must be > 0 cm, got {}",
                self.mean_free_path_cm
            )));
        }
        if !(self.capture_to_scatter_floor > 0.0 && self.capture_to_scatter_floor <= 1.0) {
            return Err(Error::domain(format!(
                "capture-to-scatter floor must lie in (0, 1], got {}",
                self.capture_to_scatter_floor
            )));
        }
        Ok(())
    }
}

impl Default for ConductorSpec {
    fn default() -> Self {
        Self {
            length_cm: 8.8,
            mean_free_path_cm: 3.9e-6,
            capture_to_scatter_floor: 0.1,
        }
    }
}

/// Bookkeeping for one measurement campaign (current on or off).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunSummary {
    /// Σ I Δt, coulombs.
    pub integrated_charge_c: f64,
    pub current_a: f64,
    pub live_time_min: f64,
    pub readout_cadence_min: f64,
    pub ccd_live_count: u32,
}

impl RunSummary {
    /// A run at constant current; the integrated charge is I × t.
    pub fn constant_current(
        current_a: f64,
        live_time_min: f64,
        readout_cadence_min: f64,
        ccd_live_count: u32,
    ) -> Result<Self> {
        if !(current_a >= 0.0 && current_a.is_finite()) {
            return Err(Error::domain(format!("current must be >= 0 A, got {current_a}")));
        }
        if !(live_time_min >= 0.0 && live_time_min.is_finite()) {
            return Err(Error::domain(format!("live time must be >= 0 min, got {live_time_min}")));
        }
        if !(readout_cadence_min > 0.0) {
            return Err(Error::domain(format!(
                "readout cadence must be > 0 min, got {readout_cadence_min}"
            )));
        }
        if ccd_live_count > MAX_CCD_COUNT {
            return Err(Error::domain(format!(
                "at most {MAX_CCD_COUNT} CCDs can be live, got {ccd_live_count}"
            )));
        }
        Ok(Self {
            integrated_charge_c: current_a * live_time_min * SECONDS_PER_MINUTE,
            current_a,
            live_time_min,
            readout_cadence_min,
            ccd_live_count,
        })
    }

    /// Number of read-out cycles; fractional when the live time is not a
    /// whole number of cadences.
    pub fn readouts(&self) -> f64 {
        self.live_time_min / self.readout_cadence_min
    }

    /// Read-out cycles times live CCDs.
    pub fn frame_exposures(&self) -> f64 {
        self.readouts() * f64::from(self.ccd_live_count)
    }
}

/// Number of fresh electrons pushed through the conductor, Q / e.
pub fn new_electron_count(charge_c: f64) -> Result<f64> {
    if !(charge_c >= 0.0) || !charge_c.is_finite() {
        return Err(Error::domain(format!("integrated charge must be >= 0 C, got {charge_c}")));
    }
    Ok(charge_c / ELEMENTARY_CHARGE_C)
}

/// Minimum number of lattice scatters per electron, D / μ.
pub fn internal_scatter_count(conductor: &ConductorSpec) -> Result<f64> {
    conductor.validate()?;
    Ok(conductor.length_cm / conductor.mean_free_path_cm)
}

/// Coefficient K in ΔN_X ≥ K · β²/2.
///
/// K = N_new · N_int · floor · geometric factor. Written against β² the
/// same product carries a factor 1/20 instead of 1/10.
pub fn signal_coefficient(run: &RunSummary, conductor: &ConductorSpec, geometric_factor: f64) -> Result<f64> {
    if !(geometric_factor > 0.0 && geometric_factor < 1.0) {
        return Err(Error::domain(format!(
            "geometric factor must lie in (0, 1), got {geometric_factor}"
        )));
    }
    let n_new = new_electron_count(run.integrated_charge_c)?;
    let n_int = internal_scatter_count(conductor)?;
    Ok(n_new * n_int * conductor.capture_to_scatter_floor * geometric_factor)
}

/// Lower bound on the number of violating X-rays for a given β²/2.
pub fn expected_signal_counts(beta2_over_2: f64, coefficient: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&beta2_over_2) {
        return Err(Error::domain(format!("β²/2 must lie in [0, 1], got {beta2_over_2}")));
    }
    if !(coefficient >= 0.0) || !coefficient.is_finite() {
        return Err(Error::domain(format!("signal coefficient must be >= 0, got {coefficient}")));
    }
    Ok(coefficient * beta2_over_2)
}
