//! Spectra, current-on/off subtraction, region-of-interest counting, the
//! β²/2 limit and its projection to other running conditions.

mod fit;
mod limit;
mod spectrum;

pub use fit::{fit_gaussian, fit_spectrum_peak, GaussianFit};
pub use limit::{
    compute_limit, confidence_label, project_sensitivity, LimitResult, Projection, SensitivityScales,
    PROJECTION_MODEL,
};
pub use spectrum::{
    build_spectrum, roi_counts, subtract_spectra, Counted, RegionOfInterest, Spectrum, SpectrumLabel,
};
