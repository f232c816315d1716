//! Monte Carlo estimate of the geometric factor: emission inside the copper
//! shell, self-absorption on the way out, and acceptance of the CCD ring.

mod attenuation;
mod estimate;
mod geometry;

pub use attenuation::AttenuationTable;
pub use estimate::{
    estimate_geometric_factor, simulate_outcomes, transport_photon, GeometricFactorEstimate, OutcomeCounts,
    PhotonOutcome, PhotonTransport, MIN_SAMPLE_COUNT, PHOTONS_PER_STREAM,
};
pub use geometry::{
    CopperSegments, DetectorGeometry, Panel, PanelHit, Vec3, CONTAINMENT_TOLERANCE_CM, DEFAULT_CHIP_HEIGHT_CM,
    DEFAULT_CHIP_WIDTH_CM,
};
