use rand::Rng;
use rayon::prelude::*;

use super::attenuation::{survival_for_length, AttenuationTable};
use super::geometry::{DetectorGeometry, Panel, PanelHit, Vec3};
use crate::error::{Error, Result};
use crate::rng::SeedTree;

/// Photons per random substream. Fixed so that the draws of photon `i`
/// do not depend on how chunks are spread across threads.
pub const PHOTONS_PER_STREAM: u64 = 4096;

pub const MIN_SAMPLE_COUNT: u64 = 1000;

const STAGE: &str = "transport";

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PhotonOutcome {
    AbsorbedInCopper,
    HitPanel(PanelHit),
    Escaped,
}

/// A photon tracker bound to one geometry, material table and energy.
#[derive(Clone, Debug)]
pub struct PhotonTransport<'a> {
    geometry: &'a DetectorGeometry,
    panels: Vec<Panel>,
    attenuation_length: f64,
    energy: f64,
}

impl<'a> PhotonTransport<'a> {
    pub fn new(geometry: &'a DetectorGeometry, table: &AttenuationTable, energy: f64) -> Result<Self> {
        geometry.validate()?;
        let attenuation_length = table.length_at(energy)?;
        let panels = geometry.panels();
        Ok(Self {
            geometry,
            panels,
            attenuation_length,
            energy,
        })
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// Nearest panel along the ray, live or not.
    pub fn first_panel_hit(&self, origin: Vec3, dir: Vec3) -> Option<PanelHit> {
        self.panels
            .iter()
            .filter_map(|p| p.intersect(origin, dir))
            .min_by(|a, b| a.distance.total_cmp(&b.distance))
    }

    /// Follows one photon emitted at `origin` in an isotropic direction.
    ///
    /// Absorption uses the copper crossed along the entire ray, so a photon
    /// heading into the hollow of the cylinder must also survive the far wall.
    /// Exactly three uniforms are drawn per call.
    pub fn transport<R: Rng + ?Sized>(&self, origin: Vec3, rng: &mut R) -> PhotonOutcome {
        let dir = Vec3::isotropic(rng);
        let u: f64 = rng.random();
        let path = self.geometry.total_copper_path(origin, dir);
        if u >= survival_for_length(path, self.attenuation_length) {
            return PhotonOutcome::AbsorbedInCopper;
        }
        // A dead chip still stops the photon; it is just never read out.
        match self.first_panel_hit(origin, dir) {
            Some(hit) if self.geometry.is_live(hit.panel, hit.chip) => PhotonOutcome::HitPanel(hit),
            _ => PhotonOutcome::Escaped,
        }
    }
}

pub fn transport_photon<R: Rng + ?Sized>(
    origin: Vec3,
    energy: f64,
    geometry: &DetectorGeometry,
    table: &AttenuationTable,
    rng: &mut R,
) -> Result<PhotonOutcome> {
    if !geometry.contains(origin) {
        return Err(Error::domain("photon origin is outside the copper shell"));
    }
    Ok(PhotonTransport::new(geometry, table, energy)?.transport(origin, rng))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OutcomeCounts {
    pub absorbed: u64,
    pub hit: u64,
    pub escaped: u64,
}

impl OutcomeCounts {
    fn record(&mut self, outcome: &PhotonOutcome) {
        match outcome {
            PhotonOutcome::AbsorbedInCopper => self.absorbed += 1,
            PhotonOutcome::HitPanel(_) => self.hit += 1,
            PhotonOutcome::Escaped => self.escaped += 1,
        }
    }

    fn merge(self, o: Self) -> Self {
        Self {
            absorbed: self.absorbed + o.absorbed,
            hit: self.hit + o.hit,
            escaped: self.escaped + o.escaped,
        }
    }

    pub fn total(&self) -> u64 {
        self.absorbed + self.hit + self.escaped
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeometricFactorEstimate {
    /// Fraction of emitted photons that leave the copper and reach a live chip.
    pub survival_times_acceptance: f64,
    /// Binomial standard error of `survival_times_acceptance`.
    pub statistical_error: f64,
    pub ccd_efficiency_applied: f64,
    pub total_factor: f64,
    pub sample_count: u64,
    pub seed: u64,
    pub energy_kev: f64,
    pub counts: OutcomeCounts,
}

impl GeometricFactorEstimate {
    fn from_counts(counts: OutcomeCounts, ccd_efficiency: f64, seed: u64, energy_kev: f64) -> Self {
        let n = counts.total();
        let p = counts.hit as f64 / n as f64;
        Self {
            survival_times_acceptance: p,
            statistical_error: (p * (1.0 - p) / n as f64).sqrt(),
            ccd_efficiency_applied: ccd_efficiency,
            total_factor: p * ccd_efficiency,
            sample_count: n,
            seed,
            energy_kev,
            counts,
        }
    }

    pub fn relative_error(&self) -> f64 {
        self.statistical_error / self.survival_times_acceptance
    }
}

/// Counts outcomes for photons emitted uniformly in the shell.
///
/// Photon `i` always draws from substream `i / PHOTONS_PER_STREAM`, so the
/// counts are identical for any thread count and the first `n` photons of a
/// larger run are exactly a run of `n`.
pub fn simulate_outcomes(transport: &PhotonTransport<'_>, sample_count: u64, seed: u64) -> OutcomeCounts {
    let seeds = SeedTree::new(seed);
    let chunks = sample_count.div_ceil(PHOTONS_PER_STREAM);
    (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = seeds.stream(STAGE, chunk);
            let n = PHOTONS_PER_STREAM.min(sample_count - chunk * PHOTONS_PER_STREAM);
            let mut counts = OutcomeCounts::default();
            for _ in 0..n {
                let origin = transport.geometry.sample_emission_point(&mut rng);
                counts.record(&transport.transport(origin, &mut rng));
            }
            counts
        })
        .reduce(OutcomeCounts::default, OutcomeCounts::merge)
}

pub fn estimate_geometric_factor(
    geometry: &DetectorGeometry,
    table: &AttenuationTable,
    energy: f64,
    ccd_efficiency: f64,
    sample_count: u64,
    seed: u64,
) -> Result<GeometricFactorEstimate> {
    if !(ccd_efficiency > 0.0 && ccd_efficiency <= 1.0) {
        return Err(Error::domain(format!("CCD efficiency must lie in (0, 1], got {ccd_efficiency}")));
    }
    if sample_count < MIN_SAMPLE_COUNT {
        return Err(Error::domain(format!(
            "need at least {MIN_SAMPLE_COUNT} photons, got {sample_count}"
        )));
    }
    let transport = PhotonTransport::new(geometry, table, energy)?;
    let counts = simulate_outcomes(&transport, sample_count, seed);
    Ok(GeometricFactorEstimate::from_counts(counts, ccd_efficiency, seed, energy))
}
