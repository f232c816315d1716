use rand::Rng;
use rayon::prelude::*;

use super::cluster::{calibrate, find_clusters, ClusterClass, ClusterThresholds};
use super::frame::{synthesize_frame, EnergyCalibration, Frame, FrameSynthesis, Hit, SyntheticFrame};
use crate::error::Result;
use crate::rng::SeedTree;

const STAGE: &str = "ccd-corpus";

/// A batch of synthetic read-outs with X-ray hits at a fixed energy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorpusSpec {
    pub frames: u64,
    pub hits_per_frame: u32,
    pub hit_energy_kev: f64,
    pub synthesis: FrameSynthesis,
    pub thresholds: ClusterThresholds,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CorpusStats {
    pub frames: u64,
    pub hits_injected: u64,
    /// Hits whose pixel lies in an accepted cluster.
    pub hits_accepted: u64,
    pub tracks_injected: u64,
    /// Tracks none of whose pixels lies in an accepted cluster.
    pub tracks_rejected: u64,
    pub clusters_accepted: u64,
    pub clusters_track: u64,
    pub clusters_noise: u64,
    /// ADC sums of accepted clusters that contain a hit; integers so the
    /// totals do not depend on reduction order.
    pub matched_adc_sum: u64,
    pub matched_adc_sum_sq: u128,
}

impl CorpusStats {
    fn merge(self, o: Self) -> Self {
        Self {
            frames: self.frames + o.frames,
            hits_injected: self.hits_injected + o.hits_injected,
            hits_accepted: self.hits_accepted + o.hits_accepted,
            tracks_injected: self.tracks_injected + o.tracks_injected,
            tracks_rejected: self.tracks_rejected + o.tracks_rejected,
            clusters_accepted: self.clusters_accepted + o.clusters_accepted,
            clusters_track: self.clusters_track + o.clusters_track,
            clusters_noise: self.clusters_noise + o.clusters_noise,
            matched_adc_sum: self.matched_adc_sum + o.matched_adc_sum,
            matched_adc_sum_sq: self.matched_adc_sum_sq + o.matched_adc_sum_sq,
        }
    }

    pub fn xray_acceptance(&self) -> f64 {
        self.hits_accepted as f64 / self.hits_injected as f64
    }

    pub fn track_rejection(&self) -> f64 {
        self.tracks_rejected as f64 / self.tracks_injected as f64
    }

    /// Mean and standard error of the mean of matched cluster energies, keV.
    pub fn matched_energy(&self, calibration: &EnergyCalibration) -> (f64, f64) {
        let n = self.hits_accepted as f64;
        let mean_adc = self.matched_adc_sum as f64 / n;
        let var_adc = (self.matched_adc_sum_sq as f64 / n - mean_adc * mean_adc).max(0.0) * n / (n - 1.0);
        (
            calibration.energy_kev(mean_adc),
            calibration.gain_ev_per_adc * 1e-3 * (var_adc / n).sqrt(),
        )
    }
}

/// Accepted-cluster energies of one frame, in keV.
pub fn reconstruct_energies(
    frame: &Frame,
    thresholds: &ClusterThresholds,
    synthesis: &FrameSynthesis,
) -> Vec<f64> {
    find_clusters(frame, thresholds, synthesis.noise_sigma_adc)
        .iter()
        .filter(|c| c.classification == ClusterClass::AcceptedXRay)
        .map(|c| calibrate(c, &synthesis.calibration))
        .collect()
}

/// Frame `index` of the corpus, with the hits that went into it.
pub fn corpus_frame(spec: &CorpusSpec, index: u64) -> Result<(SyntheticFrame, Vec<Hit>)> {
    let mut rng = SeedTree::new(spec.seed).stream(STAGE, index);
    let s = &spec.synthesis;
    let hits: Vec<Hit> = (0..spec.hits_per_frame)
        .map(|_| Hit {
            x: rng.random_range(0..s.width),
            y: rng.random_range(0..s.height),
            energy_kev: spec.hit_energy_kev,
        })
        .collect();
    let synthetic = synthesize_frame(&hits, s, &mut rng)?;
    Ok((synthetic, hits))
}

/// Synthesises and reconstructs the whole corpus. Frame `i` always uses
/// substream `i`, so the statistics do not depend on the thread count.
pub fn run_corpus(spec: &CorpusSpec) -> Result<CorpusStats> {
    (0..spec.frames)
        .into_par_iter()
        .map(|i| frame_stats(spec, i))
        .try_reduce(CorpusStats::default, |a, b| Ok(a.merge(b)))
}

fn frame_stats(spec: &CorpusSpec, index: u64) -> Result<CorpusStats> {
    let (synthetic, hits) = corpus_frame(spec, index)?;
    let s = &spec.synthesis;
    let clusters = find_clusters(&synthetic.frame, &spec.thresholds, s.noise_sigma_adc);
    let w = s.width as usize;
    // Owner cluster of every pixel.
    let mut owner = vec![usize::MAX; w * s.height as usize];
    for (k, c) in clusters.iter().enumerate() {
        for p in &c.pixels {
            owner[p.y as usize * w + p.x as usize] = k;
        }
    }
    let accepted = |px: usize| owner[px] != usize::MAX && clusters[owner[px]].classification == ClusterClass::AcceptedXRay;

    let mut stats = CorpusStats {
        frames: 1,
        hits_injected: hits.len() as u64,
        tracks_injected: synthetic.tracks.len() as u64,
        ..CorpusStats::default()
    };
    for c in &clusters {
        match c.classification {
            ClusterClass::AcceptedXRay => stats.clusters_accepted += 1,
            ClusterClass::RejectedTrack => stats.clusters_track += 1,
            ClusterClass::RejectedNoise => stats.clusters_noise += 1,
        }
    }
    for h in &hits {
        let px = h.y as usize * w + h.x as usize;
        if accepted(px) {
            stats.hits_accepted += 1;
            let adc = clusters[owner[px]].summed_adc;
            stats.matched_adc_sum += adc;
            stats.matched_adc_sum_sq += u128::from(adc) * u128::from(adc);
        }
    }
    for t in &synthetic.tracks {
        if !t.iter().any(|&(x, y)| accepted(y as usize * w + x as usize)) {
            stats.tracks_rejected += 1;
        }
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_is_thread_count_invariant() {
        let spec = CorpusSpec {
            frames: 40,
            hits_per_frame: 3,
            hit_energy_kev: 7.729,
            synthesis: FrameSynthesis {
                width: 48,
                height: 48,
                track_rate: 2.0,
                ..FrameSynthesis::default()
            },
            thresholds: ClusterThresholds::default(),
            seed: 99,
        };
        let run = |n| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .unwrap()
                .install(|| run_corpus(&spec).unwrap())
        };
        assert_eq!(run(1), run(4));
    }
}
