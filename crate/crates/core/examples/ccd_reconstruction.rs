//! Synthesise one noisy frame with X-ray hits and tracks, then find and
//! classify its clusters.

use pepsim::ccd::{calibrate, find_clusters, synthesize_frame, ClusterClass, ClusterThresholds, FrameSynthesis, Hit};
use pepsim::rng::SeedTree;

fn main() -> pepsim::Result<()> {
    let settings = FrameSynthesis {
        width: 128,
        height: 128,
        track_rate: 3.0,
        ..FrameSynthesis::default()
    };
    let mut rng = SeedTree::new(7).stream("example-frame", 0);
    let hits: Vec<Hit> = (0..6)
        .map(|i| Hit {
            x: 10 + 20 * i,
            y: 15 + 18 * i,
            energy_kev: if i % 2 == 0 { 8.040 } else { 7.729 },
        })
        .collect();
    let synthetic = synthesize_frame(&hits, &settings, &mut rng)?;
    println!(
        "{} hits ({} split), {} tracks injected",
        hits.len(),
        synthetic.split_hits,
        synthetic.tracks.len()
    );

    let clusters = find_clusters(&synthetic.frame, &ClusterThresholds::default(), settings.noise_sigma_adc);
    for c in &clusters {
        let (x, y) = c.centroid();
        let energy = calibrate(c, &settings.calibration);
        let tag = match c.classification {
            ClusterClass::AcceptedXRay => "x-ray",
            ClusterClass::RejectedTrack => "track",
            ClusterClass::RejectedNoise => "noise",
        };
        println!("({x:6.1}, {y:6.1})  {:2} px  {energy:7.3} keV  {tag}", c.pixel_count());
    }
    Ok(())
}
