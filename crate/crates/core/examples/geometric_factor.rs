//! Monte Carlo survival × acceptance of the CCD ring around the copper
//! cylinder, with and without self-absorption.
//!
//! `cargo run --release --example geometric_factor -- 2000000`

use pepsim::transport::{estimate_geometric_factor, AttenuationTable, DetectorGeometry};

fn main() -> pepsim::Result<()> {
    let samples: u64 = std::env::args().nth(1).map_or(Ok(1_000_000), |s| s.parse()).expect("sample count");
    let geometry = DetectorGeometry::default();
    let copper = AttenuationTable::copper();

    for energy in [7.729, 8.040] {
        println!("attenuation length at {energy} keV: {:.2} um", copper.length_at(energy)? * 1e4);
    }
    let bare = estimate_geometric_factor(&geometry, &AttenuationTable::transparent(), 7.729, 1.0, samples, 1)?;
    let est = estimate_geometric_factor(&geometry, &copper, 7.729, 0.48, samples, 1)?;
    println!(
        "acceptance only:        {:.4} ± {:.4}",
        bare.survival_times_acceptance, bare.statistical_error
    );
    println!(
        "survival x acceptance:  {:.4} ± {:.4}  ({} absorbed, {} hit, {} escaped)",
        est.survival_times_acceptance, est.statistical_error, est.counts.absorbed, est.counts.hit, est.counts.escaped
    );
    println!("with 48% CCD efficiency: {:.5}", est.total_factor);
    Ok(())
}
