//! Current-on minus current-off in the region of interest, using spectra
//! whose ROI content matches the 2005 counts.

use pepsim::analysis::{roi_counts, subtract_spectra, RegionOfInterest, Spectrum, SpectrumLabel};

fn single_bin(count: f64, error: f64, label: SpectrumLabel) -> pepsim::Result<Spectrum> {
    Spectrum::from_parts(7.564, 0.330, vec![count], vec![error], 14510.0, label)
}

fn main() -> pepsim::Result<()> {
    let on = single_bin(2721.0, 52.0, SpectrumLabel::CurrentOn)?;
    let off = single_bin(2742.0, 52.0, SpectrumLabel::CurrentOff)?;
    let roi = RegionOfInterest::default();

    let diff = subtract_spectra(&on, &off)?;
    let n_on = roi_counts(&on, &roi)?;
    let n_off = roi_counts(&off, &roi)?;
    let delta = roi_counts(&diff, &roi)?;
    println!("ROI [{}, {}] keV", roi.lo_kev, roi.hi_kev);
    println!("N_on  = {:.0} ± {:.1}", n_on.value, n_on.error);
    println!("N_off = {:.0} ± {:.1}", n_off.value, n_off.error);
    println!("dN    = {:.0} ± {:.1}", delta.value, delta.error);
    print!("{}", diff.to_csv());
    Ok(())
}
