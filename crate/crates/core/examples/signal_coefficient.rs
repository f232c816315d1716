//! Expected violating-line counts per unit β²/2 for the 40 A campaign.

use pepsim::physics::{
    expected_signal_counts, internal_scatter_count, new_electron_count, signal_coefficient, ConductorSpec, RunSummary,
};

fn main() -> pepsim::Result<()> {
    let run = RunSummary::constant_current(40.0, 14510.0, 10.0, 14)?;
    let conductor = ConductorSpec::default();
    let geometric_factor = 0.021 * 0.48;

    let n_new = new_electron_count(run.integrated_charge_c)?;
    let n_int = internal_scatter_count(&conductor)?;
    let k = signal_coefficient(&run, &conductor, geometric_factor)?;

    println!("integrated charge   {:.4e} C", run.integrated_charge_c);
    println!("new electrons       {n_new:.4e}");
    println!("scatters/electron   {n_int:.4e}");
    println!("geometric factor    {geometric_factor}");
    println!("K                   {k:.4e}");
    for b in [4.5e-28, 4.5e-27] {
        println!("beta^2/2 = {b:.1e} -> at least {:.1} X-rays", expected_signal_counts(b, k)?);
    }
    Ok(())
}
