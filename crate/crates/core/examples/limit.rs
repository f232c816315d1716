//! β²/2 bound from a count difference, with the quon equivalent.

use pepsim::analysis::compute_limit;

fn main() -> pepsim::Result<()> {
    let k = 4.9e29;
    for n_sigma in [1.0, 2.0, 3.0] {
        let r = compute_limit(-21.0, 73.0, k, n_sigma)?;
        println!(
            "{:>9}: beta^2/2 <= {:.3e}   q = {}",
            r.confidence_label,
            r.beta2_over_2_limit,
            r.to_report().get("quon_q").unwrap_or_default()
        );
    }
    Ok(())
}
