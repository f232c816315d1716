//! How the bound moves with lower background, longer running and more current.

use pepsim::analysis::{project_sensitivity, SensitivityScales};

fn main() -> pepsim::Result<()> {
    let base = 4.5e-28;
    let cases = [
        ("as measured", 1.0, 1.0, 1.0),
        ("1 year", 1.0, 36.5, 1.0),
        ("background / 10, 1 year", 0.1, 36.5, 1.0),
        ("background / 100, 1 year", 0.01, 36.5, 1.0),
        ("background / 100, 1 year, 2x current", 0.01, 36.5, 2.0),
    ];
    for (name, background, live_time, current) in cases {
        let p = project_sensitivity(
            base,
            SensitivityScales {
                background,
                live_time,
                current,
            },
        )?;
        println!("{name:<38} {:.2e}", p.projected_limit);
    }
    Ok(())
}
