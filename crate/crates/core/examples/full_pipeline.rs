//! simulate → analyze → limit → project on a config file.
//!
//! `cargo run --release --example full_pipeline -- crates/core/config/campaign.cfg /tmp/pepsim-run`

use std::path::PathBuf;

use pepsim::analysis::SensitivityScales;
use pepsim::pipeline::{run_all, RunConfig};

fn main() -> pepsim::Result<()> {
    let mut args = std::env::args().skip(1);
    let config_path = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("config/campaign.cfg"));
    let config = RunConfig::load(&config_path)?;
    let out = config.resolve_output_dir(args.next().map(PathBuf::from).as_deref());

    let scales = SensitivityScales {
        background: 0.01,
        live_time: 36.5,
        current: 1.0,
    };
    let result = run_all(&config, &out, scales)?;
    let a = &result.analysis;
    println!("N_on  = {:.0} ± {:.1}", a.n_on.value, a.n_on.error);
    println!("N_off = {:.0} ± {:.1}", a.n_off.value, a.n_off.error);
    println!("dN    = {:.0} ± {:.1}", a.delta.value, a.delta.error);
    println!(
        "K = {:.3e}, beta^2/2 <= {:.1e} ({})",
        result.limit.result.coefficient_k, result.limit.result.beta2_over_2_limit, result.limit.result.confidence_label
    );
    println!("projected: {:.2e}", result.projection.projected_limit);
    for f in &result.files {
        println!("  {}", out.join(f).display());
    }
    Ok(())
}
