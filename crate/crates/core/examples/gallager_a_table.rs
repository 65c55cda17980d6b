//! Gallager A thresholds for uniform and doping setups: closed-form
//! quantities, density evolution and the 3-term approximation.
//!
//! cargo run --release --example gallager_a_table

use udp_ldpc::gallager_a::{approx_threshold, exact_threshold, ga_de_threshold};
use udp_ldpc::{EnsembleSpec, ProtectionMode, SearchOptions};

fn main() -> udp_ldpc::Result<()> {
    println!(
        "{:>8} {:>8} {:>9} {:>8} {:>8} {:>8} {:>7} {:>7}",
        "code", "mode", "p_DE", "gamma", "eta", "approx", "binds", "gain"
    );
    for (dv, dc) in [(3, 10), (3, 15), (4, 15), (4, 30), (5, 10), (5, 15)] {
        let spec = EnsembleSpec::new(dv, dc)?;
        let uniform = ga_de_threshold(&spec, ProtectionMode::Uniform, &SearchOptions::default());
        let opts = SearchOptions {
            uniform: Some(uniform.threshold),
            ..Default::default()
        };
        for mode in [ProtectionMode::Uniform, ProtectionMode::Doping] {
            let de = if mode == ProtectionMode::Uniform {
                uniform.clone()
            } else {
                ga_de_threshold(&spec, mode, &opts)
            };
            let exact = exact_threshold(&spec, mode)?;
            let approx =
                approx_threshold(&spec, mode).map_or("--".to_string(), |a| format!("{a:.4}"));
            println!(
                "{:>8} {:>8} {:>9.4} {:>8.4} {:>8.4} {:>8} {:>7} {:>6.1}%",
                spec.to_string(),
                mode.as_str(),
                de.threshold,
                exact.gamma,
                exact.eta,
                approx,
                exact.binding.as_str(),
                de.gain_pct.unwrap_or(0.0)
            );
        }
    }
    Ok(())
}
