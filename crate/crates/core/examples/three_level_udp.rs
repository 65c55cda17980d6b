//! 3-level decoder thresholds: uniform, UDP with the best `(p, pbar)` pair,
//! doping, and the closed-form approximation for `dv = 3`.
//!
//! cargo run --release --example three_level_udp -- 3 8

use udp_ldpc::three_level::{tl_approx_threshold, tl_de_run, tl_de_threshold};
use udp_ldpc::{EnsembleSpec, ProtectionMode, SearchOptions};

fn main() -> udp_ldpc::Result<()> {
    let args: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let (dv, dc) = match args[..] {
        [dv, dc] => (dv, dc),
        _ => (3, 8),
    };
    let spec = EnsembleSpec::new(dv, dc)?;
    let uniform = tl_de_threshold(&spec, ProtectionMode::Uniform, &SearchOptions::default());
    let opts = SearchOptions {
        uniform: Some(uniform.threshold),
        ..Default::default()
    };
    let udp = tl_de_threshold(&spec, ProtectionMode::Udp, &opts);
    let doping = tl_de_threshold(&spec, ProtectionMode::Doping, &opts);

    println!("{spec}, rate {:.3}", spec.rate());
    println!("  uniform  p* = {:.4}", uniform.threshold);
    println!(
        "  udp      avg = {:.4} at (p, pbar) = ({:.4}, {:.4}), gain {:.1}%, {} probes",
        udp.threshold,
        udp.p_star,
        udp.pbar_star,
        udp.gain_pct.unwrap_or(0.0),
        udp.probes
    );
    println!(
        "  doping   avg = {:.4}, gain {:.1}%",
        doping.threshold,
        doping.gain_pct.unwrap_or(0.0)
    );
    if let Ok(a) = tl_approx_threshold(&spec, ProtectionMode::Udp, &opts) {
        println!("  approx   avg = {:.4}", a.threshold);
    }

    // Channel weights chosen along a converging UDP trajectory.
    let run = tl_de_run(&spec, ProtectionMode::Udp, 0.9 * udp.p_star, udp.pbar_star);
    let w = run.weight_schedule();
    println!(
        "  weights (regular, reliable) at 0.9 p*: {:?} .. {} iterations",
        &w[..w.len().min(4)],
        w.len()
    );
    Ok(())
}
