//! Belief-propagation density evolution on a quantised LLR grid: the
//! error trajectory at one channel, then uniform and UDP thresholds.
//!
//! cargo run --release --example bp_threshold -- 3 8 [dump.bin]

use udp_ldpc::bp::{bp_search_options, BpDe};
use udp_ldpc::threshold::search_threshold;
use udp_ldpc::{EnsembleSpec, ProtectionMode, SearchOptions};

fn main() -> udp_ldpc::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let dv = args.first().and_then(|a| a.parse().ok()).unwrap_or(3);
    let dc = args.get(1).and_then(|a| a.parse().ok()).unwrap_or(8);
    let spec = EnsembleSpec::new(dv, dc)?;
    let de = BpDe::default();

    let run = de.run(&spec, ProtectionMode::Udp, 0.08, 0.001)?;
    println!("{spec} UDP at p = 0.08, pbar = 0.001: {:?}", run.probe);
    for (l, (reg, rel)) in run.errors.iter().enumerate().step_by(5) {
        println!("  iter {l:>3}: regular {reg:.3e}  reliable {rel:.3e}");
    }
    if let Some(path) = args.get(2) {
        // Final regular density of a short uniform run, for inspection.
        let mut last = None;
        de.run_with(&spec, ProtectionMode::Uniform, 0.05, 0.05, |l, reg, _| {
            if l <= 10 {
                last = Some(reg.clone());
            }
        })?;
        let mut f = std::fs::File::create(path)?;
        last.expect("at least the channel").write_dump(&mut f)?;
        println!("density dump written to {path}");
    }

    let opts = bp_search_options();
    let uniform = search_threshold(&de, &spec, ProtectionMode::Uniform, &opts);
    let udp = search_threshold(
        &de,
        &spec,
        ProtectionMode::Udp,
        &SearchOptions {
            uniform: Some(uniform.threshold),
            ..opts
        },
    );
    println!("uniform {:.4}", uniform.threshold);
    println!(
        "udp     {:.4} at ({:.4}, {:.4}), gain {:.1}%",
        udp.threshold,
        udp.p_star,
        udp.pbar_star,
        udp.gain_pct.unwrap_or(0.0)
    );
    Ok(())
}
