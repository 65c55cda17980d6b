//! Finite-length FER of uniform and UDP transmission over the same graph,
//! with paired per-trial seeds.
//!
//! cargo run --release --example fer_simulation -- three-level 5 10 3020 500

use udp_ldpc::sim::{build_graph, run_experiment, DecoderKind, ExperimentConfig, GraphOptions};
use udp_ldpc::{EnsembleSpec, ProtectionMode};

fn main() -> udp_ldpc::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let decoder: DecoderKind = args
        .first()
        .map_or(Ok(DecoderKind::ThreeLevel), |a| a.parse())?;
    let num = |i: usize, d: usize| args.get(i).and_then(|a| a.parse().ok()).unwrap_or(d);
    let spec = EnsembleSpec::new(num(1, 5), num(2, 10))?;
    let n = num(3, 3020);
    let trials = num(4, 500) as u64;

    let graph = build_graph(n, &spec, 1, GraphOptions::default())?;
    println!(
        "{spec}, n = {n}, {} checks, {} reliable bits, {} 4-cycles",
        graph.m,
        graph.reliable_count(),
        graph.four_cycles()
    );
    let cfg = ExperimentConfig {
        decoder,
        spec,
        modes: vec![ProtectionMode::Uniform, ProtectionMode::Udp],
        p_avg: vec![0.040, 0.044, 0.048, 0.052, 0.056],
        trials,
        seed: 7,
        max_iter: None,
        pbar_ratio: 0.01,
    };
    println!(
        "{:>8} {:>7} {:>8} {:>8} {:>14} {:>6}",
        "mode", "p_avg", "p", "pbar", "fer", "iters"
    );
    for r in run_experiment(&cfg, &graph)? {
        println!(
            "{:>8} {:>7.4} {:>8.4} {:>8.5} {:>7.4}±{:.4} {:>6}",
            r.mode.as_str(),
            r.p_avg,
            r.p,
            r.pbar,
            r.fer,
            r.fer_ci95,
            r.mean_iters.map_or("-".into(), |m| format!("{m:.2}"))
        );
    }
    Ok(())
}
