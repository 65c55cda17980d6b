//! Builds a graph with the reliable-bit structure, writes it as alist plus a
//! reliability mask, reads both back and audits the result.
//!
//! cargo run --release --example alist_export -- out.alist

use udp_ldpc::sim::alist::{from_alist, mask_from_str, mask_to_string, to_alist};
use udp_ldpc::sim::{build_graph, GraphOptions};
use udp_ldpc::EnsembleSpec;

fn main() -> udp_ldpc::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "graph.alist".into());
    let spec = EnsembleSpec::new(3, 8)?;
    let graph = build_graph(
        3632,
        &spec,
        11,
        GraphOptions {
            remove_4cycles: true,
        },
    )?;
    graph.audit(&spec)?;
    let mask_path = std::path::Path::new(&path).with_extension("mask");
    std::fs::write(&path, to_alist(&graph))?;
    std::fs::write(&mask_path, mask_to_string(&graph.reliable))?;
    println!("wrote {path} and {}", mask_path.display());

    let mask = mask_from_str(&std::fs::read_to_string(&mask_path)?)?;
    let back = from_alist(&std::fs::read_to_string(&path)?, Some(mask))?;
    back.audit(&spec)?;
    assert_eq!(back, graph);
    println!(
        "read back: n = {}, m = {}, reliable = {}, 4-cycles = {}",
        back.n,
        back.m,
        back.reliable_count(),
        back.four_cycles()
    );
    Ok(())
}
