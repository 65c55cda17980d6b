//! Message-passing decoders on a [`TannerGraph`].
//!
//! Every decoder starts from variable-to-check messages equal to the channel
//! output, checks the syndrome before the first iteration and after every
//! iteration, and stops on a zero syndrome or at the cap.

use serde::{Deserialize, Serialize};

use crate::sim::graph::TannerGraph;

/// Outcome of one decoding attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DecodeResult {
    /// Hard decisions form a codeword (no erasures, zero syndrome).
    pub converged: bool,
    pub iterations: usize,
    /// Bits decided as 1 or left erased.
    pub residual_bit_errors: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecoderKind {
    GallagerA,
    ThreeLevel,
    Bp,
}

impl DecoderKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            DecoderKind::GallagerA => "gallager-a",
            DecoderKind::ThreeLevel => "three-level",
            DecoderKind::Bp => "bp",
        }
    }

    /// Default iteration cap.
    pub fn default_max_iter(&self) -> usize {
        match self {
            DecoderKind::GallagerA => 100,
            DecoderKind::ThreeLevel | DecoderKind::Bp => 50,
        }
    }
}

impl std::fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for DecoderKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "gallager-a" | "ga" => Ok(DecoderKind::GallagerA),
            "three-level" | "3-level" => Ok(DecoderKind::ThreeLevel),
            "bp" => Ok(DecoderKind::Bp),
            other => Err(crate::Error::Config(format!("unknown decoder `{other}`"))),
        }
    }
}

/// LLR clip and the magnitude given to known bits.
pub const LLR_CLIP: f64 = 50.0;

/// Reusable message buffers.
#[derive(Debug, Default, Clone)]
pub struct Workspace {
    hard_v2c: Vec<i8>,
    hard_c2v: Vec<i8>,
    soft_v2c: Vec<f64>,
    soft_c2v: Vec<f64>,
    phi: Vec<f64>,
    llr: Vec<f64>,
    bits: Vec<u8>,
}

fn sign(x: i32) -> i8 {
    x.signum() as i8
}

/// Syndrome test on `bits`, where 2 marks an erasure.
fn codeword(graph: &TannerGraph, bits: &[u8]) -> bool {
    if bits.iter().any(|&b| b > 1) {
        return false;
    }
    (0..graph.m).all(|c| {
        graph
            .check_neighbours(c)
            .iter()
            .fold(0u8, |a, &v| a ^ bits[v])
            == 0
    })
}

fn finish(converged: bool, iterations: usize, bits: &[u8]) -> DecodeResult {
    DecodeResult {
        converged,
        iterations,
        residual_bit_errors: bits.iter().filter(|&&b| b != 0).count(),
    }
}

fn hard_bit(y: i8) -> u8 {
    (y < 0) as u8
}

/// Gallager A. With `fixed`, reliable bits keep their received value.
pub fn decode_gallager_a(
    graph: &TannerGraph,
    word: &[i8],
    fixed: bool,
    max_iter: usize,
    ws: &mut Workspace,
) -> DecodeResult {
    let e_total = graph.edges();
    ws.hard_v2c.clear();
    ws.hard_v2c.extend(graph.edge_vn.iter().map(|&v| word[v]));
    ws.hard_c2v.resize(e_total, 0);
    ws.bits.clear();
    ws.bits.extend(word.iter().map(|&y| hard_bit(y)));
    if codeword(graph, &ws.bits) {
        return finish(true, 0, &ws.bits);
    }
    for it in 1..=max_iter {
        check_products(graph, &ws.hard_v2c, &mut ws.hard_c2v);
        for v in 0..graph.n {
            let y = word[v];
            let edges = graph.vn_edges(v);
            if fixed && graph.reliable[v] {
                ws.bits[v] = hard_bit(y);
                continue;
            }
            let against = edges.iter().filter(|&&e| ws.hard_c2v[e] == -y).count();
            for &e in edges {
                let others = against - (ws.hard_c2v[e] == -y) as usize;
                ws.hard_v2c[e] = if others == edges.len() - 1 { -y } else { y };
            }
            let total: i32 = y as i32 + edges.iter().map(|&e| ws.hard_c2v[e] as i32).sum::<i32>();
            ws.bits[v] = if total == 0 {
                hard_bit(y)
            } else {
                (total < 0) as u8
            };
        }
        if codeword(graph, &ws.bits) {
            return finish(true, it, &ws.bits);
        }
    }
    finish(false, max_iter, &ws.bits)
}

/// Check rule over `{-1, 0, 1}`: product of the other incoming signs.
fn check_products(graph: &TannerGraph, v2c: &[i8], c2v: &mut [i8]) {
    for c in 0..graph.m {
        let r = graph.cn_edges(c);
        let mut prod = 1i8;
        let mut zeros = 0;
        let mut zero_at = 0;
        for e in r.clone() {
            match v2c[e] {
                0 => {
                    zeros += 1;
                    zero_at = e;
                }
                s => prod *= s,
            }
        }
        for e in r {
            c2v[e] = match zeros {
                0 => prod * v2c[e],
                1 if e == zero_at => prod,
                _ => 0,
            };
        }
    }
}

/// 3-level decoder. `weights[l - 1]` is the `(regular, reliable)` channel
/// weight of iteration `l`; the last entry repeats, an empty schedule means 1.
pub fn decode_three_level(
    graph: &TannerGraph,
    word: &[i8],
    weights: &[(usize, usize)],
    fixed: bool,
    max_iter: usize,
    ws: &mut Workspace,
) -> DecodeResult {
    let e_total = graph.edges();
    ws.hard_v2c.clear();
    ws.hard_v2c.extend(graph.edge_vn.iter().map(|&v| word[v]));
    ws.hard_c2v.resize(e_total, 0);
    ws.bits.clear();
    ws.bits.extend(word.iter().map(|&y| hard_bit(y)));
    if codeword(graph, &ws.bits) {
        return finish(true, 0, &ws.bits);
    }
    for it in 1..=max_iter {
        let (w_reg, w_rel) = weights
            .get(it - 1)
            .or(weights.last())
            .copied()
            .unwrap_or((1, 1));
        check_products(graph, &ws.hard_v2c, &mut ws.hard_c2v);
        for v in 0..graph.n {
            let y = word[v];
            if fixed && graph.reliable[v] {
                ws.bits[v] = hard_bit(y);
                continue;
            }
            let w = if graph.reliable[v] { w_rel } else { w_reg } as i32;
            let edges = graph.vn_edges(v);
            let total: i32 =
                w * y as i32 + edges.iter().map(|&e| ws.hard_c2v[e] as i32).sum::<i32>();
            for &e in edges {
                ws.hard_v2c[e] = sign(total - ws.hard_c2v[e] as i32);
            }
            ws.bits[v] = match total.signum() {
                1 => 0,
                -1 => 1,
                _ => 2,
            };
        }
        if codeword(graph, &ws.bits) {
            return finish(true, it, &ws.bits);
        }
    }
    finish(false, max_iter, &ws.bits)
}

/// `-ln tanh(x / 2)` for `x > 0`, its own inverse.
fn phi(x: f64) -> f64 {
    let x = x.clamp(1e-12, LLR_CLIP);
    -(x * 0.5).tanh().ln()
}

fn channel_llr(q: f64) -> f64 {
    if q <= 0.0 {
        LLR_CLIP
    } else {
        ((1.0 - q) / q).ln().min(LLR_CLIP)
    }
}

/// Sum-product decoder. Regular bits get `±ln((1-p)/p)`, reliable bits
/// `±ln((1-pbar)/pbar)`; with `fixed` they are saturated at the clip.
pub fn decode_bp(
    graph: &TannerGraph,
    word: &[i8],
    p: f64,
    pbar: f64,
    fixed: bool,
    max_iter: usize,
    ws: &mut Workspace,
) -> DecodeResult {
    let (l_reg, l_rel) = (
        channel_llr(p),
        if fixed { LLR_CLIP } else { channel_llr(pbar) },
    );
    let e_total = graph.edges();
    ws.llr.clear();
    ws.llr.extend(
        word.iter()
            .zip(&graph.reliable)
            .map(|(&y, &rel)| y as f64 * if rel { l_rel } else { l_reg }),
    );
    ws.soft_v2c.clear();
    ws.soft_v2c.extend(graph.edge_vn.iter().map(|&v| ws.llr[v]));
    ws.soft_c2v.resize(e_total, 0.0);
    ws.phi.resize(e_total, 0.0);
    ws.bits.clear();
    ws.bits.extend(word.iter().map(|&y| hard_bit(y)));
    if codeword(graph, &ws.bits) {
        return finish(true, 0, &ws.bits);
    }
    for it in 1..=max_iter {
        for c in 0..graph.m {
            let r = graph.cn_edges(c);
            let mut negative = false;
            let mut sum = 0.0;
            for e in r.clone() {
                let m = ws.soft_v2c[e];
                negative ^= m < 0.0;
                let f = phi(m.abs());
                ws.phi[e] = f;
                sum += f;
            }
            for e in r {
                let mag = phi((sum - ws.phi[e]).max(0.0));
                let neg = negative ^ (ws.soft_v2c[e] < 0.0);
                ws.soft_c2v[e] = if neg { -mag } else { mag };
            }
        }
        for v in 0..graph.n {
            let edges = graph.vn_edges(v);
            let ch = ws.llr[v];
            let total = if fixed && graph.reliable[v] {
                for &e in edges {
                    ws.soft_v2c[e] = ch;
                }
                ch
            } else {
                let total = ch + edges.iter().map(|&e| ws.soft_c2v[e]).sum::<f64>();
                for &e in edges {
                    ws.soft_v2c[e] = (total - ws.soft_c2v[e]).clamp(-LLR_CLIP, LLR_CLIP);
                }
                total
            };
            ws.bits[v] = if total > 0.0 {
                0
            } else if total < 0.0 {
                1
            } else {
                2
            };
        }
        if codeword(graph, &ws.bits) {
            return finish(true, it, &ws.bits);
        }
    }
    finish(false, max_iter, &ws.bits)
}
