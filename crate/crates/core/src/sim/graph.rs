//! Regular Tanner graphs where every check node sees exactly `x` reliable
//! variable nodes.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ensemble::EnsembleSpec;
use crate::error::{Error, Result};

/// Bipartite graph with edges grouped by check node.
///
/// Edge `e` joins check `e / dc` (in the regular layout produced by
/// [`build_graph`]) to variable `edge_vn[e]`; `vn_edges(v)` lists the edges
/// at variable `v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TannerGraph {
    pub n: usize,
    pub m: usize,
    /// Variable node of every edge.
    pub edge_vn: Vec<usize>,
    /// Check node of every edge.
    pub edge_cn: Vec<usize>,
    cn_ptr: Vec<usize>,
    vn_ptr: Vec<usize>,
    vn_list: Vec<usize>,
    pub reliable: Vec<bool>,
}

/// Construction options for [`build_graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GraphOptions {
    /// Run an edge-swap pass that removes 4-cycles.
    pub remove_4cycles: bool,
}

const REDRAW_CAP: usize = 1000;

impl TannerGraph {
    /// Builds the edge arrays from check-node neighbour lists.
    pub fn from_check_lists(n: usize, checks: &[Vec<usize>], reliable: Vec<bool>) -> Result<Self> {
        if reliable.len() != n {
            return Err(Error::ConstructionFailed(format!(
                "reliability mask has {} entries for {n} variables",
                reliable.len()
            )));
        }
        let m = checks.len();
        let mut edge_vn = Vec::new();
        let mut edge_cn = Vec::new();
        let mut cn_ptr = vec![0];
        for (c, list) in checks.iter().enumerate() {
            for &v in list {
                if v >= n {
                    return Err(Error::ConstructionFailed(format!(
                        "check {c} names variable {v} >= n = {n}"
                    )));
                }
                edge_vn.push(v);
                edge_cn.push(c);
            }
            cn_ptr.push(edge_vn.len());
        }
        let mut deg = vec![0usize; n];
        for &v in &edge_vn {
            deg[v] += 1;
        }
        let mut vn_ptr = vec![0usize; n + 1];
        for v in 0..n {
            vn_ptr[v + 1] = vn_ptr[v] + deg[v];
        }
        let mut fill = vn_ptr.clone();
        let mut vn_list = vec![0usize; edge_vn.len()];
        for (e, &v) in edge_vn.iter().enumerate() {
            vn_list[fill[v]] = e;
            fill[v] += 1;
        }
        Ok(TannerGraph {
            n,
            m,
            edge_vn,
            edge_cn,
            cn_ptr,
            vn_ptr,
            vn_list,
            reliable,
        })
    }

    pub fn edges(&self) -> usize {
        self.edge_vn.len()
    }

    /// Edge ids at check `c`, contiguous.
    pub fn cn_edges(&self, c: usize) -> std::ops::Range<usize> {
        self.cn_ptr[c]..self.cn_ptr[c + 1]
    }

    /// Edge ids at variable `v`.
    pub fn vn_edges(&self, v: usize) -> &[usize] {
        &self.vn_list[self.vn_ptr[v]..self.vn_ptr[v + 1]]
    }

    /// Variable neighbours of check `c`.
    pub fn check_neighbours(&self, c: usize) -> &[usize] {
        &self.edge_vn[self.cn_edges(c)]
    }

    pub fn check_lists(&self) -> Vec<Vec<usize>> {
        (0..self.m)
            .map(|c| self.check_neighbours(c).to_vec())
            .collect()
    }

    pub fn reliable_count(&self) -> usize {
        self.reliable.iter().filter(|r| **r).count()
    }

    /// Number of checks not satisfied by `bits` (0/1 per variable).
    pub fn unsatisfied(&self, bits: &[u8]) -> usize {
        (0..self.m)
            .filter(|&c| {
                self.check_neighbours(c)
                    .iter()
                    .fold(0u8, |a, &v| a ^ bits[v])
                    != 0
            })
            .count()
    }

    /// Pairs of checks sharing two or more variables.
    pub fn four_cycles(&self) -> usize {
        let mut seen = std::collections::HashMap::new();
        for v in 0..self.n {
            let mut cs: Vec<usize> = self.vn_edges(v).iter().map(|&e| self.edge_cn[e]).collect();
            cs.sort_unstable();
            for i in 0..cs.len() {
                for j in i + 1..cs.len() {
                    *seen.entry((cs[i], cs[j])).or_insert(0usize) += 1;
                }
            }
        }
        seen.values().filter(|&&k| k > 1).map(|k| k - 1).sum()
    }

    /// Checks every structural invariant for `spec`.
    pub fn audit(&self, spec: &EnsembleSpec) -> Result<()> {
        let fail = |msg: String| Err(Error::ConstructionFailed(msg));
        if self.n * spec.dv() != self.m * spec.dc() {
            return fail(format!(
                "n dv = {} but m dc = {}",
                self.n * spec.dv(),
                self.m * spec.dc()
            ));
        }
        for v in 0..self.n {
            if self.vn_edges(v).len() != spec.dv() {
                return fail(format!(
                    "variable {v} has degree {}",
                    self.vn_edges(v).len()
                ));
            }
        }
        let expected_reliable = self.m * spec.x() / spec.dv();
        if self.reliable_count() != expected_reliable {
            return fail(format!(
                "{} reliable variables, expected {expected_reliable}",
                self.reliable_count()
            ));
        }
        for c in 0..self.m {
            let nb = self.check_neighbours(c);
            if nb.len() != spec.dc() {
                return fail(format!("check {c} has degree {}", nb.len()));
            }
            let mut sorted = nb.to_vec();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return fail(format!("check {c} has a parallel edge"));
            }
            let rel = nb.iter().filter(|&&v| self.reliable[v]).count();
            if rel != spec.x() {
                return fail(format!(
                    "check {c} has {rel} reliable neighbours, expected {}",
                    spec.x()
                ));
            }
        }
        Ok(())
    }
}

/// Socket layout of one stratum (reliable or regular): check `c` owns
/// slots `c*k .. (c+1)*k`, each holding a variable.
struct Stratum {
    k: usize,
    slots: Vec<usize>,
}

impl Stratum {
    fn check_of(&self, slot: usize) -> usize {
        slot / self.k
    }
}

/// Builds a graph by a stratified configuration model. The last
/// `m x / dv` variables are reliable.
pub fn build_graph(
    n: usize,
    spec: &EnsembleSpec,
    seed: u64,
    opts: GraphOptions,
) -> Result<TannerGraph> {
    let (dv, dc, x) = (spec.dv(), spec.dc(), spec.x());
    if n == 0 || (n * dv) % dc != 0 {
        return Err(Error::ConstructionFailed(format!(
            "n dv = {} is not a multiple of dc = {dc}",
            n * dv
        )));
    }
    let m = n * dv / dc;
    if (m * x) % dv != 0 {
        return Err(Error::ConstructionFailed(format!(
            "m x = {} is not a multiple of dv = {dv}",
            m * x
        )));
    }
    let r = m * x / dv;
    if r > n || (n - r) * dv != m * (dc - x) {
        return Err(Error::ConstructionFailed(
            "reliable quotas are infeasible".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rel = Stratum {
        k: x,
        slots: (n - r..n)
            .flat_map(|v| std::iter::repeat(v).take(dv))
            .collect(),
    };
    let mut reg = Stratum {
        k: dc - x,
        slots: (0..n - r)
            .flat_map(|v| std::iter::repeat(v).take(dv))
            .collect(),
    };
    rel.slots.shuffle(&mut rng);
    reg.slots.shuffle(&mut rng);

    let mut members: Vec<Vec<usize>> = vec![Vec::with_capacity(dc); m];
    for c in 0..m {
        members[c].extend_from_slice(&rel.slots[c * x..(c + 1) * x]);
        members[c].extend_from_slice(&reg.slots[c * (dc - x)..(c + 1) * (dc - x)]);
    }
    for st in [&mut rel, &mut reg] {
        resolve_parallel(st, &mut members, &mut rng)?;
    }
    if opts.remove_4cycles {
        remove_four_cycles(&mut rel, &mut reg, &mut members, n, &mut rng)?;
    }
    let checks: Vec<Vec<usize>> = (0..m)
        .map(|c| {
            let mut l = rel.slots[c * x..(c + 1) * x].to_vec();
            l.extend_from_slice(&reg.slots[c * (dc - x)..(c + 1) * (dc - x)]);
            l
        })
        .collect();
    let reliable = (0..n).map(|v| v >= n - r).collect();
    let g = TannerGraph::from_check_lists(n, &checks, reliable)?;
    g.audit(spec)?;
    Ok(g)
}

fn count_in(members: &[usize], v: usize) -> usize {
    members.iter().filter(|&&u| u == v).count()
}

/// Moves the variable in `a` to slot `b` and back; `members` tracks the
/// per-check multiset.
fn swap_slots(st: &mut Stratum, members: &mut [Vec<usize>], a: usize, b: usize) {
    let (ca, cb) = (st.check_of(a), st.check_of(b));
    let (va, vb) = (st.slots[a], st.slots[b]);
    if ca != cb {
        let ia = members[ca].iter().position(|&u| u == va).expect("member");
        members[ca][ia] = vb;
        let ib = members[cb].iter().position(|&u| u == vb).expect("member");
        members[cb][ib] = va;
    }
    st.slots.swap(a, b);
}

fn swap_is_clean(st: &Stratum, members: &[Vec<usize>], a: usize, b: usize) -> bool {
    let (ca, cb) = (st.check_of(a), st.check_of(b));
    let (va, vb) = (st.slots[a], st.slots[b]);
    ca != cb && va != vb && !members[ca].contains(&vb) && !members[cb].contains(&va)
}

fn resolve_parallel<R: Rng>(
    st: &mut Stratum,
    members: &mut [Vec<usize>],
    rng: &mut R,
) -> Result<()> {
    let total = st.slots.len();
    for a in 0..total {
        let c = st.check_of(a);
        if count_in(&members[c], st.slots[a]) < 2 {
            continue;
        }
        let mut done = false;
        for _ in 0..REDRAW_CAP {
            let b = rng.gen_range(0..total);
            if swap_is_clean(st, members, a, b) {
                swap_slots(st, members, a, b);
                done = true;
                break;
            }
        }
        if !done {
            // Deterministic scan as a last resort.
            match (0..total).find(|&b| swap_is_clean(st, members, a, b)) {
                Some(b) => swap_slots(st, members, a, b),
                None => {
                    return Err(Error::ConstructionFailed(format!(
                        "cannot remove parallel edge at check {c}"
                    )))
                }
            }
        }
    }
    Ok(())
}

/// Would variable `v` at check `c` close a 4-cycle (ignoring slot `skip`'s
/// current occupant)?
fn closes_four_cycle(
    members: &[Vec<usize>],
    vn_checks: &[Vec<usize>],
    c: usize,
    v: usize,
    leaving: usize,
) -> bool {
    vn_checks[v].iter().any(|&c2| {
        c2 != c
            && members[c2]
                .iter()
                .any(|&u| u != v && u != leaving && members[c].contains(&u))
    })
}

fn remove_four_cycles<R: Rng>(
    rel: &mut Stratum,
    reg: &mut Stratum,
    members: &mut [Vec<usize>],
    n: usize,
    rng: &mut R,
) -> Result<()> {
    const PASSES: usize = 50;
    for _ in 0..PASSES {
        let mut changed = false;
        let mut clean = true;
        for st in [&mut *rel, &mut *reg] {
            let total = st.slots.len();
            for a in 0..total {
                let vn_checks = vn_check_lists(members, n);
                let ca = st.check_of(a);
                let va = st.slots[a];
                if !closes_four_cycle(members, &vn_checks, ca, va, usize::MAX) {
                    continue;
                }
                clean = false;
                for _ in 0..REDRAW_CAP {
                    let b = rng.gen_range(0..total);
                    if !swap_is_clean(st, members, a, b) {
                        continue;
                    }
                    let cb = st.check_of(b);
                    let vb = st.slots[b];
                    swap_slots(st, members, a, b);
                    let vn_checks = vn_check_lists(members, n);
                    let ok = !closes_four_cycle(members, &vn_checks, ca, vb, usize::MAX)
                        && !closes_four_cycle(members, &vn_checks, cb, va, usize::MAX);
                    if ok {
                        changed = true;
                        break;
                    }
                    swap_slots(st, members, a, b);
                }
            }
        }
        if clean {
            return Ok(());
        }
        if !changed {
            break;
        }
    }
    Err(Error::ConstructionFailed(
        "4-cycle removal did not converge".into(),
    ))
}

fn vn_check_lists(members: &[Vec<usize>], n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); n];
    for (c, l) in members.iter().enumerate() {
        for &v in l {
            out[v].push(c);
        }
    }
    out
}
