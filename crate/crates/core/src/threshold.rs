//! Convergence probing and threshold search.
//!
//! Every density-evolution flavour in this crate reduces to a predicate
//! "does DE started at this channel converge to zero error". The functions
//! here turn such predicates into thresholds: a 1-D bisection for uniform
//! and doping setups, and a 2-D best-pair search that maximises the
//! codeword-average crossover for UDP.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::{average_crossover, threshold_gain, EnsembleSpec, ProtectionMode};

/// A density-evolution flavour seen as a convergence oracle.
///
/// `pbar` is only read in UDP mode; uniform runs use `p` for every bit and
/// doping runs pin the reliable bits to a perfect channel.
pub trait DensityEvolution: Sync {
    fn probe(&self, spec: &EnsembleSpec, mode: ProtectionMode, p: f64, pbar: f64) -> Probe;
}

/// Stopping rule shared by the density-evolution runners.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeConfig {
    /// Error (and erasure) probability below which DE counts as converged.
    pub tolerance: f64,
    pub max_iter: usize,
    /// Relative change under which a trajectory above `tolerance` is
    /// declared stuck at a non-zero fixed point.
    pub plateau_rel: f64,
}

impl DeConfig {
    pub const GALLAGER_A: DeConfig = DeConfig {
        tolerance: 1e-9,
        max_iter: 5000,
        plateau_rel: 1e-12,
    };
    pub const THREE_LEVEL: DeConfig = DeConfig {
        tolerance: 1e-6,
        max_iter: 100,
        plateau_rel: 1e-12,
    };
    pub const BP: DeConfig = DeConfig {
        tolerance: 1e-7,
        max_iter: 200,
        plateau_rel: 1e-12,
    };
}

/// Outcome of a single DE run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Probe {
    pub converged: bool,
    pub iterations: usize,
    pub final_error: f64,
}

/// Tracks a scalar error sequence against a [`DeConfig`].
#[derive(Debug, Clone)]
pub(crate) struct ConvergenceMonitor {
    cfg: DeConfig,
    last: f64,
}

pub(crate) enum Verdict {
    Continue,
    Done(Probe),
}

impl ConvergenceMonitor {
    pub(crate) fn new(cfg: DeConfig) -> Self {
        ConvergenceMonitor {
            cfg,
            last: f64::INFINITY,
        }
    }

    /// Feeds the worst error of iteration `iter` (1-based).
    pub(crate) fn observe(&mut self, iter: usize, err: f64) -> Verdict {
        if err < self.cfg.tolerance {
            return Verdict::Done(Probe {
                converged: true,
                iterations: iter,
                final_error: err,
            });
        }
        let rel = (self.last - err).abs() / err;
        self.last = err;
        if rel < self.cfg.plateau_rel || iter >= self.cfg.max_iter || !err.is_finite() {
            return Verdict::Done(Probe {
                converged: false,
                iterations: iter,
                final_error: err,
            });
        }
        Verdict::Continue
    }
}

/// Result of [`bisect_threshold`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bisection {
    /// Largest probed value known to converge.
    pub threshold: f64,
    /// Smallest probed value known to fail (the upper bracket end).
    pub upper: f64,
    pub probes: usize,
    /// A verification point that contradicted monotonicity, if any.
    pub non_monotone: Option<f64>,
}

/// Bisects a monotone predicate on `[lo, hi]` down to a bracket of width
/// `tol`, then checks `verify` extra points on each side of the answer.
///
/// If `converges(hi)` holds the answer is `hi` itself.
pub fn bisect_threshold<F>(converges: F, lo: f64, hi: f64, tol: f64, verify: usize) -> Bisection
where
    F: Fn(f64) -> bool,
{
    let mut probes = 0;
    let mut probe = |v: f64| {
        probes += 1;
        converges(v)
    };
    if probe(hi) {
        return Bisection {
            threshold: hi,
            upper: hi,
            probes,
            non_monotone: None,
        };
    }
    let (mut a, mut b) = (lo, hi);
    while b - a > tol {
        let mid = 0.5 * (a + b);
        if probe(mid) {
            a = mid;
        } else {
            b = mid;
        }
    }
    let mut non_monotone = None;
    for i in 1..=verify {
        let below = a - i as f64 * tol;
        if below > lo && !probe(below) {
            non_monotone.get_or_insert(below);
        }
        let above = b + i as f64 * tol;
        if above < hi && probe(above) {
            non_monotone.get_or_insert(above);
        }
    }
    Bisection {
        threshold: a,
        upper: b,
        probes,
        non_monotone,
    }
}

/// Knobs for [`best_pair_search`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairSearchOptions {
    /// Step of the first sweep over `pbar`.
    pub coarse_step: f64,
    /// Step of the refinement sweep around the coarse optimum.
    pub grid_step: f64,
    /// Bisection tolerance on `p` for every probed `pbar`.
    pub p_tol: f64,
    /// Upper end of the `p` bracket.
    pub p_max: f64,
    /// Coarse probes without improvement before the sweep stops.
    pub patience: usize,
}

impl Default for PairSearchOptions {
    fn default() -> Self {
        PairSearchOptions {
            coarse_step: 1e-3,
            grid_step: 1e-4,
            p_tol: 1e-5,
            p_max: 0.5 - 1e-9,
            patience: 5,
        }
    }
}

/// A feasible `(p, pbar)` pair and its codeword average.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Pair {
    pub p: f64,
    pub pbar: f64,
    pub average: f64,
}

/// Result of [`best_pair_search`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairSearch {
    pub best: Pair,
    /// Threshold along the diagonal `pbar = p`.
    pub uniform: f64,
    /// Every probed `pbar` with its maximal feasible `p`, ascending in `pbar`.
    pub frontier: Vec<Pair>,
    pub probes: usize,
    /// `pbar` values where feasibility was found non-monotone in `p`.
    pub non_monotone: Vec<f64>,
}

/// Threshold along the diagonal `pbar = p`.
pub fn diagonal_threshold<F>(converges: &F, opts: &PairSearchOptions) -> Bisection
where
    F: Fn(f64, f64) -> bool + Sync,
{
    bisect_threshold(|t| converges(t, t), 0.0, opts.p_max, opts.p_tol, 0)
}

/// Searches the feasible set `{(p, pbar) : pbar <= p, DE converges}` for
/// the pair with the largest codeword average `pbar (1-R) + p R`.
///
/// For each probed `pbar` the largest feasible `p` comes from bisection.
/// A coarse sweep over `pbar` starts at 0 and stops after `patience`
/// non-improving probes or at the diagonal; a `grid_step` sweep follows
/// around the coarse optimum and a three-point quadratic fit proposes a
/// last candidate. Ties go to the smaller `pbar`.
pub fn best_pair_search<F>(converges: F, rate: f64, opts: &PairSearchOptions) -> PairSearch
where
    F: Fn(f64, f64) -> bool + Sync,
{
    let diag = diagonal_threshold(&converges, opts);
    let uniform = diag.threshold;
    let mut probes = diag.probes;
    let mut non_monotone = Vec::new();
    let mut frontier: Vec<Pair> = Vec::new();

    let frontier_at = |pbar: f64, hint: Option<f64>| -> (Option<Pair>, usize, bool) {
        if pbar > uniform {
            return (None, 0, false);
        }
        let pred = |p: f64| converges(p.max(pbar), pbar);
        let (lo, hi, mut n) = bracket(&pred, pbar, opts.p_max, hint, HINT_WIDTH);
        let b = bisect_threshold(pred, lo, hi, opts.p_tol, 1);
        n += b.probes;
        // p = pbar is the diagonal, feasible by construction of `uniform`.
        let p = b.threshold.max(pbar);
        (
            Some(Pair {
                p,
                pbar,
                average: average_crossover(p, pbar, rate),
            }),
            n,
            b.non_monotone.is_some(),
        )
    };

    // Coarse sweep.
    let mut best = Pair {
        p: uniform,
        pbar: uniform,
        average: uniform,
    };
    let mut stale = 0;
    let mut k = 0usize;
    loop {
        let pbar = k as f64 * opts.coarse_step;
        if pbar > uniform {
            break;
        }
        let (pair, n, bad) = frontier_at(pbar, frontier.last().map(|f| f.p));
        probes += n;
        if bad {
            non_monotone.push(pbar);
        }
        let Some(pair) = pair else { break };
        frontier.push(pair);
        if pair.average > best.average || (pair.average == best.average && pair.pbar < best.pbar) {
            best = pair;
            stale = 0;
        } else {
            stale += 1;
            if stale >= opts.patience {
                break;
            }
        }
        k += 1;
    }

    // Fine sweep around the coarse optimum.
    let centre = best.pbar.min(uniform);
    let steps = (opts.coarse_step / opts.grid_step).round() as i64;
    let fine: Vec<f64> = (-steps..=steps)
        .map(|i| centre + i as f64 * opts.grid_step)
        .filter(|&v| {
            v >= 0.0 && v <= uniform && !frontier.iter().any(|f| (f.pbar - v).abs() < 1e-12)
        })
        .collect();
    let hint = Some(best.p);
    let results: Vec<_> = fine.par_iter().map(|&v| frontier_at(v, hint)).collect();
    for (v, (pair, n, bad)) in fine.iter().zip(results) {
        probes += n;
        if bad {
            non_monotone.push(*v);
        }
        if let Some(pair) = pair {
            frontier.push(pair);
        }
    }
    frontier.sort_by(|a, b| a.pbar.total_cmp(&b.pbar));
    best = pick_best(&frontier, best);

    // Quadratic refinement through the best point and its neighbours.
    if let Some(idx) = frontier.iter().position(|f| f.pbar == best.pbar) {
        if idx > 0 && idx + 1 < frontier.len() {
            let (a, b, c) = (frontier[idx - 1], frontier[idx], frontier[idx + 1]);
            if let Some(v) = parabola_vertex(
                (a.pbar, a.average),
                (b.pbar, b.average),
                (c.pbar, c.average),
            ) {
                if v > a.pbar && v < c.pbar && (v - b.pbar).abs() > 1e-12 {
                    let (pair, n, _) = frontier_at(v, Some(b.p));
                    probes += n;
                    if let Some(pair) = pair {
                        frontier.push(pair);
                        frontier.sort_by(|a, b| a.pbar.total_cmp(&b.pbar));
                        best = pick_best(&frontier, best);
                    }
                }
            }
        }
    }

    PairSearch {
        best,
        uniform,
        frontier,
        probes,
        non_monotone,
    }
}

const HINT_WIDTH: f64 = 0.01;

/// Narrows `[lo, hi]` around `hint` when the predicate allows it, so that a
/// neighbouring frontier point saves most of the bisection steps. Returns
/// the bracket and the number of probes spent.
fn bracket<F: Fn(f64) -> bool>(
    pred: &F,
    lo: f64,
    hi: f64,
    hint: Option<f64>,
    width: f64,
) -> (f64, f64, usize) {
    let Some(h) = hint else { return (lo, hi, 0) };
    let up = (h + width).min(hi);
    let down = (h - width).max(lo);
    if up >= hi || down <= lo {
        return (lo, hi, 0);
    }
    if pred(up) {
        return (up, hi, 1);
    }
    if pred(down) {
        (down, up, 2)
    } else {
        (lo, down, 2)
    }
}

fn pick_best(frontier: &[Pair], seed: Pair) -> Pair {
    let mut best = seed;
    for f in frontier {
        if f.average > best.average || (f.average == best.average && f.pbar < best.pbar) {
            best = *f;
        }
    }
    best
}

/// Abscissa of the maximum of the parabola through three points, if concave.
fn parabola_vertex(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> Option<f64> {
    let d1 = (b.1 - a.1) / (b.0 - a.0);
    let d2 = (c.1 - b.1) / (c.0 - b.0);
    let curv = (d2 - d1) / (c.0 - a.0);
    if curv >= 0.0 {
        return None;
    }
    // f(t) = a.1 + d1 (t - a.0) + curv (t - a.0)(t - b.0)
    Some(0.5 * (a.0 + b.0) - d1 / (2.0 * curv))
}

/// Threshold, optimising pair and gain for one ensemble and mode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdReport {
    pub mode: ProtectionMode,
    pub p_star: f64,
    pub pbar_star: f64,
    /// Uniform: `p*`. Doping: `p* R`. UDP: `pbar* (1-R) + p* R`.
    pub threshold: f64,
    /// Gain over the uniform threshold, when one was supplied.
    pub gain_pct: Option<f64>,
    pub probes: usize,
    pub grid_step: f64,
    /// DE iterations used by the converging run at the reported pair.
    pub boundary_iterations: usize,
    /// Probe points that contradicted monotone feasibility.
    pub non_monotone: Vec<f64>,
}

impl ThresholdReport {
    pub fn new(mode: ProtectionMode, p_star: f64, pbar_star: f64, rate: f64) -> Self {
        let threshold = match mode {
            ProtectionMode::Uniform => p_star,
            ProtectionMode::Doping => p_star * rate,
            ProtectionMode::Udp => average_crossover(p_star, pbar_star, rate),
        };
        ThresholdReport {
            mode,
            p_star,
            pbar_star,
            threshold,
            gain_pct: None,
            probes: 0,
            grid_step: 0.0,
            boundary_iterations: 0,
            non_monotone: Vec::new(),
        }
    }

    /// Attaches the gain relative to `uniform`.
    pub fn with_gain(mut self, uniform: f64) -> Self {
        self.gain_pct = threshold_gain(self.threshold, uniform).ok();
        self
    }

    /// The JSON document emitted per search.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "mode": self.mode,
            "p_star": self.p_star,
            "pbar_star": self.pbar_star,
            "threshold": self.threshold,
            "gain_pct": self.gain_pct,
            "probes": self.probes,
            "grid_step": self.grid_step,
        })
    }
}

/// How the reliable crossover is chosen in UDP mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PbarPolicy {
    /// Maximise the codeword average with [`best_pair_search`].
    BestPair,
    /// Keep `pbar` fixed and bisect on `p` only.
    Fixed(f64),
}

/// Options for [`search_threshold`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchOptions {
    pub pair: PairSearchOptions,
    pub pbar_policy: PbarPolicy,
    /// Verification probes on each side of a 1-D answer.
    pub verify: usize,
    /// Known uniform threshold; skips the extra search needed for the gain.
    pub uniform: Option<f64>,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            pair: PairSearchOptions::default(),
            pbar_policy: PbarPolicy::BestPair,
            verify: 1,
            uniform: None,
        }
    }
}

/// Threshold of one ensemble in one mode, with the gain over uniform.
pub fn search_threshold<D: DensityEvolution>(
    de: &D,
    spec: &EnsembleSpec,
    mode: ProtectionMode,
    opts: &SearchOptions,
) -> ThresholdReport {
    let rate = spec.rate();
    let po = &opts.pair;
    let line = |m: ProtectionMode, pbar: Option<f64>, lo: f64| {
        bisect_threshold(
            |p| de.probe(spec, m, p, pbar.unwrap_or(p)).converged,
            lo,
            po.p_max,
            po.p_tol,
            opts.verify,
        )
    };
    let mut probes = 0;
    let uniform = |probes: &mut usize| match opts.uniform {
        Some(u) => u,
        None => {
            let b = line(ProtectionMode::Uniform, None, 0.0);
            *probes += b.probes;
            b.threshold
        }
    };
    let mut report = match mode {
        ProtectionMode::Uniform => {
            let b = line(mode, None, 0.0);
            let mut r =
                ThresholdReport::new(mode, b.threshold, b.threshold, rate).with_gain(b.threshold);
            r.probes = b.probes;
            r.non_monotone.extend(b.non_monotone);
            r
        }
        ProtectionMode::Doping => {
            let b = line(mode, Some(0.0), 0.0);
            let u = uniform(&mut probes);
            let mut r = ThresholdReport::new(mode, b.threshold, 0.0, rate).with_gain(u);
            r.probes = b.probes + probes;
            r.non_monotone.extend(b.non_monotone);
            r
        }
        ProtectionMode::Udp => match opts.pbar_policy {
            PbarPolicy::BestPair => {
                let s =
                    best_pair_search(|p, pbar| de.probe(spec, mode, p, pbar).converged, rate, po);
                let mut r =
                    ThresholdReport::new(mode, s.best.p, s.best.pbar, rate).with_gain(s.uniform);
                r.probes = s.probes;
                r.grid_step = po.grid_step;
                r.non_monotone = s.non_monotone;
                r
            }
            PbarPolicy::Fixed(pbar) => {
                let b = line(mode, Some(pbar), pbar);
                let p = b.threshold.max(pbar);
                let u = uniform(&mut probes);
                let mut r = ThresholdReport::new(mode, p, pbar, rate).with_gain(u);
                r.probes = b.probes + probes;
                r.non_monotone.extend(b.non_monotone);
                r
            }
        },
    };
    let pbar = match mode {
        ProtectionMode::Uniform => report.p_star,
        ProtectionMode::Doping => 0.0,
        ProtectionMode::Udp => report.pbar_star,
    };
    report.boundary_iterations = de.probe(spec, mode, report.p_star, pbar).iterations;
    report
}
