//! Density evolution for the 3-level decoder over the BSC.
//!
//! Messages take values in `{-1, 0, +1}` where 0 is an erasure. Check nodes
//! send the product of incoming signs; variable nodes send the sign of
//! `w * channel + sum of incoming`, an erasure when that sum is 0.
//!
//! The all-zero codeword is assumed, so `+1` is a correct message and
//! `-1` a wrong one.

use serde::Serialize;

use crate::ensemble::{EnsembleSpec, ProtectionMode};
use crate::error::{Error, Result};
use crate::threshold::{
    search_threshold, ConvergenceMonitor, DeConfig, DensityEvolution, Probe, SearchOptions,
    ThresholdReport, Verdict,
};

/// Distribution of one 3-level message.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbTriple {
    pub p_m1: f64,
    pub p_0: f64,
    pub p_p1: f64,
}

impl ProbTriple {
    pub const PERFECT: ProbTriple = ProbTriple {
        p_m1: 0.0,
        p_0: 0.0,
        p_p1: 1.0,
    };

    pub fn new(p_m1: f64, p_0: f64, p_p1: f64) -> Result<Self> {
        let t = ProbTriple { p_m1, p_0, p_p1 };
        let ok = [p_m1, p_0, p_p1].iter().all(|v| (0.0..=1.0).contains(v));
        if !ok || (t.total() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidChannel(format!("not a distribution: {t:?}")));
        }
        Ok(t)
    }

    /// Channel output of a BSC with crossover `p`; there are no erasures.
    pub fn bsc(p: f64) -> Self {
        ProbTriple {
            p_m1: p,
            p_0: 0.0,
            p_p1: 1.0 - p,
        }
    }

    pub fn total(&self) -> f64 {
        self.p_m1 + self.p_0 + self.p_p1
    }

    /// Larger of the error and erasure probabilities.
    pub fn residual(&self) -> f64 {
        self.p_m1.max(self.p_0)
    }

    /// Bhattacharyya-type score `p_0 + 2 sqrt(p_m1 p_p1)`.
    pub fn bhattacharyya(&self) -> f64 {
        self.p_0 + 2.0 * (self.p_m1.max(0.0) * self.p_p1.max(0.0)).sqrt()
    }
}

/// Check-node update with `alpha` reliable and `beta` regular inputs.
pub fn cn_update(
    reliable: &ProbTriple,
    regular: &ProbTriple,
    alpha: usize,
    beta: usize,
) -> ProbTriple {
    let (a, b) = (alpha as i32, beta as i32);
    let q0 = 1.0 - (1.0 - reliable.p_0).powi(a) * (1.0 - regular.p_0).powi(b);
    let s = (reliable.p_p1 + reliable.p_m1).powi(a) * (regular.p_p1 + regular.p_m1).powi(b);
    let d = (reliable.p_p1 - reliable.p_m1).powi(a) * (regular.p_p1 - regular.p_m1).powi(b);
    ProbTriple {
        p_m1: 0.5 * (s - d),
        p_0: q0,
        p_p1: 0.5 * (s + d),
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Variable-node update: `dv - 1` check messages distributed as `q`, the
/// channel message weighted by `w`.
pub fn vn_update(q: &ProbTriple, channel: &ProbTriple, dv: usize, w: usize) -> ProbTriple {
    let n = dv - 1;
    let w = w as i64;
    let nf = factorial(n);
    let (mut z, mut plus) = (0.0, 0.0);
    for i in 0..=n {
        for j in 0..=n - i {
            let zeta = n - i - j;
            let phi = nf / (factorial(i) * factorial(j) * factorial(zeta))
                * q.p_p1.powi(i as i32)
                * q.p_m1.powi(j as i32)
                * q.p_0.powi(zeta as i32);
            let s = i as i64 - j as i64;
            for (ch, mass) in [(0, channel.p_0), (w, channel.p_p1), (-w, channel.p_m1)] {
                match (ch + s).signum() {
                    0 => z += mass * phi,
                    1 => plus += mass * phi,
                    _ => {}
                }
            }
        }
    }
    ProbTriple {
        p_m1: 1.0 - z - plus,
        p_0: z,
        p_p1: plus,
    }
}

/// How the channel weight `w` is chosen at each iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightRule {
    Fixed(usize),
    /// Per population, the `w` in `1..=dv-1` minimising
    /// [`ProbTriple::bhattacharyya`] of the outgoing message; ties go to
    /// the smaller `w`.
    Greedy,
}

impl Default for WeightRule {
    fn default() -> Self {
        WeightRule::Greedy
    }
}

fn weighted_vn(
    q: &ProbTriple,
    channel: &ProbTriple,
    dv: usize,
    rule: WeightRule,
) -> (ProbTriple, usize) {
    match rule {
        WeightRule::Fixed(w) => (vn_update(q, channel, dv, w), w),
        WeightRule::Greedy => {
            let mut best = (vn_update(q, channel, dv, 1), 1);
            let mut score = best.0.bhattacharyya();
            for w in 2..dv {
                let out = vn_update(q, channel, dv, w);
                let s = out.bhattacharyya();
                if s < score - 1e-15 {
                    best = (out, w);
                    score = s;
                }
            }
            best
        }
    }
}

/// Both populations after one iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThreeLevelState {
    pub regular: ProbTriple,
    pub reliable: ProbTriple,
    pub iter: usize,
    /// Weights `(regular, reliable)` used to produce this state; `(0, 0)`
    /// for the channel prior.
    pub weights: (usize, usize),
}

impl ThreeLevelState {
    pub fn initial(mode: ProtectionMode, p: f64, pbar: f64) -> Self {
        let regular = ProbTriple::bsc(p);
        let reliable = match mode {
            ProtectionMode::Uniform => regular,
            ProtectionMode::Udp => ProbTriple::bsc(pbar),
            ProtectionMode::Doping => ProbTriple::PERFECT,
        };
        ThreeLevelState {
            regular,
            reliable,
            iter: 0,
            weights: (0, 0),
        }
    }

    pub fn residual(&self) -> f64 {
        self.regular.residual().max(self.reliable.residual())
    }
}

/// One DE iteration in the given mode.
pub fn tl_step(
    state: &ThreeLevelState,
    spec: &EnsembleSpec,
    mode: ProtectionMode,
    p: f64,
    pbar: f64,
    rule: WeightRule,
) -> ThreeLevelState {
    let dv = spec.dv();
    let ch = ProbTriple::bsc(p);
    let iter = state.iter + 1;
    match mode {
        ProtectionMode::Uniform => {
            let q = cn_update(&state.regular, &state.regular, 0, spec.dc() - 1);
            let (regular, w) = weighted_vn(&q, &ch, dv, rule);
            ThreeLevelState {
                regular,
                reliable: regular,
                iter,
                weights: (w, w),
            }
        }
        ProtectionMode::Udp | ProtectionMode::Doping => {
            let (a, b) = spec.regular_exponents();
            let q = cn_update(&state.reliable, &state.regular, a, b);
            let (regular, w) = weighted_vn(&q, &ch, dv, rule);
            if mode == ProtectionMode::Doping {
                return ThreeLevelState {
                    regular,
                    reliable: ProbTriple::PERFECT,
                    iter,
                    weights: (w, 0),
                };
            }
            let (a, b) = spec.reliable_exponents();
            let qb = cn_update(&state.reliable, &state.regular, a, b);
            let (reliable, wb) = weighted_vn(&qb, &ProbTriple::bsc(pbar), dv, rule);
            ThreeLevelState {
                regular,
                reliable,
                iter,
                weights: (w, wb),
            }
        }
    }
}

/// A full DE trajectory, starting with the channel prior.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TlRun {
    pub states: Vec<ThreeLevelState>,
    pub probe: Probe,
}

impl TlRun {
    /// Weights `(regular, reliable)` per iteration, from iteration 1.
    pub fn weight_schedule(&self) -> Vec<(usize, usize)> {
        self.states.iter().skip(1).map(|s| s.weights).collect()
    }
}

/// 3-level density evolution as a convergence oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeLevelDe {
    pub cfg: DeConfig,
    pub rule: WeightRule,
}

impl Default for ThreeLevelDe {
    fn default() -> Self {
        ThreeLevelDe {
            cfg: DeConfig::THREE_LEVEL,
            rule: WeightRule::Greedy,
        }
    }
}

impl ThreeLevelDe {
    pub fn run(&self, spec: &EnsembleSpec, mode: ProtectionMode, p: f64, pbar: f64) -> TlRun {
        let mut states = vec![ThreeLevelState::initial(mode, p, pbar)];
        let probe = self.drive(spec, mode, p, pbar, |s| states.push(*s));
        TlRun { states, probe }
    }

    fn drive<F: FnMut(&ThreeLevelState)>(
        &self,
        spec: &EnsembleSpec,
        mode: ProtectionMode,
        p: f64,
        pbar: f64,
        mut visit: F,
    ) -> Probe {
        let mut state = ThreeLevelState::initial(mode, p, pbar);
        let mut monitor = ConvergenceMonitor::new(self.cfg);
        loop {
            state = tl_step(&state, spec, mode, p, pbar, self.rule);
            visit(&state);
            if let Verdict::Done(probe) = monitor.observe(state.iter, state.residual()) {
                return probe;
            }
        }
    }
}

impl DensityEvolution for ThreeLevelDe {
    fn probe(&self, spec: &EnsembleSpec, mode: ProtectionMode, p: f64, pbar: f64) -> Probe {
        self.drive(spec, mode, p, pbar, |_| {})
    }
}

/// DE trajectory with the default stopping rule and greedy weights.
pub fn tl_de_run(spec: &EnsembleSpec, mode: ProtectionMode, p: f64, pbar: f64) -> TlRun {
    ThreeLevelDe::default().run(spec, mode, p, pbar)
}

/// Threshold search with the default 3-level oracle.
pub fn tl_de_threshold(
    spec: &EnsembleSpec,
    mode: ProtectionMode,
    opts: &SearchOptions,
) -> ThresholdReport {
    search_threshold(&ThreeLevelDe::default(), spec, mode, opts)
}

/// Error and correct-message probabilities tracked by the approximation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ApproxPair {
    pub p_m1: f64,
    pub p_p1: f64,
}

impl ApproxPair {
    pub fn erasure(&self) -> f64 {
        1.0 - self.p_m1 - self.p_p1
    }
}

/// State of the approximate recursion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ApproxState {
    pub regular: ApproxPair,
    pub reliable: ApproxPair,
    pub iter: usize,
}

impl ApproxState {
    pub fn initial(mode: ProtectionMode, p: f64, pbar: f64) -> Self {
        let regular = ApproxPair {
            p_m1: p,
            p_p1: 1.0 - p,
        };
        let reliable = match mode {
            ProtectionMode::Uniform => regular,
            ProtectionMode::Udp => ApproxPair {
                p_m1: pbar,
                p_p1: 1.0 - pbar,
            },
            ProtectionMode::Doping => ApproxPair {
                p_m1: 0.0,
                p_p1: 1.0,
            },
        };
        ApproxState {
            regular,
            reliable,
            iter: 0,
        }
    }
}

/// `base^e` with `base^(-1)` read as 0 when the coefficient in front of it
/// vanishes; callers only hit negative exponents behind a zero factor.
#[inline]
fn pw(base: f64, e: i32) -> f64 {
    if e < 0 {
        0.0
    } else {
        base.powi(e)
    }
}

/// Second-order approximation of one population's update for `dv = 3`,
/// `w = 1`; `c0` is that population's channel crossover.
fn approx_population(
    c0: f64,
    rel: &ApproxPair,
    reg: &ApproxPair,
    alpha: usize,
    beta: usize,
) -> ApproxPair {
    let (a, b) = (alpha as f64, beta as f64);
    let (ai, bi) = (alpha as i32, beta as i32);
    let (r1, rm) = (rel.p_p1, rel.p_m1);
    let (g1, gm) = (reg.p_p1, reg.p_m1);
    let r2a = pw(r1, 2 * ai);
    let g2b = pw(g1, 2 * bi);
    let big_a =
        1.0 + 2.0 * r2a * b * pw(g1, 2 * bi - 1) * gm + 2.0 * a * pw(r1, 2 * ai - 1) * rm * g2b;
    let big_b =
        (r2a - a * pw(r1, 2 * (ai - 1)) * rm * rm) * (g2b - b * pw(g1, 2 * (bi - 1)) * gm * gm);
    let big_c = 2.0 * a * b * pw(r1, 2 * ai - 1) * pw(g1, 2 * bi - 1) * rm * gm;
    let big_d = 0.5 * r2a * g2b - 0.5 * big_b;
    let ra = pw(r1, ai);
    let gb = pw(g1, bi);
    let ra1 = pw(r1, ai - 1);
    let gb1 = pw(g1, bi - 1);
    let p_m1 =
        c0 * (big_a - 2.0 * ra * gb - 2.0 * a * b * ra1 * gb1 * rm * gm + big_b) + big_c + big_d;
    let p_p1 = (1.0 - c0) * (big_a - 2.0 * ra * b * gb1 * gm - 2.0 * a * ra1 * rm * gb - big_b)
        + r2a * g2b
        + big_c
        - big_d;
    ApproxPair { p_m1, p_p1 }
}

/// One step of the approximate recursion (`dv = 3`, `w = 1` only).
pub fn tl_approx_step(
    state: &ApproxState,
    spec: &EnsembleSpec,
    mode: ProtectionMode,
    p: f64,
    pbar: f64,
) -> Result<ApproxState> {
    if spec.dv() != 3 {
        return Err(Error::UnsupportedDegree { dv: spec.dv() });
    }
    let iter = state.iter + 1;
    Ok(match mode {
        ProtectionMode::Uniform => {
            let regular = approx_population(p, &state.regular, &state.regular, 0, spec.dc() - 1);
            ApproxState {
                regular,
                reliable: regular,
                iter,
            }
        }
        ProtectionMode::Udp | ProtectionMode::Doping => {
            let (a, b) = spec.regular_exponents();
            let regular = approx_population(p, &state.reliable, &state.regular, a, b);
            let reliable = if mode == ProtectionMode::Doping {
                state.reliable
            } else {
                let (a, b) = spec.reliable_exponents();
                approx_population(pbar, &state.reliable, &state.regular, a, b)
            };
            ApproxState {
                regular,
                reliable,
                iter,
            }
        }
    })
}

/// Upper bound on any tracked probability before a run counts as diverged.
const APPROX_BLOWUP: f64 = 1.5;

/// The approximate recursion as a convergence oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeLevelApprox {
    pub cfg: DeConfig,
}

impl Default for ThreeLevelApprox {
    fn default() -> Self {
        ThreeLevelApprox {
            cfg: DeConfig::THREE_LEVEL,
        }
    }
}

impl DensityEvolution for ThreeLevelApprox {
    fn probe(&self, spec: &EnsembleSpec, mode: ProtectionMode, p: f64, pbar: f64) -> Probe {
        let mut state = ApproxState::initial(mode, p, pbar);
        let mut monitor = ConvergenceMonitor::new(self.cfg);
        loop {
            state = match tl_approx_step(&state, spec, mode, p, pbar) {
                Ok(s) => s,
                Err(_) => {
                    return Probe {
                        converged: false,
                        iterations: 0,
                        final_error: f64::NAN,
                    }
                }
            };
            let (g, r) = (state.regular, state.reliable);
            let values = [g.p_m1, g.p_p1, r.p_m1, r.p_p1];
            if values.iter().any(|v| !(0.0..=APPROX_BLOWUP).contains(v)) {
                return Probe {
                    converged: false,
                    iterations: state.iter,
                    final_error: f64::NAN,
                };
            }
            let err = g.p_m1.max(r.p_m1).max(g.erasure()).max(r.erasure());
            if let Verdict::Done(probe) = monitor.observe(state.iter, err) {
                return probe;
            }
        }
    }
}

/// Threshold of the approximate recursion.
pub fn tl_approx_threshold(
    spec: &EnsembleSpec,
    mode: ProtectionMode,
    opts: &SearchOptions,
) -> Result<ThresholdReport> {
    if spec.dv() != 3 {
        return Err(Error::UnsupportedDegree { dv: spec.dv() });
    }
    Ok(search_threshold(
        &ThreeLevelApprox::default(),
        spec,
        mode,
        opts,
    ))
}
