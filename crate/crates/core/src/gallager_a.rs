//! Density evolution for the Gallager A decoder over the BSC.
//!
//! Tracks the probability that a variable-to-check message is wrong, for
//! regular and reliable variable nodes separately. Also provides the exact
//! threshold machinery for regular ensembles (the slope bound `gamma` and
//! the smallest root `eta` of the fixed-point polynomial) and the
//! truncated-binomial closed-form approximations.
//!
//! For a general ensemble the slope bound is
//! `(1 - lambda_2 rho'(1)) / (lambda'(1) rho'(1) - lambda_2 rho'(1))`; with
//! `lambda(y) = y^(dv-1)`, `rho(y) = y^(dc-1)` and `dv >= 3` it collapses to
//! `1 / ((dv-1)(dc-1))`.

use serde::Serialize;

use crate::ensemble::{design_rate, EnsembleSpec, ProtectionMode};
use crate::error::{Error, Result};
use crate::threshold::{ConvergenceMonitor, DeConfig, Probe, Verdict};
use crate::DensityEvolution;

/// Error probabilities of the two variable-node populations at one iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaState {
    pub p_err: f64,
    pub pbar_err: f64,
    pub iter: usize,
}

impl GaState {
    pub fn initial(p0: f64, pbar0: f64) -> Self {
        GaState {
            p_err: p0,
            pbar_err: pbar0,
            iter: 0,
        }
    }
}

/// One Gallager A update given the product `prod = prod_t (1 - 2 p_t)` over
/// the `dc - 1` other check inputs.
#[inline]
fn ga_map(p0: f64, prod: f64, dv: usize) -> f64 {
    let e = (dv - 1) as i32;
    let agree = 0.5 * (1.0 + prod);
    let flip = 0.5 * (1.0 - prod);
    (p0 - p0 * agree.powi(e) + (1.0 - p0) * flip.powi(e)).clamp(0.0, 1.0)
}

/// Uniform recursion: next error probability from the previous one.
pub fn ga_step_uniform(p0: f64, p_prev: f64, dv: usize, dc: usize) -> f64 {
    ga_map(p0, (1.0 - 2.0 * p_prev).powi((dc - 1) as i32), dv)
}

/// UDP recursion: both populations advance from the previous state.
pub fn ga_step_udp(p0: f64, pbar0: f64, state: &GaState, spec: &EnsembleSpec) -> GaState {
    let reg = 1.0 - 2.0 * state.p_err;
    let rel = 1.0 - 2.0 * state.pbar_err;
    let (a, b) = spec.regular_exponents();
    let prod_reg = rel.powi(a as i32) * reg.powi(b as i32);
    let (a, b) = spec.reliable_exponents();
    let prod_rel = rel.powi(a as i32) * reg.powi(b as i32);
    GaState {
        p_err: ga_map(p0, prod_reg, spec.dv()),
        pbar_err: ga_map(pbar0, prod_rel, spec.dv()),
        iter: state.iter + 1,
    }
}

/// Doping recursion: reliable bits are known, so only `dc - 1 - x`
/// check inputs can be wrong.
pub fn ga_step_doping(p0: f64, p_prev: f64, spec: &EnsembleSpec) -> f64 {
    let k = spec.dc() - 1 - spec.x();
    ga_map(p0, (1.0 - 2.0 * p_prev).powi(k as i32), spec.dv())
}

/// Slope bound for the uniform setup, `1/((dv-1)(dc-1))`.
pub fn gamma_uniform(dv: usize, dc: usize) -> f64 {
    1.0 / ((dv - 1) * (dc - 1)) as f64
}

/// Slope bound for doping, averaged over all bits: `R / ((dv-1)(dc-1-x))`.
pub fn gamma_doping(spec: &EnsembleSpec) -> f64 {
    let k = spec.dc() - 1 - spec.x();
    design_rate(spec) / ((spec.dv() - 1) * k) as f64
}

/// The fixed-point polynomial `y A^(dv-1) + (y-1) B^(dv-1)` with
/// `A, B = (1 ± (1-2y)^k)/2`; it vanishes where the first DE step is stationary.
pub fn fixed_point_polynomial(y: f64, dv: usize, k: usize) -> f64 {
    let t = (1.0 - 2.0 * y).powi(k as i32);
    let e = (dv - 1) as i32;
    y * (0.5 * (1.0 + t)).powi(e) + (y - 1.0) * (0.5 * (1.0 - t)).powi(e)
}

const ROOT_SCAN_STEP: f64 = 1e-4;
const ROOT_TOL: f64 = 1e-10;

/// Smallest root in `(0, 0.5)` of [`fixed_point_polynomial`], by a scan at
/// step `1e-4` followed by bisection.
pub fn eta_root(dv: usize, k: usize) -> Result<f64> {
    if dv < 3 {
        return Err(Error::UnsupportedDegree { dv });
    }
    smallest_root(|y| fixed_point_polynomial(y, dv, k)).ok_or(Error::NoRootInRange { dv, k })
}

fn smallest_root<F: Fn(f64) -> f64>(f: F) -> Option<f64> {
    let mut a = ROOT_SCAN_STEP;
    let mut fa = f(a);
    loop {
        let b = a + ROOT_SCAN_STEP;
        if b >= 0.5 {
            return None;
        }
        let fb = f(b);
        if fb == 0.0 {
            return Some(b);
        }
        if fa.signum() != fb.signum() {
            return Some(bisect_root(&f, a, b, fa));
        }
        a = b;
        fa = fb;
    }
}

fn bisect_root<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, mut fa: f64) -> f64 {
    while b - a > ROOT_TOL {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Which candidate attained the exact threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Binding {
    Gamma,
    Eta,
}

impl Binding {
    pub fn as_str(&self) -> &'static str {
        match self {
            Binding::Gamma => "gamma",
            Binding::Eta => "eta",
        }
    }
}

/// Exact threshold as `min(gamma, eta)` (doping: both weighted by `R`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExactThresholdParts {
    pub gamma: f64,
    pub eta: f64,
    pub threshold: f64,
    pub binding: Binding,
}

pub fn exact_threshold(spec: &EnsembleSpec, mode: ProtectionMode) -> Result<ExactThresholdParts> {
    let (gamma, eta) = match mode {
        ProtectionMode::Uniform => (
            gamma_uniform(spec.dv(), spec.dc()),
            eta_root(spec.dv(), spec.dc() - 1)?,
        ),
        ProtectionMode::Doping => {
            let k = spec.dc() - 1 - spec.x();
            (
                gamma_doping(spec),
                eta_root(spec.dv(), k)? * design_rate(spec),
            )
        }
        ProtectionMode::Udp => return Err(Error::UnsupportedMode("udp")),
    };
    let (threshold, binding) = if gamma <= eta {
        (gamma, Binding::Gamma)
    } else {
        (eta, Binding::Eta)
    };
    Ok(ExactThresholdParts {
        gamma,
        eta,
        threshold,
        binding,
    })
}

/// Three-term truncation of the fixed-point polynomial, divided through:
/// `(dv-1)k y - (dv-1)k(k dv/2 - 1) y^2 - k^(dv-1) y^(dv-1) + k^(dv-1) y^(dv-2) - 1`.
pub fn truncated_polynomial(y: f64, dv: usize, k: usize) -> f64 {
    let (d, k) = ((dv - 1) as f64, k as f64);
    let kp = k.powi(dv as i32 - 1);
    d * k * y - d * k * (k * dv as f64 / 2.0 - 1.0) * y * y - kp * y.powi(dv as i32 - 1)
        + kp * y.powi(dv as i32 - 2)
        - 1.0
}

/// Smaller root of `(4k^2 - 2k) y^2 - (k^2 + 2k) y + 1 = 0`, the `dv = 3`
/// form of [`truncated_polynomial`].
pub fn quadratic_root_dv3(k: usize) -> Option<f64> {
    let k = k as f64;
    let a = 4.0 * k * k - 2.0 * k;
    let b = k * k + 2.0 * k;
    let disc = b * b - 4.0 * a;
    if disc < 0.0 {
        return None;
    }
    Some((b - disc.sqrt()) / (2.0 * a))
}

/// Closed-form approximate threshold. Doping results are scaled by `R`.
pub fn approx_threshold(spec: &EnsembleSpec, mode: ProtectionMode) -> Result<f64> {
    let k = match mode {
        ProtectionMode::Uniform => spec.dc() - 1,
        ProtectionMode::Doping => spec.dc() - 1 - spec.x(),
        ProtectionMode::Udp => return Err(Error::UnsupportedMode("udp")),
    };
    let dv = spec.dv();
    let root = match dv {
        3 => quadratic_root_dv3(k),
        4 => smallest_root(|y| truncated_polynomial(y, dv, k)),
        _ => return Err(Error::UnsupportedDegree { dv }),
    }
    .ok_or(Error::NoRootInRange { dv, k })?;
    Ok(match mode {
        ProtectionMode::Doping => root * design_rate(spec),
        _ => root,
    })
}

/// Gallager A density evolution as a convergence oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GallagerADe {
    pub cfg: DeConfig,
}

impl Default for GallagerADe {
    fn default() -> Self {
        GallagerADe {
            cfg: DeConfig::GALLAGER_A,
        }
    }
}

impl GallagerADe {
    /// Full trajectory, including the initial state.
    pub fn trajectory(
        &self,
        spec: &EnsembleSpec,
        mode: ProtectionMode,
        p: f64,
        pbar: f64,
    ) -> (Vec<GaState>, Probe) {
        let mut states = vec![initial_state(mode, p, pbar)];
        let probe = self.run(spec, mode, p, pbar, |s| states.push(*s));
        (states, probe)
    }

    fn run<F: FnMut(&GaState)>(
        &self,
        spec: &EnsembleSpec,
        mode: ProtectionMode,
        p: f64,
        pbar: f64,
        mut visit: F,
    ) -> Probe {
        let mut state = initial_state(mode, p, pbar);
        let mut monitor = ConvergenceMonitor::new(self.cfg);
        loop {
            state = match mode {
                ProtectionMode::Uniform => {
                    let e = ga_step_uniform(p, state.p_err, spec.dv(), spec.dc());
                    GaState {
                        p_err: e,
                        pbar_err: e,
                        iter: state.iter + 1,
                    }
                }
                ProtectionMode::Doping => GaState {
                    p_err: ga_step_doping(p, state.p_err, spec),
                    pbar_err: 0.0,
                    iter: state.iter + 1,
                },
                ProtectionMode::Udp => ga_step_udp(p, pbar, &state, spec),
            };
            visit(&state);
            if let Verdict::Done(probe) =
                monitor.observe(state.iter, state.p_err.max(state.pbar_err))
            {
                return probe;
            }
        }
    }
}

fn initial_state(mode: ProtectionMode, p: f64, pbar: f64) -> GaState {
    match mode {
        ProtectionMode::Uniform => GaState::initial(p, p),
        ProtectionMode::Doping => GaState::initial(p, 0.0),
        ProtectionMode::Udp => GaState::initial(p, pbar),
    }
}

impl DensityEvolution for GallagerADe {
    fn probe(&self, spec: &EnsembleSpec, mode: ProtectionMode, p: f64, pbar: f64) -> Probe {
        self.run(spec, mode, p, pbar, |_| {})
    }
}

/// DE threshold for Gallager A; see [`crate::threshold::search_threshold`].
pub fn ga_de_threshold(
    spec: &EnsembleSpec,
    mode: ProtectionMode,
    policy: &crate::threshold::SearchOptions,
) -> crate::threshold::ThresholdReport {
    crate::threshold::search_threshold(&GallagerADe::default(), spec, mode, policy)
}
