//! Monte-Carlo FER and convergence-speed experiments.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::{average_crossover, EnsembleSpec, ProtectionMode};
use crate::error::{Error, Result};
use crate::sim::channel::{bsc_sample_into, trial_seed};
use crate::sim::decoders::{
    decode_bp, decode_gallager_a, decode_three_level, DecodeResult, DecoderKind, Workspace,
};
use crate::sim::graph::TannerGraph;
use crate::three_level::tl_de_run;

/// Default `pbar / p` for the UDP arm.
pub const DEFAULT_PBAR_RATIO: f64 = 0.01;

/// One simulated operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    pub mode: ProtectionMode,
    pub p: f64,
    pub pbar: f64,
}

impl OperatingPoint {
    /// Point whose codeword-average crossover is `p_avg`. UDP uses
    /// `pbar = ratio * p`; doping puts all the noise on regular bits.
    pub fn at_average(
        spec: &EnsembleSpec,
        mode: ProtectionMode,
        p_avg: f64,
        pbar_ratio: f64,
    ) -> Result<Self> {
        let r = spec.rate();
        let (p, pbar) = match mode {
            ProtectionMode::Uniform => (p_avg, p_avg),
            ProtectionMode::Udp => {
                let p = p_avg / (r + pbar_ratio * (1.0 - r));
                (p, pbar_ratio * p)
            }
            ProtectionMode::Doping => (p_avg / r, 0.0),
        };
        if !(0.0..=0.5).contains(&p) || !(0.0..=1.0).contains(&pbar_ratio) {
            return Err(Error::InvalidChannel(format!(
                "average crossover {p_avg} needs p = {p} in {mode} mode"
            )));
        }
        Ok(OperatingPoint { mode, p, pbar })
    }

    pub fn average(&self, spec: &EnsembleSpec) -> f64 {
        match self.mode {
            ProtectionMode::Uniform => self.p,
            ProtectionMode::Udp => average_crossover(self.p, self.pbar, spec.rate()),
            ProtectionMode::Doping => average_crossover(self.p, 0.0, spec.rate()),
        }
    }
}

/// Aggregate of one operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExperimentStats {
    pub trials: u64,
    pub failures: u64,
    pub fer: f64,
    /// Normal-approximation 95% half-width of the FER.
    pub fer_ci95: f64,
    /// Mean iterations over converged trials; `None` if none converged.
    pub mean_iters: Option<f64>,
}

impl ExperimentStats {
    fn from_counts(trials: u64, failures: u64, iter_sum: u64) -> Self {
        let converged = trials - failures;
        let fer = if trials == 0 {
            0.0
        } else {
            failures as f64 / trials as f64
        };
        let fer_ci95 = if trials == 0 {
            0.0
        } else {
            1.96 * (fer * (1.0 - fer) / trials as f64).sqrt()
        };
        let mean_iters = (converged > 0).then(|| iter_sum as f64 / converged as f64);
        ExperimentStats {
            trials,
            failures,
            fer,
            fer_ci95,
            mean_iters,
        }
    }
}

/// Everything needed to decode one word.
#[derive(Debug, Clone)]
pub struct TrialSetup {
    pub decoder: DecoderKind,
    pub point: OperatingPoint,
    pub max_iter: usize,
    /// 3-level channel weights per iteration.
    pub weights: Vec<(usize, usize)>,
}

impl TrialSetup {
    /// Setup with the decoder's default cap; the 3-level weights follow the
    /// density-evolution schedule at this point.
    pub fn new(decoder: DecoderKind, spec: &EnsembleSpec, point: OperatingPoint) -> Self {
        let weights = match decoder {
            DecoderKind::ThreeLevel => {
                tl_de_run(spec, point.mode, point.p, point.pbar).weight_schedule()
            }
            _ => Vec::new(),
        };
        TrialSetup {
            decoder,
            point,
            max_iter: decoder.default_max_iter(),
            weights,
        }
    }

    pub fn decode(&self, graph: &TannerGraph, word: &[i8], ws: &mut Workspace) -> DecodeResult {
        let fixed = self.point.mode == ProtectionMode::Doping;
        match self.decoder {
            DecoderKind::GallagerA => decode_gallager_a(graph, word, fixed, self.max_iter, ws),
            DecoderKind::ThreeLevel => {
                decode_three_level(graph, word, &self.weights, fixed, self.max_iter, ws)
            }
            DecoderKind::Bp => decode_bp(
                graph,
                word,
                self.point.p,
                self.point.pbar,
                fixed,
                self.max_iter,
                ws,
            ),
        }
    }

    /// Runs trials `0..trials` with seeds from `master`. Aggregation uses
    /// integer counters, so the result does not depend on thread count.
    pub fn run(&self, graph: &TannerGraph, trials: u64, master: u64) -> ExperimentStats {
        let (failures, iter_sum) = (0..trials)
            .into_par_iter()
            .map_init(
                || (Workspace::default(), Vec::new()),
                |(ws, word), t| {
                    let pt = self.point;
                    bsc_sample_into(graph, pt.p, pt.pbar, pt.mode, trial_seed(master, t), word);
                    let r = self.decode(graph, word, ws);
                    if r.converged {
                        (0u64, r.iterations as u64)
                    } else {
                        (1, 0)
                    }
                },
            )
            .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
        ExperimentStats::from_counts(trials, failures, iter_sum)
    }
}

/// One CSV row of a simulation run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRow {
    pub decoder: DecoderKind,
    pub mode: ProtectionMode,
    pub dv: usize,
    pub dc: usize,
    pub n: usize,
    pub p: f64,
    pub pbar: f64,
    pub p_avg: f64,
    pub trials: u64,
    pub fer: f64,
    pub fer_ci95: f64,
    pub mean_iters: Option<f64>,
    pub seed: u64,
}

/// A sweep over average crossovers for several protection modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub decoder: DecoderKind,
    pub spec: EnsembleSpec,
    pub modes: Vec<ProtectionMode>,
    /// Codeword-average crossovers.
    pub p_avg: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    #[serde(default)]
    pub max_iter: Option<usize>,
    #[serde(default = "default_ratio")]
    pub pbar_ratio: f64,
}

fn default_ratio() -> f64 {
    DEFAULT_PBAR_RATIO
}

/// Runs every `(mode, p_avg)` pair on `graph`. All arms share the per-trial
/// seeds.
pub fn run_experiment(cfg: &ExperimentConfig, graph: &TannerGraph) -> Result<Vec<ExperimentRow>> {
    let mut rows = Vec::new();
    if cfg.trials == 0 {
        return Ok(rows);
    }
    for &mode in &cfg.modes {
        for &p_avg in &cfg.p_avg {
            let point = OperatingPoint::at_average(&cfg.spec, mode, p_avg, cfg.pbar_ratio)?;
            let mut setup = TrialSetup::new(cfg.decoder, &cfg.spec, point);
            if let Some(cap) = cfg.max_iter {
                setup.max_iter = cap;
            }
            let s = setup.run(graph, cfg.trials, cfg.seed);
            rows.push(ExperimentRow {
                decoder: cfg.decoder,
                mode,
                dv: cfg.spec.dv(),
                dc: cfg.spec.dc(),
                n: graph.n,
                p: point.p,
                pbar: point.pbar,
                p_avg,
                trials: s.trials,
                fer: s.fer,
                fer_ci95: s.fer_ci95,
                mean_iters: s.mean_iters,
                seed: cfg.seed,
            });
        }
    }
    Ok(rows)
}

/// First crossover at which the piecewise-linear curve `(x, fer)` (sorted
/// by `x`) reaches `target`.
pub fn crossing(curve: &[(f64, f64)], target: f64) -> Option<f64> {
    curve.windows(2).find_map(|w| {
        let ((x0, f0), (x1, f1)) = (w[0], w[1]);
        if (f0 - target) * (f1 - target) <= 0.0 && f0 != f1 {
            Some(x0 + (target - f0) * (x1 - x0) / (f1 - f0))
        } else if f0 == target {
            Some(x0)
        } else {
            None
        }
    })
}
