//! JSON run configurations and the CSV tables behind the command-line tool.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bp::{bp_search_options, BpDe, LlrGrid, MagLattice};
use crate::ensemble::{EnsembleSpec, ProtectionMode};
use crate::error::{Error, Result};
use crate::gallager_a::{approx_threshold, exact_threshold, GallagerADe};
use crate::sim::alist::{from_alist, mask_from_str, mask_to_string, to_alist};
use crate::sim::{
    build_graph, run_experiment, DecoderKind, ExperimentConfig, GraphOptions, TannerGraph,
};
use crate::three_level::{ThreeLevelApprox, ThreeLevelDe, WeightRule};
use crate::threshold::{
    search_threshold, DeConfig, DensityEvolution, SearchOptions, ThresholdReport,
};

/// Subcommands of the tool.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Threshold,
    Simulate,
    Exact,
}

/// BP grid overrides.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BpGridConfig {
    pub grid: LlrGrid,
    pub lattice: MagLattice,
}

impl Default for BpGridConfig {
    fn default() -> Self {
        BpGridConfig {
            grid: LlrGrid::default(),
            lattice: MagLattice::default(),
        }
    }
}

/// One run of the tool. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub decoder: DecoderKind,
    #[serde(default)]
    pub specs: Vec<EnsembleSpec>,
    /// Defaults: uniform and doping for Gallager A, all three for 3-level,
    /// uniform and UDP for BP.
    #[serde(default)]
    pub modes: Option<Vec<ProtectionMode>>,
    /// Threshold search overrides; BP defaults to a coarser search.
    #[serde(default)]
    pub search: Option<SearchOptions>,
    /// Density-evolution stopping rule override.
    #[serde(default)]
    pub de: Option<DeConfig>,
    #[serde(default)]
    pub weight_rule: WeightRule,
    #[serde(default)]
    pub bp: BpGridConfig,
    #[serde(default)]
    pub simulation: Option<SimulationConfig>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

/// Monte-Carlo part of a [`RunConfig`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    /// Block length; ignored when `alist` is given.
    #[serde(default)]
    pub n: usize,
    /// Codeword-average crossovers to simulate.
    pub p_avg: Vec<f64>,
    pub trials: u64,
    #[serde(default)]
    pub max_iter: Option<usize>,
    #[serde(default = "default_ratio")]
    pub pbar_ratio: f64,
    #[serde(default)]
    pub graph: GraphOptions,
    /// Graph seed; defaults to the master seed.
    #[serde(default)]
    pub graph_seed: Option<u64>,
    /// Read the parity-check matrix from this alist file instead.
    #[serde(default)]
    pub alist: Option<PathBuf>,
    /// Reliability mask for `alist`.
    #[serde(default)]
    pub mask: Option<PathBuf>,
    /// Write the graph used as alist plus a `.mask` file.
    #[serde(default)]
    pub export_alist: Option<PathBuf>,
}

fn default_ratio() -> f64 {
    crate::sim::experiment::DEFAULT_PBAR_RATIO
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn modes(&self) -> Vec<ProtectionMode> {
        use ProtectionMode::*;
        self.modes.clone().unwrap_or_else(|| match self.decoder {
            DecoderKind::GallagerA => vec![Uniform, Doping],
            DecoderKind::ThreeLevel => vec![Uniform, Udp, Doping],
            DecoderKind::Bp => vec![Uniform, Udp],
        })
    }

    pub fn search_options(&self) -> SearchOptions {
        self.search.unwrap_or_else(|| match self.decoder {
            DecoderKind::Bp => bp_search_options(),
            _ => SearchOptions::default(),
        })
    }
}

/// A CSV document with a fixed header.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&'static str]) -> Self {
        Table {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
    }
}

const DASH: &str = "--";

fn f6(x: f64) -> String {
    format!("{x:.6}")
}

fn pct(x: Option<f64>) -> String {
    x.map_or_else(|| DASH.to_string(), |g| format!("{g:.2}"))
}

fn opt6(x: Option<f64>) -> String {
    x.map_or_else(|| DASH.to_string(), f6)
}

/// Runs `cmd` and returns its table.
pub fn run(cmd: Command, cfg: &RunConfig) -> Result<Table> {
    match cmd {
        Command::Threshold => cmd_threshold(cfg),
        Command::Simulate => cmd_simulate(cfg),
        Command::Exact => cmd_exact(cfg),
    }
}

fn search_all<D: DensityEvolution>(
    de: &D,
    spec: &EnsembleSpec,
    modes: &[ProtectionMode],
    opts: &SearchOptions,
) -> Vec<(ProtectionMode, ThresholdReport)> {
    let uniform = search_threshold(de, spec, ProtectionMode::Uniform, opts);
    let opts = SearchOptions {
        uniform: Some(uniform.threshold),
        ..*opts
    };
    modes
        .iter()
        .map(|&m| {
            let r = if m == ProtectionMode::Uniform {
                uniform.clone()
            } else {
                search_threshold(de, spec, m, &opts)
            };
            eprintln!("{spec} {m}: {:.6}", r.threshold);
            (m, r)
        })
        .collect()
}

/// Threshold tables: one row per `(spec, mode)` for Gallager A, one row per
/// spec for 3-level and BP.
pub fn cmd_threshold(cfg: &RunConfig) -> Result<Table> {
    let opts = cfg.search_options();
    let modes = cfg.modes();
    match cfg.decoder {
        DecoderKind::GallagerA => {
            let de = GallagerADe {
                cfg: cfg.de.unwrap_or(DeConfig::GALLAGER_A),
            };
            let mut t = Table::new(&[
                "dv",
                "dc",
                "rate",
                "mode",
                "p_threshold",
                "gamma",
                "eta",
                "p_approx",
                "binding",
                "gain_pct",
            ]);
            for spec in &cfg.specs {
                for (mode, r) in search_all(&de, spec, &modes, &opts) {
                    let exact = exact_threshold(spec, mode).ok();
                    t.rows.push(vec![
                        spec.dv().to_string(),
                        spec.dc().to_string(),
                        format!("{:.4}", spec.rate()),
                        mode.to_string(),
                        f6(r.threshold),
                        opt6(exact.map(|e| e.gamma)),
                        opt6(exact.map(|e| e.eta)),
                        opt6(approx_threshold(spec, mode).ok()),
                        exact.map_or(DASH, |e| e.binding.as_str()).to_string(),
                        pct(r.gain_pct),
                    ]);
                }
            }
            Ok(t)
        }
        DecoderKind::ThreeLevel => {
            let de = ThreeLevelDe {
                cfg: cfg.de.unwrap_or(DeConfig::THREE_LEVEL),
                rule: cfg.weight_rule,
            };
            let mut t = Table::new(&[
                "dv",
                "dc",
                "rate",
                "p_unf",
                "p_udp",
                "p_doping",
                "p_udp_approx",
                "gain_udp_pct",
                "gain_doping_pct",
            ]);
            for spec in &cfg.specs {
                let found = search_all(&de, spec, &modes, &opts);
                let get = |m| found.iter().find(|(x, _)| *x == m).map(|(_, r)| r);
                let unf = get(ProtectionMode::Uniform).map(|r| r.threshold);
                let approx = (spec.dv() == 3 && modes.contains(&ProtectionMode::Udp)).then(|| {
                    search_threshold(
                        &ThreeLevelApprox { cfg: de.cfg },
                        spec,
                        ProtectionMode::Udp,
                        &opts,
                    )
                    .threshold
                });
                t.rows.push(vec![
                    spec.dv().to_string(),
                    spec.dc().to_string(),
                    format!("{:.4}", spec.rate()),
                    opt6(unf),
                    opt6(get(ProtectionMode::Udp).map(|r| r.threshold)),
                    opt6(get(ProtectionMode::Doping).map(|r| r.threshold)),
                    opt6(approx),
                    pct(get(ProtectionMode::Udp).and_then(|r| r.gain_pct)),
                    pct(get(ProtectionMode::Doping).and_then(|r| r.gain_pct)),
                ]);
            }
            Ok(t)
        }
        DecoderKind::Bp => {
            let de = BpDe::new(cfg.de.unwrap_or(DeConfig::BP), cfg.bp.grid, cfg.bp.lattice);
            let mut t = Table::new(&[
                "dv",
                "dc",
                "rate",
                "p_unf",
                "p_udp",
                "p_star",
                "pbar_star",
                "gain_pct",
                "p_doping",
                "gain_doping_pct",
            ]);
            for spec in &cfg.specs {
                let found = search_all(&de, spec, &modes, &opts);
                let get = |m| found.iter().find(|(x, _)| *x == m).map(|(_, r)| r);
                let udp = get(ProtectionMode::Udp);
                let dop = get(ProtectionMode::Doping);
                t.rows.push(vec![
                    spec.dv().to_string(),
                    spec.dc().to_string(),
                    format!("{:.4}", spec.rate()),
                    opt6(get(ProtectionMode::Uniform).map(|r| r.threshold)),
                    opt6(udp.map(|r| r.threshold)),
                    opt6(udp.map(|r| r.p_star)),
                    opt6(udp.map(|r| r.pbar_star)),
                    pct(udp.and_then(|r| r.gain_pct)),
                    opt6(dop.map(|r| r.threshold)),
                    pct(dop.and_then(|r| r.gain_pct)),
                ]);
            }
            Ok(t)
        }
    }
}

/// Closed-form Gallager A thresholds: `gamma`, `eta`, the binding one and
/// the approximation. Unsupported degrees give `--` cells.
pub fn cmd_exact(cfg: &RunConfig) -> Result<Table> {
    if cfg.decoder != DecoderKind::GallagerA {
        return Err(Error::Config(
            "exact thresholds exist for gallager-a only".into(),
        ));
    }
    let mut t = Table::new(&[
        "dv", "dc", "rate", "mode", "gamma", "eta", "p_exact", "binding", "p_approx",
    ]);
    for spec in &cfg.specs {
        for mode in cfg.modes() {
            let exact = exact_threshold(spec, mode).ok();
            t.rows.push(vec![
                spec.dv().to_string(),
                spec.dc().to_string(),
                format!("{:.4}", spec.rate()),
                mode.to_string(),
                opt6(exact.map(|e| e.gamma)),
                opt6(exact.map(|e| e.eta)),
                opt6(exact.map(|e| e.threshold)),
                exact.map_or(DASH, |e| e.binding.as_str()).to_string(),
                opt6(approx_threshold(spec, mode).ok()),
            ]);
        }
    }
    Ok(t)
}

fn simulation_graph(spec: &EnsembleSpec, sim: &SimulationConfig, seed: u64) -> Result<TannerGraph> {
    let g = match &sim.alist {
        Some(path) => {
            let mask = match &sim.mask {
                Some(m) => Some(mask_from_str(&std::fs::read_to_string(m)?)?),
                None => None,
            };
            from_alist(&std::fs::read_to_string(path)?, mask)?
        }
        None => build_graph(sim.n, spec, sim.graph_seed.unwrap_or(seed), sim.graph)?,
    };
    if let Some(out) = &sim.export_alist {
        std::fs::write(out, to_alist(&g))?;
        std::fs::write(out.with_extension("mask"), mask_to_string(&g.reliable))?;
    }
    Ok(g)
}

/// FER and iteration statistics per `(spec, mode, p_avg)`.
pub fn cmd_simulate(cfg: &RunConfig) -> Result<Table> {
    let sim = cfg
        .simulation
        .as_ref()
        .ok_or_else(|| Error::Config("missing `simulation` section".into()))?;
    let mut t = Table::new(&[
        "decoder",
        "mode",
        "dv",
        "dc",
        "n",
        "p",
        "pbar",
        "p_avg",
        "trials",
        "fer",
        "fer_ci95",
        "mean_iters",
        "seed",
    ]);
    if sim.trials == 0 {
        return Ok(t);
    }
    for spec in &cfg.specs {
        let graph = simulation_graph(spec, sim, cfg.seed)?;
        let ec = ExperimentConfig {
            decoder: cfg.decoder,
            spec: *spec,
            modes: cfg.modes(),
            p_avg: sim.p_avg.clone(),
            trials: sim.trials,
            seed: cfg.seed,
            max_iter: sim.max_iter,
            pbar_ratio: sim.pbar_ratio,
        };
        for r in run_experiment(&ec, &graph)? {
            eprintln!("{spec} {} p_avg={} fer={:.4}", r.mode, r.p_avg, r.fer);
            t.rows.push(vec![
                r.decoder.to_string(),
                r.mode.to_string(),
                r.dv.to_string(),
                r.dc.to_string(),
                r.n.to_string(),
                r.p.to_string(),
                r.pbar.to_string(),
                r.p_avg.to_string(),
                r.trials.to_string(),
                f6(r.fer),
                f6(r.fer_ci95),
                r.mean_iters.map_or_else(String::new, |m| format!("{m:.4}")),
                r.seed.to_string(),
            ]);
        }
    }
    Ok(t)
}
