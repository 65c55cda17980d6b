//! Quantized density evolution for belief propagation over the BSC.
//!
//! Variable nodes add LLRs, so their output density is a linear convolution
//! on the LLR grid. Check nodes multiply `tanh(L/2)`; in the
//! `(sign, -log tanh(|L|/2))` representation that becomes a convolution of
//! magnitude densities with signs combined over GF(2). Working with
//! `S = plus + minus` and `D = plus - minus` turns the sign bookkeeping into
//! two independent convolution powers.

mod density;
mod fft;

use std::collections::HashMap;

use rustfft::num_complex::Complex64;
use serde::Serialize;

pub use density::{bsc_initial_density, Binning, LlrDensity, LlrGrid, MagLattice, SignMagDensity};

use crate::ensemble::{EnsembleSpec, ProtectionMode};
use crate::error::{Error, Result};
use crate::threshold::{
    search_threshold, ConvergenceMonitor, DeConfig, DensityEvolution, PairSearchOptions, Probe,
    SearchOptions, ThresholdReport, Verdict,
};
use density::MagTables;
use fft::{packed_inverse, packed_spectrum, unpack, Chain, Plans, TruncatedConv};

/// BP density evolution with its grids, bin maps and FFT plans.
pub struct BpDe {
    pub cfg: DeConfig,
    tables: MagTables,
    plans: Plans,
    cn_conv: TruncatedConv,
}

impl Default for BpDe {
    fn default() -> Self {
        BpDe::new(DeConfig::BP, LlrGrid::default(), MagLattice::default())
    }
}

impl std::fmt::Debug for BpDe {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BpDe")
            .field("cfg", &self.cfg)
            .field("grid", &self.tables.grid)
            .field("lattice", &self.tables.lattice)
            .finish()
    }
}

/// Per-iteration error probabilities of a BP DE run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BpRun {
    /// `(regular, reliable)` error probability, starting with the channel.
    pub errors: Vec<(f64, f64)>,
    pub probe: Probe,
}

fn check_grid(a: &LlrDensity, b: &LlrDensity) -> Result<()> {
    if a.grid != b.grid {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// Channel density; a zero crossover means the bit is known.
pub fn channel_density(p: f64, grid: LlrGrid) -> Result<LlrDensity> {
    if p == 0.0 {
        Ok(LlrDensity::certain(grid))
    } else {
        bsc_initial_density(p, grid)
    }
}

impl BpDe {
    pub fn new(cfg: DeConfig, grid: LlrGrid, lattice: MagLattice) -> Self {
        let plans = Plans::new();
        let cn_conv = TruncatedConv::new(&plans, lattice.bins);
        BpDe {
            cfg,
            tables: MagTables::new(grid, lattice),
            plans,
            cn_conv,
        }
    }

    pub fn grid(&self) -> LlrGrid {
        self.tables.grid
    }

    pub fn lattice(&self) -> MagLattice {
        self.tables.lattice
    }

    fn check_engine_grid(&self, d: &LlrDensity) -> Result<()> {
        if d.grid != self.grid() {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    fn vn_size(&self, dv: usize) -> usize {
        (dv * (self.grid().len() - 1) + 1).next_power_of_two()
    }

    /// Channel spectra of two populations, reused across iterations.
    fn channel_spectra(
        &self,
        a: &LlrDensity,
        b: &LlrDensity,
        dv: usize,
    ) -> (Vec<Complex64>, Vec<Complex64>) {
        let n = self.vn_size(dv);
        let (fwd, _) = self.plans.get(n);
        unpack(&packed_spectrum(fwd.as_ref(), &a.mass, &b.mass, n))
    }

    /// Variable-node update for two populations at once, given the channel
    /// spectra from [`Self::channel_spectra`].
    fn vn_pair(
        &self,
        ch: (&LlrDensity, &LlrDensity),
        ch_spec: &(Vec<Complex64>, Vec<Complex64>),
        inc: (&LlrDensity, &LlrDensity),
        dv: usize,
    ) -> (LlrDensity, LlrDensity) {
        let n = self.vn_size(dv);
        let (fwd, inv) = self.plans.get(n);
        let (fa, fb) = unpack(&packed_spectrum(fwd.as_ref(), &inc.0.mass, &inc.1.mass, n));
        let e = (dv - 1) as i32;
        let oa: Vec<_> = ch_spec
            .0
            .iter()
            .zip(&fa)
            .map(|(c, f)| c * f.powi(e))
            .collect();
        let ob: Vec<_> = ch_spec
            .1
            .iter()
            .zip(&fb)
            .map(|(c, f)| c * f.powi(e))
            .collect();
        let full = dv * (self.grid().len() - 1) + 1;
        let (ra, rb) = packed_inverse(inv.as_ref(), &oa, &ob, full);
        (
            self.fold(&ra, ch.0, inc.0, dv),
            self.fold(&rb, ch.1, inc.1, dv),
        )
    }

    /// Moves a full-length convolution back onto the grid, saturating the tails.
    fn fold(&self, full: &[f64], ch: &LlrDensity, inc: &LlrDensity, dv: usize) -> LlrDensity {
        let grid = self.grid();
        let nlen = grid.len();
        let off = (dv - 1) * grid.zero();
        let mut out = LlrDensity::zeros(grid);
        out.mass.copy_from_slice(&full[off..off + nlen]);
        out.mass[0] += full[..off].iter().sum::<f64>();
        out.mass[nlen - 1] += full[off + nlen..].iter().sum::<f64>();
        let finite = (1.0 - ch.certain) * (1.0 - inc.certain).powi(dv as i32 - 1);
        out.normalise_finite(finite);
        out.certain = 1.0 - finite;
        out
    }

    /// Channel density convolved with `dv - 1` copies of `incoming`.
    pub fn vn_update(
        &self,
        channel: &LlrDensity,
        incoming: &LlrDensity,
        dv: usize,
    ) -> Result<LlrDensity> {
        self.check_engine_grid(channel)?;
        check_grid(channel, incoming)?;
        let zero = LlrDensity::zeros(self.grid());
        let spec = self.channel_spectra(channel, &zero, dv);
        Ok(self
            .vn_pair((channel, &zero), &spec, (incoming, &zero), dv)
            .0)
    }

    fn chain(&self, d: &LlrDensity) -> Option<Chain> {
        if d.certain >= 1.0 {
            return None;
        }
        let sm = self.tables.to_sign_mag(d);
        let mut s: Vec<f64> = sm.plus.iter().zip(&sm.minus).map(|(a, b)| a + b).collect();
        let mut dd: Vec<f64> = sm.plus.iter().zip(&sm.minus).map(|(a, b)| a - b).collect();
        // A certain message is the identity of the magnitude convolution.
        s[0] += d.certain;
        dd[0] += d.certain;
        Some(Chain { s, d: dd })
    }

    fn mul_opt(&self, a: Option<&Chain>, b: Option<&Chain>) -> Option<Chain> {
        match (a, b) {
            (Some(a), Some(b)) => Some(self.cn_conv.mul(a, b)),
            (Some(a), None) | (None, Some(a)) => Some(a.clone()),
            (None, None) => None,
        }
    }

    /// Truncated powers of a chain for every exponent in `exps`, each
    /// computed from the next smaller one when available.
    fn powers(&self, base: &Option<Chain>, exps: &[usize]) -> HashMap<usize, Option<Chain>> {
        let mut out: HashMap<usize, Option<Chain>> = HashMap::new();
        let mut sorted = exps.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        for k in sorted {
            let v = match (base, k) {
                (None, _) | (_, 0) => None,
                (Some(b), _) => match out.get(&(k - 1)) {
                    Some(prev) => self.mul_opt(prev.as_ref(), Some(b)),
                    None => Some(self.cn_conv.pow(b, k)),
                },
            };
            out.insert(k, v);
        }
        out
    }

    fn cn_many(
        &self,
        reliable: &LlrDensity,
        regular: &LlrDensity,
        exps: &[(usize, usize)],
    ) -> Vec<LlrDensity> {
        let rel = self.chain(reliable);
        let reg = self.chain(regular);
        let rel_pows = self.powers(&rel, &exps.iter().map(|e| e.0).collect::<Vec<_>>());
        let reg_pows = self.powers(&reg, &exps.iter().map(|e| e.1).collect::<Vec<_>>());
        let nb = self.lattice().bins;
        exps.iter()
            .map(|&(a, b)| {
                let certain = reliable.certain.powi(a as i32) * regular.certain.powi(b as i32);
                let prod = self.mul_opt(rel_pows[&a].as_ref(), reg_pows[&b].as_ref());
                let (plus, minus) = match prod {
                    None => (vec![0.0; nb], vec![0.0; nb]),
                    Some(mut c) => {
                        c.s[0] -= certain;
                        c.d[0] -= certain;
                        let plus =
                            c.s.iter()
                                .zip(&c.d)
                                .map(|(s, d)| (0.5 * (s + d)).max(0.0))
                                .collect();
                        let minus =
                            c.s.iter()
                                .zip(&c.d)
                                .map(|(s, d)| (0.5 * (s - d)).max(0.0))
                                .collect();
                        (plus, minus)
                    }
                };
                let finite: f64 = plus.iter().sum::<f64>() + minus.iter().sum::<f64>();
                let erasure = (1.0 - certain - finite).max(0.0);
                let sm = SignMagDensity {
                    lattice: self.lattice(),
                    plus,
                    minus,
                    certain,
                    erasure,
                };
                let mut out = self.tables.to_llr(&sm);
                let finite_total = 1.0 - certain;
                out.normalise_finite(finite_total);
                out
            })
            .collect()
    }

    /// Check-node update with `alpha` reliable and `beta` regular inputs.
    pub fn cn_update(
        &self,
        reliable: &LlrDensity,
        regular: &LlrDensity,
        alpha: usize,
        beta: usize,
    ) -> Result<LlrDensity> {
        check_grid(reliable, regular)?;
        self.check_engine_grid(reliable)?;
        Ok(self.cn_many(reliable, regular, &[(alpha, beta)]).remove(0))
    }

    /// Runs DE and reports every iterate to `visit`, the channel first.
    pub fn run_with<F>(
        &self,
        spec: &EnsembleSpec,
        mode: ProtectionMode,
        p: f64,
        pbar: f64,
        mut visit: F,
    ) -> Result<Probe>
    where
        F: FnMut(usize, &LlrDensity, &LlrDensity),
    {
        let grid = self.grid();
        let dv = spec.dv();
        let ch = channel_density(p, grid)?;
        let chb = match mode {
            ProtectionMode::Uniform => ch.clone(),
            ProtectionMode::Udp => channel_density(pbar, grid)?,
            ProtectionMode::Doping => LlrDensity::certain(grid),
        };
        let ch_spec = self.channel_spectra(&ch, &chb, dv);
        let mut reg = ch.clone();
        let mut rel = chb.clone();
        visit(0, &reg, &rel);
        let mut monitor = ConvergenceMonitor::new(self.cfg);
        let mut iter = 0;
        loop {
            iter += 1;
            match mode {
                ProtectionMode::Uniform => {
                    let q = self.cn_many(&reg, &reg, &[(0, spec.dc() - 1)]).remove(0);
                    let (r, _) = self.vn_pair((&ch, &chb), &ch_spec, (&q, &q), dv);
                    reg = r;
                    rel = reg.clone();
                }
                ProtectionMode::Udp => {
                    let mut qs = self.cn_many(
                        &rel,
                        &reg,
                        &[spec.regular_exponents(), spec.reliable_exponents()],
                    );
                    let qb = qs.pop().expect("two outputs");
                    let q = qs.pop().expect("two outputs");
                    (reg, rel) = self.vn_pair((&ch, &chb), &ch_spec, (&q, &qb), dv);
                }
                ProtectionMode::Doping => {
                    let q = self
                        .cn_many(&rel, &reg, &[spec.regular_exponents()])
                        .remove(0);
                    let (r, _) = self.vn_pair((&ch, &chb), &ch_spec, (&q, &q), dv);
                    reg = r;
                }
            }
            visit(iter, &reg, &rel);
            let err = reg.error_probability().max(rel.error_probability());
            if let Verdict::Done(probe) = monitor.observe(iter, err) {
                return Ok(probe);
            }
        }
    }

    pub fn run(
        &self,
        spec: &EnsembleSpec,
        mode: ProtectionMode,
        p: f64,
        pbar: f64,
    ) -> Result<BpRun> {
        let mut errors = Vec::new();
        let probe = self.run_with(spec, mode, p, pbar, |_, a, b| {
            errors.push((a.error_probability(), b.error_probability()))
        })?;
        Ok(BpRun { errors, probe })
    }
}

impl DensityEvolution for BpDe {
    fn probe(&self, spec: &EnsembleSpec, mode: ProtectionMode, p: f64, pbar: f64) -> Probe {
        self.run_with(spec, mode, p, pbar, |_, _, _| {})
            .unwrap_or(Probe {
                converged: false,
                iterations: 0,
                final_error: f64::NAN,
            })
    }
}

/// Variable-node update on the default engine.
pub fn vn_update_bp(channel: &LlrDensity, incoming: &LlrDensity, dv: usize) -> Result<LlrDensity> {
    BpDe::new(DeConfig::BP, channel.grid, MagLattice::default()).vn_update(channel, incoming, dv)
}

/// Check-node update on the default magnitude lattice.
pub fn cn_update_bp(
    reliable: &LlrDensity,
    regular: &LlrDensity,
    alpha: usize,
    beta: usize,
) -> Result<LlrDensity> {
    BpDe::new(DeConfig::BP, reliable.grid, MagLattice::default())
        .cn_update(reliable, regular, alpha, beta)
}

/// DE run on the default engine.
pub fn bp_de_run(
    spec: &EnsembleSpec,
    mode: ProtectionMode,
    p: f64,
    pbar: f64,
    grid: LlrGrid,
) -> Result<BpRun> {
    BpDe::new(DeConfig::BP, grid, MagLattice::default()).run(spec, mode, p, pbar)
}

/// Search settings sized for BP probes, which cost seconds rather than
/// microseconds: a coarser `pbar` sweep and a `1e-4` bisection on `p`.
pub fn bp_search_options() -> SearchOptions {
    SearchOptions {
        pair: PairSearchOptions {
            coarse_step: 2e-3,
            grid_step: 5e-4,
            p_tol: 1e-4,
            patience: 2,
            ..Default::default()
        },
        ..Default::default()
    }
}

/// Threshold search with a given engine.
pub fn bp_de_threshold(
    de: &BpDe,
    spec: &EnsembleSpec,
    mode: ProtectionMode,
    opts: &SearchOptions,
) -> ThresholdReport {
    search_threshold(de, spec, mode, opts)
}
