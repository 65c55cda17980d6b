//! Code ensembles, protection modes and the scalar bookkeeping shared by
//! every analysis: design rate, codeword-average crossover, threshold gain.
//!
//! A regular `(dv, dc)` ensemble is split into *reliable* variable nodes
//! (the parity bits, a fraction `dv/dc` of all bits) and *regular* ones (the
//! message bits). Each check node sees exactly `x` reliable neighbours.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Regular `(dv, dc)` ensemble with `x` reliable variable nodes per check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawEnsemble", into = "RawEnsemble")]
pub struct EnsembleSpec {
    dv: usize,
    dc: usize,
    x: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEnsemble {
    dv: usize,
    dc: usize,
    #[serde(default)]
    x: Option<usize>,
}

impl TryFrom<RawEnsemble> for EnsembleSpec {
    type Error = Error;

    fn try_from(raw: RawEnsemble) -> Result<Self> {
        match raw.x {
            Some(x) => EnsembleSpec::with_reliable(raw.dv, raw.dc, x),
            None => EnsembleSpec::new(raw.dv, raw.dc),
        }
    }
}

impl From<EnsembleSpec> for RawEnsemble {
    fn from(s: EnsembleSpec) -> Self {
        RawEnsemble {
            dv: s.dv,
            dc: s.dc,
            x: Some(s.x),
        }
    }
}

impl EnsembleSpec {
    /// Ensemble with the default reliable count `x = dv`, lowered to
    /// `dc - 2` when `dc = dv + 1` leaves no room for it.
    pub fn new(dv: usize, dc: usize) -> Result<Self> {
        Self::with_reliable(dv, dc, dv.min(dc.saturating_sub(2)).max(1))
    }

    pub fn with_reliable(dv: usize, dc: usize, x: usize) -> Result<Self> {
        if dv < 3 {
            return Err(Error::InvalidEnsemble(format!(
                "dv = {dv} must be at least 3"
            )));
        }
        if dc <= dv {
            return Err(Error::InvalidEnsemble(format!(
                "dc = {dc} must exceed dv = {dv}"
            )));
        }
        if x < 1 || x + 2 > dc {
            return Err(Error::InvalidEnsemble(format!(
                "x = {x} must lie in [1, dc - 2] = [1, {}]",
                dc - 2
            )));
        }
        Ok(EnsembleSpec { dv, dc, x })
    }

    pub fn dv(&self) -> usize {
        self.dv
    }

    pub fn dc(&self) -> usize {
        self.dc
    }

    /// Reliable variable nodes per check node.
    pub fn x(&self) -> usize {
        self.x
    }

    pub fn rate(&self) -> f64 {
        design_rate(self)
    }

    /// Check-side exponents `(alpha, beta)` for a message headed to a regular node.
    pub fn regular_exponents(&self) -> (usize, usize) {
        (self.x, self.dc - 1 - self.x)
    }

    /// Check-side exponents `(alpha, beta)` for a message headed to a reliable node.
    pub fn reliable_exponents(&self) -> (usize, usize) {
        (self.x - 1, self.dc - self.x)
    }
}

impl std::fmt::Display for EnsembleSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.dv, self.dc)
    }
}

/// How the parity (reliable) bits are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProtectionMode {
    /// Every bit sees crossover `p`.
    Uniform,
    /// Parity bits see `pbar <= p`.
    Udp,
    /// Parity bits are known to the decoder.
    Doping,
}

impl ProtectionMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ProtectionMode::Uniform => "uniform",
            ProtectionMode::Udp => "udp",
            ProtectionMode::Doping => "doping",
        }
    }
}

impl std::fmt::Display for ProtectionMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ProtectionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "uniform" | "unf" => Ok(ProtectionMode::Uniform),
            "udp" => Ok(ProtectionMode::Udp),
            "doping" => Ok(ProtectionMode::Doping),
            other => Err(Error::Config(format!("unknown protection mode `{other}`"))),
        }
    }
}

/// Crossover probabilities of the two bit classes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    pub p: f64,
    pub pbar: f64,
}

impl ChannelSpec {
    /// Builds the channel pair that `mode` implies. `pbar` is ignored for
    /// uniform (forced to `p`) and doping (forced to 0).
    pub fn for_mode(mode: ProtectionMode, p: f64, pbar: f64) -> Result<Self> {
        check_crossover("p", p)?;
        let pbar = match mode {
            ProtectionMode::Uniform => p,
            ProtectionMode::Doping => 0.0,
            ProtectionMode::Udp => {
                check_crossover("pbar", pbar)?;
                if pbar > p {
                    return Err(Error::InvalidChannel(format!(
                        "pbar = {pbar} exceeds p = {p} in UDP mode"
                    )));
                }
                pbar
            }
        };
        Ok(ChannelSpec { p, pbar })
    }
}

fn check_crossover(name: &str, v: f64) -> Result<()> {
    if !(0.0..0.5).contains(&v) {
        return Err(Error::InvalidChannel(format!(
            "{name} = {v} outside [0, 0.5)"
        )));
    }
    Ok(())
}

/// Design rate `1 - dv/dc`.
pub fn design_rate(spec: &EnsembleSpec) -> f64 {
    1.0 - spec.dv as f64 / spec.dc as f64
}

/// Codeword-average crossover `pbar (1 - R) + p R`.
pub fn average_crossover(p: f64, pbar: f64, rate: f64) -> f64 {
    pbar * (1.0 - rate) + p * rate
}

/// Signed percentage gain of a protected threshold over the uniform one.
pub fn threshold_gain(p_protected: f64, p_uniform: f64) -> Result<f64> {
    if p_uniform == 0.0 {
        return Err(Error::ZeroBaseline);
    }
    Ok((p_protected - p_uniform) / p_uniform * 100.0)
}

/// Rounds to four decimals, the resolution thresholds are reported at.
pub fn round4(v: f64) -> f64 {
    (v * 1e4).round() / 1e4
}
