//! Quantized LLR densities and the sign/log-magnitude representation used
//! at check nodes.
//!
//! An LLR `L` corresponds to `p0 - p1 = tanh(L/2)`; the check-node domain
//! stores `sign(L)` together with `m = -log tanh(|L|/2)` on a uniform
//! lattice, so that check-node products become sums.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Symmetric uniform LLR lattice with `2^bits + 1` points on `[-M, M]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LlrGrid {
    pub half_width: f64,
    pub bits: u32,
}

impl Default for LlrGrid {
    fn default() -> Self {
        LlrGrid {
            half_width: 25.0,
            bits: 13,
        }
    }
}

impl LlrGrid {
    pub fn len(&self) -> usize {
        (1usize << self.bits) + 1
    }

    /// Index of LLR 0.
    pub fn zero(&self) -> usize {
        1usize << (self.bits - 1)
    }

    /// Bin width `M / 2^(bits-1)`.
    pub fn step(&self) -> f64 {
        self.half_width / self.zero() as f64
    }

    pub fn value(&self, k: usize) -> f64 {
        (k as f64 - self.zero() as f64) * self.step()
    }

    /// Nearest bin, saturating at the ends.
    pub fn index_of(&self, llr: f64) -> usize {
        let k = (llr / self.step()).round() + self.zero() as f64;
        k.clamp(0.0, (self.len() - 1) as f64) as usize
    }
}

/// How an LLR bin is placed on the magnitude lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Binning {
    /// Whole mass to the nearest magnitude bin. Exactly invertible where
    /// the lattice is finer than the LLR grid.
    Nearest,
    /// Mass split linearly between the two neighbouring bins so the mean
    /// magnitude is kept; quantization bias then does not pile up over
    /// the `dc - 1` summed magnitudes.
    Split,
}

/// Uniform lattice for `m = -log|p0 - p1|` on `[0, max)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MagLattice {
    pub max: f64,
    pub bins: usize,
    pub binning: Binning,
}

impl Default for MagLattice {
    fn default() -> Self {
        MagLattice {
            max: 25.0,
            bins: 1 << 13,
            binning: Binning::Split,
        }
    }
}

impl MagLattice {
    pub fn step(&self) -> f64 {
        self.max / self.bins as f64
    }
}

/// Probability mass over an [`LlrGrid`] plus a separate mass at `+inf`
/// for messages that are certain to be correct (known bits).
#[derive(Debug, Clone, PartialEq)]
pub struct LlrDensity {
    pub grid: LlrGrid,
    pub mass: Vec<f64>,
    pub certain: f64,
}

impl LlrDensity {
    pub fn zeros(grid: LlrGrid) -> Self {
        LlrDensity {
            grid,
            mass: vec![0.0; grid.len()],
            certain: 0.0,
        }
    }

    pub fn point(grid: LlrGrid, llr: f64) -> Self {
        let mut d = Self::zeros(grid);
        d.mass[grid.index_of(llr)] = 1.0;
        d
    }

    /// All mass at `+inf`: the message of a known bit.
    pub fn certain(grid: LlrGrid) -> Self {
        LlrDensity {
            grid,
            mass: vec![0.0; grid.len()],
            certain: 1.0,
        }
    }

    pub fn total(&self) -> f64 {
        self.mass.iter().sum::<f64>() + self.certain
    }

    /// Negative-LLR mass plus half the mass at LLR 0.
    pub fn error_probability(&self) -> f64 {
        let z = self.grid.zero();
        self.mass[..z].iter().sum::<f64>() + 0.5 * self.mass[z]
    }

    pub fn total_variation(&self, other: &LlrDensity) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let tv: f64 = self
            .mass
            .iter()
            .zip(&other.mass)
            .map(|(a, b)| (a - b).abs())
            .sum();
        Ok(0.5 * (tv + (self.certain - other.certain).abs()))
    }

    /// Total-variation distance between the negative half and its
    /// symmetric prediction: `1/2 sum_{x>0} |mass(-x) - e^(-x) mass(x)|`.
    pub fn symmetry_defect(&self) -> f64 {
        let z = self.grid.zero();
        0.5 * (1..=z)
            .map(|k| (self.mass[z - k] - (-self.grid.value(z + k)).exp() * self.mass[z + k]).abs())
            .sum::<f64>()
    }

    /// Clamps rounding noise and rescales the finite part to `finite`.
    pub(crate) fn normalise_finite(&mut self, finite: f64) {
        for v in self.mass.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let s: f64 = self.mass.iter().sum();
        if s > 0.0 {
            let k = finite / s;
            self.mass.iter_mut().for_each(|v| *v *= k);
        }
    }

    pub fn to_sign_mag(&self, lattice: MagLattice) -> SignMagDensity {
        MagTables::new(self.grid, lattice).to_sign_mag(self)
    }

    /// Binary dump: `b"LLRD"`, `bits` (u32), `half_width`, `certain` (f64),
    /// bin count (u64), then the masses; all little-endian.
    pub fn write_dump<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(b"LLRD")?;
        w.write_all(&self.grid.bits.to_le_bytes())?;
        w.write_all(&self.grid.half_width.to_le_bytes())?;
        w.write_all(&self.certain.to_le_bytes())?;
        w.write_all(&(self.mass.len() as u64).to_le_bytes())?;
        for v in &self.mass {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_dump<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != b"LLRD" {
            return Err(Error::Io("not a density dump".into()));
        }
        let mut b4 = [0u8; 4];
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b4)?;
        let bits = u32::from_le_bytes(b4);
        r.read_exact(&mut b8)?;
        let half_width = f64::from_le_bytes(b8);
        r.read_exact(&mut b8)?;
        let certain = f64::from_le_bytes(b8);
        r.read_exact(&mut b8)?;
        let n = u64::from_le_bytes(b8) as usize;
        let grid = LlrGrid { half_width, bits };
        if !(1..=30).contains(&bits) || n != grid.len() {
            return Err(Error::Io(format!(
                "dump header inconsistent: bits {bits}, {n} bins"
            )));
        }
        let mut mass = Vec::with_capacity(n);
        for _ in 0..n {
            r.read_exact(&mut b8)?;
            mass.push(f64::from_le_bytes(b8));
        }
        Ok(LlrDensity {
            grid,
            mass,
            certain,
        })
    }
}

/// Two point masses at `±log((1-p)/p)` (nearest bins).
pub fn bsc_initial_density(p: f64, grid: LlrGrid) -> Result<LlrDensity> {
    if !(p > 0.0 && p < 0.5) {
        if p == 0.5 {
            return Ok(LlrDensity::point(grid, 0.0));
        }
        return Err(Error::InvalidChannel(format!(
            "crossover {p} outside (0, 0.5)"
        )));
    }
    let llr = ((1.0 - p) / p).ln();
    if llr > grid.half_width {
        return Err(Error::GridTooNarrow {
            half_width: grid.half_width,
            llr,
        });
    }
    let mut d = LlrDensity::zeros(grid);
    d.mass[grid.index_of(llr)] += 1.0 - p;
    d.mass[grid.index_of(-llr)] += p;
    Ok(d)
}

/// Check-node view of a density: masses over the magnitude lattice split by
/// sign, the certain mass (`m = 0` exactly, positive sign) and the erasure
/// mass (`m` beyond the lattice, i.e. `L = 0`).
#[derive(Debug, Clone, PartialEq)]
pub struct SignMagDensity {
    pub lattice: MagLattice,
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
    pub certain: f64,
    pub erasure: f64,
}

impl SignMagDensity {
    pub fn total(&self) -> f64 {
        self.plus.iter().sum::<f64>() + self.minus.iter().sum::<f64>() + self.certain + self.erasure
    }

    pub fn to_llr(&self, grid: LlrGrid) -> LlrDensity {
        MagTables::new(grid, self.lattice).to_llr(self)
    }
}

/// Precomputed bin maps between an LLR grid and a magnitude lattice.
#[derive(Debug, Clone)]
pub(crate) struct MagTables {
    pub grid: LlrGrid,
    pub lattice: MagLattice,
    /// Lower magnitude bin per LLR bin and the share of mass that goes to
    /// the bin above it; `lattice.bins` marks the erasure bin.
    to_mag: Vec<(usize, f64)>,
    /// LLR offset from zero per magnitude bin.
    to_llr: Vec<usize>,
}

impl MagTables {
    pub(crate) fn new(grid: LlrGrid, lattice: MagLattice) -> Self {
        let dm = lattice.step();
        let z = grid.zero();
        let to_mag = (0..grid.len())
            .map(|k| {
                if k == z {
                    return (lattice.bins, 0.0);
                }
                let m = -(0.5 * grid.value(k).abs()).tanh().ln() / dm;
                if m >= lattice.bins as f64 {
                    return (lattice.bins, 0.0);
                }
                match lattice.binning {
                    Binning::Split => {
                        let b = m.floor();
                        (b as usize, m - b)
                    }
                    Binning::Nearest => (m.round() as usize, 0.0),
                }
            })
            .collect();
        // Bin 0 stands for m in [0, dm/2); map it back through its centre
        // rather than through m = 0, which would mean certainty.
        let to_llr = (0..lattice.bins)
            .map(|j| {
                let m = (j as f64 * dm).max(0.5 * dm);
                let l = 2.0 * (-m).exp().atanh();
                ((l.min(grid.half_width) / grid.step()).round() as usize).min(z)
            })
            .collect();
        MagTables {
            grid,
            lattice,
            to_mag,
            to_llr,
        }
    }

    pub(crate) fn to_sign_mag(&self, d: &LlrDensity) -> SignMagDensity {
        let nb = self.lattice.bins;
        let z = self.grid.zero();
        let mut plus = vec![0.0; nb];
        let mut minus = vec![0.0; nb];
        let mut erasure = 0.0;
        for (k, &v) in d.mass.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let (b, t) = self.to_mag[k];
            if b == nb {
                erasure += v;
                continue;
            }
            let side = if k > z { &mut plus } else { &mut minus };
            side[b] += v * (1.0 - t);
            if b + 1 < nb {
                side[b + 1] += v * t;
            } else {
                erasure += v * t;
            }
        }
        SignMagDensity {
            lattice: self.lattice,
            plus,
            minus,
            certain: d.certain,
            erasure,
        }
    }

    pub(crate) fn to_llr(&self, s: &SignMagDensity) -> LlrDensity {
        let z = self.grid.zero();
        let mut out = LlrDensity::zeros(self.grid);
        for j in 0..self.lattice.bins {
            let off = self.to_llr[j];
            out.mass[z + off] += s.plus[j];
            out.mass[z - off] += s.minus[j];
        }
        out.mass[z] += s.erasure;
        out.certain = s.certain;
        out
    }
}
