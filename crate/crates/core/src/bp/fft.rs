//! Linear convolution helpers on top of complex FFTs.
//!
//! Two real sequences are packed into one complex buffer (`re + i im`) so a
//! single transform yields both spectra.

use std::sync::{Arc, Mutex};

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

pub(crate) struct Plans {
    planner: Mutex<FftPlanner<f64>>,
}

impl Plans {
    pub(crate) fn new() -> Self {
        Plans {
            planner: Mutex::new(FftPlanner::new()),
        }
    }

    pub(crate) fn get(&self, n: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
        let mut p = self.planner.lock().expect("fft planner poisoned");
        (p.plan_fft_forward(n), p.plan_fft_inverse(n))
    }
}

/// Spectrum of `a + i b`, zero-padded to `n`.
pub(crate) fn packed_spectrum(
    fwd: &dyn Fft<f64>,
    a: &[f64],
    b: &[f64],
    n: usize,
) -> Vec<Complex64> {
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for (i, v) in a.iter().enumerate() {
        buf[i].re = *v;
    }
    for (i, v) in b.iter().enumerate() {
        buf[i].im = *v;
    }
    fwd.process(&mut buf);
    buf
}

/// Splits the spectrum of `a + i b` into the spectra of `a` and `b`.
pub(crate) fn unpack(z: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
    let n = z.len();
    let mut fa = Vec::with_capacity(n);
    let mut fb = Vec::with_capacity(n);
    for k in 0..n {
        let zk = z[k];
        let zm = z[(n - k) % n].conj();
        fa.push((zk + zm) * 0.5);
        let d = (zk - zm) * 0.5;
        // divide by i
        fb.push(Complex64::new(d.im, -d.re));
    }
    (fa, fb)
}

/// Inverse of two real spectra packed as `fa + i fb`; returns the first
/// `keep` samples of each signal.
pub(crate) fn packed_inverse(
    inv: &dyn Fft<f64>,
    fa: &[Complex64],
    fb: &[Complex64],
    keep: usize,
) -> (Vec<f64>, Vec<f64>) {
    let n = fa.len();
    let mut buf: Vec<Complex64> = fa
        .iter()
        .zip(fb)
        .map(|(a, b)| a + Complex64::new(-b.im, b.re))
        .collect();
    inv.process(&mut buf);
    let scale = 1.0 / n as f64;
    let a = buf[..keep].iter().map(|c| c.re * scale).collect();
    let b = buf[..keep].iter().map(|c| c.im * scale).collect();
    (a, b)
}

/// A pair of real sequences on the magnitude lattice that are always
/// convolved together.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Chain {
    pub s: Vec<f64>,
    pub d: Vec<f64>,
}

/// Linear convolution truncated to the first `len` samples, applied to
/// both members of a [`Chain`] at once.
pub(crate) struct TruncatedConv {
    len: usize,
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl TruncatedConv {
    pub(crate) fn new(plans: &Plans, len: usize) -> Self {
        let n = (2 * len).next_power_of_two();
        let (fwd, inv) = plans.get(n);
        TruncatedConv { len, n, fwd, inv }
    }

    fn spectra(&self, c: &Chain) -> (Vec<Complex64>, Vec<Complex64>) {
        unpack(&packed_spectrum(self.fwd.as_ref(), &c.s, &c.d, self.n))
    }

    pub(crate) fn mul(&self, x: &Chain, y: &Chain) -> Chain {
        let (xs, xd) = self.spectra(x);
        let (ys, yd) = if std::ptr::eq(x, y) {
            (xs.clone(), xd.clone())
        } else {
            self.spectra(y)
        };
        let ps: Vec<_> = xs.iter().zip(&ys).map(|(a, b)| a * b).collect();
        let pd: Vec<_> = xd.iter().zip(&yd).map(|(a, b)| a * b).collect();
        let (s, d) = packed_inverse(self.inv.as_ref(), &ps, &pd, self.len);
        Chain { s, d }
    }

    /// `k`-fold truncated self-convolution; `k = 0` gives the unit impulse.
    pub(crate) fn pow(&self, x: &Chain, mut k: usize) -> Chain {
        let mut result: Option<Chain> = None;
        let mut base = x.clone();
        while k > 0 {
            if k & 1 == 1 {
                result = Some(match result {
                    None => base.clone(),
                    Some(r) => self.mul(&r, &base),
                });
            }
            k >>= 1;
            if k > 0 {
                base = self.mul(&base, &base);
            }
        }
        result.unwrap_or_else(|| {
            let mut s = vec![0.0; self.len];
            s[0] = 1.0;
            Chain { d: s.clone(), s }
        })
    }
}
