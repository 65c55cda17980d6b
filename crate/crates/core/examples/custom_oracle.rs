//! The threshold search works with any convergence oracle. Here a scalar
//! Gallager B recursion (flip when at least `b` of the other checks
//! disagree) is plugged into the same UDP pair search. With binary messages
//! the unknown reliable bits can still be flipped, so only doping moves the
//! threshold here.
//!
//! cargo run --release --example custom_oracle

use udp_ldpc::threshold::{search_threshold, Probe};
use udp_ldpc::{DensityEvolution, EnsembleSpec, ProtectionMode, SearchOptions};

struct GallagerB {
    b: usize,
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl GallagerB {
    /// Next error probability of a bit with channel crossover `p0` whose
    /// incoming check messages are wrong with probability `q`.
    fn vn(&self, p0: f64, q: f64, dv: usize) -> f64 {
        let n = dv - 1;
        let tail = |x: f64| {
            (self.b..=n)
                .map(|k| binom(n, k) * x.powi(k as i32) * (1.0 - x).powi((n - k) as i32))
                .sum::<f64>()
        };
        p0 * (1.0 - tail(1.0 - q)) + (1.0 - p0) * tail(q)
    }
}

impl DensityEvolution for GallagerB {
    fn probe(&self, spec: &EnsembleSpec, mode: ProtectionMode, p: f64, pbar: f64) -> Probe {
        let pbar0 = match mode {
            ProtectionMode::Uniform => p,
            ProtectionMode::Udp => pbar,
            ProtectionMode::Doping => 0.0,
        };
        let (mut e, mut eb) = (p, pbar0);
        for it in 1..=2000 {
            let (a, b) = spec.regular_exponents();
            let q = 0.5 * (1.0 - (1.0 - 2.0 * eb).powi(a as i32) * (1.0 - 2.0 * e).powi(b as i32));
            let (a, b) = spec.reliable_exponents();
            let qb = 0.5 * (1.0 - (1.0 - 2.0 * eb).powi(a as i32) * (1.0 - 2.0 * e).powi(b as i32));
            e = self.vn(p, q, spec.dv());
            eb = if mode == ProtectionMode::Doping {
                0.0
            } else {
                self.vn(pbar0, qb, spec.dv())
            };
            if e.max(eb) < 1e-10 {
                return Probe {
                    converged: true,
                    iterations: it,
                    final_error: e.max(eb),
                };
            }
        }
        Probe {
            converged: false,
            iterations: 2000,
            final_error: e.max(eb),
        }
    }
}

fn main() -> udp_ldpc::Result<()> {
    for (dv, dc, b) in [(5, 10, 3), (6, 12, 4)] {
        let spec = EnsembleSpec::new(dv, dc)?;
        let oracle = GallagerB { b };
        let uniform = search_threshold(
            &oracle,
            &spec,
            ProtectionMode::Uniform,
            &SearchOptions::default(),
        );
        let opts = SearchOptions {
            uniform: Some(uniform.threshold),
            ..Default::default()
        };
        for mode in [
            ProtectionMode::Uniform,
            ProtectionMode::Udp,
            ProtectionMode::Doping,
        ] {
            let r = search_threshold(&oracle, &spec, mode, &opts);
            println!(
                "{spec} Gallager B (b={b}) {:>8}: {:.4}  gain {:>5.1}%",
                mode.as_str(),
                r.threshold,
                r.gain_pct.unwrap_or(0.0)
            );
        }
    }
    Ok(())
}
