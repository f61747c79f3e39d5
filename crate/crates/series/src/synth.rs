//! Synthetic chain panels with a regime change.
//!
//! Variables `x_1..x_V` on a line evolve as
//!
//! ```text
//! x_i(t+1) = a · x_i(t) + (c / 2) · (x_{i-1}(t) + x_{i+1}(t)) + ε_i(t),   ε ~ N(0, s²)
//! ```
//!
//! with missing neighbors at the chain ends treated as zero. The pair
//! `(a, c)` switches from the pre regime to the post regime at `split`.

use chrono::NaiveDate;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::panel::SeriesPanel;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Regime {
    pub ar: f64,
    pub coupling: f64,
}

impl Regime {
    /// Largest eigenvalue magnitude of the update matrix on a chain of `v`.
    pub fn spectral_radius(&self, v: usize) -> f64 {
        (1..=v)
            .map(|k| {
                (self.ar + self.coupling * (k as f64 * std::f64::consts::PI / (v + 1) as f64).cos()).abs()
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub variables: usize,
    pub length: usize,
    pub split: usize,
    pub burn_in: usize,
    pub noise_sd: f64,
    pub pre: Regime,
    pub post: Regime,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            variables: 5,
            length: 4000,
            split: 2000,
            burn_in: 500,
            noise_sd: 1.0,
            pre: Regime {
                ar: 0.5,
                coupling: 0.0,
            },
            post: Regime {
                ar: 0.1,
                coupling: 0.8,
            },
        }
    }
}

/// Seed of the reference panel produced by `SynthParams::default()`.
pub const BUNDLED_SEED: u64 = 42;
/// Detrending width used with the reference panel.
pub const BUNDLED_SIGMA: f64 = 100.0;

pub fn synth_regime(seed: u64, params: &SynthParams) -> Result<SeriesPanel> {
    let v = params.variables;
    if v < 2 {
        return domain("at least two variables are required");
    }
    if params.split > params.length || params.length < 2 {
        return domain("split must lie within the series");
    }
    if !(params.noise_sd > 0.0 && params.noise_sd.is_finite()) {
        return domain("noise standard deviation must be positive");
    }
    for (name, r) in [("pre", params.pre), ("post", params.post)] {
        let rho = r.spectral_radius(v);
        if !rho.is_finite() || rho >= 1.0 {
            return domain(format!("{name} regime is unstable (spectral radius {rho:.4})"));
        }
    }
    let normal = Normal::new(0.0, params.noise_sd).expect("positive sd");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = vec![0.0f64; v];
    let mut columns = vec![Vec::with_capacity(params.length); v];
    for t in 0..params.burn_in + params.length {
        let regime = if t < params.burn_in + params.split {
            params.pre
        } else {
            params.post
        };
        let next: Vec<f64> = (0..v)
            .map(|i| {
                let left = if i > 0 { x[i - 1] } else { 0.0 };
                let right = if i + 1 < v { x[i + 1] } else { 0.0 };
                regime.ar * x[i] + 0.5 * regime.coupling * (left + right) + normal.sample(&mut rng)
            })
            .collect();
        x = next;
        if t >= params.burn_in {
            for (c, &xi) in columns.iter_mut().zip(&x) {
                c.push(xi);
            }
        }
    }
    let start = NaiveDate::from_ymd_opt(2000, 1, 1).expect("valid date");
    let dates = (0..params.length)
        .map(|i| start + chrono::Days::new(i as u64))
        .collect();
    let names = (1..=v).map(|i| format!("x{i}")).collect();
    SeriesPanel::new(dates, names, columns)
}
