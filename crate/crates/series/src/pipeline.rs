//! Sliding-window memory, transfer and integration of a chain panel.

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::ksg::{jitter, ksg_mi, PointCloud, DEFAULT_JITTER, DEFAULT_K};
use crate::panel::{detrend, SeriesPanel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputUnit {
    #[default]
    Nats,
    Bits,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Number of `(t, t + delay)` sample pairs per window.
    pub window: usize,
    /// Detrending kernel width in samples; `None` leaves the series as given.
    pub sigma: Option<f64>,
    pub delay: usize,
    pub k: usize,
    /// Samples between consecutive evaluated windows.
    pub stride: usize,
    pub jitter_seed: u64,
    pub jitter_amplitude: f64,
    pub unit: OutputUnit,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            window: 1400,
            sigma: None,
            delay: 1,
            k: DEFAULT_K,
            stride: 20,
            jitter_seed: 0,
            jitter_amplitude: DEFAULT_JITTER,
            unit: OutputUnit::Nats,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return domain("k must be at least 1");
        }
        if self.window <= 10 * self.k {
            return domain(format!(
                "window {} must exceed 10·k = {}",
                self.window,
                10 * self.k
            ));
        }
        if self.delay == 0 {
            return domain("delay must be at least 1");
        }
        if self.stride == 0 {
            return domain("stride must be at least 1");
        }
        if let Some(s) = self.sigma {
            if !(s > 0.0 && s.is_finite()) {
                return domain(format!("sigma must be positive, got {s}"));
            }
        }
        Ok(())
    }
}

/// Per-variable quantities of one window, in nats.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct VariableFeatures {
    pub total: f64,
    pub memory: f64,
    pub transfer: f64,
}

/// Detrend (if configured) and jitter every column, as done before estimation.
pub fn prepare(panel: &SeriesPanel, cfg: &PipelineConfig) -> Result<SeriesPanel> {
    let base = match cfg.sigma {
        Some(s) => detrend(panel, s)?,
        None => panel.clone(),
    };
    let mut columns = Vec::with_capacity(base.variables());
    for (j, c) in base.columns().iter().enumerate() {
        let cloud = PointCloud::new(c.len(), 1, c.clone())?;
        let seed = cfg.jitter_seed.wrapping_add(j as u64);
        columns.push(jitter(&cloud, cfg.jitter_amplitude, seed)?.data().to_vec());
    }
    SeriesPanel::new(base.dates().to_vec(), base.names().to_vec(), columns)
}

/// Features of the window of `cfg.window` pairs whose last target sample is
/// `end`, on an already prepared panel.
pub fn window_features(
    panel: &SeriesPanel,
    end: usize,
    cfg: &PipelineConfig,
) -> Result<Vec<VariableFeatures>> {
    cfg.validate()?;
    let needed = cfg.window + cfg.delay;
    if end >= panel.len() || end + 1 < needed {
        return domain(format!(
            "window ending at sample {end} needs {needed} samples, panel has {} up to there",
            (end + 1).min(panel.len())
        ));
    }
    let target_start = end + 1 - cfg.window;
    let source_start = target_start - cfg.delay;
    let src = |j: usize| &panel.column(j)[source_start..source_start + cfg.window];
    let tgt = |j: usize| &panel.column(j)[target_start..=end];
    (0..panel.variables())
        .map(|i| {
            let y = PointCloud::from_columns(&[tgt(i)])?;
            let memory = ksg_mi(&PointCloud::from_columns(&[src(i)])?, &y, cfg.k)?;
            let neighbors = panel.neighbors(i);
            let mut transfer = 0.0;
            for &j in &neighbors {
                transfer += ksg_mi(&PointCloud::from_columns(&[src(j)])?, &y, cfg.k)?;
            }
            let mut block: Vec<usize> = neighbors.clone();
            block.push(i);
            block.sort_unstable();
            let sources: Vec<&[f64]> = block.iter().map(|&j| src(j)).collect();
            let total = ksg_mi(&PointCloud::from_columns(&sources)?, &y, cfg.k)?;
            Ok(VariableFeatures {
                total,
                memory,
                transfer,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    pub date: NaiveDate,
    /// Index of the window's last sample.
    pub end: usize,
    pub memory: f64,
    pub transfer: f64,
    pub integration_raw: f64,
    pub integration: f64,
    /// Mean of the per-variable totals, kept for the correction.
    pub total: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub points: Vec<TrajectoryPoint>,
    /// Rescaling of memory plus transfer so that its mean over the run
    /// equals the mean total.
    pub kappa: f64,
    pub unit: OutputUnit,
}

/// Evaluated window ends: every `stride` samples, the last one flush with the panel end.
pub fn window_ends(len: usize, cfg: &PipelineConfig) -> Vec<usize> {
    let first = cfg.window + cfg.delay - 1;
    if len <= first {
        return Vec::new();
    }
    let last = len - 1;
    (0..=(last - first) / cfg.stride)
        .rev()
        .map(|m| last - m * cfg.stride)
        .collect()
}

pub fn trajectory(panel: &SeriesPanel, cfg: &PipelineConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let ends = window_ends(panel.len(), cfg);
    if ends.len() < 2 {
        return domain(format!(
            "panel of {} samples yields {} windows of {} pairs with delay {}; at least 2 are needed",
            panel.len(),
            ends.len(),
            cfg.window,
            cfg.delay
        ));
    }
    let prepared = prepare(panel, cfg)?;
    let per_window = ends
        .par_iter()
        .map(|&e| window_features(&prepared, e, cfg))
        .collect::<Result<Vec<_>>>()?;
    let scale = match cfg.unit {
        OutputUnit::Nats => 1.0,
        OutputUnit::Bits => 1.0 / std::f64::consts::LN_2,
    };
    let v = panel.variables() as f64;
    let mut points: Vec<TrajectoryPoint> = ends
        .iter()
        .zip(&per_window)
        .map(|(&e, feats)| {
            let memory = feats.iter().map(|f| f.memory).sum::<f64>() / v * scale;
            let transfer = feats.iter().map(|f| f.transfer).sum::<f64>() / v * scale;
            let total = feats.iter().map(|f| f.total).sum::<f64>() / v * scale;
            TrajectoryPoint {
                date: panel.dates()[e],
                end: e,
                memory,
                transfer,
                integration_raw: total - (memory + transfer),
                integration: 0.0,
                total,
            }
        })
        .collect();
    let n = points.len() as f64;
    let mean_total = points.iter().map(|p| p.total).sum::<f64>() / n;
    let mean_parts = points.iter().map(|p| p.memory + p.transfer).sum::<f64>() / n;
    let kappa = if mean_parts.abs() > 1e-9 {
        mean_total / mean_parts
    } else {
        log::warn!("memory plus transfer averages {mean_parts:e}; leaving integration uncorrected");
        1.0
    };
    for p in &mut points {
        p.integration = p.total - kappa * (p.memory + p.transfer);
    }
    Ok(Trajectory {
        points,
        kappa,
        unit: cfg.unit,
    })
}

impl Trajectory {
    /// CSV "date,M,T,II_raw,II" with 9 significant digits.
    pub fn to_csv(&self) -> String {
        let fmt = |v: f64| infoproc_core::numfmt::format_significant(v, 9);
        let mut out = String::from("date,M,T,II_raw,II\n");
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                p.date.format("%Y-%m-%d"),
                fmt(p.memory),
                fmt(p.transfer),
                fmt(p.integration_raw),
                fmt(p.integration)
            ));
        }
        out
    }

    pub fn coordinates(&self) -> Vec<[f64; 3]> {
        self.points
            .iter()
            .map(|p| [p.memory, p.transfer, p.integration])
            .collect()
    }
}

/// Separation of two point sets: distance between centroids over the pooled
/// root-mean-square distance of points from their own centroid.
pub fn separation(a: &[[f64; 3]], b: &[[f64; 3]]) -> Result<f64> {
    if a.len() < 2 || b.len() < 2 {
        return domain("each group needs at least two points");
    }
    let centroid = |s: &[[f64; 3]]| {
        let mut c = [0.0; 3];
        for p in s {
            for d in 0..3 {
                c[d] += p[d] / s.len() as f64;
            }
        }
        c
    };
    let dist2 = |p: &[f64; 3], q: &[f64; 3]| (0..3).map(|d| (p[d] - q[d]).powi(2)).sum::<f64>();
    let (ca, cb) = (centroid(a), centroid(b));
    let within = a.iter().map(|p| dist2(p, &ca)).sum::<f64>() + b.iter().map(|p| dist2(p, &cb)).sum::<f64>();
    let pooled = (within / (a.len() + b.len()) as f64).sqrt();
    Ok(dist2(&ca, &cb).sqrt() / pooled)
}

/// Separation between windows lying wholly before and wholly after `split`
/// (a sample index); windows straddling it are ignored.
pub fn regime_separation(t: &Trajectory, split: usize, cfg: &PipelineConfig) -> Result<f64> {
    let span = cfg.window + cfg.delay;
    let coords = t.coordinates();
    let (mut pre, mut post) = (Vec::new(), Vec::new());
    for (p, c) in t.points.iter().zip(coords) {
        if p.end < split {
            pre.push(c);
        } else if p.end + 1 >= split + span {
            post.push(c);
        }
    }
    separation(&pre, &post)
}
