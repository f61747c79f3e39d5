//! Panels of dated series forming a chain of variables.

use std::io::Read;
use std::path::Path;

use chrono::NaiveDate;
use serde::Serialize;

use crate::error::{domain, Error, Result};

/// Series sharing a date axis. Variable `i` neighbors `i - 1` and `i + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesPanel {
    dates: Vec<NaiveDate>,
    names: Vec<String>,
    /// One column per variable.
    columns: Vec<Vec<f64>>,
}

impl SeriesPanel {
    pub fn new(dates: Vec<NaiveDate>, names: Vec<String>, columns: Vec<Vec<f64>>) -> Result<SeriesPanel> {
        if names.len() < 2 {
            return domain("a panel needs at least two variables");
        }
        if names.len() != columns.len() {
            return domain("one column per variable is required");
        }
        if columns.iter().any(|c| c.len() != dates.len()) {
            return domain("every column must have one value per date");
        }
        if dates.windows(2).any(|w| w[0] >= w[1]) {
            return domain("dates must be strictly increasing");
        }
        if columns.iter().flatten().any(|v| !v.is_finite()) {
            return domain("panel values must be finite");
        }
        Ok(SeriesPanel {
            dates,
            names,
            columns,
        })
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn column(&self, i: usize) -> &[f64] {
        &self.columns[i]
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn variables(&self) -> usize {
        self.names.len()
    }

    /// Chain neighbors of variable `i`.
    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(2);
        if i > 0 {
            out.push(i - 1);
        }
        if i + 1 < self.names.len() {
            out.push(i + 1);
        }
        out
    }

    pub fn map_columns(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> Result<SeriesPanel> {
        SeriesPanel::new(
            self.dates.clone(),
            self.names.clone(),
            self.columns.iter().map(|c| f(c)).collect(),
        )
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("date,{}\n", self.names.join(","));
        for (t, d) in self.dates.iter().enumerate() {
            out.push_str(&d.format("%Y-%m-%d").to_string());
            for c in &self.columns {
                out.push(',');
                out.push_str(&format!("{:?}", c[t]));
            }
            out.push('\n');
        }
        out
    }
}

/// What ingestion changed.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct LoadReport {
    pub rows_read: usize,
    /// Leading rows dropped because some variable had no value yet.
    pub leading_rows_dropped: usize,
    /// `(date, variable)` cells filled from the previous date.
    pub forward_filled: Vec<(String, String)>,
}

fn is_missing(field: &str) -> bool {
    matches!(
        field.trim().to_ascii_lowercase().as_str(),
        "" | "na" | "nan" | "null" | "#n/a"
    )
}

/// Parse a panel from CSV text with header `date,<var>,...`.
///
/// `order` selects and orders the chain; `None` keeps the file's column order.
pub fn parse_panel<R: Read>(reader: R, order: Option<&[String]>) -> Result<(SeriesPanel, LoadReport)> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::Format(format!("unreadable header: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.is_empty() || !header[0].eq_ignore_ascii_case("date") {
        return Err(Error::Format("first column must be \"date\"".into()));
    }
    let names: Vec<String> = match order {
        Some(o) => o.to_vec(),
        None => header[1..].to_vec(),
    };
    let picks: Vec<usize> = names
        .iter()
        .map(|n| {
            header[1..]
                .iter()
                .position(|h| h == n)
                .map(|p| p + 1)
                .ok_or_else(|| Error::Format(format!("unknown column {n:?}")))
        })
        .collect::<Result<_>>()?;
    let mut rows: Vec<(NaiveDate, Vec<Option<f64>>)> = Vec::new();
    for (lineno, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Format(format!("row {}: {e}", lineno + 2)))?;
        let raw_date = rec.get(0).unwrap_or("");
        let date = NaiveDate::parse_from_str(raw_date, "%Y-%m-%d")
            .map_err(|_| Error::Format(format!("row {}: bad date {raw_date:?}", lineno + 2)))?;
        let values = picks
            .iter()
            .map(|&p| {
                let f = rec.get(p).unwrap_or("");
                if is_missing(f) {
                    Ok(None)
                } else {
                    f.parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .map(Some)
                        .ok_or_else(|| Error::Format(format!("row {}: bad number {f:?}", lineno + 2)))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push((date, values));
    }
    if rows.is_empty() {
        return Err(Error::Format("panel has no data rows".into()));
    }
    rows.sort_by_key(|r| r.0);
    if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::Format(format!("duplicate date {}", w[0].0)));
    }
    let mut report = LoadReport {
        rows_read: rows.len(),
        ..LoadReport::default()
    };
    let first_complete = rows
        .iter()
        .position(|(_, v)| v.iter().all(Option::is_some))
        .ok_or_else(|| Error::Format("no row has a value for every variable".into()))?;
    report.leading_rows_dropped = first_complete;
    let rows = &rows[first_complete..];
    let mut columns = vec![Vec::with_capacity(rows.len()); names.len()];
    let mut dates = Vec::with_capacity(rows.len());
    for (date, values) in rows {
        dates.push(*date);
        for (j, v) in values.iter().enumerate() {
            let value = match v {
                Some(v) => *v,
                None => {
                    report.forward_filled.push((date.to_string(), names[j].clone()));
                    *columns[j].last().expect("first row is complete")
                }
            };
            columns[j].push(value);
        }
    }
    Ok((SeriesPanel::new(dates, names, columns)?, report))
}

pub fn load_panel(path: impl AsRef<Path>, order: Option<&[String]>) -> Result<(SeriesPanel, LoadReport)> {
    let file = std::fs::File::open(path)?;
    parse_panel(file, order)
}

/// Gaussian smoothing truncated at ±4σ, weights renormalized near the edges.
pub fn gaussian_smooth(x: &[f64], sigma: f64) -> Vec<f64> {
    let half = (4.0 * sigma).ceil() as usize;
    let kernel: Vec<f64> = (0..=half)
        .map(|d| (-0.5 * (d as f64 / sigma).powi(2)).exp())
        .collect();
    let n = x.len();
    (0..n)
        .map(|t| {
            let lo = t.saturating_sub(half);
            let hi = (t + half).min(n - 1);
            let (mut acc, mut norm) = (0.0, 0.0);
            for (s, &v) in x.iter().enumerate().take(hi + 1).skip(lo) {
                let w = kernel[s.abs_diff(t)];
                acc += w * v;
                norm += w;
            }
            acc / norm
        })
        .collect()
}

/// Each series minus its Gaussian smoothing of width `sigma` samples.
pub fn detrend(p: &SeriesPanel, sigma: f64) -> Result<SeriesPanel> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return domain(format!("sigma must be positive, got {sigma}"));
    }
    p.map_columns(|c| {
        let smooth = gaussian_smooth(c, sigma);
        c.iter().zip(smooth).map(|(v, s)| v - s).collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    const FX: &str = "date,EUR/USD,USD/JPY,JPY/GBP,GBP/CHF,CHF/EUR\n\
        2020-01-03,1.1,108.0,0.007,1.27,0.92\n\
        2020-01-02,1.2,109.0,0.0071,1.28,0.93\n\
        2020-01-06,1.3,,0.0072,1.29,0.94\n";

    #[test]
    fn fx_chain_sorted_and_filled() {
        let (p, report) = parse_panel(FX.as_bytes(), None).unwrap();
        assert_eq!(
            p.names(),
            &["EUR/USD", "USD/JPY", "JPY/GBP", "GBP/CHF", "CHF/EUR"]
        );
        assert_eq!(p.dates()[0].to_string(), "2020-01-02");
        assert_eq!(p.column(1), &[109.0, 108.0, 108.0]);
        assert_eq!(
            report.forward_filled,
            vec![("2020-01-06".to_string(), "USD/JPY".to_string())]
        );
        assert_eq!(p.neighbors(0), vec![1]);
        assert_eq!(p.neighbors(2), vec![1, 3]);
    }

    #[test]
    fn ordering_and_leading_gaps() {
        let text = "date,a,b,c\n2021-01-01,,1,2\n2021-01-02,3,4,5\n2021-01-03,6,7,8\n";
        let order = vec!["c".to_string(), "a".to_string()];
        let (p, report) = parse_panel(text.as_bytes(), Some(&order)).unwrap();
        assert_eq!(report.leading_rows_dropped, 1);
        assert_eq!(p.column(0), &[5.0, 8.0]);
        let bad = vec!["zzz".to_string()];
        assert!(matches!(
            parse_panel(text.as_bytes(), Some(&bad)),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn format_errors() {
        assert!(matches!(parse_panel("".as_bytes(), None), Err(Error::Format(_))));
        assert!(matches!(
            parse_panel("date,a,b\n".as_bytes(), None),
            Err(Error::Format(_))
        ));
        assert!(matches!(
            parse_panel("date,a,b\n2020-13-01,1,2\n".as_bytes(), None),
            Err(Error::Format(_))
        ));
        assert!(matches!(
            parse_panel("date,a,b\n2020-01-01,x,2\n".as_bytes(), None),
            Err(Error::Format(_))
        ));
        assert!(matches!(
            parse_panel("date,a,b\n2020-01-01,1,2\n2020-01-01,1,2\n".as_bytes(), None),
            Err(Error::Format(_))
        ));
    }

    fn panel_of(cols: Vec<Vec<f64>>) -> SeriesPanel {
        let n = cols[0].len();
        let start = NaiveDate::from_ymd_opt(2000, 1, 1).unwrap();
        let dates = (0..n).map(|i| start + chrono::Days::new(i as u64)).collect();
        let names = (0..cols.len()).map(|i| format!("v{i}")).collect();
        SeriesPanel::new(dates, names, cols).unwrap()
    }

    #[test]
    fn detrend_constant_is_zero() {
        let p = detrend(&panel_of(vec![vec![3.5; 200], vec![-1.0; 200]]), 10.0).unwrap();
        assert!(p.columns().iter().flatten().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn detrend_removes_slow_sine() {
        let n = 2000;
        let sigma = 5.0;
        let sine: Vec<f64> = (0..n)
            .map(|t| (2.0 * std::f64::consts::PI * t as f64 / 500.0).sin())
            .collect();
        let p = detrend(&panel_of(vec![sine.clone(), sine.clone()]), sigma).unwrap();
        let interior = 100..n - 100;
        let max_res = interior.clone().map(|t| p.column(0)[t].abs()).fold(0.0, f64::max);
        assert!(max_res < 0.1);
        // direct convolution oracle with the untruncated kernel
        let t = 1000usize;
        let (mut acc, mut norm) = (0.0, 0.0);
        for (s, v) in sine.iter().enumerate() {
            let w = (-0.5 * ((s as f64 - t as f64) / sigma).powi(2)).exp();
            acc += w * v;
            norm += w;
        }
        assert!((p.column(0)[t] - (sine[t] - acc / norm)).abs() < 1e-6);
    }

    #[test]
    fn detrend_keeps_white_noise() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let noise: Vec<f64> = (0..5000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let var = |x: &[f64]| {
            let m = x.iter().sum::<f64>() / x.len() as f64;
            x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / x.len() as f64
        };
        let p = detrend(&panel_of(vec![noise.clone(), noise.clone()]), 50.0).unwrap();
        let ratio = var(p.column(0)) / var(&noise);
        assert!((ratio - 1.0).abs() < 0.25, "{ratio}");
        assert!(detrend(&p, 0.0).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let p = panel_of(vec![vec![1.5, 2.25, 0.1], vec![3.0, -4.0, 1e-9]]);
        let (back, _) = parse_panel(p.to_csv().as_bytes(), None).unwrap();
        assert_eq!(back, p);
    }
}
