//! Fleiss' kappa for multiple raters assigning categorical labels.

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

/// Items by label categories; each cell counts the raters who chose that
/// label for that item. Every row sums to the same number of raters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnnotationMatrix {
    labels: Vec<String>,
    rows: Vec<Vec<u32>>,
    raters: u32,
}

impl AnnotationMatrix {
    pub fn new(labels: Vec<String>, rows: Vec<Vec<u32>>) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::InvalidInput("at least two items are required".into()));
        }
        if labels.is_empty() {
            return Err(Error::InvalidInput("no label categories".into()));
        }
        if let Some(i) = rows.iter().position(|r| r.len() != labels.len()) {
            return Err(Error::InvalidInput(format!(
                "item {i} has {} cells, expected {}",
                rows[i].len(),
                labels.len()
            )));
        }
        let raters: u32 = rows[0].iter().sum();
        if let Some(i) = rows.iter().position(|r| r.iter().sum::<u32>() != raters) {
            return Err(Error::InvalidInput(format!(
                "item {i} has {} ratings, expected {raters}",
                rows[i].iter().sum::<u32>()
            )));
        }
        if raters < 2 {
            return Err(Error::InvalidInput("at least two raters per item are required".into()));
        }
        Ok(AnnotationMatrix { labels, rows, raters })
    }

    /// Unnamed label columns `label0`, `label1`, ...
    pub fn from_rows(rows: Vec<Vec<u32>>) -> Result<Self> {
        let width = rows.first().map_or(0, Vec::len);
        Self::new((0..width).map(|i| format!("label{i}")).collect(), rows)
    }

    /// CSV with one row per item and one integer column per label. A
    /// leading non-numeric column (such as an item id) is ignored.
    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut rdr = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => Error::malformed(path, 0, format!("{other:?}")),
        })?;
        let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let mut records = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::malformed(path, i + 2, e.to_string()))?;
            records.push((i + 2, rec));
        }
        let skip_first = records.iter().any(|(_, r)| r.get(0).is_some_and(|c| c.trim().parse::<u32>().is_err()));
        let start = usize::from(skip_first);
        let mut rows = Vec::with_capacity(records.len());
        for (line, rec) in records {
            let row = rec
                .iter()
                .skip(start)
                .map(|c| {
                    c.trim()
                        .parse::<u32>()
                        .map_err(|_| Error::malformed(path, line, format!("`{c}` is not a non-negative count")))
                })
                .collect::<Result<Vec<u32>>>()?;
            rows.push(row);
        }
        Self::new(headers.into_iter().skip(start).collect(), rows).map_err(|e| Error::malformed(path, 0, e.to_string()))
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    pub fn raters(&self) -> u32 {
        self.raters
    }

    pub fn items(&self) -> usize {
        self.rows.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Kappa {
    pub kappa: f64,
    /// Mean observed per-item agreement.
    pub p_bar: f64,
    /// Expected chance agreement.
    pub p_e: f64,
    /// Every rating used one label, so chance agreement is 1 and kappa is
    /// undefined; `kappa` is reported as 1.
    pub degenerate: bool,
}

pub fn fleiss_kappa(m: &AnnotationMatrix) -> Kappa {
    let n = f64::from(m.raters);
    let items = m.rows.len() as f64;
    let mut totals = vec![0u64; m.labels.len()];
    let mut p_sum = 0.0;
    for row in &m.rows {
        let agree: f64 = row.iter().map(|&c| f64::from(c) * (f64::from(c) - 1.0)).sum();
        p_sum += agree / (n * (n - 1.0));
        for (t, &c) in totals.iter_mut().zip(row) {
            *t += u64::from(c);
        }
    }
    let p_bar = p_sum / items;
    let all = items * n;
    let p_e: f64 = totals.iter().map(|&t| (t as f64 / all).powi(2)).sum();
    if totals.iter().filter(|&&t| t > 0).count() <= 1 {
        return Kappa {
            kappa: 1.0,
            p_bar,
            p_e: 1.0,
            degenerate: true,
        };
    }
    Kappa {
        kappa: (p_bar - p_e) / (1.0 - p_e),
        p_bar,
        p_e,
        degenerate: false,
    }
}
