//! Log-odds ratios with an informative Dirichlet prior between two groups'
//! category counts.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lexicon::CategoryCounts;

/// Pseudo-count added to every reference category before normalizing.
pub const PRIOR_EPSILON: f64 = 0.01;

pub const DEFAULT_PRIOR_SCALE: f64 = 500.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PriorVector {
    alpha: BTreeMap<String, f64>,
    alpha0: f64,
    source: String,
}

impl PriorVector {
    pub fn new(alpha: BTreeMap<String, f64>, source: impl Into<String>) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::InvalidInput("prior has no categories".into()));
        }
        if let Some((c, a)) = alpha.iter().find(|(_, a)| !(a.is_finite() && **a > 0.0)) {
            return Err(Error::InvalidInput(format!("prior for `{c}` must be positive, got {a}")));
        }
        let alpha0 = alpha.values().sum();
        Ok(PriorVector {
            alpha,
            alpha0,
            source: source.into(),
        })
    }

    pub fn alpha(&self) -> &BTreeMap<String, f64> {
        &self.alpha
    }

    pub fn alpha0(&self) -> f64 {
        self.alpha0
    }

    pub fn get(&self, category: &str) -> Option<f64> {
        self.alpha.get(category).copied()
    }

    pub fn source(&self) -> &str {
        &self.source
    }
}

/// `alpha_c = scale * (y_c + eps) / (sum(y) + eps * |C|)`, so `alpha0 = scale`.
pub fn prior_from_counts(reference: &CategoryCounts, scale: f64) -> Result<PriorVector> {
    check_scale(scale)?;
    let total: u64 = reference.counts.values().sum();
    if total == 0 {
        return Err(Error::InvalidInput("reference counts are all zero".into()));
    }
    let denom = total as f64 + PRIOR_EPSILON * reference.counts.len() as f64;
    let alpha = reference
        .counts
        .iter()
        .map(|(c, &y)| (c.clone(), scale * (y as f64 + PRIOR_EPSILON) / denom))
        .collect();
    PriorVector::new(alpha, format!("reference counts (scale {scale})"))
}

/// Equal weight on every category with total concentration `scale`.
pub fn uniform_prior<I, S>(categories: I, scale: f64) -> Result<PriorVector>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    check_scale(scale)?;
    let names: Vec<String> = categories.into_iter().map(Into::into).collect();
    let a = scale / names.len().max(1) as f64;
    PriorVector::new(
        names.into_iter().map(|c| (c, a)).collect(),
        format!("uniform (scale {scale})"),
    )
}

fn check_scale(scale: f64) -> Result<()> {
    if scale.is_finite() && scale > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("prior scale must be positive, got {scale}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogOdds {
    pub delta: f64,
    pub variance: f64,
    pub zscore: f64,
}

/// Core estimator over parallel arrays. `n_i` and `n_j` are the array sums;
/// `alpha0` is the sum of `alpha`. Fails with the index of the first
/// category whose denominator is not positive.
pub fn log_odds_arrays(y_i: &[f64], y_j: &[f64], alpha: &[f64]) -> std::result::Result<Vec<LogOdds>, usize> {
    assert!(y_i.len() == alpha.len() && y_j.len() == alpha.len(), "array lengths differ");
    let n_i: f64 = y_i.iter().sum();
    let n_j: f64 = y_j.iter().sum();
    let alpha0: f64 = alpha.iter().sum();
    let mut out = Vec::with_capacity(alpha.len());
    for c in 0..alpha.len() {
        let (yi, yj, a) = (y_i[c], y_j[c], alpha[c]);
        let rest_i = n_i + alpha0 - yi - a;
        let rest_j = n_j + alpha0 - yj - a;
        if !(rest_i > 0.0 && rest_j > 0.0 && yi + a > 0.0 && yj + a > 0.0) {
            return Err(c);
        }
        let delta = ((yi + a) / rest_i).ln() - ((yj + a) / rest_j).ln();
        let variance = 1.0 / (yi + a) + 1.0 / (yj + a);
        out.push(LogOdds {
            delta,
            variance,
            zscore: delta / variance.sqrt(),
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LogOddsRow {
    pub category: String,
    pub delta: f64,
    pub variance: f64,
    pub zscore: f64,
}

/// One row per prior category, ordered by category name.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LogOddsResult {
    pub rows: Vec<LogOddsRow>,
}

impl LogOddsResult {
    pub fn get(&self, category: &str) -> Option<&LogOddsRow> {
        self.rows.iter().find(|r| r.category == category)
    }

    pub fn write_csv<W: Write>(&self, w: W, group_i: &str, group_j: &str) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["group_i", "group_j", "category", "delta", "variance", "zscore"])?;
        for r in &self.rows {
            out.write_record([
                group_i,
                group_j,
                &r.category,
                &r.delta.to_string(),
                &r.variance.to_string(),
                &r.zscore.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

pub fn log_odds(counts_i: &CategoryCounts, counts_j: &CategoryCounts, prior: &PriorVector) -> Result<LogOddsResult> {
    for counts in [counts_i, counts_j] {
        if let Some(c) = counts.counts.keys().find(|c| !prior.alpha.contains_key(*c)) {
            return Err(Error::InvalidInput(format!("category `{c}` has no prior")));
        }
    }
    let names: Vec<&String> = prior.alpha.keys().collect();
    let y = |counts: &CategoryCounts| names.iter().map(|c| counts.get(c) as f64).collect::<Vec<_>>();
    let alpha: Vec<f64> = prior.alpha.values().copied().collect();
    let stats = log_odds_arrays(&y(counts_i), &y(counts_j), &alpha)
        .map_err(|c| Error::NonPositiveDenominator(names[c].clone()))?;
    Ok(LogOddsResult {
        rows: names
            .into_iter()
            .zip(stats)
            .map(|(c, s)| LogOddsRow {
                category: c.clone(),
                delta: s.delta,
                variance: s.variance,
                zscore: s.zscore,
            })
            .collect(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Positive,
    Negative,
}

/// The `k` categories with the largest (positive) or smallest (negative)
/// delta, by |delta| descending with ties broken by name.
pub fn top_k(result: &LogOddsResult, k: usize, direction: Direction) -> Vec<(String, f64)> {
    let k = if k > result.rows.len() {
        log::warn!("top_k: k={k} exceeds {} categories; clamping", result.rows.len());
        result.rows.len()
    } else {
        k
    };
    let mut rows: Vec<&LogOddsRow> = result.rows.iter().collect();
    let key = |r: &LogOddsRow| match direction {
        Direction::Positive => r.delta,
        Direction::Negative => -r.delta,
    };
    rows.sort_by(|a, b| {
        key(b)
            .partial_cmp(&key(a))
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.category.cmp(&b.category))
    });
    rows.into_iter().take(k).map(|r| (r.category.clone(), r.delta)).collect()
}

/// Reads `category,count` rows; extra columns are ignored.
pub fn load_reference_counts(path: impl AsRef<Path>) -> Result<CategoryCounts> {
    let path = path.as_ref();
    let mut rdr = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::malformed(path, 0, format!("{other:?}")),
    })?;
    #[derive(Deserialize)]
    struct Row {
        category: String,
        count: u64,
    }
    let mut counts = BTreeMap::new();
    for (i, row) in rdr.deserialize::<Row>().enumerate() {
        let row = row.map_err(|e| Error::malformed(path, i + 2, e.to_string()))?;
        if counts.insert(row.category.clone(), row.count).is_some() {
            return Err(Error::malformed(path, i + 2, format!("duplicate category `{}`", row.category)));
        }
    }
    let total_tokens = counts.values().sum();
    Ok(CategoryCounts { counts, total_tokens })
}

/// Sidecar describing how a log-odds table was produced.
#[derive(Clone, Debug, Serialize)]
pub struct LogOddsMetadata {
    pub group_i: String,
    pub group_j: String,
    pub prior_source: String,
    pub prior_scale: f64,
    pub prior_epsilon: f64,
    pub lexicon: String,
    pub tokens_i: u64,
    pub tokens_j: u64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(pairs: &[(&str, u64)]) -> CategoryCounts {
        let counts: BTreeMap<String, u64> = pairs.iter().map(|(c, n)| (c.to_string(), *n)).collect();
        CategoryCounts {
            total_tokens: counts.values().sum(),
            counts,
        }
    }

    #[test]
    fn symmetric_reference_prior() {
        let p = prior_from_counts(&counts(&[("a", 50), ("b", 50)]), 10.0).unwrap();
        assert!((p.get("a").unwrap() - 5.0).abs() < 1e-12);
        assert!((p.get("b").unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn skewed_reference_prior() {
        // 100 * (90.01 / 100.02) and 100 * (10.01 / 100.02)
        let p = prior_from_counts(&counts(&[("a", 90), ("b", 10)]), 100.0).unwrap();
        assert!((p.get("a").unwrap() - 89.992_001_599_680_07).abs() < 1e-9);
        assert!((p.get("b").unwrap() - 10.007_998_400_319_936).abs() < 1e-9);
        assert!((p.alpha0() - 100.0).abs() < 1e-9);
    }

    #[test]
    fn single_category_prior() {
        let p = prior_from_counts(&counts(&[("a", 3)]), 1.0).unwrap();
        assert!((p.get("a").unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn prior_errors() {
        assert!(prior_from_counts(&counts(&[("a", 0), ("b", 0)]), 1.0).is_err());
        assert!(prior_from_counts(&counts(&[("a", 1)]), 0.0).is_err());
        assert!(uniform_prior(["a"], -1.0).is_err());
    }

    #[test]
    fn worked_example() {
        // ln(11/91) - ln(6/96), 1/11 + 1/6
        let r = log_odds_arrays(&[10.0, 90.0], &[5.0, 95.0], &[1.0, 1.0]).unwrap();
        assert!((r[0].delta - 0.659_624_488_521_301_6).abs() < 1e-12);
        assert!((r[0].variance - 0.257_575_757_575_757_6).abs() < 1e-12);
        assert!((r[0].zscore - 1.299_703_467_233_544_8).abs() < 1e-12);
    }

    #[test]
    fn identical_groups_are_null() {
        let c = counts(&[("a", 3), ("b", 7), ("c", 0)]);
        let p = uniform_prior(["a", "b", "c"], 5.0).unwrap();
        let r = log_odds(&c, &c, &p).unwrap();
        assert!(r.rows.iter().all(|r| r.delta == 0.0 && r.zscore == 0.0));
    }

    #[test]
    fn swap_negates() {
        let a = counts(&[("a", 3), ("b", 7)]);
        let b = counts(&[("a", 9), ("b", 2)]);
        let p = uniform_prior(["a", "b"], 2.0).unwrap();
        let ab = log_odds(&a, &b, &p).unwrap();
        let ba = log_odds(&b, &a, &p).unwrap();
        for (x, y) in ab.rows.iter().zip(&ba.rows) {
            assert_eq!(x.delta, -y.delta);
            assert_eq!(x.variance, y.variance);
        }
    }

    #[test]
    fn non_positive_denominator_names_category() {
        let a = counts(&[("a", 0), ("b", 0)]);
        let alpha = BTreeMap::from([("a".to_string(), 1.0), ("b".to_string(), 1e-300)]);
        let p = PriorVector::new(alpha, "t").unwrap();
        // n + alpha0 - y - alpha_a underflows to zero for category a
        match log_odds(&a, &a, &p) {
            Err(Error::NonPositiveDenominator(c)) => assert_eq!(c, "a"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_category_rejected() {
        let p = uniform_prior(["a"], 1.0).unwrap();
        assert!(log_odds(&counts(&[("z", 1)]), &counts(&[]), &p).is_err());
    }

    #[test]
    fn top_k_rules() {
        let r = LogOddsResult {
            rows: ["a", "b", "c", "d"]
                .iter()
                .zip([0.5, -2.0, 1.5, 0.5])
                .map(|(c, d)| LogOddsRow {
                    category: c.to_string(),
                    delta: d,
                    variance: 1.0,
                    zscore: d,
                })
                .collect(),
        };
        let names = |v: Vec<(String, f64)>| v.into_iter().map(|x| x.0).collect::<Vec<_>>();
        assert_eq!(names(top_k(&r, 3, Direction::Positive)), ["c", "a", "d"]);
        assert_eq!(names(top_k(&r, 1, Direction::Negative)), ["b"]);
        assert_eq!(top_k(&r, 10, Direction::Positive).len(), 4);

        let zeros = LogOddsResult {
            rows: r.rows.iter().map(|x| LogOddsRow { delta: 0.0, ..x.clone() }).collect(),
        };
        assert_eq!(names(top_k(&zeros, 2, Direction::Negative)), ["a", "b"]);
    }

    #[test]
    fn csv_columns() {
        let p = uniform_prior(["a", "b"], 1.0).unwrap();
        let c = counts(&[("a", 1), ("b", 1)]);
        let mut buf = Vec::new();
        log_odds(&c, &c, &p).unwrap().write_csv(&mut buf, "x", "y").unwrap();
        assert!(String::from_utf8(buf)
            .unwrap()
            .starts_with("group_i,group_j,category,delta,variance,zscore\nx,y,a,0,"));
    }

    #[test]
    fn reference_counts_csv() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("ref.csv");
        std::fs::write(&p, "category,count\nfemale,10\nmale,5\n").unwrap();
        let c = load_reference_counts(&p).unwrap();
        assert_eq!(c.get("female"), 10);
        assert_eq!(c.total_tokens, 15);
        std::fs::write(&p, "category,count\nfemale,x\n").unwrap();
        assert!(matches!(load_reference_counts(&p), Err(Error::Malformed { line: 2, .. })));
    }
}
