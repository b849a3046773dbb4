use std::io::Write;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::DemographicProfile;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from};

pub const DEFAULT_REPLICATES: usize = 1000;
pub const MIN_REPLICATES: usize = 100;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PrevalenceEstimate {
    pub topic: usize,
    pub label: String,
    /// Mean proportion in group A minus group B.
    pub mean_diff: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub replicates: usize,
    pub n_a: usize,
    pub n_b: usize,
}

/// Type-7 (linear interpolation) quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn column_means(props: &[Vec<f64>], idx: impl Iterator<Item = usize>, m: usize) -> Vec<f64> {
    let mut sum = vec![0.0; m];
    let mut n = 0usize;
    for d in idx {
        for (s, x) in sum.iter_mut().zip(&props[d]) {
            *s += x;
        }
        n += 1;
    }
    sum.into_iter().map(|s| s / n as f64).collect()
}

/// Difference in mean topic proportion between two document groups, with
/// 95% percentile-bootstrap intervals from `replicates` resamples of
/// documents within each group.
///
/// The two groups are always resampled in a fixed canonical order, so
/// swapping A and B negates `mean_diff` and mirrors the interval exactly.
pub fn prevalence_diff<A, B>(
    props: &[Vec<f64>],
    labels: &[String],
    profiles: &[DemographicProfile],
    group_a: A,
    group_b: B,
    replicates: usize,
    seed: u64,
) -> Result<Vec<PrevalenceEstimate>>
where
    A: Fn(&DemographicProfile) -> bool,
    B: Fn(&DemographicProfile) -> bool,
{
    if props.len() != profiles.len() {
        return Err(Error::InvalidInput("proportions and profiles differ in length".into()));
    }
    if replicates < MIN_REPLICATES {
        return Err(Error::InvalidInput(format!(
            "at least {MIN_REPLICATES} bootstrap replicates are required, got {replicates}"
        )));
    }
    let m = labels.len();
    if props.iter().any(|r| r.len() != m) {
        return Err(Error::InvalidInput("proportion rows do not match the label count".into()));
    }
    let a: Vec<usize> = (0..profiles.len()).filter(|&d| group_a(&profiles[d])).collect();
    let b: Vec<usize> = (0..profiles.len()).filter(|&d| group_b(&profiles[d])).collect();
    if a.is_empty() {
        return Err(Error::EmptyGroup("A".into()));
    }
    if b.is_empty() {
        return Err(Error::EmptyGroup("B".into()));
    }

    let fingerprint = |g: &[usize]| derive_seed(&g.iter().map(|&i| i as u64).collect::<Vec<_>>());
    let swapped = (fingerprint(&b), &b) < (fingerprint(&a), &a);
    let (first, second) = if swapped { (&b, &a) } else { (&a, &b) };

    let diff = |x: Vec<f64>, y: Vec<f64>| x.into_iter().zip(y).map(|(p, q)| p - q).collect::<Vec<f64>>();
    let point = diff(
        column_means(props, first.iter().copied(), m),
        column_means(props, second.iter().copied(), m),
    );
    let boots: Vec<Vec<f64>> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng_from(&[seed, r as u64]);
            let draw = |g: &[usize], rng: &mut rand_chacha::ChaCha8Rng| -> Vec<usize> {
                (0..g.len()).map(|_| g[rng.gen_range(0..g.len())]).collect()
            };
            let x = draw(first, &mut rng);
            let y = draw(second, &mut rng);
            diff(
                column_means(props, x.into_iter(), m),
                column_means(props, y.into_iter(), m),
            )
        })
        .collect();

    let mut out = Vec::with_capacity(m);
    for t in 0..m {
        let mut col: Vec<f64> = boots.iter().map(|r| r[t]).collect();
        col.sort_by(f64::total_cmp);
        let (mut lo, mut hi) = (quantile_sorted(&col, 0.025), quantile_sorted(&col, 0.975));
        let mut mean = point[t];
        // A skewed bootstrap distribution can leave the point estimate outside
        // the percentile interval; widen so the interval always contains it.
        lo = lo.min(mean);
        hi = hi.max(mean);
        if swapped {
            (lo, hi, mean) = (-hi, -lo, -mean);
        }
        out.push(PrevalenceEstimate {
            topic: t,
            label: labels[t].clone(),
            mean_diff: mean,
            ci_low: lo,
            ci_high: hi,
            replicates,
            n_a: a.len(),
            n_b: b.len(),
        });
    }
    Ok(out)
}

pub fn write_prevalence_csv<W: Write>(rows: &[PrevalenceEstimate], w: W) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["topic", "label", "mean_diff", "ci_low", "ci_high"])?;
    for r in rows {
        out.write_record([
            r.topic.to_string().as_str(),
            &r.label,
            &r.mean_diff.to_string(),
            &r.ci_low.to_string(),
            &r.ci_high.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}
