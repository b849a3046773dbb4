//! Averaged word-embedding similarity between topic keyword sets.

mod embeddings;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::Write;

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{tokenize, Corpus};
use crate::error::{Error, Result};
use crate::rng::rng_from;

pub use embeddings::EmbeddingTable;

pub const DEFAULT_BASELINE_TRIALS: usize = 1000;
pub const DEFAULT_SET_SIZE: usize = 30;
/// Most frequent vocabulary entries left out of random keyword sets.
pub const DEFAULT_EXCLUDE_TOP: usize = 1000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OovPolicy {
    /// Drop keywords missing from the table.
    #[default]
    Skip,
    /// Replace a missing stem with its most frequent surface form, then drop.
    BackoffUnstem,
    /// Fail on the first missing keyword.
    Error,
}

/// Most frequent surface form of each Porter stem in a corpus.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SurfaceForms(HashMap<String, String>);

impl SurfaceForms {
    pub fn from_corpus(corpus: &Corpus) -> Self {
        let mut counts: HashMap<String, BTreeMap<String, u64>> = HashMap::new();
        for doc in corpus {
            let ts = tokenize(&doc.text);
            for (tok, stem) in ts.tokens().iter().zip(ts.stems()) {
                *counts.entry(stem.clone()).or_default().entry(tok.clone()).or_insert(0) += 1;
            }
        }
        SurfaceForms(
            counts
                .into_iter()
                .map(|(stem, forms)| {
                    // BTreeMap order makes the lexicographically first form win ties.
                    let best = forms
                        .iter()
                        .fold(None::<(&String, u64)>, |acc, (f, &n)| match acc {
                            Some((_, m)) if m >= n => acc,
                            _ => Some((f, n)),
                        })
                        .map(|(f, _)| f.clone())
                        .unwrap_or_default();
                    (stem, best)
                })
                .collect(),
        )
    }

    pub fn get(&self, stem: &str) -> Option<&str> {
        self.0.get(stem).map(String::as_str)
    }

    pub fn insert(&mut self, stem: impl Into<String>, surface: impl Into<String>) {
        self.0.insert(stem.into(), surface.into());
    }
}

fn dedup(words: &[String]) -> Vec<&str> {
    let mut seen = HashSet::new();
    words.iter().map(String::as_str).filter(|w| seen.insert(*w)).collect()
}

/// Mean vector of the deduplicated keywords found in `table`, and the
/// keywords that could not be resolved.
pub fn set_vector(
    table: &EmbeddingTable,
    keywords: &[String],
    policy: OovPolicy,
    surface: Option<&SurfaceForms>,
) -> Result<(Vec<f64>, Vec<String>)> {
    if keywords.is_empty() {
        return Err(Error::InvalidInput("keyword set is empty".into()));
    }
    let mut rows = Vec::new();
    let mut used = HashSet::new();
    let mut oov = Vec::new();
    for kw in dedup(keywords) {
        let resolved = match table.index_of(kw) {
            Some(i) => Some(i),
            None => match policy {
                OovPolicy::Skip => None,
                OovPolicy::Error => return Err(Error::OutOfVocabulary(kw.to_string())),
                OovPolicy::BackoffUnstem => surface.and_then(|s| s.get(kw)).and_then(|w| table.index_of(w)),
            },
        };
        match resolved {
            Some(i) => {
                if used.insert(i) {
                    rows.push(i);
                }
            }
            None => oov.push(kw.to_string()),
        }
    }
    if rows.is_empty() {
        return Err(Error::AllOutOfVocabulary);
    }
    Ok((mean_rows(table, &rows), oov))
}

fn mean_rows(table: &EmbeddingTable, rows: &[usize]) -> Vec<f64> {
    let mut v = vec![0.0f64; table.dim()];
    for &i in rows {
        for (s, &x) in v.iter_mut().zip(table.row(i)) {
            *s += f64::from(x);
        }
    }
    let n = rows.len() as f64;
    v.iter_mut().for_each(|x| *x /= n);
    v
}

pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64> {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Similarity {
    pub cosine: f64,
    pub oov_a: Vec<String>,
    pub oov_b: Vec<String>,
}

pub fn topic_similarity(
    table: &EmbeddingTable,
    keywords_a: &[String],
    keywords_b: &[String],
    policy: OovPolicy,
    surface: Option<&SurfaceForms>,
) -> Result<Similarity> {
    let (va, oov_a) = set_vector(table, keywords_a, policy, surface)?;
    let (vb, oov_b) = set_vector(table, keywords_b, policy, surface)?;
    Ok(Similarity {
        cosine: cosine(&va, &vb)?,
        oov_a,
        oov_b,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Baseline {
    pub mean: f64,
    pub sd: f64,
    pub trials: usize,
    pub set_size: usize,
    pub exclude_top: usize,
    pub seed: u64,
}

/// Mean and sample standard deviation of the cosine between two disjoint
/// random keyword sets drawn from the table, skipping its `exclude_top`
/// first (most frequent) entries.
pub fn random_baseline(
    table: &EmbeddingTable,
    set_size: usize,
    trials: usize,
    seed: u64,
    exclude_top: usize,
) -> Result<Baseline> {
    if set_size == 0 {
        return Err(Error::InvalidInput("set_size must be at least 1".into()));
    }
    if trials < 2 {
        return Err(Error::InvalidInput("at least two trials are required".into()));
    }
    let pool = table.len().saturating_sub(exclude_top);
    if pool < 2 * set_size {
        return Err(Error::InvalidInput(format!(
            "vocabulary of {pool} eligible words is smaller than 2 x {set_size}"
        )));
    }
    let cosines: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng_from(&[seed, t as u64]);
            let idx: Vec<usize> = sample(&mut rng, pool, 2 * set_size)
                .into_iter()
                .map(|i| i + exclude_top)
                .collect();
            let a = mean_rows(table, &idx[..set_size]);
            let b = mean_rows(table, &idx[set_size..]);
            cosine(&a, &b)
        })
        .collect::<Result<_>>()?;
    let n = cosines.len() as f64;
    let mean = cosines.iter().sum::<f64>() / n;
    let var = cosines.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(Baseline {
        mean,
        sd: var.sqrt(),
        trials,
        set_size,
        exclude_top,
        seed,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledSet {
    pub label: String,
    pub keywords: Vec<String>,
}

impl LabeledSet {
    pub fn new(label: impl Into<String>, keywords: &[&str]) -> Self {
        LabeledSet {
            label: label.into(),
            keywords: keywords.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MatchedPair {
    pub label_a: String,
    pub label_b: String,
    pub keywords_a: Vec<String>,
    pub keywords_b: Vec<String>,
    pub cosine: f64,
    pub oov_a: Vec<String>,
    pub oov_b: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SimilarityReport {
    pub pairs: Vec<MatchedPair>,
    pub unmatched_a: Vec<String>,
    pub unmatched_b: Vec<String>,
    pub baseline: Option<Baseline>,
}

impl SimilarityReport {
    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["topic", "cosine", "oov_a", "oov_b"])?;
        for p in &self.pairs {
            out.write_record([
                format!("{} ~ {}", p.label_a, p.label_b).as_str(),
                &p.cosine.to_string(),
                &p.oov_a.join(" "),
                &p.oov_b.join(" "),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

fn merge_keywords(sets: &[&LabeledSet]) -> Vec<String> {
    let mut seen = HashSet::new();
    sets.iter()
        .flat_map(|s| s.keywords.iter())
        .filter(|k| seen.insert(k.as_str()))
        .cloned()
        .collect()
}

/// Links every set to its most similar set on the other side (when the
/// cosine reaches `threshold`), then merges connected groups: a topic that
/// is the best match of several others absorbs them, and the merged keyword
/// sets are compared once more. Groups whose final cosine falls below
/// `threshold`, and sets with no link, are reported unmatched.
pub fn match_topics(
    table: &EmbeddingTable,
    sets_a: &[LabeledSet],
    sets_b: &[LabeledSet],
    threshold: f64,
    policy: OovPolicy,
    surface: Option<&SurfaceForms>,
) -> Result<SimilarityReport> {
    let vec_of = |s: &LabeledSet| match set_vector(table, &s.keywords, policy, surface) {
        Ok((v, _)) => Ok(Some(v)),
        Err(Error::AllOutOfVocabulary) => Ok(None),
        Err(e) => Err(e),
    };
    let va = sets_a.iter().map(vec_of).collect::<Result<Vec<_>>>()?;
    let vb = sets_b.iter().map(vec_of).collect::<Result<Vec<_>>>()?;
    let (na, nb) = (sets_a.len(), sets_b.len());
    let mut sim = vec![vec![f64::NAN; nb]; na];
    for i in 0..na {
        for j in 0..nb {
            if let (Some(a), Some(b)) = (&va[i], &vb[j]) {
                sim[i][j] = cosine(a, b).unwrap_or(f64::NAN);
            }
        }
    }
    // nodes 0..na are A sets, na..na+nb are B sets
    let mut parent: Vec<usize> = (0..na + nb).collect();
    let mut linked = vec![false; na + nb];
    let mut link = |parent: &mut Vec<usize>, i: usize, j: usize| {
        linked[i] = true;
        linked[na + j] = true;
        let (ri, rj) = (find(parent, i), find(parent, na + j));
        if ri != rj {
            parent[ri.max(rj)] = ri.min(rj);
        }
    };
    let best = |vals: &mut dyn Iterator<Item = (usize, f64)>| {
        vals.filter(|(_, c)| !c.is_nan())
            .fold(None::<(usize, f64)>, |acc, (k, c)| match acc {
                Some((_, b)) if b >= c => acc,
                _ => Some((k, c)),
            })
    };
    for i in 0..na {
        if let Some((j, c)) = best(&mut (0..nb).map(|j| (j, sim[i][j]))) {
            if c >= threshold {
                link(&mut parent, i, j);
            }
        }
    }
    for j in 0..nb {
        if let Some((i, c)) = best(&mut (0..na).map(|i| (i, sim[i][j]))) {
            if c >= threshold {
                link(&mut parent, i, j);
            }
        }
    }

    let mut groups: BTreeMap<usize, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
    for i in 0..na {
        if linked[i] {
            groups.entry(find(&mut parent, i)).or_default().0.push(i);
        }
    }
    for j in 0..nb {
        if linked[na + j] {
            groups.entry(find(&mut parent, na + j)).or_default().1.push(j);
        }
    }

    let mut report = SimilarityReport::default();
    let mut matched_a = vec![false; na];
    let mut matched_b = vec![false; nb];
    for (ai, bj) in groups.into_values() {
        let a: Vec<&LabeledSet> = ai.iter().map(|&i| &sets_a[i]).collect();
        let b: Vec<&LabeledSet> = bj.iter().map(|&j| &sets_b[j]).collect();
        let (ka, kb) = (merge_keywords(&a), merge_keywords(&b));
        let s = topic_similarity(table, &ka, &kb, policy, surface)?;
        if s.cosine < threshold {
            continue;
        }
        ai.iter().for_each(|&i| matched_a[i] = true);
        bj.iter().for_each(|&j| matched_b[j] = true);
        let join = |v: &[&LabeledSet]| v.iter().map(|s| s.label.as_str()).collect::<Vec<_>>().join(" + ");
        report.pairs.push(MatchedPair {
            label_a: join(&a),
            label_b: join(&b),
            keywords_a: ka,
            keywords_b: kb,
            cosine: s.cosine,
            oov_a: s.oov_a,
            oov_b: s.oov_b,
        });
    }
    report.unmatched_a = (0..na).filter(|&i| !matched_a[i]).map(|i| sets_a[i].label.clone()).collect();
    report.unmatched_b = (0..nb).filter(|&j| !matched_b[j]).map(|j| sets_b[j].label.clone()).collect();
    Ok(report)
}


#[cfg(test)]
mod tests {
    use super::fixture::table;
    use super::*;
    use crate::corpus::fixtures::doc;
    use crate::corpus::{Gender, Phase, Race};

    fn kw(words: &[&str]) -> Vec<String> {
        words.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn single_word_vector_exact() {
        let t = table();
        let (v, oov) = set_vector(&t, &kw(&["money"]), OovPolicy::Skip, None).unwrap();
        assert_eq!(v, vec![1.0, f64::from(0.1f32), 0.0, 0.0]);
        assert!(oov.is_empty());
    }

    #[test]
    fn mean_of_two() {
        let t = table();
        let (v, _) = set_vector(&t, &kw(&["money", "bills"]), OovPolicy::Skip, None).unwrap();
        let want: Vec<f64> = t
            .vector("money")
            .unwrap()
            .iter()
            .zip(t.vector("bills").unwrap())
            .map(|(a, b)| (f64::from(*a) + f64::from(*b)) / 2.0)
            .collect();
        assert_eq!(v, want);
    }

    #[test]
    fn oov_policies() {
        let t = table();
        let (_, oov) = set_vector(&t, &kw(&["monei", "bills"]), OovPolicy::Skip, None).unwrap();
        assert_eq!(oov, ["monei"]);
        assert!(matches!(
            set_vector(&t, &kw(&["monei", "bills"]), OovPolicy::Error, None),
            Err(Error::OutOfVocabulary(w)) if w == "monei"
        ));
        assert!(matches!(
            set_vector(&t, &kw(&["sourc"]), OovPolicy::Skip, None),
            Err(Error::AllOutOfVocabulary)
        ));
        let c = Corpus::new(
            vec![doc("1", "Money money monies worried worry", Race::Asian, Gender::Man, Phase::PreCovid)],
            "",
        )
        .unwrap();
        let forms = SurfaceForms::from_corpus(&c);
        assert_eq!(forms.get("monei"), Some("money"));
        assert_eq!(forms.get("worri"), Some("worried"));
        let (v, oov) = set_vector(&t, &kw(&["monei"]), OovPolicy::BackoffUnstem, Some(&forms)).unwrap();
        assert!(oov.is_empty());
        assert_eq!(v[0], 1.0);
    }

    #[test]
    fn duplicates_and_order_ignored() {
        let t = table();
        let a = set_vector(&t, &kw(&["money", "bills", "debt"]), OovPolicy::Skip, None).unwrap().0;
        let b = set_vector(&t, &kw(&["debt", "money", "bills", "money"]), OovPolicy::Skip, None).unwrap().0;
        let c = cosine(&a, &b).unwrap();
        assert!((c - 1.0).abs() < 1e-12);
    }

    #[test]
    fn identical_sets_and_symmetry() {
        let t = table();
        let a = kw(&["money", "bills"]);
        let b = kw(&["mother", "worried"]);
        let s = topic_similarity(&t, &a, &a, OovPolicy::Skip, None).unwrap();
        assert!((s.cosine - 1.0).abs() < 1e-9);
        let ab = topic_similarity(&t, &a, &b, OovPolicy::Skip, None).unwrap().cosine;
        let ba = topic_similarity(&t, &b, &a, OovPolicy::Skip, None).unwrap().cosine;
        assert_eq!(ab, ba);
    }

    #[test]
    fn zero_vector_is_error() {
        let t = EmbeddingTable::from_pairs(2, [("z".to_string(), vec![0.0, 0.0]), ("a".to_string(), vec![1.0, 0.0])]);
        assert!(matches!(
            topic_similarity(&t, &kw(&["z"]), &kw(&["a"]), OovPolicy::Skip, None),
            Err(Error::ZeroNorm)
        ));
    }

    #[test]
    fn baseline_reproducible() {
        let t = table();
        let a = random_baseline(&t, 2, 200, 4, 1).unwrap();
        let b = random_baseline(&t, 2, 200, 4, 1).unwrap();
        assert_eq!(a, b);
        assert!(a.mean > -1.0 && a.mean < 1.0);
        assert!(random_baseline(&t, 5, 200, 4, 1).is_err());
    }

    #[test]
    fn matching_merges_and_reports_unmatched() {
        let t = table();
        let a = vec![
            LabeledSet::new("finance", &["money", "bills"]),
            LabeledSet::new("family", &["mother", "father"]),
            LabeledSet::new("school", &["school", "exam"]),
        ];
        let b = vec![
            LabeledSet::new("debt", &["debt"]),
            LabeledSet::new("bills", &["bills", "money"]),
            LabeledSet::new("family", &["family", "father"]),
        ];
        let r = match_topics(&t, &a, &b, 0.9, OovPolicy::Skip, None).unwrap();
        assert_eq!(r.pairs.len(), 2);
        assert_eq!(r.pairs[0].label_a, "finance");
        assert_eq!(r.pairs[0].label_b, "debt + bills");
        assert_eq!(r.pairs[0].keywords_b, ["debt", "bills", "money"]);
        assert_eq!(r.unmatched_a, ["school"]);
        assert!(r.unmatched_b.is_empty());
        assert!(r.pairs.iter().all(|p| p.cosine >= 0.9 && p.cosine <= 1.0));
    }

    #[test]
    fn identical_single_sets_match_at_one() {
        let t = table();
        let a = vec![LabeledSet::new("x", &["money", "debt"])];
        let r = match_topics(&t, &a, &a, 0.5, OovPolicy::Skip, None).unwrap();
        assert_eq!(r.pairs.len(), 1);
        assert!((r.pairs[0].cosine - 1.0).abs() < 1e-9);
    }

    #[test]
    fn report_csv() {
        let t = table();
        let a = vec![LabeledSet::new("x", &["money", "monei"])];
        let r = match_topics(&t, &a, &a, 0.5, OovPolicy::Skip, None).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("topic,cosine,oov_a,oov_b\nx ~ x,1,monei,monei\n"), "{s}");
        assert!(r.to_json().unwrap().contains("\"unmatched_a\""));
    }
}
