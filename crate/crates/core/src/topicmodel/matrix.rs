use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{tokenize, Corpus, DemographicProfile};
use crate::error::{Error, Result};

const ENGLISH_STOPWORDS: &str = include_str!("../../data/stopwords_en.txt");

/// Surface forms removed before stemming, compared in lowercase.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StopWords(HashSet<String>);

impl StopWords {
    pub fn none() -> Self {
        StopWords::default()
    }

    /// The common 179-word English list.
    pub fn english() -> Self {
        Self::from_lines(ENGLISH_STOPWORDS)
    }

    /// One word per line; blank lines and `#` comments are ignored.
    pub fn from_lines(text: &str) -> Self {
        StopWords(
            text.lines()
                .map(|l| l.trim())
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(|l| l.to_lowercase().replace('\u{2019}', "'"))
                .collect(),
        )
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::from_lines(&text))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    terms: Vec<String>,
    doc_freq: Vec<u32>,
    #[serde(skip)]
    index: HashMap<String, u32>,
}

impl Vocabulary {
    /// Terms are sorted and deduplicated; frequencies default to zero.
    pub fn new(mut terms: Vec<String>) -> Self {
        terms.sort();
        terms.dedup();
        let n = terms.len();
        Self::with_doc_freq(terms, vec![0; n])
    }

    fn with_doc_freq(terms: Vec<String>, doc_freq: Vec<u32>) -> Self {
        let index = terms.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();
        Vocabulary { terms, doc_freq, index }
    }

    pub(crate) fn rebuild_index(&mut self) {
        self.index = self.terms.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn term(&self, id: usize) -> &str {
        &self.terms[id]
    }

    pub fn id(&self, term: &str) -> Option<usize> {
        self.index.get(term).map(|&i| i as usize)
    }

    pub fn doc_freq(&self, id: usize) -> u32 {
        self.doc_freq[id]
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Sparse term counts per document, rows aligned with `profiles` and `doc_ids`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DocTermMatrix {
    rows: Vec<Vec<(u32, u32)>>,
    profiles: Vec<DemographicProfile>,
    doc_ids: Vec<String>,
    n_terms: usize,
}

impl DocTermMatrix {
    /// Each row is a list of (term id, count) pairs; ids must be below `n_terms`.
    pub fn new(
        rows: Vec<Vec<(u32, u32)>>,
        profiles: Vec<DemographicProfile>,
        doc_ids: Vec<String>,
        n_terms: usize,
    ) -> Result<Self> {
        if rows.len() != profiles.len() || rows.len() != doc_ids.len() {
            return Err(Error::InvalidInput("matrix rows, profiles and ids differ in length".into()));
        }
        let mut clean = Vec::with_capacity(rows.len());
        for row in rows {
            let mut merged: BTreeMap<u32, u32> = BTreeMap::new();
            for (t, c) in row {
                if t as usize >= n_terms {
                    return Err(Error::InvalidInput(format!("term id {t} out of range")));
                }
                if c > 0 {
                    *merged.entry(t).or_insert(0) += c;
                }
            }
            clean.push(merged.into_iter().collect());
        }
        Ok(DocTermMatrix {
            rows: clean,
            profiles,
            doc_ids,
            n_terms,
        })
    }

    pub fn rows(&self) -> &[Vec<(u32, u32)>] {
        &self.rows
    }

    pub fn profiles(&self) -> &[DemographicProfile] {
        &self.profiles
    }

    pub fn doc_ids(&self) -> &[String] {
        &self.doc_ids
    }

    pub fn n_docs(&self) -> usize {
        self.rows.len()
    }

    pub fn n_terms(&self) -> usize {
        self.n_terms
    }

    pub fn row_total(&self, d: usize) -> u64 {
        self.rows[d].iter().map(|&(_, c)| u64::from(c)).sum()
    }

    pub fn total_tokens(&self) -> u64 {
        (0..self.n_docs()).map(|d| self.row_total(d)).sum()
    }
}

/// Stemmed bag-of-words matrix. Stopwords are dropped by surface form,
/// then stems seen in fewer than `min_df` documents. Documents left with
/// no terms are dropped.
pub fn build_matrix(corpus: &Corpus, min_df: usize, stopwords: &StopWords) -> Result<(Vocabulary, DocTermMatrix)> {
    if corpus.is_empty() {
        return Err(Error::InvalidInput("cannot build a matrix from an empty corpus".into()));
    }
    if min_df > corpus.len() {
        return Err(Error::InvalidInput(format!(
            "min_df {min_df} exceeds the number of documents ({})",
            corpus.len()
        )));
    }
    let docs: Vec<Vec<String>> = corpus
        .iter()
        .map(|d| {
            let ts = tokenize(&d.text);
            ts.tokens()
                .iter()
                .zip(ts.stems())
                .filter(|(t, _)| !stopwords.contains(t))
                .map(|(_, s)| s.clone())
                .collect()
        })
        .collect();

    let mut df: BTreeMap<&str, u32> = BTreeMap::new();
    for doc in &docs {
        let uniq: HashSet<&str> = doc.iter().map(String::as_str).collect();
        for s in uniq {
            *df.entry(s).or_insert(0) += 1;
        }
    }
    let (terms, freqs): (Vec<String>, Vec<u32>) = df
        .into_iter()
        .filter(|&(_, n)| n as usize >= min_df.max(1))
        .map(|(t, n)| (t.to_string(), n))
        .unzip();
    if terms.is_empty() {
        return Err(Error::InvalidInput("vocabulary is empty after filtering".into()));
    }
    let vocab = Vocabulary::with_doc_freq(terms, freqs);

    let mut rows = Vec::with_capacity(docs.len());
    let mut profiles = Vec::with_capacity(docs.len());
    let mut ids = Vec::with_capacity(docs.len());
    let mut dropped = 0;
    for (doc, stems) in corpus.iter().zip(&docs) {
        let mut counts: BTreeMap<u32, u32> = BTreeMap::new();
        for s in stems {
            if let Some(id) = vocab.id(s) {
                *counts.entry(id as u32).or_insert(0) += 1;
            }
        }
        if counts.is_empty() {
            dropped += 1;
            continue;
        }
        rows.push(counts.into_iter().collect());
        profiles.push(doc.profile);
        ids.push(doc.id.clone());
    }
    if dropped > 0 {
        log::warn!("dropped {dropped} documents with no terms left after filtering");
    }
    let n = vocab.len();
    Ok((vocab, DocTermMatrix::new(rows, profiles, ids, n)?))
}
