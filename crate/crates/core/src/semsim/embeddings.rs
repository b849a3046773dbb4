use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};

const PARSE_BATCH: usize = 16_384;

/// Word vectors in file order. For GloVe files that order is by corpus
/// frequency, which the random baseline relies on.
#[derive(Clone, Debug, Default)]
pub struct EmbeddingTable {
    dim: usize,
    words: Vec<String>,
    index: HashMap<String, u32>,
    data: Vec<f32>,
    rejected: usize,
}

fn parse_line(line: &str, dim: usize) -> Option<(String, Vec<f32>)> {
    let line = line.trim_end();
    let mut parts = line.split(' ');
    let word = parts.next().filter(|w| !w.is_empty())?;
    let mut v = Vec::with_capacity(dim);
    for p in parts {
        if p.is_empty() {
            continue;
        }
        v.push(p.parse::<f32>().ok()?);
        if v.len() > dim {
            return None;
        }
    }
    (v.len() == dim).then(|| (word.to_lowercase(), v))
}

impl EmbeddingTable {
    /// Builds a table from (word, vector) pairs; the first occurrence of a
    /// word wins and vectors of the wrong dimension are counted as rejected.
    pub fn from_pairs<I>(dim: usize, pairs: I) -> Self
    where
        I: IntoIterator<Item = (String, Vec<f32>)>,
    {
        let mut t = EmbeddingTable {
            dim,
            ..EmbeddingTable::default()
        };
        for (w, v) in pairs {
            t.push(w, &v);
        }
        t
    }

    fn push(&mut self, word: String, v: &[f32]) {
        if v.len() != self.dim {
            self.rejected += 1;
            return;
        }
        if self.index.contains_key(&word) {
            return;
        }
        self.index.insert(word.clone(), self.words.len() as u32);
        self.words.push(word);
        self.data.extend_from_slice(v);
    }

    /// Reads the GloVe text format: a word followed by `dim` space-separated
    /// values per line. Words are lowercased.
    pub fn load(path: impl AsRef<Path>, dim: usize) -> Result<Self> {
        let path = path.as_ref();
        if dim == 0 {
            return Err(Error::InvalidInput("embedding dimension must be positive".into()));
        }
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reader = BufReader::with_capacity(1 << 20, file);
        let mut table = EmbeddingTable {
            dim,
            ..EmbeddingTable::default()
        };
        let mut batch: Vec<String> = Vec::with_capacity(PARSE_BATCH);
        loop {
            batch.clear();
            for _ in 0..PARSE_BATCH {
                let mut line = String::new();
                if reader.read_line(&mut line).map_err(|e| Error::io(path, e))? == 0 {
                    break;
                }
                batch.push(line);
            }
            if batch.is_empty() {
                break;
            }
            let parsed: Vec<Option<(String, Vec<f32>)>> = batch.par_iter().map(|l| parse_line(l, dim)).collect();
            for (line, p) in batch.iter().zip(parsed) {
                match p {
                    Some((w, v)) => table.push(w, &v),
                    None if line.trim().is_empty() => {}
                    None => table.rejected += 1,
                }
            }
        }
        if table.is_empty() {
            return Err(Error::malformed(path, 0, format!("no valid {dim}-dimensional embedding rows")));
        }
        if table.rejected > 0 {
            log::warn!("{}: rejected {} malformed rows", path.display(), table.rejected);
        }
        log::info!("{}: {} embeddings of dimension {dim}", path.display(), table.len());
        Ok(table)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn rejected(&self) -> usize {
        self.rejected
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).map(|&i| i as usize)
    }

    pub fn vector(&self, word: &str) -> Option<&[f32]> {
        self.index_of(word).map(|i| self.row(i))
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }
}
