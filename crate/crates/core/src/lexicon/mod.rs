//! LIWC-style `.dic` lexicons and per-category token counts.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::{tokenize_words, Corpus};
use crate::error::{Error, Result};

pub type CategoryId = u32;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Entry {
    /// Lowercase stem without the trailing `*`.
    pub stem: String,
    pub wildcard: bool,
    pub categories: BTreeSet<CategoryId>,
}

impl Entry {
    pub fn pattern(&self) -> String {
        if self.wildcard {
            format!("{}*", self.stem)
        } else {
            self.stem.clone()
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Lexicon {
    categories: BTreeMap<CategoryId, String>,
    entries: Vec<Entry>,
    exact: HashMap<String, BTreeSet<CategoryId>>,
    prefix: HashMap<String, BTreeSet<CategoryId>>,
    /// Multi-word entries that were skipped while parsing.
    skipped: usize,
}

impl PartialEq for Lexicon {
    /// Same categories and the same set of entries, ignoring order.
    fn eq(&self, other: &Self) -> bool {
        let set = |l: &Lexicon| l.entries.iter().cloned().collect::<BTreeSet<_>>();
        self.categories == other.categories && set(self) == set(other)
    }
}

fn parse_pattern(raw: &str) -> std::result::Result<(String, bool), String> {
    let p = raw.trim().to_lowercase();
    let stars = p.matches('*').count();
    if p.is_empty() || p == "*" {
        return Err("empty pattern".into());
    }
    match stars {
        0 => Ok((p, false)),
        1 if p.ends_with('*') => Ok((p[..p.len() - 1].to_string(), true)),
        _ => Err(format!("pattern `{raw}` may only have a single trailing `*`")),
    }
}

impl Lexicon {
    pub fn new(categories: BTreeMap<CategoryId, String>, entries: Vec<Entry>) -> Result<Self> {
        let mut names = BTreeSet::new();
        for name in categories.values() {
            if !names.insert(name.as_str()) {
                return Err(Error::InvalidInput(format!("duplicate category name `{name}`")));
            }
        }
        let mut lex = Lexicon {
            categories,
            ..Lexicon::default()
        };
        for e in entries {
            if let Some(id) = e.categories.iter().find(|id| !lex.categories.contains_key(id)) {
                return Err(Error::InvalidInput(format!(
                    "entry `{}` refers to unknown category {id}",
                    e.pattern()
                )));
            }
            lex.push(e);
        }
        Ok(lex)
    }

    fn push(&mut self, e: Entry) {
        let index = if e.wildcard { &mut self.prefix } else { &mut self.exact };
        index.entry(e.stem.clone()).or_default().extend(e.categories.iter().copied());
        self.entries.push(e);
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
        let mut skip_blank = || lines.by_ref().find(|(_, l)| !l.trim().is_empty());
        match skip_blank() {
            Some((_, l)) if l.trim() == "%" => {}
            Some((n, _)) => return Err(Error::malformed(path, n, "expected `%` to open the category header")),
            None => return Err(Error::malformed(path, 0, "missing `%` category header")),
        }
        let mut categories = BTreeMap::new();
        let mut closed = false;
        for (n, line) in lines.by_ref() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if line == "%" {
                closed = true;
                break;
            }
            let mut parts = line.split_whitespace();
            let id = parts
                .next()
                .and_then(|s| s.parse::<CategoryId>().ok())
                .ok_or_else(|| Error::malformed(path, n, format!("bad category line `{line}`")))?;
            let name = parts
                .next()
                .ok_or_else(|| Error::malformed(path, n, "category without a name"))?;
            if categories.insert(id, name.to_string()).is_some() {
                return Err(Error::malformed(path, n, format!("duplicate category id {id}")));
            }
        }
        if !closed {
            return Err(Error::malformed(path, 0, "missing closing `%` after the category header"));
        }
        let mut entries = Vec::new();
        let mut skipped = 0;
        for (n, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let (pattern, ids) = match line.split_once('\t') {
                Some((p, rest)) => (p.trim(), rest),
                None => line.trim().split_once(char::is_whitespace).unwrap_or((line.trim(), "")),
            };
            if pattern.contains(char::is_whitespace) {
                skipped += 1;
                continue;
            }
            let (stem, wildcard) = parse_pattern(pattern).map_err(|m| Error::malformed(path, n, m))?;
            let mut cats = BTreeSet::new();
            for tok in ids.split_whitespace() {
                let id: CategoryId = tok
                    .parse()
                    .map_err(|_| Error::malformed(path, n, format!("bad category id `{tok}`")))?;
                if !categories.contains_key(&id) {
                    return Err(Error::malformed(path, n, format!("unknown category id {id}")));
                }
                cats.insert(id);
            }
            if cats.is_empty() {
                return Err(Error::malformed(path, n, format!("entry `{pattern}` has no categories")));
            }
            entries.push(Entry {
                stem,
                wildcard,
                categories: cats,
            });
        }
        if skipped > 0 {
            log::warn!("{}: skipped {skipped} multi-word entries", path.display());
        }
        let mut lex = Lexicon::new(categories, entries).map_err(|e| Error::malformed(path, 0, e.to_string()))?;
        lex.skipped = skipped;
        log::info!("{}: {} lexicon entries", path.display(), lex.len());
        Ok(lex)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn write_dic<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "%")?;
        for (id, name) in &self.categories {
            writeln!(w, "{id}\t{name}")?;
        }
        writeln!(w, "%")?;
        for e in &self.entries {
            write!(w, "{}", e.pattern())?;
            for id in &e.categories {
                write!(w, "\t{id}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn categories(&self) -> &BTreeMap<CategoryId, String> {
        &self.categories
    }

    pub fn category_name(&self, id: CategoryId) -> Option<&str> {
        self.categories.get(&id).map(String::as_str)
    }

    pub fn category_id(&self, name: &str) -> Option<CategoryId> {
        self.categories.iter().find(|(_, n)| *n == name).map(|(&id, _)| id)
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn skipped_entries(&self) -> usize {
        self.skipped
    }

    /// Union of the categories of every entry matching `token`: exact
    /// entries on the whole token, wildcard entries on any prefix.
    pub fn match_token(&self, token: &str) -> BTreeSet<CategoryId> {
        let mut out = self.exact.get(token).cloned().unwrap_or_default();
        if !self.prefix.is_empty() {
            for (i, _) in token.char_indices().skip(1).chain(std::iter::once((token.len(), ' '))) {
                if let Some(c) = self.prefix.get(&token[..i]) {
                    out.extend(c.iter().copied());
                }
            }
        }
        out
    }

    pub fn match_token_names(&self, token: &str) -> BTreeSet<&str> {
        self.match_token(token)
            .into_iter()
            .filter_map(|id| self.category_name(id))
            .collect()
    }

    /// Per-token category incidences over all documents.
    pub fn count_categories(&self, corpus: &Corpus) -> CategoryCounts {
        let (counts, total) = corpus
            .documents()
            .par_iter()
            .map(|d| self.count_text(&d.text))
            .reduce(|| (BTreeMap::new(), 0), merge);
        self.finish(counts, total)
    }

    pub fn count_texts<'a, I: IntoIterator<Item = &'a str>>(&self, texts: I) -> CategoryCounts {
        let (counts, total) = texts
            .into_iter()
            .map(|t| self.count_text(t))
            .fold((BTreeMap::new(), 0), merge);
        self.finish(counts, total)
    }

    fn count_text(&self, text: &str) -> (BTreeMap<CategoryId, u64>, u64) {
        let mut counts = BTreeMap::new();
        let tokens = tokenize_words(text);
        for tok in &tokens {
            for id in self.match_token(tok) {
                *counts.entry(id).or_insert(0) += 1;
            }
        }
        (counts, tokens.len() as u64)
    }

    fn finish(&self, mut counts: BTreeMap<CategoryId, u64>, total: u64) -> CategoryCounts {
        CategoryCounts {
            counts: self
                .categories
                .iter()
                .map(|(id, name)| (name.clone(), counts.remove(id).unwrap_or(0)))
                .collect(),
            total_tokens: total,
        }
    }
}

fn merge(
    (mut a, ta): (BTreeMap<CategoryId, u64>, u64),
    (b, tb): (BTreeMap<CategoryId, u64>, u64),
) -> (BTreeMap<CategoryId, u64>, u64) {
    for (k, v) in b {
        *a.entry(k).or_insert(0) += v;
    }
    (a, ta + tb)
}

/// Category incidences keyed by category name; every category of the
/// lexicon is present, zero or not.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CategoryCounts {
    pub counts: BTreeMap<String, u64>,
    pub total_tokens: u64,
}

impl CategoryCounts {
    pub fn get(&self, name: &str) -> u64 {
        self.counts.get(name).copied().unwrap_or(0)
    }

    pub fn add(&self, other: &CategoryCounts) -> CategoryCounts {
        let mut counts = self.counts.clone();
        for (k, v) in &other.counts {
            *counts.entry(k.clone()).or_insert(0) += v;
        }
        CategoryCounts {
            counts,
            total_tokens: self.total_tokens + other.total_tokens,
        }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["category", "count"])?;
        for (k, v) in &self.counts {
            out.write_record([k.as_str(), &v.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }
}
