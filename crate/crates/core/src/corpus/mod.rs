//! Documents, demographic metadata, tokenization and corpus statistics.

mod filter;
mod io;
mod porter;
mod profile;
mod stats;
mod token;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use filter::GroupFilter;
pub use io::{load_corpus, save_corpus, CorpusFormat};
pub use porter::stem;
pub use profile::{Context, DemographicProfile, Gender, Phase, Race};
pub use stats::CorpusStats;
pub use token::{tokenize, tokenize_words, TokenStream};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Source {
    Synthetic,
    Human,
}

impl Source {
    pub fn label(self) -> &'static str {
        match self {
            Source::Synthetic => "synthetic",
            Source::Human => "human",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
    pub profile: DemographicProfile,
    pub source: Source,
}

impl Document {
    pub fn new(id: impl Into<String>, text: impl Into<String>, profile: DemographicProfile, source: Source) -> Self {
        Document {
            id: id.into(),
            text: text.into(),
            profile,
            source,
        }
    }
}

/// An ordered, immutable collection of documents with unique ids.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Corpus {
    documents: Vec<Document>,
    provenance: String,
}

impl Corpus {
    pub fn new(documents: Vec<Document>, provenance: impl Into<String>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(documents.len());
        for doc in &documents {
            if doc.text.trim().is_empty() {
                return Err(Error::InvalidInput(format!("document `{}` has empty text", doc.id)));
            }
            if !seen.insert(doc.id.as_str()) {
                return Err(Error::DuplicateId(doc.id.clone()));
            }
        }
        Ok(Corpus {
            documents,
            provenance: provenance.into(),
        })
    }

    pub fn empty(provenance: impl Into<String>) -> Self {
        Corpus {
            documents: Vec::new(),
            provenance: provenance.into(),
        }
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Document> {
        self.documents.iter()
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    /// Sub-corpus of the documents whose profile satisfies `predicate`, in load order.
    pub fn filter<P>(&self, predicate: P) -> Corpus
    where
        P: Fn(&DemographicProfile) -> bool,
    {
        Corpus {
            documents: self
                .documents
                .iter()
                .filter(|d| predicate(&d.profile))
                .cloned()
                .collect(),
            provenance: self.provenance.clone(),
        }
    }

    pub fn stats(&self) -> CorpusStats {
        CorpusStats::from_corpus(self)
    }
}

impl<'a> IntoIterator for &'a Corpus {
    type Item = &'a Document;
    type IntoIter = std::slice::Iter<'a, Document>;

    fn into_iter(self) -> Self::IntoIter {
        self.documents.iter()
    }
}
