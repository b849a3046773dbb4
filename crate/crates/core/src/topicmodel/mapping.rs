use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Label that marks a fine topic as excluded from consolidation.
pub const FILTERED: &str = "FILTERED";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MappingEntry {
    /// `None` when the topic is filtered.
    pub label: Option<String>,
    pub fine_label: Option<String>,
}

/// Many-to-one assignment of fine topic ids to overarching labels.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicMapping {
    entries: BTreeMap<usize, MappingEntry>,
}

#[derive(Deserialize)]
struct Row {
    fine_topic_id: usize,
    overarching_label: String,
    #[serde(default)]
    fine_label: Option<String>,
}

impl TopicMapping {
    pub fn identity(k: usize) -> Self {
        TopicMapping {
            entries: (0..k)
                .map(|t| {
                    let e = MappingEntry {
                        label: Some(format!("topic{t}")),
                        fine_label: None,
                    };
                    (t, e)
                })
                .collect(),
        }
    }

    pub fn insert(&mut self, topic: usize, label: Option<String>, fine_label: Option<String>) {
        self.entries.insert(topic, MappingEntry { label, fine_label });
    }

    pub fn entries(&self) -> &BTreeMap<usize, MappingEntry> {
        &self.entries
    }

    pub fn label(&self, topic: usize) -> Option<&str> {
        self.entries.get(&topic).and_then(|e| e.label.as_deref())
    }

    /// Overarching labels in order of their first fine topic.
    pub fn labels(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for e in self.entries.values() {
            if let Some(l) = &e.label {
                if !out.contains(l) {
                    out.push(l.clone());
                }
            }
        }
        out
    }

    pub fn retained(&self) -> usize {
        self.entries.values().filter(|e| e.label.is_some()).count()
    }

    pub fn from_reader<R: std::io::Read>(r: R, path: &Path) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().flexible(true).trim(csv::Trim::All).from_reader(r);
        let mut m = TopicMapping::default();
        for (i, row) in rdr.deserialize::<Row>().enumerate() {
            let line = i + 2;
            let row = row.map_err(|e| Error::malformed(path, line, e.to_string()))?;
            let label = match row.overarching_label.as_str() {
                "" => return Err(Error::malformed(path, line, "empty overarching label")),
                l if l.eq_ignore_ascii_case(FILTERED) => None,
                l => Some(l.to_string()),
            };
            let fine = row.fine_label.filter(|s| !s.is_empty());
            if m.entries.insert(row.fine_topic_id, MappingEntry { label, fine_label: fine }).is_some() {
                return Err(Error::malformed(path, line, format!("topic {} mapped twice", row.fine_topic_id)));
            }
        }
        Ok(m)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(f, path)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["fine_topic_id", "overarching_label", "fine_label"])?;
        for (t, e) in &self.entries {
            out.write_record([
                t.to_string().as_str(),
                e.label.as_deref().unwrap_or(FILTERED),
                e.fine_label.as_deref().unwrap_or(""),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Overarching-topic proportions per document.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Consolidated {
    pub labels: Vec<String>,
    /// D rows over `labels`.
    pub proportions: Vec<Vec<f64>>,
    /// Mass of filtered topics per document.
    pub filtered: Vec<f64>,
}

/// Sums fine-topic proportions into their overarching labels. Every topic
/// of `theta` must be mapped, either to a label or as filtered.
pub fn consolidate(theta: &[Vec<f64>], mapping: &TopicMapping) -> Result<Consolidated> {
    let k = theta.first().map_or(0, Vec::len);
    if let Some(t) = mapping.entries.keys().find(|&&t| t >= k) {
        return Err(Error::InvalidInput(format!("mapping refers to topic {t} but the model has {k}")));
    }
    if let Some(t) = (0..k).find(|t| !mapping.entries.contains_key(t)) {
        return Err(Error::InvalidInput(format!("topic {t} is not covered by the mapping")));
    }
    let labels = mapping.labels();
    let col: Vec<Option<usize>> = (0..k)
        .map(|t| mapping.label(t).map(|l| labels.iter().position(|x| x == l).unwrap()))
        .collect();
    let mut proportions = Vec::with_capacity(theta.len());
    let mut filtered = Vec::with_capacity(theta.len());
    for row in theta {
        let mut out = vec![0.0; labels.len()];
        let mut lost = 0.0;
        for (t, &x) in row.iter().enumerate() {
            match col[t] {
                Some(c) => out[c] += x,
                None => lost += x,
            }
        }
        proportions.push(out);
        filtered.push(lost);
    }
    Ok(Consolidated {
        labels,
        proportions,
        filtered,
    })
}
