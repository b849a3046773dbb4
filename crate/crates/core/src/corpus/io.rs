use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Context, Corpus, DemographicProfile, Document, Gender, Phase, Race, Source};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CorpusFormat {
    Jsonl,
    Csv,
}

impl CorpusFormat {
    /// Guesses the format from the file extension; anything but `.csv` is JSONL.
    pub fn from_path(path: &Path) -> CorpusFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => CorpusFormat::Csv,
            _ => CorpusFormat::Jsonl,
        }
    }
}

/// On-disk record layout shared by the JSONL and CSV formats.
#[derive(Debug, Serialize, Deserialize)]
struct Record {
    #[serde(default)]
    id: Option<String>,
    text: String,
    #[serde(default)]
    race: Option<String>,
    #[serde(default)]
    gender: Option<String>,
    #[serde(default)]
    context: Option<String>,
    #[serde(default)]
    phase: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    year: Option<u16>,
    #[serde(default)]
    source: Option<String>,
}

impl Record {
    fn from_document(doc: &Document) -> Self {
        let p = &doc.profile;
        Record {
            id: Some(doc.id.clone()),
            text: doc.text.clone(),
            race: Some(p.race().label().to_string()),
            gender: Some(p.gender().label().to_string()),
            context: Some(p.context().label().to_string()),
            phase: Some(p.phase().label().to_string()),
            year: p.year(),
            source: Some(doc.source.label().to_string()),
        }
    }

    /// Missing demographic fields fall back to `Other`/`Unspecified`; a
    /// missing phase means pre-COVID, a missing id becomes the record number.
    fn into_document(self, record_no: usize) -> std::result::Result<Document, String> {
        let race = self.race.as_deref().map_or(Race::Other, Race::from_label);
        let gender = self.gender.as_deref().map_or(Gender::Other, Gender::from_label);
        let context = self.context.as_deref().map_or(Context::Unspecified, Context::from_label);
        let phase = match self.phase.as_deref() {
            None | Some("") => Phase::PreCovid,
            Some(s) => Phase::from_label(s).ok_or_else(|| format!("unknown phase `{s}`"))?,
        };
        let profile = DemographicProfile::new(race, gender, context, phase, self.year).map_err(|e| e.to_string())?;
        let source = match self.source.as_deref().map(str::to_ascii_lowercase).as_deref() {
            None | Some("") | Some("human") => Source::Human,
            Some("synthetic") => Source::Synthetic,
            Some(s) => return Err(format!("unknown source `{s}`")),
        };
        if self.text.trim().is_empty() {
            return Err("empty text".to_string());
        }
        let id = match self.id {
            Some(id) if !id.is_empty() => id,
            _ => record_no.to_string(),
        };
        Ok(Document::new(id, self.text, profile, source))
    }
}

pub fn load_corpus(path: impl AsRef<Path>, format: CorpusFormat) -> Result<Corpus> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let docs = match format {
        CorpusFormat::Jsonl => read_jsonl(path, BufReader::new(file))?,
        CorpusFormat::Csv => read_csv(path, file)?,
    };
    let mut seen = std::collections::HashSet::new();
    for (line, doc) in &docs {
        if !seen.insert(doc.id.as_str()) {
            return Err(Error::malformed(path, *line, format!("duplicate id `{}`", doc.id)));
        }
    }
    Corpus::new(docs.into_iter().map(|(_, d)| d).collect(), path.display().to_string())
}

fn read_jsonl<R: BufRead>(path: &Path, reader: R) -> Result<Vec<(usize, Document)>> {
    let mut docs = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: Record =
            serde_json::from_str(&line).map_err(|e| Error::malformed(path, line_no, e.to_string()))?;
        let doc = record
            .into_document(docs.len() + 1)
            .map_err(|m| Error::malformed(path, line_no, m))?;
        docs.push((line_no, doc));
    }
    Ok(docs)
}

fn read_csv<R: std::io::Read>(path: &Path, reader: R) -> Result<Vec<(usize, Document)>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut docs = Vec::new();
    for result in rdr.deserialize::<Record>() {
        let record = result.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::malformed(path, line, e.to_string())
        })?;
        let line = docs.len() + 2;
        let doc = record
            .into_document(docs.len() + 1)
            .map_err(|m| Error::malformed(path, line, m))?;
        docs.push((line, doc));
    }
    Ok(docs)
}

pub fn save_corpus(corpus: &Corpus, path: impl AsRef<Path>, format: CorpusFormat) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    match format {
        CorpusFormat::Jsonl => {
            for doc in corpus {
                serde_json::to_writer(&mut w, &Record::from_document(doc))?;
                w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
            }
        }
        CorpusFormat::Csv => {
            let mut out = csv::Writer::from_writer(&mut w);
            out.write_record(["id", "text", "race", "gender", "context", "phase", "year", "source"])?;
            for doc in corpus {
                let r = Record::from_document(doc);
                out.write_record([
                    r.id.unwrap_or_default(),
                    r.text,
                    r.race.unwrap_or_default(),
                    r.gender.unwrap_or_default(),
                    r.context.unwrap_or_default(),
                    r.phase.unwrap_or_default(),
                    r.year.map(|y| y.to_string()).unwrap_or_default(),
                    r.source.unwrap_or_default(),
                ])?;
            }
            out.flush().map_err(|e| Error::io(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}
