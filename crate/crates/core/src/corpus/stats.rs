use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use serde::Serialize;

use super::{Context, Corpus, Gender, Phase, Race};

/// Document counts per demographic level. Every margin covers every level
/// (zero-filled) and sums to `total`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CorpusStats {
    pub total: usize,
    pub race: BTreeMap<Race, usize>,
    pub gender: BTreeMap<Gender, usize>,
    pub context: BTreeMap<Context, usize>,
    pub phase: BTreeMap<Phase, usize>,
    /// Joint counts over (race, gender, context, phase), nonzero cells only.
    pub cells: BTreeMap<(Race, Gender, Context, Phase), usize>,
}

impl CorpusStats {
    pub fn from_corpus(corpus: &Corpus) -> Self {
        let mut stats = CorpusStats {
            total: 0,
            race: Race::ALL.iter().map(|&r| (r, 0)).collect(),
            gender: Gender::ALL.iter().map(|&g| (g, 0)).collect(),
            context: Context::ALL.iter().map(|&c| (c, 0)).collect(),
            phase: Phase::ALL.iter().map(|&p| (p, 0)).collect(),
            cells: BTreeMap::new(),
        };
        for doc in corpus {
            let p = &doc.profile;
            stats.total += 1;
            *stats.race.entry(p.race()).or_default() += 1;
            *stats.gender.entry(p.gender()).or_default() += 1;
            *stats.context.entry(p.context()).or_default() += 1;
            *stats.phase.entry(p.phase()).or_default() += 1;
            *stats
                .cells
                .entry((p.race(), p.gender(), p.context(), p.phase()))
                .or_default() += 1;
        }
        stats
    }

    /// Rows of (margin, level, count), margins in race/gender/context/phase order.
    pub fn margin_rows(&self) -> Vec<(&'static str, &'static str, usize)> {
        let mut rows = Vec::new();
        rows.extend(self.race.iter().map(|(k, &v)| ("race", k.label(), v)));
        rows.extend(self.gender.iter().map(|(k, &v)| ("gender", k.label(), v)));
        rows.extend(self.context.iter().map(|(k, &v)| ("context", k.label(), v)));
        rows.extend(self.phase.iter().map(|(k, &v)| ("phase", k.label(), v)));
        rows
    }

    /// Margin name to level to count, the serializable part of the stats.
    pub fn margins(&self) -> BTreeMap<&'static str, BTreeMap<&'static str, usize>> {
        let mut m: BTreeMap<_, BTreeMap<_, _>> = BTreeMap::new();
        for (margin, level, c) in self.margin_rows() {
            m.entry(margin).or_default().insert(level, c);
        }
        m
    }

    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["margin", "level", "count"])?;
        for (m, l, c) in self.margin_rows() {
            out.write_record([m, l, &c.to_string()])?;
        }
        out.write_record(["total", "all", &self.total.to_string()])?;
        out.flush()?;
        Ok(())
    }
}

impl fmt::Display for CorpusStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "documents: {}", self.total)?;
        let mut last = "";
        for (m, l, c) in self.margin_rows() {
            if m != last {
                writeln!(f, "{m}:")?;
                last = m;
            }
            writeln!(f, "  {l:<18} {c:>7}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::small;
    use super::*;

    #[test]
    fn empty_corpus_all_zero() {
        let s = Corpus::empty("").stats();
        assert_eq!(s.total, 0);
        assert!(s.margin_rows().iter().all(|r| r.2 == 0));
        assert_eq!(s.race.len(), 5);
    }

    #[test]
    fn margins_sum_to_total() {
        let s = small().stats();
        assert_eq!(s.total, 4);
        assert_eq!(s.race.values().sum::<usize>(), 4);
        assert_eq!(s.gender.values().sum::<usize>(), 4);
        assert_eq!(s.context.values().sum::<usize>(), 4);
        assert_eq!(s.phase.values().sum::<usize>(), 4);
        assert_eq!(s.cells.values().sum::<usize>(), 4);
        assert_eq!(s.race[&Race::Asian], 2);
    }
}
