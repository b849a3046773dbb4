use std::fmt;
use std::str::FromStr;

use super::{Context, DemographicProfile, Gender, Phase, Race};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Clause {
    Race(Vec<Race>),
    Gender(Vec<Gender>),
    Context(Vec<Context>),
    Phase(Vec<Phase>),
    Year(Vec<u16>),
}

/// Conjunction of `field=value` clauses such as `race=Asian,gender=woman`.
/// A clause may list alternatives with `|` (`race=Asian|White`). The empty
/// string and `all` match every document.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupFilter {
    source: String,
    clauses: Vec<Clause>,
}

fn values<T>(raw: &str, parse: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    raw.split('|').map(|v| parse(v.trim())).collect()
}

fn strict<T: PartialEq>(v: &str, parsed: T, fallback: T, fallback_label: &str, field: &str) -> Result<T> {
    if parsed == fallback && !v.eq_ignore_ascii_case(fallback_label) {
        Err(Error::Config(format!("unknown {field} `{v}`")))
    } else {
        Ok(parsed)
    }
}

impl GroupFilter {
    pub fn all() -> Self {
        GroupFilter {
            source: "all".into(),
            clauses: Vec::new(),
        }
    }

    pub fn matches(&self, p: &DemographicProfile) -> bool {
        self.clauses.iter().all(|c| match c {
            Clause::Race(v) => v.contains(&p.race()),
            Clause::Gender(v) => v.contains(&p.gender()),
            Clause::Context(v) => v.contains(&p.context()),
            Clause::Phase(v) => v.contains(&p.phase()),
            Clause::Year(v) => p.year().is_some_and(|y| v.contains(&y)),
        })
    }

    /// File-name friendly form, e.g. `race-asian_gender-woman`.
    pub fn slug(&self) -> String {
        let s: String = self
            .source
            .chars()
            .map(|c| match c {
                '=' => '-',
                ',' => '_',
                '|' => '+',
                c if c.is_ascii_alphanumeric() => c.to_ascii_lowercase(),
                _ => '-',
            })
            .collect();
        if s.is_empty() {
            "all".into()
        } else {
            s
        }
    }
}

impl FromStr for GroupFilter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s.eq_ignore_ascii_case("all") {
            return Ok(GroupFilter::all());
        }
        let mut clauses = Vec::new();
        for part in s.split(',') {
            let (field, raw) = part
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("expected field=value in group filter, got `{part}`")))?;
            let clause = match field.trim().to_ascii_lowercase().as_str() {
                "race" => Clause::Race(values(raw, |v| strict(v, Race::from_label(v), Race::Other, "other", "race"))?),
                "gender" => Clause::Gender(values(raw, |v| {
                    strict(v, Gender::from_label(v), Gender::Other, "other", "gender")
                })?),
                "context" => Clause::Context(values(raw, |v| {
                    strict(v, Context::from_label(v), Context::Unspecified, "unspecified", "context")
                })?),
                "phase" => Clause::Phase(values(raw, |v| {
                    Phase::from_label(v).ok_or_else(|| Error::Config(format!("unknown phase `{v}`")))
                })?),
                "year" => Clause::Year(values(raw, |v| {
                    v.parse().map_err(|_| Error::Config(format!("bad year `{v}`")))
                })?),
                other => return Err(Error::Config(format!("unknown group field `{other}`"))),
            };
            clauses.push(clause);
        }
        Ok(GroupFilter {
            source: s.to_string(),
            clauses,
        })
    }
}

impl fmt::Display for GroupFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}
