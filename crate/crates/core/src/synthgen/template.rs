use serde::{Deserialize, Serialize};

use crate::corpus::{Context, DemographicProfile, Phase};
use crate::error::{Error, Result};

/// The published blog-post prompt with its context sentence factored out
/// into `{context_clause}`. The article stays "a" for every race.
pub const DEFAULT_TEMPLATE: &str =
    "I want you to act like a {race} {gender} who is feeling depressed. {context_clause}{year_clause}";

pub const DEFAULT_YEAR_CLAUSE: &str = "It is the year {year}, during the COVID-19 pandemic.";

pub fn default_context_clause(context: Context) -> &'static str {
    match context {
        Context::BlogPost => "Write a blog post to describe the main source of stress in your life",
        Context::RedditPost => "Write a Reddit post on r/Depression to describe the main source of stress in your life",
        Context::TherapySession => "You are talking to your therapist. Describe the main source of stress in your life",
        Context::Unspecified => "Describe the main source of stress in your life",
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PromptTemplate {
    text: String,
}

/// Clause texts and switches that complete a template for one context.
#[derive(Clone, Debug)]
pub struct RenderOptions<'a> {
    pub context_clause: &'a str,
    pub year_clause: &'a str,
    /// Turns "a Asian" into "an Asian". Off by default.
    pub correct_articles: bool,
}

impl Default for RenderOptions<'_> {
    fn default() -> Self {
        RenderOptions {
            context_clause: default_context_clause(Context::BlogPost),
            year_clause: DEFAULT_YEAR_CLAUSE,
            correct_articles: false,
        }
    }
}

enum Piece<'t> {
    Literal(&'t str),
    Slot(&'t str),
}

fn pieces(text: &str) -> Vec<Piece<'_>> {
    let mut out = Vec::new();
    let mut rest = text;
    while let Some(open) = rest.find('{') {
        let Some(close) = rest[open..].find('}') else {
            break;
        };
        if open > 0 {
            out.push(Piece::Literal(&rest[..open]));
        }
        out.push(Piece::Slot(&rest[open + 1..open + close]));
        rest = &rest[open + close + 1..];
    }
    if !rest.is_empty() {
        out.push(Piece::Literal(rest));
    }
    out
}

fn sentence_joiner(before: &str) -> &'static str {
    let t = before.trim_end();
    if t.is_empty() {
        ""
    } else if t.ends_with(['.', '!', '?']) {
        " "
    } else {
        ". "
    }
}

fn push_with_article(out: &mut String, word: &str, correct_articles: bool) {
    if correct_articles && word.starts_with(['A', 'E', 'I', 'O', 'U', 'a', 'e', 'i', 'o', 'u']) {
        let head = out.trim_end_matches(' ');
        if head == "a" || head == "A" || head.ends_with(" a") || head.ends_with(" A") {
            let spaces = out.len() - head.len();
            out.truncate(head.len());
            out.push('n');
            out.push_str(&" ".repeat(spaces));
        }
    }
    out.push_str(word);
}

impl PromptTemplate {
    pub fn new(text: impl Into<String>) -> Self {
        PromptTemplate { text: text.into() }
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    /// Substitutes `{race}`, `{gender}`, `{context_clause}` and
    /// `{year_clause}`. For post-COVID profiles the year clause goes where
    /// `{year_clause}` sits, or at the end when the template has no such
    /// slot; pre-COVID profiles get no year clause.
    pub fn render(&self, profile: &DemographicProfile, opts: &RenderOptions<'_>) -> Result<String> {
        let year_clause = match (profile.phase(), profile.year()) {
            (Phase::PostCovid, Some(year)) => Some(render_year_clause(opts.year_clause, year)?),
            _ => None,
        };
        let mut out = String::with_capacity(self.text.len() + 64);
        let mut placed_year = false;
        for piece in pieces(&self.text) {
            match piece {
                Piece::Literal(s) => out.push_str(s),
                Piece::Slot("race") => push_with_article(&mut out, profile.race().label(), opts.correct_articles),
                Piece::Slot("gender") => {
                    push_with_article(&mut out, profile.gender().label(), opts.correct_articles)
                }
                Piece::Slot("context_clause") => out.push_str(opts.context_clause),
                Piece::Slot("year_clause") => {
                    placed_year = true;
                    if let Some(clause) = &year_clause {
                        out.push_str(sentence_joiner(&out));
                        out.push_str(clause);
                    }
                }
                Piece::Slot(other) => return Err(Error::UnresolvedSlot(other.to_string())),
            }
        }
        if let (false, Some(clause)) = (placed_year, &year_clause) {
            out.push_str(sentence_joiner(&out));
            out.push_str(clause);
        }
        Ok(out)
    }
}

fn render_year_clause(clause: &str, year: u16) -> Result<String> {
    let mut out = String::new();
    for piece in pieces(clause) {
        match piece {
            Piece::Literal(s) => out.push_str(s),
            Piece::Slot("year") => out.push_str(&year.to_string()),
            Piece::Slot(other) => return Err(Error::UnresolvedSlot(other.to_string())),
        }
    }
    Ok(out)
}

impl Default for PromptTemplate {
    fn default() -> Self {
        PromptTemplate::new(DEFAULT_TEMPLATE)
    }
}
