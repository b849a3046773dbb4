use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Race {
    Asian,
    AfricanAmerican,
    Hispanic,
    White,
    Other,
}

impl Race {
    pub const ALL: [Race; 5] = [
        Race::Asian,
        Race::AfricanAmerican,
        Race::Hispanic,
        Race::White,
        Race::Other,
    ];

    /// The four groups the generator prompts for.
    pub const GENERATED: [Race; 4] = [Race::Asian, Race::AfricanAmerican, Race::Hispanic, Race::White];

    pub fn label(self) -> &'static str {
        match self {
            Race::Asian => "Asian",
            Race::AfricanAmerican => "African American",
            Race::Hispanic => "Hispanic",
            Race::White => "White",
            Race::Other => "Other",
        }
    }

    pub fn slug(self) -> &'static str {
        match self {
            Race::Asian => "asian",
            Race::AfricanAmerican => "african-american",
            Race::Hispanic => "hispanic",
            Race::White => "white",
            Race::Other => "other",
        }
    }

    /// Maps free-form labels onto the canonical enum. `Latinx` and `Black`
    /// are folded into `Hispanic` and `AfricanAmerican`; anything unknown is `Other`.
    pub fn from_label(s: &str) -> Race {
        match normalize(s).as_str() {
            "asian" => Race::Asian,
            "africanamerican" | "black" => Race::AfricanAmerican,
            "hispanic" | "latinx" | "latino" | "latina" => Race::Hispanic,
            "white" => Race::White,
            _ => Race::Other,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Gender {
    Woman,
    Man,
    Other,
}

impl Gender {
    pub const ALL: [Gender; 3] = [Gender::Woman, Gender::Man, Gender::Other];
    pub const GENERATED: [Gender; 2] = [Gender::Woman, Gender::Man];

    pub fn label(self) -> &'static str {
        match self {
            Gender::Woman => "woman",
            Gender::Man => "man",
            Gender::Other => "other",
        }
    }

    pub fn from_label(s: &str) -> Gender {
        match normalize(s).as_str() {
            "woman" | "women" | "female" | "f" => Gender::Woman,
            "man" | "men" | "male" | "m" => Gender::Man,
            _ => Gender::Other,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Context {
    BlogPost,
    RedditPost,
    TherapySession,
    Unspecified,
}

impl Context {
    pub const ALL: [Context; 4] = [
        Context::BlogPost,
        Context::RedditPost,
        Context::TherapySession,
        Context::Unspecified,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Context::BlogPost => "blog",
            Context::RedditPost => "reddit",
            Context::TherapySession => "therapy",
            Context::Unspecified => "unspecified",
        }
    }

    pub fn from_label(s: &str) -> Context {
        match normalize(s).as_str() {
            "blog" | "blogpost" => Context::BlogPost,
            "reddit" | "redditpost" => Context::RedditPost,
            "therapy" | "therapysession" | "therapist" => Context::TherapySession,
            _ => Context::Unspecified,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Phase {
    PreCovid,
    PostCovid,
}

impl Phase {
    pub const ALL: [Phase; 2] = [Phase::PreCovid, Phase::PostCovid];

    pub fn label(self) -> &'static str {
        match self {
            Phase::PreCovid => "pre",
            Phase::PostCovid => "post",
        }
    }

    pub fn from_label(s: &str) -> Option<Phase> {
        match normalize(s).as_str() {
            "pre" | "precovid" | "before" | "beforepandemic" => Some(Phase::PreCovid),
            "post" | "postcovid" | "after" | "afterpandemic" => Some(Phase::PostCovid),
            _ => None,
        }
    }
}

fn normalize(s: &str) -> String {
    s.chars()
        .filter(|c| c.is_alphanumeric())
        .flat_map(char::to_lowercase)
        .collect()
}

/// Demographic metadata attached to every document.
///
/// `year` is present exactly when the phase is post-COVID; the constructors
/// are the only way to build one, so the pairing cannot drift.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DemographicProfile {
    race: Race,
    gender: Gender,
    context: Context,
    phase: Phase,
    year: Option<u16>,
}

impl DemographicProfile {
    pub fn pre_covid(race: Race, gender: Gender, context: Context) -> Self {
        DemographicProfile {
            race,
            gender,
            context,
            phase: Phase::PreCovid,
            year: None,
        }
    }

    pub fn post_covid(race: Race, gender: Gender, context: Context, year: u16) -> Self {
        DemographicProfile {
            race,
            gender,
            context,
            phase: Phase::PostCovid,
            year: Some(year),
        }
    }

    pub fn new(race: Race, gender: Gender, context: Context, phase: Phase, year: Option<u16>) -> Result<Self> {
        match (phase, year) {
            (Phase::PreCovid, None) => Ok(Self::pre_covid(race, gender, context)),
            (Phase::PostCovid, Some(y)) => Ok(Self::post_covid(race, gender, context, y)),
            (Phase::PreCovid, Some(y)) => Err(Error::InvalidInput(format!(
                "year {y} given for a pre-COVID profile"
            ))),
            (Phase::PostCovid, None) => Err(Error::InvalidInput(
                "post-COVID profile requires a year".to_string(),
            )),
        }
    }

    pub fn race(&self) -> Race {
        self.race
    }

    pub fn gender(&self) -> Gender {
        self.gender
    }

    pub fn context(&self) -> Context {
        self.context
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn year(&self) -> Option<u16> {
        self.year
    }
}

impl fmt::Display for DemographicProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} / {} / {}",
            self.race.label(),
            self.gender.label(),
            self.context.label(),
            self.phase.label()
        )?;
        if let Some(y) = self.year {
            write!(f, " {y}")?;
        }
        Ok(())
    }
}
