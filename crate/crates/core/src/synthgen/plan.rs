use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::template::{default_context_clause, PromptTemplate, RenderOptions, DEFAULT_YEAR_CLAUSE};
use crate::corpus::{Context, DemographicProfile, Gender, Phase, Race};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingParams {
    pub temperature: f64,
    pub max_tokens: u32,
    pub seed: Option<u64>,
}

impl Default for SamplingParams {
    fn default() -> Self {
        SamplingParams {
            temperature: 1.0,
            max_tokens: 256,
            seed: None,
        }
    }
}

/// Replicate counts and prompt text for one writing context.
#[derive(Clone, Debug, PartialEq)]
pub struct ContextPlan {
    pub context: Context,
    pub template: PromptTemplate,
    pub context_clause: String,
    /// Samples per (race, gender) before COVID.
    pub pre_per_cell: u32,
    /// Samples per (race, gender, year) after COVID.
    pub post_per_cell: BTreeMap<u16, u32>,
}

impl ContextPlan {
    pub fn new(context: Context, pre_per_cell: u32, post_per_cell: BTreeMap<u16, u32>) -> Self {
        ContextPlan {
            context,
            template: PromptTemplate::default(),
            context_clause: default_context_clause(context).to_string(),
            pre_per_cell,
            post_per_cell,
        }
    }

    fn jobs_per_cell(&self) -> usize {
        self.pre_per_cell as usize + self.post_per_cell.values().map(|&c| c as usize).sum::<usize>()
    }
}

/// Splits `total` as evenly as possible over `years`, earlier years taking the remainder.
pub fn split_evenly(total: u32, years: &[u16]) -> BTreeMap<u16, u32> {
    let mut sorted = years.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let n = sorted.len() as u32;
    if n == 0 {
        return BTreeMap::new();
    }
    sorted
        .iter()
        .enumerate()
        .map(|(i, &y)| (y, total / n + u32::from((i as u32) < total % n)))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenerationPlan {
    pub races: Vec<Race>,
    pub genders: Vec<Gender>,
    pub contexts: Vec<ContextPlan>,
    pub year_clause: String,
    pub correct_articles: bool,
    pub sampling: SamplingParams,
}

impl GenerationPlan {
    /// The full study design: 4 races x 2 genders; blog posts with 30
    /// pre-COVID and 60 post-COVID samples per group, Reddit and therapy
    /// contexts with 150 per group (75 pre, 75 post). 3,120 jobs in total.
    pub fn full_study() -> Self {
        let years = [2020, 2021];
        GenerationPlan {
            contexts: vec![
                ContextPlan::new(Context::BlogPost, 30, split_evenly(60, &years)),
                ContextPlan::new(Context::RedditPost, 75, split_evenly(75, &years)),
                ContextPlan::new(Context::TherapySession, 75, split_evenly(75, &years)),
            ],
            ..Self::blog_only()
        }
    }

    /// Blog-post context only: 720 jobs.
    pub fn blog_only() -> Self {
        GenerationPlan {
            races: Race::GENERATED.to_vec(),
            genders: Gender::GENERATED.to_vec(),
            contexts: vec![ContextPlan::new(Context::BlogPost, 30, split_evenly(60, &[2020, 2021]))],
            year_clause: DEFAULT_YEAR_CLAUSE.to_string(),
            correct_articles: false,
            sampling: SamplingParams::default(),
        }
    }

    pub fn total_jobs(&self) -> usize {
        let cells = self.races.len() * self.genders.len();
        self.contexts.iter().map(|c| cells * c.jobs_per_cell()).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.races.is_empty() {
            return Err(Error::InvalidInput("generation plan has no races".into()));
        }
        if self.genders.is_empty() {
            return Err(Error::InvalidInput("generation plan has no genders".into()));
        }
        if !(self.sampling.temperature >= 0.0) {
            return Err(Error::InvalidInput("temperature must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PromptJob {
    /// Position in the deterministic job order.
    pub index: usize,
    pub id: String,
    pub profile: DemographicProfile,
    pub prompt: String,
    pub sampling: SamplingParams,
}

fn job_id(profile: &DemographicProfile, replicate: u32) -> String {
    let phase = match profile.year() {
        Some(y) => format!("post{y}"),
        None => "pre".to_string(),
    };
    format!(
        "{}-{}-{}-{}-{:03}",
        profile.context().label(),
        profile.race().slug(),
        profile.gender().label(),
        phase,
        replicate
    )
}

/// One job per requested sample, ordered by context, race, gender, phase,
/// year and replicate index.
pub fn expand_plan(plan: &GenerationPlan) -> Result<Vec<PromptJob>> {
    plan.validate()?;
    let mut jobs = Vec::with_capacity(plan.total_jobs());
    for cp in &plan.contexts {
        let opts = RenderOptions {
            context_clause: &cp.context_clause,
            year_clause: &plan.year_clause,
            correct_articles: plan.correct_articles,
        };
        for &race in &plan.races {
            for &gender in &plan.genders {
                let mut profiles = vec![(DemographicProfile::pre_covid(race, gender, cp.context), cp.pre_per_cell)];
                profiles.extend(
                    cp.post_per_cell
                        .iter()
                        .map(|(&y, &n)| (DemographicProfile::post_covid(race, gender, cp.context, y), n)),
                );
                for (profile, count) in profiles {
                    if count == 0 {
                        continue;
                    }
                    let prompt = cp.template.render(&profile, &opts)?;
                    if prompt.trim().is_empty() {
                        return Err(Error::InvalidInput("template renders to an empty prompt".into()));
                    }
                    for r in 0..count {
                        jobs.push(PromptJob {
                            index: jobs.len(),
                            id: job_id(&profile, r),
                            profile,
                            prompt: prompt.clone(),
                            sampling: plan.sampling.clone(),
                        });
                    }
                }
            }
        }
    }
    debug_assert!(jobs.iter().all(|j| j.profile.phase() == Phase::PreCovid || j.profile.year().is_some()));
    Ok(jobs)
}

/// Serializable form of a plan, as written in run configuration files.
/// Post-COVID counts are per (race, gender) and split evenly across `years`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlanSpec {
    pub races: Vec<String>,
    pub genders: Vec<String>,
    pub years: Vec<u16>,
    pub year_clause: String,
    pub correct_articles: bool,
    pub temperature: f64,
    pub max_tokens: u32,
    pub sampling_seed: Option<u64>,
    pub contexts: Vec<ContextSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContextSpec {
    pub context: String,
    pub pre_per_cell: u32,
    pub post_per_cell: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub template: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context_clause: Option<String>,
}

impl Default for PlanSpec {
    fn default() -> Self {
        let ctx = |c: &str, pre, post| ContextSpec {
            context: c.to_string(),
            pre_per_cell: pre,
            post_per_cell: post,
            template: None,
            context_clause: None,
        };
        PlanSpec {
            races: Race::GENERATED.iter().map(|r| r.label().to_string()).collect(),
            genders: Gender::GENERATED.iter().map(|g| g.label().to_string()).collect(),
            years: vec![2020, 2021],
            year_clause: DEFAULT_YEAR_CLAUSE.to_string(),
            correct_articles: false,
            temperature: 1.0,
            max_tokens: 256,
            sampling_seed: None,
            contexts: vec![ctx("blog", 30, 60), ctx("reddit", 75, 75), ctx("therapy", 75, 75)],
        }
    }
}

impl PlanSpec {
    pub fn to_plan(&self) -> Result<GenerationPlan> {
        let races = self
            .races
            .iter()
            .map(|s| match Race::from_label(s) {
                Race::Other => Err(Error::Config(format!("unknown race `{s}` in generation plan"))),
                r => Ok(r),
            })
            .collect::<Result<Vec<_>>>()?;
        let genders = self
            .genders
            .iter()
            .map(|s| match Gender::from_label(s) {
                Gender::Other => Err(Error::Config(format!("unknown gender `{s}` in generation plan"))),
                g => Ok(g),
            })
            .collect::<Result<Vec<_>>>()?;
        let mut contexts = Vec::with_capacity(self.contexts.len());
        for c in &self.contexts {
            let context = match Context::from_label(&c.context) {
                Context::Unspecified if !c.context.eq_ignore_ascii_case("unspecified") => {
                    return Err(Error::Config(format!("unknown context `{}`", c.context)))
                }
                ctx => ctx,
            };
            if c.post_per_cell > 0 && self.years.is_empty() {
                return Err(Error::Config("post-COVID samples requested but no years given".into()));
            }
            let mut plan = ContextPlan::new(context, c.pre_per_cell, split_evenly(c.post_per_cell, &self.years));
            if let Some(t) = &c.template {
                plan.template = PromptTemplate::new(t.clone());
            }
            if let Some(cl) = &c.context_clause {
                plan.context_clause = cl.clone();
            }
            contexts.push(plan);
        }
        let plan = GenerationPlan {
            races,
            genders,
            contexts,
            year_clause: self.year_clause.clone(),
            correct_articles: self.correct_articles,
            sampling: SamplingParams {
                temperature: self.temperature,
                max_tokens: self.max_tokens,
                seed: self.sampling_seed,
            },
        };
        plan.validate()?;
        Ok(plan)
    }
}
