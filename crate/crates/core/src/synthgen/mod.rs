//! Prompt grids, prompt rendering and corpus generation against a
//! completion endpoint or the offline mock.

mod client;
mod generate;
mod mock;
mod plan;
mod template;

pub use client::{ApiStyle, CompletionClient, CompletionError, HttpClient, LlmClientConfig, MockClient, RetryPolicy};
pub use generate::{generate, CellCounts, CompletionReport, GenerateOptions, JobFailure};
pub use mock::{gender_markers, mock_generate, race_markers};
pub use plan::{expand_plan, split_evenly, ContextPlan, ContextSpec, GenerationPlan, PlanSpec, PromptJob, SamplingParams};
pub use template::{default_context_clause, PromptTemplate, RenderOptions, DEFAULT_TEMPLATE, DEFAULT_YEAR_CLAUSE};

use crate::corpus::DemographicProfile;
use crate::error::Result;

/// Renders `template` for `profile` with the default clauses.
pub fn render_prompt(template: &PromptTemplate, profile: &DemographicProfile) -> Result<String> {
    template.render(profile, &RenderOptions::default())
}
