use std::collections::BTreeMap;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::Serialize;

use super::client::{CompletionClient, CompletionError, RetryPolicy};
use super::PromptJob;
use crate::corpus::{Corpus, Document, Source};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct GenerateOptions {
    pub max_concurrent: usize,
    pub retry: RetryPolicy,
}

impl Default for GenerateOptions {
    fn default() -> Self {
        GenerateOptions {
            max_concurrent: 1,
            retry: RetryPolicy::default(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CellCounts {
    pub succeeded: usize,
    pub failed: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct JobFailure {
    pub id: String,
    pub attempts: u32,
    pub error: String,
}

/// Per-cell outcome of a generation run, keyed by the profile's display form.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CompletionReport {
    pub cells: BTreeMap<String, CellCounts>,
    pub failures: Vec<JobFailure>,
}

impl CompletionReport {
    pub fn succeeded(&self) -> usize {
        self.cells.values().map(|c| c.succeeded).sum()
    }

    pub fn failed(&self) -> usize {
        self.cells.values().map(|c| c.failed).sum()
    }
}

enum Outcome {
    Text(String),
    Failed { attempts: u32, error: String },
}

fn run_job(client: &dyn CompletionClient, job: &PromptJob, retry: &RetryPolicy) -> std::result::Result<Outcome, String> {
    let max = retry.max_attempts.max(1);
    let mut attempt = 1;
    loop {
        match client.complete(job) {
            Ok(text) if !text.trim().is_empty() => return Ok(Outcome::Text(text)),
            Ok(_) => {
                return Ok(Outcome::Failed {
                    attempts: attempt,
                    error: "empty completion".into(),
                })
            }
            Err(CompletionError::Auth(m)) => return Err(m),
            Err(CompletionError::Rejected(m)) => {
                log::warn!("job {} rejected: {m}", job.id);
                return Ok(Outcome::Failed { attempts: attempt, error: m });
            }
            Err(CompletionError::Transient(m)) if attempt >= max => {
                log::warn!("job {} failed after {attempt} attempts: {m}", job.id);
                return Ok(Outcome::Failed { attempts: attempt, error: m });
            }
            Err(CompletionError::Transient(m)) => {
                log::debug!("job {} attempt {attempt} failed: {m}", job.id);
                std::thread::sleep(retry.backoff(attempt));
                attempt += 1;
            }
        }
    }
}

/// Runs every job through `client` with up to `max_concurrent` requests in
/// flight. Documents come back in job order regardless of completion order;
/// jobs that still fail after retries are left out and listed in the report.
/// An authentication failure stops the run.
pub fn generate(
    jobs: &[PromptJob],
    client: &dyn CompletionClient,
    opts: &GenerateOptions,
) -> Result<(Corpus, CompletionReport)> {
    let next = AtomicUsize::new(0);
    let abort = AtomicBool::new(false);
    let auth_error: Mutex<Option<String>> = Mutex::new(None);
    let results: Mutex<Vec<Option<Outcome>>> = Mutex::new((0..jobs.len()).map(|_| None).collect());
    let workers = opts.max_concurrent.max(1).min(jobs.len().max(1));

    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                if abort.load(Ordering::Relaxed) {
                    break;
                }
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(job) = jobs.get(i) else { break };
                match run_job(client, job, &opts.retry) {
                    Ok(outcome) => results.lock().unwrap()[i] = Some(outcome),
                    Err(m) => {
                        abort.store(true, Ordering::Relaxed);
                        auth_error.lock().unwrap().get_or_insert(m);
                        break;
                    }
                }
            });
        }
    });

    if let Some(m) = auth_error.into_inner().unwrap() {
        return Err(Error::Auth(m));
    }

    let mut report = CompletionReport::default();
    let mut docs = Vec::with_capacity(jobs.len());
    for (job, outcome) in jobs.iter().zip(results.into_inner().unwrap()) {
        let cell = report.cells.entry(job.profile.to_string()).or_default();
        match outcome {
            Some(Outcome::Text(text)) => {
                cell.succeeded += 1;
                docs.push(Document::new(job.id.clone(), text, job.profile, Source::Synthetic));
            }
            Some(Outcome::Failed { attempts, error }) => {
                cell.failed += 1;
                report.failures.push(JobFailure {
                    id: job.id.clone(),
                    attempts,
                    error,
                });
            }
            None => unreachable!("every job runs unless the run aborted"),
        }
    }
    let sampling = jobs.first().map(|j| &j.sampling);
    let provenance = match sampling {
        Some(s) => format!(
            "generated by {} (temperature={}, max_tokens={}, seed={})",
            client.describe(),
            s.temperature,
            s.max_tokens,
            s.seed.map_or("none".to_string(), |v| v.to_string())
        ),
        None => format!("generated by {}", client.describe()),
    };
    Ok((Corpus::new(docs, provenance)?, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Phase;
    use crate::synthgen::{expand_plan, GenerationPlan, MockClient};
    use std::collections::HashMap;

    fn fast() -> GenerateOptions {
        GenerateOptions {
            max_concurrent: 4,
            retry: RetryPolicy {
                max_attempts: 3,
                initial_backoff_ms: 0,
                max_backoff_ms: 0,
            },
        }
    }

    #[test]
    fn no_jobs_empty_corpus() {
        let (c, r) = generate(&[], &MockClient::new(7), &fast()).unwrap();
        assert!(c.is_empty());
        assert_eq!(r.succeeded() + r.failed(), 0);
    }

    #[test]
    fn mock_runs_are_identical_and_ordered() {
        let jobs = expand_plan(&GenerationPlan::blog_only()).unwrap();
        let (a, _) = generate(&jobs[..10], &MockClient::new(7), &fast()).unwrap();
        let (b, _) = generate(&jobs[..10], &MockClient::new(7), &GenerateOptions::default()).unwrap();
        assert_eq!(a, b);
        let ids: Vec<_> = a.iter().map(|d| d.id.clone()).collect();
        let want: Vec<_> = jobs[..10].iter().map(|j| j.id.clone()).collect();
        assert_eq!(ids, want);
    }

    #[test]
    fn blog_phase_margins() {
        let jobs = expand_plan(&GenerationPlan::blog_only()).unwrap();
        let (c, r) = generate(&jobs, &MockClient::new(7), &fast()).unwrap();
        let s = c.stats();
        assert_eq!(s.phase[&Phase::PreCovid], 240);
        assert_eq!(s.phase[&Phase::PostCovid], 480);
        assert_eq!(r.succeeded(), 720);
    }

    /// Fails transiently on every job whose index is divisible by `every`,
    /// succeeding on the retry for odd indices.
    struct Flaky {
        every: usize,
        calls: Mutex<HashMap<usize, u32>>,
    }

    impl CompletionClient for Flaky {
        fn complete(&self, job: &PromptJob) -> std::result::Result<String, CompletionError> {
            let mut calls = self.calls.lock().unwrap();
            let n = calls.entry(job.index).or_default();
            *n += 1;
            if job.index.is_multiple_of(self.every) && (job.index.is_multiple_of(2) || *n == 1) {
                return Err(CompletionError::Transient("503".into()));
            }
            Ok(format!("text {}", job.index))
        }

        fn describe(&self) -> String {
            "flaky".into()
        }
    }

    #[test]
    fn failures_excluded_and_reported() {
        let jobs = expand_plan(&GenerationPlan::blog_only()).unwrap();
        let client = Flaky {
            every: 5,
            calls: Mutex::new(HashMap::new()),
        };
        let (c, r) = generate(&jobs[..20], &client, &fast()).unwrap();
        // indices 0 and 10 always fail; 5 and 15 succeed on retry.
        assert_eq!(c.len(), 18);
        assert_eq!(r.failed(), 2);
        assert!(r.failures.iter().all(|f| f.attempts == 3));
        let job_ids: std::collections::HashSet<_> = jobs.iter().map(|j| &j.id).collect();
        assert!(c.iter().all(|d| job_ids.contains(&d.id)));
    }

    struct Unauthorized;

    impl CompletionClient for Unauthorized {
        fn complete(&self, _: &PromptJob) -> std::result::Result<String, CompletionError> {
            Err(CompletionError::Auth("bad key".into()))
        }

        fn describe(&self) -> String {
            "unauthorized".into()
        }
    }

    #[test]
    fn auth_failure_aborts() {
        let jobs = expand_plan(&GenerationPlan::blog_only()).unwrap();
        assert!(matches!(generate(&jobs, &Unauthorized, &fast()), Err(Error::Auth(_))));
    }
}
