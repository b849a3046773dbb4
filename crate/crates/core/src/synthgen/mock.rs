//! Offline text generator with planted demographic signal.

use rand::seq::SliceRandom;
use rand::Rng;

use super::PromptJob;
use crate::corpus::{DemographicProfile, Gender, Phase, Race};
use crate::rng::{hash_str, rng_from};

/// Words that appear only in texts for the given race.
pub fn race_markers(race: Race) -> &'static [&'static str] {
    match race {
        Race::Asian => &["dumplings", "lantern"],
        Race::AfricanAmerican => &["cornbread", "gospel"],
        Race::Hispanic => &["tamales", "abuela"],
        Race::White => &["casserole", "suburbs"],
        Race::Other => &["potluck", "hometown"],
    }
}

/// Words that appear only in texts for the given gender.
pub fn gender_markers(gender: Gender) -> &'static [&'static str] {
    match gender {
        Gender::Woman => &["she", "herself", "daughter"],
        Gender::Man => &["he", "himself", "son"],
        Gender::Other => &["they", "themselves", "child"],
    }
}

const WORK: &[&str] = &[
    "job", "boss", "deadline", "office", "overtime", "career", "promotion", "coworkers", "meeting",
    "shift", "workload", "project", "exhausted", "salary", "manager",
];
const SCHOOL: &[&str] = &[
    "exam", "grades", "college", "homework", "professor", "semester", "study", "tuition", "class",
    "degree", "parents", "expectations", "failing", "major", "thesis",
];
const HEALTH: &[&str] = &[
    "doctor", "sick", "hospital", "pain", "medication", "insurance", "diagnosis", "illness",
    "appointment", "treatment", "chronic", "symptoms", "body", "sleep", "tired",
];
const RACISM: &[&str] = &[
    "discrimination", "racism", "prejudice", "stereotypes", "police", "injustice", "unfair",
    "community", "profiling", "judged", "respect", "color", "neighborhood", "equality", "hate",
];
const FAMILY: &[&str] = &[
    "family", "mother", "father", "siblings", "relatives", "home", "responsibility", "caring",
    "household", "kids", "parents", "cousins", "arguments", "support", "duty",
];
const IMMIGRATION: &[&str] = &[
    "immigration", "visa", "deportation", "border", "papers", "language", "citizenship",
    "documents", "status", "country", "accent", "culture", "belonging", "lawyer", "green",
];
const FINANCE: &[&str] = &[
    "money", "bills", "rent", "debt", "paycheck", "loans", "afford", "budget", "savings",
    "expenses", "bank", "credit", "poverty", "wages", "mortgage",
];
const RELATIONSHIP: &[&str] = &[
    "relationship", "partner", "breakup", "dating", "marriage", "divorce", "lonely", "trust",
    "boyfriend", "girlfriend", "love", "cheating", "friends", "fight", "distance",
];
const NEWS: &[&str] = &[
    "news", "politics", "election", "climate", "world", "future", "media", "headlines",
    "society", "government", "crisis", "economy", "violence", "uncertain", "anxiety",
];
const PANDEMIC: &[&str] = &[
    "pandemic", "covid", "virus", "lockdown", "quarantine", "masks", "vaccine", "isolation",
    "remote", "zoom", "outbreak", "layoffs", "infection", "distancing", "unemployment",
];

const FILLER: &[&str] = &[
    "i", "feel", "my", "the", "and", "it", "is", "so", "about", "really", "just", "every", "day",
    "always", "worried", "stress", "can't", "stop", "thinking", "life", "hard", "lately", "keep",
    "feeling", "down", "nothing", "seems", "to", "help", "much",
];

const TOPICS: [(&str, &[&str]); 10] = [
    ("work", WORK),
    ("school", SCHOOL),
    ("health", HEALTH),
    ("racism", RACISM),
    ("family", FAMILY),
    ("immigration", IMMIGRATION),
    ("finance", FINANCE),
    ("relationship", RELATIONSHIP),
    ("news", NEWS),
    ("pandemic", PANDEMIC),
];

/// Topic weights in `TOPICS` order. Each race leans towards two stressors;
/// gender shifts weight between family and work, and post-COVID texts add
/// the pandemic topic.
fn topic_weights(profile: &DemographicProfile) -> [f64; 10] {
    let mut w = [1.0, 1.0, 1.0, 0.5, 1.0, 0.5, 1.0, 1.0, 1.0, 0.0];
    let boost = |w: &mut [f64; 10], i: usize| w[i] += 4.0;
    match profile.race() {
        Race::Asian => {
            boost(&mut w, 0);
            boost(&mut w, 1);
        }
        Race::AfricanAmerican => {
            boost(&mut w, 2);
            boost(&mut w, 3);
        }
        Race::Hispanic => {
            boost(&mut w, 4);
            boost(&mut w, 5);
            w[6] += 2.0;
        }
        Race::White => {
            boost(&mut w, 7);
            boost(&mut w, 8);
        }
        Race::Other => {}
    }
    match profile.gender() {
        Gender::Woman => w[4] += 2.0,
        Gender::Man => w[0] += 2.0,
        Gender::Other => {}
    }
    if profile.phase() == Phase::PostCovid {
        w[9] = 5.0;
    }
    w
}

fn profile_key(profile: &DemographicProfile) -> u64 {
    hash_str(&profile.to_string())
}

fn pick<'a, R: Rng>(rng: &mut R, words: &[&'a str]) -> &'a str {
    words.choose(rng).copied().unwrap_or("")
}

/// Deterministic pseudo-text for `job` keyed by (seed, job index, profile).
/// Every text carries the race and gender markers of its profile.
pub fn mock_generate(job: &PromptJob, seed: u64) -> String {
    let profile = &job.profile;
    let mut rng = rng_from(&[seed, job.index as u64, profile_key(profile)]);
    let weights = topic_weights(profile);
    let total: f64 = weights.iter().sum();

    let mut sentences = Vec::new();
    let race = race_markers(profile.race());
    let gender = gender_markers(profile.gender());
    sentences.push(format!(
        "{} {} {} {} {}",
        pick(&mut rng, FILLER),
        pick(&mut rng, race),
        pick(&mut rng, gender),
        pick(&mut rng, FILLER),
        pick(&mut rng, race),
    ));

    let n_sentences = rng.gen_range(4..=7);
    for _ in 0..n_sentences {
        let mut u = rng.gen::<f64>() * total;
        let mut topic = TOPICS.len() - 1;
        for (i, &w) in weights.iter().enumerate() {
            if u < w {
                topic = i;
                break;
            }
            u -= w;
        }
        let vocab = TOPICS[topic].1;
        let len = rng.gen_range(8..=12);
        let words: Vec<&str> = (0..len)
            .map(|_| {
                let r = rng.gen::<f64>();
                if r < 0.6 {
                    pick(&mut rng, vocab)
                } else if r < 0.95 {
                    pick(&mut rng, FILLER)
                } else {
                    pick(&mut rng, gender)
                }
            })
            .collect();
        sentences.push(words.join(" "));
    }
    let mut text = sentences
        .iter()
        .map(|s| {
            let mut c = s.chars();
            match c.next() {
                Some(f) => f.to_uppercase().chain(c).collect::<String>(),
                None => String::new(),
            }
        })
        .collect::<Vec<_>>()
        .join(". ");
    text.push('.');
    text
}
