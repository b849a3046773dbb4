use std::io::{BufReader, BufWriter};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use super::matrix::{DocTermMatrix, Vocabulary};
use crate::error::{Error, Result};
use crate::rng::rng_from;

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Iterations between log-likelihood evaluations.
pub const LL_INTERVAL: usize = 50;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LdaParams {
    pub k: usize,
    /// Document-topic smoothing; `None` means 50/K.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub iterations: usize,
    pub burn_in: usize,
    /// Final sweeps whose estimates are averaged.
    pub samples: usize,
    pub seed: u64,
}

impl Default for LdaParams {
    fn default() -> Self {
        LdaParams {
            k: 25,
            alpha: None,
            beta: 0.01,
            iterations: 1000,
            burn_in: 200,
            samples: 10,
            seed: 0,
        }
    }
}

impl LdaParams {
    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(50.0 / self.k.max(1) as f64)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TopicModel {
    pub format_version: u32,
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub seed: u64,
    pub iterations: usize,
    pub burn_in: usize,
    pub samples: usize,
    pub vocabulary: Vocabulary,
    /// K rows over the vocabulary.
    pub phi: Vec<Vec<f64>>,
    /// One row of K proportions per matrix document.
    pub theta: Vec<Vec<f64>>,
    pub doc_ids: Vec<String>,
    /// (iteration, joint log-likelihood of words and assignments).
    pub log_likelihood: Vec<(usize, f64)>,
}

struct Sampler {
    k: usize,
    v: usize,
    alpha: f64,
    beta: f64,
    docs: Vec<Vec<u32>>,
    z: Vec<Vec<u16>>,
    nwk: Vec<u32>,
    nk: Vec<u32>,
    ndk: Vec<u32>,
}

impl Sampler {
    fn new(matrix: &DocTermMatrix, k: usize, alpha: f64, beta: f64, rng: &mut impl Rng) -> Self {
        let v = matrix.n_terms();
        let docs: Vec<Vec<u32>> = matrix
            .rows()
            .iter()
            .map(|row| row.iter().flat_map(|&(t, c)| std::iter::repeat_n(t, c as usize)).collect())
            .collect();
        let mut s = Sampler {
            k,
            v,
            alpha,
            beta,
            z: Vec::with_capacity(docs.len()),
            nwk: vec![0; v * k],
            nk: vec![0; k],
            ndk: vec![0; docs.len() * k],
            docs,
        };
        for d in 0..s.docs.len() {
            let mut zd = Vec::with_capacity(s.docs[d].len());
            for &w in &s.docs[d] {
                let t = rng.gen_range(0..k);
                zd.push(t as u16);
                s.nwk[w as usize * k + t] += 1;
                s.nk[t] += 1;
                s.ndk[d * k + t] += 1;
            }
            s.z.push(zd);
        }
        s
    }

    fn sweep(&mut self, rng: &mut impl Rng, p: &mut [f64]) {
        let k = self.k;
        let vbeta = self.v as f64 * self.beta;
        for d in 0..self.docs.len() {
            let ndk = &mut self.ndk[d * k..(d + 1) * k];
            for i in 0..self.docs[d].len() {
                let w = self.docs[d][i] as usize;
                let old = self.z[d][i] as usize;
                let nw = &mut self.nwk[w * k..(w + 1) * k];
                nw[old] -= 1;
                self.nk[old] -= 1;
                ndk[old] -= 1;
                let mut total = 0.0;
                for t in 0..k {
                    total += (f64::from(ndk[t]) + self.alpha) * (f64::from(nw[t]) + self.beta)
                        / (f64::from(self.nk[t]) + vbeta);
                    p[t] = total;
                }
                let u = rng.gen::<f64>() * total;
                let new = p.iter().position(|&c| u < c).unwrap_or(k - 1);
                nw[new] += 1;
                self.nk[new] += 1;
                ndk[new] += 1;
                self.z[d][i] = new as u16;
            }
        }
    }

    fn log_likelihood(&self) -> f64 {
        let (k, v) = (self.k as f64, self.v as f64);
        let mut ll = 0.0;
        let lg_beta = ln_gamma(self.beta);
        for t in 0..self.k {
            ll += ln_gamma(v * self.beta) - v * lg_beta - ln_gamma(f64::from(self.nk[t]) + v * self.beta);
            for w in 0..self.v {
                let n = self.nwk[w * self.k + t];
                if n > 0 {
                    ll += ln_gamma(f64::from(n) + self.beta) - lg_beta;
                }
            }
        }
        let lg_alpha = ln_gamma(self.alpha);
        for d in 0..self.docs.len() {
            ll += ln_gamma(k * self.alpha) - ln_gamma(self.docs[d].len() as f64 + k * self.alpha);
            for t in 0..self.k {
                let n = self.ndk[d * self.k + t];
                if n > 0 {
                    ll += ln_gamma(f64::from(n) + self.alpha) - lg_alpha;
                }
            }
        }
        ll
    }

    fn accumulate(&self, phi: &mut [Vec<f64>], theta: &mut [Vec<f64>]) {
        let vbeta = self.v as f64 * self.beta;
        for (t, row) in phi.iter_mut().enumerate() {
            let denom = f64::from(self.nk[t]) + vbeta;
            for (w, x) in row.iter_mut().enumerate() {
                *x += (f64::from(self.nwk[w * self.k + t]) + self.beta) / denom;
            }
        }
        let kalpha = self.k as f64 * self.alpha;
        for (d, row) in theta.iter_mut().enumerate() {
            let denom = self.docs[d].len() as f64 + kalpha;
            for (t, x) in row.iter_mut().enumerate() {
                *x += (f64::from(self.ndk[d * self.k + t]) + self.alpha) / denom;
            }
        }
    }
}

fn normalize_rows(rows: &mut [Vec<f64>]) {
    for row in rows {
        let s: f64 = row.iter().sum();
        row.iter_mut().for_each(|x| *x /= s);
    }
}

/// Collapsed Gibbs sampling. Estimates of phi and theta are averaged over
/// the last `samples` sweeps that fall after burn-in (at least the final one).
pub fn fit_lda(vocab: &Vocabulary, matrix: &DocTermMatrix, params: &LdaParams) -> Result<TopicModel> {
    let k = params.k;
    let alpha = params.alpha();
    if k < 2 {
        return Err(Error::InvalidInput("K must be at least 2".into()));
    }
    if k > u16::MAX as usize {
        return Err(Error::InvalidInput(format!("K={k} is too large")));
    }
    if k > matrix.n_terms() {
        return Err(Error::InvalidInput(format!(
            "K={k} exceeds the vocabulary size {}",
            matrix.n_terms()
        )));
    }
    if vocab.len() != matrix.n_terms() {
        return Err(Error::InvalidInput("vocabulary and matrix disagree on the number of terms".into()));
    }
    if !(alpha > 0.0 && alpha.is_finite() && params.beta > 0.0 && params.beta.is_finite()) {
        return Err(Error::InvalidInput("LDA hyperparameters must be positive".into()));
    }
    if params.iterations == 0 {
        return Err(Error::InvalidInput("iterations must be at least 1".into()));
    }
    if matrix.n_docs() == 0 || matrix.total_tokens() == 0 {
        return Err(Error::InvalidInput("document-term matrix is empty".into()));
    }

    let mut rng = rng_from(&[params.seed, 0x1da]);
    let mut s = Sampler::new(matrix, k, alpha, params.beta, &mut rng);
    let mut p = vec![0.0; k];
    let mut phi = vec![vec![0.0; s.v]; k];
    let mut theta = vec![vec![0.0; k]; matrix.n_docs()];
    let first_sample = params
        .iterations
        .saturating_sub(params.samples.max(1))
        .max(params.burn_in.min(params.iterations - 1));
    let mut log_likelihood = Vec::new();
    for it in 1..=params.iterations {
        s.sweep(&mut rng, &mut p);
        if it % LL_INTERVAL == 0 || it == params.iterations {
            log_likelihood.push((it, s.log_likelihood()));
        }
        if it > first_sample {
            s.accumulate(&mut phi, &mut theta);
        }
    }
    normalize_rows(&mut phi);
    normalize_rows(&mut theta);
    Ok(TopicModel {
        format_version: MODEL_FORMAT_VERSION,
        k,
        alpha,
        beta: params.beta,
        seed: params.seed,
        iterations: params.iterations,
        burn_in: params.burn_in,
        samples: params.samples,
        vocabulary: vocab.clone(),
        phi,
        theta,
        doc_ids: matrix.doc_ids().to_vec(),
        log_likelihood,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KeywordSet {
    pub topic: usize,
    pub keywords: Vec<String>,
    pub label: Option<String>,
}

impl TopicModel {
    /// The `n` most probable terms of `topic`, ties broken by term index.
    pub fn top_keywords(&self, topic: usize, n: usize) -> Result<KeywordSet> {
        let row = self
            .phi
            .get(topic)
            .ok_or_else(|| Error::InvalidInput(format!("topic {topic} out of range (K={})", self.k)))?;
        let mut idx: Vec<usize> = (0..row.len()).collect();
        idx.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
        Ok(KeywordSet {
            topic,
            keywords: idx.into_iter().take(n).map(|i| self.vocabulary.term(i).to_string()).collect(),
            label: None,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        serde_json::to_writer(BufWriter::new(f), self)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut m: TopicModel =
            serde_json::from_reader(BufReader::new(f)).map_err(|e| Error::malformed(path, e.line(), e.to_string()))?;
        if m.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::malformed(
                path,
                0,
                format!("unsupported model format version {}", m.format_version),
            ));
        }
        if m.phi.len() != m.k || m.phi.iter().any(|r| r.len() != m.vocabulary.len()) || m.theta.iter().any(|r| r.len() != m.k) {
            return Err(Error::malformed(path, 0, "model dimensions are inconsistent"));
        }
        m.vocabulary.rebuild_index();
        Ok(m)
    }
}
