//! Latent Dirichlet allocation trained by collapsed Gibbs sampling, with
//! fixed-topic inference for unseen documents and concatenated user streams.
//!
//! All randomness comes from a seeded ChaCha8 generator, so a model is a pure
//! function of its corpus, hyperparameters and seed.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::profiling::{ConceptProfile, ProfileMethod};

const MODEL_FORMAT: &str = "scirec-lda/1";

#[derive(Debug, Error)]
pub enum TopicModelError {
    #[error("vocabulary is empty with min_df = {min_df}; lower min_df for small corpora")]
    EmptyVocabulary { min_df: usize },
    #[error("the number of topics must be at least 1")]
    InvalidTopicCount,
    #[error("training corpus contains no in-vocabulary tokens")]
    EmptyCorpus,
    #[error("invalid model file: {0}")]
    InvalidModel(String),
    #[error("failed to access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Terms kept for topic modeling, sorted lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    terms: Vec<String>,
    index: HashMap<String, u32>,
    min_df: usize,
}

impl Vocabulary {
    fn from_sorted_terms(terms: Vec<String>, min_df: usize) -> Self {
        let index = terms.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();
        Self { terms, index, min_df }
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn min_df(&self) -> usize {
        self.min_df
    }

    pub fn id(&self, term: &str) -> Option<u32> {
        self.index.get(term).copied()
    }

    /// Word ids of the in-vocabulary tokens, in order.
    pub fn encode<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<u32> {
        tokens.iter().filter_map(|t| self.id(t.as_ref())).collect()
    }
}

/// Keeps terms that occur in at least `min_df` documents.
pub fn build_vocabulary<S: AsRef<str>>(corpus: &[Vec<S>], min_df: usize) -> Result<Vocabulary, TopicModelError> {
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for doc in corpus {
        let distinct: BTreeSet<&str> = doc.iter().map(AsRef::as_ref).collect();
        for term in distinct {
            *df.entry(term).or_insert(0) += 1;
        }
    }
    let terms: Vec<String> = df
        .into_iter()
        .filter(|(_, n)| *n >= min_df)
        .map(|(t, _)| t.to_string())
        .collect();
    if terms.is_empty() {
        return Err(TopicModelError::EmptyVocabulary { min_df });
    }
    Ok(Vocabulary::from_sorted_terms(terms, min_df))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LdaParams {
    pub topics: usize,
    pub alpha: f64,
    pub beta: f64,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for LdaParams {
    fn default() -> Self {
        Self {
            topics: 100,
            alpha: 0.5,
            beta: 0.1,
            iterations: 500,
            seed: 1,
        }
    }
}

/// Collapsed Gibbs sampler state. [`train_lda`] drives it; tests step it
/// sweep by sweep.
pub struct GibbsTrainer {
    params: LdaParams,
    vocabulary: Vocabulary,
    docs: Vec<Vec<u32>>,
    assignments: Vec<Vec<u32>>,
    doc_topic: Vec<Vec<u32>>,
    topic_word: Vec<u32>,
    topic_totals: Vec<u64>,
    rng: ChaCha8Rng,
    sweeps: usize,
    scratch: Vec<f64>,
}

impl GibbsTrainer {
    /// Encodes the corpus and draws the initial topic of every token
    /// uniformly at random.
    pub fn new<S: AsRef<str>>(
        corpus: &[Vec<S>],
        vocabulary: Vocabulary,
        params: LdaParams,
    ) -> Result<Self, TopicModelError> {
        let k = params.topics;
        if k == 0 {
            return Err(TopicModelError::InvalidTopicCount);
        }
        let docs: Vec<Vec<u32>> = corpus.iter().map(|d| vocabulary.encode(d)).collect();
        if docs.iter().all(Vec::is_empty) {
            return Err(TopicModelError::EmptyCorpus);
        }
        let v = vocabulary.len();
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let mut topic_word = vec![0u32; k * v];
        let mut topic_totals = vec![0u64; k];
        let mut doc_topic = Vec::with_capacity(docs.len());
        let mut assignments = Vec::with_capacity(docs.len());
        for doc in &docs {
            let mut counts = vec![0u32; k];
            let mut z = Vec::with_capacity(doc.len());
            for &w in doc {
                let topic = rng.gen_range(0..k);
                z.push(topic as u32);
                counts[topic] += 1;
                topic_word[topic * v + w as usize] += 1;
                topic_totals[topic] += 1;
            }
            doc_topic.push(counts);
            assignments.push(z);
        }
        Ok(Self {
            params,
            vocabulary,
            docs,
            assignments,
            doc_topic,
            topic_word,
            topic_totals,
            rng,
            sweeps: 0,
            scratch: vec![0.0; k],
        })
    }

    /// Resamples every token once.
    pub fn sweep(&mut self) {
        let v = self.vocabulary.len();
        let (alpha, beta) = (self.params.alpha, self.params.beta);
        let v_beta = v as f64 * beta;
        for (d, doc) in self.docs.iter().enumerate() {
            let doc_counts = &mut self.doc_topic[d];
            for (i, &w) in doc.iter().enumerate() {
                let w = w as usize;
                let old = self.assignments[d][i] as usize;
                doc_counts[old] -= 1;
                self.topic_word[old * v + w] -= 1;
                self.topic_totals[old] -= 1;

                let mut cumulative = 0.0;
                for (t, &n_dt) in doc_counts.iter().enumerate() {
                    cumulative += (f64::from(n_dt) + alpha)
                        * (f64::from(self.topic_word[t * v + w]) + beta)
                        / (self.topic_totals[t] as f64 + v_beta);
                    self.scratch[t] = cumulative;
                }
                let new = draw(&self.scratch, self.rng.gen::<f64>() * cumulative);

                self.assignments[d][i] = new as u32;
                doc_counts[new] += 1;
                self.topic_word[new * v + w] += 1;
                self.topic_totals[new] += 1;
            }
        }
        self.sweeps += 1;
    }

    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    pub fn topic_totals(&self) -> &[u64] {
        &self.topic_totals
    }

    pub fn total_tokens(&self) -> u64 {
        self.docs.iter().map(|d| d.len() as u64).sum()
    }

    pub fn assignments(&self) -> &[Vec<u32>] {
        &self.assignments
    }

    pub fn log_likelihood(&self) -> f64 {
        words_given_topics_ll(&self.topic_word, &self.topic_totals, self.vocabulary.len(), self.params.beta)
    }

    pub fn into_model(self) -> TopicModel {
        TopicModel {
            topics: self.params.topics,
            alpha: self.params.alpha,
            beta: self.params.beta,
            seed: self.params.seed,
            iterations: self.sweeps,
            vocabulary: self.vocabulary,
            topic_word_counts: self.topic_word,
            topic_totals: self.topic_totals,
        }
    }
}

// First index whose cumulative weight exceeds `u`.
fn draw(cumulative: &[f64], u: f64) -> usize {
    cumulative
        .iter()
        .position(|&c| u < c)
        .unwrap_or(cumulative.len() - 1)
}

/// `sum over tokens of ln phi(z, w)`, with phi the beta-smoothed topic-word
/// distribution of the given counts.
fn words_given_topics_ll(topic_word: &[u32], topic_totals: &[u64], v: usize, beta: f64) -> f64 {
    let v_beta = v as f64 * beta;
    let mut ll = 0.0;
    for (t, &total) in topic_totals.iter().enumerate() {
        let denom = total as f64 + v_beta;
        for &n in &topic_word[t * v..(t + 1) * v] {
            if n > 0 {
                ll += f64::from(n) * ((f64::from(n) + beta) / denom).ln();
            }
        }
    }
    ll
}

/// Runs `params.iterations` Gibbs sweeps from a random initialization.
pub fn train_lda<S: AsRef<str>>(
    corpus: &[Vec<S>],
    vocabulary: Vocabulary,
    params: LdaParams,
) -> Result<TopicModel, TopicModelError> {
    let mut trainer = GibbsTrainer::new(corpus, vocabulary, params)?;
    for _ in 0..params.iterations {
        trainer.sweep();
    }
    Ok(trainer.into_model())
}

/// Trains one model per candidate topic count and reports the mean
/// per-token log likelihood of words given topics for each.
pub fn sweep_topic_counts<S: AsRef<str>>(
    corpus: &[Vec<S>],
    vocabulary: &Vocabulary,
    candidates: &[usize],
    params: LdaParams,
) -> Result<Vec<(usize, f64)>, TopicModelError> {
    candidates
        .iter()
        .map(|&topics| {
            let model = train_lda(corpus, vocabulary.clone(), LdaParams { topics, ..params })?;
            Ok((topics, model.log_likelihood() / model.total_tokens() as f64))
        })
        .collect()
}

/// A probability distribution over topics.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicDistribution {
    pub probs: Vec<f64>,
}

impl TopicDistribution {
    pub fn uniform(k: usize) -> Self {
        Self {
            probs: vec![1.0 / k as f64; k],
        }
    }

    pub fn argmax(&self) -> usize {
        self.probs
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
            .map_or(0, |(i, _)| i)
    }

    /// Profile with one weight per topic, keyed `t0`, `t1`, ...
    pub fn to_profile(&self, subject: impl Into<String>) -> ConceptProfile {
        ConceptProfile::from_weights(
            subject,
            ProfileMethod::Lda,
            self.probs.iter().enumerate().map(|(k, p)| (topic_id(k), *p)),
        )
    }
}

pub fn topic_id(k: usize) -> String {
    format!("t{k}")
}

/// Trained topic-word counts plus the settings that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicModel {
    pub topics: usize,
    pub alpha: f64,
    pub beta: f64,
    pub seed: u64,
    pub iterations: usize,
    pub vocabulary: Vocabulary,
    topic_word_counts: Vec<u32>,
    topic_totals: Vec<u64>,
}

impl TopicModel {
    pub fn vocabulary_size(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn topic_word_count(&self, topic: usize, word: u32) -> u32 {
        self.topic_word_counts[topic * self.vocabulary.len() + word as usize]
    }

    pub fn topic_totals(&self) -> &[u64] {
        &self.topic_totals
    }

    pub fn total_tokens(&self) -> u64 {
        self.topic_totals.iter().sum()
    }

    /// Smoothed `p(word | topic)`.
    pub fn phi(&self, topic: usize, word: u32) -> f64 {
        let v = self.vocabulary.len() as f64;
        (f64::from(self.topic_word_count(topic, word)) + self.beta) / (self.topic_totals[topic] as f64 + v * self.beta)
    }

    /// Words ordered by descending count in `topic`.
    pub fn top_words(&self, topic: usize, n: usize) -> Vec<&str> {
        let mut ids: Vec<u32> = (0..self.vocabulary.len() as u32).collect();
        ids.sort_by(|a, b| {
            self.topic_word_count(topic, *b)
                .cmp(&self.topic_word_count(topic, *a))
                .then(a.cmp(b))
        });
        ids.into_iter()
            .take(n)
            .map(|w| self.vocabulary.terms[w as usize].as_str())
            .collect()
    }

    /// Log likelihood of the training words given their final topic
    /// assignments and the smoothed topic-word distributions.
    pub fn log_likelihood(&self) -> f64 {
        words_given_topics_ll(&self.topic_word_counts, &self.topic_totals, self.vocabulary.len(), self.beta)
    }

    /// Gibbs inference of a document's topic mixture with the topic-word
    /// counts held fixed. Out-of-vocabulary tokens are dropped; without
    /// tokens or sweeps the prior (uniform) is returned.
    pub fn infer<S: AsRef<str>>(&self, tokens: &[S], iterations: usize, seed: u64) -> TopicDistribution {
        let k = self.topics;
        let words = self.vocabulary.encode(tokens);
        if words.is_empty() || iterations == 0 {
            return TopicDistribution::uniform(k);
        }
        // phi columns for the distinct words of this document
        let mut phi: HashMap<u32, Vec<f64>> = HashMap::new();
        for &w in &words {
            phi.entry(w).or_insert_with(|| (0..k).map(|t| self.phi(t, w)).collect());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut z: Vec<usize> = words.iter().map(|_| rng.gen_range(0..k)).collect();
        let mut counts = vec![0u32; k];
        for &t in &z {
            counts[t] += 1;
        }
        let mut cumulative = vec![0.0; k];
        for _ in 0..iterations {
            for (i, w) in words.iter().enumerate() {
                counts[z[i]] -= 1;
                let column = &phi[w];
                let mut acc = 0.0;
                for t in 0..k {
                    acc += (f64::from(counts[t]) + self.alpha) * column[t];
                    cumulative[t] = acc;
                }
                let new = draw(&cumulative, rng.gen::<f64>() * acc);
                z[i] = new;
                counts[new] += 1;
            }
        }
        let denom = words.len() as f64 + k as f64 * self.alpha;
        TopicDistribution {
            probs: counts.iter().map(|&n| (f64::from(n) + self.alpha) / denom).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        let v = self.vocabulary.len();
        let file = ModelFile {
            format: MODEL_FORMAT.to_string(),
            topics: self.topics,
            alpha: self.alpha,
            beta: self.beta,
            seed: self.seed,
            iterations: self.iterations,
            min_df: self.vocabulary.min_df,
            vocabulary: self.vocabulary.terms.clone(),
            topic_word_counts: self.topic_word_counts.chunks(v).map(<[u32]>::to_vec).collect(),
        };
        serde_json::to_string(&file).expect("model serializes")
    }

    pub fn from_json(json: &str) -> Result<Self, TopicModelError> {
        let file: ModelFile = serde_json::from_str(json)?;
        let invalid = |m: &str| TopicModelError::InvalidModel(m.to_string());
        if file.format != MODEL_FORMAT {
            return Err(invalid("unsupported format tag"));
        }
        if file.topics == 0 || file.topic_word_counts.len() != file.topics {
            return Err(invalid("topic count does not match the count matrix"));
        }
        let v = file.vocabulary.len();
        if file.topic_word_counts.iter().any(|row| row.len() != v) {
            return Err(invalid("count matrix rows do not match the vocabulary size"));
        }
        if file.vocabulary.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("vocabulary must be sorted and free of duplicates"));
        }
        let topic_totals = file
            .topic_word_counts
            .iter()
            .map(|row| row.iter().map(|&n| u64::from(n)).sum())
            .collect();
        Ok(Self {
            topics: file.topics,
            alpha: file.alpha,
            beta: file.beta,
            seed: file.seed,
            iterations: file.iterations,
            vocabulary: Vocabulary::from_sorted_terms(file.vocabulary, file.min_df),
            topic_word_counts: file.topic_word_counts.concat(),
            topic_totals,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), TopicModelError> {
        let path = path.as_ref();
        fs::write(path, self.to_json()).map_err(|source| TopicModelError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, TopicModelError> {
        let path = path.as_ref();
        let json = fs::read_to_string(path).map_err(|source| TopicModelError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&json)
    }
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    topics: usize,
    alpha: f64,
    beta: f64,
    seed: u64,
    iterations: usize,
    min_df: usize,
    vocabulary: Vec<String>,
    topic_word_counts: Vec<Vec<u32>>,
}

/// One social item's tokens with its ordering keys.
#[derive(Debug, Clone, Copy)]
pub struct TimedTokens<'a> {
    pub id: &'a str,
    pub days: i64,
    pub tokens: &'a [String],
}

/// Treats all of a user's items as one document (ordered by time, then id)
/// and infers its topic mixture.
pub fn user_topic_profile(
    model: &TopicModel,
    user: &str,
    items: &[TimedTokens<'_>],
    iterations: usize,
    seed: u64,
) -> ConceptProfile {
    let mut ordered: Vec<&TimedTokens<'_>> = items.iter().collect();
    ordered.sort_by(|a, b| a.days.cmp(&b.days).then_with(|| a.id.cmp(b.id)));
    let joined: Vec<&str> = ordered
        .iter()
        .flat_map(|item| item.tokens.iter().map(String::as_str))
        .collect();
    model.infer(&joined, iterations, seed).to_profile(user)
}
