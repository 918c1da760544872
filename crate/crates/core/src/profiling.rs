//! CF-IDF and HCF-IDF concept weighting for social media items and
//! documents, including BellLog spreading activation over the taxonomy and
//! the random background items mixed into the item-side IDF.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::taxonomy::Taxonomy;
use crate::text::ConceptCounts;

#[derive(Debug, Error, PartialEq)]
pub enum ProfilingError {
    #[error("concept `{0}` does not exist in the taxonomy")]
    UnknownConcept(String),
    #[error("background pool too small: need {required} items, {available} available")]
    PoolTooSmall { required: usize, available: usize },
    #[error("background factor must be finite and >= 0, got {0}")]
    InvalidFactor(f64),
    #[error("item `{0}` occurs both among the user's items and the background items")]
    OverlappingItem(String),
}

/// The three profiling methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ProfileMethod {
    #[serde(rename = "CFIDF")]
    CfIdf,
    #[serde(rename = "HCFIDF")]
    HcfIdf,
    #[serde(rename = "LDA")]
    Lda,
}

impl ProfileMethod {
    pub const ALL: [ProfileMethod; 3] = [Self::CfIdf, Self::HcfIdf, Self::Lda];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::CfIdf => "CFIDF",
            Self::HcfIdf => "HCFIDF",
            Self::Lda => "LDA",
        }
    }

    pub fn is_concept_based(self) -> bool {
        !matches!(self, Self::Lda)
    }
}

impl fmt::Display for ProfileMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProfileMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown profiling method `{s}`"))
    }
}

/// Sparse nonnegative weight vector over concepts (or topics) for one
/// subject. Only strictly positive, finite weights are stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConceptProfile {
    pub subject: String,
    pub method: ProfileMethod,
    weights: BTreeMap<String, f64>,
}

impl ConceptProfile {
    pub fn new(subject: impl Into<String>, method: ProfileMethod) -> Self {
        Self {
            subject: subject.into(),
            method,
            weights: BTreeMap::new(),
        }
    }

    pub fn from_weights<I, S>(subject: impl Into<String>, method: ProfileMethod, weights: I) -> Self
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let mut profile = Self::new(subject, method);
        for (c, w) in weights {
            profile.add(c, w);
        }
        profile
    }

    /// Adds `weight` to the concept; non-positive results are not stored.
    pub fn add(&mut self, concept: impl Into<String>, weight: f64) {
        if !weight.is_finite() {
            return;
        }
        let concept = concept.into();
        let updated = self.weights.get(&concept).copied().unwrap_or(0.0) + weight;
        if updated > 0.0 {
            self.weights.insert(concept, updated);
        } else {
            self.weights.remove(&concept);
        }
    }

    pub fn get(&self, concept: &str) -> f64 {
        self.weights.get(concept).copied().unwrap_or(0.0)
    }

    pub fn weights(&self) -> &BTreeMap<String, f64> {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.weights.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.weights.values().map(|w| w * w).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::from_weights(
            self.subject.clone(),
            self.method,
            self.weights.iter().map(|(k, v)| (k.clone(), v * factor)),
        )
    }

    /// Single-line JSON record `{ "subject", "method", "weights" }`.
    pub fn to_jsonl(&self) -> String {
        serde_json::to_string(self).expect("profile serializes")
    }
}

/// Relative concept frequency: each count over the total count.
pub fn concept_frequency(counts: &ConceptCounts) -> BTreeMap<String, f64> {
    let total = counts.total() as f64;
    counts
        .iter()
        .map(|(c, n)| (c.to_string(), f64::from(n) / total))
        .collect()
}

/// Draws `ceil(factor * n_user_items)` items uniformly without replacement.
/// The output keeps the pool's order and is fixed by `seed`.
pub fn sample_background<T: Clone>(
    pool: &[T],
    n_user_items: usize,
    factor: f64,
    seed: u64,
) -> Result<Vec<T>, ProfilingError> {
    if !(factor.is_finite() && factor >= 0.0) {
        return Err(ProfilingError::InvalidFactor(factor));
    }
    let required = (factor * n_user_items as f64).ceil() as usize;
    if required > pool.len() {
        return Err(ProfilingError::PoolTooSmall {
            required,
            available: pool.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = rand::seq::index::sample(&mut rng, pool.len(), required).into_vec();
    picked.sort_unstable();
    Ok(picked.into_iter().map(|i| pool[i].clone()).collect())
}

/// Collection size and per-concept document frequency used for IDF.
pub trait IdfStats {
    fn collection_size(&self) -> usize;
    fn doc_freq(&self, concept: &str) -> usize;

    /// `ln(N / df)`, or `None` when the concept never occurs.
    fn idf(&self, concept: &str) -> Option<f64> {
        match self.doc_freq(concept) {
            0 => None,
            df => Some((self.collection_size() as f64 / df as f64).ln()),
        }
    }
}

/// IDF statistics over a user's items together with the background items.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ItemCorpusStats {
    pub n_user_items: usize,
    pub n_background: usize,
    pub doc_freq: BTreeMap<String, usize>,
}

impl IdfStats for ItemCorpusStats {
    fn collection_size(&self) -> usize {
        self.n_user_items + self.n_background
    }

    fn doc_freq(&self, concept: &str) -> usize {
        self.doc_freq.get(concept).copied().unwrap_or(0)
    }
}

/// IDF statistics over the document collection.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DocCorpusStats {
    pub n_docs: usize,
    pub doc_freq: BTreeMap<String, usize>,
}

impl IdfStats for DocCorpusStats {
    fn collection_size(&self) -> usize {
        self.n_docs
    }

    fn doc_freq(&self, concept: &str) -> usize {
        self.doc_freq.get(concept).copied().unwrap_or(0)
    }
}

fn count_presence<'a>(docs: impl IntoIterator<Item = &'a ConceptCounts>) -> (usize, BTreeMap<String, usize>) {
    let mut n = 0;
    let mut doc_freq = BTreeMap::new();
    for counts in docs {
        n += 1;
        for concept in counts.concepts() {
            *doc_freq.entry(concept.to_string()).or_insert(0) += 1;
        }
    }
    (n, doc_freq)
}

/// Document frequencies over the union of user and background items, which
/// must not share ids.
pub fn compute_item_stats<S: AsRef<str>>(
    user_items: &[(S, ConceptCounts)],
    background: &[(S, ConceptCounts)],
) -> Result<ItemCorpusStats, ProfilingError> {
    let user_ids: BTreeSet<&str> = user_items.iter().map(|(id, _)| id.as_ref()).collect();
    if let Some((id, _)) = background.iter().find(|(id, _)| user_ids.contains(id.as_ref())) {
        return Err(ProfilingError::OverlappingItem(id.as_ref().to_string()));
    }
    let all = user_items.iter().chain(background).map(|(_, c)| c);
    let (_, doc_freq) = count_presence(all);
    Ok(ItemCorpusStats {
        n_user_items: user_items.len(),
        n_background: background.len(),
        doc_freq,
    })
}

pub fn compute_doc_stats<'a>(docs: impl IntoIterator<Item = &'a ConceptCounts>) -> DocCorpusStats {
    let (n_docs, doc_freq) = count_presence(docs);
    DocCorpusStats { n_docs, doc_freq }
}

fn idf_weighted(
    subject: impl Into<String>,
    method: ProfileMethod,
    frequencies: BTreeMap<String, f64>,
    stats: &impl IdfStats,
) -> ConceptProfile {
    let mut profile = ConceptProfile::new(subject, method);
    for (concept, freq) in frequencies {
        if let Some(idf) = stats.idf(&concept) {
            profile.add(concept, freq * idf);
        }
    }
    profile
}

/// CF-IDF weights of one item or document against the given IDF statistics.
pub fn cfidf_weights(subject: impl Into<String>, counts: &ConceptCounts, stats: &impl IdfStats) -> ConceptProfile {
    idf_weighted(subject, ProfileMethod::CfIdf, concept_frequency(counts), stats)
}

/// BellLog spreading activation.
///
/// `BL(c) = cf(c) + FL(c) * sum of BL over the direct children of c`, with
/// `FL(c) = 1 / log10(nodes_at_level(level(c) + 1))`. Levels holding at most
/// one concept give `FL = 0`. Only concepts with positive activation are
/// returned, i.e. the counted concepts and their ancestors.
pub fn belllog(counts: &ConceptCounts, taxonomy: &Taxonomy) -> Result<BTreeMap<String, f64>, ProfilingError> {
    let cf = concept_frequency(counts);
    for concept in cf.keys() {
        if !taxonomy.contains(concept) {
            return Err(ProfilingError::UnknownConcept(concept.clone()));
        }
    }

    // Only mentioned concepts and their ancestors can be activated.
    let mut active: BTreeSet<&str> = BTreeSet::new();
    let mut stack: Vec<&str> = cf.keys().map(String::as_str).collect();
    while let Some(c) = stack.pop() {
        if active.insert(c) {
            let parents = taxonomy.parents_of(c).expect("checked above");
            stack.extend(parents.iter().map(String::as_str));
        }
    }

    let mut memo: HashMap<&str, f64> = HashMap::with_capacity(active.len());
    for &start in &active {
        let mut work = vec![(start, false)];
        while let Some((node, expanded)) = work.pop() {
            if memo.contains_key(node) {
                continue;
            }
            let children = taxonomy.children_of(node).expect("active concepts exist");
            if !expanded {
                work.push((node, true));
                for child in children {
                    if active.contains(child.as_str()) && !memo.contains_key(child.as_str()) {
                        work.push((child.as_str(), false));
                    }
                }
                continue;
            }
            let mut value = cf.get(node).copied().unwrap_or(0.0);
            let active_children: Vec<f64> = children
                .iter()
                .filter_map(|child| memo.get(child.as_str()).copied())
                .collect();
            let fl = level_factor(taxonomy, node);
            if fl > 0.0 && !active_children.is_empty() {
                value += fl * active_children.iter().sum::<f64>();
            }
            memo.insert(node, value);
        }
    }

    Ok(memo
        .into_iter()
        .filter(|(_, v)| *v > 0.0)
        .map(|(k, v)| (k.to_string(), v))
        .collect())
}

/// The FL damping term of BellLog for `concept`.
pub fn level_factor(taxonomy: &Taxonomy, concept: &str) -> f64 {
    let level = match taxonomy.level_of(concept) {
        Ok(level) => level,
        Err(_) => return 0.0,
    };
    let below = taxonomy.nodes_at_level(level + 1);
    if below <= 1 {
        0.0
    } else {
        1.0 / (below as f64).log10()
    }
}

/// HCF-IDF weights: BellLog activation times IDF.
pub fn hcfidf_weights(
    subject: impl Into<String>,
    counts: &ConceptCounts,
    stats: &impl IdfStats,
    taxonomy: &Taxonomy,
) -> Result<ConceptProfile, ProfilingError> {
    Ok(idf_weighted(subject, ProfileMethod::HcfIdf, belllog(counts, taxonomy)?, stats))
}

/// Presence counts (one per concept) of everything BellLog activates. Used
/// when document frequencies should be taken after spreading rather than
/// over explicit mentions.
pub fn activated_counts(counts: &ConceptCounts, taxonomy: &Taxonomy) -> Result<ConceptCounts, ProfilingError> {
    Ok(belllog(counts, taxonomy)?.keys().map(|c| (c.as_str(), 1)).collect())
}

/// Which concept occurrences feed HCF-IDF document frequencies.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DocFreqMode {
    /// Concepts mentioned in the text.
    #[default]
    Explicit,
    /// Concepts with positive BellLog activation.
    Activated,
}
