//! Text normalization and gazetteer-style concept extraction.
//!
//! Tweets and publication text go through the same [`TextNormalizer`], and so
//! do the thesaurus labels, so both sides of a match are normalized
//! symmetrically.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fs;
use std::path::Path;

use log::warn;
use thiserror::Error;

use crate::taxonomy::Taxonomy;

const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords_en.txt");
const DEFAULT_SUFFIX_RULES: &str = include_str!("../data/suffix_rules.tsv");

#[derive(Debug, Error)]
pub enum TextError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("suffix rule line {line}: expected `suffix<TAB>replacement<TAB>min_token_len`")]
    MalformedRule { line: usize },
}

/// One lemma-normalization rule: a token of at least `min_len` characters
/// ending in `suffix` gets that suffix replaced by `replacement`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuffixRule {
    pub suffix: String,
    pub replacement: String,
    pub min_len: usize,
}

impl SuffixRule {
    pub fn new(suffix: &str, replacement: &str, min_len: usize) -> Self {
        Self {
            suffix: suffix.to_string(),
            replacement: replacement.to_string(),
            min_len,
        }
    }

    fn apply(&self, token: &str) -> Option<String> {
        if token.chars().count() >= self.min_len && token.ends_with(&self.suffix) {
            let stem = &token[..token.len() - self.suffix.len()];
            Some(format!("{stem}{}", self.replacement))
        } else {
            None
        }
    }
}

/// Parses the ordered rule list. Blank lines and lines starting with `#` are skipped.
pub fn parse_suffix_rules(text: &str) -> Result<Vec<SuffixRule>, TextError> {
    let mut rules = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let malformed = TextError::MalformedRule { line: i + 1 };
        if fields.len() != 3 || fields[0].is_empty() {
            return Err(malformed);
        }
        let min_len = fields[2].trim().parse().map_err(|_| malformed)?;
        rules.push(SuffixRule::new(fields[0], fields[1], min_len));
    }
    Ok(rules)
}

/// One word per line; surrounding whitespace is ignored and words are lowercased.
pub fn parse_stopwords(text: &str) -> HashSet<String> {
    text.lines()
        .map(|l| l.trim().to_lowercase())
        .filter(|l| !l.is_empty())
        .collect()
}

fn read(path: &Path) -> Result<String, TextError> {
    fs::read_to_string(path).map_err(|source| TextError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_suffix_rules(path: impl AsRef<Path>) -> Result<Vec<SuffixRule>, TextError> {
    parse_suffix_rules(&read(path.as_ref())?)
}

pub fn load_stopwords(path: impl AsRef<Path>) -> Result<HashSet<String>, TextError> {
    Ok(parse_stopwords(&read(path.as_ref())?))
}

/// Normalized words of one text, in order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TokenSequence {
    pub tokens: Vec<String>,
}

impl TokenSequence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

impl From<Vec<String>> for TokenSequence {
    fn from(tokens: Vec<String>) -> Self {
        Self { tokens }
    }
}

/// Lowercasing tokenizer with stop-word removal and suffix-rule lemma
/// normalization.
///
/// Per whitespace-separated chunk: URLs are dropped, the chunk is lowercased
/// and split on every character that is neither alphanumeric nor an
/// apostrophe (this is what strips `#` and `@` while keeping the word),
/// apostrophes are trimmed from word ends, stop words are removed, and
/// finally the first matching suffix rule is applied.
#[derive(Debug, Clone)]
pub struct TextNormalizer {
    stopwords: HashSet<String>,
    rules: Vec<SuffixRule>,
}

impl Default for TextNormalizer {
    fn default() -> Self {
        Self::english()
    }
}

impl TextNormalizer {
    pub fn new(stopwords: HashSet<String>, rules: Vec<SuffixRule>) -> Self {
        Self { stopwords, rules }
    }

    /// The shipped English stop-word list and suffix rules.
    pub fn english() -> Self {
        Self::new(
            parse_stopwords(DEFAULT_STOPWORDS),
            parse_suffix_rules(DEFAULT_SUFFIX_RULES).expect("bundled suffix rules parse"),
        )
    }

    pub fn stopwords(&self) -> &HashSet<String> {
        &self.stopwords
    }

    pub fn rules(&self) -> &[SuffixRule] {
        &self.rules
    }

    pub fn normalize(&self, text: &str) -> TokenSequence {
        let mut tokens = Vec::new();
        for chunk in text.split_whitespace() {
            let lower = chunk.to_lowercase();
            if is_url(&lower) {
                continue;
            }
            for word in lower.split(|c: char| !(c.is_alphanumeric() || is_apostrophe(c))) {
                let word = word.trim_matches(is_apostrophe);
                if word.is_empty() || self.stopwords.contains(word) {
                    continue;
                }
                let lemma = self.lemmatize(word);
                if !lemma.is_empty() {
                    tokens.push(lemma);
                }
            }
        }
        TokenSequence { tokens }
    }

    /// Like [`normalize`](Self::normalize) for raw bytes. Invalid UTF-8
    /// sequences are replaced; the second value counts them.
    pub fn normalize_bytes(&self, bytes: &[u8]) -> (TokenSequence, usize) {
        let invalid = bytes.utf8_chunks().filter(|c| !c.invalid().is_empty()).count();
        if invalid > 0 {
            warn!("replaced {invalid} invalid UTF-8 sequence(s) in input text");
        }
        (self.normalize(&String::from_utf8_lossy(bytes)), invalid)
    }

    fn lemmatize(&self, word: &str) -> String {
        self.rules
            .iter()
            .find_map(|rule| rule.apply(word))
            .unwrap_or_else(|| word.to_string())
    }
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

fn is_url(lower: &str) -> bool {
    lower.starts_with("http://") || lower.starts_with("https://") || lower.starts_with("www.")
}

/// Maps normalized label token sequences to the concepts carrying them.
#[derive(Debug, Clone, Default)]
pub struct LabelIndex {
    entries: HashMap<Vec<String>, BTreeSet<String>>,
    max_label_len: usize,
    dropped_labels: usize,
}

impl LabelIndex {
    /// Normalizes every preferred and alternative label of `taxonomy`.
    /// Labels that normalize to nothing (e.g. pure stop words) are dropped.
    pub fn build(taxonomy: &Taxonomy, normalizer: &TextNormalizer) -> Self {
        let mut index = Self::default();
        for concept in taxonomy.concepts() {
            for label in concept.labels() {
                let tokens = normalizer.normalize(label).tokens;
                if tokens.is_empty() {
                    warn!("label `{label}` of concept `{}` normalizes to nothing; dropped", concept.id);
                    index.dropped_labels += 1;
                    continue;
                }
                index.insert(tokens, &concept.id);
            }
        }
        index
    }

    pub fn insert(&mut self, label: Vec<String>, concept: &str) {
        self.max_label_len = self.max_label_len.max(label.len());
        self.entries.entry(label).or_default().insert(concept.to_string());
    }

    pub fn lookup(&self, label: &[String]) -> Option<&BTreeSet<String>> {
        self.entries.get(label)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_label_len(&self) -> usize {
        self.max_label_len
    }

    pub fn dropped_labels(&self) -> usize {
        self.dropped_labels
    }

    /// Greedy left-to-right longest-match scan. Every matched span adds one
    /// to each concept the label maps to; the scan resumes after the span.
    pub fn extract(&self, tokens: &TokenSequence) -> ConceptCounts {
        let tokens = &tokens.tokens;
        let mut counts = ConceptCounts::default();
        let mut start = 0;
        while start < tokens.len() {
            let longest = self.max_label_len.min(tokens.len() - start);
            let hit = (1..=longest)
                .rev()
                .find_map(|len| self.entries.get(&tokens[start..start + len]).map(|ids| (len, ids)));
            match hit {
                Some((len, ids)) => {
                    for id in ids {
                        counts.add(id, 1);
                    }
                    start += len;
                }
                None => start += 1,
            }
        }
        counts
    }
}

pub fn build_label_index(taxonomy: &Taxonomy, normalizer: &TextNormalizer) -> LabelIndex {
    LabelIndex::build(taxonomy, normalizer)
}

pub fn extract_concepts(tokens: &TokenSequence, index: &LabelIndex) -> ConceptCounts {
    index.extract(tokens)
}

/// Occurrence counts of concepts in one text.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConceptCounts {
    counts: BTreeMap<String, u32>,
    total: u64,
}

impl ConceptCounts {
    pub fn add(&mut self, concept: &str, n: u32) {
        if n == 0 {
            return;
        }
        *self.counts.entry(concept.to_string()).or_insert(0) += n;
        self.total += u64::from(n);
    }

    pub fn get(&self, concept: &str) -> u32 {
        self.counts.get(concept).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u32)> {
        self.counts.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn concepts(&self) -> impl Iterator<Item = &str> {
        self.counts.keys().map(String::as_str)
    }

    pub fn contains(&self, concept: &str) -> bool {
        self.counts.contains_key(concept)
    }
}

impl<S: AsRef<str>> FromIterator<(S, u32)> for ConceptCounts {
    fn from_iter<I: IntoIterator<Item = (S, u32)>>(iter: I) -> Self {
        let mut counts = Self::default();
        for (concept, n) in iter {
            counts.add(concept.as_ref(), n);
        }
        counts
    }
}
