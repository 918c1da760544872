//! Loading publications and social items, and profiling the publication
//! corpus.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::profiling::{
    activated_counts, cfidf_weights, compute_doc_stats, hcfidf_weights, ConceptProfile, DocCorpusStats, DocFreqMode,
    ProfileMethod, ProfilingError,
};
use crate::seed::derive_seed;
use crate::taxonomy::Taxonomy;
use crate::temporal::{days_since_epoch, TimePoint};
use crate::text::{ConceptCounts, LabelIndex, TextNormalizer, TokenSequence};
use crate::topic_model::TopicModel;

const EARLIEST_YEAR: i64 = 1800;
const SHOWN_PROBLEMS: usize = 20;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{} invalid line(s) in {path}:\n{}", problems.len(), format_problems(problems))]
    Invalid { path: String, problems: Vec<LineProblem> },
    #[error(transparent)]
    Profiling(#[from] ProfilingError),
}

/// A validation failure on one input line (1-based).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineProblem {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for LineProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

fn format_problems(problems: &[LineProblem]) -> String {
    let mut lines: Vec<String> = problems.iter().take(SHOWN_PROBLEMS).map(|p| format!("  {p}")).collect();
    if problems.len() > SHOWN_PROBLEMS {
        lines.push(format!("  ... and {} more", problems.len() - SHOWN_PROBLEMS));
    }
    lines.join("\n")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ContentMode {
    /// Title and full text.
    #[serde(rename = "ALL")]
    All,
    #[serde(rename = "TITLE")]
    Title,
}

impl ContentMode {
    pub const ALL: [ContentMode; 2] = [Self::All, Self::Title];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::All => "ALL",
            Self::Title => "TITLE",
        }
    }
}

impl fmt::Display for ContentMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ContentMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ALL" => Ok(Self::All),
            "TITLE" => Ok(Self::Title),
            other => Err(format!("unknown content mode `{other}` (expected ALL or TITLE)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusDocument {
    pub id: String,
    pub title: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fulltext: Option<String>,
    pub year: i32,
}

impl CorpusDocument {
    pub fn published(&self) -> TimePoint {
        TimePoint::DocYear(self.year)
    }

    /// The text profiled for this document: the title, followed by the full
    /// text when one was kept.
    pub fn text(&self) -> String {
        match &self.fulltext {
            Some(full) if !full.is_empty() => format!("{}\n{}", self.title, full),
            _ => self.title.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SocialItem {
    pub id: String,
    pub user: String,
    pub text: String,
    /// Days since 1970-01-01.
    pub days: i64,
}

impl SocialItem {
    pub fn time(&self) -> TimePoint {
        TimePoint::ItemDays(self.days)
    }
}

/// Each user's items in ascending (time, id) order.
pub type ItemStreams = BTreeMap<String, Vec<SocialItem>>;

#[derive(Deserialize)]
struct RawDocument {
    id: Option<String>,
    title: Option<String>,
    fulltext: Option<String>,
    year: Option<i64>,
}

#[derive(Deserialize)]
struct RawItem {
    id: Option<String>,
    user: Option<String>,
    text: Option<String>,
    date: Option<String>,
    days: Option<i64>,
}

fn open(path: &Path) -> Result<File, CorpusError> {
    File::open(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Non-blank lines with their 1-based line numbers.
fn lines(reader: impl Read, path: &str) -> Result<Vec<(usize, String)>, CorpusError> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line.map_err(|source| CorpusError::Io {
            path: path.to_string(),
            source,
        })?;
        if !line.trim().is_empty() {
            out.push((i + 1, line));
        }
    }
    Ok(out)
}

fn finish<T>(path: &str, value: T, problems: Vec<LineProblem>) -> Result<T, CorpusError> {
    if problems.is_empty() {
        Ok(value)
    } else {
        Err(CorpusError::Invalid {
            path: path.to_string(),
            problems,
        })
    }
}

/// Parses a JSONL publication corpus. In `Title` mode full texts are dropped
/// here, before anything else sees them. Years must lie in `1800..=max_year`.
pub fn read_corpus(
    reader: impl Read,
    path: &str,
    mode: ContentMode,
    max_year: i32,
) -> Result<Vec<CorpusDocument>, CorpusError> {
    let mut docs = Vec::new();
    let mut problems = Vec::new();
    let mut seen = HashSet::new();
    for (line, text) in lines(reader, path)? {
        let mut fail = |message: String| problems.push(LineProblem { line, message });
        let raw: RawDocument = match serde_json::from_str(&text) {
            Ok(raw) => raw,
            Err(e) => {
                fail(format!("malformed JSON: {e}"));
                continue;
            }
        };
        let Some(id) = raw.id.filter(|id| !id.trim().is_empty()) else {
            fail("missing id".into());
            continue;
        };
        let Some(title) = raw.title.filter(|t| !t.trim().is_empty()) else {
            fail(format!("document `{id}` has no title"));
            continue;
        };
        let Some(year) = raw.year else {
            fail(format!("document `{id}` has no year"));
            continue;
        };
        if !(EARLIEST_YEAR..=i64::from(max_year)).contains(&year) {
            fail(format!("document `{id}` has implausible year {year}"));
            continue;
        }
        if !seen.insert(id.clone()) {
            fail(format!("duplicate document id `{id}`"));
            continue;
        }
        docs.push(CorpusDocument {
            id,
            title,
            fulltext: match mode {
                ContentMode::All => raw.fulltext,
                ContentMode::Title => None,
            },
            year: year as i32,
        });
    }
    if docs.is_empty() && problems.is_empty() {
        log::warn!("corpus {path} is empty");
    }
    finish(path, docs, problems)
}

pub fn load_corpus(path: impl AsRef<Path>, mode: ContentMode, now: NaiveDate) -> Result<Vec<CorpusDocument>, CorpusError> {
    let path = path.as_ref();
    read_corpus(open(path)?, &path.display().to_string(), mode, now.year())
}

fn parse_items(reader: impl Read, path: &str, need_user: bool) -> Result<Vec<SocialItem>, CorpusError> {
    let mut items = Vec::new();
    let mut problems = Vec::new();
    let mut seen = HashSet::new();
    for (line, text) in lines(reader, path)? {
        let mut fail = |message: String| problems.push(LineProblem { line, message });
        let raw: RawItem = match serde_json::from_str(&text) {
            Ok(raw) => raw,
            Err(e) => {
                fail(format!("malformed JSON: {e}"));
                continue;
            }
        };
        let Some(id) = raw.id.filter(|id| !id.trim().is_empty()) else {
            fail("missing id".into());
            continue;
        };
        let user = raw.user.unwrap_or_default();
        if need_user && user.trim().is_empty() {
            fail(format!("item `{id}` has no user"));
            continue;
        }
        let days = match (raw.date, raw.days) {
            (Some(date), None) => match NaiveDate::parse_from_str(&date, "%Y-%m-%d") {
                Ok(d) => days_since_epoch(d),
                Err(_) => {
                    fail(format!("item `{id}` has malformed date `{date}` (expected YYYY-MM-DD)"));
                    continue;
                }
            },
            (None, Some(days)) => days,
            (Some(_), Some(_)) => {
                fail(format!("item `{id}` gives both date and days"));
                continue;
            }
            (None, None) => {
                fail(format!("item `{id}` has no timestamp"));
                continue;
            }
        };
        if !seen.insert(id.clone()) {
            fail(format!("duplicate item id `{id}`"));
            continue;
        }
        items.push(SocialItem {
            id,
            user,
            text: raw.text.unwrap_or_default(),
            days,
        });
    }
    finish(path, items, problems)
}

/// Parses a JSONL file of social items and groups it by user. Items dated
/// after `now` are rejected.
pub fn read_items(reader: impl Read, path: &str, now: NaiveDate) -> Result<ItemStreams, CorpusError> {
    let items = parse_items(reader, path, true)?;
    let now_days = days_since_epoch(now);
    let late: Vec<LineProblem> = items
        .iter()
        .filter(|item| item.days > now_days)
        .map(|item| LineProblem {
            line: 0,
            message: format!("item `{}` is dated after {now}", item.id),
        })
        .collect();
    finish(path, (), late)?;
    Ok(group_items(items))
}

pub fn load_items(path: impl AsRef<Path>, now: NaiveDate) -> Result<ItemStreams, CorpusError> {
    let path = path.as_ref();
    read_items(open(path)?, &path.display().to_string(), now)
}

pub fn group_items(items: Vec<SocialItem>) -> ItemStreams {
    let mut streams = ItemStreams::new();
    for item in items {
        streams.entry(item.user.clone()).or_default().push(item);
    }
    for stream in streams.values_mut() {
        stream.sort_by(|a, b| a.days.cmp(&b.days).then_with(|| a.id.cmp(&b.id)));
    }
    streams
}

/// Parses the background pool. The `user` field is optional here and file
/// order is kept.
pub fn read_background(reader: impl Read, path: &str) -> Result<Vec<SocialItem>, CorpusError> {
    parse_items(reader, path, false)
}

pub fn load_background(path: impl AsRef<Path>) -> Result<Vec<SocialItem>, CorpusError> {
    let path = path.as_ref();
    read_background(open(path)?, &path.display().to_string())
}

/// A text after normalization and concept extraction.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractedText {
    pub id: String,
    pub tokens: TokenSequence,
    pub concepts: ConceptCounts,
}

impl ExtractedText {
    pub fn new(id: impl Into<String>, text: &str, normalizer: &TextNormalizer, index: &LabelIndex) -> Self {
        let tokens = normalizer.normalize(text);
        let concepts = index.extract(&tokens);
        Self {
            id: id.into(),
            tokens,
            concepts,
        }
    }
}

/// Extracts every document in parallel, keeping corpus order.
pub fn extract_documents(docs: &[CorpusDocument], normalizer: &TextNormalizer, index: &LabelIndex) -> Vec<ExtractedText> {
    docs.par_iter()
        .map(|d| ExtractedText::new(d.id.clone(), &d.text(), normalizer, index))
        .collect()
}

pub fn extract_items(items: &[SocialItem], normalizer: &TextNormalizer, index: &LabelIndex) -> Vec<ExtractedText> {
    items
        .iter()
        .map(|i| ExtractedText::new(i.id.clone(), &i.text, normalizer, index))
        .collect()
}

/// Document frequencies over the extracted corpus. With
/// [`DocFreqMode::Activated`] a document also counts for every concept its
/// mentions activate in `taxonomy`.
pub fn corpus_stats(
    docs: &[ExtractedText],
    mode: DocFreqMode,
    taxonomy: Option<&Taxonomy>,
) -> Result<DocCorpusStats, CorpusError> {
    match (mode, taxonomy) {
        (DocFreqMode::Activated, Some(taxonomy)) => {
            let activated = docs
                .iter()
                .map(|d| activated_counts(&d.concepts, taxonomy))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(compute_doc_stats(&activated))
        }
        _ => Ok(compute_doc_stats(docs.iter().map(|d| &d.concepts))),
    }
}

/// How document profiles are computed.
#[derive(Debug, Clone, Copy)]
pub enum DocProfiler<'a> {
    CfIdf {
        stats: &'a DocCorpusStats,
    },
    HcfIdf {
        stats: &'a DocCorpusStats,
        taxonomy: &'a Taxonomy,
    },
    Lda {
        model: &'a TopicModel,
        iterations: usize,
        seed: u64,
    },
}

impl DocProfiler<'_> {
    pub fn method(&self) -> ProfileMethod {
        match self {
            Self::CfIdf { .. } => ProfileMethod::CfIdf,
            Self::HcfIdf { .. } => ProfileMethod::HcfIdf,
            Self::Lda { .. } => ProfileMethod::Lda,
        }
    }
}

pub fn profile_document(doc: &ExtractedText, profiler: &DocProfiler<'_>) -> Result<ConceptProfile, CorpusError> {
    Ok(match *profiler {
        DocProfiler::CfIdf { stats } => cfidf_weights(doc.id.clone(), &doc.concepts, stats),
        DocProfiler::HcfIdf { stats, taxonomy } => hcfidf_weights(doc.id.clone(), &doc.concepts, stats, taxonomy)?,
        DocProfiler::Lda {
            model,
            iterations,
            seed,
        } => model
            .infer(&doc.tokens.tokens, iterations, derive_seed(seed, &["doc", &doc.id]))
            .to_profile(doc.id.clone()),
    })
}

/// Profiles of every document, keyed by id. Documents without concepts get
/// empty profiles and stay in the map.
pub fn profile_corpus(
    docs: &[ExtractedText],
    profiler: &DocProfiler<'_>,
) -> Result<BTreeMap<String, ConceptProfile>, CorpusError> {
    docs.par_iter()
        .map(|d| Ok((d.id.clone(), profile_document(d, profiler)?)))
        .collect()
}
