//! End-to-end runs: profile documents and users, rank every strategy, and
//! write recommendations with a run manifest.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::Path;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ConfigError, RunConfig, StrategyConfig};
use crate::corpus_io::{
    corpus_stats, extract_documents, extract_items, load_background, load_corpus, load_items, profile_corpus,
    ContentMode, CorpusDocument, CorpusError, DocProfiler, ExtractedText, ItemStreams, SocialItem,
};
use crate::evaluation::{aggregate, load_judgments, per_user_csv, EvalError, Judgment, Metric, MetricParams, MetricTable, UserMetric};
use crate::profiling::{
    activated_counts, cfidf_weights, compute_item_stats, hcfidf_weights, sample_background, ConceptProfile,
    DocFreqMode, ProfileMethod, ProfilingError,
};
use crate::ranking::{rank_top_k, Candidate, RankError, RankedList};
use crate::seed::{derive_seed, sha256_hex};
use crate::taxonomy::{load_synonym_table, load_taxonomy, Taxonomy, TaxonomyError};
use crate::temporal::{aggregate_user_profile, DecaySpec, TemporalError, TimePoint};
use crate::text::{
    load_stopwords, load_suffix_rules, parse_stopwords, parse_suffix_rules, ConceptCounts, LabelIndex, TextError,
    TextNormalizer,
};
use crate::topic_model::{
    build_vocabulary, train_lda, user_topic_profile, TimedTokens, TopicModel, TopicModelError,
};

pub const RECOMMENDATIONS_FILE: &str = "recommendations.jsonl";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const METRICS_FILE: &str = "metrics.csv";
pub const PER_USER_METRICS_FILE: &str = "metrics_per_user.csv";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Taxonomy(#[from] TaxonomyError),
    #[error(transparent)]
    Text(#[from] TextError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    TopicModel(#[from] TopicModelError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("failed to access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Recommendations { path: String, line: usize, message: String },
    #[error("judgment (user `{user}`, strategy `{strategy}`, rank {rank}) has no matching recommendation")]
    UnknownRecommendation { user: String, strategy: String, rank: usize },
    #[error("judgment (user `{user}`, strategy `{strategy}`, rank {rank}) names `{judged}` but `{recommended}` was recommended")]
    DocMismatch {
        user: String,
        strategy: String,
        rank: usize,
        judged: String,
        recommended: String,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// One line of `recommendations.jsonl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommendationRow {
    pub user: String,
    pub strategy: String,
    pub rank: usize,
    pub doc_id: String,
    pub score: f64,
}

/// Why a (user, strategy) pair produced no list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum UnservableReason {
    /// The decayed user profile has no positive weight.
    EmptyProfile,
    /// Every candidate document fell outside the decay window.
    NoCandidates,
    /// Any other failure; the detail carries the message.
    Error,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PairOutcome {
    Served(RankedList),
    Unservable { reason: UnservableReason, detail: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairResult {
    pub user: String,
    pub strategy: StrategyConfig,
    pub outcome: PairOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairRecord {
    pub user: String,
    pub strategy: String,
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<UnservableReason>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    pub recommendations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub format: &'static str,
    pub params: RunConfig,
    /// Standard deviations in metric tables divide by n.
    pub sd: &'static str,
    pub inputs: BTreeMap<String, InputDigest>,
    pub lda_models: BTreeMap<String, String>,
    pub strategies: Vec<String>,
    pub users: usize,
    pub served: usize,
    pub unservable: usize,
    pub recommendation_rows: usize,
    pub pairs: Vec<PairRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub results: Vec<PairResult>,
    pub manifest: Manifest,
}

impl RunOutput {
    /// Rows in (user, canonical strategy, rank) order.
    pub fn rows(&self) -> Vec<RecommendationRow> {
        let mut rows = Vec::new();
        for r in &self.results {
            if let PairOutcome::Served(list) = &r.outcome {
                rows.extend(list.entries.iter().map(|e| RecommendationRow {
                    user: r.user.clone(),
                    strategy: list.strategy.clone(),
                    rank: e.rank,
                    doc_id: e.doc_id.clone(),
                    score: e.score,
                }));
            }
        }
        rows
    }

    pub fn recommendations_jsonl(&self) -> String {
        let mut out = String::new();
        for row in self.rows() {
            out.push_str(&serde_json::to_string(&row).expect("row serializes"));
            out.push('\n');
        }
        out
    }

    pub fn manifest_json(&self) -> String {
        let mut json = serde_json::to_string_pretty(&self.manifest).expect("manifest serializes");
        json.push('\n');
        json
    }

    /// Writes `recommendations.jsonl` and `manifest.json` into `dir`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<(), PipelineError> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let recs = dir.join(RECOMMENDATIONS_FILE);
        fs::write(&recs, self.recommendations_jsonl()).map_err(io_err(&recs))?;
        let manifest = dir.join(MANIFEST_FILE);
        fs::write(&manifest, self.manifest_json()).map_err(io_err(&manifest))?;
        Ok(())
    }
}

/// Everything loaded from the config's input files.
pub struct Inputs {
    pub now: NaiveDate,
    pub taxonomy: Taxonomy,
    pub normalizer: TextNormalizer,
    pub index: LabelIndex,
    pub streams: ItemStreams,
    pub background: Vec<SocialItem>,
    pub digests: BTreeMap<String, InputDigest>,
}

impl Inputs {
    pub fn load(config: &RunConfig) -> Result<Self, PipelineError> {
        config.check()?;
        let now = config.now_date()?;
        let p = &config.paths;
        let mut taxonomy = load_taxonomy(config.resolve(&p.taxonomy))?;
        if let Some(synonyms) = &p.synonyms {
            taxonomy = taxonomy.merge_synonyms(&load_synonym_table(config.resolve(synonyms))?)?;
        }
        let stopwords = match &p.stopwords {
            Some(path) => load_stopwords(config.resolve(path))?,
            None => parse_stopwords(include_str!("../data/stopwords_en.txt")),
        };
        let rules = match &p.suffix_rules {
            Some(path) => load_suffix_rules(config.resolve(path))?,
            None => parse_suffix_rules(include_str!("../data/suffix_rules.tsv"))?,
        };
        let normalizer = TextNormalizer::new(stopwords, rules);
        let index = LabelIndex::build(&taxonomy, &normalizer);
        if index.dropped_labels() > 0 {
            log::warn!("{} labels normalize to nothing and are ignored", index.dropped_labels());
        }
        let streams = load_items(config.resolve(&p.tweets), now)?;
        let background = load_background(config.resolve(&p.background))?;

        let mut digests = BTreeMap::new();
        for (name, shown, path) in config.input_files() {
            let bytes = fs::read(&path).map_err(io_err(&path))?;
            digests.insert(
                name.to_string(),
                InputDigest {
                    path: shown,
                    sha256: sha256_hex(&bytes),
                },
            );
        }
        Ok(Self {
            now,
            taxonomy,
            normalizer,
            index,
            streams,
            background,
            digests,
        })
    }

    pub fn corpus(&self, config: &RunConfig, mode: ContentMode) -> Result<Vec<CorpusDocument>, PipelineError> {
        Ok(load_corpus(config.resolve(&config.paths.corpus), mode, self.now)?)
    }
}

/// Trains a topic model on the corpus as seen in `mode`.
pub fn train_topic_model(
    config: &RunConfig,
    docs: &[ExtractedText],
    mode: ContentMode,
) -> Result<TopicModel, PipelineError> {
    let tokens: Vec<&[String]> = docs.iter().map(|d| d.tokens.tokens.as_slice()).collect();
    let corpus: Vec<Vec<&str>> = tokens.iter().map(|t| t.iter().map(String::as_str).collect()).collect();
    let vocabulary = build_vocabulary(&corpus, config.lda.min_df)?;
    let params = config.lda.params(derive_seed(config.seed, &["lda", mode.as_str()]));
    log::info!(
        "training {}-topic model on {} documents ({mode}, vocabulary {})",
        params.topics,
        docs.len(),
        vocabulary.len()
    );
    Ok(train_lda(&corpus, vocabulary, params)?)
}

/// Trains (or loads) the topic models for the content modes in `modes`.
pub fn topic_models(
    config: &RunConfig,
    inputs: &Inputs,
    modes: &[ContentMode],
) -> Result<BTreeMap<ContentMode, (TopicModel, String)>, PipelineError> {
    let mut models = BTreeMap::new();
    for &mode in modes {
        let entry = match config.lda_model_path(mode) {
            Some(path) => (TopicModel::load(&path)?, format!("loaded from {}", path.display())),
            None => {
                let docs = extract_documents(&inputs.corpus(config, mode)?, &inputs.normalizer, &inputs.index);
                (train_topic_model(config, &docs, mode)?, "trained".to_string())
            }
        };
        models.insert(mode, entry);
    }
    Ok(models)
}

/// Document side of one content mode.
struct ContentView {
    years: HashMap<String, i32>,
    order: Vec<String>,
    profiles: BTreeMap<ProfileMethod, BTreeMap<String, ConceptProfile>>,
}

impl ContentView {
    fn candidates(&self, method: ProfileMethod) -> Vec<Candidate<'_>> {
        let profiles = &self.profiles[&method];
        self.order
            .iter()
            .map(|id| Candidate {
                doc_id: id,
                profile: &profiles[id],
                published: TimePoint::DocYear(self.years[id]),
            })
            .collect()
    }
}

fn build_view(
    config: &RunConfig,
    inputs: &Inputs,
    mode: ContentMode,
    methods: &[ProfileMethod],
    model: Option<&TopicModel>,
) -> Result<ContentView, PipelineError> {
    let corpus = inputs.corpus(config, mode)?;
    let docs = extract_documents(&corpus, &inputs.normalizer, &inputs.index);
    let mut profiles = BTreeMap::new();
    for &method in methods {
        let map = match method {
            ProfileMethod::CfIdf => {
                let stats = corpus_stats(&docs, DocFreqMode::Explicit, None)?;
                profile_corpus(&docs, &DocProfiler::CfIdf { stats: &stats })?
            }
            ProfileMethod::HcfIdf => {
                let stats = corpus_stats(&docs, config.doc_freq_mode, Some(&inputs.taxonomy))?;
                profile_corpus(
                    &docs,
                    &DocProfiler::HcfIdf {
                        stats: &stats,
                        taxonomy: &inputs.taxonomy,
                    },
                )?
            }
            ProfileMethod::Lda => profile_corpus(
                &docs,
                &DocProfiler::Lda {
                    model: model.expect("topic model prepared for LDA strategies"),
                    iterations: config.lda.inference_iterations,
                    seed: config.seed,
                },
            )?,
        };
        profiles.insert(method, map);
    }
    Ok(ContentView {
        years: corpus.iter().map(|d| (d.id.clone(), d.year)).collect(),
        order: corpus.into_iter().map(|d| d.id).collect(),
        profiles,
    })
}

/// Per-item weight fragments of one user for CF-IDF or HCF-IDF.
fn item_fragments(
    method: ProfileMethod,
    items: &[SocialItem],
    extracted: &[ExtractedText],
    background: &[&ExtractedText],
    config: &RunConfig,
    taxonomy: &Taxonomy,
) -> Result<Vec<(ConceptProfile, TimePoint)>, ProfilingError> {
    let activated = method == ProfileMethod::HcfIdf && config.doc_freq_mode == DocFreqMode::Activated;
    let counted = |e: &ExtractedText| -> Result<ConceptCounts, ProfilingError> {
        if activated {
            activated_counts(&e.concepts, taxonomy)
        } else {
            Ok(e.concepts.clone())
        }
    };
    let user_counts = extracted
        .iter()
        .map(|e| Ok((e.id.as_str(), counted(e)?)))
        .collect::<Result<Vec<_>, ProfilingError>>()?;
    let bg_counts = background
        .iter()
        .map(|e| Ok((e.id.as_str(), counted(e)?)))
        .collect::<Result<Vec<_>, ProfilingError>>()?;
    let stats = compute_item_stats(&user_counts, &bg_counts)?;
    items
        .iter()
        .zip(extracted)
        .map(|(item, e)| {
            let fragment = match method {
                ProfileMethod::HcfIdf => hcfidf_weights(item.user.clone(), &e.concepts, &stats, taxonomy)?,
                _ => cfidf_weights(item.user.clone(), &e.concepts, &stats),
            };
            Ok((fragment, item.time()))
        })
        .collect()
}

fn unservable(reason: UnservableReason, detail: impl Into<String>) -> PairOutcome {
    PairOutcome::Unservable {
        reason,
        detail: detail.into(),
    }
}

fn from_rank_error(e: RankError) -> PairOutcome {
    match e {
        RankError::Unservable(_) => unservable(UnservableReason::EmptyProfile, e.to_string()),
        RankError::NoCandidates(_) => unservable(UnservableReason::NoCandidates, e.to_string()),
        other => unservable(UnservableReason::Error, other.to_string()),
    }
}

struct Prepared<'a> {
    config: &'a RunConfig,
    inputs: &'a Inputs,
    strategies: &'a [StrategyConfig],
    views: BTreeMap<ContentMode, ContentView>,
    models: BTreeMap<ContentMode, (TopicModel, String)>,
    background: Vec<ExtractedText>,
}

impl Prepared<'_> {
    fn serve_user(&self, user: &str, items: &[SocialItem]) -> Vec<PairResult> {
        let config = self.config;
        let now = self.inputs.now;
        let extracted = extract_items(items, &self.inputs.normalizer, &self.inputs.index);

        // user profiles that do not depend on content mode
        let mut concept_fragments: BTreeMap<ProfileMethod, Result<Vec<(ConceptProfile, TimePoint)>, String>> =
            BTreeMap::new();
        let needs_concepts = self.strategies.iter().any(|s| s.profiling.is_concept_based());
        if needs_concepts {
            let pool: Vec<&ExtractedText> = self.background.iter().collect();
            let sample = sample_background(
                &pool,
                items.len(),
                config.background_factor,
                derive_seed(config.seed, &["background", user]),
            );
            for method in [ProfileMethod::CfIdf, ProfileMethod::HcfIdf] {
                if !self.strategies.iter().any(|s| s.profiling == method) {
                    continue;
                }
                let fragments = match &sample {
                    Ok(sample) => item_fragments(method, items, &extracted, sample, config, &self.inputs.taxonomy)
                        .map_err(|e| e.to_string()),
                    Err(e) => Err(e.to_string()),
                };
                concept_fragments.insert(method, fragments);
            }
        }

        let mut out = Vec::with_capacity(self.strategies.len());
        for &strategy in self.strategies {
            let spec = DecaySpec::with_constants(strategy.decay, config.decay, now);
            let profile: Result<ConceptProfile, String> = match strategy.profiling {
                ProfileMethod::Lda => {
                    let (model, _) = &self.models[&strategy.content];
                    let timed: Vec<TimedTokens<'_>> = items
                        .iter()
                        .zip(&extracted)
                        .map(|(item, e)| TimedTokens {
                            id: &item.id,
                            days: item.days,
                            tokens: &e.tokens.tokens,
                        })
                        .collect();
                    let seed = derive_seed(config.seed, &["user", user, strategy.content.as_str()]);
                    Ok(user_topic_profile(model, user, &timed, config.lda.inference_iterations, seed))
                }
                method => match &concept_fragments[&method] {
                    Ok(fragments) => aggregate_user_profile(user, method, fragments, &spec)
                        .map_err(|e: TemporalError| e.to_string()),
                    Err(e) => Err(e.clone()),
                },
            };
            let outcome = match profile {
                Err(detail) => unservable(UnservableReason::Error, detail),
                Ok(profile) => {
                    let view = &self.views[&strategy.content];
                    let candidates = view.candidates(strategy.profiling);
                    match rank_top_k(&profile, &candidates, &spec, config.k, &strategy.id()) {
                        Ok(list) => PairOutcome::Served(list),
                        Err(e) => from_rank_error(e),
                    }
                }
            };
            out.push(PairResult {
                user: user.to_string(),
                strategy,
                outcome,
            });
        }
        out
    }
}

/// Runs every configured strategy for every user. The result depends only
/// on the input files, the seed and `now`.
pub fn run_experiment(config: &RunConfig) -> Result<RunOutput, PipelineError> {
    let inputs = Inputs::load(config)?;
    run_with_inputs(config, &inputs)
}

pub fn run_with_inputs(config: &RunConfig, inputs: &Inputs) -> Result<RunOutput, PipelineError> {
    let strategies = config.strategies()?;
    let mut modes: Vec<ContentMode> = strategies.iter().map(|s| s.content).collect();
    modes.sort();
    modes.dedup();
    let lda_modes: Vec<ContentMode> = modes
        .iter()
        .copied()
        .filter(|m| strategies.iter().any(|s| s.content == *m && s.profiling == ProfileMethod::Lda))
        .collect();
    let models = topic_models(config, inputs, &lda_modes)?;

    let mut views = BTreeMap::new();
    for &mode in &modes {
        let mut methods: Vec<ProfileMethod> = strategies
            .iter()
            .filter(|s| s.content == mode)
            .map(|s| s.profiling)
            .collect();
        methods.sort();
        methods.dedup();
        let model = models.get(&mode).map(|(m, _)| m);
        views.insert(mode, build_view(config, inputs, mode, &methods, model)?);
    }

    let background = extract_items(&inputs.background, &inputs.normalizer, &inputs.index);
    let prepared = Prepared {
        config,
        inputs,
        strategies: &strategies,
        views,
        models,
        background,
    };

    let users: Vec<(&String, &Vec<SocialItem>)> = inputs.streams.iter().collect();
    let results: Vec<PairResult> = users
        .par_iter()
        .flat_map_iter(|(user, items)| prepared.serve_user(user, items))
        .collect();

    let pairs: Vec<PairRecord> = results.iter().map(pair_record).collect();
    let served = pairs.iter().filter(|p| p.status == "served").count();
    let recommendation_rows = pairs.iter().map(|p| p.recommendations).sum();
    let manifest = Manifest {
        format: "scirec-run/1",
        params: config.clone(),
        sd: "population",
        inputs: inputs.digests.clone(),
        lda_models: prepared
            .models
            .iter()
            .map(|(mode, (model, origin))| {
                (mode.to_string(), format!("{origin}; sha256 {}", sha256_hex(model.to_json().as_bytes())))
            })
            .collect(),
        strategies: strategies.iter().map(StrategyConfig::id).collect(),
        users: users.len(),
        served,
        unservable: pairs.len() - served,
        recommendation_rows,
        pairs,
    };
    Ok(RunOutput { results, manifest })
}

fn pair_record(r: &PairResult) -> PairRecord {
    match &r.outcome {
        PairOutcome::Served(list) => PairRecord {
            user: r.user.clone(),
            strategy: r.strategy.id(),
            status: "served",
            reason: None,
            detail: None,
            recommendations: list.entries.len(),
        },
        PairOutcome::Unservable { reason, detail } => PairRecord {
            user: r.user.clone(),
            strategy: r.strategy.id(),
            status: "unservable",
            reason: Some(reason.clone()),
            detail: Some(detail.clone()),
            recommendations: 0,
        },
    }
}

pub fn read_recommendations(path: impl AsRef<Path>) -> Result<Vec<RecommendationRow>, PipelineError> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(io_err(path))?;
    let mut rows = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        rows.push(serde_json::from_str(&line).map_err(|e| PipelineError::Recommendations {
            path: path.display().to_string(),
            line: i + 1,
            message: e.to_string(),
        })?);
    }
    Ok(rows)
}

/// Checks that every judgment matches a recommended (user, strategy, rank)
/// and document.
pub fn check_judgments(recommendations: &[RecommendationRow], judgments: &[Judgment]) -> Result<(), PipelineError> {
    let index: HashMap<(&str, &str, usize), &str> = recommendations
        .iter()
        .map(|r| ((r.user.as_str(), r.strategy.as_str(), r.rank), r.doc_id.as_str()))
        .collect();
    for j in judgments {
        match index.get(&(j.user.as_str(), j.strategy.as_str(), j.rank)) {
            None => {
                return Err(PipelineError::UnknownRecommendation {
                    user: j.user.clone(),
                    strategy: j.strategy.clone(),
                    rank: j.rank,
                })
            }
            Some(doc) if *doc != j.doc_id => {
                return Err(PipelineError::DocMismatch {
                    user: j.user.clone(),
                    strategy: j.strategy.clone(),
                    rank: j.rank,
                    judged: j.doc_id.clone(),
                    recommended: doc.to_string(),
                })
            }
            Some(_) => {}
        }
    }
    Ok(())
}

/// All five metrics for judged recommendations.
pub fn evaluate(
    recommendations: &[RecommendationRow],
    judgments: &[Judgment],
    params: &MetricParams,
) -> Result<(MetricTable, Vec<UserMetric>), PipelineError> {
    if judgments.is_empty() {
        return Err(EvalError::Empty.into());
    }
    check_judgments(recommendations, judgments)?;
    Ok(aggregate(judgments, &Metric::ALL, params)?)
}

/// Reads both files, evaluates, and writes `metrics.csv` and
/// `metrics_per_user.csv` into `out_dir`.
pub fn evaluate_command(
    recommendations: impl AsRef<Path>,
    judgments: impl AsRef<Path>,
    params: &MetricParams,
    out_dir: impl AsRef<Path>,
) -> Result<MetricTable, PipelineError> {
    let recs = read_recommendations(recommendations)?;
    let judged = load_judgments(judgments)?;
    let (table, per_user) = evaluate(&recs, &judged, params)?;
    let out_dir = out_dir.as_ref();
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let metrics = out_dir.join(METRICS_FILE);
    fs::write(&metrics, table.to_csv()).map_err(io_err(&metrics))?;
    let per_user_path = out_dir.join(PER_USER_METRICS_FILE);
    fs::write(&per_user_path, per_user_csv(&per_user)).map_err(io_err(&per_user_path))?;
    Ok(table)
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ValidationReport {
    pub concepts: usize,
    pub documents: usize,
    pub users: usize,
    pub items: usize,
    pub background_items: usize,
    pub strategies: usize,
    pub problems: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.problems.is_empty()
    }
}

/// Loads every input and collects problems instead of stopping at the first.
pub fn validate(config: &RunConfig) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut problem = |e: &dyn std::fmt::Display| report_problem(&mut report.problems, e);
    if let Err(e) = config.check() {
        problem(&e);
        return report;
    }
    for (name, _, path) in config.input_files() {
        if !path.is_file() {
            problem(&format!("{name} file {} does not exist", path.display()));
        }
    }
    if !report.problems.is_empty() {
        return report;
    }
    let now = config.now_date().expect("checked above");
    report.strategies = config.strategies().map(|s| s.len()).unwrap_or(0);
    match Inputs::load(config) {
        Ok(inputs) => {
            report.concepts = inputs.taxonomy.len();
            report.users = inputs.streams.len();
            report.items = inputs.streams.values().map(Vec::len).sum();
            report.background_items = inputs.background.len();
            let mut ids = std::collections::HashSet::new();
            for item in inputs.streams.values().flatten() {
                ids.insert(item.id.as_str());
            }
            if let Some(b) = inputs.background.iter().find(|b| ids.contains(b.id.as_str())) {
                report.problems.push(format!("background item `{}` is also a user item", b.id));
            }
            let needed = inputs
                .streams
                .values()
                .map(|s| (config.background_factor * s.len() as f64).ceil() as usize)
                .max()
                .unwrap_or(0);
            if needed > inputs.background.len() {
                report.problems.push(format!(
                    "background pool holds {} items but the largest user needs {needed}",
                    inputs.background.len()
                ));
            }
        }
        Err(e) => report_problem(&mut report.problems, &e),
    }
    match load_corpus(config.resolve(&config.paths.corpus), ContentMode::All, now) {
        Ok(docs) => report.documents = docs.len(),
        Err(e) => report_problem(&mut report.problems, &e),
    }
    for mode in ContentMode::ALL {
        if let Some(path) = config.lda_model_path(mode) {
            if let Err(e) = TopicModel::load(&path) {
                report_problem(&mut report.problems, &e);
            }
        }
    }
    report
}

fn report_problem(problems: &mut Vec<String>, e: &dyn std::fmt::Display) {
    problems.push(e.to_string());
}
