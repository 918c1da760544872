//! Seeded synthetic fixtures with planted user interests.
//!
//! The taxonomy is a forest of subtrees. Every document is written about one
//! subtree and every user tweets mostly about the subtrees they are
//! interested in, so relevance is known exactly: a document is relevant to a
//! user iff its subtree is one of the user's interests.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{Datelike, NaiveDate};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{InputPaths, LdaSettings, RunConfig};
use crate::corpus_io::{CorpusDocument, SocialItem};
use crate::evaluation::Judgment;
use crate::pipeline::RecommendationRow;
use crate::taxonomy::{Concept, Taxonomy};
use crate::temporal::{days_since_epoch, DecaySpec, TimePoint};
use crate::text::TextNormalizer;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub seed: u64,
    pub now: NaiveDate,
    pub subtrees: usize,
    pub concepts: usize,
    pub documents: usize,
    pub users: usize,
    pub items_per_user: usize,
    pub background_items: usize,
    pub interests_per_user: usize,
    /// Chance that a concept mention in a user's item comes from one of the
    /// user's interests rather than a random subtree.
    pub topical_rate: f64,
    /// Chance that a concept mention in a document comes from another
    /// subtree.
    pub doc_noise: f64,
    /// Users (taken from the end) whose items all predate the social
    /// sliding window.
    pub stale_users: usize,
    pub first_year: i32,
    /// Items are spread over this many days before `now`.
    pub item_span_days: i64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            seed: 1,
            now: NaiveDate::from_ymd_opt(2016, 6, 1).expect("valid date"),
            subtrees: 5,
            concepts: 200,
            documents: 1000,
            users: 20,
            items_per_user: 200,
            background_items: 2500,
            interests_per_user: 1,
            topical_rate: 0.8,
            doc_noise: 0.15,
            stale_users: 0,
            first_year: 2000,
            item_span_days: 700,
        }
    }
}

/// Which subtree each document is about and which subtrees each user likes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub doc_subtree: BTreeMap<String, usize>,
    pub user_interests: BTreeMap<String, BTreeSet<usize>>,
}

impl GroundTruth {
    pub fn is_relevant(&self, user: &str, doc: &str) -> bool {
        match (self.user_interests.get(user), self.doc_subtree.get(doc)) {
            (Some(interests), Some(subtree)) => interests.contains(subtree),
            _ => false,
        }
    }

    /// Labels every recommendation row.
    pub fn judge(&self, rows: &[RecommendationRow]) -> Vec<Judgment> {
        rows.iter()
            .map(|r| Judgment {
                user: r.user.clone(),
                strategy: r.strategy.clone(),
                doc_id: r.doc_id.clone(),
                rank: r.rank,
                relevant: self.is_relevant(&r.user, &r.doc_id),
            })
            .collect()
    }

    /// Share of relevant documents among those `spec` keeps as candidates,
    /// which is the expected precision of a uniformly random ranking.
    pub fn random_precision(&self, user: &str, corpus: &[CorpusDocument], spec: &DecaySpec) -> f64 {
        let kept: Vec<&CorpusDocument> = corpus
            .iter()
            .filter(|d| spec.factor(TimePoint::DocYear(d.year)).is_ok_and(|f| f > 0.0))
            .collect();
        if kept.is_empty() {
            return 0.0;
        }
        let relevant = kept.iter().filter(|d| self.is_relevant(user, &d.id)).count();
        relevant as f64 / kept.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticFixture {
    pub spec: SyntheticSpec,
    pub taxonomy: Taxonomy,
    pub synonyms: Vec<(String, String)>,
    pub corpus: Vec<CorpusDocument>,
    pub items: Vec<SocialItem>,
    pub background: Vec<SocialItem>,
    pub truth: GroundTruth,
}

/// Pronounceable words from consonant-vowel syllables. Words always end in
/// a vowel so suffix stripping leaves them alone.
struct WordSource {
    rng: ChaCha8Rng,
    used: HashSet<String>,
    normalizer: TextNormalizer,
}

impl WordSource {
    const CONSONANTS: &'static [u8] = b"bdfgklmnprtvz";
    const VOWELS: &'static [u8] = b"aeiou";

    fn word(&mut self, syllables: usize) -> String {
        loop {
            let mut w = String::with_capacity(syllables * 2);
            for _ in 0..syllables {
                w.push(*Self::CONSONANTS.choose(&mut self.rng).expect("nonempty") as char);
                w.push(*Self::VOWELS.choose(&mut self.rng).expect("nonempty") as char);
            }
            let survives = self.normalizer.normalize(&w).tokens == [w.clone()];
            if survives && self.used.insert(w.clone()) {
                return w;
            }
        }
    }
}

struct Subtree {
    concepts: Vec<String>,
}

fn build_taxonomy(spec: &SyntheticSpec, words: &mut WordSource) -> (Taxonomy, Vec<(String, String)>, Vec<Subtree>) {
    let s = spec.subtrees.max(1);
    let mut concepts = Vec::with_capacity(spec.concepts);
    let mut synonyms = Vec::new();
    let mut subtrees = Vec::with_capacity(s);
    for t in 0..s {
        let size = spec.concepts / s + usize::from(t < spec.concepts % s);
        let mut members = Vec::with_capacity(size);
        let root = format!("s{t}");
        concepts.push(Concept::new(root.clone(), words.word(3)));
        members.push(root.clone());
        let mids = if size >= 10 { 4 } else { size.saturating_sub(1).min(2) };
        for m in 0..mids {
            let id = format!("s{t}m{m}");
            concepts.push(Concept::new(id.clone(), words.word(3)).with_parent(root.clone()));
            synonyms.push((id.clone(), words.word(3)));
            members.push(id);
        }
        for l in 0..size.saturating_sub(1 + mids) {
            let id = format!("s{t}l{l}");
            let label = if l % 5 == 4 {
                format!("{} {}", words.word(3), words.word(3))
            } else {
                words.word(3)
            };
            let parent = if mids == 0 { root.clone() } else { format!("s{t}m{}", l % mids) };
            concepts.push(Concept::new(id.clone(), label).with_parent(parent));
            members.push(id);
        }
        subtrees.push(Subtree { concepts: members });
    }
    let taxonomy = Taxonomy::from_concepts(concepts).expect("generated taxonomy is valid");
    (taxonomy, synonyms, subtrees)
}

impl SyntheticFixture {
    pub fn generate(spec: &SyntheticSpec) -> Self {
        let mut words = WordSource {
            rng: ChaCha8Rng::seed_from_u64(spec.seed),
            used: HashSet::new(),
            normalizer: TextNormalizer::english(),
        };
        let (taxonomy, synonyms, subtrees) = build_taxonomy(spec, &mut words);
        let alt: BTreeMap<&str, &str> = synonyms.iter().map(|(c, l)| (c.as_str(), l.as_str())).collect();
        let filler: Vec<String> = (0..400).map(|i| words.word(if i % 2 == 0 { 2 } else { 4 })).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed.wrapping_add(1));

        let mention = |rng: &mut ChaCha8Rng, subtree: usize| -> String {
            let id = subtrees[subtree].concepts.choose(rng).expect("subtree has concepts");
            match alt.get(id.as_str()) {
                Some(label) if rng.gen_bool(0.3) => (*label).to_string(),
                _ => taxonomy.get(id).expect("member exists").pref_label.clone(),
            }
        };
        let n_sub = subtrees.len();
        let other = |rng: &mut ChaCha8Rng, not: usize| -> usize {
            if n_sub == 1 {
                return 0;
            }
            let pick = rng.gen_range(0..n_sub - 1);
            if pick >= not {
                pick + 1
            } else {
                pick
            }
        };
        let text = |rng: &mut ChaCha8Rng, mut parts: Vec<String>, n_filler: usize| -> String {
            parts.extend((0..n_filler).map(|_| filler.choose(rng).expect("filler").clone()));
            parts.shuffle(rng);
            parts.join(" ")
        };

        let mut corpus = Vec::with_capacity(spec.documents);
        let mut doc_subtree = BTreeMap::new();
        let now_year = spec.now.year();
        for d in 0..spec.documents {
            let id = format!("doc{d:05}");
            let subtree = rng.gen_range(0..n_sub);
            let topical = |rng: &mut ChaCha8Rng| {
                let t = if rng.gen_bool(spec.doc_noise) { other(rng, subtree) } else { subtree };
                mention(rng, t)
            };
            let title_mentions = (0..2).map(|_| topical(&mut rng)).collect();
            let mut title = text(&mut rng, title_mentions, 3);
            title[..1].make_ascii_uppercase();
            let body_mentions = (0..10).map(|_| topical(&mut rng)).collect();
            let fulltext = text(&mut rng, body_mentions, 40);
            corpus.push(CorpusDocument {
                id: id.clone(),
                title,
                fulltext: Some(fulltext),
                year: rng.gen_range(spec.first_year..=now_year),
            });
            doc_subtree.insert(id, subtree);
        }

        let now_days = days_since_epoch(spec.now);
        let mut items = Vec::with_capacity(spec.users * spec.items_per_user);
        let mut user_interests = BTreeMap::new();
        for u in 0..spec.users {
            let user = format!("user{u:03}");
            let mut interests = BTreeSet::from([u % n_sub]);
            while interests.len() < spec.interests_per_user.clamp(1, n_sub) {
                interests.insert(rng.gen_range(0..n_sub));
            }
            let liked: Vec<usize> = interests.iter().copied().collect();
            let stale = u >= spec.users.saturating_sub(spec.stale_users);
            for i in 0..spec.items_per_user {
                let age = if stale {
                    rng.gen_range(260..=spec.item_span_days.max(261))
                } else {
                    rng.gen_range(0..=spec.item_span_days)
                };
                let n_mentions = rng.gen_range(1..=2);
                let mentions = (0..n_mentions)
                    .map(|_| {
                        let t = if rng.gen_bool(spec.topical_rate) {
                            *liked.choose(&mut rng).expect("interest")
                        } else {
                            rng.gen_range(0..n_sub)
                        };
                        let label = mention(&mut rng, t);
                        if rng.gen_bool(0.2) {
                            format!("#{label}")
                        } else {
                            label
                        }
                    })
                    .collect();
                let n_filler = rng.gen_range(4..=8);
                let mut body = text(&mut rng, mentions, n_filler);
                if rng.gen_bool(0.25) {
                    body.push_str(&format!(" https://t.co/{}", filler.choose(&mut rng).expect("filler")));
                }
                items.push(SocialItem {
                    id: format!("{user}-t{i:04}"),
                    user: user.clone(),
                    text: body,
                    days: now_days - age,
                });
            }
            user_interests.insert(user, interests);
        }

        let background = (0..spec.background_items)
            .map(|b| {
                let mentions = if rng.gen_bool(0.6) {
                    let t = rng.gen_range(0..n_sub);
                    vec![mention(&mut rng, t)]
                } else {
                    Vec::new()
                };
                let n_filler = rng.gen_range(4..=9);
                SocialItem {
                    id: format!("bg{b:05}"),
                    user: format!("bguser{:02}", b % 50),
                    text: text(&mut rng, mentions, n_filler),
                    days: now_days - rng.gen_range(0..=spec.item_span_days),
                }
            })
            .collect();

        Self {
            spec: spec.clone(),
            taxonomy,
            synonyms,
            corpus,
            items,
            background,
            truth: GroundTruth {
                doc_subtree,
                user_interests,
            },
        }
    }

    /// A run config suited to desk-scale fixtures: small topic model,
    /// everything else at its defaults.
    pub fn run_config(&self) -> RunConfig {
        let paths = InputPaths {
            taxonomy: "taxonomy.json".into(),
            synonyms: Some("synonyms.tsv".into()),
            corpus: "corpus.jsonl".into(),
            tweets: "tweets.jsonl".into(),
            background: "background.jsonl".into(),
            stopwords: None,
            suffix_rules: None,
            lda_model_all: None,
            lda_model_title: None,
        };
        let mut config = RunConfig::new(paths, self.spec.now);
        config.seed = self.spec.seed;
        config.lda = LdaSettings {
            topics: 10,
            iterations: 60,
            inference_iterations: 30,
            min_df: 3,
            ..LdaSettings::default()
        };
        config
    }

    /// Writes all input files, `truth.json` and `scirec.toml` into `dir`
    /// and returns the config path.
    pub fn write(&self, dir: impl AsRef<Path>) -> std::io::Result<PathBuf> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        fs::write(dir.join("taxonomy.json"), self.taxonomy.to_json_string())?;
        let synonyms: String = self.synonyms.iter().map(|(c, l)| format!("{c}\t{l}\n")).collect();
        fs::write(dir.join("synonyms.tsv"), synonyms)?;
        fs::write(dir.join("corpus.jsonl"), jsonl(&self.corpus))?;
        fs::write(dir.join("tweets.jsonl"), items_jsonl(&self.items))?;
        fs::write(dir.join("background.jsonl"), items_jsonl(&self.background))?;
        let truth = serde_json::to_string_pretty(&self.truth).map_err(std::io::Error::other)?;
        fs::write(dir.join("truth.json"), truth)?;
        let config_path = dir.join("scirec.toml");
        fs::write(&config_path, self.run_config().to_toml_string())?;
        Ok(config_path)
    }
}

fn jsonl<T: Serialize>(rows: &[T]) -> String {
    rows.iter()
        .map(|r| serde_json::to_string(r).expect("row serializes") + "\n")
        .collect()
}

#[derive(Serialize)]
struct ItemLine<'a> {
    id: &'a str,
    user: &'a str,
    text: &'a str,
    date: String,
}

fn items_jsonl(items: &[SocialItem]) -> String {
    let epoch = NaiveDate::from_ymd_opt(1970, 1, 1).expect("valid epoch");
    let lines: Vec<ItemLine> = items
        .iter()
        .map(|i| ItemLine {
            id: &i.id,
            user: &i.user,
            text: &i.text,
            date: (epoch + chrono::Duration::days(i.days)).format("%Y-%m-%d").to_string(),
        })
        .collect();
    jsonl(&lines)
}

pub fn load_truth(path: impl AsRef<Path>) -> std::io::Result<GroundTruth> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(std::io::Error::other)
}
