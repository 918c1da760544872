//! Ranking-quality metrics over binary relevance judgments and their
//! per-strategy aggregation.
//!
//! All metrics take the relevance labels ordered by true rank (index 0 is
//! rank 1) and ignore anything past rank `k`.

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("viewing half-life theta must exceed 1, got {0}")]
    InvalidTheta(f64),
    #[error("k must be at least 1")]
    InvalidK,
    #[error("duplicate judgment for (user {user}, strategy {strategy}, rank {rank})")]
    DuplicateJudgment { user: String, strategy: String, rank: usize },
    #[error("ranks for (user {user}, strategy {strategy}) skip rank {rank}")]
    RankGap { user: String, strategy: String, rank: usize },
    #[error("no judgments to evaluate")]
    Empty,
    #[error("judgments line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Sum of the half-life utilities `1 / 2^((r-1)/(theta-1))` for ranks `1..=k`.
pub fn rankscore_max(theta: f64, k: usize) -> f64 {
    (1..=k).map(|r| rank_utility(r, theta)).sum()
}

fn rank_utility(rank: usize, theta: f64) -> f64 {
    1.0 / 2f64.powf((rank as f64 - 1.0) / (theta - 1.0))
}

/// Half-life utility of the relevant ranks, normalized by the perfect list.
pub fn rankscore(relevance: &[bool], theta: f64, k: usize) -> Result<f64, EvalError> {
    if theta.is_nan() || theta <= 1.0 {
        return Err(EvalError::InvalidTheta(theta));
    }
    if k == 0 {
        return Err(EvalError::InvalidK);
    }
    let raw = hits(relevance, k).fold(0.0, |acc, r| acc + rank_utility(r, theta));
    Ok(raw / rankscore_max(theta, k))
}

/// 1-based ranks of the relevant entries within the first `k`.
fn hits(relevance: &[bool], k: usize) -> impl Iterator<Item = usize> + '_ {
    relevance
        .iter()
        .take(k)
        .enumerate()
        .filter(|(_, rel)| **rel)
        .map(|(i, _)| i + 1)
}

/// Relevant entries among the first `k`, over `k`. Missing tail entries
/// count as irrelevant.
pub fn precision_at_k(relevance: &[bool], k: usize) -> Result<f64, EvalError> {
    if k == 0 {
        return Err(EvalError::InvalidK);
    }
    Ok(hits(relevance, k).count() as f64 / k as f64)
}

/// Mean of the precision at each relevant rank; 0 without hits.
pub fn average_precision(relevance: &[bool]) -> f64 {
    let mut found = 0usize;
    let mut sum = 0.0;
    for rank in hits(relevance, relevance.len()) {
        found += 1;
        sum += found as f64 / rank as f64;
    }
    if found == 0 {
        0.0
    } else {
        sum / found as f64
    }
}

/// Inverse rank of the first relevant entry; 0 without hits.
pub fn reciprocal_rank(relevance: &[bool]) -> f64 {
    hits(relevance, relevance.len())
        .next()
        .map_or(0.0, |rank| 1.0 / rank as f64)
}

/// Normalized DCG with the `log2(i + 1)` discount; 0 without hits.
pub fn ndcg(relevance: &[bool], k: usize) -> f64 {
    let gain = |rank: usize| 1.0 / ((rank + 1) as f64).log2();
    let dcg: f64 = hits(relevance, k).map(gain).sum();
    let n_hits = hits(relevance, k).count();
    if n_hits == 0 {
        return 0.0;
    }
    let ideal: f64 = (1..=n_hits).map(gain).sum();
    (dcg / ideal).min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Metric {
    Rankscore,
    Precision,
    AveragePrecision,
    ReciprocalRank,
    Ndcg,
}

impl Metric {
    pub const ALL: [Metric; 5] = [
        Self::Rankscore,
        Self::Precision,
        Self::AveragePrecision,
        Self::ReciprocalRank,
        Self::Ndcg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Rankscore => "rankscore",
            Self::Precision => "precision",
            Self::AveragePrecision => "ap",
            Self::ReciprocalRank => "rr",
            Self::Ndcg => "ndcg",
        }
    }

    pub fn compute(self, relevance: &[bool], params: &MetricParams) -> Result<f64, EvalError> {
        let k = params.k;
        let within_k = &relevance[..relevance.len().min(k)];
        Ok(match self {
            Self::Rankscore => rankscore(relevance, params.theta, k)?,
            Self::Precision => precision_at_k(relevance, k)?,
            Self::AveragePrecision => average_precision(within_k),
            Self::ReciprocalRank => reciprocal_rank(within_k),
            Self::Ndcg => ndcg(relevance, k),
        })
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown metric `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricParams {
    /// Recommendation list length.
    pub k: usize,
    /// Viewing half-life for rankscore.
    pub theta: f64,
}

impl Default for MetricParams {
    fn default() -> Self {
        Self { k: 5, theta: 5.0 }
    }
}

/// One relevance label for a recommendation at its true rank.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Judgment {
    pub user: String,
    pub strategy: String,
    pub doc_id: String,
    pub rank: usize,
    pub relevant: bool,
}

#[derive(Deserialize)]
struct JudgmentRow {
    user: String,
    strategy: String,
    doc_id: String,
    rank: usize,
    relevant: String,
}

/// Reads `user,strategy,doc_id,rank,relevant` CSV with `relevant` in {0, 1}.
pub fn read_judgments(reader: impl std::io::Read) -> Result<Vec<Judgment>, EvalError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize::<JudgmentRow>().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| EvalError::Parse { line, message: e.to_string() })?;
        let relevant = match row.relevant.trim() {
            "1" => true,
            "0" => false,
            other => {
                return Err(EvalError::Parse {
                    line,
                    message: format!("relevant must be 0 or 1, got `{other}`"),
                })
            }
        };
        out.push(Judgment {
            user: row.user,
            strategy: row.strategy,
            doc_id: row.doc_id,
            rank: row.rank,
            relevant,
        });
    }
    Ok(out)
}

pub fn load_judgments(path: impl AsRef<Path>) -> Result<Vec<Judgment>, EvalError> {
    read_judgments(std::fs::File::open(path)?)
}

pub fn write_judgments(judgments: &[Judgment]) -> String {
    let mut out = String::from("user,strategy,doc_id,rank,relevant\n");
    for j in judgments {
        let _ = writeln!(out, "{},{},{},{},{}", j.user, j.strategy, j.doc_id, j.rank, u8::from(j.relevant));
    }
    out
}

/// Groups judgments into relevance lists keyed by `(strategy, user)`,
/// checking that ranks are unique and gap-free.
pub fn relevance_lists(judgments: &[Judgment]) -> Result<BTreeMap<(String, String), Vec<bool>>, EvalError> {
    let mut grouped: BTreeMap<(String, String), BTreeMap<usize, bool>> = BTreeMap::new();
    for j in judgments {
        let ranks = grouped.entry((j.strategy.clone(), j.user.clone())).or_default();
        if ranks.insert(j.rank, j.relevant).is_some() {
            return Err(EvalError::DuplicateJudgment {
                user: j.user.clone(),
                strategy: j.strategy.clone(),
                rank: j.rank,
            });
        }
    }
    let mut lists = BTreeMap::new();
    for ((strategy, user), ranks) in grouped {
        for (expected, rank) in (1..).zip(ranks.keys()) {
            if *rank != expected {
                return Err(EvalError::RankGap { user, strategy, rank: expected });
            }
        }
        lists.insert((strategy, user), ranks.into_values().collect());
    }
    Ok(lists)
}

/// One metric value for one user under one strategy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UserMetric {
    pub user: String,
    pub strategy: String,
    pub metric: Metric,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricRow {
    pub strategy: String,
    pub metric: Metric,
    pub mean: f64,
    /// Population standard deviation.
    pub sd: f64,
    pub n_users: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricTable {
    pub rows: Vec<MetricRow>,
}

impl MetricTable {
    pub fn get(&self, strategy: &str, metric: Metric) -> Option<&MetricRow> {
        self.rows.iter().find(|r| r.strategy == strategy && r.metric == metric)
    }

    /// `strategy,metric,mean,sd,n_users` with six decimals.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("strategy,metric,mean,sd,n_users\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{:.6},{:.6},{}", r.strategy, r.metric, r.mean, r.sd, r.n_users);
        }
        out
    }
}

pub fn per_user_csv(values: &[UserMetric]) -> String {
    let mut out = String::from("user,strategy,metric,value\n");
    for v in values {
        let _ = writeln!(out, "{},{},{},{:.6}", v.user, v.strategy, v.metric, v.value);
    }
    out
}

/// Mean and population standard deviation.
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Per-user metric values and the per-strategy mean/SD table.
pub fn aggregate(
    judgments: &[Judgment],
    metrics: &[Metric],
    params: &MetricParams,
) -> Result<(MetricTable, Vec<UserMetric>), EvalError> {
    if judgments.is_empty() {
        return Err(EvalError::Empty);
    }
    let lists = relevance_lists(judgments)?;
    let mut metrics = metrics.to_vec();
    metrics.sort();
    metrics.dedup();

    let mut per_user = Vec::new();
    let mut by_cell: BTreeMap<(String, Metric), Vec<f64>> = BTreeMap::new();
    for ((strategy, user), rel) in &lists {
        for &metric in &metrics {
            let value = metric.compute(rel, params)?;
            per_user.push(UserMetric {
                user: user.clone(),
                strategy: strategy.clone(),
                metric,
                value,
            });
            by_cell.entry((strategy.clone(), metric)).or_default().push(value);
        }
    }
    let rows = by_cell
        .into_iter()
        .map(|((strategy, metric), values)| {
            let (mean, sd) = mean_sd(&values);
            MetricRow {
                strategy,
                metric,
                mean,
                sd,
                n_users: values.len(),
            }
        })
        .collect();
    Ok((MetricTable { rows }, per_user))
}
