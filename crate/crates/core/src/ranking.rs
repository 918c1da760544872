//! Profile similarity and top-k selection.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::profiling::{ConceptProfile, ProfileMethod};
use crate::temporal::{decay_document, DecaySpec, TemporalError, TimePoint};

#[derive(Debug, Error, PartialEq)]
pub enum RankError {
    #[error("cannot compare a {user} profile with a {doc} profile")]
    MethodMismatch { user: ProfileMethod, doc: ProfileMethod },
    #[error("dot product is only defined for topic profiles, got {0}")]
    NotTopicProfile(ProfileMethod),
    #[error("decay factor must lie in [0, 1], got {0}")]
    InvalidFactor(f64),
    #[error("user `{0}` has an empty profile and cannot be served")]
    Unservable(String),
    #[error("no candidate documents remain for user `{0}`")]
    NoCandidates(String),
    #[error("k must be at least 1")]
    InvalidK,
    #[error("candidate `{doc}`: {source}")]
    Decay {
        doc: String,
        #[source]
        source: TemporalError,
    },
}

fn check_methods(u: &ConceptProfile, d: &ConceptProfile) -> Result<(), RankError> {
    if u.method != d.method {
        return Err(RankError::MethodMismatch {
            user: u.method,
            doc: d.method,
        });
    }
    Ok(())
}

fn check_factor(factor: f64) -> Result<(), RankError> {
    if (0.0..=1.0).contains(&factor) {
        Ok(())
    } else {
        Err(RankError::InvalidFactor(factor))
    }
}

fn sparse_dot(a: &ConceptProfile, b: &ConceptProfile) -> f64 {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    small.iter().fold(0.0, |acc, (c, w)| acc + w * large.get(c))
}

/// Cosine similarity of two same-method profiles; 0 when either is empty.
pub fn cosine(u: &ConceptProfile, d: &ConceptProfile) -> Result<f64, RankError> {
    check_methods(u, d)?;
    let nu: f64 = u.iter().map(|(_, w)| w * w).sum();
    let nd: f64 = d.iter().map(|(_, w)| w * w).sum();
    if nu == 0.0 || nd == 0.0 {
        return Ok(0.0);
    }
    Ok((sparse_dot(u, d) / (nu * nd).sqrt()).min(1.0))
}

/// Cosine similarity damped by the document's decay factor.
pub fn temporal_cosine(u: &ConceptProfile, d: &ConceptProfile, factor: f64) -> Result<f64, RankError> {
    check_factor(factor)?;
    Ok(factor * cosine(u, d)?)
}

/// Decay-scaled dot product of two topic distributions.
pub fn dot(u: &ConceptProfile, d: &ConceptProfile, factor: f64) -> Result<f64, RankError> {
    check_methods(u, d)?;
    if u.method != ProfileMethod::Lda {
        return Err(RankError::NotTopicProfile(u.method));
    }
    check_factor(factor)?;
    Ok(factor * sparse_dot(u, d))
}

/// The similarity each method is ranked with.
pub fn similarity(u: &ConceptProfile, d: &ConceptProfile, factor: f64) -> Result<f64, RankError> {
    match u.method {
        ProfileMethod::Lda => dot(u, d, factor),
        ProfileMethod::CfIdf | ProfileMethod::HcfIdf => temporal_cosine(u, d, factor),
    }
}

/// A document eligible for recommendation.
#[derive(Debug, Clone, Copy)]
pub struct Candidate<'a> {
    pub doc_id: &'a str,
    pub profile: &'a ConceptProfile,
    pub published: TimePoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedEntry {
    pub rank: usize,
    pub doc_id: String,
    pub score: f64,
}

/// Top-k result for one user and strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedList {
    pub user: String,
    pub strategy: String,
    pub k: usize,
    pub entries: Vec<RankedEntry>,
}

/// Descending score, then ascending document id.
pub fn ranking_order(a: (&str, f64), b: (&str, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0))
}

/// Scores every candidate the decay function keeps and returns the best `k`.
///
/// Ties are broken by ascending document id, so the result does not depend
/// on the order of `candidates`.
pub fn rank_top_k(
    user: &ConceptProfile,
    candidates: &[Candidate<'_>],
    spec: &DecaySpec,
    k: usize,
    strategy: &str,
) -> Result<RankedList, RankError> {
    if k == 0 {
        return Err(RankError::InvalidK);
    }
    if user.is_empty() {
        return Err(RankError::Unservable(user.subject.clone()));
    }
    let mut scored: Vec<(&str, f64)> = Vec::with_capacity(candidates.len());
    for cand in candidates {
        let decay = decay_document(cand.published, spec).map_err(|source| RankError::Decay {
            doc: cand.doc_id.to_string(),
            source,
        })?;
        if !decay.kept {
            continue;
        }
        scored.push((cand.doc_id, similarity(user, cand.profile, decay.factor)?));
    }
    if scored.is_empty() {
        return Err(RankError::NoCandidates(user.subject.clone()));
    }

    let cmp = |a: &(&str, f64), b: &(&str, f64)| ranking_order(*a, *b);
    if scored.len() > k {
        scored.select_nth_unstable_by(k - 1, cmp);
        scored.truncate(k);
    }
    scored.sort_unstable_by(cmp);

    Ok(RankedList {
        user: user.subject.clone(),
        strategy: strategy.to_string(),
        k,
        entries: scored
            .into_iter()
            .enumerate()
            .map(|(i, (doc_id, score))| RankedEntry {
                rank: i + 1,
                doc_id: doc_id.to_string(),
                score,
            })
            .collect(),
    })
}
