//! Sliding-window and exponential decay, and the decayed aggregation of
//! per-item weights into a user profile.

use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::profiling::{ConceptProfile, ProfileMethod};

#[derive(Debug, Error, PartialEq)]
pub enum TemporalError {
    #[error("time point {t:?} lies after the reference time")]
    InFuture { t: TimePoint },
    #[error("expected a {expected} time point, got {got:?}")]
    WrongKind { expected: &'static str, got: TimePoint },
    #[error("profile fragments mix methods {first} and {other}")]
    MixedMethods { first: ProfileMethod, other: ProfileMethod },
    #[error("topic-model profiles cannot be aggregated over items")]
    LdaNotAggregable,
}

/// A social item's day stamp or a publication year.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TimePoint {
    /// Days since 1970-01-01.
    ItemDays(i64),
    DocYear(i32),
}

/// Days since 1970-01-01 for a calendar date.
pub fn days_since_epoch(date: NaiveDate) -> i64 {
    let epoch = NaiveDate::from_ymd_opt(1970, 1, 1).expect("valid epoch");
    (date - epoch).num_days()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DecayKind {
    #[serde(rename = "SLIDING_WINDOW")]
    SlidingWindow,
    #[serde(rename = "EXPONENTIAL")]
    Exponential,
}

impl DecayKind {
    pub const ALL: [DecayKind; 2] = [Self::SlidingWindow, Self::Exponential];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::SlidingWindow => "SLIDING_WINDOW",
            Self::Exponential => "EXPONENTIAL",
        }
    }
}

impl fmt::Display for DecayKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DecayKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown decay function `{s}`"))
    }
}

/// Thresholds and mean lives for both time scales.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecayConstants {
    pub thresh_social_days: f64,
    pub thresh_doc_years: f64,
    pub tau_social_days: f64,
    pub tau_doc_years: f64,
}

impl Default for DecayConstants {
    fn default() -> Self {
        Self {
            thresh_social_days: 250.0,
            thresh_doc_years: 9.04,
            tau_social_days: 360.0,
            tau_doc_years: 13.05,
        }
    }
}

impl DecayConstants {
    pub fn validate(&self) -> Result<(), String> {
        let all = [
            ("thresh_social_days", self.thresh_social_days),
            ("thresh_doc_years", self.thresh_doc_years),
            ("tau_social_days", self.tau_social_days),
            ("tau_doc_years", self.tau_doc_years),
        ];
        match all.iter().find(|(_, v)| !(v.is_finite() && *v > 0.0)) {
            Some((name, v)) => Err(format!("decay constant {name} must be positive, got {v}")),
            None => Ok(()),
        }
    }
}

/// A decay function bound to its constants and a fixed reference date.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecaySpec {
    pub kind: DecayKind,
    pub constants: DecayConstants,
    pub now_days: i64,
    pub now_year: i32,
}

impl DecaySpec {
    pub fn new(kind: DecayKind, now: NaiveDate) -> Self {
        Self::with_constants(kind, DecayConstants::default(), now)
    }

    pub fn with_constants(kind: DecayKind, constants: DecayConstants, now: NaiveDate) -> Self {
        Self {
            kind,
            constants,
            now_days: days_since_epoch(now),
            now_year: now.year(),
        }
    }

    /// Decay factor in `[0, 1]`. Ages are whole days for items and whole
    /// calendar years (`now_year - year`) for documents.
    pub fn factor(&self, t: TimePoint) -> Result<f64, TemporalError> {
        let (age, thresh, tau) = match t {
            TimePoint::ItemDays(days) => (
                self.now_days - days,
                self.constants.thresh_social_days,
                self.constants.tau_social_days,
            ),
            TimePoint::DocYear(year) => (
                i64::from(self.now_year - year),
                self.constants.thresh_doc_years,
                self.constants.tau_doc_years,
            ),
        };
        if age < 0 {
            return Err(TemporalError::InFuture { t });
        }
        let age = age as f64;
        Ok(match self.kind {
            DecayKind::SlidingWindow => {
                if age <= thresh {
                    1.0
                } else {
                    0.0
                }
            }
            DecayKind::Exponential => (-age / tau).exp(),
        })
    }
}

pub fn decay_factor(spec: &DecaySpec, t: TimePoint) -> Result<f64, TemporalError> {
    spec.factor(t)
}

/// Sums decayed item fragments into the user profile:
/// `w(c) = sum over items of f(t_i) * w'(c, i)`.
pub fn aggregate_user_profile(
    user: &str,
    method: ProfileMethod,
    per_item: &[(ConceptProfile, TimePoint)],
    spec: &DecaySpec,
) -> Result<ConceptProfile, TemporalError> {
    if method == ProfileMethod::Lda {
        return Err(TemporalError::LdaNotAggregable);
    }
    let mut profile = ConceptProfile::new(user, method);
    for (fragment, t) in per_item {
        if fragment.method != method {
            return Err(TemporalError::MixedMethods {
                first: method,
                other: fragment.method,
            });
        }
        let factor = spec.factor(*t)?;
        if factor == 0.0 {
            continue;
        }
        for (concept, weight) in fragment.iter() {
            profile.add(concept, factor * weight);
        }
    }
    Ok(profile)
}

/// How a document's decay factor enters ranking.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DocumentDecay {
    /// False iff the document is dropped from the candidates.
    pub kept: bool,
    pub factor: f64,
}

/// The factor to apply at similarity time for a document published at
/// `t_d`. Weights are not pre-multiplied.
pub fn decay_document(t_d: TimePoint, spec: &DecaySpec) -> Result<DocumentDecay, TemporalError> {
    if !matches!(t_d, TimePoint::DocYear(_)) {
        return Err(TemporalError::WrongKind {
            expected: "document year",
            got: t_d,
        });
    }
    let factor = spec.factor(t_d)?;
    Ok(DocumentDecay {
        kept: factor > 0.0,
        factor,
    })
}
