mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::Rng;
use scirec_core::text::{LabelIndex, SuffixRule, TextNormalizer, TokenSequence};

use common::rng;

/// Character-by-character re-implementation of the normalizer.
fn normalize_oracle(text: &str, stopwords: &[&str], rules: &[SuffixRule]) -> Vec<String> {
    let mut out = Vec::new();
    let mut finish = |word: &mut String| {
        let trimmed = word.trim_matches('\'').to_string();
        word.clear();
        if trimmed.is_empty() || stopwords.contains(&trimmed.as_str()) {
            return;
        }
        let mut lemma = trimmed.clone();
        for r in rules {
            if trimmed.len() >= r.min_len && trimmed.ends_with(r.suffix.as_str()) {
                lemma = format!("{}{}", &trimmed[..trimmed.len() - r.suffix.len()], r.replacement);
                break;
            }
        }
        if !lemma.is_empty() {
            out.push(lemma);
        }
    };
    for chunk in text.split([' ', '\t', '\n']) {
        let lower = chunk.to_ascii_lowercase();
        if ["http://", "https://", "www."].iter().any(|p| lower.starts_with(p)) {
            continue;
        }
        let mut word = String::new();
        for ch in lower.chars() {
            if ch.is_ascii_alphanumeric() || ch == '\'' {
                word.push(ch);
            } else {
                finish(&mut word);
            }
        }
        finish(&mut word);
    }
    out
}

fn random_text(rng: &mut impl Rng) -> String {
    const PIECES: &[&str] = &[
        "Data", "mining", "THE", "of", "Queries", "classes", "analysis", "it's", "'quoted'", "#Web", "@user", "x2",
        "http://t.co/abc", "www.example.org", "https://x.y/z?q=1", ",", ".", "-", "!", "ss", "is", "bus", "cities",
        "graph's", "a", "b", "semantic-web", "\t", "\n", "  ",
    ];
    let n = rng.gen_range(0..20);
    let mut text = String::new();
    for _ in 0..n {
        text.push_str(PIECES[rng.gen_range(0..PIECES.len())]);
        if rng.gen_bool(0.7) {
            text.push(' ');
        }
    }
    text
}

#[test]
fn normalizer_matches_step_by_step_oracle() {
    let stopwords = ["the", "of", "a", "it's", "is"];
    let rules = vec![
        SuffixRule::new("'s", "", 3),
        SuffixRule::new("ies", "y", 5),
        SuffixRule::new("ss", "ss", 3),
        SuffixRule::new("is", "is", 3),
        SuffixRule::new("s", "", 4),
    ];
    let normalizer = TextNormalizer::new(stopwords.iter().map(|s| s.to_string()).collect(), rules.clone());
    let mut rng = rng(11);
    for _ in 0..500 {
        let text = random_text(&mut rng);
        assert_eq!(normalizer.normalize(&text).tokens, normalize_oracle(&text, &stopwords, &rules), "{text:?}");
    }
}

/// Tries every span starting at each position, keeping the longest label.
fn extract_oracle(tokens: &[String], labels: &[(Vec<String>, String)]) -> BTreeMap<String, u32> {
    let mut counts = BTreeMap::new();
    let mut i = 0;
    while i < tokens.len() {
        let mut best: Option<usize> = None;
        for end in i + 1..=tokens.len() {
            if labels.iter().any(|(l, _)| l.as_slice() == &tokens[i..end]) {
                best = Some(end - i);
            }
        }
        match best {
            Some(len) => {
                let hit: std::collections::BTreeSet<&String> =
                    labels.iter().filter(|(l, _)| l.as_slice() == &tokens[i..i + len]).map(|(_, c)| c).collect();
                for c in hit {
                    *counts.entry(c.clone()).or_insert(0) += 1;
                }
                i += len;
            }
            None => i += 1,
        }
    }
    counts
}

const WORDS: &[&str] = &["alpha", "beta", "gamma", "delta", "eps", "zeta"];

fn random_labels(rng: &mut impl Rng) -> Vec<(Vec<String>, String)> {
    (0..10)
        .map(|i| {
            let len = rng.gen_range(1..=3);
            let label = (0..len).map(|_| WORDS[rng.gen_range(0..WORDS.len())].to_string()).collect();
            (label, format!("c{}", i % 8))
        })
        .collect()
}

fn index_of(labels: &[(Vec<String>, String)]) -> LabelIndex {
    let mut index = LabelIndex::default();
    for (l, c) in labels {
        index.insert(l.clone(), c);
    }
    index
}

fn as_map(seq: &TokenSequence, index: &LabelIndex) -> BTreeMap<String, u32> {
    index.extract(seq).iter().map(|(c, n)| (c.to_string(), n)).collect()
}

#[test]
fn extraction_matches_span_enumeration() {
    let mut rng = rng(12);
    for _ in 0..300 {
        let labels = random_labels(&mut rng);
        let index = index_of(&labels);
        let tokens: Vec<String> = (0..30).map(|_| WORDS[rng.gen_range(0..WORDS.len())].to_string()).collect();
        assert_eq!(as_map(&tokens.clone().into(), &index), extract_oracle(&tokens, &labels), "{tokens:?} {labels:?}");
    }
}

proptest! {
    #[test]
    fn extraction_is_additive_across_a_separator(
        seed in any::<u64>(),
        a in proptest::collection::vec(0usize..6, 0..20),
        b in proptest::collection::vec(0usize..6, 0..20),
    ) {
        let mut rng = rng(seed);
        let labels = random_labels(&mut rng);
        let index = index_of(&labels);
        let words = |v: &[usize]| v.iter().map(|i| WORDS[*i].to_string()).collect::<Vec<_>>();
        let left = as_map(&words(&a).into(), &index);
        let right = as_map(&words(&b).into(), &index);
        let mut joined = words(&a);
        joined.push("separator".into());
        joined.extend(words(&b));
        let mut sum = left.clone();
        for (c, n) in &right {
            *sum.entry(c.clone()).or_insert(0) += n;
        }
        prop_assert_eq!(as_map(&joined.into(), &index), sum);
    }

    #[test]
    fn matches_never_outnumber_tokens(seed in any::<u64>(), t in proptest::collection::vec(0usize..6, 0..40)) {
        let mut rng = rng(seed);
        let labels = random_labels(&mut rng);
        // one concept per label so each span counts once
        let distinct: Vec<(Vec<String>, String)> = labels.iter().enumerate().map(|(i, (l, _))| (l.clone(), format!("k{i}"))).collect();
        let mut index = LabelIndex::default();
        let mut seen = std::collections::BTreeSet::new();
        for (l, c) in &distinct {
            if seen.insert(l.clone()) {
                index.insert(l.clone(), c);
            }
        }
        let tokens: Vec<String> = t.iter().map(|i| WORDS[*i].to_string()).collect();
        let counts = index.extract(&tokens.clone().into());
        prop_assert!(counts.total() as usize <= tokens.len());
        prop_assert_eq!(index.extract(&tokens.into()), counts);
    }

    #[test]
    fn normalizing_is_idempotent_on_output(text in "[a-zA-Z' #@.,]{0,80}") {
        let n = TextNormalizer::english();
        let once = n.normalize(&text).tokens;
        let again = n.normalize(&once.join(" ")).tokens;
        prop_assert!(again.len() <= once.len());
        prop_assert!(once.iter().all(|t| !t.is_empty() && t.chars().all(|c| c.is_alphanumeric() || c == '\'')));
    }
}
