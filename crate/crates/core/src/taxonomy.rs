//! Hierarchical knowledge base: concepts, poly-hierarchical parent links,
//! levels and per-level node counts.
//!
//! Levels are 1-based. A root sits at level 1 and every other concept sits one
//! level below its *closest* root (shortest path), so a concept reachable over
//! several parents still gets a single level.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TaxonomyError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed taxonomy JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("duplicate concept id `{0}`")]
    DuplicateId(String),
    #[error("concept `{0}` has an empty preferred label")]
    EmptyLabel(String),
    #[error("concept `{concept}` references unknown parent `{parent}`")]
    DanglingParent { concept: String, parent: String },
    #[error("parent links form a cycle through concept `{0}`")]
    Cycle(String),
    #[error("unknown concept id `{0}`")]
    UnknownConcept(String),
    #[error("synonym table line {line}: expected `concept_id<TAB>label`")]
    MalformedSynonymLine { line: usize },
}

/// A single thesaurus entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Concept {
    pub id: String,
    pub pref_label: String,
    #[serde(default)]
    pub alt_labels: BTreeSet<String>,
    #[serde(default)]
    pub parents: BTreeSet<String>,
}

impl Concept {
    pub fn new(id: impl Into<String>, pref_label: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            pref_label: pref_label.into(),
            alt_labels: BTreeSet::new(),
            parents: BTreeSet::new(),
        }
    }

    pub fn with_parent(mut self, parent: impl Into<String>) -> Self {
        self.parents.insert(parent.into());
        self
    }

    pub fn with_alt_label(mut self, label: impl Into<String>) -> Self {
        self.alt_labels.insert(label.into());
        self
    }

    /// Preferred label followed by the alternative labels.
    pub fn labels(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.pref_label.as_str()).chain(self.alt_labels.iter().map(String::as_str))
    }

    pub fn is_root(&self) -> bool {
        self.parents.is_empty()
    }
}

#[derive(Serialize, Deserialize)]
struct TaxonomyFile {
    concepts: Vec<Concept>,
}

/// Validated, immutable concept hierarchy.
#[derive(Debug, Clone, PartialEq)]
pub struct Taxonomy {
    concepts: BTreeMap<String, Concept>,
    children: BTreeMap<String, BTreeSet<String>>,
    levels: BTreeMap<String, u32>,
    nodes_per_level: BTreeMap<u32, usize>,
}

impl Taxonomy {
    /// Validates the concepts and precomputes the derived structure.
    pub fn from_concepts(concepts: Vec<Concept>) -> Result<Self, TaxonomyError> {
        let mut map = BTreeMap::new();
        for mut concept in concepts {
            concept.pref_label = concept.pref_label.trim().to_string();
            if concept.pref_label.is_empty() {
                return Err(TaxonomyError::EmptyLabel(concept.id));
            }
            if map.contains_key(&concept.id) {
                return Err(TaxonomyError::DuplicateId(concept.id));
            }
            map.insert(concept.id.clone(), concept);
        }

        let mut children: BTreeMap<String, BTreeSet<String>> =
            map.keys().map(|id| (id.clone(), BTreeSet::new())).collect();
        for concept in map.values() {
            for parent in &concept.parents {
                match children.get_mut(parent) {
                    Some(set) => {
                        set.insert(concept.id.clone());
                    }
                    None => {
                        return Err(TaxonomyError::DanglingParent {
                            concept: concept.id.clone(),
                            parent: parent.clone(),
                        })
                    }
                }
            }
        }

        if let Some(id) = find_cycle(&map, &children) {
            return Err(TaxonomyError::Cycle(id));
        }

        let levels = compute_levels(&map, &children);
        let mut nodes_per_level = BTreeMap::new();
        for level in levels.values() {
            *nodes_per_level.entry(*level).or_insert(0) += 1;
        }

        Ok(Self {
            concepts: map,
            children,
            levels,
            nodes_per_level,
        })
    }

    pub fn from_json_str(json: &str) -> Result<Self, TaxonomyError> {
        let file: TaxonomyFile = serde_json::from_str(json)?;
        Self::from_concepts(file.concepts)
    }

    pub fn to_json_string(&self) -> String {
        let file = TaxonomyFile {
            concepts: self.concepts.values().cloned().collect(),
        };
        serde_json::to_string_pretty(&file).expect("taxonomy serializes")
    }

    /// Adds each `(concept id, label)` pair as an alternative label.
    ///
    /// Labels already present (as preferred or alternative label) are ignored,
    /// so merging is idempotent. Structure is never touched.
    pub fn merge_synonyms<S, L>(&self, table: &[(S, L)]) -> Result<Self, TaxonomyError>
    where
        S: AsRef<str>,
        L: AsRef<str>,
    {
        let mut merged = self.clone();
        for (id, label) in table {
            let (id, label) = (id.as_ref(), label.as_ref().trim());
            let concept = merged
                .concepts
                .get_mut(id)
                .ok_or_else(|| TaxonomyError::UnknownConcept(id.to_string()))?;
            if label.is_empty() || concept.pref_label == label {
                continue;
            }
            concept.alt_labels.insert(label.to_string());
        }
        Ok(merged)
    }

    pub fn get(&self, id: &str) -> Option<&Concept> {
        self.concepts.get(id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.concepts.contains_key(id)
    }

    pub fn concepts(&self) -> impl Iterator<Item = &Concept> {
        self.concepts.values()
    }

    pub fn len(&self) -> usize {
        self.concepts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.concepts.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.children.values().map(BTreeSet::len).sum()
    }

    pub fn level_of(&self, id: &str) -> Result<u32, TaxonomyError> {
        self.levels
            .get(id)
            .copied()
            .ok_or_else(|| TaxonomyError::UnknownConcept(id.to_string()))
    }

    /// Number of concepts at `level`; zero for levels that do not exist.
    pub fn nodes_at_level(&self, level: u32) -> usize {
        self.nodes_per_level.get(&level).copied().unwrap_or(0)
    }

    pub fn nodes_per_level(&self) -> &BTreeMap<u32, usize> {
        &self.nodes_per_level
    }

    pub fn max_level(&self) -> u32 {
        self.nodes_per_level.keys().next_back().copied().unwrap_or(0)
    }

    /// Direct children of `id`.
    pub fn children_of(&self, id: &str) -> Result<&BTreeSet<String>, TaxonomyError> {
        self.children
            .get(id)
            .ok_or_else(|| TaxonomyError::UnknownConcept(id.to_string()))
    }

    pub fn parents_of(&self, id: &str) -> Result<&BTreeSet<String>, TaxonomyError> {
        self.concepts
            .get(id)
            .map(|c| &c.parents)
            .ok_or_else(|| TaxonomyError::UnknownConcept(id.to_string()))
    }

    /// The same concepts and labels with every parent link removed.
    pub fn without_edges(&self) -> Self {
        let concepts = self
            .concepts
            .values()
            .map(|c| Concept {
                parents: BTreeSet::new(),
                ..c.clone()
            })
            .collect();
        Self::from_concepts(concepts).expect("removing edges keeps a taxonomy valid")
    }
}

/// Reads a taxonomy JSON document from disk.
pub fn load_taxonomy(path: impl AsRef<Path>) -> Result<Taxonomy, TaxonomyError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| TaxonomyError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Taxonomy::from_json_str(&text)
}

/// Parses a `concept_id<TAB>label` synonym table. Blank lines are skipped.
pub fn parse_synonym_table(text: &str) -> Result<Vec<(String, String)>, TaxonomyError> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.splitn(2, '\t');
        match (fields.next(), fields.next()) {
            (Some(id), Some(label)) if !id.trim().is_empty() && !label.trim().is_empty() => {
                rows.push((id.trim().to_string(), label.trim().to_string()));
            }
            _ => return Err(TaxonomyError::MalformedSynonymLine { line: i + 1 }),
        }
    }
    Ok(rows)
}

pub fn load_synonym_table(path: impl AsRef<Path>) -> Result<Vec<(String, String)>, TaxonomyError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| TaxonomyError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_synonym_table(&text)
}

// Iterative three-colour DFS over child edges; returns a concept on a cycle.
fn find_cycle(
    concepts: &BTreeMap<String, Concept>,
    children: &BTreeMap<String, BTreeSet<String>>,
) -> Option<String> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        White,
        Grey,
        Black,
    }
    let mut marks: BTreeMap<&str, Mark> = concepts.keys().map(|k| (k.as_str(), Mark::White)).collect();

    for start in concepts.keys() {
        if marks[start.as_str()] != Mark::White {
            continue;
        }
        let mut stack: Vec<(&str, std::collections::btree_set::Iter<'_, String>)> =
            vec![(start.as_str(), children[start].iter())];
        marks.insert(start.as_str(), Mark::Grey);
        while let Some((node, iter)) = stack.last_mut() {
            match iter.next() {
                Some(child) => match marks[child.as_str()] {
                    Mark::Grey => return Some(child.clone()),
                    Mark::White => {
                        marks.insert(child.as_str(), Mark::Grey);
                        stack.push((child.as_str(), children[child].iter()));
                    }
                    Mark::Black => {}
                },
                None => {
                    marks.insert(node, Mark::Black);
                    stack.pop();
                }
            }
        }
    }
    None
}

// Multi-source BFS from all roots; the first visit is the shortest path.
fn compute_levels(
    concepts: &BTreeMap<String, Concept>,
    children: &BTreeMap<String, BTreeSet<String>>,
) -> BTreeMap<String, u32> {
    let mut levels = BTreeMap::new();
    let mut queue = VecDeque::new();
    for concept in concepts.values().filter(|c| c.is_root()) {
        levels.insert(concept.id.clone(), 1);
        queue.push_back(concept.id.as_str());
    }
    while let Some(id) = queue.pop_front() {
        let next = levels[id] + 1;
        for child in &children[id] {
            if !levels.contains_key(child) {
                levels.insert(child.clone(), next);
                queue.push_back(child.as_str());
            }
        }
    }
    // Acyclic and fully linked, so every concept descends from a root.
    debug_assert_eq!(levels.len(), concepts.len());
    levels
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The hierarchy used to illustrate spreading activation: "world wide web"
    /// has two children, one of which has "social recommendation" below it.
    pub(crate) fn web_hierarchy() -> Taxonomy {
        Taxonomy::from_concepts(vec![
            Concept::new("www", "world wide web"),
            Concept::new("search", "web searching").with_parent("www"),
            Concept::new("mining", "web mining").with_parent("www"),
            Concept::new("socrec", "social recommendation").with_parent("search"),
            Concept::new("ranking", "search engine ranking").with_parent("search"),
            Concept::new("usage", "web usage mining").with_parent("mining"),
            Concept::new("structure", "web structure mining").with_parent("mining"),
        ])
        .unwrap()
    }

    #[test]
    fn single_root() {
        let tax = Taxonomy::from_json_str(r#"{"concepts":[{"id":"r","pref_label":"root"}]}"#).unwrap();
        assert_eq!(tax.level_of("r").unwrap(), 1);
        assert_eq!(tax.nodes_per_level(), &BTreeMap::from([(1, 1)]));
    }

    #[test]
    fn two_cycle_is_rejected() {
        let err = Taxonomy::from_concepts(vec![
            Concept::new("A", "a").with_parent("B"),
            Concept::new("B", "b").with_parent("A"),
        ])
        .unwrap_err();
        match err {
            TaxonomyError::Cycle(id) => assert!(id == "A" || id == "B"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn cycle_below_a_root_is_rejected() {
        let err = Taxonomy::from_concepts(vec![
            Concept::new("R", "r"),
            Concept::new("A", "a").with_parent("R").with_parent("C"),
            Concept::new("B", "b").with_parent("A"),
            Concept::new("C", "c").with_parent("B"),
        ])
        .unwrap_err();
        assert!(matches!(err, TaxonomyError::Cycle(_)));
    }

    #[test]
    fn validation_errors_name_the_concept() {
        let dup = Taxonomy::from_concepts(vec![Concept::new("A", "a"), Concept::new("A", "b")]);
        assert!(matches!(dup, Err(TaxonomyError::DuplicateId(id)) if id == "A"));

        let empty = Taxonomy::from_concepts(vec![Concept::new("A", "  ")]);
        assert!(matches!(empty, Err(TaxonomyError::EmptyLabel(id)) if id == "A"));

        let dangling = Taxonomy::from_concepts(vec![Concept::new("A", "a").with_parent("Z")]);
        assert!(matches!(
            dangling,
            Err(TaxonomyError::DanglingParent { concept, parent }) if concept == "A" && parent == "Z"
        ));
    }

    #[test]
    fn web_hierarchy_queries() {
        let tax = web_hierarchy();
        assert_eq!(tax.level_of("search").unwrap(), 2);
        assert_eq!(tax.nodes_at_level(tax.level_of("search").unwrap() + 1), 4);
        let kids: Vec<_> = tax.children_of("www").unwrap().iter().cloned().collect();
        assert_eq!(kids, vec!["mining".to_string(), "search".to_string()]);
        assert!(tax.children_of("socrec").unwrap().is_empty());
        assert_eq!(tax.nodes_at_level(9), 0);
        assert!(matches!(tax.level_of("nope"), Err(TaxonomyError::UnknownConcept(_))));
    }

    #[test]
    fn diamond_uses_shortest_path() {
        let tax = Taxonomy::from_concepts(vec![
            Concept::new("root", "root"),
            Concept::new("X", "x").with_parent("root"),
            Concept::new("Y", "y").with_parent("root"),
            Concept::new("W", "w").with_parent("Y"),
            Concept::new("Z", "z").with_parent("X").with_parent("W"),
        ])
        .unwrap();
        assert_eq!(tax.level_of("Z").unwrap(), 3);
        assert_eq!(tax.level_of("W").unwrap(), 3);
        assert_eq!(tax.level_of("root").unwrap(), 1);
    }

    #[test]
    fn synonyms_merge_idempotently() {
        let tax = Taxonomy::from_concepts(vec![Concept::new("tel", "Telecommunications industry")]).unwrap();
        let table = [("tel", "Telephone companies")];
        let once = tax.merge_synonyms(&table).unwrap();
        let labels: Vec<_> = once.get("tel").unwrap().labels().collect();
        assert_eq!(labels, vec!["Telecommunications industry", "Telephone companies"]);
        let twice = once.merge_synonyms(&table).unwrap();
        assert_eq!(once, twice);

        let empty: [(&str, &str); 0] = [];
        assert_eq!(tax.merge_synonyms(&empty).unwrap(), tax);

        let err = tax.merge_synonyms(&[("ghost", "x")]).unwrap_err();
        assert!(matches!(err, TaxonomyError::UnknownConcept(id) if id == "ghost"));
    }

    #[test]
    fn synonym_table_parsing() {
        let rows = parse_synonym_table("a\tone label\n\nb\tother\r\n").unwrap();
        assert_eq!(rows, vec![("a".into(), "one label".into()), ("b".into(), "other".into())]);
        assert!(matches!(
            parse_synonym_table("a\tok\nbroken\n"),
            Err(TaxonomyError::MalformedSynonymLine { line: 2 })
        ));
    }

    #[test]
    fn json_round_trip_is_stable() {
        let tax = web_hierarchy();
        let again = Taxonomy::from_json_str(&tax.to_json_string()).unwrap();
        assert_eq!(tax, again);
    }

    #[test]
    fn without_edges_keeps_labels() {
        let flat = web_hierarchy().without_edges();
        assert_eq!(flat.edge_count(), 0);
        assert_eq!(flat.nodes_at_level(1), 7);
        assert_eq!(flat.get("socrec").unwrap().pref_label, "social recommendation");
    }
}
