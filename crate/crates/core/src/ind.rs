//! Scoring the papers inside one author profile for incorrect assignment.
//!
//! The baseline scorer is a similarity deficit: a paper's score is one
//! minus its mean fused similarity to the rest of the profile, reusing the
//! same fusion rule the clustering pipeline trusts.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::corpus::{AuthorId, IndAuthorRecord, PaperId, PaperStore};
use crate::embed::{self, EmbeddingTable, FieldSet};
use crate::error::{Error, Result};
use crate::snd::{combined_distance, Modality};
use crate::textnorm::{normalize_name, Stoplist};

/// Per-paper anomaly scores for one author profile; higher is more
/// anomalous.
#[derive(Debug, Clone, Serialize)]
pub struct IndScoreReport {
    pub author_id: AuthorId,
    pub scores: BTreeMap<PaperId, f64>,
}

/// Scores every paper of `record` (normal and outlier alike) by its mean
/// fused distance to all other papers of the author.
pub fn ind_scores(
    record: &IndAuthorRecord,
    store: &PaperStore,
    sem_table: &EmbeddingTable,
    rel_table: Option<&EmbeddingTable>,
    fields: &FieldSet,
    stoplist: &Stoplist,
) -> Result<IndScoreReport> {
    let mut ids: Vec<PaperId> = record
        .normal
        .iter()
        .chain(&record.outliers)
        .cloned()
        .collect();
    ids.sort();
    ids.dedup();
    if ids.len() < 2 {
        return Err(Error::TooFewPapers {
            author: record.author_id.clone(),
            papers: ids.len(),
        });
    }
    let name = normalize_name(&record.name).ok();
    let sem_vectors: Vec<Vec<f64>> = ids
        .iter()
        .map(|id| {
            let paper = store.require(id)?;
            if paper.authors.is_empty() {
                return Ok(vec![0.0; sem_table.dim()]);
            }
            let idx = name
                .as_ref()
                .and_then(|n| paper.author_index_for(n))
                .unwrap_or(0);
            embed::paper_embedding(paper, idx, fields, sem_table, stoplist)
        })
        .collect::<Result<_>>()?;
    let modality = if rel_table.is_some() {
        Modality::Both
    } else {
        Modality::Semantic
    };
    let dist = combined_distance(&ids, &sem_vectors, rel_table, modality)?;
    let n = ids.len();
    let scores = ids
        .iter()
        .enumerate()
        .map(|(i, id)| {
            let total: f64 = (0..n).filter(|&j| j != i).map(|j| dist.at(i, j)).sum();
            (id.clone(), total / (n - 1) as f64)
        })
        .collect();
    Ok(IndScoreReport {
        author_id: record.author_id.clone(),
        scores,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{PaperAuthor, PaperRecord};
    use crate::embed::{train_skipgram, EmbedConfig};

    fn paper(id: &str, title: &str) -> PaperRecord {
        PaperRecord {
            id: id.into(),
            title: title.into(),
            abstract_text: String::new(),
            keywords: vec![],
            authors: vec![PaperAuthor {
                name: "Wei Chen".into(),
                org: String::new(),
            }],
            venue: String::new(),
            year: 2015,
        }
    }

    fn toy_table() -> EmbeddingTable {
        let seqs: Vec<Vec<String>> = (0..40)
            .flat_map(|_| {
                vec![
                    vec!["lattice".to_string(), "crystal".to_string(), "phase".to_string()],
                    vec!["ocean".to_string(), "current".to_string(), "tide".to_string()],
                ]
            })
            .collect();
        train_skipgram(
            &seqs,
            &EmbedConfig {
                dim: 16,
                epochs: 8,
                min_count: 1,
                seed: 7,
                ..EmbedConfig::default()
            },
        )
        .unwrap()
    }

    fn record(normal: &[&str], outliers: &[&str]) -> IndAuthorRecord {
        IndAuthorRecord {
            author_id: "a1".into(),
            name: "Wei Chen".into(),
            normal: normal.iter().map(|s| (*s).to_string()).collect(),
            outliers: outliers.iter().map(|s| (*s).to_string()).collect(),
        }
    }

    #[test]
    fn odd_paper_gets_highest_score() {
        let mut store = PaperStore::default();
        for i in 0..4 {
            store.insert(paper(&format!("p{i}"), "lattice crystal phase"));
        }
        store.insert(paper("odd", "ocean current tide"));
        let table = toy_table();
        let rec = record(&["p0", "p1", "p2", "p3"], &["odd"]);
        let report = ind_scores(&rec, &store, &table, None, &FieldSet::default(), &Stoplist::empty()).unwrap();
        let odd = report.scores["odd"];
        for i in 0..4 {
            assert!(odd > report.scores[&format!("p{i}")]);
        }
    }

    #[test]
    fn two_papers_score_equally() {
        let mut store = PaperStore::default();
        store.insert(paper("p0", "lattice crystal"));
        store.insert(paper("p1", "ocean tide"));
        let table = toy_table();
        let rec = record(&["p0"], &["p1"]);
        let report = ind_scores(&rec, &store, &table, None, &FieldSet::default(), &Stoplist::empty()).unwrap();
        assert!((report.scores["p0"] - report.scores["p1"]).abs() < 1e-12);
    }

    #[test]
    fn scores_match_pairwise_oracle() {
        let titles = [
            "lattice crystal phase",
            "lattice phase",
            "crystal phase",
            "ocean current",
            "tide current ocean",
        ];
        let mut store = PaperStore::default();
        for (i, t) in titles.iter().enumerate() {
            store.insert(paper(&format!("p{i}"), t));
        }
        let table = toy_table();
        let rec = record(&["p0", "p1", "p2"], &["p3", "p4"]);
        let report = ind_scores(&rec, &store, &table, None, &FieldSet::default(), &Stoplist::empty()).unwrap();

        // Independent oracle: recompute embeddings and mean clipped-cosine
        // distances directly.
        let ids: Vec<String> = (0..5).map(|i| format!("p{i}")).collect();
        let vectors: Vec<Vec<f64>> = ids
            .iter()
            .map(|id| {
                embed::paper_embedding(store.get(id).unwrap(), 0, &FieldSet::default(), &table, &Stoplist::empty())
                    .unwrap()
            })
            .collect();
        for (i, id) in ids.iter().enumerate() {
            let mut total = 0.0;
            for (j, v) in vectors.iter().enumerate() {
                if i == j {
                    continue;
                }
                let sim = embed::cosine(&vectors[i], v).unwrap().max(0.0);
                total += 1.0 - sim;
            }
            let expected = total / (ids.len() - 1) as f64;
            assert!((report.scores[id] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_single_paper_profiles() {
        let mut store = PaperStore::default();
        store.insert(paper("p0", "anything"));
        let rec = record(&["p0"], &[]);
        let table = toy_table();
        assert!(matches!(
            ind_scores(&rec, &store, &table, None, &FieldSet::default(), &Stoplist::empty()),
            Err(Error::TooFewPapers { .. })
        ));
    }

    #[test]
    fn scores_are_bounded_and_order_free() {
        let mut store = PaperStore::default();
        for i in 0..4 {
            store.insert(paper(&format!("p{i}"), "lattice crystal"));
        }
        let table = toy_table();
        let rec1 = record(&["p0", "p1"], &["p2", "p3"]);
        let rec2 = record(&["p3", "p2"], &["p1", "p0"]);
        let r1 = ind_scores(&rec1, &store, &table, None, &FieldSet::default(), &Stoplist::empty()).unwrap();
        let r2 = ind_scores(&rec2, &store, &table, None, &FieldSet::default(), &Stoplist::empty()).unwrap();
        assert_eq!(r1.scores, r2.scores);
        assert!(r1.scores.values().all(|s| (0.0..=1.0).contains(s)));
    }
}
