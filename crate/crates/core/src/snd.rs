//! From-scratch disambiguation of one name block: fused semantic and
//! relational distances, density clustering, and rule-based post-matching
//! of the leftover noise papers.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{PaperId, PaperRecord, PaperStore};
use crate::embed::{self, EmbedConfig, EmbeddingTable, FieldSet};
use crate::error::{Error, Result};
use crate::relgraph::{self, RelationSet, WalkConfig};
use crate::textnorm::{tanimoto, tokenize, NameKey, Stoplist};

/// Which similarity sources feed the distance matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Semantic,
    Relational,
    Both,
}

impl Modality {
    pub fn parse(s: &str) -> Result<Modality> {
        match s.trim().to_lowercase().as_str() {
            "semantic" => Ok(Modality::Semantic),
            "relational" => Ok(Modality::Relational),
            "both" => Ok(Modality::Both),
            other => Err(Error::InvalidConfig(format!(
                "unknown modality {other:?}; expected semantic, relational, both"
            ))),
        }
    }

    pub fn uses_semantic(&self) -> bool {
        matches!(self, Modality::Semantic | Modality::Both)
    }

    pub fn uses_relational(&self) -> bool {
        matches!(self, Modality::Relational | Modality::Both)
    }
}

/// Attribute-overlap weights of the post-match rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PostMatchWeights {
    pub coauthor: f64,
    pub word: f64,
    pub org: f64,
    pub venue: f64,
}

impl Default for PostMatchWeights {
    fn default() -> Self {
        PostMatchWeights {
            coauthor: 1.5,
            word: 0.33,
            org: 1.0,
            venue: 1.0,
        }
    }
}

/// Clustering parameters of the from-scratch pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SndConfig {
    pub db_eps: f64,
    pub db_min: usize,
    pub post_weights: PostMatchWeights,
    pub post_threshold: f64,
    pub modality: Modality,
}

impl Default for SndConfig {
    fn default() -> Self {
        SndConfig {
            db_eps: 0.2,
            db_min: 4,
            post_weights: PostMatchWeights::default(),
            post_threshold: 1.5,
            modality: Modality::Both,
        }
    }
}

impl SndConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.db_eps > 0.0 && self.db_eps <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "db_eps must lie in (0, 1], got {}",
                self.db_eps
            )));
        }
        if self.db_min == 0 {
            return Err(Error::InvalidConfig("db_min must be at least 1".into()));
        }
        if self.post_threshold <= 0.0 {
            return Err(Error::InvalidConfig("post_threshold must be positive".into()));
        }
        Ok(())
    }
}

/// A dense symmetric distance matrix with zero diagonal.
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> DistanceMatrix {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            assert_eq!(row.len(), n, "distance matrix must be square");
            data.extend(row);
        }
        DistanceMatrix { n, data }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }
}

/// Builds the fused distance matrix of one block.
///
/// Per pair, each modality contributes its cosine clipped below at zero;
/// the fused similarity is the mean of the active modalities and the
/// distance is one minus it. Papers missing from the relational table
/// (isolated in the graph) contribute zero relational similarity.
pub fn combined_distance(
    paper_ids: &[PaperId],
    sem: &[Vec<f64>],
    rel: Option<&EmbeddingTable>,
    modality: Modality,
) -> Result<DistanceMatrix> {
    let n = paper_ids.len();
    if modality.uses_semantic() && sem.len() != n {
        return Err(Error::DimensionMismatch {
            left: sem.len(),
            right: n,
        });
    }
    if modality.uses_relational() && rel.is_none() && matches!(modality, Modality::Relational) {
        return Err(Error::InvalidConfig(
            "relational modality requested without a relational table".into(),
        ));
    }
    let rel_vectors: Vec<Option<&[f64]>> = if modality.uses_relational() {
        paper_ids
            .iter()
            .map(|id| rel.and_then(|t| t.get(id)))
            .collect()
    } else {
        vec![None; n]
    };
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut row = vec![0.0; n];
            for j in 0..n {
                if i == j {
                    continue;
                }
                let mut total = 0.0;
                let mut sources = 0usize;
                if modality.uses_semantic() {
                    let s = embed::cosine(&sem[i], &sem[j]).expect("semantic dims agree");
                    total += s.max(0.0);
                    sources += 1;
                }
                if modality.uses_relational() {
                    let s = match (rel_vectors[i], rel_vectors[j]) {
                        (Some(u), Some(v)) => embed::cosine(u, v).expect("relational dims agree"),
                        _ => 0.0,
                    };
                    total += s.max(0.0);
                    sources += 1;
                }
                row[j] = 1.0 - total / sources as f64;
            }
            row
        })
        .collect();
    Ok(DistanceMatrix::from_rows(rows))
}

/// Density clustering on a precomputed distance matrix.
///
/// A point is core iff at least `min_pts` points (itself included) lie
/// within `eps`. Points are visited and expanded in ascending index order,
/// so border points always join the earliest cluster that reaches them and
/// the labeling is deterministic. `None` marks noise.
pub fn dbscan(dist: &DistanceMatrix, eps: f64, min_pts: usize) -> Vec<Option<usize>> {
    let n = dist.len();
    let region = |p: usize| -> Vec<usize> {
        (0..n).filter(|&q| dist.at(p, q) <= eps).collect()
    };
    let mut labels: Vec<Option<usize>> = vec![None; n];
    let mut visited = vec![false; n];
    let mut next_label = 0usize;
    for p in 0..n {
        if visited[p] {
            continue;
        }
        visited[p] = true;
        let neighbors = region(p);
        if neighbors.len() < min_pts {
            continue; // noise unless a later cluster claims it as border
        }
        let label = next_label;
        next_label += 1;
        labels[p] = Some(label);
        let mut queue: VecDeque<usize> = neighbors.into_iter().collect();
        while let Some(q) = queue.pop_front() {
            if labels[q].is_none() {
                labels[q] = Some(label);
            }
            if visited[q] {
                continue;
            }
            visited[q] = true;
            let q_neighbors = region(q);
            if q_neighbors.len() >= min_pts {
                queue.extend(q_neighbors);
            }
        }
    }
    labels
}

/// Attribute signature used by the post-match rule.
struct MatchSignature {
    coauthors: BTreeSet<String>,
    words: BTreeSet<String>,
    org: BTreeSet<String>,
    venue: BTreeSet<String>,
}

fn match_signature(paper: &PaperRecord, name: &NameKey, stoplist: &Stoplist) -> MatchSignature {
    let mut words: BTreeSet<String> = tokenize(&paper.title, stoplist).into_iter().collect();
    for kw in &paper.keywords {
        words.extend(tokenize(kw, stoplist));
    }
    let org = paper
        .author_index_for(name)
        .map(|i| tokenize(&paper.authors[i].org, stoplist).into_iter().collect())
        .unwrap_or_default();
    MatchSignature {
        coauthors: relgraph::coauthor_keys(paper, name),
        words,
        org,
        venue: tokenize(&paper.venue, stoplist).into_iter().collect(),
    }
}

/// Scores a noise paper against every cluster and returns the best label
/// when its score clears the threshold.
///
/// Per cluster the score is `w_coa·CoA + w_word·CoW + w_org·CoO +
/// w_venue·CoV`, each component averaged over the cluster's papers: exact
/// normalized coauthor matches, co-occurring title+keyword tokens, and
/// Tanimoto overlaps of the target-author organization and venue token
/// sets. Score ties go to the smaller label.
pub fn post_match(
    noise_paper: &PaperRecord,
    target_name: &NameKey,
    clusters: &BTreeMap<usize, Vec<&PaperRecord>>,
    weights: &PostMatchWeights,
    threshold: f64,
    stoplist: &Stoplist,
) -> Option<usize> {
    if clusters.is_empty() {
        return None;
    }
    let noise = match_signature(noise_paper, target_name, stoplist);
    let mut best: Option<(usize, f64)> = None;
    for (&label, members) in clusters {
        let mut coa = 0.0;
        let mut cow = 0.0;
        let mut coo = 0.0;
        let mut cov = 0.0;
        for member in members {
            let m = match_signature(member, target_name, stoplist);
            coa += noise.coauthors.intersection(&m.coauthors).count() as f64;
            cow += noise.words.intersection(&m.words).count() as f64;
            coo += tanimoto(&noise.org, &m.org);
            cov += tanimoto(&noise.venue, &m.venue);
        }
        let k = members.len() as f64;
        let score = weights.coauthor * coa / k
            + weights.word * cow / k
            + weights.org * coo / k
            + weights.venue * cov / k;
        let better = match best {
            None => true,
            Some((_, best_score)) => score > best_score,
        };
        if better {
            best = Some((label, score));
        }
    }
    match best {
        Some((label, score)) if score > threshold => Some(label),
        _ => None,
    }
}

/// A finished block clustering: every input paper carries exactly one
/// dense label; `unmatched` lists the papers left as singletons by the
/// post-match step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clustering {
    pub labels: BTreeMap<PaperId, usize>,
    pub unmatched: Vec<PaperId>,
}

impl Clustering {
    /// Papers grouped by label, labels ascending, ids sorted inside each
    /// cluster.
    pub fn to_clusters(&self) -> Vec<Vec<PaperId>> {
        let mut grouped: BTreeMap<usize, Vec<PaperId>> = BTreeMap::new();
        for (id, label) in &self.labels {
            grouped.entry(*label).or_default().push(id.clone());
        }
        grouped.into_values().collect()
    }
}

/// Everything the from-scratch pipeline needs besides the block itself.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SndPipelineConfig {
    pub snd: SndConfig,
    pub fields: FieldSet,
    pub relations: RelationSet,
    pub walk: WalkConfig,
    pub rel_embed: EmbedConfig,
}

/// Runs the full from-scratch pipeline on one name block: relational graph
/// → walks → relational embeddings → fused distances → density clustering
/// → post-match of every noise paper → dense labels.
pub fn snd_pipeline(
    name: &NameKey,
    paper_ids: &[PaperId],
    store: &PaperStore,
    sem_table: &EmbeddingTable,
    config: &SndPipelineConfig,
    stoplist: &Stoplist,
) -> Result<Clustering> {
    config.snd.validate()?;
    config.fields.validate()?;
    let mut ids: Vec<PaperId> = paper_ids.to_vec();
    ids.sort();
    ids.dedup();
    let records: Vec<&PaperRecord> = ids
        .iter()
        .map(|id| store.require(id))
        .collect::<Result<_>>()?;

    if ids.len() == 1 {
        return Ok(Clustering {
            labels: BTreeMap::from([(ids[0].clone(), 0)]),
            unmatched: ids,
        });
    }

    let modality = config.snd.modality;
    let sem_vectors: Vec<Vec<f64>> = if modality.uses_semantic() {
        records
            .iter()
            .map(|p| {
                let idx = p.author_index_for(name).ok_or_else(|| Error::NoMatchingAuthor {
                    paper: p.id.clone(),
                    name: name.to_string(),
                })?;
                embed::paper_embedding(p, idx, &config.fields, sem_table, stoplist)
            })
            .collect::<Result<_>>()?
    } else {
        Vec::new()
    };

    let rel_table = if modality.uses_relational() {
        let graph = relgraph::build_graph(&records, name, &config.relations, stoplist)?;
        let corpus = relgraph::random_walks(&graph, &config.walk)?;
        match relgraph::relational_embeddings(&corpus, &config.rel_embed) {
            Ok(table) => Some(table),
            // A fully isolated block has no relational signal; the
            // semantic side (or zero similarity) takes over.
            Err(Error::EmptyWalkCorpus) => None,
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    if matches!(modality, Modality::Relational) && rel_table.is_none() {
        // All papers isolated: nothing clusters, everything post-matches
        // against an empty cluster list and stays a singleton.
        let labels: BTreeMap<PaperId, usize> = ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), i))
            .collect();
        return Ok(Clustering {
            labels,
            unmatched: ids,
        });
    }

    let sem_for_distance: Vec<Vec<f64>> = if modality.uses_semantic() {
        sem_vectors
    } else {
        Vec::new()
    };
    let dist = combined_distance(&ids, &sem_for_distance, rel_table.as_ref(), modality)?;
    let raw_labels = dbscan(&dist, config.snd.db_eps, config.snd.db_min);

    let mut clusters: BTreeMap<usize, Vec<&PaperRecord>> = BTreeMap::new();
    for (i, label) in raw_labels.iter().enumerate() {
        if let Some(l) = label {
            clusters.entry(*l).or_default().push(records[i]);
        }
    }

    let mut final_labels: BTreeMap<PaperId, usize> = BTreeMap::new();
    let mut unmatched: Vec<PaperId> = Vec::new();
    for (i, label) in raw_labels.iter().enumerate() {
        if let Some(l) = label {
            final_labels.insert(ids[i].clone(), *l);
        } else {
            match post_match(
                records[i],
                name,
                &clusters,
                &config.snd.post_weights,
                config.snd.post_threshold,
                stoplist,
            ) {
                Some(l) => {
                    final_labels.insert(ids[i].clone(), l);
                }
                None => unmatched.push(ids[i].clone()),
            }
        }
    }
    // Densify: cluster labels keep their order, singletons follow.
    let mut dense: BTreeMap<usize, usize> = BTreeMap::new();
    for label in final_labels.values() {
        let next = dense.len();
        dense.entry(*label).or_insert(next);
    }
    for label in final_labels.values_mut() {
        *label = dense[label];
    }
    unmatched.sort();
    for (offset, id) in unmatched.iter().enumerate() {
        final_labels.insert(id.clone(), dense.len() + offset);
    }
    Ok(Clustering {
        labels: final_labels,
        unmatched,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::PaperAuthor;
    use crate::textnorm::normalize_name;

    #[test]
    fn combined_distance_identical_embeddings() {
        let ids = vec!["p1".to_string(), "p2".to_string()];
        let sem = vec![vec![1.0, 0.0], vec![1.0, 0.0]];
        let d = combined_distance(&ids, &sem, None, Modality::Semantic).unwrap();
        assert_eq!(d.at(0, 1), 0.0);
        assert_eq!(d.at(0, 0), 0.0);
    }

    #[test]
    fn combined_distance_orthogonal_embeddings() {
        let ids = vec!["p1".to_string(), "p2".to_string()];
        let sem = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let d = combined_distance(&ids, &sem, None, Modality::Semantic).unwrap();
        assert_eq!(d.at(0, 1), 1.0);
    }

    #[test]
    fn combined_distance_mixes_modalities() {
        // Semantic cosine 0.8, relational cosine 0.4 → distance 0.4.
        let ids = vec!["p1".to_string(), "p2".to_string()];
        let sem = vec![vec![1.0, 0.0], vec![0.8, 0.6]];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rel.txt");
        std::fs::write(
            &path,
            format!("2 2\np1 1.0 0.0\np2 0.4 {:.6}\n", (1.0f64 - 0.16).sqrt()),
        )
        .unwrap();
        let rel = EmbeddingTable::load(&path).unwrap();
        let d = combined_distance(&ids, &sem, Some(&rel), Modality::Both).unwrap();
        assert!((d.at(0, 1) - 0.4).abs() < 1e-6);
        assert!((d.at(0, 1) - d.at(1, 0)).abs() < 1e-15);
    }

    #[test]
    fn combined_distance_clips_negative_cosines() {
        let ids = vec!["p1".to_string(), "p2".to_string()];
        let sem = vec![vec![1.0, 0.0], vec![-1.0, 0.0]];
        let d = combined_distance(&ids, &sem, None, Modality::Semantic).unwrap();
        assert_eq!(d.at(0, 1), 1.0);
    }

    fn uniform_matrix(n: usize, d: f64) -> DistanceMatrix {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 0.0 } else { d }).collect())
            .collect();
        DistanceMatrix::from_rows(rows)
    }

    #[test]
    fn dbscan_all_core_single_cluster() {
        let labels = dbscan(&uniform_matrix(5, 0.0), 0.2, 4);
        assert!(labels.iter().all(|l| *l == Some(0)));
    }

    #[test]
    fn dbscan_below_density_is_noise() {
        let labels = dbscan(&uniform_matrix(3, 0.0), 0.2, 4);
        assert!(labels.iter().all(Option::is_none));
    }

    #[test]
    fn dbscan_two_blobs() {
        let n = 12;
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            0.0
                        } else if (i < 6) == (j < 6) {
                            0.05
                        } else {
                            0.9
                        }
                    })
                    .collect()
            })
            .collect();
        let labels = dbscan(&DistanceMatrix::from_rows(rows), 0.2, 4);
        for i in 0..6 {
            assert_eq!(labels[i], Some(0));
        }
        for i in 6..12 {
            assert_eq!(labels[i], Some(1));
        }
    }

    fn record(id: &str, coauthors: &[&str], title: &str, org: &str, venue: &str) -> PaperRecord {
        let mut authors = vec![PaperAuthor {
            name: "Wei Chen".into(),
            org: org.into(),
        }];
        authors.extend(coauthors.iter().map(|c| PaperAuthor {
            name: (*c).into(),
            org: String::new(),
        }));
        PaperRecord {
            id: id.into(),
            title: title.into(),
            abstract_text: String::new(),
            keywords: vec![],
            authors,
            venue: venue.into(),
            year: 2010,
        }
    }

    #[test]
    fn post_match_coauthor_and_venue_clears_threshold() {
        let name = normalize_name("wei chen").unwrap();
        let noise = record("n", &["Ada Lovelace"], "some topic", "", "Nature");
        let member = record("m", &["Ada Lovelace"], "other things", "", "Nature");
        let clusters = BTreeMap::from([(0usize, vec![&member])]);
        let got = post_match(
            &noise,
            &name,
            &clusters,
            &PostMatchWeights::default(),
            1.5,
            &Stoplist::empty(),
        );
        // Score = 1.5·1 (coauthor) + 1.0·1 (venue tanimoto) = 2.5 > 1.5.
        assert_eq!(got, Some(0));
    }

    #[test]
    fn post_match_nothing_shared_stays_noise() {
        let name = normalize_name("wei chen").unwrap();
        let noise = record("n", &["Ada Lovelace"], "alpha beta", "One Org", "Nature");
        let member = record("m", &["Grace Hopper"], "gamma delta", "Other Org", "Science");
        let clusters = BTreeMap::from([(0usize, vec![&member])]);
        let got = post_match(
            &noise,
            &name,
            &clusters,
            &PostMatchWeights::default(),
            1.5,
            &Stoplist::empty(),
        );
        assert_eq!(got, None);
    }

    #[test]
    fn post_match_tie_prefers_smaller_label() {
        let name = normalize_name("wei chen").unwrap();
        let noise = record("n", &["Ada Lovelace", "Grace Hopper"], "", "", "");
        let m1 = record("m1", &["Ada Lovelace", "Grace Hopper"], "", "", "");
        let m2 = record("m2", &["Ada Lovelace", "Grace Hopper"], "", "", "");
        let clusters = BTreeMap::from([(0usize, vec![&m1]), (1usize, vec![&m2])]);
        let got = post_match(
            &noise,
            &name,
            &clusters,
            &PostMatchWeights::default(),
            1.5,
            &Stoplist::empty(),
        );
        assert_eq!(got, Some(0));
    }

    #[test]
    fn post_match_empty_clusters_returns_none() {
        let name = normalize_name("wei chen").unwrap();
        let noise = record("n", &[], "", "", "");
        let got = post_match(
            &noise,
            &name,
            &BTreeMap::new(),
            &PostMatchWeights::default(),
            1.5,
            &Stoplist::empty(),
        );
        assert_eq!(got, None);
    }

    #[test]
    fn post_match_score_monotone_in_overlap() {
        let name = normalize_name("wei chen").unwrap();
        let noise = record("n", &["Ada Lovelace", "Grace Hopper"], "topic words", "", "Nature");
        let weak = record("m", &["Ada Lovelace"], "", "", "");
        let strong = record("m", &["Ada Lovelace", "Grace Hopper"], "topic words", "", "Nature");
        let weak_clusters = BTreeMap::from([(0usize, vec![&weak])]);
        let strong_clusters = BTreeMap::from([(0usize, vec![&strong])]);
        // Both clear the threshold; the stronger overlap must also match.
        assert_eq!(
            post_match(&noise, &name, &weak_clusters, &PostMatchWeights::default(), 1.0, &Stoplist::empty()),
            Some(0)
        );
        assert_eq!(
            post_match(&noise, &name, &strong_clusters, &PostMatchWeights::default(), 1.0, &Stoplist::empty()),
            Some(0)
        );
    }

    #[test]
    fn pipeline_single_paper_is_singleton() {
        let mut store = PaperStore::default();
        store.insert(record("p1", &["Ada Lovelace"], "solo work", "Org", "Venue"));
        let table = embed::train_skipgram(
            &vec![vec!["solo".to_string(), "work".to_string()]; 4],
            &EmbedConfig {
                dim: 8,
                epochs: 1,
                min_count: 1,
                ..EmbedConfig::default()
            },
        )
        .unwrap();
        let name = normalize_name("wei chen").unwrap();
        let got = snd_pipeline(
            &name,
            &["p1".to_string()],
            &store,
            &table,
            &SndPipelineConfig::default(),
            &Stoplist::empty(),
        )
        .unwrap();
        assert_eq!(got.labels.len(), 1);
        assert_eq!(got.labels["p1"], 0);
        assert_eq!(got.unmatched, vec!["p1".to_string()]);
    }

    #[test]
    fn pipeline_semantic_modality_ignores_relational_changes() {
        // Two stores identical except for venues (venue is not in the
        // default semantic field set, but it changes the relational graph).
        let build_store = |venue_a: &str| {
            let mut store = PaperStore::default();
            for i in 0..6 {
                let venue = if i % 2 == 0 { venue_a } else { "Steady Venue" };
                store.insert(record(
                    &format!("p{i}"),
                    &["Ada Lovelace"],
                    if i < 3 { "quantum flux lattice" } else { "marine biology survey" },
                    "Same Org",
                    venue,
                ));
            }
            store
        };
        let store1 = build_store("Nature");
        let store2 = build_store("Science");
        let corpus: Vec<Vec<String>> = (0..30)
            .map(|_| "quantum flux lattice marine biology survey same org".split(' ').map(str::to_owned).collect())
            .collect();
        let table = embed::train_skipgram(
            &corpus,
            &EmbedConfig {
                dim: 8,
                epochs: 2,
                min_count: 1,
                ..EmbedConfig::default()
            },
        )
        .unwrap();
        let config = SndPipelineConfig {
            snd: SndConfig {
                modality: Modality::Semantic,
                ..SndConfig::default()
            },
            ..SndPipelineConfig::default()
        };
        let name = normalize_name("wei chen").unwrap();
        let ids: Vec<String> = (0..6).map(|i| format!("p{i}")).collect();
        let c1 = snd_pipeline(&name, &ids, &store1, &table, &config, &Stoplist::empty()).unwrap();
        let c2 = snd_pipeline(&name, &ids, &store2, &table, &config, &Stoplist::empty()).unwrap();
        assert_eq!(c1, c2);
    }

    #[test]
    fn clustering_covers_every_input_exactly_once() {
        let mut store = PaperStore::default();
        for i in 0..5 {
            store.insert(record(
                &format!("p{i}"),
                &["Ada Lovelace"],
                "shared topic words",
                "Org",
                "Venue",
            ));
        }
        let table = embed::train_skipgram(
            &vec![vec!["shared".to_string(), "topic".to_string(), "words".to_string()]; 10],
            &EmbedConfig {
                dim: 8,
                epochs: 2,
                min_count: 1,
                ..EmbedConfig::default()
            },
        )
        .unwrap();
        let name = normalize_name("wei chen").unwrap();
        let ids: Vec<String> = (0..5).map(|i| format!("p{i}")).collect();
        let got = snd_pipeline(&name, &ids, &store, &table, &SndPipelineConfig::default(), &Stoplist::empty()).unwrap();
        let labeled: Vec<&String> = got.labels.keys().collect();
        assert_eq!(labeled.len(), 5);
        let clusters = got.to_clusters();
        let total: usize = clusters.iter().map(Vec::len).sum();
        assert_eq!(total, 5);
    }
}
