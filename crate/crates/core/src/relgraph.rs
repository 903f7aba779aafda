//! Heterogeneous relational graphs over papers, weighted meta-path random
//! walks, and ego graphs for the assignment task.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{AuthorId, PaperId, PaperRecord, PaperRef, PaperStore};
use crate::embed::{self, EmbedConfig, EmbeddingTable, FieldSet};
use crate::error::{Error, Result};
use crate::seeding;
use crate::textnorm::{normalize_name, same_name, tokenize, NameKey, Stoplist};

/// Relational edge types between papers of one name block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Relation {
    CoAuthor,
    CoOrg,
    CoVenue,
}

/// Which relation types participate in graph construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RelationSet {
    pub coauthor: bool,
    pub coorg: bool,
    pub covenue: bool,
}

impl Default for RelationSet {
    fn default() -> Self {
        RelationSet {
            coauthor: true,
            coorg: true,
            covenue: true,
        }
    }
}

impl RelationSet {
    pub fn none() -> Self {
        RelationSet {
            coauthor: false,
            coorg: false,
            covenue: false,
        }
    }

    pub fn contains(&self, r: Relation) -> bool {
        match r {
            Relation::CoAuthor => self.coauthor,
            Relation::CoOrg => self.coorg,
            Relation::CoVenue => self.covenue,
        }
    }

    pub fn is_empty(&self) -> bool {
        !(self.coauthor || self.coorg || self.covenue)
    }

    /// Parses a comma-separated list like `coauthor,coorg,covenue`.
    pub fn parse(spec: &str) -> Result<RelationSet> {
        let mut set = RelationSet::none();
        for raw in spec.split(',') {
            match raw.trim().to_lowercase().as_str() {
                "coauthor" => set.coauthor = true,
                "coorg" => set.coorg = true,
                "covenue" => set.covenue = true,
                "" => {}
                other => {
                    return Err(Error::InvalidConfig(format!(
                        "unknown relation {other:?}; expected coauthor, coorg, covenue"
                    )))
                }
            }
        }
        if set.is_empty() {
            return Err(Error::InvalidConfig("relation set selects nothing".into()));
        }
        Ok(set)
    }
}

/// Meta-path walk parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WalkConfig {
    pub walk_length: usize,
    pub walks_per_node: usize,
    pub covenue_prob: f64,
    pub seed: u64,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig {
            walk_length: 20,
            walks_per_node: 5,
            covenue_prob: 0.1,
            seed: 0,
        }
    }
}

impl WalkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.walk_length < 2 {
            return Err(Error::InvalidConfig("walk_length must be at least 2".into()));
        }
        if !(0.0..=1.0).contains(&self.covenue_prob) {
            return Err(Error::InvalidConfig(
                "covenue_prob must lie in [0, 1]".into(),
            ));
        }
        Ok(())
    }
}

/// A weighted typed-edge graph over the papers of one name block.
#[derive(Debug, Clone)]
pub struct HeteroGraph {
    nodes: Vec<PaperId>,
    adj: Vec<Vec<(usize, Relation, u32)>>,
}

impl HeteroGraph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[PaperId] {
        &self.nodes
    }

    pub fn edges_of(&self, node: usize) -> &[(usize, Relation, u32)] {
        &self.adj[node]
    }

    /// Total undirected edge count (typed edges counted once per type).
    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn weight(&self, a: usize, b: usize, relation: Relation) -> Option<u32> {
        self.adj[a]
            .iter()
            .find(|(n, r, _)| *n == b && *r == relation)
            .map(|(_, _, w)| *w)
    }

    pub fn is_isolated(&self, node: usize) -> bool {
        self.adj[node].is_empty()
    }
}

/// Per-paper relational signatures of the target author.
struct PaperSignature {
    coauthors: BTreeSet<String>,
    org_tokens: BTreeSet<String>,
    venue_tokens: BTreeSet<String>,
}

/// Normalized names of all authors that do not match `target_name`.
pub(crate) fn coauthor_keys(paper: &PaperRecord, target_name: &NameKey) -> BTreeSet<String> {
    paper
        .authors
        .iter()
        .filter_map(|a| normalize_name(&a.name).ok())
        .filter(|k| !same_name(k, target_name))
        .map(|k| k.as_str().to_owned())
        .collect()
}

fn signature(
    paper: &PaperRecord,
    target_name: &NameKey,
    stoplist: &Stoplist,
) -> Result<PaperSignature> {
    let target_idx = paper
        .author_index_for(target_name)
        .ok_or_else(|| Error::NoMatchingAuthor {
            paper: paper.id.clone(),
            name: target_name.to_string(),
        })?;
    Ok(PaperSignature {
        coauthors: coauthor_keys(paper, target_name),
        org_tokens: tokenize(&paper.authors[target_idx].org, stoplist)
            .into_iter()
            .collect(),
        venue_tokens: tokenize(&paper.venue, stoplist).into_iter().collect(),
    })
}

/// Builds the typed co-occurrence graph of one name block.
///
/// Edge weights count shared normalized coauthor names (target excluded),
/// shared organization tokens of the target author, and shared venue
/// tokens. Zero-weight pairs get no edge; relation types outside
/// `relations` are omitted.
pub fn build_graph(
    papers: &[&PaperRecord],
    target_name: &NameKey,
    relations: &RelationSet,
    stoplist: &Stoplist,
) -> Result<HeteroGraph> {
    let mut order: Vec<usize> = (0..papers.len()).collect();
    order.sort_by(|&a, &b| papers[a].id.cmp(&papers[b].id));
    let nodes: Vec<PaperId> = order.iter().map(|&i| papers[i].id.clone()).collect();
    let signatures: Vec<PaperSignature> = order
        .iter()
        .map(|&i| signature(papers[i], target_name, stoplist))
        .collect::<Result<_>>()?;

    let n = nodes.len();
    let mut adj: Vec<Vec<(usize, Relation, u32)>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            let mut push = |relation: Relation, w: usize| {
                if w > 0 && relations.contains(relation) {
                    adj[i].push((j, relation, w as u32));
                    adj[j].push((i, relation, w as u32));
                }
            };
            push(
                Relation::CoAuthor,
                signatures[i]
                    .coauthors
                    .intersection(&signatures[j].coauthors)
                    .count(),
            );
            push(
                Relation::CoOrg,
                signatures[i]
                    .org_tokens
                    .intersection(&signatures[j].org_tokens)
                    .count(),
            );
            push(
                Relation::CoVenue,
                signatures[i]
                    .venue_tokens
                    .intersection(&signatures[j].venue_tokens)
                    .count(),
            );
        }
    }
    Ok(HeteroGraph { nodes, adj })
}

/// A walk corpus: the generated sequences plus the isolated nodes that
/// produced none (preserved for post-match handling downstream).
#[derive(Debug, Clone)]
pub struct WalkCorpus {
    pub walks: Vec<Vec<PaperId>>,
    pub isolated: Vec<PaperId>,
}

/// Pooled neighbor choice: CoVenue edges with probability `covenue_prob`,
/// otherwise CoAuthor and CoOrg edges pooled by raw weight; falls back to
/// the other restriction when the chosen one has no edges here.
fn step<R: Rng>(graph: &HeteroGraph, node: usize, config: &WalkConfig, rng: &mut R) -> Option<usize> {
    let venue_first = rng.random::<f64>() < config.covenue_prob;
    let pick = |venue: bool, rng: &mut R| -> Option<usize> {
        let mut pooled: BTreeMap<usize, u64> = BTreeMap::new();
        for (neighbor, relation, w) in graph.edges_of(node) {
            let matches = if venue {
                *relation == Relation::CoVenue
            } else {
                *relation != Relation::CoVenue
            };
            if matches {
                *pooled.entry(*neighbor).or_insert(0) += u64::from(*w);
            }
        }
        if pooled.is_empty() {
            return None;
        }
        let total: u64 = pooled.values().sum();
        let mut x = rng.random_range(0..total);
        for (neighbor, w) in &pooled {
            if x < *w {
                return Some(*neighbor);
            }
            x -= w;
        }
        unreachable!("weighted choice exhausted its own total");
    };
    pick(venue_first, rng).or_else(|| pick(!venue_first, rng))
}

/// Runs `walks_per_node` weighted meta-path walks from every non-isolated
/// node. Isolated nodes produce no walks and are reported separately.
///
/// Each start node draws from a generator derived from the seed and the
/// node id, so the corpus does not depend on scheduling order.
pub fn random_walks(graph: &HeteroGraph, config: &WalkConfig) -> Result<WalkCorpus> {
    config.validate()?;
    let mut walks = Vec::new();
    let mut isolated = Vec::new();
    for start in 0..graph.node_count() {
        if graph.is_isolated(start) {
            isolated.push(graph.nodes()[start].clone());
            continue;
        }
        let mut rng = seeding::rng_for(config.seed, &graph.nodes()[start]);
        for _ in 0..config.walks_per_node {
            let mut walk = Vec::with_capacity(config.walk_length);
            let mut current = start;
            walk.push(graph.nodes()[current].clone());
            while walk.len() < config.walk_length {
                match step(graph, current, config, &mut rng) {
                    Some(next) => {
                        current = next;
                        walk.push(graph.nodes()[current].clone());
                    }
                    None => break,
                }
            }
            walks.push(walk);
        }
    }
    Ok(WalkCorpus { walks, isolated })
}

/// Trains paper-id embeddings on a walk corpus by delegating to the
/// skip-gram trainer with `min_count` forced to 1.
pub fn relational_embeddings(corpus: &WalkCorpus, config: &EmbedConfig) -> Result<EmbeddingTable> {
    if corpus.walks.is_empty() {
        return Err(Error::EmptyWalkCorpus);
    }
    let config = EmbedConfig {
        min_count: 1,
        ..config.clone()
    };
    embed::train_skipgram(&corpus.walks, &config)
}

/// Cached relational neighborhood of one paper inside an ego graph.
#[derive(Debug, Clone)]
pub struct EgoPaper {
    pub author_index: Option<usize>,
    pub coauthors: BTreeSet<String>,
    pub org_tokens: BTreeSet<String>,
}

/// The one-hop heterogeneous neighborhood around a target paper and a
/// candidate author: paper, author-name, and organization-token nodes.
#[derive(Debug, Clone)]
pub struct EgoGraph {
    pub center_paper: PaperId,
    pub center_author: AuthorId,
    papers: BTreeMap<PaperId, EgoPaper>,
    profile_ids: Vec<PaperId>,
}

impl EgoGraph {
    pub fn profile_ids(&self) -> &[PaperId] {
        &self.profile_ids
    }

    pub fn paper(&self, id: &str) -> Option<&EgoPaper> {
        self.papers.get(id)
    }

    /// Distinct typed nodes: papers, the candidate author, coauthor names,
    /// and organization tokens.
    pub fn node_count(&self) -> usize {
        let mut names: BTreeSet<&String> = BTreeSet::new();
        let mut orgs: BTreeSet<&String> = BTreeSet::new();
        for p in self.papers.values() {
            names.extend(&p.coauthors);
            orgs.extend(&p.org_tokens);
        }
        self.papers.len() + 1 + names.len() + orgs.len()
    }

    /// Authorship/affiliation edges: candidate-author→paper links plus each
    /// paper's links to its coauthor and organization nodes.
    pub fn edge_count(&self) -> usize {
        let paper_links: usize = self
            .papers
            .values()
            .map(|p| p.coauthors.len() + p.org_tokens.len())
            .sum();
        paper_links + self.profile_ids.len()
    }
}

fn ego_paper(paper: &PaperRecord, name: &NameKey, stoplist: &Stoplist) -> EgoPaper {
    let author_index = paper.author_index_for(name);
    let org_tokens = author_index
        .map(|i| {
            tokenize(&paper.authors[i].org, stoplist)
                .into_iter()
                .collect()
        })
        .unwrap_or_default();
    EgoPaper {
        author_index,
        coauthors: coauthor_keys(paper, name),
        org_tokens,
    }
}

/// Builds the union ego graph of a target paper and a candidate author's
/// profile.
pub fn build_ego_graph(
    target: &PaperRef,
    candidate: &AuthorId,
    profile: &[&PaperRecord],
    store: &PaperStore,
    stoplist: &Stoplist,
) -> Result<EgoGraph> {
    let (record, target_idx) = store.resolve(target)?;
    let name = normalize_name(&record.authors[target_idx].name)?;
    let mut papers = BTreeMap::new();
    let center = EgoPaper {
        author_index: Some(target_idx),
        coauthors: record
            .authors
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != target_idx)
            .filter_map(|(_, a)| normalize_name(&a.name).ok().map(|k| k.as_str().to_owned()))
            .collect(),
        org_tokens: tokenize(&record.authors[target_idx].org, stoplist)
            .into_iter()
            .collect(),
    };
    papers.insert(record.id.clone(), center);
    let mut profile_ids = Vec::with_capacity(profile.len());
    for p in profile {
        papers
            .entry(p.id.clone())
            .or_insert_with(|| ego_paper(p, &name, stoplist));
        profile_ids.push(p.id.clone());
    }
    Ok(EgoGraph {
        center_paper: record.id.clone(),
        center_author: candidate.clone(),
        papers,
        profile_ids,
    })
}

/// One-hop aggregated representation of a paper node: the mean of the
/// paper embedding and the in-vocabulary vectors of its neighbor name and
/// organization nodes.
fn aggregated_repr(
    id: &PaperId,
    ego: &EgoGraph,
    table: &EmbeddingTable,
    store: &PaperStore,
    fields: &FieldSet,
    stoplist: &Stoplist,
) -> Result<Vec<f64>> {
    let info = ego
        .paper(id)
        .ok_or_else(|| Error::UnknownPaper(id.clone()))?;
    let record = store.require(id)?;
    let base = match info.author_index {
        Some(idx) => embed::paper_embedding(record, idx, fields, table, stoplist)?,
        None => vec![0.0; table.dim()],
    };
    let mut sum = base;
    let mut n = 1usize;
    for token in info.coauthors.iter().chain(&info.org_tokens) {
        if let Some(v) = table.get(token) {
            for (s, x) in sum.iter_mut().zip(v) {
                *s += x;
            }
            n += 1;
        }
    }
    for s in &mut sum {
        *s /= n as f64;
    }
    Ok(sum)
}

/// Cosine of the target paper's aggregated representation against each
/// profile paper's aggregated representation, in profile order. Zero
/// vectors yield score 0.
pub fn ego_relational_scores(
    ego: &EgoGraph,
    table: &EmbeddingTable,
    store: &PaperStore,
    fields: &FieldSet,
    stoplist: &Stoplist,
) -> Result<Vec<f64>> {
    let target = aggregated_repr(&ego.center_paper, ego, table, store, fields, stoplist)?;
    let mut scores = Vec::with_capacity(ego.profile_ids().len());
    for id in ego.profile_ids() {
        let repr = aggregated_repr(id, ego, table, store, fields, stoplist)?;
        scores.push(embed::cosine(&target, &repr)?);
    }
    Ok(scores)
}
