//! Real-time assignment of newly arrived papers: hand-crafted features,
//! kernel-pooled similarity blocks, a trained scorer, and NIL-aware
//! assignment with threshold calibration.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::corpus::{AuthorId, AuthorOrNil, NameBlockSet, PaperId, PaperRecord, PaperRef, PaperStore, RndSplit};
use crate::embed::{self, EmbeddingTable, FieldSet};
use crate::error::{Error, Result};
use crate::eval;
use crate::relgraph;
use crate::seeding;
use crate::textnorm::{
    build_idf, jaccard, jaro_winkler, normalize_name, same_name, tokenize, IdfTable, NameKey,
    Stoplist,
};

/// Width of the hand-crafted feature block.
pub const ADHOC_LEN: usize = 36;
/// Width of one kernel-pooled similarity block.
pub const KERNEL_LEN: usize = 41;
/// Width of the full concatenated feature vector.
pub const FEATURE_LEN: usize = ADHOC_LEN + 2 * KERNEL_LEN;

/// Slot ranges of the hand-crafted block, one per attribute family.
pub mod slots {
    use std::ops::Range;

    pub const COAUTHOR: Range<usize> = 0..4;
    pub const TITLE: Range<usize> = 4..12;
    pub const VENUE: Range<usize> = 12..20;
    pub const ORG: Range<usize> = 20..28;
    pub const KEYWORDS: Range<usize> = 28..36;
}

/// RBF kernel bank: evenly spaced centers over [−1, 1] with a sharp
/// exact-match kernel at μ = 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KernelConfig {
    pub count: usize,
    pub sigma: f64,
    pub exact_sigma: f64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig {
            count: KERNEL_LEN,
            sigma: 0.1,
            exact_sigma: 0.001,
        }
    }
}

impl KernelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.count < 2 {
            return Err(Error::InvalidConfig("kernel count must be at least 2".into()));
        }
        if self.sigma <= 0.0 || self.exact_sigma <= 0.0 {
            return Err(Error::InvalidConfig("kernel sigmas must be positive".into()));
        }
        Ok(())
    }

    /// Kernel centers: `count` values evenly spaced from −1 to 1.
    pub fn mus(&self) -> Vec<f64> {
        let step = 2.0 / (self.count - 1) as f64;
        (0..self.count).map(|j| -1.0 + j as f64 * step).collect()
    }

    fn sigma_at(&self, j: usize) -> f64 {
        if j + 1 == self.count {
            self.exact_sigma
        } else {
            self.sigma
        }
    }
}

/// Pools a variable-length similarity list into a fixed-length vector:
/// component j is ln(1 + Σ_i exp(−(s_i − μ_j)² / (2σ_j²))). The empty list
/// pools to the zero vector.
pub fn kernel_pool(sims: &[f64], k: &KernelConfig) -> Vec<f64> {
    let mus = k.mus();
    if sims.is_empty() {
        return vec![0.0; mus.len()];
    }
    mus.iter()
        .enumerate()
        .map(|(j, mu)| {
            let sigma = k.sigma_at(j);
            let sum: f64 = sims
                .iter()
                .map(|s| (-(s - mu).powi(2) / (2.0 * sigma * sigma)).exp())
                .sum();
            (1.0 + sum).ln()
        })
        .collect()
}

/// Per-attribute-family document-frequency tables, built over the
/// candidate-author documents of one name block.
#[derive(Debug, Clone, Default)]
pub struct FamilyIdf {
    pub coauthor: IdfTable,
    pub title: IdfTable,
    pub venue: IdfTable,
    pub org: IdfTable,
    pub keywords: IdfTable,
}

/// Tokenized attributes of one paper from the target author's viewpoint.
struct PaperAttributes {
    coauthors: Vec<String>,
    title: Vec<String>,
    venue: Vec<String>,
    org: Vec<String>,
    keywords: Vec<String>,
    title_str: String,
    venue_str: String,
    org_str: String,
    keywords_str: String,
}

fn paper_attributes(
    paper: &PaperRecord,
    author_index: Option<usize>,
    name: &NameKey,
    stoplist: &Stoplist,
) -> PaperAttributes {
    let idx = author_index.or_else(|| paper.author_index_for(name));
    let coauthors: Vec<String> = paper
        .authors
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != idx)
        .filter_map(|(_, a)| normalize_name(&a.name).ok())
        .filter(|k| !same_name(k, name))
        .map(|k| k.as_str().to_owned())
        .collect();
    let org_str = idx.map(|i| paper.authors[i].org.clone()).unwrap_or_default();
    let keywords_str = paper.keywords.join(" ");
    PaperAttributes {
        coauthors,
        title: tokenize(&paper.title, stoplist),
        venue: tokenize(&paper.venue, stoplist),
        org: tokenize(&org_str, stoplist),
        keywords: tokenize(&keywords_str, stoplist),
        title_str: paper.title.to_lowercase(),
        venue_str: paper.venue.to_lowercase(),
        org_str: org_str.to_lowercase(),
        keywords_str: keywords_str.to_lowercase(),
    }
}

/// Builds the five per-family idf tables from the candidate profiles of a
/// name block: one concatenated document per candidate author and family.
pub fn build_family_idf(
    candidates: &BTreeMap<AuthorId, Vec<&PaperRecord>>,
    name: &NameKey,
    stoplist: &Stoplist,
) -> FamilyIdf {
    let mut coauthor_docs = Vec::with_capacity(candidates.len());
    let mut title_docs = Vec::with_capacity(candidates.len());
    let mut venue_docs = Vec::with_capacity(candidates.len());
    let mut org_docs = Vec::with_capacity(candidates.len());
    let mut keyword_docs = Vec::with_capacity(candidates.len());
    for papers in candidates.values() {
        let mut doc = (Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new());
        for paper in papers {
            let attrs = paper_attributes(paper, None, name, stoplist);
            doc.0.extend(attrs.coauthors);
            doc.1.extend(attrs.title);
            doc.2.extend(attrs.venue);
            doc.3.extend(attrs.org);
            doc.4.extend(attrs.keywords);
        }
        coauthor_docs.push(doc.0);
        title_docs.push(doc.1);
        venue_docs.push(doc.2);
        org_docs.push(doc.3);
        keyword_docs.push(doc.4);
    }
    FamilyIdf {
        coauthor: build_idf(&coauthor_docs),
        title: build_idf(&title_docs),
        venue: build_idf(&venue_docs),
        org: build_idf(&org_docs),
        keywords: build_idf(&keyword_docs),
    }
}

struct FamilyInput<'a> {
    target_tokens: &'a [String],
    target_string: &'a str,
    candidate_docs: Vec<(&'a [String], &'a str)>,
    idf: &'a IdfTable,
    with_similarities: bool,
}

/// The four scalar features (plus, for text families, the four max/mean
/// similarity features) of one attribute family.
fn family_features(input: FamilyInput<'_>, out: &mut Vec<f64>) {
    let target_set: BTreeSet<&str> = input.target_tokens.iter().map(String::as_str).collect();
    let mut candidate_counts: BTreeMap<&str, usize> = BTreeMap::new();
    for (doc, _) in &input.candidate_docs {
        for token in doc.iter() {
            *candidate_counts.entry(token).or_insert(0) += 1;
        }
    }
    let common: Vec<&str> = target_set
        .iter()
        .filter(|t| candidate_counts.contains_key(**t))
        .copied()
        .collect();
    let idf_sum: f64 = common.iter().map(|t| input.idf.idf(t)).sum();
    let idf_weighted: f64 = common
        .iter()
        .map(|t| input.idf.idf(t) * candidate_counts[*t] as f64)
        .sum();
    let ratio_target = if target_set.is_empty() {
        0.0
    } else {
        common.len() as f64 / target_set.len() as f64
    };
    let ratio_candidate = if candidate_counts.is_empty() {
        0.0
    } else {
        common.len() as f64 / candidate_counts.len() as f64
    };
    out.extend([idf_sum, idf_weighted, ratio_target, ratio_candidate]);
    if !input.with_similarities {
        return;
    }
    let target_empty = input.target_string.trim().is_empty();
    let mut jac = Vec::with_capacity(input.candidate_docs.len());
    let mut jw = Vec::with_capacity(input.candidate_docs.len());
    for (doc, string) in &input.candidate_docs {
        let doc_set: BTreeSet<&str> = doc.iter().map(String::as_str).collect();
        let target_cmp: BTreeSet<&str> = target_set.iter().copied().collect();
        jac.push(jaccard(&target_cmp, &doc_set));
        if target_empty || string.trim().is_empty() {
            jw.push(0.0);
        } else {
            jw.push(jaro_winkler(input.target_string, string));
        }
    }
    let max = |v: &[f64]| v.iter().copied().fold(0.0f64, f64::max);
    let mean = |v: &[f64]| {
        if v.is_empty() {
            0.0
        } else {
            v.iter().sum::<f64>() / v.len() as f64
        }
    };
    out.extend([max(&jac), mean(&jac), max(&jw), mean(&jw)]);
}

/// Computes the 36 hand-crafted features of one (target paper, candidate
/// author) pair.
///
/// Families in slot order: coauthors (4 features), then title, venue,
/// target-author organization, and keywords (8 features each: idf overlap,
/// count-weighted idf overlap, the two overlap ratios, and max/mean
/// Jaccard and Jaro–Winkler against each candidate paper).
pub fn adhoc_features(
    target: &PaperRecord,
    target_index: usize,
    candidate: &[&PaperRecord],
    idf: &FamilyIdf,
    stoplist: &Stoplist,
) -> Result<Vec<f64>> {
    if target_index >= target.authors.len() {
        return Err(Error::AuthorIndexOutOfRange {
            paper: target.id.clone(),
            index: target_index,
            len: target.authors.len(),
        });
    }
    let name = normalize_name(&target.authors[target_index].name)?;
    let target_attrs = paper_attributes(target, Some(target_index), &name, stoplist);
    let candidate_attrs: Vec<PaperAttributes> = candidate
        .iter()
        .map(|p| paper_attributes(p, None, &name, stoplist))
        .collect();

    let mut out = Vec::with_capacity(ADHOC_LEN);
    family_features(
        FamilyInput {
            target_tokens: &target_attrs.coauthors,
            target_string: "",
            candidate_docs: candidate_attrs
                .iter()
                .map(|a| (a.coauthors.as_slice(), ""))
                .collect(),
            idf: &idf.coauthor,
            with_similarities: false,
        },
        &mut out,
    );
    family_features(
        FamilyInput {
            target_tokens: &target_attrs.title,
            target_string: &target_attrs.title_str,
            candidate_docs: candidate_attrs
                .iter()
                .map(|a| (a.title.as_slice(), a.title_str.as_str()))
                .collect(),
            idf: &idf.title,
            with_similarities: true,
        },
        &mut out,
    );
    family_features(
        FamilyInput {
            target_tokens: &target_attrs.venue,
            target_string: &target_attrs.venue_str,
            candidate_docs: candidate_attrs
                .iter()
                .map(|a| (a.venue.as_slice(), a.venue_str.as_str()))
                .collect(),
            idf: &idf.venue,
            with_similarities: true,
        },
        &mut out,
    );
    family_features(
        FamilyInput {
            target_tokens: &target_attrs.org,
            target_string: &target_attrs.org_str,
            candidate_docs: candidate_attrs
                .iter()
                .map(|a| (a.org.as_slice(), a.org_str.as_str()))
                .collect(),
            idf: &idf.org,
            with_similarities: true,
        },
        &mut out,
    );
    family_features(
        FamilyInput {
            target_tokens: &target_attrs.keywords,
            target_string: &target_attrs.keywords_str,
            candidate_docs: candidate_attrs
                .iter()
                .map(|a| (a.keywords.as_slice(), a.keywords_str.as_str()))
                .collect(),
            idf: &idf.keywords,
            with_similarities: true,
        },
        &mut out,
    );
    debug_assert_eq!(out.len(), ADHOC_LEN);
    Ok(out)
}

/// Kernel-pooled cosine similarities between the target paper embedding
/// and each candidate paper embedding.
pub fn soft_semantic_features(
    target: &PaperRef,
    candidate: &[&PaperRecord],
    table: &EmbeddingTable,
    fields: &FieldSet,
    kernel: &KernelConfig,
    store: &PaperStore,
    stoplist: &Stoplist,
) -> Result<Vec<f64>> {
    let (record, idx) = store.resolve(target)?;
    let name = normalize_name(&record.authors[idx].name)?;
    let target_emb = embed::paper_embedding(record, idx, fields, table, stoplist)?;
    let mut sims = Vec::with_capacity(candidate.len());
    for paper in candidate {
        let cand_idx = paper.author_index_for(&name).unwrap_or(0);
        let emb = embed::paper_embedding(paper, cand_idx, fields, table, stoplist)?;
        sims.push(embed::cosine(&target_emb, &emb)?);
    }
    Ok(kernel_pool(&sims, kernel))
}

/// Kernel-pooled ego-graph similarity scores between the target paper and
/// the candidate author's profile.
#[allow(clippy::too_many_arguments)]
pub fn ego_features(
    target: &PaperRef,
    candidate: &AuthorId,
    profile: &[&PaperRecord],
    table: &EmbeddingTable,
    fields: &FieldSet,
    kernel: &KernelConfig,
    store: &PaperStore,
    stoplist: &Stoplist,
) -> Result<Vec<f64>> {
    let ego = relgraph::build_ego_graph(target, candidate, profile, store, stoplist)?;
    let scores = relgraph::ego_relational_scores(&ego, table, store, fields, stoplist)?;
    Ok(kernel_pool(&scores, kernel))
}

/// Concatenates the three feature blocks in fixed order.
pub fn assemble(adhoc: &[f64], soft: &[f64], ego: &[f64]) -> Result<Vec<f64>> {
    if adhoc.len() != ADHOC_LEN || soft.len() != KERNEL_LEN || ego.len() != KERNEL_LEN {
        return Err(Error::DimensionMismatch {
            left: adhoc.len() + soft.len() + ego.len(),
            right: FEATURE_LEN,
        });
    }
    let mut out = Vec::with_capacity(FEATURE_LEN);
    out.extend_from_slice(adhoc);
    out.extend_from_slice(soft);
    out.extend_from_slice(ego);
    Ok(out)
}

/// Which feature blocks feed the scorer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureMode {
    AdhocOnly,
    Full,
}

impl FeatureMode {
    /// Width of the assembled feature vector under this mode.
    pub fn width(&self) -> usize {
        match self {
            FeatureMode::AdhocOnly => ADHOC_LEN,
            FeatureMode::Full => FEATURE_LEN,
        }
    }

    pub fn parse(s: &str) -> Result<FeatureMode> {
        match s.trim().to_lowercase().as_str() {
            "adhoc" | "adhoc-only" => Ok(FeatureMode::AdhocOnly),
            "full" => Ok(FeatureMode::Full),
            other => Err(Error::InvalidConfig(format!(
                "unknown feature mode {other:?}; expected adhoc or full"
            ))),
        }
    }
}

/// Assignment parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RndConfig {
    pub negatives_per_positive: usize,
    pub nil_threshold: f64,
    pub kernel: KernelConfig,
}

impl Default for RndConfig {
    fn default() -> Self {
        RndConfig {
            negatives_per_positive: 3,
            nil_threshold: 0.5,
            kernel: KernelConfig::default(),
        }
    }
}

impl RndConfig {
    pub fn validate(&self) -> Result<()> {
        if self.negatives_per_positive == 0 {
            return Err(Error::InvalidConfig(
                "negatives_per_positive must be at least 1".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.nil_threshold) || self.nil_threshold <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "nil_threshold must lie in (0, 1), got {}",
                self.nil_threshold
            )));
        }
        self.kernel.validate()
    }
}

/// Bundles the read-only state needed to featurize (paper, candidate)
/// pairs.
pub struct FeatureExtractor<'a> {
    pub store: &'a PaperStore,
    pub table: &'a EmbeddingTable,
    pub fields: FieldSet,
    pub kernel: KernelConfig,
    pub mode: FeatureMode,
    pub stoplist: &'a Stoplist,
}

impl<'a> FeatureExtractor<'a> {
    /// Resolves a candidate author's profile papers, skipping dangling ids.
    pub fn profile_papers(&self, papers: &[PaperId]) -> Vec<&'a PaperRecord> {
        papers.iter().filter_map(|id| self.store.get(id)).collect()
    }

    /// The feature vector of one (target, candidate profile) pair.
    pub fn pair_features(
        &self,
        target: &PaperRef,
        candidate: &AuthorId,
        profile: &[&PaperRecord],
        idf: &FamilyIdf,
    ) -> Result<Vec<f64>> {
        let (record, idx) = self.store.resolve(target)?;
        let adhoc = adhoc_features(record, idx, profile, idf, self.stoplist)?;
        match self.mode {
            FeatureMode::AdhocOnly => Ok(adhoc),
            FeatureMode::Full => {
                let soft = soft_semantic_features(
                    target,
                    profile,
                    self.table,
                    &self.fields,
                    &self.kernel,
                    self.store,
                    self.stoplist,
                )?;
                let ego = ego_features(
                    target,
                    candidate,
                    profile,
                    self.table,
                    &self.fields,
                    &self.kernel,
                    self.store,
                    self.stoplist,
                )?;
                assemble(&adhoc, &soft, &ego)
            }
        }
    }
}

/// Locates the profile block whose name matches the paper's author name.
pub fn find_block<'a>(
    profiles: &'a NameBlockSet,
    name: &NameKey,
) -> Option<(&'a NameKey, &'a BTreeMap<AuthorId, Vec<PaperId>>)> {
    profiles
        .iter()
        .find(|(n, _)| *n == name)
        .or_else(|| profiles.iter().find(|(n, _)| same_name(n, name)))
}

/// One labeled training example.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingPair {
    pub target: PaperRef,
    pub candidate: AuthorId,
    pub label: bool,
}

/// Builds labeled (paper, candidate) pairs from a split that retains its
/// truth: one positive per assignable paper plus up to
/// `negatives` same-name candidates sampled without replacement. Papers
/// with NIL truth contribute pure negatives.
pub fn build_training_pairs(
    split: &RndSplit,
    store: &PaperStore,
    negatives: usize,
    seed: u64,
) -> Vec<TrainingPair> {
    let mut pairs = Vec::new();
    for r in &split.unassigned {
        let Some(truth) = split.truth.get(r) else {
            continue;
        };
        let Ok((record, idx)) = store.resolve(r) else {
            continue;
        };
        let Ok(name) = normalize_name(&record.authors[idx].name) else {
            continue;
        };
        let Some((_, block)) = find_block(&split.profiles, &name) else {
            continue;
        };
        let positive = truth.as_author();
        if let Some(author) = positive {
            if block.contains_key(author) {
                pairs.push(TrainingPair {
                    target: r.clone(),
                    candidate: author.to_owned(),
                    label: true,
                });
            }
        }
        let others: Vec<&AuthorId> = block
            .keys()
            .filter(|a| Some(a.as_str()) != positive)
            .collect();
        let mut rng = seeding::rng_for(seed, &format!("pairs:{r}"));
        for i in seeding::sample_indices(&mut rng, others.len(), negatives) {
            pairs.push(TrainingPair {
                target: r.clone(),
                candidate: others[i].clone(),
                label: false,
            });
        }
    }
    pairs
}

/// Mean logistic loss with L2 weight regularization.
///
/// `params` is the weight vector with the bias appended; the bias is not
/// regularized.
pub fn logistic_loss(params: &[f64], features: &[Vec<f64>], labels: &[bool], l2: f64) -> f64 {
    let d = params.len() - 1;
    let bias = params[d];
    let n = features.len() as f64;
    let mut loss = 0.0;
    for (x, &y) in features.iter().zip(labels) {
        let z: f64 = x.iter().zip(&params[..d]).map(|(a, w)| a * w).sum::<f64>() + bias;
        // log(1 + exp(-margin)) written to stay finite for large |z|.
        let margin = if y { z } else { -z };
        loss += if margin > 0.0 {
            (1.0 + (-margin).exp()).ln()
        } else {
            -margin + (1.0 + margin.exp()).ln()
        };
    }
    loss / n + 0.5 * l2 * params[..d].iter().map(|w| w * w).sum::<f64>()
}

/// Analytic gradient of [`logistic_loss`] in the same parameter layout.
pub fn logistic_grad(params: &[f64], features: &[Vec<f64>], labels: &[bool], l2: f64) -> Vec<f64> {
    let d = params.len() - 1;
    let bias = params[d];
    let n = features.len() as f64;
    let mut grad = vec![0.0; params.len()];
    for (x, &y) in features.iter().zip(labels) {
        let z: f64 = x.iter().zip(&params[..d]).map(|(a, w)| a * w).sum::<f64>() + bias;
        let p = 1.0 / (1.0 + (-z).exp());
        let err = p - if y { 1.0 } else { 0.0 };
        for (g, a) in grad[..d].iter_mut().zip(x) {
            *g += err * a;
        }
        grad[d] += err;
    }
    for g in grad.iter_mut() {
        *g /= n;
    }
    for (g, w) in grad[..d].iter_mut().zip(&params[..d]) {
        *g += l2 * w;
    }
    grad
}

/// Scorer training parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScorerConfig {
    pub l2: f64,
    pub iterations: usize,
    pub learning_rate: f64,
}

impl Default for ScorerConfig {
    fn default() -> Self {
        ScorerConfig {
            l2: 1e-4,
            iterations: 400,
            learning_rate: 0.5,
        }
    }
}

/// A trained pair scorer emitting probabilities in (0, 1).
///
/// The default realization is an L2-regularized logistic model fitted by
/// full-batch gradient descent over standardized features; the trait keeps
/// the slot open for tree ensembles or externally trained models.
pub trait Scorer {
    fn score(&self, features: &[f64]) -> f64;
    fn feature_len(&self) -> usize;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticScorer {
    pub kind: String,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    pub mode: FeatureMode,
}

impl Scorer for LogisticScorer {
    fn score(&self, features: &[f64]) -> f64 {
        let z: f64 = features
            .iter()
            .zip(&self.means)
            .zip(&self.stds)
            .zip(&self.weights)
            .map(|(((x, m), s), w)| w * (x - m) / s)
            .sum::<f64>()
            + self.bias;
        1.0 / (1.0 + (-z).exp())
    }

    fn feature_len(&self) -> usize {
        self.weights.len()
    }
}

impl LogisticScorer {
    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self).expect("scorer serializes");
        std::fs::write(path, json + "\n").map_err(|e| Error::io(path.display().to_string(), e))
    }

    pub fn load(path: &std::path::Path) -> Result<LogisticScorer> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        serde_json::from_str(&text).map_err(|e| Error::Json {
            path: path.display().to_string(),
            source: e,
        })
    }
}

/// Fits the logistic scorer by deterministic full-batch gradient descent.
pub fn train_scorer(
    features: &[Vec<f64>],
    labels: &[bool],
    mode: FeatureMode,
    config: &ScorerConfig,
) -> Result<LogisticScorer> {
    if features.len() != labels.len() || features.is_empty() {
        return Err(Error::DegenerateTraining(
            "need one label per feature row and at least one row".into(),
        ));
    }
    let n_pos = labels.iter().filter(|l| **l).count();
    if n_pos == 0 || n_pos == labels.len() {
        return Err(Error::DegenerateTraining(
            "training set contains a single class".into(),
        ));
    }
    let d = mode.width();
    if features.iter().any(|f| f.len() != d) {
        return Err(Error::DimensionMismatch {
            left: features[0].len(),
            right: d,
        });
    }
    let n = features.len() as f64;
    let mut means = vec![0.0; d];
    for row in features {
        for (m, x) in means.iter_mut().zip(row) {
            *m += x;
        }
    }
    for m in means.iter_mut() {
        *m /= n;
    }
    let mut stds = vec![0.0; d];
    for row in features {
        for ((s, x), m) in stds.iter_mut().zip(row).zip(&means) {
            *s += (x - m) * (x - m);
        }
    }
    for s in stds.iter_mut() {
        *s = (*s / n).sqrt();
        if *s < 1e-12 {
            *s = 1.0;
        }
    }
    let standardized: Vec<Vec<f64>> = features
        .iter()
        .map(|row| {
            row.iter()
                .zip(&means)
                .zip(&stds)
                .map(|((x, m), s)| (x - m) / s)
                .collect()
        })
        .collect();
    let mut params = vec![0.0; d + 1];
    for _ in 0..config.iterations {
        let grad = logistic_grad(&params, &standardized, labels, config.l2);
        for (p, g) in params.iter_mut().zip(&grad) {
            *p -= config.learning_rate * g;
        }
    }
    let bias = params[d];
    params.truncate(d);
    Ok(LogisticScorer {
        kind: "logistic".into(),
        weights: params,
        bias,
        means,
        stds,
        mode,
    })
}

/// Scores every candidate of a block for one target paper, in ascending
/// author-id order.
pub fn score_candidates(
    extractor: &FeatureExtractor<'_>,
    target: &PaperRef,
    candidates: &BTreeMap<AuthorId, Vec<PaperId>>,
    idf: &FamilyIdf,
    scorer: &dyn Scorer,
) -> Result<Vec<(AuthorId, f64)>> {
    let mut out = Vec::with_capacity(candidates.len());
    for (author, papers) in candidates {
        let profile = extractor.profile_papers(papers);
        if profile.is_empty() {
            continue;
        }
        let features = extractor.pair_features(target, author, &profile, idf)?;
        out.push((author.clone(), scorer.score(&features)));
    }
    Ok(out)
}

/// Argmax-with-threshold decision: the best-scoring candidate when its
/// score exceeds the threshold, NIL otherwise. Ties fall to the
/// lexicographically smaller author id.
pub fn assign_from_scores(scores: &[(AuthorId, f64)], nil_threshold: f64) -> (AuthorOrNil, f64) {
    let mut best: Option<(&AuthorId, f64)> = None;
    for (author, score) in scores {
        let better = match best {
            None => true,
            Some((_, b)) => *score > b,
        };
        if better {
            best = Some((author, *score));
        }
    }
    match best {
        Some((author, score)) if score > nil_threshold => (AuthorOrNil::Author(author.clone()), score),
        Some((_, score)) => (AuthorOrNil::Nil, score),
        None => (AuthorOrNil::Nil, 0.0),
    }
}

/// Featurizes, scores, and decides one target paper against a candidate
/// map. An empty candidate map yields NIL.
pub fn assign(
    extractor: &FeatureExtractor<'_>,
    target: &PaperRef,
    candidates: &BTreeMap<AuthorId, Vec<PaperId>>,
    idf: &FamilyIdf,
    scorer: &dyn Scorer,
    nil_threshold: f64,
) -> Result<(AuthorOrNil, f64)> {
    let scores = score_candidates(extractor, target, candidates, idf, scorer)?;
    Ok(assign_from_scores(&scores, nil_threshold))
}

/// The calibration grid: 0.05, 0.10, …, 0.95.
pub fn threshold_grid() -> Vec<f64> {
    (1..=19).map(|i| i as f64 * 0.05).collect()
}

/// Outcome of NIL-threshold calibration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Calibration {
    pub threshold: f64,
    pub weighted_f1: Option<f64>,
    pub defaulted: bool,
}

/// Grid-searches the NIL threshold maximizing weighted F1 on validation
/// candidate scores; F1 ties fall to the smaller threshold. Without any
/// NIL truth the default 0.5 is kept and flagged.
pub fn calibrate_nil_threshold(
    scored: &BTreeMap<PaperRef, Vec<(AuthorId, f64)>>,
    truth: &BTreeMap<PaperRef, AuthorOrNil>,
) -> Calibration {
    if !truth.values().any(|t| t.is_nil()) {
        return Calibration {
            threshold: 0.5,
            weighted_f1: None,
            defaulted: true,
        };
    }
    let mut best: Option<(f64, f64)> = None;
    for threshold in threshold_grid() {
        let assignments: BTreeMap<PaperRef, AuthorOrNil> = truth
            .keys()
            .map(|r| {
                let decision = scored
                    .get(r)
                    .map(|s| assign_from_scores(s, threshold).0)
                    .unwrap_or(AuthorOrNil::Nil);
                (r.clone(), decision)
            })
            .collect();
        let f1 = eval::weighted_prf(&assignments, truth)
            .map(|r| r.aggregate.f1)
            .unwrap_or(0.0);
        let better = match best {
            None => true,
            Some((_, best_f1)) => f1 > best_f1,
        };
        if better {
            best = Some((threshold, f1));
        }
    }
    let (threshold, f1) = best.expect("grid is non-empty");
    Calibration {
        threshold,
        weighted_f1: Some(f1),
        defaulted: false,
    }
}

/// Dumps a labeled feature matrix as text: one row per pair, feature
/// columns then the 0/1 label, space separated.
pub fn dump_feature_matrix(
    features: &[Vec<f64>],
    labels: &[bool],
    path: &std::path::Path,
) -> Result<()> {
    use std::io::Write;
    let file = std::fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut w = std::io::BufWriter::new(file);
    let io_err = |e| Error::io(path.display().to_string(), e);
    for (row, label) in features.iter().zip(labels) {
        for x in row {
            write!(w, "{x:.6} ").map_err(io_err)?;
        }
        writeln!(w, "{}", if *label { 1 } else { 0 }).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

/// Slot range of one feature family inside the full vector, for ablation
/// reporting.
pub fn family_range(family: &str) -> Option<Range<usize>> {
    match family {
        "coauthor" => Some(slots::COAUTHOR),
        "title" => Some(slots::TITLE),
        "venue" => Some(slots::VENUE),
        "org" => Some(slots::ORG),
        "keywords" => Some(slots::KEYWORDS),
        _ => None,
    }
}
