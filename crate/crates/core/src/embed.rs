//! Skip-gram token embeddings and paper-embedding composition.
//!
//! The trainer is a from-scratch skip-gram with negative sampling over
//! token sequences. Walk sequences reuse it unchanged by treating node ids
//! as tokens. Training is single-threaded and bitwise reproducible for a
//! fixed seed.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::PaperRecord;
use crate::error::{Error, Result};
use crate::seeding;
use crate::textnorm::{normalize_name, tokenize, Stoplist};

/// Skip-gram hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EmbedConfig {
    pub dim: usize,
    pub window: usize,
    pub negative: usize,
    pub min_count: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for EmbedConfig {
    fn default() -> Self {
        EmbedConfig {
            dim: 100,
            window: 5,
            negative: 5,
            min_count: 2,
            epochs: 5,
            learning_rate: 0.025,
            seed: 0,
        }
    }
}

impl EmbedConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.window == 0 || self.epochs == 0 {
            return Err(Error::InvalidConfig(
                "dim, window, and epochs must be at least 1".into(),
            ));
        }
        if self.learning_rate <= 0.0 {
            return Err(Error::InvalidConfig("learning_rate must be positive".into()));
        }
        Ok(())
    }
}

/// A trained token → vector table.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    tokens: Vec<String>,
    index: HashMap<String, usize>,
    vectors: Vec<f64>,
}

impl EmbeddingTable {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.index
            .get(token)
            .map(|&i| &self.vectors[i * self.dim..(i + 1) * self.dim])
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(String::as_str)
    }

    /// Writes the table as text: a `<vocab_size> <dim>` header line, then
    /// one `token v1 ... vdim` line per token.
    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let mut w = BufWriter::new(file);
        let io_err = |e| Error::io(path.display().to_string(), e);
        writeln!(w, "{} {}", self.tokens.len(), self.dim).map_err(io_err)?;
        for (i, token) in self.tokens.iter().enumerate() {
            write!(w, "{token}").map_err(io_err)?;
            for d in 0..self.dim {
                write!(w, " {:.6}", self.vectors[i * self.dim + d]).map_err(io_err)?;
            }
            writeln!(w).map_err(io_err)?;
        }
        w.flush().map_err(io_err)
    }

    pub fn load(path: &Path) -> Result<EmbeddingTable> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let reader = BufReader::new(file);
        let mut lines = reader.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::schema("line 1", "missing header"))?;
        let header = header.map_err(|e| Error::io(path.display().to_string(), e))?;
        let mut parts = header.split_whitespace();
        let count: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::schema("line 1", "bad vocab size"))?;
        let dim: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::schema("line 1", "bad dimension"))?;
        let mut tokens = Vec::with_capacity(count);
        let mut index = HashMap::with_capacity(count);
        let mut vectors = Vec::with_capacity(count * dim);
        for (lineno, line) in lines {
            let line = line.map_err(|e| Error::io(path.display().to_string(), e))?;
            if line.trim().is_empty() {
                continue;
            }
            let at = format!("line {}", lineno + 1);
            let mut fields = line.split_whitespace();
            let token = fields
                .next()
                .ok_or_else(|| Error::schema(&at, "missing token"))?;
            let values: Vec<f64> = fields
                .map(|v| v.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::schema(&at, "non-numeric vector component"))?;
            if values.len() != dim {
                return Err(Error::schema(
                    &at,
                    format!("expected {dim} components, got {}", values.len()),
                ));
            }
            index.insert(token.to_owned(), tokens.len());
            tokens.push(token.to_owned());
            vectors.extend(values);
        }
        if tokens.len() != count {
            return Err(Error::schema(
                "header",
                format!("header promised {count} tokens, file has {}", tokens.len()),
            ));
        }
        Ok(EmbeddingTable {
            dim,
            tokens,
            index,
            vectors,
        })
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Cumulative unigram^0.75 noise distribution for negative sampling.
struct NoiseSampler {
    cumulative: Vec<f64>,
    total: f64,
}

impl NoiseSampler {
    fn new(counts: &[usize]) -> Self {
        let mut cumulative = Vec::with_capacity(counts.len());
        let mut total = 0.0;
        for &c in counts {
            total += (c as f64).powf(0.75);
            cumulative.push(total);
        }
        NoiseSampler { cumulative, total }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        let x = rng.random::<f64>() * self.total;
        self.cumulative.partition_point(|&c| c <= x).min(self.cumulative.len() - 1)
    }
}

/// Trains skip-gram embeddings with negative sampling.
///
/// Tokens below `min_count` are dropped from the vocabulary; negative
/// targets are drawn from the unigram distribution raised to 0.75; the
/// learning rate decays linearly over the scheduled token visits.
pub fn train_skipgram<S: AsRef<str>>(
    sequences: &[Vec<S>],
    config: &EmbedConfig,
) -> Result<EmbeddingTable> {
    config.validate()?;
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for seq in sequences {
        for token in seq {
            *counts.entry(token.as_ref()).or_insert(0) += 1;
        }
    }
    let mut kept: Vec<(&str, usize)> = counts
        .into_iter()
        .filter(|(_, c)| *c >= config.min_count)
        .collect();
    // Deterministic indices: frequent first, ties alphabetical.
    kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    if kept.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    let tokens: Vec<String> = kept.iter().map(|(t, _)| (*t).to_owned()).collect();
    let token_counts: Vec<usize> = kept.iter().map(|(_, c)| *c).collect();
    let index: HashMap<String, usize> = tokens
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), i))
        .collect();

    let dim = config.dim;
    let vocab = tokens.len();
    let mut rng = seeding::rng_for(config.seed, "skipgram");
    let mut input: Vec<f64> = (0..vocab * dim)
        .map(|_| (rng.random::<f64>() - 0.5) / dim as f64)
        .collect();
    let mut output: Vec<f64> = vec![0.0; vocab * dim];
    let sampler = NoiseSampler::new(&token_counts);

    let indexed: Vec<Vec<usize>> = sequences
        .iter()
        .map(|seq| {
            seq.iter()
                .filter_map(|t| index.get(t.as_ref()).copied())
                .collect()
        })
        .collect();
    let total_tokens: usize = indexed.iter().map(Vec::len).sum();
    if total_tokens == 0 {
        return Err(Error::EmptyVocabulary);
    }
    let scheduled = (config.epochs * total_tokens) as f64;
    let mut processed = 0usize;
    let mut grad = vec![0.0; dim];

    for _epoch in 0..config.epochs {
        for seq in &indexed {
            for center_pos in 0..seq.len() {
                let alpha = (config.learning_rate
                    * (1.0 - processed as f64 / scheduled))
                    .max(config.learning_rate * 1e-4);
                processed += 1;
                let reduced = rng.random_range(0..config.window);
                let span = config.window - reduced;
                let target = seq[center_pos];
                let lo = center_pos.saturating_sub(span);
                let hi = (center_pos + span + 1).min(seq.len());
                for (context_pos, &word) in seq.iter().enumerate().take(hi).skip(lo) {
                    if context_pos == center_pos {
                        continue;
                    }
                    let in_off = word * dim;
                    grad.fill(0.0);
                    for k in 0..=config.negative {
                        let (sample, label) = if k == 0 {
                            (target, 1.0)
                        } else {
                            let neg = sampler.sample(&mut rng);
                            if neg == target {
                                continue;
                            }
                            (neg, 0.0)
                        };
                        let out_off = sample * dim;
                        let mut dot = 0.0;
                        for d in 0..dim {
                            dot += input[in_off + d] * output[out_off + d];
                        }
                        let g = (label - sigmoid(dot)) * alpha;
                        for d in 0..dim {
                            grad[d] += g * output[out_off + d];
                            output[out_off + d] += g * input[in_off + d];
                        }
                    }
                    for d in 0..dim {
                        input[in_off + d] += grad[d];
                    }
                }
            }
        }
    }

    Ok(EmbeddingTable {
        dim,
        tokens,
        index,
        vectors: input,
    })
}

/// Which paper attributes feed the paper embedding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FieldSet {
    pub title: bool,
    pub abstract_text: bool,
    pub keywords: bool,
    pub venue: bool,
    pub year: bool,
    pub coauthor_names: bool,
    pub org_of_target: bool,
}

impl Default for FieldSet {
    fn default() -> Self {
        FieldSet {
            title: true,
            abstract_text: false,
            keywords: true,
            venue: false,
            year: false,
            coauthor_names: false,
            org_of_target: true,
        }
    }
}

impl FieldSet {
    pub fn none() -> Self {
        FieldSet {
            title: false,
            abstract_text: false,
            keywords: false,
            venue: false,
            year: false,
            coauthor_names: false,
            org_of_target: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if [
            self.title,
            self.abstract_text,
            self.keywords,
            self.venue,
            self.year,
            self.coauthor_names,
            self.org_of_target,
        ]
        .iter()
        .any(|f| *f)
        {
            Ok(())
        } else {
            Err(Error::InvalidConfig("field set selects no attribute".into()))
        }
    }

    /// Parses a comma-separated list like `title,keywords,org`.
    pub fn parse(spec: &str) -> Result<FieldSet> {
        let mut fields = FieldSet::none();
        for raw in spec.split(',') {
            match raw.trim().to_lowercase().as_str() {
                "title" => fields.title = true,
                "abstract" => fields.abstract_text = true,
                "keywords" => fields.keywords = true,
                "venue" => fields.venue = true,
                "year" => fields.year = true,
                "coauthors" | "names" => fields.coauthor_names = true,
                "org" => fields.org_of_target = true,
                "" => {}
                other => {
                    return Err(Error::InvalidConfig(format!(
                        "unknown field {other:?}; expected title, abstract, keywords, venue, year, coauthors, org"
                    )))
                }
            }
        }
        fields.validate()?;
        Ok(fields)
    }
}

/// Collects the embedding tokens of one paper for the selected fields.
pub fn field_tokens(
    paper: &PaperRecord,
    target_index: usize,
    fields: &FieldSet,
    stoplist: &Stoplist,
) -> Result<Vec<String>> {
    if target_index >= paper.authors.len() {
        return Err(Error::AuthorIndexOutOfRange {
            paper: paper.id.clone(),
            index: target_index,
            len: paper.authors.len(),
        });
    }
    let mut tokens = Vec::new();
    if fields.title {
        tokens.extend(tokenize(&paper.title, stoplist));
    }
    if fields.abstract_text {
        tokens.extend(tokenize(&paper.abstract_text, stoplist));
    }
    if fields.keywords {
        for kw in &paper.keywords {
            tokens.extend(tokenize(kw, stoplist));
        }
    }
    if fields.venue {
        tokens.extend(tokenize(&paper.venue, stoplist));
    }
    if fields.year && paper.year != 0 {
        tokens.push(paper.year.to_string());
    }
    if fields.coauthor_names {
        for (i, author) in paper.authors.iter().enumerate() {
            if i == target_index {
                continue;
            }
            if let Ok(key) = normalize_name(&author.name) {
                tokens.push(key.as_str().to_owned());
            }
        }
    }
    if fields.org_of_target {
        tokens.extend(tokenize(&paper.authors[target_index].org, stoplist));
    }
    Ok(tokens)
}

/// Mean of the in-vocabulary token vectors over the selected fields; the
/// zero vector when nothing is in vocabulary.
pub fn paper_embedding(
    paper: &PaperRecord,
    target_index: usize,
    fields: &FieldSet,
    table: &EmbeddingTable,
    stoplist: &Stoplist,
) -> Result<Vec<f64>> {
    let tokens = field_tokens(paper, target_index, fields, stoplist)?;
    let mut sum = vec![0.0; table.dim()];
    let mut n = 0usize;
    for token in &tokens {
        if let Some(v) = table.get(token) {
            for (s, x) in sum.iter_mut().zip(v) {
                *s += x;
            }
            n += 1;
        }
    }
    if n > 0 {
        for s in &mut sum {
            *s /= n as f64;
        }
    }
    Ok(sum)
}

/// Cosine similarity; 0 when either vector has zero norm.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    let mut dot = 0.0;
    let mut nu = 0.0;
    let mut nv = 0.0;
    for (a, b) in u.iter().zip(v) {
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 || nv == 0.0 {
        return Ok(0.0);
    }
    Ok(dot / (nu.sqrt() * nv.sqrt()))
}

/// One training sequence per paper over every textual attribute: title,
/// abstract, keywords, venue, year, author names, and all organizations.
pub fn train_sequences(
    papers: impl Iterator<Item = impl std::ops::Deref<Target = PaperRecord>>,
    stoplist: &Stoplist,
) -> Vec<Vec<String>> {
    let mut sequences = Vec::new();
    for paper in papers {
        let mut seq = tokenize(&paper.title, stoplist);
        seq.extend(tokenize(&paper.abstract_text, stoplist));
        for kw in &paper.keywords {
            seq.extend(tokenize(kw, stoplist));
        }
        seq.extend(tokenize(&paper.venue, stoplist));
        if paper.year != 0 {
            seq.push(paper.year.to_string());
        }
        for author in &paper.authors {
            if let Ok(key) = normalize_name(&author.name) {
                seq.push(key.as_str().to_owned());
            }
            seq.extend(tokenize(&author.org, stoplist));
        }
        if !seq.is_empty() {
            sequences.push(seq);
        }
    }
    sequences
}
