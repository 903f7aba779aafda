//! Synthetic name-block generator with known ground truth.
//!
//! Each author of a block owns a disjoint topic vocabulary and a disjoint
//! coauthor pool. At zero cross-noise, papers of one author always share
//! core coauthors and core topic tokens while papers of different authors
//! share nothing, which makes end-to-end expectations analytic rather than
//! tuned. `cross_noise` is the probability that a paper borrows one topic
//! token and one coauthor from another author of the same name.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{NameBlockSet, PaperAuthor, PaperRecord, PaperStore};
use crate::error::{Error, Result};
use crate::seeding;
use crate::textnorm::normalize_name;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub names: usize,
    pub authors_per_name: usize,
    pub papers_per_author: usize,
    pub vocab_per_author: usize,
    pub coauthor_pool_per_author: usize,
    pub cross_noise: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            names: 1,
            authors_per_name: 4,
            papers_per_author: 8,
            vocab_per_author: 12,
            coauthor_pool_per_author: 5,
            cross_noise: 0.0,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.names == 0 {
            return Err(Error::InvalidConfig("names must be at least 1".into()));
        }
        if self.authors_per_name < 2 {
            return Err(Error::InvalidConfig(
                "authors_per_name must be at least 2".into(),
            ));
        }
        if self.papers_per_author == 0 {
            return Err(Error::InvalidConfig(
                "papers_per_author must be at least 1".into(),
            ));
        }
        if self.vocab_per_author < 6 {
            return Err(Error::InvalidConfig(
                "vocab_per_author must be at least 6 (3 core + 3 free tokens)".into(),
            ));
        }
        if self.coauthor_pool_per_author < 3 {
            return Err(Error::InvalidConfig(
                "coauthor_pool_per_author must be at least 3 (2 core + 1 free)".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.cross_noise) {
            return Err(Error::InvalidConfig(format!(
                "cross_noise must lie in [0, 1], got {}",
                self.cross_noise
            )));
        }
        Ok(())
    }
}

/// A generated corpus: ground-truth authorships plus the paper store.
#[derive(Debug, Clone)]
pub struct SynthData {
    pub blocks: NameBlockSet,
    pub store: PaperStore,
}

/// Lowercase base-26 label: 0 → "a", 25 → "z", 26 → "aa".
fn letters(mut i: usize) -> String {
    let mut out = Vec::new();
    loop {
        out.push(b'a' + (i % 26) as u8);
        i /= 26;
        if i == 0 {
            break;
        }
        i -= 1;
    }
    out.reverse();
    String::from_utf8(out).expect("ascii")
}

const FIRST_NAMES: [&str; 10] = [
    "Wei", "Lin", "Hao", "Mei", "Jun", "Fang", "Kai", "Ping", "Tao", "Yun",
];

fn block_name(i: usize) -> String {
    format!("{} Surn{}", FIRST_NAMES[i % FIRST_NAMES.len()], letters(i))
}

struct AuthorWorld {
    id: String,
    display_name: String,
    vocab: Vec<String>,
    pool: Vec<String>,
    venue: String,
    org: String,
}

fn author_world(name_idx: usize, author_idx: usize, raw_name: &str, config: &SynthConfig) -> AuthorWorld {
    let ln = letters(name_idx);
    let lk = letters(author_idx);
    AuthorWorld {
        id: format!("auth-{ln}-{lk}"),
        display_name: raw_name.to_owned(),
        vocab: (0..config.vocab_per_author)
            .map(|j| format!("topic{ln}{lk}{}", letters(j)))
            .collect(),
        pool: (0..config.coauthor_pool_per_author)
            .map(|j| format!("Co{ln}{lk}{} Pool{ln}{lk}", letters(j)))
            .collect(),
        venue: format!("Journal{ln}{lk} Letters{ln}{lk}"),
        org: format!("Institute{ln}{lk} Department{ln}{lk}"),
    }
}

/// Generates a deterministic synthetic corpus for the given configuration.
pub fn generate(config: &SynthConfig) -> Result<SynthData> {
    config.validate()?;
    let mut rng = seeding::rng_for(config.seed, "synth");
    let mut blocks = NameBlockSet::new();
    let mut store = PaperStore::default();

    for n in 0..config.names {
        let raw_name = block_name(n);
        let name_key = normalize_name(&raw_name)?;
        let worlds: Vec<AuthorWorld> = (0..config.authors_per_name)
            .map(|k| author_world(n, k, &raw_name, config))
            .collect();
        for (k, world) in worlds.iter().enumerate() {
            let mut paper_ids = Vec::with_capacity(config.papers_per_author);
            for j in 0..config.papers_per_author {
                let id = format!("p{}{}{:03}", letters(n), letters(k), j);

                // Title: the 3 core topic tokens plus 3 drawn from the rest.
                let mut title_tokens: Vec<String> = world.vocab[..3].to_vec();
                for _ in 0..3 {
                    let pick = rng.random_range(3..world.vocab.len());
                    title_tokens.push(world.vocab[pick].clone());
                }
                // Keywords: 2 tokens from anywhere in the author vocabulary.
                let keywords: Vec<String> = (0..2)
                    .map(|_| world.vocab[rng.random_range(0..world.vocab.len())].clone())
                    .collect();
                // Coauthors: both core pool members plus one free member.
                let mut coauthors: Vec<String> = world.pool[..2].to_vec();
                coauthors.push(world.pool[2 + rng.random_range(0..world.pool.len() - 2)].clone());

                let borrow_token = rng.random::<f64>() < config.cross_noise;
                let borrow_coauthor = rng.random::<f64>() < config.cross_noise;
                if borrow_token || borrow_coauthor {
                    let other = (k + 1 + rng.random_range(0..config.authors_per_name - 1))
                        % config.authors_per_name;
                    let other_world = &worlds[other];
                    if borrow_token {
                        let pick = rng.random_range(0..other_world.vocab.len());
                        title_tokens.push(other_world.vocab[pick].clone());
                    }
                    if borrow_coauthor {
                        let pick = rng.random_range(0..other_world.pool.len());
                        coauthors.push(other_world.pool[pick].clone());
                    }
                }

                let mut authors: Vec<PaperAuthor> = coauthors
                    .iter()
                    .map(|c| PaperAuthor {
                        name: c.clone(),
                        org: String::new(),
                    })
                    .collect();
                let target_pos = j % (authors.len() + 1);
                authors.insert(
                    target_pos,
                    PaperAuthor {
                        name: world.display_name.clone(),
                        org: world.org.clone(),
                    },
                );

                store.insert(PaperRecord {
                    id: id.clone(),
                    title: title_tokens.join(" "),
                    abstract_text: String::new(),
                    keywords,
                    authors,
                    venue: world.venue.clone(),
                    year: 1991 + j as i32,
                });
                paper_ids.push(id);
            }
            blocks.insert(name_key.clone(), world.id.clone(), paper_ids);
        }
    }
    blocks.check_disjoint()?;
    Ok(SynthData { blocks, store })
}
