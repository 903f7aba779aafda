//! Loading, validation, and splitting of benchmark-format datasets.
//!
//! Three JSON schemas are handled: the two-level name → author → papers
//! assignment map, the flat paper-id → record store, and the one-level
//! author profile file with `normal_data` / `outliers` lists used by the
//! incorrect-assignment task.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::seeding;
use crate::textnorm::{normalize_name, same_name, NameKey};

pub type PaperId = String;
pub type AuthorId = String;

/// One author entry of a paper, as published.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaperAuthor {
    pub name: String,
    #[serde(default)]
    pub org: String,
}

/// One publication with its attribute fields.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PaperRecord {
    pub id: PaperId,
    #[serde(default)]
    pub title: String,
    #[serde(default, rename = "abstract")]
    pub abstract_text: String,
    #[serde(default)]
    pub keywords: Vec<String>,
    #[serde(default)]
    pub authors: Vec<PaperAuthor>,
    #[serde(default)]
    pub venue: String,
    /// Publication year; 0 when unknown.
    #[serde(default)]
    pub year: i32,
}

impl PaperRecord {
    /// Index of the first author whose name matches `name` under blocking.
    pub fn author_index_for(&self, name: &NameKey) -> Option<usize> {
        self.authors.iter().position(|a| {
            normalize_name(&a.name)
                .map(|k| same_name(&k, name))
                .unwrap_or(false)
        })
    }
}

/// All papers of a dataset, keyed by id.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PaperStore {
    #[serde(flatten)]
    papers: BTreeMap<PaperId, PaperRecord>,
}

impl PaperStore {
    pub fn get(&self, id: &str) -> Option<&PaperRecord> {
        self.papers.get(id)
    }

    pub fn require(&self, id: &str) -> Result<&PaperRecord> {
        self.get(id).ok_or_else(|| Error::UnknownPaper(id.to_owned()))
    }

    pub fn contains(&self, id: &str) -> bool {
        self.papers.contains_key(id)
    }

    pub fn len(&self) -> usize {
        self.papers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.papers.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PaperId, &PaperRecord)> {
        self.papers.iter()
    }

    pub fn insert(&mut self, record: PaperRecord) {
        self.papers.insert(record.id.clone(), record);
    }

    /// Resolves a [`PaperRef`], checking that the author index is in range.
    pub fn resolve<'a>(&'a self, r: &PaperRef) -> Result<(&'a PaperRecord, usize)> {
        let paper = self.require(&r.paper_id)?;
        if r.author_index >= paper.authors.len() {
            return Err(Error::AuthorIndexOutOfRange {
                paper: r.paper_id.clone(),
                index: r.author_index,
                len: paper.authors.len(),
            });
        }
        Ok((paper, r.author_index))
    }
}

/// Ground-truth authorships: normalized name → author id → paper ids.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct NameBlockSet {
    #[serde(flatten)]
    blocks: BTreeMap<NameKey, BTreeMap<AuthorId, Vec<PaperId>>>,
}

impl NameBlockSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn names(&self) -> impl Iterator<Item = &NameKey> {
        self.blocks.keys()
    }

    pub fn get(&self, name: &NameKey) -> Option<&BTreeMap<AuthorId, Vec<PaperId>>> {
        self.blocks.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&NameKey, &BTreeMap<AuthorId, Vec<PaperId>>)> {
        self.blocks.iter()
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Inserts an author's paper list, merging with any existing block.
    pub fn insert(&mut self, name: NameKey, author: AuthorId, papers: Vec<PaperId>) {
        self.blocks.entry(name).or_default().insert(author, papers);
    }

    /// Checks that within every name, author paper sets are pairwise
    /// disjoint.
    pub fn check_disjoint(&self) -> Result<()> {
        for (name, authors) in &self.blocks {
            let mut owner: BTreeMap<&str, &str> = BTreeMap::new();
            for (author, papers) in authors {
                for paper in papers {
                    if let Some(first) = owner.insert(paper, author) {
                        return Err(Error::DuplicatePaper {
                            name: name.to_string(),
                            paper: paper.clone(),
                            first: first.to_owned(),
                            second: author.clone(),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Drops paper ids that do not resolve in `store`, reporting each one.
    /// Authors and names emptied by the removal are dropped as well.
    pub fn drop_dangling(&mut self, store: &PaperStore) -> Vec<String> {
        let mut reports = Vec::new();
        self.blocks.retain(|name, authors| {
            authors.retain(|author, papers| {
                papers.retain(|p| {
                    let ok = store.contains(p);
                    if !ok {
                        reports.push(format!(
                            "dangling paper {p} under {name}/{author}: not in store"
                        ));
                    }
                    ok
                });
                !papers.is_empty()
            });
            !authors.is_empty()
        });
        reports
    }

    /// Flattens authorships away, yielding one sorted paper list per name.
    pub fn flatten(&self) -> SndEvalBlock {
        let mut blocks = BTreeMap::new();
        for (name, authors) in &self.blocks {
            let mut papers: Vec<PaperId> = authors.values().flatten().cloned().collect();
            papers.sort();
            blocks.insert(name.clone(), papers);
        }
        SndEvalBlock { blocks }
    }
}

/// Evaluation-side block: name → flat paper list with authorship stripped.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SndEvalBlock {
    #[serde(flatten)]
    blocks: BTreeMap<NameKey, Vec<PaperId>>,
}

impl SndEvalBlock {
    pub fn iter(&self) -> impl Iterator<Item = (&NameKey, &Vec<PaperId>)> {
        self.blocks.iter()
    }

    pub fn get(&self, name: &NameKey) -> Option<&Vec<PaperId>> {
        self.blocks.get(name)
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn insert(&mut self, name: NameKey, papers: Vec<PaperId>) {
        self.blocks.insert(name, papers);
    }
}

/// A paper occurrence: paper id plus the zero-based index of the author
/// being disambiguated. Serialized as `<id>-<index>`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PaperRef {
    pub paper_id: PaperId,
    pub author_index: usize,
}

impl PaperRef {
    pub fn new(paper_id: impl Into<PaperId>, author_index: usize) -> Self {
        PaperRef {
            paper_id: paper_id.into(),
            author_index,
        }
    }
}

impl fmt::Display for PaperRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.paper_id, self.author_index)
    }
}

impl FromStr for PaperRef {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_paper_ref(s)
    }
}

impl Serialize for PaperRef {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PaperRef {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse_paper_ref(&s).map_err(D::Error::custom)
    }
}

/// Parses `<id>-<index>` with the final hyphen as the separator.
pub fn parse_paper_ref(s: &str) -> Result<PaperRef> {
    let (id, idx) = s.rsplit_once('-').ok_or_else(|| Error::BadPaperRef(s.to_owned()))?;
    if id.is_empty() {
        return Err(Error::BadPaperRef(s.to_owned()));
    }
    let author_index: usize = idx.parse().map_err(|_| Error::BadPaperRef(s.to_owned()))?;
    Ok(PaperRef {
        paper_id: id.to_owned(),
        author_index,
    })
}

/// The verdict for one unassigned paper: an existing author or NIL.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum AuthorOrNil {
    Author(AuthorId),
    Nil,
}

impl AuthorOrNil {
    pub fn as_author(&self) -> Option<&str> {
        match self {
            AuthorOrNil::Author(a) => Some(a),
            AuthorOrNil::Nil => None,
        }
    }

    pub fn is_nil(&self) -> bool {
        matches!(self, AuthorOrNil::Nil)
    }
}

impl fmt::Display for AuthorOrNil {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AuthorOrNil::Author(a) => f.write_str(a),
            AuthorOrNil::Nil => f.write_str("NIL"),
        }
    }
}

impl Serialize for AuthorOrNil {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for AuthorOrNil {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Ok(if s == "NIL" {
            AuthorOrNil::Nil
        } else {
            AuthorOrNil::Author(s)
        })
    }
}

/// A real-time assignment split: retained profiles, held-out unassigned
/// papers, and the truth map used for training and scoring.
#[derive(Debug, Clone, Serialize)]
pub struct RndSplit {
    pub profiles: NameBlockSet,
    pub unassigned: Vec<PaperRef>,
    pub truth: BTreeMap<PaperRef, AuthorOrNil>,
}

/// One author profile of the incorrect-assignment task.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndAuthorRecord {
    pub author_id: AuthorId,
    pub name: String,
    pub normal: Vec<PaperId>,
    pub outliers: Vec<PaperId>,
}

/// Renders profile records back into the one-level file schema.
pub fn ind_to_json(records: &[IndAuthorRecord]) -> Value {
    let mut root = Map::new();
    for r in records {
        let mut entry = Map::new();
        entry.insert("name".into(), Value::String(r.name.clone()));
        entry.insert(
            "normal_data".into(),
            Value::Array(r.normal.iter().cloned().map(Value::String).collect()),
        );
        entry.insert(
            "outliers".into(),
            Value::Array(r.outliers.iter().cloned().map(Value::String).collect()),
        );
        root.insert(r.author_id.clone(), Value::Object(entry));
    }
    Value::Object(root)
}

fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    serde_json::from_str(&text).map_err(|e| Error::Json {
        path: path.display().to_string(),
        source: e,
    })
}

fn as_object<'v>(v: &'v Value, at: &str) -> Result<&'v Map<String, Value>> {
    v.as_object()
        .ok_or_else(|| Error::schema(at, "expected a JSON object"))
}

fn as_array<'v>(v: &'v Value, at: &str) -> Result<&'v Vec<Value>> {
    v.as_array()
        .ok_or_else(|| Error::schema(at, "expected a JSON array"))
}

fn as_string(v: &Value, at: &str) -> Result<String> {
    v.as_str()
        .map(str::to_owned)
        .ok_or_else(|| Error::schema(at, "expected a JSON string"))
}

fn string_list(v: &Value, at: &str) -> Result<Vec<String>> {
    let arr = as_array(v, at)?;
    let mut out = Vec::with_capacity(arr.len());
    for (i, item) in arr.iter().enumerate() {
        out.push(as_string(item, &format!("{at}[{i}]"))?);
    }
    Ok(out)
}

/// Loads the two-level name → author → papers assignment file.
///
/// Name keys are normalized; the per-name disjointness invariant is
/// verified. Raw names that normalize to the same key are merged.
pub fn load_assignments(path: &Path) -> Result<NameBlockSet> {
    let root = read_json(path)?;
    let obj = as_object(&root, "$")?;
    let mut set = NameBlockSet::new();
    for (raw_name, authors_val) in obj {
        let name = normalize_name(raw_name)
            .map_err(|_| Error::schema(raw_name, "name has no alphabetic content"))?;
        let authors = as_object(authors_val, raw_name)?;
        for (author_id, papers_val) in authors {
            let at = format!("{raw_name}.{author_id}");
            let papers = string_list(papers_val, &at)?;
            if papers.is_empty() {
                return Err(Error::schema(&at, "author paper list is empty"));
            }
            if set
                .blocks
                .get(&name)
                .is_some_and(|m| m.contains_key(author_id))
            {
                return Err(Error::schema(
                    &at,
                    "author id appears under two raw spellings of the same name",
                ));
            }
            set.insert(name.clone(), author_id.clone(), papers);
        }
    }
    set.check_disjoint()?;
    Ok(set)
}

/// Loads the flat name → papers evaluation file.
pub fn load_snd_eval(path: &Path) -> Result<SndEvalBlock> {
    let root = read_json(path)?;
    let obj = as_object(&root, "$")?;
    let mut out = SndEvalBlock::default();
    for (raw_name, papers_val) in obj {
        let name = normalize_name(raw_name)
            .map_err(|_| Error::schema(raw_name, "name has no alphabetic content"))?;
        out.insert(name, string_list(papers_val, raw_name)?);
    }
    Ok(out)
}

fn parse_year(v: Option<&Value>, at: &str) -> Result<i32> {
    match v {
        None | Some(Value::Null) => Ok(0),
        Some(Value::Number(n)) => n
            .as_i64()
            .map(|y| y as i32)
            .ok_or_else(|| Error::schema(at, "year is not an integer")),
        Some(Value::String(s)) if s.trim().is_empty() => Ok(0),
        Some(Value::String(s)) => s
            .trim()
            .parse::<i32>()
            .map_err(|_| Error::schema(at, "year string is not an integer")),
        Some(_) => Err(Error::schema(at, "year is not an integer")),
    }
}

fn is_null_sentinel(s: &str) -> bool {
    s.trim().eq_ignore_ascii_case("null")
}

/// Loads the paper-id → record store.
///
/// The `["null"]` keyword sentinel becomes an empty list, a `"null"` org
/// becomes an empty string, and a missing year becomes 0.
pub fn load_papers(path: &Path) -> Result<PaperStore> {
    let root = read_json(path)?;
    let obj = as_object(&root, "$")?;
    let mut store = PaperStore::default();
    for (key, rec_val) in obj {
        let rec = as_object(rec_val, key)?;
        if let Some(embedded) = rec.get("id") {
            let id = as_string(embedded, &format!("{key}.id"))?;
            if id != *key {
                return Err(Error::schema(
                    format!("{key}.id"),
                    format!("embedded id {id:?} does not match map key"),
                ));
            }
        }
        let title = match rec.get("title") {
            Some(Value::Null) | None => String::new(),
            Some(v) => as_string(v, &format!("{key}.title"))?,
        };
        let abstract_text = match rec.get("abstract") {
            Some(Value::Null) | None => String::new(),
            Some(v) => as_string(v, &format!("{key}.abstract"))?,
        };
        let venue = match rec.get("venue") {
            Some(Value::Null) | None => String::new(),
            Some(v) => as_string(v, &format!("{key}.venue"))?,
        };
        let keywords = match rec.get("keywords") {
            Some(Value::Null) | None => Vec::new(),
            Some(v) => {
                let list = string_list(v, &format!("{key}.keywords"))?;
                if list.len() == 1 && is_null_sentinel(&list[0]) {
                    Vec::new()
                } else {
                    list
                }
            }
        };
        let mut authors = Vec::new();
        if let Some(v) = rec.get("authors") {
            let arr = as_array(v, &format!("{key}.authors"))?;
            for (i, entry) in arr.iter().enumerate() {
                let at = format!("{key}.authors[{i}]");
                let entry = as_object(entry, &at)?;
                let name = match entry.get("name") {
                    Some(v) => as_string(v, &format!("{at}.name"))?,
                    None => String::new(),
                };
                if name.trim().is_empty() {
                    return Err(Error::schema(format!("{at}.name"), "author name is empty"));
                }
                let org = match entry.get("org") {
                    Some(Value::Null) | None => String::new(),
                    Some(v) => {
                        let s = as_string(v, &format!("{at}.org"))?;
                        if is_null_sentinel(&s) {
                            String::new()
                        } else {
                            s
                        }
                    }
                };
                authors.push(PaperAuthor { name, org });
            }
        }
        let year = parse_year(rec.get("year"), &format!("{key}.year"))?;
        store.insert(PaperRecord {
            id: key.clone(),
            title,
            abstract_text,
            keywords,
            authors,
            venue,
            year,
        });
    }
    Ok(store)
}

/// Loads the one-level author-id → {name, normal_data, outliers} file.
pub fn load_ind(path: &Path) -> Result<Vec<IndAuthorRecord>> {
    let root = read_json(path)?;
    let obj = as_object(&root, "$")?;
    let mut out = Vec::with_capacity(obj.len());
    for (author_id, rec_val) in obj {
        let rec = as_object(rec_val, author_id)?;
        let name = match rec.get("name") {
            Some(v) => as_string(v, &format!("{author_id}.name"))?,
            None => String::new(),
        };
        let normal = match rec.get("normal_data") {
            Some(v) => string_list(v, &format!("{author_id}.normal_data"))?,
            None => Vec::new(),
        };
        if normal.is_empty() {
            return Err(Error::schema(
                format!("{author_id}.normal_data"),
                "normal paper list is missing or empty",
            ));
        }
        let outliers = match rec.get("outliers") {
            Some(Value::Null) | None => Vec::new(),
            Some(v) => string_list(v, &format!("{author_id}.outliers"))?,
        };
        let normal_set: BTreeSet<&String> = normal.iter().collect();
        if let Some(dup) = outliers.iter().find(|p| normal_set.contains(p)) {
            return Err(Error::schema(
                format!("{author_id}.outliers"),
                format!("paper {dup} appears in both normal_data and outliers"),
            ));
        }
        out.push(IndAuthorRecord {
            author_id: author_id.clone(),
            name,
            normal,
            outliers,
        });
    }
    Ok(out)
}

/// A from-scratch split: train keeps authorships, valid and test expose
/// flattened paper lists with the truth held back for scoring.
#[derive(Debug, Clone)]
pub struct SndSplit {
    pub train: NameBlockSet,
    pub valid: SndEvalSplit,
    pub test: SndEvalSplit,
}

#[derive(Debug, Clone)]
pub struct SndEvalSplit {
    pub papers: SndEvalBlock,
    pub truth: NameBlockSet,
}

fn partition_counts(n: usize, ratios: (f64, f64, f64)) -> Vec<usize> {
    let ratios = [ratios.0, ratios.1, ratios.2];
    let mut counts: Vec<usize> = ratios.iter().map(|r| (r * n as f64).floor() as usize).collect();
    let mut rem = n - counts.iter().sum::<usize>();
    // Largest fractional part first; ties resolved by partition order.
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&a, &b| {
        let fa = ratios[a] * n as f64 - counts[a] as f64;
        let fb = ratios[b] * n as f64 - counts[b] as f64;
        fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
    });
    for i in order {
        if rem == 0 {
            break;
        }
        if ratios[i] > 0.0 {
            counts[i] += 1;
            rem -= 1;
        }
    }
    counts
}

/// Splits a block set into train/valid/test by whole name.
///
/// Deterministic for a fixed seed: names are sorted, shuffled with a seeded
/// generator, and partitioned by the given ratios.
pub fn split_snd(
    blocks: &NameBlockSet,
    ratios: (f64, f64, f64),
    seed: u64,
) -> Result<SndSplit> {
    let (tr, va, te) = ratios;
    if tr < 0.0 || va < 0.0 || te < 0.0 || (tr + va + te - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidConfig(format!(
            "split ratios must be non-negative and sum to 1, got ({tr}, {va}, {te})"
        )));
    }
    let positive = [tr, va, te].iter().filter(|r| **r > 0.0).count();
    if blocks.len() < positive {
        return Err(Error::InvalidConfig(format!(
            "{} names cannot fill {} partitions",
            blocks.len(),
            positive
        )));
    }
    let mut names: Vec<&NameKey> = blocks.names().collect();
    names.sort();
    let mut rng = seeding::rng_for(seed, "split_snd");
    names.shuffle(&mut rng);
    let counts = partition_counts(names.len(), ratios);

    let mut parts: Vec<NameBlockSet> = vec![NameBlockSet::new(); 3];
    let mut offset = 0usize;
    for (part, count) in parts.iter_mut().zip(&counts) {
        for name in &names[offset..offset + count] {
            for (author, papers) in blocks.get(name).unwrap() {
                part.insert((*name).clone(), author.clone(), papers.clone());
            }
        }
        offset += count;
    }
    let test_truth = parts.pop().unwrap();
    let valid_truth = parts.pop().unwrap();
    let train = parts.pop().unwrap();
    Ok(SndSplit {
        train,
        valid: SndEvalSplit {
            papers: valid_truth.flatten(),
            truth: valid_truth,
        },
        test: SndEvalSplit {
            papers: test_truth.flatten(),
            truth: test_truth,
        },
    })
}

/// Per-author count of held-out latest papers: ⌈ratio·n⌉ capped so the
/// profile keeps at least one paper; single-paper authors stay intact.
fn unassigned_count(n: usize, ratio: f64) -> usize {
    if n <= 1 {
        return 0;
    }
    let k = (ratio * n as f64).ceil() as usize;
    k.min(n - 1)
}

/// Splits profiles into retained papers and latest-paper plus held-out-author
/// unassigned sets for the real-time task.
///
/// Within each author, papers are ordered by ascending year with ties (and
/// missing years) broken by paper id; the latest ⌈ratio·n⌉ become
/// unassigned. Additionally, a `nil_fraction` share of each name's authors
/// is removed wholly; their papers join the unassigned set with NIL truth.
/// Returns the split plus warnings about papers that were skipped or sorted
/// without year information.
pub fn split_rnd(
    blocks: &NameBlockSet,
    papers: &PaperStore,
    ratio: f64,
    nil_fraction: f64,
    seed: u64,
) -> Result<(RndSplit, Vec<String>)> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "rnd split ratio must lie in (0, 1), got {ratio}"
        )));
    }
    if !(0.0..=1.0).contains(&nil_fraction) {
        return Err(Error::InvalidConfig(format!(
            "nil_fraction must lie in [0, 1], got {nil_fraction}"
        )));
    }
    let mut warnings = Vec::new();
    let mut profiles = NameBlockSet::new();
    let mut unassigned = Vec::new();
    let mut truth = BTreeMap::new();

    for (name, authors) in blocks.iter() {
        let author_ids: Vec<&AuthorId> = authors.keys().collect();
        let nil_count = if nil_fraction > 0.0 && author_ids.len() >= 2 {
            ((nil_fraction * author_ids.len() as f64).round() as usize)
                .clamp(1, author_ids.len() - 1)
        } else {
            0
        };
        let mut rng = seeding::rng_for(seed, name.as_str());
        let mut shuffled = author_ids.clone();
        shuffled.shuffle(&mut rng);
        let held_out: BTreeSet<&AuthorId> = shuffled.into_iter().take(nil_count).collect();

        for (author, paper_ids) in authors {
            let mut resolved: Vec<(&PaperId, i32, usize)> = Vec::new();
            for pid in paper_ids {
                let Some(record) = papers.get(pid) else {
                    warnings.push(format!("dangling paper {pid} under {name}/{author}: dropped"));
                    continue;
                };
                let Some(idx) = record.author_index_for(name) else {
                    warnings.push(format!(
                        "paper {pid} under {name}/{author} lists no matching author: dropped"
                    ));
                    continue;
                };
                resolved.push((pid, record.year, idx));
            }
            if resolved.is_empty() {
                continue;
            }
            if held_out.contains(author) {
                for (pid, _, idx) in resolved {
                    let r = PaperRef::new(pid.clone(), idx);
                    truth.insert(r.clone(), AuthorOrNil::Nil);
                    unassigned.push(r);
                }
                continue;
            }
            if resolved.len() > 1 && resolved.iter().all(|(_, y, _)| *y == 0) {
                warnings.push(format!(
                    "author {author} of {name}: all papers lack years; falling back to id order"
                ));
            }
            resolved.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(b.0)));
            let k = unassigned_count(resolved.len(), ratio);
            let keep = resolved.len() - k;
            let retained: Vec<PaperId> = resolved[..keep].iter().map(|(p, _, _)| (*p).clone()).collect();
            profiles.insert(name.clone(), author.clone(), retained);
            for (pid, _, idx) in &resolved[keep..] {
                let r = PaperRef::new((*pid).clone(), *idx);
                truth.insert(r.clone(), AuthorOrNil::Author(author.clone()));
                unassigned.push(r);
            }
        }
    }
    unassigned.sort();
    Ok((
        RndSplit {
            profiles,
            unassigned,
            truth,
        },
        warnings,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    const ASSIGNMENTS: &str = r#"{
        "guanhua_du": {
            "zsOOUZxZ": ["QDMcmF8V", "9PgiwDo7"]
        },
        "bin_yu": {
            "HoH18DsE": ["VMYs96sn", "YT4XzThC", "S3RARClD", "wM8dXlKT"],
            "WYZVZfO0": ["OTvYjfnt", "EzzruFin"],
            "9BMlVP0u": ["brlzUqnH", "HWAfXDPx", "RZPhHOMm", "vebukM2n"]
        }
    }"#;

    const PAPER: &str = r#"{
        "9PgiwDo7": {
            "id": "9PgiwDo7",
            "title": "Constrained phase transformation of prestrained TiNi fibers embedded in metal matrix smart composite",
            "abstract": "The reverse martensitic transformation of TiNi fibers has been studied.",
            "keywords": ["null"],
            "authors": [
                {"name": "Yanjun Zheng", "org": "Dalian University of Technology,Dalian,China"},
                {"name": "Lishan Cui", "org": "China University of Petroleum - Beijing,Beijing,China"},
                {"name": "Dan Zhu", "org": "China University of Petroleum - Beijing,Beijing,China"},
                {"name": "Dazhi Yang", "org": "Dalian University of Technology,Dalian,China"}
            ],
            "venue": "Materials Letters",
            "year": 2000
        }
    }"#;

    #[test]
    fn load_assignments_two_level_fixture() {
        let f = write_temp(ASSIGNMENTS);
        let set = load_assignments(f.path()).unwrap();
        assert_eq!(set.len(), 2);
        let bin_yu = set.get(&normalize_name("bin_yu").unwrap()).unwrap();
        assert_eq!(bin_yu.len(), 3);
        let sizes: Vec<usize> = bin_yu.values().map(|v| v.len()).collect();
        let mut sorted = sizes.clone();
        sorted.sort();
        assert_eq!(sorted, vec![2, 4, 4]);
    }

    #[test]
    fn load_assignments_empty_object() {
        let f = write_temp("{}");
        assert!(load_assignments(f.path()).unwrap().is_empty());
    }

    #[test]
    fn load_assignments_detects_duplicate_paper() {
        let f = write_temp(r#"{"bin_yu": {"a1": ["p1", "p2"], "a2": ["p1"]}}"#);
        match load_assignments(f.path()) {
            Err(Error::DuplicatePaper { name, paper, .. }) => {
                assert_eq!(name, "bin_yu");
                assert_eq!(paper, "p1");
            }
            other => panic!("expected duplicate-paper error, got {other:?}"),
        }
    }

    #[test]
    fn load_papers_fixture() {
        let f = write_temp(PAPER);
        let store = load_papers(f.path()).unwrap();
        let p = store.get("9PgiwDo7").unwrap();
        assert_eq!(p.authors.len(), 4);
        assert_eq!(p.venue, "Materials Letters");
        assert_eq!(p.year, 2000);
        assert!(p.keywords.is_empty(), "null sentinel should clear keywords");
    }

    #[test]
    fn load_papers_defaults_missing_year() {
        let f = write_temp(r#"{"p1": {"id": "p1", "title": "t"}}"#);
        let store = load_papers(f.path()).unwrap();
        assert_eq!(store.get("p1").unwrap().year, 0);
    }

    #[test]
    fn load_papers_rejects_id_mismatch() {
        let f = write_temp(r#"{"p1": {"id": "px", "title": "t"}}"#);
        match load_papers(f.path()) {
            Err(Error::Schema { at, .. }) => assert_eq!(at, "p1.id"),
            other => panic!("expected schema error, got {other:?}"),
        }
    }

    #[test]
    fn load_ind_fixture() {
        let f = write_temp(
            r#"{"HoH18DsE": {
                "name": "bin_yu",
                "normal_data": ["VMYs96sn", "YT4XzThC", "S3RARClD", "wM8dXlKT"],
                "outliers": ["OTvYjfnt", "EzzruFin"]
            }}"#,
        );
        let recs = load_ind(f.path()).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].author_id, "HoH18DsE");
        assert_eq!(recs[0].normal.len(), 4);
        assert_eq!(recs[0].outliers.len(), 2);
    }

    #[test]
    fn load_ind_defaults_missing_outliers() {
        let f = write_temp(r#"{"a": {"name": "x y", "normal_data": ["p1"]}}"#);
        let recs = load_ind(f.path()).unwrap();
        assert!(recs[0].outliers.is_empty());
    }

    #[test]
    fn load_ind_rejects_overlap() {
        let f = write_temp(r#"{"a": {"name": "x y", "normal_data": ["p1"], "outliers": ["p1"]}}"#);
        assert!(matches!(load_ind(f.path()), Err(Error::Schema { .. })));
    }

    fn ten_name_blocks() -> NameBlockSet {
        let mut set = NameBlockSet::new();
        for i in 0..10 {
            let name = normalize_name(&format!("n{} smith", ["a", "b", "c", "d", "e", "f", "g", "h", "i", "j"][i])).unwrap();
            set.insert(name, format!("a{i}"), vec![format!("p{i}x"), format!("p{i}y")]);
        }
        set
    }

    #[test]
    fn split_snd_counts_and_determinism() {
        let blocks = ten_name_blocks();
        let s1 = split_snd(&blocks, (0.8, 0.1, 0.1), 7).unwrap();
        assert_eq!(s1.train.len(), 8);
        assert_eq!(s1.valid.truth.len(), 1);
        assert_eq!(s1.test.truth.len(), 1);
        let s2 = split_snd(&blocks, (0.8, 0.1, 0.1), 7).unwrap();
        assert_eq!(s1.train, s2.train);
        assert_eq!(s1.valid.truth, s2.valid.truth);
        assert_eq!(s1.test.truth, s2.test.truth);
    }

    #[test]
    fn split_snd_flattens_eval_names() {
        let mut blocks = NameBlockSet::new();
        let name = normalize_name("bin yu").unwrap();
        blocks.insert(name.clone(), "a1".into(), (0..4).map(|i| format!("p{i}")).collect());
        blocks.insert(name.clone(), "a2".into(), (4..10).map(|i| format!("p{i}")).collect());
        let split = split_snd(&blocks, (0.0, 0.0, 1.0), 1).unwrap();
        let flat = split.test.papers.get(&name).unwrap();
        assert_eq!(flat.len(), 10);
    }

    #[test]
    fn split_snd_degenerate_all_train() {
        let blocks = ten_name_blocks();
        let split = split_snd(&blocks, (1.0, 0.0, 0.0), 3).unwrap();
        assert_eq!(split.train.len(), 10);
        assert!(split.valid.papers.is_empty());
        assert!(split.test.papers.is_empty());
    }

    #[test]
    fn split_snd_too_few_names() {
        let mut blocks = NameBlockSet::new();
        blocks.insert(normalize_name("solo name").unwrap(), "a".into(), vec!["p".into()]);
        assert!(split_snd(&blocks, (0.5, 0.25, 0.25), 0).is_err());
    }

    fn rnd_fixture() -> (NameBlockSet, PaperStore) {
        let mut store = PaperStore::default();
        let mut blocks = NameBlockSet::new();
        let years = [1998, 2005, 2010];
        let mut ids = Vec::new();
        for (i, year) in years.iter().enumerate() {
            let id = format!("q{i}");
            store.insert(PaperRecord {
                id: id.clone(),
                title: format!("work {i}"),
                abstract_text: String::new(),
                keywords: vec![],
                authors: vec![
                    PaperAuthor { name: "Other Person".into(), org: String::new() },
                    PaperAuthor { name: "Wei Chen".into(), org: String::new() },
                ],
                venue: String::new(),
                year: *year,
            });
            ids.push(id);
        }
        blocks.insert(normalize_name("wei chen").unwrap(), "auth1".into(), ids);
        (blocks, store)
    }

    #[test]
    fn split_rnd_ceiling_takes_latest_two() {
        let (blocks, store) = rnd_fixture();
        let (split, _) = split_rnd(&blocks, &store, 0.34, 0.0, 0).unwrap();
        // ceil(0.34 * 3) = 2: the 2005 and 2010 papers become unassigned.
        let unassigned: Vec<String> = split.unassigned.iter().map(|r| r.paper_id.clone()).collect();
        assert_eq!(unassigned, vec!["q1".to_string(), "q2".to_string()]);
        let profile = split.profiles.get(&normalize_name("wei chen").unwrap()).unwrap();
        assert_eq!(profile["auth1"], vec!["q0".to_string()]);
        // The block name is the second author of each paper.
        assert!(split.unassigned.iter().all(|r| r.author_index == 1));
    }

    #[test]
    fn split_rnd_no_nil_when_disabled() {
        let (blocks, store) = rnd_fixture();
        let (split, _) = split_rnd(&blocks, &store, 0.34, 0.0, 0).unwrap();
        assert!(split.truth.values().all(|t| !t.is_nil()));
    }

    #[test]
    fn split_rnd_holds_out_whole_authors() {
        let (mut blocks, mut store) = rnd_fixture();
        for i in 0..3 {
            store.insert(PaperRecord {
                id: format!("r{i}"),
                title: format!("other {i}"),
                abstract_text: String::new(),
                keywords: vec![],
                authors: vec![PaperAuthor { name: "Wei Chen".into(), org: String::new() }],
                venue: String::new(),
                year: 2001 + i,
            });
        }
        blocks.insert(
            normalize_name("wei chen").unwrap(),
            "auth2".into(),
            (0..3).map(|j| format!("r{j}")).collect(),
        );
        let (split, _) = split_rnd(&blocks, &store, 0.2, 0.5, 11).unwrap();
        let nil_papers: Vec<&PaperRef> = split.truth.iter().filter(|(_, t)| t.is_nil()).map(|(r, _)| r).collect();
        assert_eq!(nil_papers.len(), 3, "one of two authors held out wholly");
        // Held-out author absent from profiles.
        let profile = split.profiles.get(&normalize_name("wei chen").unwrap()).unwrap();
        assert_eq!(profile.len(), 1);
    }

    #[test]
    fn split_rnd_profile_and_unassigned_disjoint() {
        let (blocks, store) = rnd_fixture();
        let (split, _) = split_rnd(&blocks, &store, 0.5, 0.0, 0).unwrap();
        for r in &split.unassigned {
            for (_, authors) in split.profiles.iter() {
                for papers in authors.values() {
                    assert!(!papers.contains(&r.paper_id));
                }
            }
        }
        assert!(split.truth.keys().all(|r| split.unassigned.contains(r)));
    }

    #[test]
    fn parse_paper_ref_fixtures() {
        let r = parse_paper_ref("vebukM2n-1").unwrap();
        assert_eq!(r.paper_id, "vebukM2n");
        assert_eq!(r.author_index, 1);
        let r = parse_paper_ref("a-b-0").unwrap();
        assert_eq!(r.paper_id, "a-b");
        assert_eq!(r.author_index, 0);
        assert!(parse_paper_ref("xyz").is_err());
        assert_eq!(parse_paper_ref("a-b-0").unwrap().to_string(), "a-b-0");
    }

    #[test]
    fn drop_dangling_reports_and_removes() {
        let (mut blocks, store) = rnd_fixture();
        blocks.insert(normalize_name("wei chen").unwrap(), "auth9".into(), vec!["ghost".into()]);
        let reports = blocks.drop_dangling(&store);
        assert_eq!(reports.len(), 1);
        assert!(reports[0].contains("ghost"));
        let block = blocks.get(&normalize_name("wei chen").unwrap()).unwrap();
        assert!(!block.contains_key("auth9"));
    }

    #[test]
    fn assignments_round_trip() {
        let f = write_temp(ASSIGNMENTS);
        let set = load_assignments(f.path()).unwrap();
        let json = serde_json::to_string_pretty(&set).unwrap();
        let f2 = write_temp(&json);
        let set2 = load_assignments(f2.path()).unwrap();
        assert_eq!(set, set2);
    }

    #[test]
    fn papers_round_trip() {
        let f = write_temp(PAPER);
        let store = load_papers(f.path()).unwrap();
        let json = serde_json::to_string_pretty(&store).unwrap();
        let f2 = write_temp(&json);
        let store2 = load_papers(f2.path()).unwrap();
        assert_eq!(store, store2);
    }

    #[test]
    fn ind_round_trip() {
        let f = write_temp(
            r#"{"HoH18DsE": {
                "name": "bin_yu",
                "normal_data": ["VMYs96sn", "YT4XzThC"],
                "outliers": ["OTvYjfnt"]
            }}"#,
        );
        let records = load_ind(f.path()).unwrap();
        let json = serde_json::to_string_pretty(&ind_to_json(&records)).unwrap();
        let f2 = write_temp(&json);
        let records2 = load_ind(f2.path()).unwrap();
        assert_eq!(records, records2);
    }
}
