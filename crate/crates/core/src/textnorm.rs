//! Name normalization, tokenization, string-set similarities, and TF-IDF.
//!
//! Everything in this module is pure and allocation-light; it is the
//! primitive layer under blocking, graph construction, and every
//! hand-crafted feature.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A normalized person name: lowercase alphabetic parts in source order
/// (given names first, surname last), joined with underscores in the
/// canonical form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NameKey {
    canonical: String,
}

impl NameKey {
    /// Builds a key from already-normalized parts. Empty parts are dropped.
    pub fn from_parts<I, S>(parts: I) -> Option<NameKey>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let parts: Vec<String> = parts
            .into_iter()
            .map(|p| p.as_ref().to_owned())
            .filter(|p| !p.is_empty())
            .collect();
        if parts.is_empty() {
            return None;
        }
        Some(NameKey {
            canonical: parts.join("_"),
        })
    }

    pub fn parts(&self) -> Vec<&str> {
        self.canonical.split('_').collect()
    }

    pub fn as_str(&self) -> &str {
        &self.canonical
    }
}

impl fmt::Display for NameKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical)
    }
}

/// Folds common Latin diacritics to their ASCII base letter.
fn fold_char(c: char) -> Option<char> {
    if c.is_ascii_alphabetic() {
        return Some(c.to_ascii_lowercase());
    }
    let folded = match c {
        'à' | 'á' | 'â' | 'ã' | 'ä' | 'å' | 'ā' | 'ă' | 'ą' => 'a',
        'ç' | 'ć' | 'ĉ' | 'ċ' | 'č' => 'c',
        'ď' | 'đ' => 'd',
        'è' | 'é' | 'ê' | 'ë' | 'ē' | 'ĕ' | 'ė' | 'ę' | 'ě' => 'e',
        'ĝ' | 'ğ' | 'ġ' | 'ģ' => 'g',
        'ĥ' | 'ħ' => 'h',
        'ì' | 'í' | 'î' | 'ï' | 'ĩ' | 'ī' | 'ĭ' | 'į' | 'ı' => 'i',
        'ĵ' => 'j',
        'ķ' => 'k',
        'ĺ' | 'ļ' | 'ľ' | 'ł' => 'l',
        'ñ' | 'ń' | 'ņ' | 'ň' => 'n',
        'ò' | 'ó' | 'ô' | 'õ' | 'ö' | 'ø' | 'ō' | 'ŏ' | 'ő' => 'o',
        'ŕ' | 'ŗ' | 'ř' => 'r',
        'ś' | 'ŝ' | 'ş' | 'š' | 'ș' => 's',
        'ţ' | 'ť' | 'ŧ' | 'ț' => 't',
        'ù' | 'ú' | 'û' | 'ü' | 'ũ' | 'ū' | 'ŭ' | 'ů' | 'ű' | 'ų' => 'u',
        'ŵ' => 'w',
        'ý' | 'ÿ' | 'ŷ' => 'y',
        'ź' | 'ż' | 'ž' => 'z',
        'ß' => 's',
        _ => {
            let lower: Vec<char> = c.to_lowercase().collect();
            if lower.len() == 1 && lower[0] != c {
                return fold_char(lower[0]);
            }
            return None;
        }
    };
    Some(folded)
}

/// Normalizes a raw person name into a [`NameKey`].
///
/// Lowercases, folds diacritics to ASCII, treats punctuation and any other
/// non-alphabetic character as a separator, and collapses runs of
/// separators. Errors when nothing alphabetic is left.
pub fn normalize_name(raw: &str) -> Result<NameKey> {
    let mut parts: Vec<String> = Vec::new();
    let mut current = String::new();
    for c in raw.chars() {
        match fold_char(c) {
            Some(f) => current.push(f),
            None => {
                if !current.is_empty() {
                    parts.push(std::mem::take(&mut current));
                }
            }
        }
    }
    if !current.is_empty() {
        parts.push(current);
    }
    if parts.is_empty() {
        return Err(Error::EmptyName(raw.to_owned()));
    }
    Ok(NameKey {
        canonical: parts.join("_"),
    })
}

fn rotate_last_to_front(parts: &[&str]) -> Vec<String> {
    let mut out = Vec::with_capacity(parts.len());
    out.push(parts[parts.len() - 1].to_owned());
    out.extend(parts[..parts.len() - 1].iter().map(|p| (*p).to_owned()));
    out
}

/// All but the last part reduced to initials, last part kept full.
fn initials_but_last(parts: &[String]) -> String {
    let mut out: Vec<String> = Vec::with_capacity(parts.len());
    for (i, p) in parts.iter().enumerate() {
        if i + 1 == parts.len() {
            out.push(p.clone());
        } else {
            out.push(p.chars().take(1).collect());
        }
    }
    out.join("_")
}

/// The blocking variants of a name: the key itself, the rotation moving the
/// surname to the front, and the initials form of both orders (all given
/// parts reduced to initials, the final part kept full).
pub fn name_variants(key: &NameKey) -> BTreeSet<NameKey> {
    let parts = key.parts();
    let mut set = BTreeSet::new();
    set.insert(key.clone());
    if parts.len() < 2 {
        return set;
    }
    let original: Vec<String> = parts.iter().map(|p| (*p).to_owned()).collect();
    let rotated = rotate_last_to_front(&parts);
    set.insert(NameKey {
        canonical: rotated.join("_"),
    });
    set.insert(NameKey {
        canonical: initials_but_last(&original),
    });
    set.insert(NameKey {
        canonical: initials_but_last(&rotated),
    });
    set
}

/// Whether two normalized names refer to the same blocked name.
///
/// One name must be a variant of the other. Intersecting the two variant
/// sets would be too loose: the initials form of the rotated order collides
/// across distinct surnames sharing an initial (both "jing zhang" and
/// "jing zhao" produce "z_jing").
pub fn same_name(a: &NameKey, b: &NameKey) -> bool {
    if a == b {
        return true;
    }
    name_variants(a).contains(b) || name_variants(b).contains(a)
}

/// A set of tokens removed by [`tokenize`].
#[derive(Debug, Clone)]
pub struct Stoplist {
    words: HashSet<String>,
}

const BUILTIN_STOPWORDS: &[&str] = &[
    "a", "an", "the", "of", "in", "on", "at", "for", "to", "with", "by", "from", "and", "or",
    "nor", "not", "is", "are", "was", "were", "be", "been", "being", "as", "this", "that",
    "these", "those", "it", "its", "we", "our", "us", "you", "your", "he", "she", "his", "her",
    "they", "them", "their", "but", "if", "then", "than", "so", "such", "can", "could", "will",
    "would", "may", "might", "shall", "should", "do", "does", "did", "have", "has", "had",
    "about", "into", "over", "under", "between", "during", "before", "after", "above", "below",
    "up", "down", "out", "off", "again", "further", "once", "here", "there", "when", "where",
    "why", "how", "all", "any", "both", "each", "few", "more", "most", "other", "some", "no",
    "only", "own", "same", "too", "very", "via", "using", "based", "also",
];

impl Default for Stoplist {
    fn default() -> Self {
        Stoplist {
            words: BUILTIN_STOPWORDS.iter().map(|w| (*w).to_owned()).collect(),
        }
    }
}

impl Stoplist {
    pub fn empty() -> Self {
        Stoplist {
            words: HashSet::new(),
        }
    }

    pub fn from_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Stoplist {
            words: words
                .into_iter()
                .map(|w| w.as_ref().to_lowercase())
                .collect(),
        }
    }

    /// Loads a one-token-per-line stoplist file. Blank lines are skipped.
    pub fn from_file(path: &str) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::from_words(
            text.lines().map(str::trim).filter(|l| !l.is_empty()),
        ))
    }

    pub fn contains(&self, token: &str) -> bool {
        self.words.contains(token)
    }
}

/// Lowercase alphanumeric tokens of `text`, with stoplisted tokens and
/// tokens shorter than two characters removed.
pub fn tokenize(text: &str, stoplist: &Stoplist) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for c in text.chars() {
        if c.is_alphanumeric() {
            for lc in c.to_lowercase() {
                current.push(lc);
            }
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
        .into_iter()
        .filter(|t| t.chars().count() >= 2 && !stoplist.contains(t))
        .collect()
}

/// Jaccard similarity |a∩b| / |a∪b|; 0 when both sets are empty.
pub fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    inter as f64 / union as f64
}

/// Set-form Tanimoto coefficient |a∩b| / (|a| + |b| − |a∩b|); 0 when both
/// sets are empty.
pub fn tanimoto<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    let inter = a.intersection(b).count();
    inter as f64 / (a.len() + b.len() - inter) as f64
}

fn jaro(s1: &[char], s2: &[char]) -> f64 {
    if s1.is_empty() && s2.is_empty() {
        return 1.0;
    }
    if s1.is_empty() || s2.is_empty() {
        return 0.0;
    }
    let window = (s1.len().max(s2.len()) / 2).saturating_sub(1);
    let mut matched1 = vec![false; s1.len()];
    let mut matched2 = vec![false; s2.len()];
    let mut matches = 0usize;
    for (i, c1) in s1.iter().enumerate() {
        let lo = i.saturating_sub(window);
        let hi = (i + window + 1).min(s2.len());
        for j in lo..hi {
            if !matched2[j] && s2[j] == *c1 {
                matched1[i] = true;
                matched2[j] = true;
                matches += 1;
                break;
            }
        }
    }
    if matches == 0 {
        return 0.0;
    }
    let m1: Vec<char> = s1
        .iter()
        .zip(&matched1)
        .filter(|(_, m)| **m)
        .map(|(c, _)| *c)
        .collect();
    let m2: Vec<char> = s2
        .iter()
        .zip(&matched2)
        .filter(|(_, m)| **m)
        .map(|(c, _)| *c)
        .collect();
    let transposed = m1.iter().zip(&m2).filter(|(a, b)| *a != *b).count();
    let t = transposed as f64 / 2.0;
    let m = matches as f64;
    (m / s1.len() as f64 + m / s2.len() as f64 + (m - t) / m) / 3.0
}

/// Jaro–Winkler similarity with match window ⌊max(|s1|,|s2|)/2⌋−1, prefix
/// scale 0.1, and prefix length capped at 4. Empty vs non-empty is 0, two
/// empty strings are 1.
pub fn jaro_winkler(s1: &str, s2: &str) -> f64 {
    let c1: Vec<char> = s1.chars().collect();
    let c2: Vec<char> = s2.chars().collect();
    let jaro_sim = jaro(&c1, &c2);
    let prefix = c1
        .iter()
        .zip(&c2)
        .take(4)
        .take_while(|(a, b)| *a == *b)
        .count();
    jaro_sim + prefix as f64 * 0.1 * (1.0 - jaro_sim)
}

/// Document-frequency table over a tokenized corpus.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct IdfTable {
    pub doc_count: usize,
    df: BTreeMap<String, usize>,
}

impl IdfTable {
    /// Document frequency of `token`; 0 for unseen tokens.
    pub fn df(&self, token: &str) -> usize {
        self.df.get(token).copied().unwrap_or(0)
    }

    /// Smoothed inverse document frequency ln((1+N)/(1+df)) + 1.
    pub fn idf(&self, token: &str) -> f64 {
        ((1.0 + self.doc_count as f64) / (1.0 + self.df(token) as f64)).ln() + 1.0
    }
}

/// Counts, for each token, the number of documents containing it at least
/// once.
pub fn build_idf<S: AsRef<str>>(documents: &[Vec<S>]) -> IdfTable {
    let mut df: BTreeMap<String, usize> = BTreeMap::new();
    for doc in documents {
        let uniq: BTreeSet<&str> = doc.iter().map(|t| t.as_ref()).collect();
        for token in uniq {
            *df.entry(token.to_owned()).or_insert(0) += 1;
        }
    }
    IdfTable {
        doc_count: documents.len(),
        df,
    }
}

/// Raw term frequency times smoothed idf: tf · (ln((1+N)/(1+df)) + 1).
pub fn tfidf<S: AsRef<str>>(token: &str, doc: &[S], idf: &IdfTable) -> f64 {
    let tf = doc.iter().filter(|t| t.as_ref() == token).count();
    if tf == 0 {
        return 0.0;
    }
    tf as f64 * idf.idf(token)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn key(s: &str) -> NameKey {
        normalize_name(s).unwrap()
    }

    fn set(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| (*s).to_owned()).collect()
    }

    #[test]
    fn normalize_lowercases_and_joins() {
        assert_eq!(key("Jing Zhang").as_str(), "jing_zhang");
    }

    #[test]
    fn normalize_collapses_whitespace() {
        assert_eq!(key("  Lishan   Cui ").as_str(), "lishan_cui");
    }

    #[test]
    fn normalize_treats_punctuation_as_separator() {
        assert_eq!(key("J.-P. Serre").as_str(), "j_p_serre");
    }

    #[test]
    fn normalize_folds_diacritics() {
        assert_eq!(key("José Ångström").as_str(), "jose_angstrom");
    }

    #[test]
    fn normalize_rejects_nonalphabetic() {
        assert!(matches!(normalize_name("123 !!"), Err(Error::EmptyName(_))));
    }

    #[test]
    fn variants_of_two_part_name() {
        let got = name_variants(&key("jing zhang"));
        let want: BTreeSet<NameKey> = ["jing_zhang", "zhang_jing", "j_zhang", "z_jing"]
            .iter()
            .map(|s| key(s))
            .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn variants_of_single_part_name() {
        let got = name_variants(&key("zhang"));
        assert_eq!(got.len(), 1);
        assert!(got.contains(&key("zhang")));
    }

    #[test]
    fn variants_of_repeated_part_name_coincide() {
        let got = name_variants(&key("yang yang"));
        let want: BTreeSet<NameKey> = ["yang_yang", "y_yang"].iter().map(|s| key(s)).collect();
        assert_eq!(got, want);
    }

    #[test]
    fn same_name_matches_rotation() {
        assert!(same_name(&key("jing zhang"), &key("zhang jing")));
    }

    #[test]
    fn same_name_rejects_distinct_surnames() {
        assert!(!same_name(&key("jing zhang"), &key("jing zhao")));
    }

    #[test]
    fn same_name_matches_initial_form() {
        assert!(same_name(&key("j zhang"), &key("jing zhang")));
    }

    #[test]
    fn tokenize_title_with_stoplist() {
        let stop = Stoplist::from_words(["of"]);
        let got = tokenize(
            "Constrained phase transformation of prestrained TiNi fibers",
            &stop,
        );
        assert_eq!(
            got,
            vec![
                "constrained",
                "phase",
                "transformation",
                "prestrained",
                "tini",
                "fibers"
            ]
        );
    }

    #[test]
    fn tokenize_empty_input() {
        assert!(tokenize("", &Stoplist::empty()).is_empty());
    }

    #[test]
    fn tokenize_drops_short_tokens() {
        assert!(tokenize("A A A", &Stoplist::empty()).is_empty());
    }

    #[test]
    fn jaccard_definitional_cases() {
        let abc = set(&["a", "b", "c"]);
        let bcd = set(&["b", "c", "d"]);
        assert_eq!(jaccard(&abc, &abc), 1.0);
        assert_eq!(jaccard(&abc, &bcd), 0.5);
        assert_eq!(jaccard(&abc, &set(&["x", "y"])), 0.0);
        assert_eq!(jaccard::<String>(&BTreeSet::new(), &BTreeSet::new()), 0.0);
    }

    #[test]
    fn tanimoto_definitional_cases() {
        let xy = set(&["x", "y"]);
        let yz = set(&["y", "z"]);
        assert_eq!(tanimoto(&xy, &xy), 1.0);
        assert!((tanimoto(&xy, &yz) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(tanimoto(&xy, &set(&["p", "q"])), 0.0);
        assert_eq!(tanimoto::<String>(&BTreeSet::new(), &BTreeSet::new()), 0.0);
    }

    #[test]
    fn jaro_winkler_martha_fixture() {
        assert!((jaro_winkler("martha", "marhta") - 0.9611).abs() < 1e-4);
    }

    #[test]
    fn jaro_winkler_edge_cases() {
        assert_eq!(jaro_winkler("abc", "abc"), 1.0);
        assert_eq!(jaro_winkler("abc", ""), 0.0);
        assert_eq!(jaro_winkler("", ""), 1.0);
    }

    #[test]
    fn idf_counts_documents_not_occurrences() {
        let docs = vec![vec!["a", "a", "b"], vec!["b"]];
        let idf = build_idf(&docs);
        assert_eq!(idf.df("a"), 1);
        assert_eq!(idf.df("b"), 2);
        assert_eq!(idf.df("zzz"), 0);
        assert_eq!(idf.doc_count, 2);
    }

    #[test]
    fn idf_token_in_all_docs() {
        let docs = vec![vec!["t"], vec!["t"], vec!["t"]];
        assert_eq!(build_idf(&docs).df("t"), 3);
    }

    #[test]
    fn tfidf_fixtures() {
        let single = build_idf(&[vec!["w"]]);
        assert_eq!(tfidf("w", &["w"], &single), 1.0);
        assert_eq!(tfidf("absent", &["w"], &single), 0.0);

        let idf = build_idf(&[vec!["w"], vec!["x"], vec!["y"]]);
        let doc = vec!["w", "w", "z"];
        let expected = 2.0 * ((4.0f64 / 2.0).ln() + 1.0);
        assert!((tfidf("w", &doc, &idf) - expected).abs() < 1e-12);
        assert!((expected - 3.386).abs() < 1e-3);
    }

    proptest! {
        #[test]
        fn jaccard_tanimoto_symmetric_bounded(
            a in proptest::collection::btree_set("[a-e]{1,3}", 0..8),
            b in proptest::collection::btree_set("[a-e]{1,3}", 0..8),
        ) {
            for f in [jaccard::<String>, tanimoto::<String>] {
                let s = f(&a, &b);
                prop_assert!((0.0..=1.0).contains(&s));
                prop_assert_eq!(s, f(&b, &a));
            }
            if !a.is_empty() {
                prop_assert_eq!(jaccard(&a, &a), 1.0);
                prop_assert_eq!(tanimoto(&a, &a), 1.0);
            }
        }

        #[test]
        fn jaro_winkler_symmetric_bounded(s1 in "[a-f]{0,8}", s2 in "[a-f]{0,8}") {
            let v = jaro_winkler(&s1, &s2);
            prop_assert!((0.0..=1.0).contains(&v));
            prop_assert!((v - jaro_winkler(&s2, &s1)).abs() < 1e-12);
            if !s1.is_empty() {
                prop_assert_eq!(jaro_winkler(&s1, &s1), 1.0);
            }
        }

        #[test]
        fn same_name_symmetric_reflexive(raw1 in "[a-d]{1,4}( [a-d]{1,4}){0,2}", raw2 in "[a-d]{1,4}( [a-d]{1,4}){0,2}") {
            let k1 = normalize_name(&raw1).unwrap();
            let k2 = normalize_name(&raw2).unwrap();
            prop_assert!(same_name(&k1, &k1));
            prop_assert!(name_variants(&k1).contains(&k1));
            prop_assert_eq!(same_name(&k1, &k2), same_name(&k2, &k1));
        }

        #[test]
        fn tokenize_idempotent(text in "[a-zA-Z0-9 ,.;]{0,60}") {
            let stop = Stoplist::default();
            let once = tokenize(&text, &stop);
            let twice = tokenize(&once.join(" "), &stop);
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn tfidf_monotone_in_tf_and_df(tf1 in 1usize..5, extra in 1usize..4, df in 1usize..4) {
            // More occurrences never lower the score.
            let idf = build_idf(&[vec!["t"], vec!["u"], vec!["v"], vec!["w"]]);
            let doc1: Vec<&str> = std::iter::repeat_n("t", tf1).collect();
            let doc2: Vec<&str> = std::iter::repeat_n("t", tf1 + extra).collect();
            prop_assert!(tfidf("t", &doc2, &idf) >= tfidf("t", &doc1, &idf));

            // Higher document frequency never raises the score.
            let mut docs_low: Vec<Vec<&str>> = vec![vec!["t"]; df];
            let mut docs_high = vec![vec!["t"]; df + 1];
            for _ in 0..3 {
                docs_low.push(vec!["zz"]);
                docs_high.push(vec!["zz"]);
            }
            docs_high.truncate(docs_low.len());
            let lo = build_idf(&docs_low);
            let hi = build_idf(&docs_high);
            let doc = vec!["t"];
            prop_assert!(tfidf("t", &doc, &hi) <= tfidf("t", &doc, &lo));
        }
    }
}
