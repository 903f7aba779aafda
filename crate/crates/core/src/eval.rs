//! Evaluation protocols: pairwise clustering metrics, weighted assignment
//! metrics with NIL as a pseudo-author, and the two ranking metrics.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::corpus::{AuthorOrNil, PaperId, PaperRef};
use crate::error::{Error, Result};

/// Precision, recall, and their harmonic mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    pub fn new(precision: f64, recall: f64) -> Prf {
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Prf {
            precision,
            recall,
            f1,
        }
    }

    pub fn perfect() -> Prf {
        Prf {
            precision: 1.0,
            recall: 1.0,
            f1: 1.0,
        }
    }
}

fn pairs(n: usize) -> u64 {
    (n as u64) * (n as u64).saturating_sub(1) / 2
}

/// Pairwise precision/recall/F1 of a predicted clustering against the true
/// one, over unordered paper pairs.
///
/// Both clusterings must cover the same paper universe. When neither side
/// has any co-clustered pair (all singletons), the result is perfect by
/// convention so single-paper names stay scoreable.
pub fn pairwise_prf(pred: &[Vec<PaperId>], truth: &[Vec<PaperId>]) -> Result<Prf> {
    let mut truth_of: HashMap<&str, usize> = HashMap::new();
    for (label, cluster) in truth.iter().enumerate() {
        for paper in cluster {
            if truth_of.insert(paper, label).is_some() {
                return Err(Error::UniverseMismatch(format!(
                    "paper {paper} appears twice in the truth clustering"
                )));
            }
        }
    }
    let mut seen = 0usize;
    // Contingency counts: intersection sizes between each predicted cluster
    // and each truth cluster.
    let mut correct = 0u64;
    let mut predicted = 0u64;
    for cluster in pred {
        let mut overlap: HashMap<usize, usize> = HashMap::new();
        for paper in cluster {
            let Some(&label) = truth_of.get(paper.as_str()) else {
                return Err(Error::UniverseMismatch(format!(
                    "paper {paper} is predicted but absent from the truth"
                )));
            };
            *overlap.entry(label).or_insert(0) += 1;
            seen += 1;
        }
        predicted += pairs(cluster.len());
        for size in overlap.values() {
            correct += pairs(*size);
        }
    }
    let universe: usize = truth.iter().map(Vec::len).sum();
    if seen != universe {
        return Err(Error::UniverseMismatch(format!(
            "prediction covers {seen} papers, truth covers {universe}"
        )));
    }
    let true_pairs: u64 = truth.iter().map(|c| pairs(c.len())).sum();
    if predicted == 0 && true_pairs == 0 {
        return Ok(Prf::perfect());
    }
    let precision = if predicted == 0 {
        0.0
    } else {
        correct as f64 / predicted as f64
    };
    let recall = if true_pairs == 0 {
        0.0
    } else {
        correct as f64 / true_pairs as f64
    };
    Ok(Prf::new(precision, recall))
}

/// Unweighted mean F1 over per-name results; 0 when empty.
pub fn macro_pairwise_f1(per_name: &[Prf]) -> f64 {
    if per_name.is_empty() {
        return 0.0;
    }
    per_name.iter().map(|p| p.f1).sum::<f64>() / per_name.len() as f64
}

/// One author's row of the weighted assignment report.
#[derive(Debug, Clone, Serialize)]
pub struct AuthorRow {
    pub author: String,
    pub truth_papers: usize,
    pub weight: f64,
    #[serde(flatten)]
    pub prf: Prf,
}

/// The weighted assignment report: per-author rows and the weighted
/// aggregate.
#[derive(Debug, Clone, Serialize)]
pub struct WeightedReport {
    pub per_author: Vec<AuthorRow>,
    pub aggregate: Prf,
}

/// Weighted precision/recall/F1 of paper assignments, with NIL treated as
/// one additional pseudo-author.
///
/// Per author: precision over papers assigned to it, recall over its true
/// papers, weight proportional to its share of the papers to be assigned.
pub fn weighted_prf(
    assignments: &BTreeMap<PaperRef, AuthorOrNil>,
    truth: &BTreeMap<PaperRef, AuthorOrNil>,
) -> Result<WeightedReport> {
    if assignments.len() != truth.len()
        || assignments.keys().zip(truth.keys()).any(|(a, b)| a != b)
    {
        return Err(Error::UniverseMismatch(
            "assignment and truth cover different paper references".into(),
        ));
    }
    let total = truth.len();
    let mut truth_count: BTreeMap<&AuthorOrNil, usize> = BTreeMap::new();
    let mut assigned_count: BTreeMap<&AuthorOrNil, usize> = BTreeMap::new();
    let mut correct_count: BTreeMap<&AuthorOrNil, usize> = BTreeMap::new();
    for (r, t) in truth {
        *truth_count.entry(t).or_insert(0) += 1;
        let a = &assignments[r];
        *assigned_count.entry(a).or_insert(0) += 1;
        if a == t {
            *correct_count.entry(t).or_insert(0) += 1;
        }
    }
    let mut per_author = Vec::new();
    let mut aggregate_p = 0.0;
    let mut aggregate_r = 0.0;
    let mut aggregate_f = 0.0;
    for (author, &n_truth) in &truth_count {
        let correct = correct_count.get(author).copied().unwrap_or(0);
        let assigned = assigned_count.get(author).copied().unwrap_or(0);
        let precision = if assigned == 0 {
            0.0
        } else {
            correct as f64 / assigned as f64
        };
        let recall = correct as f64 / n_truth as f64;
        let prf = Prf::new(precision, recall);
        let weight = n_truth as f64 / total as f64;
        aggregate_p += weight * prf.precision;
        aggregate_r += weight * prf.recall;
        aggregate_f += weight * prf.f1;
        per_author.push(AuthorRow {
            author: author.to_string(),
            truth_papers: n_truth,
            weight,
            prf,
        });
    }
    Ok(WeightedReport {
        per_author,
        aggregate: Prf {
            precision: aggregate_p,
            recall: aggregate_r,
            f1: aggregate_f,
        },
    })
}

/// Rank-based (Mann–Whitney) AUC with average ranks for tied scores.
pub fn auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::UniverseMismatch(format!(
            "{} scores vs {} labels",
            scores.len(),
            labels.len()
        )));
    }
    let n_pos = labels.iter().filter(|l| **l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap());
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        // Average rank of the tie group, 1-based.
        let avg_rank = (i + 1 + j) as f64 / 2.0;
        for &idx in &order[i..j] {
            if labels[idx] {
                rank_sum_pos += avg_rank;
            }
        }
        i = j;
    }
    let n_pos_f = n_pos as f64;
    Ok((rank_sum_pos - n_pos_f * (n_pos_f + 1.0) / 2.0) / (n_pos_f * n_neg as f64))
}

/// Average precision: mean over positive positions k of the precision
/// among the top k, after a stable descending sort by score.
pub fn average_precision(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::UniverseMismatch(format!(
            "{} scores vs {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if !labels.iter().any(|l| *l) {
        return Err(Error::NoPositives);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    // Stable: ties keep input order.
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap());
    let mut hits = 0usize;
    let mut ap = 0.0;
    for (k, &idx) in order.iter().enumerate() {
        if labels[idx] {
            hits += 1;
            ap += hits as f64 / (k + 1) as f64;
        }
    }
    Ok(ap / hits as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn clusters(spec: &[&[&str]]) -> Vec<Vec<PaperId>> {
        spec.iter()
            .map(|c| c.iter().map(|p| (*p).to_string()).collect())
            .collect()
    }

    #[test]
    fn pairwise_perfect_prediction() {
        let truth = clusters(&[&["p1", "p2"], &["p3"]]);
        let got = pairwise_prf(&truth, &truth).unwrap();
        assert_eq!(got, Prf::perfect());
    }

    #[test]
    fn pairwise_hand_fixture() {
        let truth = clusters(&[&["p1", "p2", "p3"], &["p4"]]);
        let pred = clusters(&[&["p1", "p2"], &["p3", "p4"]]);
        let got = pairwise_prf(&pred, &truth).unwrap();
        assert!((got.precision - 0.5).abs() < 1e-12);
        assert!((got.recall - 1.0 / 3.0).abs() < 1e-12);
        assert!((got.f1 - 0.4).abs() < 1e-12);
    }

    #[test]
    fn pairwise_all_singletons_convention() {
        let truth = clusters(&[&["p1"], &["p2"], &["p3"]]);
        let got = pairwise_prf(&truth, &truth).unwrap();
        assert_eq!(got, Prf::perfect());
    }

    #[test]
    fn pairwise_rejects_universe_mismatch() {
        let truth = clusters(&[&["p1", "p2"]]);
        let pred = clusters(&[&["p1", "p9"]]);
        assert!(pairwise_prf(&pred, &truth).is_err());
    }

    #[test]
    fn macro_f1_is_unweighted_mean() {
        let names = [Prf::new(1.0, 1.0), Prf { precision: 0.5, recall: 1.0 / 3.0, f1: 0.4 }];
        assert!((macro_pairwise_f1(&names) - 0.7).abs() < 1e-12);
        assert_eq!(macro_pairwise_f1(&names[..1]), 1.0);
        assert_eq!(macro_pairwise_f1(&[Prf::perfect(), Prf::perfect()]), 1.0);
    }

    fn rmap(entries: &[(&str, usize, AuthorOrNil)]) -> BTreeMap<PaperRef, AuthorOrNil> {
        entries
            .iter()
            .map(|(id, idx, a)| (PaperRef::new((*id).to_string(), *idx), a.clone()))
            .collect()
    }

    #[test]
    fn weighted_all_correct() {
        let truth = rmap(&[
            ("p1", 0, AuthorOrNil::Author("a".into())),
            ("p2", 0, AuthorOrNil::Author("b".into())),
        ]);
        let got = weighted_prf(&truth, &truth).unwrap();
        assert_eq!(got.aggregate, Prf::perfect());
        let weight_sum: f64 = got.per_author.iter().map(|r| r.weight).sum();
        assert!((weight_sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn weighted_hand_fixture() {
        // Author a: 3 papers, all correct (F1 1.0). Author b: 1 paper,
        // assigned elsewhere (F1 0.0). Weighted F1 = 0.75.
        let truth = rmap(&[
            ("p1", 0, AuthorOrNil::Author("a".into())),
            ("p2", 0, AuthorOrNil::Author("a".into())),
            ("p3", 0, AuthorOrNil::Author("a".into())),
            ("p4", 0, AuthorOrNil::Author("b".into())),
        ]);
        let pred = rmap(&[
            ("p1", 0, AuthorOrNil::Author("a".into())),
            ("p2", 0, AuthorOrNil::Author("a".into())),
            ("p3", 0, AuthorOrNil::Author("a".into())),
            ("p4", 0, AuthorOrNil::Nil),
        ]);
        let got = weighted_prf(&pred, &truth).unwrap();
        assert!((got.aggregate.f1 - 0.75).abs() < 1e-12);
    }

    #[test]
    fn weighted_all_nil_when_no_nil_truth() {
        let truth = rmap(&[
            ("p1", 0, AuthorOrNil::Author("a".into())),
            ("p2", 0, AuthorOrNil::Author("b".into())),
        ]);
        let pred = rmap(&[
            ("p1", 0, AuthorOrNil::Nil),
            ("p2", 0, AuthorOrNil::Nil),
        ]);
        let got = weighted_prf(&pred, &truth).unwrap();
        assert_eq!(got.aggregate.f1, 0.0);
    }

    #[test]
    fn auc_hand_fixtures() {
        assert_eq!(
            auc(&[0.9, 0.8, 0.2, 0.1], &[true, true, false, false]).unwrap(),
            1.0
        );
        assert_eq!(auc(&[0.5, 0.5, 0.5, 0.5], &[true, false, true, false]).unwrap(), 0.5);
        assert_eq!(
            auc(&[0.9, 0.8, 0.7, 0.6], &[true, false, true, false]).unwrap(),
            0.75
        );
        assert!(matches!(auc(&[0.1, 0.2], &[true, true]), Err(Error::SingleClass)));
    }

    #[test]
    fn average_precision_fixtures() {
        assert_eq!(
            average_precision(&[0.9, 0.5, 0.1], &[true, false, false]).unwrap(),
            1.0
        );
        let n = 4;
        let mut scores: Vec<f64> = (0..n).map(|i| 1.0 - i as f64 * 0.1).collect();
        let mut labels = vec![false; n];
        labels[n - 1] = true;
        assert!((average_precision(&scores, &labels).unwrap() - 1.0 / n as f64).abs() < 1e-12);
        scores = vec![0.9, 0.8, 0.7, 0.6];
        labels = vec![true, false, true, false];
        assert!((average_precision(&scores, &labels).unwrap() - 5.0 / 6.0).abs() < 1e-12);
        assert!(matches!(
            average_precision(&[0.1], &[false]),
            Err(Error::NoPositives)
        ));
    }

    proptest! {
        #[test]
        fn pairwise_invariant_under_cluster_permutation(
            assignment in proptest::collection::vec(0usize..4, 4..10),
            pred_assignment in proptest::collection::vec(0usize..4, 4..10),
        ) {
            let n = assignment.len().min(pred_assignment.len());
            let make = |labels: &[usize]| {
                let mut m: BTreeMap<usize, Vec<PaperId>> = BTreeMap::new();
                for (i, l) in labels.iter().take(n).enumerate() {
                    m.entry(*l).or_default().push(format!("p{i}"));
                }
                m.into_values().collect::<Vec<_>>()
            };
            let truth = make(&assignment);
            let pred = make(&pred_assignment);
            let base = pairwise_prf(&pred, &truth).unwrap();
            let mut pred_rev = pred.clone();
            pred_rev.reverse();
            let mut truth_rev = truth.clone();
            truth_rev.reverse();
            let moved = pairwise_prf(&pred_rev, &truth_rev).unwrap();
            prop_assert!((base.f1 - moved.f1).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&base.precision));
            prop_assert!((0.0..=1.0).contains(&base.recall));
            prop_assert!((0.0..=1.0).contains(&base.f1));
        }

        #[test]
        fn auc_complement_under_label_flip(
            scores in proptest::collection::vec(0.0f64..1.0, 4..20),
            flags in proptest::collection::vec(proptest::bool::ANY, 4..20),
        ) {
            let n = scores.len().min(flags.len());
            let scores = &scores[..n];
            let labels = &flags[..n];
            let flipped: Vec<bool> = labels.iter().map(|l| !l).collect();
            if labels.iter().any(|l| *l) && labels.iter().any(|l| !*l) {
                let a = auc(scores, labels).unwrap();
                let b = auc(scores, &flipped).unwrap();
                prop_assert!((a + b - 1.0).abs() < 1e-12);
                prop_assert!((0.0..=1.0).contains(&a));
            }
        }

        #[test]
        fn weighted_weights_sum_to_one(
            labels in proptest::collection::vec(0usize..3, 2..12),
            preds in proptest::collection::vec(0usize..4, 2..12),
        ) {
            let n = labels.len().min(preds.len());
            let to_assign = |v: usize| if v == 3 { AuthorOrNil::Nil } else { AuthorOrNil::Author(format!("a{v}")) };
            let truth: BTreeMap<PaperRef, AuthorOrNil> = (0..n)
                .map(|i| (PaperRef::new(format!("p{i}"), 0), to_assign(labels[i])))
                .collect();
            let pred: BTreeMap<PaperRef, AuthorOrNil> = (0..n)
                .map(|i| (PaperRef::new(format!("p{i}"), 0), to_assign(preds[i])))
                .collect();
            let got = weighted_prf(&pred, &truth).unwrap();
            let total: f64 = got.per_author.iter().map(|r| r.weight).sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&got.aggregate.f1));
        }
    }
}
