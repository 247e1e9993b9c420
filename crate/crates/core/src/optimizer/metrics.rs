use ndarray::Array2;

/// Area under the ROC curve via the Mann–Whitney statistic with midranks
/// for tied scores. Returns 0.5 when one class is absent.
pub fn auc(scores: &[f64], positive: &[bool]) -> f64 {
    assert_eq!(scores.len(), positive.len());
    let n_pos = positive.iter().filter(|&&p| p).count();
    let n_neg = positive.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return 0.5;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // Ranks i+1..=j+1 share their mean.
        let midrank = (i + j + 2) as f64 / 2.0;
        rank_sum += midrank * order[i..=j].iter().filter(|&&k| positive[k]).count() as f64;
        i = j + 1;
    }
    let (p, q) = (n_pos as f64, n_neg as f64);
    (rank_sum - p * (p + 1.0) / 2.0) / (p * q)
}

/// Fraction of rows whose highest-probability class (lowest index on ties)
/// matches the label.
pub fn accuracy(probs: &Array2<f64>, labels: &[usize]) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    let hits = probs
        .outer_iter()
        .zip(labels)
        .filter(|(row, &y)| {
            let mut best = 0;
            for (k, &p) in row.iter().enumerate() {
                if p > row[best] {
                    best = k;
                }
            }
            best == y
        })
        .count();
    hits as f64 / labels.len() as f64
}

/// `1 − AUC` for two classes, `1 − accuracy` otherwise.
pub fn utility_loss(probs: &Array2<f64>, labels: &[usize]) -> f64 {
    if probs.ncols() == 2 {
        let scores: Vec<f64> = probs.column(1).to_vec();
        let positive: Vec<bool> = labels.iter().map(|&y| y == 1).collect();
        1.0 - auc(&scores, &positive)
    } else {
        1.0 - accuracy(probs, labels)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_auc(scores: &[f64], positive: &[bool]) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for (i, &pi) in positive.iter().enumerate() {
            for (j, &pj) in positive.iter().enumerate() {
                if pi && !pj {
                    den += 1.0;
                    if scores[i] > scores[j] {
                        num += 1.0;
                    } else if scores[i] == scores[j] {
                        num += 0.5;
                    }
                }
            }
        }
        num / den
    }

    #[test]
    fn perfect_and_inverted() {
        assert_eq!(auc(&[0.1, 0.2, 0.8, 0.9], &[false, false, true, true]), 1.0);
        assert_eq!(auc(&[0.9, 0.8, 0.2, 0.1], &[false, false, true, true]), 0.0);
        assert_eq!(auc(&[0.5; 4], &[false, true, false, true]), 0.5);
    }

    #[test]
    fn accuracy_and_loss() {
        let probs = Array2::from_shape_vec((3, 3), vec![0.7, 0.2, 0.1, 0.1, 0.1, 0.8, 0.3, 0.4, 0.3]).unwrap();
        assert!((accuracy(&probs, &[0, 2, 0]) - 2.0 / 3.0).abs() < 1e-12);
        assert!((utility_loss(&probs, &[0, 2, 1]) - 0.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn matches_pairwise_definition(pairs in prop::collection::vec((0u8..5, any::<bool>()), 2..40)) {
            let scores: Vec<f64> = pairs.iter().map(|p| f64::from(p.0)).collect();
            let positive: Vec<bool> = pairs.iter().map(|p| p.1).collect();
            prop_assume!(positive.iter().any(|&p| p) && positive.iter().any(|&p| !p));
            prop_assert!((auc(&scores, &positive) - brute_auc(&scores, &positive)).abs() < 1e-12);
        }
    }
}
