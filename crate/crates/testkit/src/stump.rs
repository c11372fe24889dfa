//! Brute-force best Gini stump: enumerate every (feature, midpoint) split and
//! recount class frequencies from scratch for each candidate. Exponentially
//! dumber than the production tree trainer, which is exactly the point.

/// A depth-1 split candidate with its weighted Gini impurity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stump {
    pub feature: usize,
    pub threshold: f64,
    pub weighted_gini: f64,
}

fn gini(labels: &[usize], n_classes: usize) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    let mut counts = vec![0usize; n_classes];
    for &y in labels {
        counts[y] += 1;
    }
    let n = labels.len() as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

/// Exhaustive search over all features and all midpoints between adjacent
/// distinct sorted values. Ties resolve to the lowest feature index, then the
/// lowest threshold. Returns `None` when no feature has two distinct values.
pub fn best_gini_stump(rows: &[Vec<f64>], labels: &[usize], n_classes: usize) -> Option<Stump> {
    assert_eq!(rows.len(), labels.len());
    let n_features = rows[0].len();
    let mut best: Option<Stump> = None;

    for feature in 0..n_features {
        let mut values: Vec<f64> = rows.iter().map(|r| r[feature]).collect();
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        values.dedup();
        for pair in values.windows(2) {
            let threshold = (pair[0] + pair[1]) / 2.0;
            let mut left = Vec::new();
            let mut right = Vec::new();
            for (row, &y) in rows.iter().zip(labels) {
                if row[feature] <= threshold {
                    left.push(y);
                } else {
                    right.push(y);
                }
            }
            let n = labels.len() as f64;
            let weighted = (left.len() as f64 / n) * gini(&left, n_classes)
                + (right.len() as f64 / n) * gini(&right, n_classes);
            let candidate = Stump {
                feature,
                threshold,
                weighted_gini: weighted,
            };
            best = Some(match best {
                None => candidate,
                Some(b) if weighted < b.weighted_gini => candidate,
                Some(b) => b,
            });
        }
    }
    best
}
