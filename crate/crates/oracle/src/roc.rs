/// Area under the ROC curve as the fraction of (positive, negative) pairs
/// ranked correctly, counting ties as one half.
pub fn pairwise_auc(positives: &[f64], negatives: &[f64]) -> f64 {
    let mut wins = 0.0;
    for &p in positives {
        for &n in negatives {
            if p > n {
                wins += 1.0;
            } else if p == n {
                wins += 0.5;
            }
        }
    }
    wins / (positives.len() * negatives.len()) as f64
}
