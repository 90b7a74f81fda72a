//! Classification and correlation scores: macro/micro F1 and Pearson's r.

use crate::error::{Error, Result};

/// Per-class precision/recall F1, averaged two ways: `macro` is the
/// unweighted mean over classes (F1 taken as 0 where undefined), `micro`
/// pools counts globally and equals accuracy for single-label multiclass.
pub fn f1_scores(predicted: &[usize], gold: &[usize]) -> Result<(f64, f64)> {
    if predicted.len() != gold.len() {
        return Err(Error::shape(
            "prediction/gold lengths",
            gold.len(),
            predicted.len(),
        ));
    }
    if predicted.is_empty() {
        return Err(Error::InvalidLabels("empty label vectors".into()));
    }
    let mut classes: Vec<usize> = predicted.iter().chain(gold).copied().collect();
    classes.sort_unstable();
    classes.dedup();

    let mut macro_sum = 0.0;
    for &c in &classes {
        let tp = predicted
            .iter()
            .zip(gold)
            .filter(|&(&p, &g)| p == c && g == c)
            .count() as f64;
        let pred_c = predicted.iter().filter(|&&p| p == c).count() as f64;
        let gold_c = gold.iter().filter(|&&g| g == c).count() as f64;
        let f1 = if tp == 0.0 {
            0.0
        } else {
            let precision = tp / pred_c;
            let recall = tp / gold_c;
            2.0 * precision * recall / (precision + recall)
        };
        macro_sum += f1;
    }
    let macro_f1 = macro_sum / classes.len() as f64;

    let correct = predicted
        .iter()
        .zip(gold)
        .filter(|&(&p, &g)| p == g)
        .count() as f64;
    let micro_f1 = correct / gold.len() as f64;

    Ok((macro_f1, micro_f1))
}

/// Pearson correlation coefficient of two equal-length samples.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::shape("sample lengths", ys.len(), xs.len()));
    }
    if xs.len() < 2 {
        return Err(Error::DegenerateInput(
            "pearson requires at least two points".into(),
        ));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let dx = x - mx;
        let dy = y - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return Err(Error::DegenerateInput(
            "pearson is undefined for a constant sample".into(),
        ));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    // Naive two-pass oracle written directly from the textbook formula.
    fn oracle_pearson(xs: &[f64], ys: &[f64]) -> f64 {
        let n = xs.len() as f64;
        let sx: f64 = xs.iter().sum();
        let sy: f64 = ys.iter().sum();
        let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
        let sxx: f64 = xs.iter().map(|x| x * x).sum();
        let syy: f64 = ys.iter().map(|y| y * y).sum();
        (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
    }

    #[test]
    fn perfect_predictions_score_one() {
        let gold = [0, 1, 2, 1, 0];
        assert_eq!(f1_scores(&gold, &gold).unwrap(), (1.0, 1.0));
    }

    #[test]
    fn binary_case_from_direct_computation() {
        // gold [+,+,-,-], pred [+,-,-,-]:
        // F1(+) = 2/3, F1(-) = 4/5, macro = 0.73333, micro = 0.75
        let gold = [1, 1, 0, 0];
        let pred = [1, 0, 0, 0];
        let (macro_f1, micro_f1) = f1_scores(&pred, &gold).unwrap();
        assert!((macro_f1 - (2.0 / 3.0 + 4.0 / 5.0) / 2.0).abs() < 1e-12);
        assert!((micro_f1 - 0.75).abs() < 1e-15);
    }

    #[test]
    fn constant_predictions_on_balanced_gold() {
        let gold = [0, 0, 1, 1];
        let pred = [0, 0, 0, 0];
        let (_, micro) = f1_scores(&pred, &gold).unwrap();
        assert_eq!(micro, 0.5);
    }

    #[test]
    fn micro_f1_equals_accuracy() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        for _ in 0..100 {
            let n = rng.random_range(2..50);
            let gold: Vec<usize> = (0..n).map(|_| rng.random_range(0..5)).collect();
            let pred: Vec<usize> = (0..n).map(|_| rng.random_range(0..5)).collect();
            let accuracy =
                pred.iter().zip(&gold).filter(|&(a, b)| a == b).count() as f64 / n as f64;
            let (_, micro) = f1_scores(&pred, &gold).unwrap();
            assert_eq!(micro, accuracy);
        }
    }

    #[test]
    fn pearson_sign_extremes() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert!((pearson(&xs, &xs).unwrap() - 1.0).abs() < 1e-15);
        let neg: Vec<f64> = xs.iter().map(|x| -x).collect();
        assert!((pearson(&xs, &neg).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn pearson_small_example() {
        // (1,2,3) vs (2,4,7): covariance 5, variances 2 and 114/9
        let r = pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 7.0]).unwrap();
        let want = 5.0 / (2.0f64 * 114.0 / 9.0).sqrt();
        assert!((r - want).abs() < 1e-12);
        assert!((r - 0.993_399_267_798_783).abs() < 1e-12);
    }

    #[test]
    fn pearson_matches_oracle_on_random_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(63);
        for _ in 0..50 {
            let n = rng.random_range(3..40);
            let xs: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
            let ys: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
            let got = pearson(&xs, &ys).unwrap();
            assert!((got - oracle_pearson(&xs, &ys)).abs() < 1e-10);
        }
    }

    #[test]
    fn pearson_invariant_under_positive_affine_maps() {
        let mut rng = ChaCha8Rng::seed_from_u64(65);
        for _ in 0..100 {
            let n = 25;
            let xs: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
            let ys: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
            let a = rng.random_range(0.01..10.0);
            let b = rng.random_range(-20.0..20.0);
            let mapped: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
            let base = pearson(&xs, &ys).unwrap();
            let got = pearson(&mapped, &ys).unwrap();
            assert!((base - got).abs() < 1e-12);
        }
    }

    #[test]
    fn pearson_rejects_degenerate_input() {
        assert!(pearson(&[1.0], &[1.0]).is_err());
        assert!(pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
        assert!(pearson(&[1.0, 2.0], &[1.0, 2.0, 3.0]).is_err());
    }
}
