//! Label-stratified subsampling of document indices.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Picks `m` indices out of `labels.len()` preserving label proportions
/// (largest-remainder apportionment), seeded and deterministic. Returns all
/// indices when `m >= labels.len()`. The result is sorted.
pub fn stratified_subsample(labels: &[usize], m: usize, seed: u64) -> Result<Vec<usize>> {
    let n = labels.len();
    if n == 0 || m == 0 {
        return Err(Error::InvalidLabels(
            "stratified subsample needs nonempty labels and m > 0".into(),
        ));
    }
    if m >= n {
        return Ok((0..n).collect());
    }
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for (i, &l) in labels.iter().enumerate() {
        match groups.iter_mut().find(|(g, _)| *g == l) {
            Some((_, v)) => v.push(i),
            None => groups.push((l, vec![i])),
        }
    }
    // integer quotas plus largest fractional remainders
    let mut quotas: Vec<usize> = Vec::with_capacity(groups.len());
    let mut remainders: Vec<(f64, usize)> = Vec::with_capacity(groups.len());
    let mut assigned = 0usize;
    for (gi, (_, members)) in groups.iter().enumerate() {
        let exact = m as f64 * members.len() as f64 / n as f64;
        let q = (exact.floor() as usize).min(members.len());
        quotas.push(q);
        assigned += q;
        remainders.push((exact - exact.floor(), gi));
    }
    remainders.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    let mut left = m.saturating_sub(assigned);
    for &(_, gi) in remainders.iter().cycle().take(remainders.len() * 2) {
        if left == 0 {
            break;
        }
        if quotas[gi] < groups[gi].1.len() {
            quotas[gi] += 1;
            left -= 1;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = Vec::with_capacity(m);
    for ((_, mut members), q) in groups.into_iter().zip(quotas) {
        members.shuffle(&mut rng);
        picked.extend(members.into_iter().take(q));
    }
    picked.sort_unstable();
    Ok(picked)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preserves_proportions() {
        let labels: Vec<usize> = (0..1000).map(|i| i % 4).collect();
        let picked = stratified_subsample(&labels, 400, 3).unwrap();
        assert_eq!(picked.len(), 400);
        for class in 0..4 {
            let got = picked.iter().filter(|&&i| labels[i] == class).count();
            assert_eq!(got, 100);
        }
    }

    #[test]
    fn uneven_groups_get_largest_remainder_rounding() {
        // 7 of class 0, 3 of class 1, pick 5: quotas 3.5 and 1.5 -> 4 + 1 or 3 + 2
        let labels = [0, 0, 0, 0, 0, 0, 0, 1, 1, 1];
        let picked = stratified_subsample(&labels, 5, 1).unwrap();
        assert_eq!(picked.len(), 5);
        let zeros = picked.iter().filter(|&&i| labels[i] == 0).count();
        assert!(zeros == 3 || zeros == 4);
    }

    #[test]
    fn deterministic_and_capped() {
        let labels: Vec<usize> = (0..50).map(|i| i % 3).collect();
        let a = stratified_subsample(&labels, 20, 9).unwrap();
        let b = stratified_subsample(&labels, 20, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            stratified_subsample(&labels, 500, 9).unwrap(),
            (0..50).collect::<Vec<_>>()
        );
    }
}
