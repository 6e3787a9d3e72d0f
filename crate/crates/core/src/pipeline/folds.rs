use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::seed::{rng_from, tag};

/// Stratified folds: each class is shuffled and dealt round-robin, so fold
/// sizes and per-class counts differ by at most one between folds. Fold
/// members are returned sorted.
pub fn stratified_folds(classes: &[usize], n_folds: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if n_folds < 2 {
        return Err(Error::InvalidConfig("need at least two folds".into()));
    }
    if classes.len() < n_folds {
        return Err(Error::TooFewSamples(classes.len(), n_folds));
    }
    let mut rng = rng_from(seed, &[tag("folds")]);
    let n_classes = classes.iter().max().map_or(0, |m| m + 1);
    let mut folds = vec![Vec::new(); n_folds];
    let mut slot = 0;
    for c in 0..n_classes {
        let mut members: Vec<usize> = (0..classes.len()).filter(|&i| classes[i] == c).collect();
        members.shuffle(&mut rng);
        for i in members {
            folds[slot % n_folds].push(i);
            slot += 1;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

/// Indices not in `test`, in ascending order.
pub fn complement(n: usize, test: &[usize]) -> Vec<usize> {
    let mut keep = vec![true; n];
    for &t in test {
        keep[t] = false;
    }
    (0..n).filter(|&i| keep[i]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_degenerate_requests() {
        assert!(stratified_folds(&[0, 1, 0], 1, 0).is_err());
        assert!(stratified_folds(&[0, 1], 3, 0).is_err());
    }

    #[test]
    fn complement_is_sorted_remainder() {
        assert_eq!(complement(5, &[3, 0]), vec![1, 2, 4]);
    }

    proptest! {
        #[test]
        fn folds_partition_and_balance(classes in proptest::collection::vec(0usize..2, 10..200), n_folds in 2usize..11, seed: u64) {
            let folds = stratified_folds(&classes, n_folds, seed).unwrap();
            prop_assert_eq!(folds.len(), n_folds);
            let mut all: Vec<usize> = folds.iter().flatten().copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..classes.len()).collect::<Vec<_>>());
            for c in 0..2 {
                let counts: Vec<usize> = folds.iter().map(|f| f.iter().filter(|&&i| classes[i] == c).count()).collect();
                prop_assert!(counts.iter().max().unwrap() - counts.iter().min().unwrap() <= 1);
            }
            let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
            prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
            prop_assert_eq!(&folds, &stratified_folds(&classes, n_folds, seed).unwrap());
        }
    }
}
