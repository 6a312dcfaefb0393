use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

/// Precision, recall and their harmonic mean.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Prf {
    pub p: f64,
    pub r: f64,
    pub f1: f64,
}

pub fn harmonic_mean(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

impl Prf {
    pub fn new(p: f64, r: f64) -> Prf {
        Prf {
            p,
            r,
            f1: harmonic_mean(p, r),
        }
    }

    /// Mean precision and mean recall, with F1 recomputed from them.
    pub fn mean(items: &[Prf]) -> Prf {
        if items.is_empty() {
            return Prf::default();
        }
        let n = items.len() as f64;
        Prf::new(
            items.iter().map(|x| x.p).sum::<f64>() / n,
            items.iter().map(|x| x.r).sum::<f64>() / n,
        )
    }
}

/// Set overlap scores. Precision is 0 for an empty prediction and recall is
/// 0 for an empty gold set.
pub fn span_prf<T: Ord>(pred: &BTreeSet<T>, gold: &BTreeSet<T>) -> Prf {
    let hit = pred.intersection(gold).count() as f64;
    let p = if pred.is_empty() { 0.0 } else { hit / pred.len() as f64 };
    let r = if gold.is_empty() { 0.0 } else { hit / gold.len() as f64 };
    Prf::new(p, r)
}

/// [`span_prf`] on the top-ranked prediction alone.
pub fn at1_prf<T: Ord + Clone>(ranked: &[T], gold: &BTreeSet<T>) -> Prf {
    let top: BTreeSet<T> = ranked.iter().take(1).cloned().collect();
    span_prf(&top, gold)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(v: &[usize]) -> BTreeSet<usize> {
        v.iter().copied().collect()
    }

    #[test]
    fn span_examples() {
        assert_eq!(span_prf(&set(&[2, 3]), &set(&[3, 4])), Prf { p: 0.5, r: 0.5, f1: 0.5 });
        assert_eq!(span_prf(&set(&[1, 2]), &set(&[1, 2])), Prf { p: 1.0, r: 1.0, f1: 1.0 });
        assert_eq!(span_prf(&set(&[]), &set(&[1])), Prf::default());
    }

    #[test]
    fn at1_examples() {
        let out = at1_prf(&[3, 9], &set(&[3, 4]));
        assert_eq!((out.p, out.r), (1.0, 0.5));
        assert!((out.f1 - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(at1_prf::<usize>(&[], &set(&[1])), Prf::default());
        assert_eq!(at1_prf(&[5], &set(&[5])), Prf::new(1.0, 1.0));
    }

    proptest! {
        #[test]
        fn scores_are_bounded(pred in proptest::collection::btree_set(0usize..10, 0..6),
                              gold in proptest::collection::btree_set(0usize..10, 0..6)) {
            let s = span_prf(&pred, &gold);
            for v in [s.p, s.r, s.f1] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            prop_assert!(s.f1 <= s.p.max(s.r) + 1e-12);
            prop_assert!((s.f1 - harmonic_mean(s.p, s.r)).abs() < 1e-15);
        }
    }
}
