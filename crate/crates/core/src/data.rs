//! Problem instances and error metrics.

use alloc::vec::Vec;

use rand::seq::index;

use crate::dense::{dot, Mat};
use crate::error::{Error, Result};
use crate::factored::{frobenius_distance, project_omega, FactoredMatrix};
use crate::observed::ObservedMatrix;
use crate::rng::{seeded, standard_normal};
use crate::solvers::safe_ratio;

/// `A = MN` with standard-normal `M` (`n × r`) and `N` (`r × n`) and a
/// uniformly sampled set of surviving entries.
#[derive(Clone, Debug)]
pub struct SyntheticInstance {
    pub ground_truth: FactoredMatrix,
    pub obs: ObservedMatrix,
    /// Fraction of deleted entries.
    pub p: f64,
    pub seed: u64,
    pub n: usize,
    pub r: usize,
}

/// `round(x)` with halves rounded up.
pub fn round_half_up(x: f64) -> usize {
    libm::floor(x + 0.5) as usize
}

/// Generates a rank-`r` `n × n` instance with a fraction `p` of entries
/// deleted.
///
/// Draw order from `ChaCha8Rng::seed_from_u64(seed)`: the entries of `M`
/// row by row, then those of `N` row by row, then the surviving positions
/// (`round((1 − p)·n²)` of them, without replacement).
pub fn gen_synthetic(n: usize, r: usize, p: f64, seed: u64) -> Result<SyntheticInstance> {
    if r == 0 || r >= n {
        return Err(Error::invalid("synthetic instances need 1 <= r < n"));
    }
    if !(0.0..1.0).contains(&p) {
        return Err(Error::invalid("deleted fraction p must lie in [0, 1)"));
    }
    let total = n.checked_mul(n).ok_or_else(|| Error::invalid("n too large"))?;
    let mut rng = seeded(seed);
    let mut m_rows = Mat::zeros(n, r);
    for i in 0..n {
        for l in 0..r {
            m_rows[(i, l)] = standard_normal(&mut rng);
        }
    }
    // N stored transposed (n × r) so each column of N is a contiguous row here
    let mut n_cols = Mat::zeros(n, r);
    for l in 0..r {
        for j in 0..n {
            n_cols[(j, l)] = standard_normal(&mut rng);
        }
    }
    let keep = round_half_up((1.0 - p) * total as f64).min(total);
    let mut picked: Vec<usize> = index::sample(&mut rng, total, keep).into_vec();
    picked.sort_unstable();

    let mt = m_rows.transpose();
    let nt = n_cols.transpose();
    let entries: Vec<(usize, usize, f64)> = picked
        .iter()
        .map(|&t| {
            let (i, j) = (t / n, t % n);
            (i, j, dot(mt.col(i), nt.col(j)))
        })
        .collect();
    let obs = ObservedMatrix::from_triplets(n, n, entries)?;
    let ground_truth = FactoredMatrix::from_outer(&m_rows, &n_cols)?;
    Ok(SyntheticInstance { ground_truth, obs, p, seed, n, r })
}

/// Ratings with a training half held out for the solvers.
#[derive(Clone, Debug)]
pub struct RatingsDataset {
    /// Every rating (`Ω̂`).
    pub obs_full: ObservedMatrix,
    /// Ratings passed to the solvers (`Ω`).
    pub train: ObservedMatrix,
    /// `Ω̂ \ Ω`.
    pub test: ObservedMatrix,
    pub holdout_fraction: f64,
    pub seed: u64,
}

impl RatingsDataset {
    pub fn new(obs_full: ObservedMatrix, holdout_fraction: f64, seed: u64) -> Result<Self> {
        let (train, test) = split_holdout(&obs_full, holdout_fraction, seed)?;
        Ok(RatingsDataset { obs_full, train, test, holdout_fraction, seed })
    }
}

/// Uniform split without replacement: `round(fraction·nnz)` entries go to
/// the test set, the rest to training. Both keep the canonical order.
pub fn split_holdout(obs: &ObservedMatrix, fraction: f64, seed: u64) -> Result<(ObservedMatrix, ObservedMatrix)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::invalid("holdout fraction must lie in (0, 1)"));
    }
    let nnz = obs.nnz();
    let n_test = round_half_up(fraction * nnz as f64);
    if n_test == 0 || n_test >= nnz {
        return Err(Error::invalid("holdout split leaves an empty side"));
    }
    let mut rng = seeded(seed);
    let mut test_idx: Vec<usize> = index::sample(&mut rng, nnz, n_test).into_vec();
    test_idx.sort_unstable();
    let mut in_test = alloc::vec![false; nnz];
    for &t in &test_idx {
        in_test[t] = true;
    }
    let train_idx: Vec<usize> = (0..nnz).filter(|&t| !in_test[t]).collect();
    Ok((obs.subset(&train_idx), obs.subset(&test_idx)))
}

/// `‖A − Ã‖_F / ‖A‖_F`, computed from the factors.
pub fn rer(ground_truth: &FactoredMatrix, recovered: &FactoredMatrix) -> Result<f64> {
    let d = frobenius_distance(ground_truth, recovered)?;
    Ok(safe_ratio(d, ground_truth.frobenius_norm()))
}

/// Root mean square error of `recovered` over the entries of `eval_set`.
pub fn rmse(eval_set: &ObservedMatrix, recovered: &FactoredMatrix) -> Result<f64> {
    if eval_set.nnz() == 0 {
        return Err(Error::invalid("rmse over an empty evaluation set"));
    }
    let pred = project_omega(recovered, eval_set)?;
    let ss: f64 = pred.iter().zip(eval_set.values()).map(|(p, a)| (a - p) * (a - p)).sum();
    Ok(libm::sqrt(ss / eval_set.nnz() as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn fully_observed_when_nothing_deleted() {
        let inst = gen_synthetic(12, 2, 0.0, 1).unwrap();
        assert_eq!(inst.obs.nnz(), 144);
    }

    #[test]
    fn observed_count_rounds_half_up() {
        // (1 − 0.5)·25 = 12.5 → 13
        let inst = gen_synthetic(5, 1, 0.5, 9).unwrap();
        assert_eq!(inst.obs.nnz(), 13);
        assert_eq!(round_half_up(2.5), 3);
        assert_eq!(round_half_up(2.49), 2);
    }

    #[test]
    fn generation_is_deterministic() {
        let a = gen_synthetic(30, 3, 0.4, 77).unwrap();
        let b = gen_synthetic(30, 3, 0.4, 77).unwrap();
        assert_eq!(a.obs, b.obs);
        assert_eq!(a.ground_truth, b.ground_truth);
        let c = gen_synthetic(30, 3, 0.4, 78).unwrap();
        assert_ne!(a.obs, c.obs);
    }

    #[test]
    fn generation_guards() {
        assert!(gen_synthetic(5, 5, 0.1, 0).is_err());
        assert!(gen_synthetic(5, 0, 0.1, 0).is_err());
        assert!(gen_synthetic(5, 2, 1.0, 0).is_err());
    }

    #[test]
    fn split_rounding() {
        let obs = ObservedMatrix::from_triplets(10, 1, (0..10).map(|i| (i, 0, i as f64)).collect()).unwrap();
        let (train, test) = split_holdout(&obs, 0.1, 3).unwrap();
        assert_eq!((train.nnz(), test.nnz()), (9, 1));
        assert!(split_holdout(&obs, 0.01, 3).is_err());
        assert!(split_holdout(&obs, 0.0, 3).is_err());
    }

    #[test]
    fn metric_examples() {
        let inst = gen_synthetic(10, 2, 0.3, 5).unwrap();
        let truth = &inst.ground_truth;
        assert!(rer(truth, truth).unwrap() < 1e-15);
        assert_eq!(rer(truth, &FactoredMatrix::zeros(10, 10)).unwrap(), 1.0);

        let eval = ObservedMatrix::from_triplets(1, 1, vec![(0, 0, 5.0)]).unwrap();
        let pred = FactoredMatrix::new(Mat::identity(1), vec![3.0], Mat::identity(1)).unwrap();
        assert!((rmse(&eval, &pred).unwrap() - 2.0).abs() < 1e-15);
    }
}
