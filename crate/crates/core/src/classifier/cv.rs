use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::classifier::{predict, train_gbdt, GbdtParams, LabeledDataset};
use crate::error::{Error, Result};

/// Assigns every row a fold in `0..k`. Rows are shuffled with `seed`, stably
/// grouped by class, then dealt round-robin, so each fold holds within one
/// row of its share of every class.
pub fn stratified_folds(labels: &[usize], k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("k must be >= 2, got {k}")));
    }
    if labels.len() < k {
        return Err(Error::InvalidParameter(format!(
            "{} rows cannot fill {k} folds",
            labels.len()
        )));
    }
    let mut order: Vec<usize> = (0..labels.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    order.sort_by_key(|&r| labels[r]);
    let mut fold = vec![0; labels.len()];
    for (i, &r) in order.iter().enumerate() {
        fold[r] = i % k;
    }
    Ok(fold)
}

/// Accuracy on each of the first `folds_evaluated` stratified folds, each
/// model trained on the remaining `k - 1` folds. Fold `f` trains with seed
/// `params.seed + f + 1`; folds run concurrently.
pub fn cross_validate(
    data: &LabeledDataset,
    params: &GbdtParams,
    k: usize,
    folds_evaluated: usize,
) -> Result<Vec<f64>> {
    if folds_evaluated == 0 || folds_evaluated > k {
        return Err(Error::InvalidParameter(format!(
            "folds_evaluated must be in 1..={k}, got {folds_evaluated}"
        )));
    }
    params.validate()?;
    let fold = stratified_folds(&data.labels, k, params.seed)?;
    (0..folds_evaluated)
        .into_par_iter()
        .map(|f| {
            let (test, train): (Vec<usize>, Vec<usize>) =
                (0..data.len()).partition(|&r| fold[r] == f);
            let fold_params = GbdtParams {
                seed: params.seed.wrapping_add(f as u64 + 1),
                ..*params
            };
            let model = train_gbdt(&data.subset(&train), &fold_params)?;
            let held = data.subset(&test);
            let pred = predict(&model, &held.features)?;
            let hits = pred.iter().zip(&held.labels).filter(|(p, y)| p == y).count();
            Ok(hits as f64 / held.len() as f64)
        })
        .collect()
}
