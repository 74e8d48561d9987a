use std::collections::{BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{CorpusError, FunctionRecord};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Splits {
    pub train: Vec<FunctionRecord>,
    pub validation: Vec<FunctionRecord>,
    pub test: Vec<FunctionRecord>,
}

/// Repo counts per split by largest remainder, so they sum to `n`.
fn allocate(n: usize, ratios: [f64; 3]) -> [usize; 3] {
    let exact: Vec<f64> = ratios.iter().map(|r| r * n as f64).collect();
    let mut counts: [usize; 3] = [0; 3];
    for (c, e) in counts.iter_mut().zip(&exact) {
        *c = e.floor() as usize;
    }
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&a, &b| {
        let fa = exact[a] - exact[a].floor();
        let fb = exact[b] - exact[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    let mut left = n.saturating_sub(counts.iter().sum());
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        counts[i] += 1;
        left -= 1;
    }
    counts
}

/// Train/validation/test split with every repo confined to one split.
pub fn split_dataset(
    records: Vec<FunctionRecord>,
    ratios: [f64; 3],
    seed: u64,
) -> Result<Splits, CorpusError> {
    let valid = ratios.iter().all(|r| r.is_finite() && *r >= 0.0)
        && (ratios.iter().sum::<f64>() - 1.0).abs() < 1e-9;
    if !valid {
        return Err(CorpusError::BadRatios(ratios));
    }
    let mut repos: Vec<&str> = records
        .iter()
        .map(|r| r.repo.as_str())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    repos.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let [n_train, n_val, _] = allocate(repos.len(), ratios);
    let assignment: HashMap<String, usize> = repos
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let split = if i < n_train {
                0
            } else if i < n_train + n_val {
                1
            } else {
                2
            };
            (r.to_string(), split)
        })
        .collect();
    if repos.len() < 3 {
        log::warn!("only {} repositories; some splits will be empty", repos.len());
    }
    let mut splits = Splits::default();
    for r in records {
        match assignment[&r.repo] {
            0 => splits.train.push(r),
            1 => splits.validation.push(r),
            _ => splits.test.push(r),
        }
    }
    Ok(splits)
}
