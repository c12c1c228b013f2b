use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{QAPair, Split};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRatios {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        SplitRatios { train: 0.70, validation: 0.15, test: 0.15 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Splits {
    pub train: Vec<QAPair>,
    pub validation: Vec<QAPair>,
    pub test: Vec<QAPair>,
}

/// Shuffles `pairs` with a seeded ChaCha8 generator and cuts it into
/// train/validation/test. Validation and test get `floor(n * ratio)` pairs;
/// train takes the rest.
pub fn split_dataset(mut pairs: Vec<QAPair>, ratios: SplitRatios, seed: u64) -> Result<Splits> {
    let SplitRatios { train, validation, test } = ratios;
    if [train, validation, test].iter().any(|r| !(0.0..=1.0).contains(r)) {
        return Err(Error::Split(format!("ratios must lie in [0, 1], got {ratios:?}")));
    }
    if ((train + validation + test) - 1.0).abs() > 1e-9 {
        return Err(Error::Split(format!("ratios must sum to 1, got {ratios:?}")));
    }
    let n = pairs.len();
    if n < 3 {
        return Err(Error::Split(format!("need at least 3 pairs, got {n}")));
    }
    if pairs.iter().any(|p| p.split.is_some()) {
        return Err(Error::Split("input already carries split labels".into()));
    }

    // The epsilon keeps e.g. 100 * 0.15 from flooring to 14.
    let size = |r: f64| ((n as f64) * r + 1e-9).floor() as usize;
    let (n_val, n_test) = (size(validation), size(test));

    pairs.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let label = |mut v: Vec<QAPair>, s: Split| {
        v.iter_mut().for_each(|p| p.split = Some(s));
        v
    };
    let test_part = pairs.split_off(n - n_test);
    let val_part = pairs.split_off(n - n_test - n_val);
    Ok(Splits {
        train: label(pairs, Split::Train),
        validation: label(val_part, Split::Validation),
        test: label(test_part, Split::Test),
    })
}
