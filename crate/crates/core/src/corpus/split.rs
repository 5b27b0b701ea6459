use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{CorpusError, Document};

/// Document-level train/test partition. The test side holds
/// `round(test_fraction * n)` documents; both sides keep corpus order.
pub fn split_corpus(
    corpus: &[Document],
    test_fraction: f64,
    seed: u64,
) -> Result<(Vec<Document>, Vec<Document>), CorpusError> {
    if corpus.is_empty() {
        return Err(CorpusError::Empty("cannot split an empty corpus"));
    }
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(CorpusError::Config(format!(
            "test fraction {test_fraction} outside (0, 1)"
        )));
    }
    let n = corpus.len();
    let n_test = (test_fraction * n as f64).round() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut is_test = vec![false; n];
    for &i in &order[..n_test] {
        is_test[i] = true;
    }
    let (test, train): (Vec<_>, Vec<_>) = corpus
        .iter()
        .cloned()
        .zip(is_test)
        .partition(|(_, t)| *t);
    Ok((
        train.into_iter().map(|(d, _)| d).collect(),
        test.into_iter().map(|(d, _)| d).collect(),
    ))
}
