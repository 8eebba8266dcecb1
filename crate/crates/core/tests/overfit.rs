use ocean::embedding::WordVectors;
use ocean::features::{Example, Featurizer};
use ocean::lexicon::{binarize, TraitVector};
use ocean::models::{model_spec, train_model, TrainConfig};
use ocean::split::DatasetSplit;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Each sentence holds one of eight key words among fillers; its traits are
/// those of the key.
fn examples(rng: &mut ChaCha8Rng, n: usize, words: u32) -> Vec<Example> {
    let keys: Vec<TraitVector> = (0..8)
        .map(|_| TraitVector(std::array::from_fn(|_| rng.random_range(-0.5..0.5))))
        .collect();
    (0..n)
        .map(|_| {
            let len = rng.random_range(5..20);
            let k = rng.random_range(0..keys.len());
            let mut ids: Vec<u32> = (0..len).map(|_| rng.random_range(9..=words)).collect();
            ids[rng.random_range(0..len)] = k as u32 + 1;
            Example {
                ids,
                labels: binarize(&keys[k]).unwrap(),
                traits: keys[k],
            }
        })
        .collect()
}

#[test]
fn catalog_cnn_memorizes_a_small_set() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let words = 50u32;
    let dim = 40;
    let mut tokens = vec!["UNK".to_string()];
    tokens.extend((1..=words).map(|i| format!("w{i}")));
    let mut data = vec![0.0f32; dim];
    data.extend((0..words as usize * dim).map(|_| rng.random_range(-1.0f32..1.0)));
    let wv = WordVectors::new(tokens, dim, data).unwrap();
    let mut spec = model_spec(4).unwrap();
    spec.learning_rate = 0.02;
    let feat = Featurizer::matrix(wv, spec.default_max_len()).unwrap();
    let split = DatasetSplit {
        train: examples(&mut rng, 32, words),
        validation: vec![],
        test: vec![],
    };
    let cfg = TrainConfig {
        epochs: 200,
        batch_size: 32,
        ..TrainConfig::default()
    };
    let (_, history) = train_model(&spec, &split, &feat, &cfg).unwrap();
    let first = history.records[0].train_loss;
    let last = history.last().unwrap().train_loss;
    assert!(last < 0.01 * first, "{first} -> {last}");

    let (_, again) = train_model(&spec, &split, &feat, &cfg).unwrap();
    assert_eq!(history, again);
}
