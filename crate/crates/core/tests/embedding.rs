use ocean::embedding::{
    generate_pairs_w1, row_tokens, train_skipgram, EmbeddingConfig, NoiseSampler, WindowMode, WordVectors,
};
use ocean::lexicon::Lexicon;
use ocean::synthetic::cluster_corpus;
use ocean::vocab::build_from_tokens;

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

#[test]
fn shared_contexts_pull_words_together() {
    let corpus = cluster_corpus(2000, 4, 6, 3);
    let lex = Lexicon::default();
    let vocab = build_from_tokens(corpus.sentences.iter().map(Vec::as_slice).collect(), 1000, &lex).unwrap();
    let pairs: Vec<_> = corpus.sentences.iter().flat_map(|s| generate_pairs_w1(&vocab.encode(s))).collect();
    let sampler = NoiseSampler::new(vocab.counts()).unwrap();
    let cfg = EmbeddingConfig {
        dim: 8,
        num_sampled: 5,
        window: WindowMode::AllWordsW1,
        epochs: 20,
        ..EmbeddingConfig::embedding1()
    };
    let run = train_skipgram(&pairs, vocab.len() + 1, &sampler, &cfg).unwrap();
    let first: Vec<f64> = run.batch_loss.iter().take(5).copied().collect();
    assert!(mean(&first) > run.epoch_loss[cfg.epochs - 1]);

    let wv = WordVectors::new(row_tokens(&vocab, None), cfg.dim, run.matrix.published(cfg.window, 0)).unwrap();
    let ids = |c: &Vec<String>| c.iter().map(|w| wv.id(w).unwrap()).collect::<Vec<_>>();
    let (a, b) = (ids(&corpus.clusters[0]), ids(&corpus.clusters[1]));
    let mut within = Vec::new();
    let mut across = Vec::new();
    for g in [&a, &b] {
        for (i, &x) in g.iter().enumerate() {
            for &y in &g[i + 1..] {
                within.push(wv.cosine(x, y));
            }
        }
    }
    for &x in &a {
        for &y in &b {
            across.push(wv.cosine(x, y));
        }
    }
    assert!(mean(&within) > mean(&across) + 0.3, "{} vs {}", mean(&within), mean(&across));

    let nn = wv.nearest_neighbors(&corpus.clusters[0][0], 3).unwrap();
    let hits = nn.iter().filter(|(t, _)| corpus.clusters[0].contains(t)).count();
    assert!(hits >= 2, "{nn:?}");
}
