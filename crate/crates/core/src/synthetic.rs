//! Seeded synthetic corpora with planted structure, for tests and smoke
//! runs of the full pipeline.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::LabeledSentence;
use crate::lexicon::{BinaryLabels, Lexicon, TraitVector};
use crate::Result;

/// Sentences alternating context and member words of one of two clusters;
/// members of a cluster share all their contexts.
#[derive(Clone, Debug)]
pub struct ClusterCorpus {
    pub sentences: Vec<Vec<String>>,
    pub clusters: [Vec<String>; 2],
}

pub fn cluster_corpus(n_sentences: usize, members: usize, contexts: usize, seed: u64) -> ClusterCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names = |prefix: &str, n: usize| (0..n).map(|i| format!("{prefix}{i}")).collect::<Vec<_>>();
    let clusters = [names("alpha", members), names("beta", members)];
    let ctx = [names("actx", contexts), names("bctx", contexts)];
    let sentences = (0..n_sentences)
        .map(|_| {
            let c = rng.random_range(0..2);
            let len = rng.random_range(2..5) * 2 + 1;
            (0..len)
                .map(|i| {
                    let pool = if i % 2 == 0 { &ctx[c] } else { &clusters[c] };
                    pool.choose(&mut rng).unwrap().clone()
                })
                .collect()
        })
        .collect();
    ClusterCorpus { sentences, clusters }
}

/// A labeled corpus in which each sentence holds exactly one of 32
/// adjectives, one per label pattern, preceded by two distinct cue words of
/// that adjective, among random filler words.
///
/// Adjectives are UNK to a supervised model, so the label is only
/// recoverable through the cues. Cues of one adjective appear next to each
/// other, which gives them a shared context that a distributional embedding
/// can pick up.
#[derive(Clone, Debug)]
pub struct PlantedCorpus {
    pub lexicon: Lexicon,
    pub sentences: Vec<LabeledSentence>,
}

const CUES: usize = 4;

pub fn planted_trait_corpus(n_sentences: usize, fillers: usize, seed: u64) -> Result<PlantedCorpus> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let entries: Vec<(String, TraitVector)> = (0..32u8)
        .map(|p| {
            let bits = BinaryLabels::from_pattern(p);
            let v = bits.0.map(|b| {
                let m = rng.random_range(0.2..0.6);
                if b == 1 {
                    m
                } else {
                    -m
                }
            });
            (format!("adj{p:02}"), TraitVector(v))
        })
        .collect();
    let lexicon = Lexicon::from_entries(entries.iter().map(|(k, v)| (k.as_str(), *v)))?;
    let filler: Vec<String> = (0..fillers).map(|i| format!("w{i:03}")).collect();
    let mut sentences = Vec::with_capacity(n_sentences);
    for _ in 0..n_sentences {
        let (adj, _) = entries.choose(&mut rng).unwrap();
        let cues: Vec<usize> = (0..CUES).collect();
        let pick: Vec<&usize> = cues.choose_multiple(&mut rng, 2).collect();
        let len = rng.random_range(5..10);
        let at = rng.random_range(0..len - 2);
        let mut tokens: Vec<String> = (0..len).map(|_| filler.choose(&mut rng).unwrap().clone()).collect();
        tokens[at] = format!("{adj}c{}", pick[0]);
        tokens[at + 1] = format!("{adj}c{}", pick[1]);
        tokens[at + 2] = adj.clone();
        sentences.push(LabeledSentence::from_tokens(tokens, &lexicon).expect("sentence holds an adjective"));
    }
    Ok(PlantedCorpus { lexicon, sentences })
}
