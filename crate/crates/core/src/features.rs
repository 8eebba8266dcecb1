//! Turning encoded sentences into network inputs.
//!
//! Bag-of-words inputs are binary presence vectors of width K: column `k-1`
//! is set when vocabulary id `k` occurs. UNK is not a column. Embedding
//! inputs are `p × D × 1` sentence matrices.

use autonet::Tensor;
use serde::{Deserialize, Serialize};

use crate::corpus::LabeledSentence;
use crate::embedding::WordVectors;
use crate::lexicon::{BinaryLabels, TraitVector};
use crate::split::DatasetSplit;
use crate::vocab::{Vocabulary, UNK_ID};
use crate::{Error, Result};

pub const DEFAULT_MAX_LEN: usize = 32;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Example {
    pub ids: Vec<u32>,
    pub traits: TraitVector,
    pub labels: BinaryLabels,
}

pub fn encode_sentence(s: &LabeledSentence, vocab: &Vocabulary) -> Example {
    Example {
        ids: vocab.encode(&s.tokens),
        traits: s.traits,
        labels: s.labels,
    }
}

pub fn encode_split(split: &DatasetSplit, vocab: &Vocabulary) -> DatasetSplit<Example> {
    let enc = |part: &[LabeledSentence]| part.iter().map(|s| encode_sentence(s, vocab)).collect();
    DatasetSplit {
        train: enc(&split.train),
        validation: enc(&split.validation),
        test: enc(&split.test),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FeatureKind {
    Bow,
    Embedding,
}

#[derive(Clone, Debug)]
pub enum Featurizer {
    Bow { width: usize },
    Matrix { vectors: WordVectors, max_len: usize },
}

impl Featurizer {
    pub fn bow(vocab: &Vocabulary) -> Self {
        Featurizer::Bow { width: vocab.len() }
    }

    pub fn matrix(vectors: WordVectors, max_len: usize) -> Result<Self> {
        if max_len == 0 {
            return Err(Error::Invalid("sentence length must be at least 1".into()));
        }
        Ok(Featurizer::Matrix { vectors, max_len })
    }

    pub fn kind(&self) -> FeatureKind {
        match self {
            Featurizer::Bow { .. } => FeatureKind::Bow,
            Featurizer::Matrix { .. } => FeatureKind::Embedding,
        }
    }

    /// Per-sample input shape: `[K]` or `[p, D, 1]`.
    pub fn input_shape(&self) -> Vec<usize> {
        match self {
            Featurizer::Bow { width } => vec![*width],
            Featurizer::Matrix { vectors, max_len } => vec![*max_len, vectors.dim(), 1],
        }
    }

    pub fn features<'a>(&self, batch: impl IntoIterator<Item = &'a [u32]>) -> Tensor<f32> {
        let rows: Vec<&[u32]> = batch.into_iter().collect();
        let shape = self.input_shape();
        let per: usize = shape.iter().product();
        let mut data = vec![0.0f32; rows.len() * per];
        for (dst, ids) in data.chunks_mut(per.max(1)).zip(&rows) {
            match self {
                Featurizer::Bow { width } => {
                    for &id in ids.iter() {
                        if id != UNK_ID && (id as usize) <= *width {
                            dst[id as usize - 1] = 1.0;
                        }
                    }
                }
                Featurizer::Matrix { vectors, max_len } => {
                    dst.copy_from_slice(&vectors.embed_sentence(ids, *max_len));
                }
            }
        }
        let mut full = vec![rows.len()];
        full.extend(shape);
        Tensor::new(full, data).expect("feature buffer matches its shape")
    }

    pub fn examples(&self, examples: &[&Example]) -> Tensor<f32> {
        self.features(examples.iter().map(|e| e.ids.as_slice()))
    }
}

/// `B × 5` trait targets.
pub fn trait_targets(examples: &[&Example]) -> Tensor<f32> {
    let data = examples.iter().flat_map(|e| e.traits.0.iter().map(|&v| v as f32)).collect();
    Tensor::new(vec![examples.len(), 5], data).expect("five traits per row")
}

/// Row-major `B × 5` bits.
pub fn label_bits(examples: &[&Example]) -> Vec<u8> {
    examples.iter().flat_map(|e| e.labels.0).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bow_presence() {
        let f = Featurizer::Bow { width: 4 };
        let t = f.features([&[2u32, 2, 0, 4][..], &[][..]]);
        assert_eq!(t.shape(), &[2, 4]);
        assert_eq!(t.data(), &[0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn matrix_shape() {
        let wv = WordVectors::new(vec!["UNK".into(), "a".into()], 2, vec![0.0, 0.0, 1.0, 2.0]).unwrap();
        let f = Featurizer::matrix(wv, 3).unwrap();
        let t = f.features([&[1u32][..]]);
        assert_eq!(t.shape(), &[1, 3, 2, 1]);
        assert_eq!(t.data(), &[1.0, 2.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(f.kind(), FeatureKind::Embedding);
    }
}
