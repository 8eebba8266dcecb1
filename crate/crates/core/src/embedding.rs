//! Skip-gram word embeddings trained with negative sampling.
//!
//! Row ids follow the vocabulary: row 0 is the UNK/pad row and stays zero,
//! rows 1..=K are vocabulary words. In [`WindowMode::AdjectivesW2`] the
//! lexicon adjectives get extra target rows K+1..=K+A in lexicographic order.
//!
//! Embedding file format: a first line `V D`, then one line per row,
//! `token v1 … vD`, with row 0 written as `UNK`.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use autonet::activation::{log_sigmoid, sigmoid_scalar};
use autonet::Real;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::LabeledSentence;
use crate::lexicon::Lexicon;
use crate::vocab::{Vocabulary, UNK_ID, UNK_TOKEN};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowMode {
    /// Every in-vocabulary word is a target; contexts are its two neighbours.
    AllWordsW1,
    /// Only adjectives are targets; contexts are up to two words either side.
    AdjectivesW2,
}

impl FromStr for WindowMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all_words_w1" | "w1" => Ok(WindowMode::AllWordsW1),
            "adjectives_w2" | "adj_w2" => Ok(WindowMode::AdjectivesW2),
            _ => Err(Error::Invalid(format!("unknown window mode {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingConfig {
    pub dim: usize,
    pub num_sampled: usize,
    pub window: WindowMode,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl EmbeddingConfig {
    fn preset(dim: usize, num_sampled: usize, window: WindowMode) -> Self {
        Self {
            dim,
            num_sampled,
            window,
            learning_rate: 1.0,
            epochs: 5,
            batch_size: 256,
            seed: 0,
        }
    }

    /// Size 40, 20 negatives, window 1 over every word.
    pub fn embedding1() -> Self {
        Self::preset(40, 20, WindowMode::AllWordsW1)
    }

    /// Size 250, 50 negatives, window 1 over every word.
    pub fn embedding2() -> Self {
        Self::preset(250, 50, WindowMode::AllWordsW1)
    }

    /// Size 250, 50 negatives, window 2 around adjectives.
    pub fn embedding3() -> Self {
        Self::preset(250, 50, WindowMode::AdjectivesW2)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.num_sampled == 0 || self.batch_size == 0 {
            return Err(Error::Invalid("embedding dim, num_sampled and batch_size must be positive".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Invalid(format!("bad embedding learning rate {}", self.learning_rate)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SkipGramPair {
    pub target: u32,
    pub context: u32,
}

fn pair(target: u32, context: u32) -> SkipGramPair {
    SkipGramPair { target, context }
}

/// Pairs each in-vocabulary word with its in-vocabulary left and right
/// neighbours; UNK is neither target nor context.
pub fn generate_pairs_w1(ids: &[u32]) -> Vec<SkipGramPair> {
    let mut out = Vec::new();
    for (t, &id) in ids.iter().enumerate() {
        if id == UNK_ID {
            continue;
        }
        if t > 0 && ids[t - 1] != UNK_ID {
            out.push(pair(id, ids[t - 1]));
        }
        if t + 1 < ids.len() && ids[t + 1] != UNK_ID {
            out.push(pair(id, ids[t + 1]));
        }
    }
    out
}

/// Target ids of lexicon adjectives, appended after the vocabulary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdjectiveIds {
    base: u32,
    words: Vec<String>,
    index: HashMap<String, u32>,
}

impl AdjectiveIds {
    pub fn new(vocab: &Vocabulary, lex: &Lexicon) -> Self {
        let base = vocab.len() as u32 + 1;
        let words: Vec<String> = lex.iter().map(|(k, _)| k.to_string()).collect();
        let index = words.iter().enumerate().map(|(i, w)| (w.clone(), base + i as u32)).collect();
        Self { base, words, index }
    }

    pub fn id(&self, adjective: &str) -> Option<u32> {
        self.index.get(adjective).copied()
    }

    pub fn first(&self) -> u32 {
        self.base
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }
}

/// For every adjective occurrence, pairs its target id with each
/// in-vocabulary word at distance 1 or 2.
pub fn generate_pairs_adj_w2<S: AsRef<str>>(
    tokens: &[S],
    positions: &[usize],
    vocab: &Vocabulary,
    adjectives: &AdjectiveIds,
) -> Result<Vec<SkipGramPair>> {
    let mut out = Vec::new();
    for &p in positions {
        let tok = tokens
            .get(p)
            .ok_or_else(|| Error::Invalid(format!("adjective position {p} out of range for {} tokens", tokens.len())))?;
        let target = adjectives
            .id(tok.as_ref())
            .ok_or_else(|| Error::Invalid(format!("token {:?} at {p} is not a lexicon adjective", tok.as_ref())))?;
        let lo = p.saturating_sub(2);
        let hi = (p + 2).min(tokens.len() - 1);
        for q in (lo..=hi).filter(|&q| q != p) {
            let c = vocab.id(tokens[q].as_ref());
            if c != UNK_ID {
                out.push(pair(target, c));
            }
        }
    }
    Ok(out)
}

/// Draws word ids with probability proportional to `count^0.75`.
#[derive(Clone, Debug)]
pub struct NoiseSampler {
    dist: WeightedIndex<f64>,
    probs: Vec<f64>,
}

impl NoiseSampler {
    /// `counts[id]` is the corpus frequency of `id`; ids with zero count are
    /// never drawn.
    pub fn new(counts: &[u64]) -> Result<Self> {
        let weights: Vec<f64> = counts.iter().map(|&c| (c as f64).powf(0.75)).collect();
        if weights.iter().filter(|&&w| w > 0.0).count() < 2 {
            return Err(Error::Invalid("negative sampling needs at least two words with nonzero count".into()));
        }
        let total: f64 = weights.iter().sum();
        let probs = weights.iter().map(|w| w / total).collect();
        let dist = WeightedIndex::new(&weights).map_err(|e| Error::Invalid(e.to_string()))?;
        Ok(Self { dist, probs })
    }

    pub fn probability(&self, id: u32) -> f64 {
        self.probs.get(id as usize).copied().unwrap_or(0.0)
    }

    /// One draw, rejecting `exclude`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, exclude: u32) -> u32 {
        loop {
            let id = self.dist.sample(rng) as u32;
            if id != exclude {
                return id;
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NsGrads<T> {
    pub target: Vec<T>,
    pub context: Vec<T>,
    /// Row-major `k × D`, one row per negative.
    pub negatives: Vec<T>,
}

/// `−log σ(c·t) − Σ_j log σ(−n_j·t)` and its gradients with respect to the
/// target vector, the context vector and every negative vector.
pub fn negative_sampling_loss<T: Real>(target: &[T], context: &[T], negatives: &[&[T]]) -> Result<(T, NsGrads<T>)> {
    if negatives.is_empty() {
        return Err(Error::Invalid("negative sampling needs k >= 1".into()));
    }
    let d = target.len();
    if context.len() != d || negatives.iter().any(|n| n.len() != d) {
        return Err(Error::Invalid("embedding vectors differ in length".into()));
    }
    let dot = |a: &[T], b: &[T]| a.iter().zip(b).fold(T::zero(), |s, (&x, &y)| s + x * y);
    let pos = dot(context, target);
    let mut loss = -log_sigmoid(pos);
    let g_pos = sigmoid_scalar(pos) - T::one();
    let mut g_t: Vec<T> = context.iter().map(|&c| g_pos * c).collect();
    let g_c: Vec<T> = target.iter().map(|&t| g_pos * t).collect();
    let mut g_n = Vec::with_capacity(negatives.len() * d);
    for n in negatives {
        let s = dot(n, target);
        loss -= log_sigmoid(-s);
        let g = sigmoid_scalar(s);
        for (gt, &nv) in g_t.iter_mut().zip(n.iter()) {
            *gt += g * nv;
        }
        g_n.extend(target.iter().map(|&t| g * t));
    }
    Ok((
        loss,
        NsGrads {
            target: g_t,
            context: g_c,
            negatives: g_n,
        },
    ))
}

/// Input (target) and output (context) vectors, `rows × dim` each.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingMatrix {
    pub rows: usize,
    pub dim: usize,
    pub input: Vec<f32>,
    pub output: Vec<f32>,
}

impl EmbeddingMatrix {
    /// Input rows uniform in ±0.5/dim, output rows zero, row 0 zero in both.
    pub fn init<R: Rng + ?Sized>(rows: usize, dim: usize, rng: &mut R) -> Self {
        let a = 0.5 / dim as f32;
        let mut input = vec![0.0; rows * dim];
        for v in input.iter_mut().skip(dim) {
            *v = rng.random_range(-a..a);
        }
        Self {
            rows,
            dim,
            input,
            output: vec![0.0; rows * dim],
        }
    }

    pub fn input_row(&self, id: u32) -> &[f32] {
        &self.input[id as usize * self.dim..(id as usize + 1) * self.dim]
    }

    pub fn output_row(&self, id: u32) -> &[f32] {
        &self.output[id as usize * self.dim..(id as usize + 1) * self.dim]
    }

    pub fn is_finite(&self) -> bool {
        self.input.iter().chain(&self.output).all(|v| v.is_finite())
    }

    /// The vectors used downstream. With window 1 these are the input
    /// vectors. With the adjective window, vocabulary words are only ever
    /// contexts, so their rows come from the output vectors while adjective
    /// rows (`first_adjective..`) keep their input vectors.
    pub fn published(&self, mode: WindowMode, first_adjective: u32) -> Vec<f32> {
        match mode {
            WindowMode::AllWordsW1 => self.input.clone(),
            WindowMode::AdjectivesW2 => {
                let split = first_adjective as usize * self.dim;
                let mut v = self.output[..split].to_vec();
                v.extend_from_slice(&self.input[split..]);
                v
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct SkipGramRun {
    pub matrix: EmbeddingMatrix,
    /// Mean loss of every minibatch, in training order.
    pub batch_loss: Vec<f64>,
    /// Mean loss per epoch.
    pub epoch_loss: Vec<f64>,
}

/// Sparse gradient rows in first-touch order.
#[derive(Default)]
struct RowGrads {
    slot: HashMap<u32, usize>,
    rows: Vec<u32>,
    data: Vec<f32>,
}

impl RowGrads {
    fn add(&mut self, row: u32, g: &[f32]) {
        let d = g.len();
        let i = *self.slot.entry(row).or_insert_with(|| {
            self.rows.push(row);
            self.data.extend(std::iter::repeat_n(0.0, d));
            self.rows.len() - 1
        });
        for (a, &b) in self.data[i * d..(i + 1) * d].iter_mut().zip(g) {
            *a += b;
        }
    }

    fn merge(&mut self, other: RowGrads, d: usize) {
        for (k, row) in other.rows.iter().enumerate() {
            self.add(*row, &other.data[k * d..(k + 1) * d]);
        }
    }

    fn apply(&self, params: &mut [f32], d: usize, scale: f32) {
        for (k, &row) in self.rows.iter().enumerate() {
            let dst = &mut params[row as usize * d..(row as usize + 1) * d];
            for (p, &g) in dst.iter_mut().zip(&self.data[k * d..(k + 1) * d]) {
                *p -= scale * g;
            }
        }
    }
}

const PAIR_CHUNK: usize = 32;

/// Minibatch SGD on the mean negative-sampling loss.
///
/// Each epoch shuffles the pairs and draws every negative from the seeded
/// generator before the gradients of the batch are computed, so results are
/// bitwise reproducible regardless of thread count. Row 0 is never updated.
pub fn train_skipgram(pairs: &[SkipGramPair], rows: usize, sampler: &NoiseSampler, cfg: &EmbeddingConfig) -> Result<SkipGramRun> {
    cfg.validate()?;
    if pairs.is_empty() {
        return Err(Error::Invalid("no skip-gram pairs to train on".into()));
    }
    if let Some(p) = pairs.iter().find(|p| p.target as usize >= rows || p.context as usize >= rows) {
        return Err(Error::Invalid(format!("pair {p:?} outside {rows} rows")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut m = EmbeddingMatrix::init(rows, cfg.dim, &mut rng);
    let d = cfg.dim;
    let k = cfg.num_sampled;
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    let mut batch_loss = Vec::new();
    let mut epoch_loss = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let negs: Vec<u32> = batch
                .iter()
                .flat_map(|&i| {
                    let c = pairs[i].context;
                    (0..k).map(|_| sampler.sample(&mut rng, c)).collect::<Vec<_>>()
                })
                .collect();
            let work: Vec<(usize, &[usize])> = batch.chunks(PAIR_CHUNK).enumerate().collect();
            let partial: Vec<Result<(f64, RowGrads, RowGrads)>> = work
                .par_iter()
                .map(|&(ci, chunk)| {
                    let mut gin = RowGrads::default();
                    let mut gout = RowGrads::default();
                    let mut loss = 0.0;
                    for (j, &i) in chunk.iter().enumerate() {
                        let p = pairs[i];
                        let off = (ci * PAIR_CHUNK + j) * k;
                        let neg_ids = &negs[off..off + k];
                        let neg_rows: Vec<&[f32]> = neg_ids.iter().map(|&n| m.output_row(n)).collect();
                        let (l, g) = negative_sampling_loss(m.input_row(p.target), m.output_row(p.context), &neg_rows)?;
                        loss += f64::from(l);
                        gin.add(p.target, &g.target);
                        gout.add(p.context, &g.context);
                        for (n, gn) in neg_ids.iter().zip(g.negatives.chunks(d)) {
                            gout.add(*n, gn);
                        }
                    }
                    Ok((loss, gin, gout))
                })
                .collect();
            let mut gin = RowGrads::default();
            let mut gout = RowGrads::default();
            let mut loss = 0.0;
            for r in partial {
                let (l, a, b) = r?;
                loss += l;
                gin.merge(a, d);
                gout.merge(b, d);
            }
            let mean = loss / batch.len() as f64;
            if !mean.is_finite() {
                return Err(Error::Diverged {
                    epoch: epoch + 1,
                    batch: batch_loss.len() + 1,
                    loss: mean,
                });
            }
            let scale = (cfg.learning_rate / batch.len() as f64) as f32;
            gin.apply(&mut m.input, d, scale);
            gout.apply(&mut m.output, d, scale);
            batch_loss.push(mean);
            total += loss;
        }
        let e = total / pairs.len() as f64;
        log::info!("skip-gram epoch {}: mean loss {e:.5}", epoch + 1);
        epoch_loss.push(e);
    }
    Ok(SkipGramRun {
        matrix: m,
        batch_loss,
        epoch_loss,
    })
}

/// A published embedding: one named row per id.
#[derive(Clone, Debug, PartialEq)]
pub struct WordVectors {
    tokens: Vec<String>,
    dim: usize,
    data: Vec<f32>,
    index: HashMap<String, u32>,
}

impl WordVectors {
    pub fn new(tokens: Vec<String>, dim: usize, data: Vec<f32>) -> Result<Self> {
        if dim == 0 || data.len() != tokens.len() * dim {
            return Err(Error::Invalid(format!(
                "{} values do not form {} rows of {dim}",
                data.len(),
                tokens.len()
            )));
        }
        let index = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();
        Ok(Self { tokens, dim, data, index })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> usize {
        self.tokens.len()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn row(&self, id: u32) -> &[f32] {
        &self.data[id as usize * self.dim..(id as usize + 1) * self.dim]
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    pub fn cosine(&self, a: u32, b: u32) -> f64 {
        cosine(self.row(a), self.row(b))
    }

    /// The `k` rows closest to `word` by cosine similarity, excluding the
    /// word itself and UNK.
    pub fn nearest_neighbors(&self, word: &str, k: usize) -> Result<Vec<(String, f64)>> {
        let q = self.id(word).filter(|&i| i != UNK_ID).ok_or_else(|| Error::UnknownWord(word.to_string()))?;
        let mut scored: Vec<(u32, f64)> = (1..self.rows() as u32)
            .filter(|&i| i != q)
            .map(|i| (i, self.cosine(q, i)))
            .collect();
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        Ok(scored
            .into_iter()
            .take(k)
            .map(|(i, c)| (self.tokens[i as usize].clone(), c))
            .collect())
    }

    /// `p × D` sentence matrix: row `i` is the vector of `ids[i]`; shorter
    /// sentences are padded with row 0, longer ones truncated.
    pub fn embed_sentence(&self, ids: &[u32], p: usize) -> Vec<f32> {
        let mut out = vec![0.0; p * self.dim];
        for (dst, &id) in out.chunks_mut(self.dim).zip(ids) {
            if (id as usize) < self.rows() {
                dst.copy_from_slice(self.row(id));
            }
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.rows(), self.dim);
        for (t, row) in self.tokens.iter().zip(self.data.chunks(self.dim)) {
            out.push_str(t);
            for v in row {
                write!(out, " {v}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let bad = |line: usize, message: String| Error::Parse {
            path: origin.to_path_buf(),
            line,
            message,
        };
        let mut lines = text.lines();
        let head = lines.next().unwrap_or_default();
        let (v, d) = head
            .split_once(' ')
            .and_then(|(a, b)| Some((a.parse::<usize>().ok()?, b.parse::<usize>().ok()?)))
            .ok_or_else(|| bad(1, format!("bad header {head:?}")))?;
        let mut tokens = Vec::with_capacity(v);
        let mut data = Vec::with_capacity(v * d);
        for (i, line) in lines.enumerate() {
            let mut f = line.split(' ');
            let tok = f.next().unwrap_or_default();
            let before = data.len();
            for x in f {
                data.push(x.parse::<f32>().map_err(|_| bad(i + 2, format!("bad value {x:?}")))?);
            }
            if data.len() - before != d {
                return Err(bad(i + 2, format!("expected {d} values")));
            }
            tokens.push(tok.to_string());
        }
        if tokens.len() != v {
            return Err(bad(1, format!("header says {v} rows, found {}", tokens.len())));
        }
        if tokens.first().map(String::as_str) != Some(UNK_TOKEN) {
            return Err(bad(2, "row 0 must be UNK".into()));
        }
        Self::new(tokens, d, data)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    /// Checks that rows `0..=K` are named like the vocabulary ids.
    pub fn check_vocabulary(&self, vocab: &Vocabulary) -> Result<()> {
        let k = vocab.len();
        if self.rows() < k + 1 || self.tokens[..=k] != vocab.tokens()[..] {
            return Err(Error::FeatureMismatch("embedding rows do not follow the vocabulary ids".into()));
        }
        Ok(())
    }
}

pub fn cosine(a: &[f32], b: &[f32]) -> f64 {
    let (mut ab, mut aa, mut bb) = (0.0f64, 0.0f64, 0.0f64);
    for (&x, &y) in a.iter().zip(b) {
        let (x, y) = (f64::from(x), f64::from(y));
        ab += x * y;
        aa += x * x;
        bb += y * y;
    }
    if aa == 0.0 || bb == 0.0 {
        0.0
    } else {
        ab / (aa.sqrt() * bb.sqrt())
    }
}

/// Row names for a matrix trained over `vocab` (and `adjectives`, when
/// present).
pub fn row_tokens(vocab: &Vocabulary, adjectives: Option<&AdjectiveIds>) -> Vec<String> {
    let mut t = vocab.tokens().to_vec();
    if let Some(a) = adjectives {
        t.extend(a.words().iter().cloned());
    }
    t
}

/// A published embedding with the trace of its training run.
#[derive(Clone, Debug)]
pub struct TrainedEmbedding {
    pub vectors: WordVectors,
    pub run: SkipGramRun,
    pub pairs: usize,
}

/// Generates the pairs of `cfg.window` over `sentences`, trains, and
/// publishes the matrix. Adjective mode needs `lex`. Negatives are drawn
/// from vocabulary words only.
pub fn train_embedding(
    sentences: &[LabeledSentence],
    vocab: &Vocabulary,
    lex: Option<&Lexicon>,
    cfg: &EmbeddingConfig,
) -> Result<TrainedEmbedding> {
    let (pairs, adjectives) = match cfg.window {
        WindowMode::AllWordsW1 => (
            sentences.iter().flat_map(|s| generate_pairs_w1(&vocab.encode(&s.tokens))).collect::<Vec<_>>(),
            None,
        ),
        WindowMode::AdjectivesW2 => {
            let lex = lex.ok_or_else(|| Error::Invalid("adjective windows need the lexicon".into()))?;
            let adj = AdjectiveIds::new(vocab, lex);
            let mut pairs = Vec::new();
            for s in sentences {
                pairs.extend(generate_pairs_adj_w2(&s.tokens, &s.adjective_positions, vocab, &adj)?);
            }
            (pairs, Some(adj))
        }
    };
    let rows = vocab.len() + 1 + adjectives.as_ref().map_or(0, |a| a.words().len());
    let mut counts = vocab.counts().to_vec();
    counts.resize(rows, 0);
    let sampler = NoiseSampler::new(&counts)?;
    let run = train_skipgram(&pairs, rows, &sampler, cfg)?;
    let first = adjectives.as_ref().map_or(rows as u32, AdjectiveIds::first);
    let vectors = WordVectors::new(row_tokens(vocab, adjectives.as_ref()), cfg.dim, run.matrix.published(cfg.window, first))?;
    Ok(TrainedEmbedding {
        vectors,
        run,
        pairs: pairs.len(),
    })
}
