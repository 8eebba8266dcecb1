//! Seeded 70/10/20 train/validation/test partition stratified on labels.
//!
//! Part sizes are fixed first: `round(0.7 N)`, `round(0.1 N)` and the rest.
//! How many items of each 5-bit label pattern go to each part is then chosen
//! by local search on a count table, balancing per-trait positive rates
//! first and per-pattern shares of patterns with at least
//! [`MIN_STRATUM`] members second. Finally the items, shuffled under the
//! seed, are dealt to parts according to the table.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::LabeledSentence;
use crate::lexicon::BinaryLabels;
use crate::{Error, Result};

/// Smallest input for which every part is non-empty.
pub const MIN_SENTENCES: usize = 10;

/// Patterns with fewer members are balanced only through their traits.
pub const MIN_STRATUM: usize = 10;

const PATTERNS: usize = 32;
const PARTS: usize = 3;
const TRAIT_WEIGHT: f64 = 4.0;

#[derive(Clone, Debug, PartialEq)]
pub struct DatasetSplit<T = LabeledSentence> {
    pub train: Vec<T>,
    pub validation: Vec<T>,
    pub test: Vec<T>,
}

impl<T> DatasetSplit<T> {
    pub fn sizes(&self) -> (usize, usize, usize) {
        (self.train.len(), self.validation.len(), self.test.len())
    }

    pub fn parts(&self) -> [(&'static str, &[T]); 3] {
        [("train", &self.train), ("validation", &self.validation), ("test", &self.test)]
    }
}

/// Target sizes of train, validation and test for `n` items.
pub fn part_sizes(n: usize) -> [usize; 3] {
    let train = (7 * n + 5) / 10;
    let val = (n + 5) / 10;
    [train, val, n - train - val]
}

struct Table {
    counts: [[usize; PARTS]; PATTERNS],
    /// Ideal share of each part.
    share: [f64; PARTS],
    /// Members of each pattern.
    sizes: [usize; PATTERNS],
    /// Positives per trait over the whole input.
    positives: [usize; 5],
    /// Part-wise positives per trait under `counts`.
    pos: [[i64; 5]; PARTS],
}

impl Table {
    fn trait_term(&self, q: usize, t: usize, pos: i64) -> f64 {
        let d = pos as f64 - self.share[q] * self.positives[t] as f64;
        TRAIT_WEIGHT * d * d
    }

    fn pattern_term(&self, s: usize, q: usize, count: usize) -> f64 {
        if self.sizes[s] < MIN_STRATUM {
            return 0.0;
        }
        let d = count as f64 - self.share[q] * self.sizes[s] as f64;
        d * d
    }

    /// Change of the objective when one item of pattern `a` moves from part
    /// `p` to `q` and one of pattern `b` from `q` to `p`.
    fn swap_delta(&self, a: usize, b: usize, p: usize, q: usize) -> f64 {
        let mut delta = 0.0;
        for t in 0..5 {
            let bit = |s: usize| ((s >> t) & 1) as i64;
            let shift = bit(b) - bit(a);
            if shift != 0 {
                delta += self.trait_term(p, t, self.pos[p][t] + shift) - self.trait_term(p, t, self.pos[p][t]);
                delta += self.trait_term(q, t, self.pos[q][t] - shift) - self.trait_term(q, t, self.pos[q][t]);
            }
        }
        let c = &self.counts;
        delta += self.pattern_term(a, p, c[a][p] - 1) - self.pattern_term(a, p, c[a][p]);
        delta += self.pattern_term(a, q, c[a][q] + 1) - self.pattern_term(a, q, c[a][q]);
        delta += self.pattern_term(b, q, c[b][q] - 1) - self.pattern_term(b, q, c[b][q]);
        delta += self.pattern_term(b, p, c[b][p] + 1) - self.pattern_term(b, p, c[b][p]);
        delta
    }

    fn apply_swap(&mut self, a: usize, b: usize, p: usize, q: usize) {
        self.counts[a][p] -= 1;
        self.counts[a][q] += 1;
        self.counts[b][q] -= 1;
        self.counts[b][p] += 1;
        for t in 0..5 {
            let shift = ((b >> t) & 1) as i64 - ((a >> t) & 1) as i64;
            self.pos[p][t] += shift;
            self.pos[q][t] -= shift;
        }
    }
}

fn allocate(patterns: &[u8]) -> [[usize; PARTS]; PATTERNS] {
    let n = patterns.len();
    let sizes_target = part_sizes(n);
    let mut sizes = [0usize; PATTERNS];
    for &p in patterns {
        sizes[p as usize] += 1;
    }
    let mut positives = [0usize; 5];
    for (s, &m) in sizes.iter().enumerate() {
        for (t, pos) in positives.iter_mut().enumerate() {
            if (s >> t) & 1 == 1 {
                *pos += m;
            }
        }
    }
    let share = sizes_target.map(|s| s as f64 / n as f64);

    // Starting point: pattern by pattern, each item to the part furthest
    // behind its running quota.
    let mut counts = [[0usize; PARTS]; PATTERNS];
    let mut assigned = [0usize; PARTS];
    let mut seen = 0usize;
    for (s, &m) in sizes.iter().enumerate() {
        for _ in 0..m {
            seen += 1;
            let q = (0..PARTS)
                .filter(|&q| assigned[q] < sizes_target[q])
                .max_by(|&x, &y| {
                    let dx = share[x] * seen as f64 - assigned[x] as f64;
                    let dy = share[y] * seen as f64 - assigned[y] as f64;
                    dx.total_cmp(&dy).then(y.cmp(&x))
                })
                .expect("capacity remains while items remain");
            counts[s][q] += 1;
            assigned[q] += 1;
        }
    }

    let mut pos = [[0i64; 5]; PARTS];
    for (s, row) in counts.iter().enumerate() {
        for (q, &c) in row.iter().enumerate() {
            for (t, slot) in pos[q].iter_mut().enumerate() {
                if (s >> t) & 1 == 1 {
                    *slot += c as i64;
                }
            }
        }
    }
    let mut table = Table {
        counts,
        share,
        sizes,
        positives,
        pos,
    };

    let present: Vec<usize> = (0..PATTERNS).filter(|&s| sizes[s] > 0).collect();
    loop {
        let mut best: Option<(f64, usize, usize, usize, usize)> = None;
        for p in 0..PARTS {
            for q in p + 1..PARTS {
                for &a in &present {
                    if table.counts[a][p] == 0 {
                        continue;
                    }
                    for &b in &present {
                        if a == b || table.counts[b][q] == 0 {
                            continue;
                        }
                        let d = table.swap_delta(a, b, p, q);
                        if d < -1e-9 && best.is_none_or(|bst| d < bst.0) {
                            best = Some((d, a, b, p, q));
                        }
                    }
                }
            }
        }
        match best {
            Some((_, a, b, p, q)) => table.apply_swap(a, b, p, q),
            None => break,
        }
    }
    table.counts
}

/// Index form of [`split_dataset`]: which input positions land in train,
/// validation and test.
pub fn split_indices(labels: &[BinaryLabels], seed: u64) -> Result<[Vec<usize>; 3]> {
    if labels.len() < MIN_SENTENCES {
        return Err(Error::TooFewSentences {
            needed: MIN_SENTENCES,
            got: labels.len(),
        });
    }
    let patterns: Vec<u8> = labels.iter().map(BinaryLabels::pattern).collect();
    let mut quota = allocate(&patterns);
    let mut order: Vec<usize> = (0..labels.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut parts: [Vec<usize>; 3] = Default::default();
    for i in order {
        let row = &mut quota[patterns[i] as usize];
        let q = (0..PARTS).find(|&q| row[q] > 0).expect("quota covers every item");
        row[q] -= 1;
        parts[q].push(i);
    }
    Ok(parts)
}

/// Deterministic under `seed`; see the module docs for the allocation rule.
pub fn split_dataset<T: Clone>(items: &[T], labels: impl Fn(&T) -> BinaryLabels, seed: u64) -> Result<DatasetSplit<T>> {
    let l: Vec<BinaryLabels> = items.iter().map(labels).collect();
    let [train, val, test] = split_indices(&l, seed)?;
    let pick = |idx: Vec<usize>| idx.into_iter().map(|i| items[i].clone()).collect();
    Ok(DatasetSplit {
        train: pick(train),
        validation: pick(val),
        test: pick(test),
    })
}

pub fn split_sentences(sentences: &[LabeledSentence], seed: u64) -> Result<DatasetSplit> {
    split_dataset(sentences, |s| s.labels, seed)
}
