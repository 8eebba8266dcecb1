//! Frequency-ranked vocabulary with id 0 reserved for unknown words.
//!
//! Lexicon adjectives are never admitted, so they always encode as UNK and a
//! model cannot read its label straight off the input.
//!
//! File format:
//!
//! ```text
//! #vocab v1 size=<K> unk=0
//! #provenance <json>          (optional)
//! <token>\t<id>\t<count>      (K lines, ids 1..K in order)
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use crate::corpus::LabeledSentence;
use crate::lexicon::Lexicon;
use crate::provenance::Provenance;
use crate::{Error, Result};

pub const UNK_ID: u32 = 0;
pub const UNK_TOKEN: &str = "UNK";
pub const DEFAULT_MAX_SIZE: usize = 60_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    /// `tokens[id]`; entry 0 is [`UNK_TOKEN`].
    tokens: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, u32>,
}

impl Vocabulary {
    /// `ranked` must already be in id order (id 1 first).
    fn from_ranked(ranked: Vec<(String, u64)>) -> Result<Self> {
        let mut tokens = vec![UNK_TOKEN.to_string()];
        let mut counts = vec![0];
        let mut index = HashMap::with_capacity(ranked.len());
        for (i, (t, c)) in ranked.into_iter().enumerate() {
            if c == 0 {
                return Err(Error::Invalid(format!("token {t:?} has zero count")));
            }
            if index.insert(t.clone(), i as u32 + 1).is_some() {
                return Err(Error::Invalid(format!("token {t:?} appears twice")));
            }
            tokens.push(t);
            counts.push(c);
        }
        Ok(Self { tokens, counts, index })
    }

    /// Number of real words K; ids run 1..=K.
    pub fn len(&self) -> usize {
        self.tokens.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn id(&self, token: &str) -> u32 {
        self.index.get(token).copied().unwrap_or(UNK_ID)
    }

    pub fn get(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    pub fn count(&self, id: u32) -> u64 {
        self.counts.get(id as usize).copied().unwrap_or(0)
    }

    /// Counts indexed by id; entry 0 (UNK) is 0.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// `tokens[id]` for ids `0..=K`.
    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn encode<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<u32> {
        tokens.iter().map(|t| self.id(t.as_ref())).collect()
    }

    /// Ids beyond the vocabulary decode to [`UNK_TOKEN`] as well.
    pub fn decode(&self, ids: &[u32]) -> Vec<&str> {
        ids.iter().map(|&i| self.token(i).unwrap_or(UNK_TOKEN)).collect()
    }

    pub fn to_text(&self, prov: Option<&Provenance>) -> String {
        let mut out = format!("#vocab v1 size={} unk={UNK_ID}\n", self.len());
        if let Some(p) = prov {
            writeln!(out, "#provenance {}", p.to_json()).unwrap();
        }
        for (id, (t, c)) in self.tokens.iter().zip(&self.counts).enumerate().skip(1) {
            writeln!(out, "{t}\t{id}\t{c}").unwrap();
        }
        out
    }

    pub fn save(&self, path: &Path, prov: Option<&Provenance>) -> Result<()> {
        fs::write(path, self.to_text(prov)).map_err(|e| Error::io(path, e))
    }

    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let bad = |line: usize, message: String| Error::Parse {
            path: origin.to_path_buf(),
            line,
            message,
        };
        let mut lines = text.lines().enumerate();
        let header = lines.next().map(|(_, l)| l).unwrap_or_default();
        let size: usize = header
            .strip_prefix("#vocab v1 size=")
            .and_then(|r| r.strip_suffix(" unk=0"))
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad(1, format!("bad header {header:?}")))?;
        let mut ranked = Vec::with_capacity(size);
        for (i, line) in lines {
            if line.starts_with('#') || line.is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            let [tok, id, count] = f[..] else {
                return Err(bad(i + 1, "expected token, id and count".into()));
            };
            let id: usize = id.parse().map_err(|_| bad(i + 1, format!("bad id {id:?}")))?;
            let count: u64 = count.parse().map_err(|_| bad(i + 1, format!("bad count {count:?}")))?;
            if id != ranked.len() + 1 {
                return Err(bad(i + 1, format!("id {id} out of order")));
            }
            ranked.push((tok.to_string(), count));
        }
        if ranked.len() != size {
            return Err(bad(1, format!("header says {size} tokens, found {}", ranked.len())));
        }
        Self::from_ranked(ranked).map_err(|e| bad(1, e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }
}

/// Counts every non-adjective token and keeps the `max_size` most frequent,
/// ties broken lexicographically.
pub fn build_vocabulary(corpus: &[LabeledSentence], max_size: usize, lex: &Lexicon) -> Result<Vocabulary> {
    build_from_tokens(corpus.iter().map(|s| s.tokens.as_slice()).collect::<Vec<_>>(), max_size, lex)
}

pub fn build_from_tokens<S: AsRef<str> + Sync>(sentences: Vec<&[S]>, max_size: usize, lex: &Lexicon) -> Result<Vocabulary> {
    if max_size == 0 {
        return Err(Error::Invalid("vocabulary size must be at least 1".into()));
    }
    if sentences.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let counts = sentences
        .par_iter()
        .fold(HashMap::<&str, u64>::new, |mut m, toks| {
            for t in toks.iter().map(AsRef::as_ref) {
                if !lex.contains(t) {
                    *m.entry(t).or_default() += 1;
                }
            }
            m
        })
        .reduce(HashMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_default() += v;
            }
            a
        });
    let mut ranked: Vec<(String, u64)> = counts.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
    ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(max_size);
    Vocabulary::from_ranked(ranked)
}
