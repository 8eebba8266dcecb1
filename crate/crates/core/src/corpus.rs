//! From raw review text to labeled, tokenized sentences.
//!
//! Pipeline per document: [`sentence_split`], then [`normalize_tokens`], then
//! [`match_and_label`]. Sentences without a lexicon adjective are dropped.

use std::collections::HashSet;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::lexicon::{adjective_positions, binarize, match_and_label, BinaryLabels, Lexicon, TraitVector};
use crate::provenance::Provenance;
use crate::stem::stem;
use crate::{Error, Result};

const ENGLISH_STOPWORDS: &str = include_str!("../data/stopwords_en.txt");

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawDocument {
    pub id: String,
    pub text: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Jsonl,
    Plain,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jsonl" => Ok(Format::Jsonl),
            "plain" => Ok(Format::Plain),
            _ => Err(Error::Invalid(format!("unknown corpus format {s:?} (expected jsonl or plain)"))),
        }
    }
}

/// Streams documents from a JSON-lines or plain-text source in file order.
///
/// JSON lines need a string field `text`; the id is taken from `review_id`
/// or `id` when present and is `line-<n>` otherwise. With `strict` a
/// malformed line is an error; without it the line is logged and skipped.
pub struct DocumentReader<R> {
    lines: std::io::Lines<R>,
    format: Format,
    strict: bool,
    origin: PathBuf,
    line: usize,
    skipped: usize,
}

impl<R: BufRead> DocumentReader<R> {
    pub fn new(reader: R, format: Format, strict: bool, origin: &Path) -> Self {
        Self {
            lines: reader.lines(),
            format,
            strict,
            origin: origin.to_path_buf(),
            line: 0,
            skipped: 0,
        }
    }

    /// Malformed lines skipped so far in non-strict mode.
    pub fn skipped(&self) -> usize {
        self.skipped
    }

    fn parse_json(&self, raw: &str) -> std::result::Result<Option<RawDocument>, String> {
        let value: serde_json::Value = serde_json::from_str(raw).map_err(|e| e.to_string())?;
        let text = value
            .get("text")
            .and_then(|t| t.as_str())
            .ok_or_else(|| "missing string field \"text\"".to_string())?;
        let id = ["review_id", "id"]
            .iter()
            .find_map(|k| value.get(*k).and_then(|v| v.as_str()))
            .map_or_else(|| format!("line-{}", self.line), str::to_string);
        Ok((!text.trim().is_empty()).then(|| RawDocument {
            id,
            text: text.to_string(),
        }))
    }
}

impl<R: BufRead> Iterator for DocumentReader<R> {
    type Item = Result<RawDocument>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let raw = match self.lines.next()? {
                Ok(l) => l,
                Err(e) => return Some(Err(Error::io(&self.origin, e))),
            };
            self.line += 1;
            if raw.trim().is_empty() {
                continue;
            }
            let doc = match self.format {
                Format::Plain => Ok(Some(RawDocument {
                    id: format!("line-{}", self.line),
                    text: raw,
                })),
                Format::Jsonl => self.parse_json(&raw),
            };
            match doc {
                Ok(Some(d)) => return Some(Ok(d)),
                Ok(None) => continue,
                Err(message) if self.strict => {
                    return Some(Err(Error::Parse {
                        path: self.origin.clone(),
                        line: self.line,
                        message,
                    }))
                }
                Err(message) => {
                    log::warn!("{}:{}: skipping malformed line: {message}", self.origin.display(), self.line);
                    self.skipped += 1;
                }
            }
        }
    }
}

pub fn ingest_documents(path: &Path, format: Format, strict: bool) -> Result<DocumentReader<BufReader<File>>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(DocumentReader::new(BufReader::new(file), format, strict, path))
}

/// Splits on runs of `.`, `!`, `?` that are followed by whitespace or the end
/// of the text. Terminators are dropped, segments trimmed, empty ones removed.
pub fn sentence_split(text: &str) -> Vec<String> {
    let is_term = |c: char| matches!(c, '.' | '!' | '?');
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut start = 0;
    let mut i = 0;
    while i < chars.len() {
        if !is_term(chars[i].1) {
            i += 1;
            continue;
        }
        let run_start = chars[i].0;
        let mut j = i;
        while j < chars.len() && is_term(chars[j].1) {
            j += 1;
        }
        if j == chars.len() || chars[j].1.is_whitespace() {
            push_trimmed(&mut out, &text[start..run_start]);
            start = chars.get(j).map_or(text.len(), |c| c.0);
        }
        i = j;
    }
    push_trimmed(&mut out, &text[start..]);
    out
}

fn push_trimmed(out: &mut Vec<String>, s: &str) {
    let s = s.trim();
    if !s.is_empty() {
        out.push(s.to_string());
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Stopwords(HashSet<String>);

impl Stopwords {
    /// The bundled 127-word English list.
    pub fn english() -> Self {
        Self::parse(ENGLISH_STOPWORDS)
    }

    /// One word per line; blank lines and `#` comments ignored.
    pub fn parse(text: &str) -> Self {
        Self(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_lowercase)
                .collect(),
        )
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(&text))
    }

    pub fn contains(&self, w: &str) -> bool {
        self.0.contains(w)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<S: Into<String>> FromIterator<S> for Stopwords {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        Self(iter.into_iter().map(|s| s.into().to_lowercase()).collect())
    }
}

/// Lowercases, splits on non-alphanumeric runs, drops pure numbers and
/// stopwords, and stems every token that is not a lexicon adjective.
pub fn normalize_tokens(sentence: &str, stopwords: &Stopwords, lex: Option<&Lexicon>) -> Vec<String> {
    let lower = sentence.to_lowercase();
    lower
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty() && !t.chars().all(|c| c.is_numeric()))
        .filter(|t| !stopwords.contains(t))
        .filter_map(|t| {
            if lex.is_some_and(|l| l.contains(t)) {
                return Some(t.to_string());
            }
            let s = stem(t);
            (!stopwords.contains(&s)).then_some(s)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledSentence {
    pub tokens: Vec<String>,
    #[serde(rename = "adj")]
    pub adjective_positions: Vec<usize>,
    pub traits: TraitVector,
    pub labels: BinaryLabels,
}

impl LabeledSentence {
    /// Labels `tokens`, or `None` when they contain no adjective.
    pub fn from_tokens(tokens: Vec<String>, lex: &Lexicon) -> Option<Self> {
        let traits = match_and_label(&tokens, lex)?;
        let labels = binarize(&traits).ok()?;
        let adjective_positions = adjective_positions(&tokens, lex);
        Some(Self {
            tokens,
            adjective_positions,
            traits,
            labels,
        })
    }

    fn validate(&self) -> std::result::Result<(), String> {
        if self.adjective_positions.is_empty() {
            return Err("sentence has no adjective".into());
        }
        if let Some(p) = self.adjective_positions.iter().find(|&&p| p >= self.tokens.len()) {
            return Err(format!("adjective position {p} out of range"));
        }
        if !self.traits.is_finite() {
            return Err("non-finite traits".into());
        }
        if self.labels.0.iter().any(|&b| b > 1) {
            return Err("labels must be 0 or 1".into());
        }
        Ok(())
    }
}

/// Labels every sentence of `text`.
pub fn label_document(text: &str, lex: &Lexicon, stopwords: &Stopwords) -> Vec<LabeledSentence> {
    sentence_split(text)
        .iter()
        .filter_map(|s| LabeledSentence::from_tokens(normalize_tokens(s, stopwords, Some(lex)), lex))
        .collect()
}

const CHUNK: usize = 2048;

/// Runs the labeling pipeline over `docs` in parallel chunks; output order
/// follows input order.
pub fn build_labeled_corpus<I>(docs: I, lex: &Lexicon, stopwords: &Stopwords) -> Result<Vec<LabeledSentence>>
where
    I: IntoIterator<Item = Result<RawDocument>>,
{
    let mut out = Vec::new();
    let mut chunk = Vec::with_capacity(CHUNK);
    let flush = |chunk: &mut Vec<RawDocument>, out: &mut Vec<LabeledSentence>| {
        let labeled: Vec<Vec<LabeledSentence>> =
            chunk.par_iter().map(|d| label_document(&d.text, lex, stopwords)).collect();
        out.extend(labeled.into_iter().flatten());
        chunk.clear();
    };
    for doc in docs {
        chunk.push(doc?);
        if chunk.len() == CHUNK {
            flush(&mut chunk, &mut out);
        }
    }
    flush(&mut chunk, &mut out);
    Ok(out)
}

#[derive(Serialize, Deserialize)]
struct ProvenanceLine {
    provenance: Provenance,
}

/// JSON lines: an optional leading `{"provenance": ...}` record, then one
/// sentence per line.
pub fn write_labeled(path: &Path, sentences: &[LabeledSentence], prov: Option<&Provenance>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    if let Some(p) = prov {
        let line = serde_json::to_string(&ProvenanceLine { provenance: p.clone() }).expect("serializable");
        writeln!(w, "{line}").map_err(io)?;
    }
    for s in sentences {
        let line = serde_json::to_string(s).expect("serializable");
        writeln!(w, "{line}").map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn read_labeled(path: &Path) -> Result<(Vec<LabeledSentence>, Option<Provenance>)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    let mut prov = None;
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        if i == 0 && line.starts_with("{\"provenance\"") {
            let p: ProvenanceLine = serde_json::from_str(&line).map_err(|e| bad(e.to_string()))?;
            prov = Some(p.provenance);
            continue;
        }
        let s: LabeledSentence = serde_json::from_str(&line).map_err(|e| bad(e.to_string()))?;
        s.validate().map_err(bad)?;
        out.push(s);
    }
    Ok((out, prov))
}
