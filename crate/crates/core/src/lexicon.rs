//! OCEAN adjective dictionary and the labels derived from it.
//!
//! File format: UTF-8, one adjective per line followed by five reals in
//! O, C, E, A, N order, separated by tabs or spaces. An optional header whose
//! first field is `adjective` and `#` comment lines are skipped.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const TRAIT_NAMES: [&str; 5] = ["O", "C", "E", "A", "N"];

/// Five trait loadings in O, C, E, A, N order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TraitVector(pub [f64; 5]);

impl TraitVector {
    pub fn new(values: [f64; 5]) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("{values:?}")));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64; 5] {
        &self.0
    }

    pub fn o(&self) -> f64 {
        self.0[0]
    }

    pub fn c(&self) -> f64 {
        self.0[1]
    }

    pub fn e(&self) -> f64 {
        self.0[2]
    }

    pub fn a(&self) -> f64 {
        self.0[3]
    }

    pub fn n(&self) -> f64 {
        self.0[4]
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// Componentwise arithmetic mean, or `None` for an empty input.
    pub fn mean<'a>(vectors: impl IntoIterator<Item = &'a TraitVector>) -> Option<TraitVector> {
        let mut sum = [0.0; 5];
        let mut n = 0usize;
        for v in vectors {
            for (s, x) in sum.iter_mut().zip(v.0) {
                *s += x;
            }
            n += 1;
        }
        (n > 0).then(|| TraitVector(sum.map(|s| s / n as f64)))
    }
}

/// Per-trait polarity bits in O, C, E, A, N order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BinaryLabels(pub [u8; 5]);

impl BinaryLabels {
    pub fn bits(&self) -> &[u8; 5] {
        &self.0
    }

    /// The labels packed into the low five bits, O first.
    pub fn pattern(&self) -> u8 {
        self.0.iter().enumerate().fold(0, |acc, (i, &b)| acc | (b << i))
    }

    pub fn from_pattern(p: u8) -> Self {
        Self(std::array::from_fn(|i| (p >> i) & 1))
    }

    /// −1 for each 0 bit and +1 for each 1 bit.
    pub fn signs(&self) -> TraitVector {
        TraitVector(self.0.map(|b| 2.0 * f64::from(b) - 1.0))
    }
}

/// A trait is 0 when its value is below zero and 1 otherwise, so an exact
/// zero is positive.
pub fn binarize(t: &TraitVector) -> Result<BinaryLabels> {
    if !t.is_finite() {
        return Err(Error::NonFinite(format!("{:?}", t.0)));
    }
    Ok(BinaryLabels(t.0.map(|v| u8::from(v >= 0.0))))
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Lexicon {
    entries: BTreeMap<String, TraitVector>,
}

impl Lexicon {
    /// Builds a lexicon from `(adjective, vector)` pairs; keys are lowercased
    /// and must be unique.
    pub fn from_entries<S: AsRef<str>>(entries: impl IntoIterator<Item = (S, TraitVector)>) -> Result<Self> {
        let mut lex = Lexicon::default();
        for (i, (k, v)) in entries.into_iter().enumerate() {
            lex.insert(k.as_ref(), v, i + 1)?;
        }
        Ok(lex)
    }

    fn insert(&mut self, key: &str, value: TraitVector, line: usize) -> Result<()> {
        let key = key.trim().to_lowercase();
        if key.is_empty() {
            return Err(Error::Invalid(format!("empty adjective on line {line}")));
        }
        if !value.is_finite() {
            return Err(Error::NonFinite(key));
        }
        if self.entries.contains_key(&key) {
            return Err(Error::DuplicateAdjective { adjective: key, line });
        }
        self.entries.insert(key, value);
        Ok(())
    }

    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut lex = Lexicon::default();
        let mut seen_data = false;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let row = raw.trim();
            if row.is_empty() || row.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = row.split_whitespace().collect();
            if !seen_data && fields[0].eq_ignore_ascii_case("adjective") {
                seen_data = true;
                continue;
            }
            seen_data = true;
            let bad = |message: String| Error::Parse {
                path: origin.to_path_buf(),
                line,
                message,
            };
            if fields.len() != 6 {
                return Err(bad(format!("expected an adjective and 5 values, found {} fields", fields.len())));
            }
            let mut values = [0.0; 5];
            for (v, f) in values.iter_mut().zip(&fields[1..]) {
                *v = f.parse().map_err(|_| bad(format!("{f:?} is not a number")))?;
            }
            let tv = TraitVector::new(values).map_err(|_| bad("non-finite value".into()))?;
            lex.insert(fields[0], tv, line)?;
        }
        Ok(lex)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, adjective: &str) -> Option<&TraitVector> {
        self.entries.get(adjective)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.entries.contains_key(token)
    }

    /// Entries in lexicographic order of the adjective.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &TraitVector)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Rank of `adjective` in lexicographic order.
    pub fn index_of(&self, adjective: &str) -> Option<usize> {
        self.entries.keys().position(|k| k == adjective)
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("adjective\to\tc\te\ta\tn\n");
        for (k, v) in &self.entries {
            out.push_str(k);
            for x in v.0 {
                out.push('\t');
                out.push_str(&x.to_string());
            }
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for TraitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [o, c, e, a, n] = self.0;
        write!(f, "(O {o:.6}, C {c:.6}, E {e:.6}, A {a:.6}, N {n:.6})")
    }
}

pub fn load_lexicon(path: &Path) -> Result<Lexicon> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Lexicon::parse(&text, path)
}

/// Mean of the vectors of every lexicon token in `tokens`, each occurrence
/// counted; `None` when no token is an adjective.
pub fn match_and_label<S: AsRef<str>>(tokens: &[S], lex: &Lexicon) -> Option<TraitVector> {
    TraitVector::mean(tokens.iter().filter_map(|t| lex.get(t.as_ref())))
}

/// Positions in `tokens` that hold a lexicon adjective.
pub fn adjective_positions<S: AsRef<str>>(tokens: &[S], lex: &Lexicon) -> Vec<usize> {
    tokens
        .iter()
        .enumerate()
        .filter(|(_, t)| lex.contains(t.as_ref()))
        .map(|(i, _)| i)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const SAMPLE: &str = "adjective\to\tc\te\ta\tn\n\
        Active 0.053194 0.237406 0.365915 0.116700 -0.058669\n\
        # comment\n\
        Angry\t-0.004604\t-0.038453\t0.020755\t-0.294754\t0.590114\n\
        Boring -0.069877 -0.099754 -0.478821 -0.236462 0.118821\n";

    fn sample() -> Lexicon {
        Lexicon::parse(SAMPLE, Path::new("sample.tsv")).unwrap()
    }

    fn close(a: &TraitVector, b: [f64; 5]) -> bool {
        a.0.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
    }

    #[test]
    fn parses_rows_and_lowercases() {
        let lex = sample();
        assert_eq!(lex.len(), 3);
        assert_eq!(lex.get("active").unwrap().0, [0.053194, 0.237406, 0.365915, 0.116700, -0.058669]);
        assert!(lex.get("Active").is_none());
        assert_eq!(lex.index_of("boring"), Some(2));
    }

    #[test]
    fn empty_file_is_empty_lexicon() {
        assert!(Lexicon::parse("", Path::new("e")).unwrap().is_empty());
    }

    #[test]
    fn duplicate_rejected_with_line() {
        let text = "angry 0 0 0 0 0\nAngry 1 1 1 1 1\n";
        match Lexicon::parse(text, Path::new("d")) {
            Err(Error::DuplicateAdjective { adjective, line }) => {
                assert_eq!(adjective, "angry");
                assert_eq!(line, 2);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_row_reports_line() {
        let text = "active 1 2 3 4 5\nangry 1 2 x 4 5\n";
        assert!(matches!(Lexicon::parse(text, Path::new("m")), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(Lexicon::parse("short 1 2", Path::new("m")), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn labeling_anchors() {
        let lex = sample();
        let boring = match_and_label(&["the", "food", "was", "boring"], &lex).unwrap();
        assert_eq!(boring.0, [-0.069877, -0.099754, -0.478821, -0.236462, 0.118821]);
        let two = match_and_label(&["active", "and", "angry"], &lex).unwrap();
        assert!(close(&two, [0.024295, 0.0994765, 0.193335, -0.089027, 0.2657225]));
        assert!(match_and_label(&["great", "pizza"], &lex).is_none());
    }

    #[test]
    fn binarize_anchors() {
        let b = binarize(&TraitVector([-0.069877, -0.099754, -0.478821, -0.236462, 0.118821])).unwrap();
        assert_eq!(b.0, [0, 0, 0, 0, 1]);
        assert_eq!(binarize(&TraitVector([0.0; 5])).unwrap().0, [1; 5]);
        assert_eq!(binarize(&TraitVector([1.0, -1.0, 1.0, -1.0, 1.0])).unwrap().0, [1, 0, 1, 0, 1]);
        assert!(binarize(&TraitVector([f64::NAN, 0.0, 0.0, 0.0, 0.0])).is_err());
    }

    #[test]
    fn pattern_round_trip() {
        for p in 0..32 {
            assert_eq!(BinaryLabels::from_pattern(p).pattern(), p);
        }
    }

    #[test]
    fn tsv_round_trip() {
        let lex = sample();
        assert_eq!(Lexicon::parse(&lex.to_tsv(), Path::new("rt")).unwrap(), lex);
    }

    fn arb_lexicon() -> impl Strategy<Value = Lexicon> {
        proptest::collection::btree_map("[a-z]{1,6}", proptest::array::uniform5(-1.0f64..1.0), 1..8)
            .prop_map(|m| Lexicon::from_entries(m.into_iter().map(|(k, v)| (k, TraitVector(v)))).unwrap())
    }

    proptest! {
        #[test]
        fn mean_within_component_bounds(lex in arb_lexicon(), picks in proptest::collection::vec(0usize..64, 1..12)) {
            let keys: Vec<&str> = lex.iter().map(|(k, _)| k).collect();
            let tokens: Vec<&str> = picks.iter().map(|&i| keys[i % keys.len()]).collect();
            let m = match_and_label(&tokens, &lex).unwrap();
            for c in 0..5 {
                let vals: Vec<f64> = tokens.iter().map(|t| lex.get(t).unwrap().0[c]).collect();
                let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(m.0[c] >= lo - 1e-12 && m.0[c] <= hi + 1e-12);
            }
        }

        #[test]
        fn mean_ignores_order(lex in arb_lexicon(), picks in proptest::collection::vec(0usize..64, 1..12), rot in 0usize..12) {
            let keys: Vec<&str> = lex.iter().map(|(k, _)| k).collect();
            let mut tokens: Vec<&str> = picks.iter().map(|&i| keys[i % keys.len()]).collect();
            tokens.push("filler");
            let a = match_and_label(&tokens, &lex).unwrap();
            let mut other = tokens.clone();
            other.reverse();
            let r = rot % other.len();
            other.rotate_left(r);
            let b = match_and_label(&other, &lex).unwrap();
            for c in 0..5 {
                prop_assert!((a.0[c] - b.0[c]).abs() < 1e-12);
            }
        }

        #[test]
        fn single_match_is_identity(lex in arb_lexicon(), i in 0usize..8) {
            let (k, v) = lex.iter().nth(i % lex.len()).unwrap();
            let m = match_and_label(&["x1", k, "y2"], &lex).unwrap();
            prop_assert_eq!(m, *v);
        }

        #[test]
        fn binarize_idempotent(v in proptest::array::uniform5(-2.0f64..2.0)) {
            let b = binarize(&TraitVector(v)).unwrap();
            prop_assert_eq!(binarize(&b.signs()).unwrap(), b);
        }
    }
}
