//! Run configuration: one flat JSON object, optionally loaded from a file,
//! with `--key=value` overrides applied on top.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use ocean::corpus::Format;
use ocean::embedding::{EmbeddingConfig, WindowMode};
use ocean::models::{InputKind, ModelSpec, TrainConfig};
use ocean::vocab::DEFAULT_MAX_SIZE;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

/// Environment variable naming the default config file.
pub const CONFIG_ENV: &str = "OCEAN_CONFIG";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub corpus: Option<PathBuf>,
    /// `jsonl` or `plain`.
    pub corpus_format: String,
    pub strict: bool,
    pub lexicon: Option<PathBuf>,
    /// Built-in English list when absent.
    pub stopwords: Option<PathBuf>,

    pub labeled: PathBuf,
    pub vocab: PathBuf,
    pub embedding: PathBuf,
    pub checkpoint: PathBuf,
    pub report_dir: PathBuf,
    pub predictions: PathBuf,
    /// Text to run `predict` on; the corpus when absent.
    pub input: Option<PathBuf>,

    pub vocab_size: usize,

    /// Embedding 1, 2 or 3; by default the one the model reads, else 2.
    pub embedding_preset: Option<u8>,
    pub embedding_dim: Option<usize>,
    pub num_sampled: Option<usize>,
    pub window: Option<WindowMode>,
    pub embedding_lr: Option<f64>,
    pub embedding_epochs: Option<usize>,
    pub embedding_batch: Option<usize>,

    pub model: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub eval_every: usize,
    pub timings: bool,
    pub max_len: Option<usize>,
    pub learning_rate: Option<f64>,
    /// Multiplies every convolution's filter count.
    pub filter_scale: f64,

    /// `text` or `json`, for `catalog`.
    pub format: String,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let work = PathBuf::from("work");
        Self {
            corpus: None,
            corpus_format: "jsonl".into(),
            strict: false,
            lexicon: None,
            stopwords: None,
            labeled: work.join("labeled.jsonl"),
            vocab: work.join("vocab.txt"),
            embedding: work.join("embedding.txt"),
            checkpoint: work.join("model"),
            report_dir: work.join("reports"),
            predictions: work.join("predictions.jsonl"),
            input: None,
            vocab_size: DEFAULT_MAX_SIZE,
            embedding_preset: None,
            embedding_dim: None,
            num_sampled: None,
            window: None,
            embedding_lr: None,
            embedding_epochs: None,
            embedding_batch: None,
            model: 7,
            epochs: 10,
            batch_size: 128,
            eval_every: 1,
            timings: false,
            max_len: None,
            learning_rate: None,
            filter_scale: 1.0,
            format: "text".into(),
            seed: 0,
        }
    }
}

/// Parses `--key=value`, `--key value` and bare `--flag` (true) pairs.
/// Hyphens in keys become underscores.
pub fn parse_overrides(args: &[String]) -> Result<Map<String, Value>> {
    let mut out = Map::new();
    let mut i = 0;
    while i < args.len() {
        let Some(body) = args[i].strip_prefix("--") else {
            bail!("unexpected argument {:?}; overrides look like --key=value", args[i]);
        };
        let (key, raw) = match body.split_once('=') {
            Some((k, v)) => (k.to_string(), v.to_string()),
            None if i + 1 < args.len() && !args[i + 1].starts_with("--") => {
                i += 1;
                (body.to_string(), args[i].clone())
            }
            None => (body.to_string(), "true".to_string()),
        };
        if key.is_empty() {
            bail!("empty override key in {:?}", args[i]);
        }
        out.insert(key.replace('-', "_"), scalar(&raw));
        i += 1;
    }
    Ok(out)
}

fn scalar(raw: &str) -> Value {
    match serde_json::from_str::<Value>(raw) {
        Ok(v @ (Value::Bool(_) | Value::Number(_) | Value::Null)) => v,
        _ => Value::String(raw.to_string()),
    }
}

impl RunConfig {
    /// File values first, then overrides; unknown keys are rejected by name.
    pub fn resolve(file: Option<&Path>, overrides: Map<String, Value>) -> Result<Self> {
        let mut obj = match file {
            Some(p) => {
                let text = fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
                match serde_json::from_str::<Value>(&text).with_context(|| format!("parsing config {}", p.display()))? {
                    Value::Object(m) => m,
                    _ => bail!("config {} must hold a JSON object", p.display()),
                }
            }
            None => Map::new(),
        };
        obj.extend(overrides);
        let cfg: RunConfig = serde_json::from_value(Value::Object(obj)).context("invalid configuration")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.corpus_format()?;
        if !(self.filter_scale > 0.0 && self.filter_scale.is_finite()) {
            bail!("config key filter_scale must be positive, got {}", self.filter_scale);
        }
        if let Some(p) = self.embedding_preset {
            if !(1..=3).contains(&p) {
                bail!("config key embedding_preset must be 1, 2 or 3, got {p}");
            }
        }
        if !matches!(self.format.as_str(), "text" | "json") {
            bail!("config key format must be text or json, got {:?}", self.format);
        }
        if self.vocab_size == 0 {
            bail!("config key vocab_size must be at least 1");
        }
        Ok(())
    }

    pub fn corpus_format(&self) -> Result<Format> {
        self.corpus_format
            .parse()
            .map_err(|e| anyhow::anyhow!("config key corpus_format: {e}"))
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            batch_size: self.batch_size,
            seed: self.seed,
            eval_every: self.eval_every,
            timings: self.timings,
        }
    }

    pub fn embedding_config(&self) -> EmbeddingConfig {
        let preset = self.embedding_preset.or_else(|| match self.model_input_kind() {
            Some(InputKind::Embedding1) => Some(1),
            Some(InputKind::Embedding3) => Some(3),
            _ => None,
        });
        let mut c = match preset {
            Some(1) => EmbeddingConfig::embedding1(),
            Some(3) => EmbeddingConfig::embedding3(),
            _ => EmbeddingConfig::embedding2(),
        };
        c.seed = self.seed;
        if let Some(v) = self.embedding_dim {
            c.dim = v;
        }
        if let Some(v) = self.num_sampled {
            c.num_sampled = v;
        }
        if let Some(v) = self.window {
            c.window = v;
        }
        if let Some(v) = self.embedding_lr {
            c.learning_rate = v;
        }
        if let Some(v) = self.embedding_epochs {
            c.epochs = v;
        }
        if let Some(v) = self.embedding_batch {
            c.batch_size = v;
        }
        c
    }

    fn model_input_kind(&self) -> Option<InputKind> {
        ocean::models::model_spec(self.model).ok().map(|s| s.input_kind)
    }

    /// The catalog entry for `model` with this run's learning-rate and
    /// filter overrides.
    pub fn model_spec(&self) -> Result<ModelSpec> {
        let mut spec = ocean::models::model_spec(self.model)?;
        if self.filter_scale != 1.0 {
            spec = spec.with_filter_scale(self.filter_scale);
        }
        if let Some(lr) = self.learning_rate {
            spec.learning_rate = lr;
        }
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(s: &[&str]) -> Vec<String> {
        s.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn override_forms() {
        let m = parse_overrides(&args(&["--model=13", "--vocab-size", "500", "--strict", "--lexicon", "lex.tsv"])).unwrap();
        assert_eq!(m["model"], 13);
        assert_eq!(m["vocab_size"], 500);
        assert_eq!(m["strict"], true);
        assert_eq!(m["lexicon"], "lex.tsv");
        assert!(parse_overrides(&args(&["model=3"])).is_err());
    }

    #[test]
    fn flags_win_over_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        fs::write(&p, r#"{"model": 3, "seed": 9}"#).unwrap();
        let cfg = RunConfig::resolve(Some(&p), parse_overrides(&args(&["--model=1"])).unwrap()).unwrap();
        assert_eq!((cfg.model, cfg.seed), (1, 9));
    }

    #[test]
    fn unknown_key_is_named() {
        let err = RunConfig::resolve(None, parse_overrides(&args(&["--colour=red"])).unwrap()).unwrap_err();
        assert!(format!("{err:#}").contains("colour"), "{err:#}");
    }

    #[test]
    fn embedding_preset_follows_model() {
        let cfg = RunConfig {
            model: 9,
            ..RunConfig::default()
        };
        assert_eq!(cfg.embedding_config().window, WindowMode::AdjectivesW2);
        let cfg = RunConfig {
            model: 4,
            embedding_dim: Some(8),
            ..RunConfig::default()
        };
        let e = cfg.embedding_config();
        assert_eq!((e.dim, e.num_sampled), (8, 20));
    }
}
