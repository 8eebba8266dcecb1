//! Pipeline stages behind the `ocean` binary. Stages talk only through
//! files; every artifact carries a provenance record.
//!
//! | stage     | reads                                   | writes |
//! |-----------|-----------------------------------------|--------|
//! | prep      | corpus, lexicon, stopwords              | labeled |
//! | vocab     | labeled, lexicon                        | vocab |
//! | embed     | labeled, vocab, lexicon (adjective mode)| embedding, `<embedding>.prov.json` |
//! | train     | labeled, vocab, embedding (CNN models)  | checkpoint, `report_dir/train_model<N>.jsonl` |
//! | eval      | labeled, vocab, embedding, checkpoint   | `report_dir/eval_model<N>.{json,txt}` |
//! | predict   | input text, vocab, embedding, checkpoint| predictions |
//!
//! Model 0 has no network; `train` writes its per-trait means to
//! `<checkpoint>.mean.json` instead of a checkpoint.

pub mod config;

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use autonet::checkpoint;
use clap::{Parser, ValueEnum};
use ocean::corpus::{
    build_labeled_corpus, ingest_documents, normalize_tokens, read_labeled, sentence_split, write_labeled, Stopwords,
};
use ocean::embedding::{train_embedding, WindowMode, WordVectors};
use ocean::eval::{classification_report, compare_report, rmse_per_trait, MetricsReport};
use ocean::features::{encode_split, Example, FeatureKind, Featurizer};
use ocean::gradsuite::{run_suite, zero_input_check};
use ocean::lexicon::{load_lexicon, BinaryLabels, Lexicon, TraitVector};
use ocean::models::{catalog, predict, train_model, MeanPredictor, ModelSpec, Prediction, Task};
use ocean::provenance::Provenance;
use ocean::split::{split_sentences, DatasetSplit};
use ocean::vocab::{build_vocabulary, Vocabulary};
use serde::{Deserialize, Serialize};
use serde_json::json;

pub use config::{parse_overrides, RunConfig, CONFIG_ENV};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Prep,
    Vocab,
    Embed,
    Train,
    Eval,
    Predict,
    Gradcheck,
    Catalog,
}

#[derive(Parser, Debug)]
#[command(
    name = "ocean",
    version,
    about = "Learn Big Five trait vectors from review text",
    after_help = "Settings come from a JSON config (--config=<file>, or the OCEAN_CONFIG environment variable) \
                  and any --key=value flag, which wins over the file."
)]
struct Cli {
    command: Command,
    /// Config overrides, e.g. --model=13 --epochs 5 --strict
    #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
    overrides: Vec<String>,
}

/// Parses the command line (without the program name) and runs it.
pub fn run_cli<I: IntoIterator<Item = String>>(args: I, out: &mut dyn Write) -> Result<()> {
    let cli = Cli::try_parse_from(std::iter::once("ocean".to_string()).chain(args)).map_err(|e| anyhow!("{e}"))?;
    let mut overrides = parse_overrides(&cli.overrides)?;
    let file = match overrides.remove("config") {
        Some(serde_json::Value::String(p)) => Some(PathBuf::from(p)),
        Some(other) => bail!("config must be a path, got {other}"),
        None => std::env::var_os(CONFIG_ENV).map(PathBuf::from),
    };
    let cfg = RunConfig::resolve(file.as_deref(), overrides)?;
    run(cli.command, &cfg, out)
}

pub fn run(command: Command, cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Prep => prep(cfg, out),
        Command::Vocab => vocab(cfg, out),
        Command::Embed => embed(cfg, out),
        Command::Train => train(cfg, out),
        Command::Eval => eval(cfg, out),
        Command::Predict => predict_stage(cfg, out),
        Command::Gradcheck => gradcheck(cfg, out),
        Command::Catalog => print_catalog(cfg, out),
    }
}

fn require<'a>(role: &str, path: &'a Path) -> Result<&'a Path> {
    if !path.exists() {
        bail!("missing input {role}: {}", path.display());
    }
    Ok(path)
}

fn configured<'a>(role: &str, path: &'a Option<PathBuf>) -> Result<&'a Path> {
    let p = path.as_deref().ok_or_else(|| anyhow!("config key {role} is not set"))?;
    require(role, p)
}

fn create_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(())
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    create_parent(path)?;
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn stopwords(cfg: &RunConfig) -> Result<Stopwords> {
    match &cfg.stopwords {
        Some(p) => Ok(Stopwords::load(require("stopwords", p)?)?),
        None => Ok(Stopwords::english()),
    }
}

fn prep(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let corpus = configured("corpus", &cfg.corpus)?;
    let lex_path = configured("lexicon", &cfg.lexicon)?;
    let lex = load_lexicon(lex_path)?;
    let sw = stopwords(cfg)?;
    let mut reader = ingest_documents(corpus, cfg.corpus_format()?, cfg.strict)?;
    let sentences = build_labeled_corpus(&mut reader, &lex, &sw)?;
    let mut prov = Provenance::new("prep", cfg.seed)
        .input("corpus", corpus)?
        .input("lexicon", lex_path)?;
    if let Some(p) = &cfg.stopwords {
        prov = prov.input("stopwords", p)?;
    }
    let prov = prov
        .param("corpus_format", &cfg.corpus_format)
        .param("strict", cfg.strict)
        .param("skipped_documents", reader.skipped())
        .param("sentences", sentences.len());
    create_parent(&cfg.labeled)?;
    write_labeled(&cfg.labeled, &sentences, Some(&prov))?;
    writeln!(out, "prep: {} labeled sentences -> {}", sentences.len(), cfg.labeled.display())?;
    Ok(())
}

fn vocab(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let labeled = require("labeled", &cfg.labeled)?;
    let lex_path = configured("lexicon", &cfg.lexicon)?;
    let (sentences, _) = read_labeled(labeled)?;
    let lex = load_lexicon(lex_path)?;
    let v = build_vocabulary(&sentences, cfg.vocab_size, &lex)?;
    let prov = Provenance::new("vocab", cfg.seed)
        .input("labeled", labeled)?
        .input("lexicon", lex_path)?
        .param("max_size", cfg.vocab_size);
    create_parent(&cfg.vocab)?;
    v.save(&cfg.vocab, Some(&prov))?;
    writeln!(out, "vocab: {} words -> {}", v.len(), cfg.vocab.display())?;
    Ok(())
}

fn embed(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let ecfg = cfg.embedding_config();
    let labeled = require("labeled", &cfg.labeled)?;
    let vocab_path = require("vocab", &cfg.vocab)?;
    let (sentences, _) = read_labeled(labeled)?;
    let vocab = Vocabulary::load(vocab_path)?;
    let mut prov = Provenance::new("embed", cfg.seed)
        .input("labeled", labeled)?
        .input("vocab", vocab_path)?;
    let lex = match ecfg.window {
        WindowMode::AllWordsW1 => None,
        WindowMode::AdjectivesW2 => {
            let lex_path = configured("lexicon", &cfg.lexicon)?;
            prov = prov.input("lexicon", lex_path)?;
            Some(load_lexicon(lex_path)?)
        }
    };
    let trained = train_embedding(&sentences, &vocab, lex.as_ref(), &ecfg)?;
    let wv = &trained.vectors;
    create_parent(&cfg.embedding)?;
    wv.save(&cfg.embedding)?;
    let prov = prov
        .param("embedding", &ecfg)
        .param("pairs", trained.pairs)
        .param("epoch_loss", &trained.run.epoch_loss);
    write_file(&with_suffix(&cfg.embedding, ".prov.json"), &(prov.to_json() + "\n"))?;
    writeln!(
        out,
        "embed: {} rows x {} from {} pairs, final loss {:.5} -> {}",
        wv.rows(),
        wv.dim(),
        trained.pairs,
        trained.run.epoch_loss.last().copied().unwrap_or(f64::NAN),
        cfg.embedding.display()
    )?;
    Ok(())
}

fn load_split(cfg: &RunConfig) -> Result<DatasetSplit> {
    let labeled = require("labeled", &cfg.labeled)?;
    let (sentences, _) = read_labeled(labeled)?;
    Ok(split_sentences(&sentences, cfg.seed)?)
}

fn featurizer(cfg: &RunConfig, spec: &ModelSpec, vocab: &Vocabulary, max_len: usize) -> Result<Featurizer> {
    match spec.input_kind.feature_kind() {
        Some(FeatureKind::Bow) => Ok(Featurizer::bow(vocab)),
        Some(FeatureKind::Embedding) => {
            let wv = WordVectors::load(require("embedding", &cfg.embedding)?)?;
            wv.check_vocabulary(vocab)?;
            if let Some(e) = spec.input_kind.embedding() {
                if e.dim != wv.dim() {
                    log::warn!("model {} is specified on {}-dimensional vectors; using {}", spec.id, e.dim, wv.dim());
                }
            }
            Ok(Featurizer::matrix(wv, max_len)?)
        }
        None => bail!("model 0 reads no features"),
    }
}

#[derive(Serialize, Deserialize)]
struct MeanArtifact {
    model: usize,
    mean: TraitVector,
    provenance: Provenance,
}

fn mean_path(cfg: &RunConfig) -> PathBuf {
    with_suffix(&cfg.checkpoint, ".mean.json")
}

fn load_mean(cfg: &RunConfig) -> Result<MeanPredictor> {
    let p = mean_path(cfg);
    let text = fs::read_to_string(require("checkpoint", &p)?)?;
    let a: MeanArtifact = serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?;
    Ok(MeanPredictor { mean: a.mean })
}

fn history_path(cfg: &RunConfig, id: usize) -> PathBuf {
    cfg.report_dir.join(format!("train_model{id}.jsonl"))
}

fn train(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let spec = cfg.model_spec()?;
    let labeled = require("labeled", &cfg.labeled)?;
    let mut prov = Provenance::new("train", cfg.seed)
        .input("labeled", labeled)?
        .param("model", spec.id)
        .param("learning_rate", spec.learning_rate)
        .param("train", cfg.train_config());
    if spec.id == 0 {
        let split = load_split(cfg)?;
        let m = MeanPredictor::fit(split.train.iter().map(|s| &s.traits))?;
        let artifact = MeanArtifact {
            model: 0,
            mean: m.mean,
            provenance: prov,
        };
        write_file(&mean_path(cfg), &(serde_json::to_string_pretty(&artifact)? + "\n"))?;
        writeln!(out, "train: model 0 predicts {} -> {}", m.mean, mean_path(cfg).display())?;
        return Ok(());
    }
    let vocab_path = require("vocab", &cfg.vocab)?;
    let vocab = Vocabulary::load(vocab_path)?;
    prov = prov.input("vocab", vocab_path)?;
    let max_len = cfg.max_len.unwrap_or(spec.default_max_len());
    if spec.input_kind.feature_kind() == Some(FeatureKind::Embedding) {
        prov = prov.input("embedding", require("embedding", &cfg.embedding)?)?.param("max_len", max_len);
    }
    if cfg.filter_scale != 1.0 {
        prov = prov.param("filter_scale", cfg.filter_scale);
    }
    let feat = featurizer(cfg, &spec, &vocab, max_len)?;
    let split = load_split(cfg)?;
    let data = encode_split(&split, &vocab);
    let (net, history) = train_model(&spec, &data, &feat, &cfg.train_config())?;

    let mut meta = BTreeMap::new();
    meta.insert("model".to_string(), spec.id.to_string());
    meta.insert("max_len".to_string(), max_len.to_string());
    meta.insert("provenance".to_string(), prov.to_json());
    create_parent(&cfg.checkpoint)?;
    checkpoint::save(&net, &cfg.checkpoint, &meta)?;
    write_file(&history_path(cfg, spec.id), &history.to_jsonl())?;
    let last = history.last().expect("at least one epoch");
    writeln!(
        out,
        "train: model {} after {} epochs, train loss {:.5}{} -> {}",
        spec.id,
        last.epoch,
        last.train_loss,
        last.test_loss.map(|l| format!(", test loss {l:.5}")).unwrap_or_default(),
        checkpoint::manifest_path(&cfg.checkpoint).display()
    )?;
    Ok(())
}

struct Loaded {
    net: autonet::Network<f32>,
    vocab: Vocabulary,
    feat: Featurizer,
    prov: Provenance,
}

fn load_model(cfg: &RunConfig, spec: &ModelSpec, prov: Provenance) -> Result<Loaded> {
    let manifest = require("checkpoint", &checkpoint::manifest_path(&cfg.checkpoint))?.to_path_buf();
    let data = require("checkpoint", &checkpoint::data_path(&cfg.checkpoint))?.to_path_buf();
    let (net, meta) = checkpoint::load(&cfg.checkpoint)?;
    let stored: usize = meta
        .get("model")
        .and_then(|m| m.parse().ok())
        .ok_or_else(|| anyhow!("checkpoint {} names no model", manifest.display()))?;
    if stored != spec.id {
        bail!("checkpoint {} holds model {stored}, config asks for model {}", manifest.display(), spec.id);
    }
    let max_len = meta
        .get("max_len")
        .and_then(|m| m.parse().ok())
        .unwrap_or(spec.default_max_len());
    let vocab_path = require("vocab", &cfg.vocab)?;
    let vocab = Vocabulary::load(vocab_path)?;
    let feat = featurizer(cfg, spec, &vocab, max_len)?;
    let mut prov = prov
        .input("checkpoint", &manifest)?
        .input("checkpoint_data", &data)?
        .input("vocab", vocab_path)?;
    if feat.kind() == FeatureKind::Embedding {
        prov = prov.input("embedding", &cfg.embedding)?;
    }
    Ok(Loaded { net, vocab, feat, prov })
}

fn traits_of(p: Prediction) -> Result<Vec<TraitVector>> {
    match p {
        Prediction::Traits(t) => Ok(t),
        Prediction::Labels { .. } => Err(anyhow!("expected trait predictions")),
    }
}

fn eval(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let spec = cfg.model_spec()?;
    let labeled = require("labeled", &cfg.labeled)?;
    let split = load_split(cfg)?;
    if split.test.is_empty() {
        bail!("the test split is empty");
    }
    let prov = Provenance::new("eval", cfg.seed).input("labeled", labeled)?.param("model", spec.id);
    let truth: Vec<TraitVector> = split.test.iter().map(|s| s.traits).collect();
    let baseline = MeanPredictor::fit(split.train.iter().map(|s| &s.traits))?;
    let base_rmse = rmse_per_trait(&baseline.predict(truth.len()), &truth)?;
    let n = truth.len();

    let report: MetricsReport = if spec.id == 0 {
        let m = load_mean(cfg)?;
        let prov = prov.input("checkpoint", &mean_path(cfg))?;
        let mut r = compare_report(0, "test", (rmse_per_trait(&m.predict(n), &truth)?, n), (base_rmse, n))?;
        r.provenance = Some(prov);
        r
    } else {
        let mut l = load_model(cfg, &spec, prov)?;
        let test: Vec<Example> = encode_split(&split, &l.vocab).test;
        let pred = predict(&mut l.net, spec.task, &l.feat, &test)?;
        let mut r = match spec.task {
            Task::Regression => compare_report(spec.id, "test", (rmse_per_trait(&traits_of(pred)?, &truth)?, n), (base_rmse, n))?,
            Task::Classification => {
                let Prediction::Labels { bits, .. } = pred else {
                    bail!("expected label predictions");
                };
                let truth: Vec<BinaryLabels> = test.iter().map(|e| e.labels).collect();
                classification_report(spec.id, "test", &bits, &truth)?
            }
        };
        r.provenance = Some(l.prov);
        r
    };
    let stem = cfg.report_dir.join(format!("eval_model{}", spec.id));
    write_file(&with_suffix(&stem, ".json"), &report.to_json())?;
    let table = report.render_table();
    write_file(&with_suffix(&stem, ".txt"), &table)?;
    write!(out, "{table}")?;
    Ok(())
}

#[derive(Serialize)]
struct PredictionRecord<'a> {
    doc: &'a str,
    sentence: usize,
    text: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    traits: Option<TraitVector>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bits: Option<BinaryLabels>,
    #[serde(skip_serializing_if = "Option::is_none")]
    probs: Option<[f64; 10]>,
}

fn predict_stage(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let spec = cfg.model_spec()?;
    let input = match &cfg.input {
        Some(p) => require("input", p)?,
        None => configured("corpus", &cfg.corpus)?,
    };
    let lex: Option<Lexicon> = match &cfg.lexicon {
        Some(p) => Some(load_lexicon(require("lexicon", p)?)?),
        None => None,
    };
    let sw = stopwords(cfg)?;
    let mut rows: Vec<(String, usize, String, Vec<String>)> = Vec::new();
    for doc in ingest_documents(input, cfg.corpus_format()?, cfg.strict)? {
        let doc = doc?;
        for (i, s) in sentence_split(&doc.text).into_iter().enumerate() {
            let tokens = normalize_tokens(&s, &sw, lex.as_ref());
            if !tokens.is_empty() {
                rows.push((doc.id.clone(), i, s, tokens));
            }
        }
    }
    let prov = Provenance::new("predict", cfg.seed).input("input", input)?.param("model", spec.id);
    let (prediction, prov) = if spec.id == 0 {
        let m = load_mean(cfg)?;
        (Prediction::Traits(m.predict(rows.len())), prov.input("checkpoint", &mean_path(cfg))?)
    } else {
        let mut l = load_model(cfg, &spec, prov)?;
        let examples: Vec<Example> = rows
            .iter()
            .map(|r| Example {
                ids: l.vocab.encode(&r.3),
                traits: TraitVector::default(),
                labels: BinaryLabels::default(),
            })
            .collect();
        (predict(&mut l.net, spec.task, &l.feat, &examples)?, l.prov)
    };
    let mut text = serde_json::to_string(&json!({ "provenance": prov }))? + "\n";
    for (k, (doc, i, s, _)) in rows.iter().enumerate() {
        let mut rec = PredictionRecord {
            doc,
            sentence: *i,
            text: s,
            traits: None,
            bits: None,
            probs: None,
        };
        match &prediction {
            Prediction::Traits(t) => rec.traits = Some(t[k]),
            Prediction::Labels { bits, probs } => {
                rec.bits = Some(bits[k]);
                rec.probs = Some(probs[k]);
            }
        }
        text.push_str(&serde_json::to_string(&rec)?);
        text.push('\n');
    }
    write_file(&cfg.predictions, &text)?;
    writeln!(out, "predict: {} sentences -> {}", rows.len(), cfg.predictions.display())?;
    Ok(())
}

fn gradcheck(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let mut results = run_suite(cfg.seed)?;
    results.push(zero_input_check()?);
    let mut failed = 0;
    for r in &results {
        let ok = if r.name == "zero input" {
            r.max_rel_error.is_finite()
        } else {
            r.passes()
        };
        failed += usize::from(!ok);
        writeln!(
            out,
            "{:<52} {:>10.3e}  {}",
            r.name,
            r.max_rel_error,
            if ok { "ok" } else { "FAIL" }
        )?;
    }
    if failed > 0 {
        bail!("{failed} gradient checks exceed {:e}", ocean::gradsuite::TOLERANCE);
    }
    Ok(())
}

fn print_catalog(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let specs = catalog();
    if cfg.format == "json" {
        let v: Vec<_> = specs.iter().map(ModelSpec::to_json).collect();
        writeln!(out, "{}", serde_json::to_string_pretty(&v)?)?;
    } else {
        for s in &specs {
            write!(out, "{s}")?;
        }
    }
    Ok(())
}
