//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit when any
//! criterion fails.

use std::collections::BTreeMap;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use anyhow::{ensure, Context, Result};
use autonet::loss::{grouped_softmax_ce, mse_loss};
use autonet::optim::{adagrad_step, sgd_step};
use autonet::{Padding, ParamStore, Tensor};
use ocean::corpus::{label_document, Stopwords};
use ocean::embedding::{train_embedding, EmbeddingConfig};
use ocean::eval::{binary_metrics, rmse_per_trait};
use ocean::features::{encode_split, Example, Featurizer};
use ocean::gradsuite::{run_suite, zero_input_check};
use ocean::lexicon::{binarize, BinaryLabels, Lexicon, TraitVector};
use ocean::models::{catalog, predict, train_model, InputKind, MeanPredictor, ModelSpec, Prediction, Task, TrainConfig};
use ocean::split::{part_sizes, split_sentences};
use ocean::synthetic::{cluster_corpus, planted_trait_corpus};
use ocean::vocab::{build_from_tokens, build_vocabulary, DEFAULT_MAX_SIZE};
use ocean_cli::{run, Command, RunConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Criterion = (&'static str, fn() -> Result<String>);

fn main() {
    let criteria: [Criterion; 10] = [
        ("gradient suite", gradient_suite),
        ("loss anchors", loss_anchors),
        ("optimizer oracles", optimizer_oracles),
        ("baseline identity", baseline_identity),
        ("labeling oracle", labeling_oracle),
        ("embedding learning", embedding_learning),
        ("end-to-end beats baseline", end_to_end),
        ("catalog fidelity", catalog_fidelity),
        ("determinism", determinism),
        ("split law", split_law),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|v| v.parse().ok());
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let n = i + 1;
        if only.is_some_and(|o| o != n) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(anyhow::anyhow!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {n:>2} {name} ({detail}; {secs:.1}s)"),
            Err(e) => {
                failed += 1;
                println!("FAIL {n:>2} {name} ({e:#}; {secs:.1}s)");
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

fn within(start: Instant, limit: Duration, what: &str) -> Result<()> {
    let t = start.elapsed();
    ensure!(t < limit, "{what} took {:.1}s, limit {}s", t.as_secs_f64(), limit.as_secs());
    Ok(())
}

fn gradient_suite() -> Result<String> {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for seed in [0, 1] {
        for c in run_suite(seed)? {
            ensure!(c.passes(), "{} (seed {seed}): relative error {:e}", c.name, c.max_rel_error);
            worst = worst.max(c.max_rel_error);
            count += 1;
        }
    }
    let z = zero_input_check()?;
    ensure!(z.max_rel_error.is_finite(), "zero input gives {}", z.max_rel_error);
    within(start, Duration::from_secs(60), "gradient suite")?;
    Ok(format!("{count} checks, worst {worst:.2e}"))
}

fn loss_anchors() -> Result<String> {
    let logits = Tensor::<f64>::zeros(&[7, 10]);
    let labels: Vec<u8> = (0..35).map(|i| (i * 7 % 3 == 0) as u8).collect();
    let (ce, _) = grouped_softmax_ce(&logits, &labels)?;
    ensure!((ce - 3.46574).abs() <= 1e-5, "uniform-logit CE {ce}");
    ensure!((ce - 5.0 * 2f64.ln()).abs() < 1e-12, "uniform-logit CE {ce} vs 5 ln 2");
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let pred = Tensor::<f64>::from_fn(&[9, 5], |_| rng.random_range(-1.0..1.0));
    let (mse, grad) = mse_loss(&pred, &pred.clone())?;
    ensure!(mse == 0.0 && grad.data().iter().all(|&g| g == 0.0), "MSE of exact predictions {mse}");
    Ok(format!("CE {ce:.6}, MSE {mse}"))
}

fn store_with(values: &[f64]) -> ParamStore<f64> {
    let mut s = ParamStore::new();
    s.add("w", Tensor::from_f64(&[values.len()], values).unwrap());
    s
}

fn set_grad(s: &mut ParamStore<f64>, g: &[f64]) {
    let p = s.iter_mut().next().unwrap();
    p.grad.data_mut().copy_from_slice(g);
}

fn values(s: &ParamStore<f64>) -> Vec<f64> {
    s.iter().next().unwrap().value.data().to_vec()
}

fn optimizer_oracles() -> Result<String> {
    let (lr, eps) = (0.1, 1e-8);
    let theta = [0.5, -1.0, 2.0, 0.0];
    let g = [0.2, -3.0, 1e-3, 0.0];
    let mut s = store_with(&theta);
    set_grad(&mut s, &g);
    adagrad_step(&mut s, lr, eps)?;
    let got = values(&s);
    let expected = [0.5 - 0.1 * 0.2 / (0.2 + 1e-8), -1.0 + 0.1 * 3.0 / (3.0 + 1e-8), 2.0 - 0.1 * 1e-3 / (1e-3 + 1e-8), 0.0];
    for (i, (a, b)) in got.iter().zip(&expected).enumerate() {
        ensure!((a - b).abs() <= 1e-15, "adagrad first step [{i}]: {a} vs {b}");
    }

    let mut s = store_with(&[1.0, -2.0]);
    let mut prev = [f64::INFINITY; 2];
    for step in 0..50 {
        let before = values(&s);
        set_grad(&mut s, &[0.7, -0.05]);
        adagrad_step(&mut s, lr, eps)?;
        let after = values(&s);
        for j in 0..2 {
            let d = (after[j] - before[j]).abs();
            ensure!(d <= prev[j], "update {j} grew at step {step}: {d} > {}", prev[j]);
            prev[j] = d;
        }
    }

    let mut s = store_with(&theta);
    set_grad(&mut s, &g);
    sgd_step(&mut s, 0.25)?;
    for (i, ((v, t), g)) in values(&s).iter().zip(&theta).zip(&g).enumerate() {
        ensure!(*v == t - 0.25 * g, "sgd [{i}]: {v} vs {}", t - 0.25 * g);
    }
    Ok("adagrad first step, monotone updates, sgd exact".into())
}

fn baseline_identity() -> Result<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(1..400);
        let labels: Vec<TraitVector> = (0..n)
            .map(|_| TraitVector(std::array::from_fn(|_| rng.random_range(-1.0..1.0))))
            .collect();
        let m = MeanPredictor::fit(&labels)?;
        let rmse = rmse_per_trait(&m.predict(n), &labels)?;
        for t in 0..5 {
            let xs: Vec<f64> = labels.iter().map(|l| l.0[t]).collect();
            let mean = xs.iter().sum::<f64>() / n as f64;
            let std = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
            let d = (rmse[t] - std).abs();
            ensure!(d < 1e-9, "trait {t}, n = {n}: RMSE {} vs std {std}", rmse[t]);
            worst = worst.max(d);
        }
    }
    Ok(format!("100 label sets, worst gap {worst:.1e}"))
}

const ACTIVE: [f64; 5] = [0.053194, 0.237406, 0.365915, 0.116700, -0.058669];
const ANGRY: [f64; 5] = [-0.004604, -0.038453, 0.020755, -0.294754, 0.590114];
const BORING: [f64; 5] = [-0.069877, -0.099754, -0.478821, -0.236462, 0.118821];

fn mean_of(xs: &[[f64; 5]]) -> [f64; 5] {
    std::array::from_fn(|t| {
        let mut s = 0.0;
        for x in xs {
            s += x[t];
        }
        s / xs.len() as f64
    })
}

fn labeling_oracle() -> Result<String> {
    let lex = Lexicon::from_entries([
        ("active", TraitVector(ACTIVE)),
        ("angry", TraitVector(ANGRY)),
        ("boring", TraitVector(BORING)),
    ])?;
    let (a, g, b) = (ACTIVE, ANGRY, BORING);
    let fixture: [(&str, Option<[f64; 5]>); 20] = [
        ("The staff was active.", Some(a)),
        ("My waiter seemed angry!", Some(g)),
        ("A boring menu", Some(b)),
        ("Great pizza and cold beer.", None),
        ("Active and angry cooks", Some(mean_of(&[a, g]))),
        ("angry, boring, angry", Some(mean_of(&[g, b, g]))),
        ("We left after an hour", None),
        ("ACTIVE kids and a Boring show?", Some(mean_of(&[a, b]))),
        ("active active active", Some(mean_of(&[a, a, a]))),
        ("The place is boring but the owner is active and never angry", Some(mean_of(&[b, a, g]))),
        ("Nothing to report here", None),
        ("boring", Some(b)),
        ("Active, boring and angry people everywhere", Some(mean_of(&[a, b, g]))),
        ("angry angry boring", Some(mean_of(&[g, g, b]))),
        ("The actively managed bar", None),
        ("Angry.", Some(g)),
        ("active boring active boring", Some(mean_of(&[a, b, a, b]))),
        ("Prices were fair", None),
        ("so boring that we got angry and then active", Some(mean_of(&[b, g, a]))),
        ("Five stars", None),
    ];
    let sw = Stopwords::english();
    let mut text = String::new();
    for (s, _) in &fixture {
        text.push_str(s);
        if !s.ends_with(['.', '!', '?']) {
            text.push('.');
        }
        text.push(' ');
    }
    let emitted = label_document(&text, &lex, &sw);
    let expected: Vec<[f64; 5]> = fixture.iter().filter_map(|(_, e)| *e).collect();
    ensure!(emitted.len() == expected.len(), "{} sentences emitted, {} expected", emitted.len(), expected.len());
    for (i, (s, e)) in emitted.iter().zip(&expected).enumerate() {
        ensure!(s.traits.0 == *e, "sentence {i} {:?}: {:?} vs {e:?}", s.tokens, s.traits.0);
        let bits: [u8; 5] = std::array::from_fn(|t| u8::from(e[t] >= 0.0));
        ensure!(binarize(&s.traits)?.0 == bits, "sentence {i}: labels {:?} vs {bits:?}", binarize(&s.traits)?.0);
    }
    ensure!(binarize(&TraitVector([0.0, -0.0, -1e-12, 1e-12, -5.0]))?.0 == [1, 1, 0, 1, 0], "binarize at zero");
    ensure!(binarize(&TraitVector(a))?.0 == [1, 1, 1, 1, 0]);
    ensure!(binarize(&TraitVector(g))?.0 == [0, 0, 1, 0, 1]);
    ensure!(binarize(&TraitVector(b))?.0 == [0, 0, 0, 0, 1]);
    Ok(format!("{} of 20 sentences labeled, {} dropped", emitted.len(), 20 - emitted.len()))
}

fn embedding_learning() -> Result<String> {
    let start = Instant::now();
    let c = cluster_corpus(2000, 4, 6, 3);
    let lex = Lexicon::default();
    let vocab = build_from_tokens(c.sentences.iter().map(Vec::as_slice).collect(), DEFAULT_MAX_SIZE, &lex)?;
    let sentences: Vec<ocean::corpus::LabeledSentence> = c
        .sentences
        .iter()
        .map(|t| ocean::corpus::LabeledSentence {
            tokens: t.clone(),
            adjective_positions: Vec::new(),
            traits: TraitVector::default(),
            labels: BinaryLabels::default(),
        })
        .collect();
    let cfg = EmbeddingConfig {
        dim: 8,
        num_sampled: 5,
        epochs: 20,
        ..EmbeddingConfig::embedding1()
    };
    let wv = train_embedding(&sentences, &vocab, None, &cfg)?.vectors;
    let (mut within_sum, mut within_n, mut cross_sum, mut cross_n) = (0.0, 0, 0.0, 0);
    let all: Vec<(usize, &String)> = c.clusters.iter().enumerate().flat_map(|(k, m)| m.iter().map(move |w| (k, w))).collect();
    for (i, (ka, a)) in all.iter().enumerate() {
        for (kb, b) in &all[i + 1..] {
            let cos = wv.cosine(wv.id(a).unwrap(), wv.id(b).unwrap());
            if ka == kb {
                within_sum += cos;
                within_n += 1;
            } else {
                cross_sum += cos;
                cross_n += 1;
            }
        }
    }
    let (inside, cross) = (within_sum / within_n as f64, cross_sum / cross_n as f64);
    ensure!(inside - cross >= 0.3, "within-cluster cosine {inside:.3} vs cross {cross:.3}");
    for (k, members) in c.clusters.iter().enumerate() {
        for w in members {
            let nn = wv.nearest_neighbors(w, 3)?;
            let hits = nn.iter().filter(|(t, _)| c.clusters[k].contains(t)).count();
            ensure!(hits >= 2, "neighbors of {w}: {nn:?}");
        }
    }
    within(start, Duration::from_secs(300), "embedding learning")?;
    Ok(format!("within {inside:.3}, cross {cross:.3}"))
}

struct Planted {
    data: ocean::split::DatasetSplit<Example>,
    feat: Featurizer,
    baseline: [f64; 5],
}

fn planted_setup() -> Result<Planted> {
    let planted = planted_trait_corpus(5000, 200, 7)?;
    let vocab = build_vocabulary(&planted.sentences, DEFAULT_MAX_SIZE, &planted.lexicon)?;
    let embedding = EmbeddingConfig {
        epochs: 20,
        ..EmbeddingConfig::embedding2()
    };
    let wv = train_embedding(&planted.sentences, &vocab, Some(&planted.lexicon), &embedding)?.vectors;
    let split = split_sentences(&planted.sentences, 0)?;
    let data = encode_split(&split, &vocab);
    let truth: Vec<TraitVector> = data.test.iter().map(|e| e.traits).collect();
    let m = MeanPredictor::fit(data.train.iter().map(|e| &e.traits))?;
    let baseline = rmse_per_trait(&m.predict(truth.len()), &truth)?;
    Ok(Planted {
        data,
        feat: Featurizer::matrix(wv, 32)?,
        baseline,
    })
}

fn train_shaped(id: usize, epochs: usize, p: &Planted) -> Result<Prediction> {
    let spec = ocean::models::model_spec(id)?.with_filter_scale(0.1).with_min_filters(10);
    let cfg = TrainConfig {
        epochs,
        batch_size: 64,
        ..TrainConfig::default()
    };
    let (mut net, _) = train_model(&spec, &p.data, &p.feat, &cfg)?;
    Ok(predict(&mut net, spec.task, &p.feat, &p.data.test)?)
}

fn end_to_end() -> Result<String> {
    let p = planted_setup()?;
    let start = Instant::now();
    let Prediction::Traits(pred) = train_shaped(7, 20, &p)? else {
        anyhow::bail!("model 7 predicts traits");
    };
    let truth: Vec<TraitVector> = p.data.test.iter().map(|e| e.traits).collect();
    let rmse = rmse_per_trait(&pred, &truth)?;
    within(start, Duration::from_secs(600), "model 7")?;
    for t in 0..5 {
        ensure!(rmse[t] < 0.8 * p.baseline[t], "trait {t}: RMSE {:.4} vs baseline {:.4}", rmse[t], p.baseline[t]);
    }
    let start = Instant::now();
    let Prediction::Labels { bits, .. } = train_shaped(13, 30, &p)? else {
        anyhow::bail!("model 13 predicts labels");
    };
    let labels: Vec<BinaryLabels> = p.data.test.iter().map(|e| e.labels).collect();
    let metrics = binary_metrics(&bits, &labels)?;
    within(start, Duration::from_secs(600), "model 13")?;
    for m in &metrics {
        ensure!(m.accuracy >= 0.85, "trait {}: accuracy {:.3}", m.name, m.accuracy);
    }
    let ratio = (0..5).map(|t| rmse[t] / p.baseline[t]).fold(0.0, f64::max);
    let acc = metrics.iter().map(|m| m.accuracy).fold(1.0, f64::min);
    Ok(format!("worst RMSE ratio {ratio:.3}, worst accuracy {acc:.3}"))
}

const CATALOG: &str = include_str!("../../core/tests/data/catalog.txt");

fn pad(p: &Padding) -> &'static str {
    match p {
        Padding::Same => "same",
        Padding::Valid => "valid",
    }
}

fn layer_signature(spec: &ModelSpec) -> String {
    spec.layers
        .iter()
        .map(|l| {
            use ocean::models::LayerDesc::*;
            match &l.desc {
                Dense { units } => format!("{} {units}", l.name),
                Conv {
                    kh,
                    kw,
                    filters,
                    stride,
                    padding,
                } => format!("{} {kh}x{kw},{filters},s{stride},{}", l.name, pad(padding)),
                MaxPool { kh, kw, stride, padding } => format!("{} {kh}x{kw},s{stride},{}", l.name, pad(padding)),
            }
        })
        .collect::<Vec<_>>()
        .join("; ")
}

fn normalize_layers(raw: &str) -> String {
    raw.split(';')
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(|l| {
            let (name, rest) = l.split_once(' ').unwrap_or((l, ""));
            let fields: Vec<&str> = rest.split(',').map(str::trim).collect();
            if fields.len() == 1 {
                return format!("{name} {}", fields[0]);
            }
            let stride = fields.iter().find_map(|x| x.strip_prefix('s')?.parse::<usize>().ok()).unwrap_or(1);
            let padding = if fields.contains(&"same") { "same" } else { "valid" };
            let filters = fields.get(1).filter(|f| f.parse::<usize>().is_ok());
            match filters {
                Some(f) if !name.contains("pool") => format!("{name} {},{f},s{stride},{padding}", fields[0]),
                _ => format!("{name} {},s{stride},{padding}", fields[0]),
            }
        })
        .collect::<Vec<_>>()
        .join("; ")
}

fn catalog_fidelity() -> Result<String> {
    let specs = catalog();
    ensure!(specs.len() == 16, "{} catalog entries", specs.len());
    let mut rows = 0;
    for line in CATALOG.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        let f: Vec<&str> = line.split('|').map(str::trim).collect();
        ensure!(f.len() == 6, "malformed transcription row {line:?}");
        let id: usize = f[0].parse()?;
        let s = specs.get(id).with_context(|| format!("model {id} missing"))?;
        ensure!(s.id == id, "entry {id} holds model {}", s.id);
        let task = match s.task {
            Task::Regression => "regression",
            Task::Classification => "classification",
        };
        ensure!(task == f[1], "model {id}: task {task} vs {}", f[1]);
        let input = serde_json::to_value(s.input_kind)?;
        ensure!(input.as_str() == Some(f[2]), "model {id}: input {input} vs {}", f[2]);
        ensure!(s.learning_rate == f[3].parse::<f64>()?, "model {id}: lr {} vs {}", s.learning_rate, f[3]);
        ensure!(s.output_units == f[4].parse::<usize>()?, "model {id}: output {} vs {}", s.output_units, f[4]);
        let (got, want) = (layer_signature(s), normalize_layers(f[5]));
        ensure!(got == want, "model {id}: layers\n  {got}\nvs\n  {want}");
        if id > 0 {
            ensure!([0.001, 0.0001, 0.005, 0.0005].contains(&s.learning_rate), "model {id}: lr {}", s.learning_rate);
            let want = if id >= 11 { 10 } else { 5 };
            ensure!(s.output_units == want, "model {id}: output width {}", s.output_units);
        }
        rows += 1;
    }
    ensure!(rows == 16, "{rows} transcription rows");
    let presets = [
        (InputKind::Embedding1, EmbeddingConfig::embedding1(), (40, 20)),
        (InputKind::Embedding2, EmbeddingConfig::embedding2(), (250, 50)),
        (InputKind::Embedding3, EmbeddingConfig::embedding3(), (250, 50)),
    ];
    for (kind, cfg, (d, k)) in presets {
        ensure!((cfg.dim, cfg.num_sampled) == (d, k), "{kind:?}: ({}, {})", cfg.dim, cfg.num_sampled);
        ensure!(kind.embedding() == Some(cfg.clone()), "{kind:?} preset mismatch");
    }
    Ok("16 entries and 3 embedding presets".into())
}

fn write_fixture(dir: &Path) -> Result<()> {
    let planted = planted_trait_corpus(400, 60, 11)?;
    let mut corpus = String::new();
    for (i, chunk) in planted.sentences.chunks(3).enumerate() {
        let text: Vec<String> = chunk.iter().map(|s| s.tokens.join(" ") + ".").collect();
        corpus.push_str(&serde_json::to_string(&serde_json::json!({ "review_id": format!("r{i}"), "text": text.join(" ") }))?);
        corpus.push('\n');
    }
    corpus.push_str("{\"broken\n");
    fs::write(dir.join("corpus.jsonl"), corpus)?;
    fs::write(dir.join("lexicon.tsv"), planted.lexicon.to_tsv())?;
    fs::write(dir.join("new.txt"), "w001 adj04c1 adj04 w002. nothing known here!\n")?;
    Ok(())
}

fn pipeline(dir: &Path) -> Result<BTreeMap<String, Vec<u8>>> {
    write_fixture(dir)?;
    let base = RunConfig {
        corpus: Some(dir.join("corpus.jsonl")),
        lexicon: Some(dir.join("lexicon.tsv")),
        labeled: dir.join("work/labeled.jsonl"),
        vocab: dir.join("work/vocab.txt"),
        embedding: dir.join("work/embedding.txt"),
        report_dir: dir.join("work/reports"),
        predictions: dir.join("work/predictions.jsonl"),
        input: Some(dir.join("new.txt")),
        corpus_format: "jsonl".into(),
        embedding_dim: Some(250),
        num_sampled: Some(5),
        epochs: 2,
        batch_size: 32,
        seed: 5,
        ..RunConfig::default()
    };
    let mut sink = Vec::new();
    run(Command::Prep, &base, &mut sink)?;
    run(Command::Vocab, &base, &mut sink)?;
    run(Command::Embed, &base, &mut sink)?;
    for (model, scale) in [(0, 1.0), (1, 1.0), (7, 0.1)] {
        let cfg = RunConfig {
            model,
            filter_scale: scale,
            checkpoint: dir.join(format!("work/model{model}")),
            predictions: dir.join(format!("work/predictions{model}.jsonl")),
            corpus_format: "plain".into(),
            ..base.clone()
        };
        run(Command::Train, &cfg, &mut sink)?;
        run(Command::Eval, &cfg, &mut sink)?;
        run(Command::Predict, &cfg, &mut sink)?;
    }
    let mut files = BTreeMap::new();
    collect(&dir.join("work"), &dir.join("work"), &mut files)?;
    Ok(files)
}

fn collect(root: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) -> Result<()> {
    for entry in fs::read_dir(dir)? {
        let p = entry?.path();
        if p.is_dir() {
            collect(root, &p, out)?;
        } else {
            out.insert(p.strip_prefix(root)?.display().to_string(), fs::read(&p)?);
        }
    }
    Ok(())
}

fn determinism() -> Result<String> {
    let (a, b) = (tempfile::tempdir()?, tempfile::tempdir()?);
    let fa = pipeline(a.path())?;
    let fb = pipeline(b.path())?;
    ensure!(fa.keys().eq(fb.keys()), "artifact sets differ: {:?} vs {:?}", fa.keys(), fb.keys());
    ensure!(fa.len() >= 15, "only {} artifacts: {:?}", fa.len(), fa.keys());
    for (name, bytes) in &fa {
        let other = &fb[name];
        ensure!(
            ocean::provenance::sha256_hex(bytes) == ocean::provenance::sha256_hex(other),
            "{name} differs between runs"
        );
    }
    Ok(format!("{} artifacts byte-identical", fa.len()))
}

fn split_law() -> Result<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut sizes: Vec<usize> = vec![10, 11, 19, 20, 99, 100, 1000, 10_000];
    sizes.extend((0..40).map(|_| rng.random_range(10..=10_000)));
    let mut strata = 0;
    for &n in &sizes {
        let skew: [f64; 5] = std::array::from_fn(|_| rng.random_range(0.1..0.9));
        let sentences: Vec<ocean::corpus::LabeledSentence> = (0..n)
            .map(|i| {
                let traits = TraitVector(std::array::from_fn(|t| {
                    if rng.random_bool(skew[t]) {
                        rng.random_range(0.0..1.0)
                    } else {
                        -rng.random_range(0.01..1.0)
                    }
                }));
                ocean::corpus::LabeledSentence {
                    tokens: vec![format!("t{i}")],
                    adjective_positions: Vec::new(),
                    traits,
                    labels: binarize(&traits).unwrap(),
                }
            })
            .collect();
        let split = split_sentences(&sentences, rng.random())?;
        let mut seen = vec![0u8; n];
        for (_, part) in split.parts() {
            for s in part {
                let i: usize = s.tokens[0][1..].parse()?;
                seen[i] += 1;
            }
        }
        ensure!(seen.iter().all(|&c| c == 1), "n = {n}: split is not a partition");
        let want = part_sizes(n);
        let got = [split.train.len(), split.validation.len(), split.test.len()];
        for k in 0..3 {
            let ideal = n as f64 * [0.7, 0.1, 0.2][k];
            ensure!((got[k] as f64 - ideal).abs() <= 1.0, "n = {n}: part {k} has {} items, ideal {ideal}", got[k]);
            ensure!(got[k] == want[k], "n = {n}: part {k} has {} items, expected {}", got[k], want[k]);
        }
        for t in 0..5 {
            let total = sentences.iter().filter(|s| s.labels.0[t] == 1).count() as f64 / n as f64;
            for (name, part) in split.parts() {
                if part.len() < 20 {
                    continue;
                }
                let share = part.iter().filter(|s| s.labels.0[t] == 1).count() as f64 / part.len() as f64;
                ensure!(
                    (share - total).abs() <= 0.05,
                    "n = {n}, trait {t}, {name}: positive share {share:.3} vs {total:.3}"
                );
                strata += 1;
            }
        }
    }
    Ok(format!("{} corpus sizes, {strata} stratified parts", sizes.len()))
}
