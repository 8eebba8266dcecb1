//! The model catalog, network construction, training and prediction.
//!
//! Every hidden layer of a catalog entry is followed by batch normalization
//! and ReLU, except pooling layers. The output layer is a plain dense layer
//! with 5 units (regression, MSE) or 10 units (classification, one 2-way
//! softmax per trait).

use std::fmt;
use std::time::Instant;

use autonet::loss::{group_softmax, grouped_softmax_ce, mse_loss};
use autonet::{adagrad_step, Adagrad, LayerSpec, Mode, Network, Padding, Tensor};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::embedding::EmbeddingConfig;
use crate::eval::{binary_metrics, rmse_per_trait};
use crate::features::{label_bits, trait_targets, Example, FeatureKind, Featurizer, DEFAULT_MAX_LEN};
use crate::lexicon::{BinaryLabels, TraitVector};
use crate::split::DatasetSplit;
use crate::{Error, Result};

pub const MODEL_COUNT: usize = 16;
const EVAL_CHUNK: usize = 512;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Regression,
    Classification,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputKind {
    /// Model 0 reads no features.
    None,
    Bow,
    Embedding1,
    Embedding2,
    Embedding3,
}

impl InputKind {
    pub fn feature_kind(self) -> Option<FeatureKind> {
        match self {
            InputKind::None => None,
            InputKind::Bow => Some(FeatureKind::Bow),
            _ => Some(FeatureKind::Embedding),
        }
    }

    pub fn embedding(self) -> Option<EmbeddingConfig> {
        match self {
            InputKind::Embedding1 => Some(EmbeddingConfig::embedding1()),
            InputKind::Embedding2 => Some(EmbeddingConfig::embedding2()),
            InputKind::Embedding3 => Some(EmbeddingConfig::embedding3()),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LayerDesc {
    Dense {
        units: usize,
    },
    Conv {
        kh: usize,
        kw: usize,
        filters: usize,
        stride: usize,
        padding: Padding,
    },
    MaxPool {
        kh: usize,
        kw: usize,
        stride: usize,
        padding: Padding,
    },
}

impl fmt::Display for LayerDesc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pad = |p: Padding, s: usize| {
            let mut t = String::new();
            if s != 1 {
                t.push_str(&format!(", stride {s}"));
            }
            if p == Padding::Same {
                t.push_str(", same pad");
            }
            t
        };
        match *self {
            LayerDesc::Dense { units } => write!(f, "{units}"),
            LayerDesc::Conv {
                kh,
                kw,
                filters,
                stride,
                padding,
            } => write!(f, "{kh}x{kw}, {filters}{}", pad(padding, stride)),
            LayerDesc::MaxPool { kh, kw, stride, padding } => write!(f, "{kh}x{kw}{}", pad(padding, stride)),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NamedLayer {
    pub name: String,
    pub desc: LayerDesc,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    pub id: usize,
    pub task: Task,
    pub input_kind: InputKind,
    pub layers: Vec<NamedLayer>,
    pub output_units: usize,
    pub learning_rate: f64,
}

impl ModelSpec {
    /// Expands the catalog description into engine layers.
    pub fn layer_specs(&self) -> Vec<LayerSpec> {
        let mut out = Vec::new();
        for l in &self.layers {
            match l.desc {
                LayerDesc::Dense { units } => out.extend([LayerSpec::Dense { units }, LayerSpec::BatchNorm, LayerSpec::Relu]),
                LayerDesc::Conv {
                    kh,
                    kw,
                    filters,
                    stride,
                    padding,
                } => out.extend([
                    LayerSpec::Conv2d {
                        kh,
                        kw,
                        filters,
                        stride,
                        padding,
                    },
                    LayerSpec::BatchNorm,
                    LayerSpec::Relu,
                ]),
                LayerDesc::MaxPool { kh, kw, stride, padding } => out.push(LayerSpec::MaxPool2d { kh, kw, stride, padding }),
            }
        }
        if self.id != 0 {
            out.push(LayerSpec::Dense {
                units: self.output_units,
            });
        }
        out
    }

    pub fn layer(&self, name: &str) -> Option<&LayerDesc> {
        self.layers.iter().find(|l| l.name == name).map(|l| &l.desc)
    }

    /// Sentence length the catalog geometry needs; Model 4's second
    /// convolution is 18 rows tall.
    pub fn default_max_len(&self) -> usize {
        if self.id == 4 {
            44
        } else {
            DEFAULT_MAX_LEN
        }
    }

    /// Same geometry with every convolution's filter count scaled by
    /// `factor` (at least one filter each).
    pub fn with_filter_scale(&self, factor: f64) -> Self {
        let mut s = self.clone();
        for l in &mut s.layers {
            if let LayerDesc::Conv { filters, .. } = &mut l.desc {
                *filters = ((*filters as f64 * factor).round() as usize).max(1);
            }
        }
        s
    }

    /// Raises every convolution to at least `min` filters.
    pub fn with_min_filters(&self, min: usize) -> Self {
        let mut s = self.clone();
        for l in &mut s.layers {
            if let LayerDesc::Conv { filters, .. } = &mut l.desc {
                *filters = (*filters).max(min);
            }
        }
        s
    }

    pub fn build(&self, input_shape: &[usize], seed: u64) -> Result<Network<f32>> {
        if self.id == 0 {
            return Err(Error::Invalid("model 0 is a constant predictor, not a network".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(Network::new(input_shape, &self.layer_specs(), &mut rng)?)
    }

    pub fn to_json(&self) -> Value {
        let layers: Vec<Value> = self
            .layers
            .iter()
            .map(|l| {
                let mut v = match l.desc {
                    LayerDesc::Dense { units } => json!({"kind": "dense", "units": units}),
                    LayerDesc::Conv {
                        kh,
                        kw,
                        filters,
                        stride,
                        padding,
                    } => json!({"kind": "conv", "kh": kh, "kw": kw, "filters": filters, "stride": stride, "padding": padding.as_str()}),
                    LayerDesc::MaxPool { kh, kw, stride, padding } => {
                        json!({"kind": "maxpool", "kh": kh, "kw": kw, "stride": stride, "padding": padding.as_str()})
                    }
                };
                v["name"] = json!(l.name);
                v
            })
            .collect();
        json!({
            "id": self.id,
            "task": self.task,
            "input": self.input_kind,
            "layers": layers,
            "output_units": self.output_units,
            "learning_rate": self.learning_rate,
        })
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let task = match self.task {
            Task::Regression => "regression",
            Task::Classification => "classification",
        };
        let input = serde_json::to_value(self.input_kind).unwrap();
        writeln!(
            f,
            "Model {} ({task}, input {}, lr {})",
            self.id,
            input.as_str().unwrap(),
            self.learning_rate
        )?;
        if self.id == 0 {
            return writeln!(f, "  constant per-trait training mean");
        }
        for l in &self.layers {
            writeln!(f, "  {:<7}{}", l.name, l.desc)?;
        }
        writeln!(f, "  {:<7}{}", "fcout", self.output_units)
    }
}

fn dense(name: &str, units: usize) -> NamedLayer {
    NamedLayer {
        name: name.into(),
        desc: LayerDesc::Dense { units },
    }
}

fn conv(name: &str, kh: usize, kw: usize, filters: usize, stride: usize, padding: Padding) -> NamedLayer {
    NamedLayer {
        name: name.into(),
        desc: LayerDesc::Conv {
            kh,
            kw,
            filters,
            stride,
            padding,
        },
    }
}

fn mpool(stride: usize) -> NamedLayer {
    NamedLayer {
        name: "mpool1".into(),
        desc: LayerDesc::MaxPool {
            kh: 4,
            kw: 4,
            stride,
            padding: Padding::Same,
        },
    }
}

fn spec(id: usize, task: Task, input_kind: InputKind, layers: Vec<NamedLayer>, learning_rate: f64) -> ModelSpec {
    let output_units = match task {
        Task::Regression => 5,
        Task::Classification => 10,
    };
    ModelSpec {
        id,
        task,
        input_kind,
        layers,
        output_units,
        learning_rate,
    }
}

/// All sixteen models, indexed by id.
pub fn catalog() -> Vec<ModelSpec> {
    use InputKind::*;
    use Padding::{Same, Valid};
    use Task::*;
    vec![
        spec(0, Regression, None, vec![], 0.0),
        spec(1, Regression, Bow, vec![dense("fc1", 300), dense("fc2", 200)], 0.001),
        spec(2, Regression, Bow, vec![dense("fc1", 300), dense("fc2", 200), dense("fc3", 100)], 0.001),
        spec(3, Regression, Bow, vec![dense("fc1", 100), dense("fc2", 50), dense("fc3", 20)], 0.001),
        spec(
            4,
            Regression,
            Embedding1,
            vec![conv("conv1", 10, 5, 10, 1, Valid), mpool(2), conv("conv2", 18, 18, 10, 1, Valid)],
            0.001,
        ),
        spec(
            5,
            Regression,
            Embedding1,
            vec![
                conv("conv1", 5, 5, 150, 1, Same),
                mpool(2),
                conv("conv2", 5, 20, 100, 1, Same),
                conv("conv3", 1, 20, 50, 1, Valid),
            ],
            0.0001,
        ),
        spec(
            6,
            Regression,
            Embedding1,
            vec![
                conv("conv1", 3, 3, 100, 1, Same),
                mpool(2),
                conv("conv2", 3, 20, 75, 1, Same),
                conv("conv3", 1, 20, 50, 1, Valid),
            ],
            0.005,
        ),
        spec(
            7,
            Regression,
            Embedding2,
            vec![
                conv("conv1", 3, 3, 100, 2, Same),
                mpool(2),
                conv("conv2", 3, 63, 75, 2, Same),
                conv("conv3", 1, 32, 50, 2, Valid),
                dense("fc2", 50),
                dense("fc3", 50),
            ],
            0.005,
        ),
        spec(
            8,
            Regression,
            Embedding2,
            vec![dense("fc1", 100), dense("fc2", 50), dense("fc3", 20)],
            0.0001,
        ),
        spec(
            9,
            Regression,
            Embedding3,
            vec![
                conv("conv1", 7, 5, 100, 2, Same),
                mpool(2),
                conv("conv2", 5, 63, 75, 2, Same),
                conv("conv3", 3, 32, 50, 2, Same),
                conv("conv4", 1, 16, 25, 2, Valid),
            ],
            0.0005,
        ),
        spec(
            10,
            Regression,
            Embedding3,
            vec![
                conv("conv1", 3, 3, 100, 2, Same),
                mpool(2),
                conv("conv2", 3, 63, 75, 2, Same),
                conv("conv3", 1, 32, 50, 2, Valid),
            ],
            0.005,
        ),
        spec(
            11,
            Classification,
            Embedding2,
            vec![
                conv("conv1", 3, 3, 100, 2, Same),
                mpool(2),
                conv("conv2", 3, 63, 75, 2, Same),
                conv("conv3", 1, 32, 50, 2, Valid),
            ],
            0.0001,
        ),
        spec(
            12,
            Classification,
            Embedding2,
            vec![
                conv("conv1", 5, 3, 100, 2, Same),
                mpool(2),
                conv("conv2", 3, 63, 75, 2, Same),
                conv("conv3", 1, 32, 50, 2, Same),
                conv("conv4", 1, 16, 25, 2, Valid),
            ],
            0.0005,
        ),
        spec(
            13,
            Classification,
            Embedding2,
            vec![
                conv("conv1", 7, 5, 100, 2, Same),
                mpool(2),
                conv("conv2", 5, 63, 75, 2, Same),
                conv("conv3", 3, 32, 50, 2, Same),
                conv("conv4", 1, 16, 25, 2, Valid),
            ],
            0.0005,
        ),
        spec(
            14,
            Classification,
            Embedding3,
            vec![
                conv("conv1", 7, 5, 100, 2, Same),
                mpool(2),
                conv("conv2", 5, 63, 75, 2, Same),
                conv("conv3", 3, 32, 50, 2, Same),
                conv("conv4", 1, 16, 25, 2, Valid),
            ],
            0.0005,
        ),
        spec(
            15,
            Classification,
            Embedding3,
            vec![
                conv("conv1", 7, 5, 100, 2, Same),
                mpool(2),
                conv("conv2", 5, 63, 75, 2, Same),
                conv("conv3", 3, 32, 50, 2, Same),
                conv("conv4", 3, 16, 25, 2, Same),
                conv("conv5", 1, 8, 16, 2, Valid),
            ],
            0.0005,
        ),
    ]
}

pub fn model_spec(id: usize) -> Result<ModelSpec> {
    catalog()
        .into_iter()
        .nth(id)
        .ok_or_else(|| Error::Invalid(format!("no model {id}; the catalog has ids 0..={}", MODEL_COUNT - 1)))
}

/// Model 0: the per-trait training mean, whatever the input.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanPredictor {
    pub mean: TraitVector,
}

impl MeanPredictor {
    pub fn fit<'a>(labels: impl IntoIterator<Item = &'a TraitVector>) -> Result<Self> {
        TraitVector::mean(labels).map(|mean| Self { mean }).ok_or(Error::EmptyCorpus)
    }

    pub fn predict(&self, n: usize) -> Vec<TraitVector> {
        vec![self.mean; n]
    }
}

pub fn model0_baseline(train: &[Example]) -> Result<MeanPredictor> {
    MeanPredictor::fit(train.iter().map(|e| &e.traits))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub eval_every: usize,
    /// Record wall-clock seconds per epoch. Off by default so histories are
    /// reproducible byte for byte.
    pub timings: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 10,
            batch_size: 128,
            seed: 0,
            eval_every: 1,
            timings: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::Invalid("epochs must be at least 1".into()));
        }
        if self.batch_size < 2 {
            return Err(Error::Invalid("batch_size must be at least 2 for batch normalization".into()));
        }
        if self.eval_every == 0 {
            return Err(Error::Invalid("eval_every must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test_loss: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rmse: Option<[f64; 5]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<[f64; 5]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seconds: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub records: Vec<EpochRecord>,
    /// Mean training loss of every batch, in order.
    #[serde(skip)]
    pub batch_loss: Vec<f64>,
}

impl TrainHistory {
    pub fn to_jsonl(&self) -> String {
        self.records
            .iter()
            .map(|r| serde_json::to_string(r).expect("records serialize") + "\n")
            .collect()
    }

    pub fn last(&self) -> Option<&EpochRecord> {
        self.records.last()
    }
}

fn check_features(spec: &ModelSpec, feat: &Featurizer) -> Result<()> {
    match spec.input_kind.feature_kind() {
        Some(k) if k == feat.kind() => Ok(()),
        Some(k) => Err(Error::FeatureMismatch(format!(
            "model {} expects {k:?} features, got {:?}",
            spec.id,
            feat.kind()
        ))),
        None => Err(Error::Invalid("model 0 takes no features".into())),
    }
}

/// Loss and output gradient of `spec`'s task.
pub fn task_loss(task: Task, out: &Tensor<f32>, batch: &[&Example]) -> Result<(f32, Tensor<f32>)> {
    Ok(match task {
        Task::Regression => mse_loss(out, &trait_targets(batch))?,
        Task::Classification => grouped_softmax_ce(out, &label_bits(batch))?,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum Prediction {
    Traits(Vec<TraitVector>),
    Labels {
        bits: Vec<BinaryLabels>,
        /// Per trait, the probabilities of bit 0 and bit 1.
        probs: Vec<[f64; 10]>,
    },
}

impl Prediction {
    pub fn len(&self) -> usize {
        match self {
            Prediction::Traits(t) => t.len(),
            Prediction::Labels { bits, .. } => bits.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Bit 1 where the second logit of a trait pair is strictly larger.
pub fn argmax_bits(logits: &[f32]) -> BinaryLabels {
    let mut b = [0u8; 5];
    for (bit, pair) in b.iter_mut().zip(logits.chunks(2)) {
        *bit = u8::from(pair[1] > pair[0]);
    }
    BinaryLabels(b)
}

fn decode_output(task: Task, out: &Tensor<f32>) -> Result<Prediction> {
    let w = out.shape().get(1).copied().unwrap_or(0);
    match (task, w) {
        (Task::Regression, 5) => Ok(Prediction::Traits(
            out.data()
                .chunks(5)
                .map(|r| TraitVector([0, 1, 2, 3, 4].map(|i| f64::from(r[i]))))
                .collect(),
        )),
        (Task::Classification, 10) => {
            let probs = group_softmax(out);
            Ok(Prediction::Labels {
                bits: out.data().chunks(10).map(argmax_bits).collect(),
                probs: probs
                    .data()
                    .chunks(10)
                    .map(|r| std::array::from_fn(|i| f64::from(r[i])))
                    .collect(),
            })
        }
        _ => Err(Error::FeatureMismatch(format!("network output {:?} does not fit a {task:?} model", out.shape()))),
    }
}

/// Runs `net` in inference mode over `examples` in fixed-size chunks.
pub fn predict(net: &mut Network<f32>, task: Task, feat: &Featurizer, examples: &[Example]) -> Result<Prediction> {
    if feat.input_shape() != net.input_shape() {
        return Err(Error::FeatureMismatch(format!(
            "features of shape {:?} do not fit a network expecting {:?}",
            feat.input_shape(),
            net.input_shape()
        )));
    }
    let mut acc = match task {
        Task::Regression => Prediction::Traits(Vec::with_capacity(examples.len())),
        Task::Classification => Prediction::Labels {
            bits: Vec::with_capacity(examples.len()),
            probs: Vec::with_capacity(examples.len()),
        },
    };
    for chunk in examples.chunks(EVAL_CHUNK) {
        let refs: Vec<&Example> = chunk.iter().collect();
        let out = net.forward(&feat.examples(&refs), Mode::Infer)?;
        match (&mut acc, decode_output(task, &out)?) {
            (Prediction::Traits(a), Prediction::Traits(b)) => a.extend(b),
            (Prediction::Labels { bits, probs }, Prediction::Labels { bits: b, probs: p }) => {
                bits.extend(b);
                probs.extend(p);
            }
            _ => unreachable!("task fixes the prediction kind"),
        }
    }
    net.clear_caches();
    Ok(acc)
}

struct Evaluation {
    loss: f64,
    rmse: Option<[f64; 5]>,
    accuracy: Option<[f64; 5]>,
}

fn evaluate(net: &mut Network<f32>, task: Task, feat: &Featurizer, examples: &[Example]) -> Result<Evaluation> {
    let mut loss = 0.0;
    let mut outputs = Vec::with_capacity(examples.len() * 10);
    for chunk in examples.chunks(EVAL_CHUNK) {
        let refs: Vec<&Example> = chunk.iter().collect();
        let out = net.forward(&feat.examples(&refs), Mode::Infer)?;
        loss += f64::from(task_loss(task, &out, &refs)?.0) * chunk.len() as f64;
        outputs.extend_from_slice(out.data());
    }
    net.clear_caches();
    let loss = loss / examples.len() as f64;
    let (rmse, accuracy) = match task {
        Task::Regression => {
            let pred: Vec<TraitVector> = outputs
                .chunks(5)
                .map(|r| TraitVector([0, 1, 2, 3, 4].map(|i| f64::from(r[i]))))
                .collect();
            let truth: Vec<TraitVector> = examples.iter().map(|e| e.traits).collect();
            (Some(rmse_per_trait(&pred, &truth)?), None)
        }
        Task::Classification => {
            let pred: Vec<BinaryLabels> = outputs.chunks(10).map(argmax_bits).collect();
            let truth: Vec<BinaryLabels> = examples.iter().map(|e| e.labels).collect();
            let m = binary_metrics(&pred, &truth)?;
            (None, Some(m.map(|t| t.accuracy)))
        }
    };
    Ok(Evaluation { loss, rmse, accuracy })
}

/// Trains a catalog network with Adagrad at the spec's learning rate.
///
/// Each epoch visits a seeded shuffle of the training split in full batches
/// of `min(batch_size, |train|)` and then evaluates on the test split.
pub fn train_model(
    spec: &ModelSpec,
    data: &DatasetSplit<Example>,
    feat: &Featurizer,
    cfg: &TrainConfig,
) -> Result<(Network<f32>, TrainHistory)> {
    check_features(spec, feat)?;
    let net = spec.build(&feat.input_shape(), cfg.seed)?;
    train_network(net, spec.task, spec.learning_rate, data, feat, cfg)
}

/// The training loop behind [`train_model`], for networks built elsewhere.
pub fn train_network(
    mut net: Network<f32>,
    task: Task,
    learning_rate: f64,
    data: &DatasetSplit<Example>,
    feat: &Featurizer,
    cfg: &TrainConfig,
) -> Result<(Network<f32>, TrainHistory)> {
    cfg.validate()?;
    let batch = cfg.batch_size.min(data.train.len());
    if batch < 2 {
        return Err(Error::Invalid(format!(
            "{} training examples; batch normalization needs at least 2",
            data.train.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed_5eed);
    let mut order: Vec<usize> = (0..data.train.len()).collect();
    let mut history = TrainHistory::default();

    for epoch in 1..=cfg.epochs {
        let started = Instant::now();
        order.shuffle(&mut rng);
        let mut sum = 0.0;
        let mut batches = 0usize;
        for idx in order.chunks_exact(batch) {
            let refs: Vec<&Example> = idx.iter().map(|&i| &data.train[i]).collect();
            let out = net.forward(&feat.examples(&refs), Mode::Train)?;
            let (loss, grad) = task_loss(task, &out, &refs)?;
            let loss = f64::from(loss);
            if !loss.is_finite() {
                return Err(Error::Diverged {
                    epoch,
                    batch: batches + 1,
                    loss,
                });
            }
            net.backward(&grad)?;
            adagrad_step(net.store_mut(), learning_rate, Adagrad::DEFAULT_EPSILON)?;
            history.batch_loss.push(loss);
            sum += loss;
            batches += 1;
        }
        net.clear_caches();
        let train_loss = sum / batches as f64;
        let mut rec = EpochRecord {
            epoch,
            train_loss,
            test_loss: None,
            rmse: None,
            accuracy: None,
            seconds: None,
        };
        if !data.test.is_empty() && (epoch % cfg.eval_every == 0 || epoch == cfg.epochs) {
            let ev = evaluate(&mut net, task, feat, &data.test)?;
            rec.test_loss = Some(ev.loss);
            rec.rmse = ev.rmse;
            rec.accuracy = ev.accuracy;
        }
        if cfg.timings {
            rec.seconds = Some(started.elapsed().as_secs_f64());
        }
        log::info!(
            "epoch {epoch}: train loss {train_loss:.5}{}",
            rec.test_loss.map(|l| format!(", test loss {l:.5}")).unwrap_or_default()
        );
        history.records.push(rec);
    }
    Ok((net, history))
}
