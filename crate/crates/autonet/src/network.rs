//! Sequential network built from a list of [`LayerSpec`]s.

use rand::Rng;

use crate::batchnorm::BatchNormState;
use crate::conv::geometry;
use crate::init::glorot_uniform;
use crate::layer::{Layer, LayerSpec, Mode};
use crate::{Error, ParamStore, Real, Result, Tensor};

#[derive(Clone, Debug)]
pub struct Network<T> {
    input_shape: Vec<usize>,
    output_shape: Vec<usize>,
    specs: Vec<LayerSpec>,
    layers: Vec<Layer<T>>,
    store: ParamStore<T>,
}

impl<T: Real> Network<T> {
    /// Builds and initializes a network for per-sample inputs of
    /// `input_shape` (`[F]` or `[H, W, C]`). Shapes are validated eagerly, so
    /// an impossible kernel fails here rather than at the first batch.
    ///
    /// A `Dense` layer after a spatial layer gets an implicit flatten.
    pub fn new<R: Rng + ?Sized>(input_shape: &[usize], specs: &[LayerSpec], rng: &mut R) -> Result<Self> {
        if input_shape.is_empty() || input_shape.contains(&0) {
            return Err(Error::InvalidShape(input_shape.to_vec()));
        }
        let mut store = ParamStore::new();
        let mut layers = Vec::with_capacity(specs.len());
        let mut cur = input_shape.to_vec();

        for (idx, spec) in specs.iter().enumerate() {
            let name = |p: &str| format!("layer{idx}.{p}");
            match *spec {
                LayerSpec::Dense { units } => {
                    if units == 0 {
                        return Err(Error::ZeroSize("dense"));
                    }
                    if cur.len() != 1 {
                        layers.push(Layer::Flatten { shape: None });
                        cur = vec![cur.iter().product()];
                    }
                    let fan_in = cur[0];
                    let weight = store.add(name("weight"), glorot_uniform(&[fan_in, units], fan_in, units, rng));
                    let bias = store.add(name("bias"), Tensor::zeros(&[units]));
                    layers.push(Layer::Dense {
                        weight,
                        bias,
                        input: None,
                    });
                    cur = vec![units];
                }
                LayerSpec::Conv2d {
                    kh,
                    kw,
                    filters,
                    stride,
                    padding,
                } => {
                    let [h, w, cin] = spatial(&cur, "conv2d")?;
                    if filters == 0 {
                        return Err(Error::ZeroSize("conv2d"));
                    }
                    let geo = geometry("conv2d", (h, w), (kh, kw), stride, padding)?;
                    let kernel = store.add(
                        name("kernel"),
                        glorot_uniform(&[kh, kw, cin, filters], kh * kw * cin, kh * kw * filters, rng),
                    );
                    let bias = store.add(name("bias"), Tensor::zeros(&[filters]));
                    layers.push(Layer::Conv2d {
                        kernel,
                        bias,
                        stride,
                        padding,
                        input: None,
                    });
                    cur = vec![geo.h.output, geo.w.output, filters];
                }
                LayerSpec::MaxPool2d { kh, kw, stride, padding } => {
                    let [h, w, c] = spatial(&cur, "maxpool2d")?;
                    let geo = geometry("maxpool2d", (h, w), (kh, kw), stride, padding)?;
                    layers.push(Layer::MaxPool2d {
                        window: (kh, kw),
                        stride,
                        padding,
                        cache: None,
                    });
                    cur = vec![geo.h.output, geo.w.output, c];
                }
                LayerSpec::BatchNorm => {
                    let c = *cur.last().unwrap();
                    let gamma = store.add(name("gamma"), Tensor::filled(&[c], T::one()));
                    let beta = store.add(name("beta"), Tensor::zeros(&[c]));
                    layers.push(Layer::BatchNorm {
                        gamma,
                        beta,
                        state: BatchNormState::new(c),
                        cache: None,
                    });
                }
                LayerSpec::Relu => layers.push(Layer::Relu { input: None }),
                LayerSpec::Sigmoid => layers.push(Layer::Sigmoid { output: None }),
                LayerSpec::Flatten => {
                    layers.push(Layer::Flatten { shape: None });
                    cur = vec![cur.iter().product()];
                }
            }
        }
        Ok(Self {
            input_shape: input_shape.to_vec(),
            output_shape: cur,
            specs: specs.to_vec(),
            layers,
            store,
        })
    }

    pub fn input_shape(&self) -> &[usize] {
        &self.input_shape
    }

    /// Per-sample output shape.
    pub fn output_shape(&self) -> &[usize] {
        &self.output_shape
    }

    pub fn specs(&self) -> &[LayerSpec] {
        &self.specs
    }

    pub fn store(&self) -> &ParamStore<T> {
        &self.store
    }

    pub fn store_mut(&mut self) -> &mut ParamStore<T> {
        &mut self.store
    }

    pub fn batchnorm_states(&self) -> impl Iterator<Item = &BatchNormState<T>> {
        self.layers.iter().filter_map(Layer::batchnorm_state)
    }

    pub fn batchnorm_states_mut(&mut self) -> impl Iterator<Item = &mut BatchNormState<T>> {
        self.layers.iter_mut().filter_map(Layer::batchnorm_state_mut)
    }

    /// Runs a batch `[B, ..input_shape]` through every layer.
    pub fn forward(&mut self, x: &Tensor<T>, mode: Mode) -> Result<Tensor<T>> {
        if x.shape().len() != self.input_shape.len() + 1 || x.shape()[1..] != self.input_shape[..] {
            let mut expected = vec![x.batch()];
            expected.extend_from_slice(&self.input_shape);
            return Err(Error::ShapeMismatch {
                op: "network input",
                expected,
                got: x.shape().to_vec(),
            });
        }
        let mut cur = x.clone();
        for layer in &mut self.layers {
            cur = layer.forward(&self.store, cur, mode)?;
        }
        Ok(cur)
    }

    /// Backpropagates `grad` (shaped like the last forward output), adds the
    /// parameter gradients into the store and returns the input gradient.
    pub fn backward(&mut self, grad: &Tensor<T>) -> Result<Tensor<T>> {
        let mut cur = grad.clone();
        for layer in self.layers.iter_mut().rev() {
            cur = layer.backward(&mut self.store, cur)?;
        }
        Ok(cur)
    }

    /// Drops the activations cached by the last forward pass.
    pub fn clear_caches(&mut self) {
        self.layers.iter_mut().for_each(Layer::clear_cache);
    }

    pub fn cast<U: Real>(&self) -> Network<U> {
        Network {
            input_shape: self.input_shape.clone(),
            output_shape: self.output_shape.clone(),
            specs: self.specs.clone(),
            layers: self.layers.iter().map(Layer::cast).collect(),
            store: self.store.cast(),
        }
    }
}

fn spatial(cur: &[usize], op: &'static str) -> Result<[usize; 3]> {
    match cur {
        &[h, w, c] => Ok([h, w, c]),
        _ => Err(Error::ShapeMismatch {
            op,
            expected: vec![0, 0, 0],
            got: cur.to_vec(),
        }),
    }
}
