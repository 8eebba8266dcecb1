//! Layer descriptors and their stateful runtime counterparts.

use std::fmt;
use std::str::FromStr;

use crate::activation::{relu, relu_backward, sigmoid, sigmoid_backward};
use crate::batchnorm::{batchnorm_backward, batchnorm_forward, BatchNormCache, BatchNormState};
use crate::conv::{conv2d_backward, conv2d_forward, Padding};
use crate::dense::{dense_backward, dense_forward};
use crate::pool::{maxpool2d_backward, maxpool2d_forward};
use crate::{Error, ParamId, ParamStore, Real, Result, Tensor};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Train,
    Infer,
}

/// Parameter-free description of one layer. A network is a list of these
/// plus an input shape.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LayerSpec {
    Dense {
        units: usize,
    },
    Conv2d {
        kh: usize,
        kw: usize,
        filters: usize,
        stride: usize,
        padding: Padding,
    },
    MaxPool2d {
        kh: usize,
        kw: usize,
        stride: usize,
        padding: Padding,
    },
    BatchNorm,
    Relu,
    Sigmoid,
    Flatten,
}

impl fmt::Display for LayerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            LayerSpec::Dense { units } => write!(f, "dense units={units}"),
            LayerSpec::Conv2d {
                kh,
                kw,
                filters,
                stride,
                padding,
            } => write!(
                f,
                "conv2d kh={kh} kw={kw} filters={filters} stride={stride} padding={}",
                padding.as_str()
            ),
            LayerSpec::MaxPool2d { kh, kw, stride, padding } => {
                write!(f, "maxpool2d kh={kh} kw={kw} stride={stride} padding={}", padding.as_str())
            }
            LayerSpec::BatchNorm => f.write_str("batchnorm"),
            LayerSpec::Relu => f.write_str("relu"),
            LayerSpec::Sigmoid => f.write_str("sigmoid"),
            LayerSpec::Flatten => f.write_str("flatten"),
        }
    }
}

impl FromStr for LayerSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Checkpoint(format!("cannot parse layer {s:?}"));
        let mut parts = s.split_whitespace();
        let kind = parts.next().ok_or_else(bad)?;
        let mut kv = std::collections::HashMap::new();
        for p in parts {
            let (k, v) = p.split_once('=').ok_or_else(bad)?;
            kv.insert(k, v);
        }
        let num = |k: &str| -> Result<usize> { kv.get(k).and_then(|v| v.parse().ok()).ok_or_else(bad) };
        let pad = || -> Result<Padding> { kv.get("padding").and_then(|v| v.parse().ok()).ok_or_else(bad) };
        Ok(match kind {
            "dense" => LayerSpec::Dense { units: num("units")? },
            "conv2d" => LayerSpec::Conv2d {
                kh: num("kh")?,
                kw: num("kw")?,
                filters: num("filters")?,
                stride: num("stride")?,
                padding: pad()?,
            },
            "maxpool2d" => LayerSpec::MaxPool2d {
                kh: num("kh")?,
                kw: num("kw")?,
                stride: num("stride")?,
                padding: pad()?,
            },
            "batchnorm" => LayerSpec::BatchNorm,
            "relu" => LayerSpec::Relu,
            "sigmoid" => LayerSpec::Sigmoid,
            "flatten" => LayerSpec::Flatten,
            _ => return Err(bad()),
        })
    }
}

#[derive(Clone, Debug)]
pub(crate) enum Layer<T> {
    Dense {
        weight: ParamId,
        bias: ParamId,
        input: Option<Tensor<T>>,
    },
    Conv2d {
        kernel: ParamId,
        bias: ParamId,
        stride: usize,
        padding: Padding,
        input: Option<Tensor<T>>,
    },
    MaxPool2d {
        window: (usize, usize),
        stride: usize,
        padding: Padding,
        cache: Option<(Vec<usize>, Vec<usize>)>,
    },
    BatchNorm {
        gamma: ParamId,
        beta: ParamId,
        state: BatchNormState<T>,
        cache: Option<BatchNormCache<T>>,
    },
    Relu {
        input: Option<Tensor<T>>,
    },
    Sigmoid {
        output: Option<Tensor<T>>,
    },
    Flatten {
        shape: Option<Vec<usize>>,
    },
}

fn missing_cache() -> Error {
    Error::NoForwardPass
}

impl<T: Real> Layer<T> {
    pub(crate) fn forward(&mut self, store: &ParamStore<T>, x: Tensor<T>, mode: Mode) -> Result<Tensor<T>> {
        match self {
            Layer::Dense { weight, bias, input } => {
                let y = dense_forward(&x, store.value(*weight), store.value(*bias))?;
                *input = Some(x);
                Ok(y)
            }
            Layer::Conv2d {
                kernel,
                bias,
                stride,
                padding,
                input,
            } => {
                let y = conv2d_forward(&x, store.value(*kernel), Some(store.value(*bias)), *stride, *padding)?;
                *input = Some(x);
                Ok(y)
            }
            Layer::MaxPool2d {
                window,
                stride,
                padding,
                cache,
            } => {
                let out = maxpool2d_forward(&x, *window, *stride, *padding)?;
                *cache = Some((x.shape().to_vec(), out.argmax));
                Ok(out.output)
            }
            Layer::BatchNorm {
                gamma,
                beta,
                state,
                cache,
            } => {
                let (y, c) = batchnorm_forward(&x, store.value(*gamma), store.value(*beta), state, mode)?;
                *cache = Some(c);
                Ok(y)
            }
            Layer::Relu { input } => {
                let y = relu(&x);
                *input = Some(x);
                Ok(y)
            }
            Layer::Sigmoid { output } => {
                let y = sigmoid(&x);
                *output = Some(y.clone());
                Ok(y)
            }
            Layer::Flatten { shape } => {
                let b = x.batch();
                let rest = x.len() / b;
                *shape = Some(x.shape().to_vec());
                x.reshape(&[b, rest])
            }
        }
    }

    pub(crate) fn backward(&mut self, store: &mut ParamStore<T>, grad: Tensor<T>) -> Result<Tensor<T>> {
        match self {
            Layer::Dense { weight, bias, input } => {
                let x = input.as_ref().ok_or_else(missing_cache)?;
                let g = dense_backward(x, store.value(*weight), &grad)?;
                store.get_mut(*weight).grad.add_assign(&g.weight)?;
                store.get_mut(*bias).grad.add_assign(&g.bias)?;
                Ok(g.input)
            }
            Layer::Conv2d {
                kernel,
                bias,
                stride,
                padding,
                input,
            } => {
                let x = input.as_ref().ok_or_else(missing_cache)?;
                let g = conv2d_backward(x, store.value(*kernel), *stride, *padding, &grad)?;
                store.get_mut(*kernel).grad.add_assign(&g.kernel)?;
                store.get_mut(*bias).grad.add_assign(&g.bias)?;
                Ok(g.input)
            }
            Layer::MaxPool2d { cache, .. } => {
                let (shape, argmax) = cache.as_ref().ok_or_else(missing_cache)?;
                maxpool2d_backward(shape, argmax, &grad)
            }
            Layer::BatchNorm { gamma, beta, cache, .. } => {
                let c = cache.as_ref().ok_or_else(missing_cache)?;
                let g = batchnorm_backward(c, store.value(*gamma), &grad)?;
                store.get_mut(*gamma).grad.add_assign(&g.gamma)?;
                store.get_mut(*beta).grad.add_assign(&g.beta)?;
                Ok(g.input)
            }
            Layer::Relu { input } => relu_backward(input.as_ref().ok_or_else(missing_cache)?, &grad),
            Layer::Sigmoid { output } => sigmoid_backward(output.as_ref().ok_or_else(missing_cache)?, &grad),
            Layer::Flatten { shape } => grad.reshape(shape.as_ref().ok_or_else(missing_cache)?),
        }
    }

    pub(crate) fn batchnorm_state(&self) -> Option<&BatchNormState<T>> {
        match self {
            Layer::BatchNorm { state, .. } => Some(state),
            _ => None,
        }
    }

    pub(crate) fn batchnorm_state_mut(&mut self) -> Option<&mut BatchNormState<T>> {
        match self {
            Layer::BatchNorm { state, .. } => Some(state),
            _ => None,
        }
    }

    pub(crate) fn clear_cache(&mut self) {
        match self {
            Layer::Dense { input, .. } | Layer::Conv2d { input, .. } | Layer::Relu { input } => *input = None,
            Layer::MaxPool2d { cache, .. } => *cache = None,
            Layer::BatchNorm { cache, .. } => *cache = None,
            Layer::Sigmoid { output } => *output = None,
            Layer::Flatten { shape } => *shape = None,
        }
    }

    pub(crate) fn cast<U: Real>(&self) -> Layer<U> {
        match self {
            Layer::Dense { weight, bias, .. } => Layer::Dense {
                weight: *weight,
                bias: *bias,
                input: None,
            },
            Layer::Conv2d {
                kernel,
                bias,
                stride,
                padding,
                ..
            } => Layer::Conv2d {
                kernel: *kernel,
                bias: *bias,
                stride: *stride,
                padding: *padding,
                input: None,
            },
            Layer::MaxPool2d {
                window, stride, padding, ..
            } => Layer::MaxPool2d {
                window: *window,
                stride: *stride,
                padding: *padding,
                cache: None,
            },
            Layer::BatchNorm { gamma, beta, state, .. } => Layer::BatchNorm {
                gamma: *gamma,
                beta: *beta,
                state: state.cast(),
                cache: None,
            },
            Layer::Relu { .. } => Layer::Relu { input: None },
            Layer::Sigmoid { .. } => Layer::Sigmoid { output: None },
            Layer::Flatten { .. } => Layer::Flatten { shape: None },
        }
    }
}
