//! Batch normalization over the last axis.
//!
//! For `[B, F]` inputs every column is a feature; for `[B, H, W, C]` inputs
//! statistics are taken per channel over `B·H·W` values. Train mode uses the
//! batch mean and population variance and folds them into the running
//! statistics; infer mode uses the running statistics only.

use crate::layer::Mode;
use crate::{Error, Real, Result, Tensor};

pub const DEFAULT_MOMENTUM: f64 = 0.9;
pub const DEFAULT_EPSILON: f64 = 1e-5;

#[derive(Clone, Debug, PartialEq)]
pub struct BatchNormState<T> {
    pub running_mean: Vec<T>,
    pub running_var: Vec<T>,
    /// Weight of the old running value in each update, in (0, 1).
    pub momentum: T,
    pub epsilon: T,
}

impl<T: Real> BatchNormState<T> {
    pub fn new(features: usize) -> Self {
        Self {
            running_mean: vec![T::zero(); features],
            running_var: vec![T::one(); features],
            momentum: T::of(DEFAULT_MOMENTUM),
            epsilon: T::of(DEFAULT_EPSILON),
        }
    }

    pub fn features(&self) -> usize {
        self.running_mean.len()
    }

    pub fn cast<U: Real>(&self) -> BatchNormState<U> {
        let conv = |v: &Vec<T>| v.iter().map(|x| U::of(x.to_f64_lossy())).collect();
        BatchNormState {
            running_mean: conv(&self.running_mean),
            running_var: conv(&self.running_var),
            momentum: U::of(self.momentum.to_f64_lossy()),
            epsilon: U::of(self.epsilon.to_f64_lossy()),
        }
    }
}

/// Values saved by the forward pass for the backward pass.
#[derive(Clone, Debug)]
pub struct BatchNormCache<T> {
    pub x_hat: Tensor<T>,
    pub inv_std: Vec<T>,
    pub mode: Mode,
}

pub fn batchnorm_forward<T: Real>(
    x: &Tensor<T>,
    gamma: &Tensor<T>,
    beta: &Tensor<T>,
    state: &mut BatchNormState<T>,
    mode: Mode,
) -> Result<(Tensor<T>, BatchNormCache<T>)> {
    let c = *x.shape().last().expect("tensor has a shape");
    if state.features() != c {
        return Err(Error::ShapeMismatch {
            op: "batchnorm",
            expected: vec![state.features()],
            got: x.shape().to_vec(),
        });
    }
    gamma.expect_shape("batchnorm gamma", &[c])?;
    beta.expect_shape("batchnorm beta", &[c])?;
    let rows = x.len() / c;

    let (mean, var) = match mode {
        Mode::Train => {
            if x.batch() < 2 {
                return Err(Error::BatchTooSmall(x.batch()));
            }
            let n = T::from_usize(rows).unwrap();
            let mut mean = vec![T::zero(); c];
            for row in x.data().chunks(c) {
                for (m, &v) in mean.iter_mut().zip(row) {
                    *m += v;
                }
            }
            mean.iter_mut().for_each(|m| *m /= n);
            let mut var = vec![T::zero(); c];
            for row in x.data().chunks(c) {
                for ((s, &v), &m) in var.iter_mut().zip(row).zip(&mean) {
                    let d = v - m;
                    *s += d * d;
                }
            }
            var.iter_mut().for_each(|s| *s /= n);
            let keep = state.momentum;
            let fresh = T::one() - keep;
            for k in 0..c {
                state.running_mean[k] = keep * state.running_mean[k] + fresh * mean[k];
                state.running_var[k] = keep * state.running_var[k] + fresh * var[k];
            }
            (mean, var)
        }
        Mode::Infer => (state.running_mean.clone(), state.running_var.clone()),
    };

    let inv_std: Vec<T> = var.iter().map(|&v| T::one() / (v + state.epsilon).sqrt()).collect();
    let mut x_hat = Tensor::zeros(x.shape());
    let mut y = Tensor::zeros(x.shape());
    for ((xr, hr), yr) in x
        .data()
        .chunks(c)
        .zip(x_hat.data_mut().chunks_mut(c))
        .zip(y.data_mut().chunks_mut(c))
    {
        for k in 0..c {
            let h = (xr[k] - mean[k]) * inv_std[k];
            hr[k] = h;
            yr[k] = gamma.data()[k] * h + beta.data()[k];
        }
    }
    Ok((y, BatchNormCache { x_hat, inv_std, mode }))
}

pub struct BatchNormGrads<T> {
    pub input: Tensor<T>,
    pub gamma: Tensor<T>,
    pub beta: Tensor<T>,
}

pub fn batchnorm_backward<T: Real>(
    cache: &BatchNormCache<T>,
    gamma: &Tensor<T>,
    grad: &Tensor<T>,
) -> Result<BatchNormGrads<T>> {
    grad.expect_shape("batchnorm_backward", cache.x_hat.shape())?;
    let c = cache.inv_std.len();
    let rows = grad.len() / c;
    let mut sum_g = vec![T::zero(); c];
    let mut sum_gh = vec![T::zero(); c];
    for (gr, hr) in grad.data().chunks(c).zip(cache.x_hat.data().chunks(c)) {
        for k in 0..c {
            sum_g[k] += gr[k];
            sum_gh[k] += gr[k] * hr[k];
        }
    }
    let mut gx = Tensor::zeros(grad.shape());
    let n = T::from_usize(rows).unwrap();
    for ((gr, hr), out) in grad
        .data()
        .chunks(c)
        .zip(cache.x_hat.data().chunks(c))
        .zip(gx.data_mut().chunks_mut(c))
    {
        for k in 0..c {
            let scale = gamma.data()[k] * cache.inv_std[k];
            out[k] = match cache.mode {
                // d/dx of γ(x-μ_B)/σ_B: the batch statistics depend on x too
                Mode::Train => scale / n * (n * gr[k] - sum_g[k] - hr[k] * sum_gh[k]),
                Mode::Infer => scale * gr[k],
            };
        }
    }
    Ok(BatchNormGrads {
        input: gx,
        gamma: Tensor::new(vec![c], sum_gh)?,
        beta: Tensor::new(vec![c], sum_g)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(v: &[f64]) -> Tensor<f64> {
        Tensor::from_f64(&[v.len(), 1], v).unwrap()
    }

    #[test]
    fn normalizes_small_batch() {
        let mut st = BatchNormState::new(1);
        let (y, _) = batchnorm_forward(&col(&[1.0, 2.0, 3.0]), &col(&[1.0]).reshape(&[1]).unwrap(), &Tensor::zeros(&[1]), &mut st, Mode::Train).unwrap();
        let expect = [-1.22474, 0.0, 1.22474];
        for (a, b) in y.data().iter().zip(expect) {
            assert!((a - b).abs() < 1e-4, "{a} vs {b}");
        }
        // running stats moved 10% of the way toward (2, 2/3)
        assert!((st.running_mean[0] - 0.2).abs() < 1e-12);
        assert!((st.running_var[0] - (0.9 + 0.1 * 2.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn scale_and_shift_recover_identity() {
        let x = col(&[0.3, -1.7, 2.2, 5.0]);
        let mean = x.data().iter().sum::<f64>() / 4.0;
        let var = x.data().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 4.0;
        let mut st = BatchNormState::<f64>::new(1);
        let gamma = Tensor::from_f64(&[1], &[(var + st.epsilon).sqrt()]).unwrap();
        let beta = Tensor::from_f64(&[1], &[mean]).unwrap();
        let (y, _) = batchnorm_forward(&x, &gamma, &beta, &mut st, Mode::Train).unwrap();
        for (a, b) in y.data().iter().zip(x.data()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn infer_with_unit_running_stats_is_identity() {
        let x = col(&[0.3, -1.7, 2.2]);
        let mut st = BatchNormState::new(1);
        st.epsilon = 0.0;
        let (y, _) = batchnorm_forward(&x, &Tensor::filled(&[1], 1.0), &Tensor::zeros(&[1]), &mut st, Mode::Infer).unwrap();
        assert_eq!(y.data(), x.data());
        // a single row is fine at inference
        let one = col(&[4.0]);
        assert!(batchnorm_forward(&one, &Tensor::filled(&[1], 1.0), &Tensor::zeros(&[1]), &mut st, Mode::Infer).is_ok());
    }

    #[test]
    fn single_row_train_batch_rejected() {
        let mut st = BatchNormState::new(1);
        let err = batchnorm_forward(&col(&[4.0]), &Tensor::filled(&[1], 1.0), &Tensor::zeros(&[1]), &mut st, Mode::Train);
        assert!(matches!(err, Err(Error::BatchTooSmall(1))));
    }

    #[test]
    fn per_channel_statistics_for_images() {
        // channel 0 constant 3, channel 1 ramps: stats must not mix
        let x = Tensor::<f64>::from_fn(&[2, 2, 2, 2], |i| if i % 2 == 0 { 3.0 } else { i as f64 });
        let mut st = BatchNormState::new(2);
        let (y, _) = batchnorm_forward(&x, &Tensor::filled(&[2], 1.0), &Tensor::zeros(&[2]), &mut st, Mode::Train).unwrap();
        for (i, v) in y.data().iter().enumerate() {
            if i % 2 == 0 {
                assert_eq!(*v, 0.0);
            }
        }
        let ch1: Vec<f64> = y.data().iter().skip(1).step_by(2).copied().collect();
        let m = ch1.iter().sum::<f64>() / ch1.len() as f64;
        let v = ch1.iter().map(|x| (x - m).powi(2)).sum::<f64>() / ch1.len() as f64;
        assert!(m.abs() < 1e-12);
        assert!((v - 1.0).abs() < 1e-4);
    }
}
