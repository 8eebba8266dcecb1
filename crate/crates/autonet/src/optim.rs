//! First-order optimizers. Both consume the accumulated gradients and clear
//! them after updating.

use crate::{Error, ParamStore, Real, Result};

pub trait Optimizer<T: Real> {
    fn step(&mut self, store: &mut ParamStore<T>) -> Result<()>;
}

fn check_lr(lr: f64) -> Result<()> {
    if lr > 0.0 && lr.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidLearningRate(lr))
    }
}

/// `θ ← θ − η·g`.
pub fn sgd_step<T: Real>(store: &mut ParamStore<T>, lr: f64) -> Result<()> {
    check_lr(lr)?;
    let lr = T::of(lr);
    for p in store.iter_mut() {
        for (v, g) in p.value.data_mut().iter_mut().zip(p.grad.data_mut()) {
            *v -= lr * *g;
            *g = T::zero();
        }
    }
    Ok(())
}

/// `acc ← acc + g²; θ ← θ − η·g / (√acc + ε)`, elementwise.
pub fn adagrad_step<T: Real>(store: &mut ParamStore<T>, lr: f64, eps: f64) -> Result<()> {
    check_lr(lr)?;
    let (lr, eps) = (T::of(lr), T::of(eps));
    for p in store.iter_mut() {
        let value = p.value.data_mut();
        let grad = p.grad.data_mut();
        let accum = p.accum.data_mut();
        for ((v, g), a) in value.iter_mut().zip(grad.iter_mut()).zip(accum.iter_mut()) {
            if *g == T::zero() {
                continue;
            }
            *a += *g * *g;
            *v -= lr * *g / (a.sqrt() + eps);
            *g = T::zero();
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug)]
pub struct Sgd {
    lr: f64,
}

impl Sgd {
    pub fn new(lr: f64) -> Result<Self> {
        check_lr(lr)?;
        Ok(Self { lr })
    }
}

impl<T: Real> Optimizer<T> for Sgd {
    fn step(&mut self, store: &mut ParamStore<T>) -> Result<()> {
        sgd_step(store, self.lr)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Adagrad {
    lr: f64,
    eps: f64,
}

impl Adagrad {
    pub const DEFAULT_EPSILON: f64 = 1e-8;

    pub fn new(lr: f64) -> Result<Self> {
        Self::with_epsilon(lr, Self::DEFAULT_EPSILON)
    }

    pub fn with_epsilon(lr: f64, eps: f64) -> Result<Self> {
        check_lr(lr)?;
        Ok(Self { lr, eps })
    }

    pub fn learning_rate(&self) -> f64 {
        self.lr
    }
}

impl<T: Real> Optimizer<T> for Adagrad {
    fn step(&mut self, store: &mut ParamStore<T>) -> Result<()> {
        adagrad_step(store, self.lr, self.eps)
    }
}
