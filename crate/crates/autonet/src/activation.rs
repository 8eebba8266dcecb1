//! Elementwise activations.

use crate::{Real, Result, Tensor};

pub fn relu<T: Real>(x: &Tensor<T>) -> Tensor<T> {
    x.map(|v| if v > T::zero() { v } else { T::zero() })
}

/// Passes `grad` where the forward input was strictly positive. The
/// subgradient at exactly 0 is 0.
pub fn relu_backward<T: Real>(x: &Tensor<T>, grad: &Tensor<T>) -> Result<Tensor<T>> {
    grad.expect_shape("relu_backward", x.shape())?;
    let mut out = grad.clone();
    for (g, &v) in out.data_mut().iter_mut().zip(x.data()) {
        if v <= T::zero() {
            *g = T::zero();
        }
    }
    Ok(out)
}

/// Logistic function evaluated without overflowing `exp` for large |x|.
#[inline]
pub fn sigmoid_scalar<T: Real>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

/// `ln σ(x)`, stable for both tails.
#[inline]
pub fn log_sigmoid<T: Real>(x: T) -> T {
    // ln σ(x) = -softplus(-x) = -(max(-x, 0) + ln(1 + e^{-|x|}))
    let neg = -x;
    -(neg.max(T::zero()) + (-x.abs()).exp().ln_1p())
}

pub fn sigmoid<T: Real>(x: &Tensor<T>) -> Tensor<T> {
    x.map(sigmoid_scalar)
}

/// Backward pass written in terms of the forward *output* `y = σ(x)`.
pub fn sigmoid_backward<T: Real>(y: &Tensor<T>, grad: &Tensor<T>) -> Result<Tensor<T>> {
    grad.expect_shape("sigmoid_backward", y.shape())?;
    let mut out = grad.clone();
    for (g, &s) in out.data_mut().iter_mut().zip(y.data()) {
        *g *= s * (T::one() - s);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn t(v: &[f64]) -> Tensor<f64> {
        Tensor::from_f64(&[v.len()], v).unwrap()
    }

    #[test]
    fn relu_zeroes_non_positive() {
        assert_eq!(relu(&t(&[-1.0, 0.0, 2.0])).data(), &[0.0, 0.0, 2.0]);
        let pos = t(&[0.5, 3.0, 7.0]);
        assert_eq!(relu(&pos), pos);
    }

    #[test]
    fn relu_backward_masks() {
        let g = relu_backward(&t(&[-1.0, 2.0]), &t(&[5.0, 5.0])).unwrap();
        assert_eq!(g.data(), &[0.0, 5.0]);
        let at_zero = relu_backward(&t(&[0.0]), &t(&[1.0])).unwrap();
        assert_eq!(at_zero.data(), &[0.0]);
    }

    #[test]
    fn sigmoid_anchors() {
        assert_eq!(sigmoid_scalar(0.0f64), 0.5);
        assert!((sigmoid_scalar(40.0f64) - 1.0).abs() < 1e-12);
        assert!(sigmoid_scalar(-800.0f64) >= 0.0);
        assert!(sigmoid_scalar(800.0f64).is_finite());
        let y = sigmoid(&t(&[0.0]));
        let d = sigmoid_backward(&y, &t(&[1.0])).unwrap();
        assert_eq!(d.data()[0], 0.25);
    }

    #[test]
    fn log_sigmoid_matches_naive_in_safe_range() {
        for &x in &[-5.0f64, -0.3, 0.0, 0.7, 6.0] {
            let naive = (1.0 / (1.0 + (-x).exp())).ln();
            assert!((log_sigmoid(x) - naive).abs() < 1e-12);
        }
        assert!(log_sigmoid(-1000.0f64).is_finite());
    }

    proptest! {
        #[test]
        fn activations_are_monotone(a in -50.0f64..50.0, b in -50.0f64..50.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let r = relu(&t(&[lo, hi]));
            prop_assert!(r.data()[0] <= r.data()[1]);
            prop_assert!(sigmoid_scalar(lo) <= sigmoid_scalar(hi));
        }
    }
}
