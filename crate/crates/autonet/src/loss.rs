//! Training objectives. Each returns the scalar loss together with its
//! gradient with respect to the prediction.

use crate::{Error, Real, Result, Tensor};

/// Mean of squared differences over every entry; gradient `2(pred-target)/n`.
pub fn mse_loss<T: Real>(pred: &Tensor<T>, target: &Tensor<T>) -> Result<(T, Tensor<T>)> {
    target.expect_shape("mse_loss", pred.shape())?;
    let n = T::from_usize(pred.len()).unwrap();
    let two = T::of(2.0);
    let mut grad = Tensor::zeros(pred.shape());
    let mut sum = T::zero();
    for ((g, &p), &t) in grad.data_mut().iter_mut().zip(pred.data()).zip(target.data()) {
        let d = p - t;
        sum += d * d;
        *g = two * d / n;
    }
    Ok((sum / n, grad))
}

fn check_groups<T: Real>(logits: &Tensor<T>, labels: &[u8]) -> Result<(usize, usize)> {
    let s = logits.shape();
    if s.len() != 2 || s[1] % 2 != 0 || labels.len() != s[0] * (s[1] / 2) {
        return Err(Error::ShapeMismatch {
            op: "grouped_softmax_ce",
            expected: vec![labels.len(), 2],
            got: s.to_vec(),
        });
    }
    if let Some(&bad) = labels.iter().find(|&&l| l > 1) {
        return Err(Error::InvalidLabel(bad));
    }
    Ok((s[0], s[1] / 2))
}

/// Two-way softmax over each contiguous pair of logits: `[B, 2G] -> [B, 2G]`.
pub fn group_softmax<T: Real>(logits: &Tensor<T>) -> Tensor<T> {
    let mut probs = logits.clone();
    for pair in probs.data_mut().chunks_mut(2) {
        let m = pair[0].max(pair[1]);
        let e0 = (pair[0] - m).exp();
        let e1 = (pair[1] - m).exp();
        let z = e0 + e1;
        pair[0] = e0 / z;
        pair[1] = e1 / z;
    }
    probs
}

/// Sum over trait groups of the batch-mean negative log-probability of the
/// true class, with one independent 2-way softmax per group.
///
/// `labels` is row-major `[B, G]` with values in {0, 1}; label 0 selects the
/// first logit of its pair.
pub fn grouped_softmax_ce<T: Real>(logits: &Tensor<T>, labels: &[u8]) -> Result<(T, Tensor<T>)> {
    let (batch, groups) = check_groups(logits, labels)?;
    let n = T::from_usize(batch).unwrap();
    let probs = group_softmax(logits);
    let mut grad = probs.clone();
    let mut loss = T::zero();
    for (i, (pair, &label)) in logits.data().chunks(2).zip(labels).enumerate() {
        let m = pair[0].max(pair[1]);
        let lse = m + ((pair[0] - m).exp() + (pair[1] - m).exp()).ln();
        loss += lse - pair[label as usize];
        grad.data_mut()[2 * i + label as usize] -= T::one();
    }
    for g in grad.data_mut() {
        *g /= n;
    }
    debug_assert_eq!(grad.len(), batch * groups * 2);
    Ok((loss / n, grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn mse_anchors() {
        let p = Tensor::<f64>::from_f64(&[1, 2], &[1.0, 1.0]).unwrap();
        let t = Tensor::zeros(&[1, 2]);
        let (l, g) = mse_loss(&p, &t).unwrap();
        assert_eq!(l, 1.0);
        assert_eq!(g.data(), &[1.0, 1.0]);
        assert_eq!(mse_loss(&p, &p).unwrap().0, 0.0);
        assert!(mse_loss(&p, &Tensor::zeros(&[2, 1])).is_err());
    }

    #[test]
    fn uniform_logits_cost_five_ln2() {
        let logits = Tensor::<f64>::zeros(&[3, 10]);
        let (l, _) = grouped_softmax_ce(&logits, &[0, 1, 0, 1, 1, 1, 0, 0, 1, 0, 1, 1, 0, 0, 0]).unwrap();
        assert!((l - 5.0 * std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn saturated_group_costs_nothing() {
        let logits = Tensor::<f64>::from_f64(&[1, 2], &[20.0, -20.0]).unwrap();
        let (l, _) = grouped_softmax_ce(&logits, &[0]).unwrap();
        assert!(l < 1e-15);
    }

    #[test]
    fn rejects_non_binary_label() {
        let logits = Tensor::<f64>::zeros(&[1, 2]);
        assert!(matches!(grouped_softmax_ce(&logits, &[2]), Err(Error::InvalidLabel(2))));
    }

    proptest! {
        #[test]
        fn group_probabilities_normalize(v in proptest::collection::vec(-30.0f64..30.0, 10)) {
            let logits = Tensor::<f64>::from_f64(&[1, 10], &v).unwrap();
            let p = group_softmax(&logits);
            for pair in p.data().chunks(2) {
                prop_assert!(pair[0] > 0.0 && pair[1] > 0.0);
                prop_assert!((pair[0] + pair[1] - 1.0).abs() < 1e-6);
            }
        }

        #[test]
        fn loss_is_shift_invariant_per_group(
            v in proptest::collection::vec(-10.0f64..10.0, 10),
            shift in -50.0f64..50.0,
            group in 0usize..5,
        ) {
            let labels = [1, 0, 1, 1, 0];
            let logits = Tensor::<f64>::from_f64(&[1, 10], &v).unwrap();
            let mut shifted = logits.clone();
            shifted.data_mut()[2 * group] += shift;
            shifted.data_mut()[2 * group + 1] += shift;
            let a = grouped_softmax_ce(&logits, &labels).unwrap().0;
            let b = grouped_softmax_ce(&shifted, &labels).unwrap().0;
            prop_assert!(a >= 0.0);
            prop_assert!((a - b).abs() < 1e-9);
        }
    }
}
