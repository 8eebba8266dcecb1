use std::collections::BTreeMap;

use autonet::gradcheck::gradient_check;
use autonet::loss::{grouped_softmax_ce, mse_loss};
use autonet::{checkpoint, Adagrad, LayerSpec, Mode, Network, Optimizer, Padding, Tensor};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn specs() -> Vec<LayerSpec> {
    vec![
        LayerSpec::Conv2d {
            kh: 3,
            kw: 4,
            filters: 4,
            stride: 2,
            padding: Padding::Same,
        },
        LayerSpec::BatchNorm,
        LayerSpec::Relu,
        LayerSpec::MaxPool2d {
            kh: 2,
            kw: 2,
            stride: 2,
            padding: Padding::Same,
        },
        LayerSpec::Dense { units: 6 },
        LayerSpec::BatchNorm,
        LayerSpec::Relu,
        LayerSpec::Dense { units: 4 },
    ]
}

/// Inputs whose class is decided by the sign of one cell.
fn toy_batch(n: usize) -> (Tensor<f32>, Vec<u8>) {
    let x = Tensor::from_fn(&[n, 6, 8, 1], |i| (((i * 7919) % 23) as f32 / 11.0) - 1.0);
    let labels = (0..n)
        .flat_map(|s| {
            let v = x.data()[s * 48 + 9];
            let u = x.data()[s * 48 + 30];
            [u8::from(v >= 0.0), u8::from(u >= 0.0)]
        })
        .collect();
    (x, labels)
}

fn train(seed: u64, steps: usize) -> (Network<f32>, Vec<f32>) {
    let mut net = Network::new(&[6, 8, 1], &specs(), &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
    let mut opt = Adagrad::new(0.1).unwrap();
    let (x, labels) = toy_batch(32);
    let mut losses = Vec::new();
    for _ in 0..steps {
        net.store_mut().zero_grad();
        let y = net.forward(&x, Mode::Train).unwrap();
        let (loss, grad) = grouped_softmax_ce(&y, &labels).unwrap();
        net.backward(&grad).unwrap();
        opt.step(net.store_mut()).unwrap();
        losses.push(loss);
    }
    (net, losses)
}

#[test]
fn adagrad_fits_a_small_batch() {
    let (_, losses) = train(1, 150);
    assert!(losses.iter().all(|l| l.is_finite()));
    assert!(losses[149] < 0.25 * losses[0], "{} -> {}", losses[0], losses[149]);
}

#[test]
fn training_is_reproducible() {
    let (a, la) = train(4, 20);
    let (b, lb) = train(4, 20);
    assert_eq!(la, lb);
    let (x, _) = toy_batch(8);
    let ya = a.clone().forward(&x, Mode::Infer).unwrap();
    let yb = b.clone().forward(&x, Mode::Infer).unwrap();
    assert_eq!(ya.data(), yb.data());
}

#[test]
fn checkpoint_restores_trained_network() {
    let (net, _) = train(2, 30);
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("toy");
    let meta = BTreeMap::from([("task".to_string(), "toy".to_string())]);
    checkpoint::save(&net, &prefix, &meta).unwrap();
    let (loaded, got) = checkpoint::load(&prefix).unwrap();
    assert_eq!(got, meta);
    assert_eq!(loaded.specs(), net.specs());
    let (x, _) = toy_batch(8);
    let before = net.clone().forward(&x, Mode::Infer).unwrap();
    let after = loaded.clone().forward(&x, Mode::Infer).unwrap();
    assert_eq!(before.data(), after.data());
}

#[test]
fn whole_network_gradients_match_differences() {
    let net: Network<f64> = Network::new(&[6, 8, 1], &specs(), &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
    let x = toy_batch(3).0.cast::<f64>();
    let target = Tensor::from_fn(&[3, 4], |i| (i % 5) as f64 / 4.0 - 0.5);
    for mode in [Mode::Train, Mode::Infer] {
        let report = gradient_check(&net, &x, mode, |y| mse_loss(y, &target), 1e-5).unwrap();
        assert!(report.passes(1e-4), "{mode:?}: {}", report.max_rel_error());
    }
}
