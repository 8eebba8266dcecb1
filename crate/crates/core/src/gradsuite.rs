//! Finite-difference checks of every layer, loss and objective the pipeline
//! trains with, on small seeded instances in `f64`.

use autonet::gradcheck::{check_function, gradient_check, DEFAULT_STEP};
use autonet::loss::{grouped_softmax_ce, mse_loss};
use autonet::{LayerSpec, Mode, Network, Padding, Tensor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::embedding::negative_sampling_loss;
use crate::Result;

pub const TOLERANCE: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub blocks: usize,
    pub max_rel_error: f64,
}

impl CheckResult {
    pub fn passes(&self) -> bool {
        self.max_rel_error < TOLERANCE
    }
}

fn random(rng: &mut ChaCha8Rng, shape: &[usize]) -> Tensor<f64> {
    Tensor::from_fn(shape, |_| rng.random_range(-1.0..1.0))
}

enum Objective {
    Mse,
    GroupedCe,
}

fn check_net(
    name: &str,
    rng: &mut ChaCha8Rng,
    batch: usize,
    input: &[usize],
    specs: &[LayerSpec],
    mode: Mode,
    objective: Objective,
) -> Result<CheckResult> {
    let net = Network::<f64>::new(input, specs, rng)?;
    let mut shape = vec![batch];
    shape.extend_from_slice(input);
    let x = random(rng, &shape);
    let mut out_shape = vec![batch];
    out_shape.extend_from_slice(net.output_shape());
    let report = match objective {
        Objective::Mse => {
            let target = random(rng, &out_shape);
            gradient_check(&net, &x, mode, |y| mse_loss(y, &target), DEFAULT_STEP)?
        }
        Objective::GroupedCe => {
            let groups = out_shape.iter().skip(1).product::<usize>() / 2;
            let labels: Vec<u8> = (0..batch * groups).map(|_| rng.random_range(0..2)).collect();
            gradient_check(&net, &x, mode, |y| grouped_softmax_ce(y, &labels), DEFAULT_STEP)?
        }
    };
    Ok(CheckResult {
        name: name.into(),
        blocks: report.blocks.len(),
        max_rel_error: report.max_rel_error(),
    })
}

fn conv(kh: usize, kw: usize, filters: usize, stride: usize, padding: Padding) -> LayerSpec {
    LayerSpec::Conv2d {
        kh,
        kw,
        filters,
        stride,
        padding,
    }
}

/// Runs every check. Convolutions cover each stride and padding pairing the
/// catalog uses, with square and full-width kernels.
pub fn run_suite(seed: u64) -> Result<Vec<CheckResult>> {
    use Objective::*;
    use Padding::{Same, Valid};
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = &mut rng;
    let mut out = vec![
        check_net("dense", r, 3, &[4], &[LayerSpec::Dense { units: 2 }], Mode::Train, Mse)?,
        check_net(
            "dense+relu",
            r,
            3,
            &[4],
            &[LayerSpec::Dense { units: 6 }, LayerSpec::Relu, LayerSpec::Dense { units: 5 }],
            Mode::Train,
            Mse,
        )?,
        check_net(
            "dense+sigmoid",
            r,
            3,
            &[4],
            &[LayerSpec::Dense { units: 6 }, LayerSpec::Sigmoid, LayerSpec::Dense { units: 5 }],
            Mode::Train,
            Mse,
        )?,
    ];
    for (stride, padding) in [(1, Valid), (1, Same), (2, Same), (2, Valid)] {
        for (kh, kw) in [(3, 3), (2, 7)] {
            out.push(check_net(
                &format!("conv2d {kh}x{kw} stride {stride} {}", padding.as_str()),
                r,
                2,
                &[6, 7, 2],
                &[conv(kh, kw, 3, stride, padding)],
                Mode::Train,
                Mse,
            )?);
        }
    }
    out.push(check_net(
        "maxpool2d 4x4 stride 2 same",
        r,
        1,
        &[7, 6, 2],
        &[LayerSpec::MaxPool2d {
            kh: 4,
            kw: 4,
            stride: 2,
            padding: Same,
        }],
        Mode::Train,
        Mse,
    )?);
    out.push(check_net(
        "maxpool2d 2x2 stride 2 valid",
        r,
        1,
        &[4, 4, 2],
        &[LayerSpec::MaxPool2d {
            kh: 2,
            kw: 2,
            stride: 2,
            padding: Valid,
        }],
        Mode::Train,
        Mse,
    )?);
    for (mode, label) in [(Mode::Train, "train"), (Mode::Infer, "infer")] {
        out.push(check_net(
            &format!("batchnorm dense {label}"),
            r,
            4,
            &[3],
            &[LayerSpec::Dense { units: 4 }, LayerSpec::BatchNorm, LayerSpec::Dense { units: 2 }],
            mode,
            Mse,
        )?);
        out.push(check_net(
            &format!("conv2d same stride 2 + batchnorm + grouped ce {label}"),
            r,
            3,
            &[5, 6, 1],
            &[
                conv(3, 3, 4, 2, Same),
                LayerSpec::BatchNorm,
                LayerSpec::Relu,
                LayerSpec::Dense { units: 10 },
            ],
            mode,
            GroupedCe,
        )?);
    }

    let pred: Vec<f64> = (0..20).map(|_| r.random_range(-1.0..1.0)).collect();
    let target = random(r, &[4, 5]);
    let p = Tensor::new(vec![4, 5], pred.clone())?;
    let (_, g) = mse_loss(&p, &target)?;
    let e = check_function("mse loss", &pred, g.data(), DEFAULT_STEP, |x| {
        mse_loss(&Tensor::new(vec![4, 5], x.to_vec()).unwrap(), &target).unwrap().0
    });
    out.push(CheckResult {
        name: e.name,
        blocks: 1,
        max_rel_error: e.max_rel_error,
    });

    let logits: Vec<f64> = (0..30).map(|_| r.random_range(-2.0..2.0)).collect();
    let labels: Vec<u8> = (0..15).map(|_| r.random_range(0..2)).collect();
    let l = Tensor::new(vec![3, 10], logits.clone())?;
    let (_, g) = grouped_softmax_ce(&l, &labels)?;
    let e = check_function("grouped softmax ce", &logits, g.data(), DEFAULT_STEP, |x| {
        grouped_softmax_ce(&Tensor::new(vec![3, 10], x.to_vec()).unwrap(), &labels).unwrap().0
    });
    out.push(CheckResult {
        name: e.name,
        blocks: 1,
        max_rel_error: e.max_rel_error,
    });

    let d = 3;
    let k = 4;
    let v: Vec<f64> = (0..(k + 2) * d).map(|_| r.random_range(-1.0..1.0)).collect();
    let split = |x: &[f64]| -> f64 {
        let negs: Vec<&[f64]> = x[2 * d..].chunks(d).collect();
        negative_sampling_loss(&x[..d], &x[d..2 * d], &negs).unwrap().0
    };
    let negs: Vec<&[f64]> = v[2 * d..].chunks(d).collect();
    let (_, g) = negative_sampling_loss(&v[..d], &v[d..2 * d], &negs)?;
    let mut analytic = g.target;
    analytic.extend(g.context);
    analytic.extend(g.negatives);
    let e = check_function("negative sampling loss", &v, &analytic, DEFAULT_STEP, split);
    out.push(CheckResult {
        name: e.name,
        blocks: 1,
        max_rel_error: e.max_rel_error,
    });
    Ok(out)
}

/// Relative error of a fragment whose input and parameters are all zero.
pub fn zero_input_check() -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut net = Network::<f64>::new(&[4], &[LayerSpec::Dense { units: 3 }, LayerSpec::Relu], &mut rng)?;
    for p in net.store_mut().iter_mut() {
        p.value.fill(0.0);
    }
    let x = Tensor::zeros(&[2, 4]);
    let target = Tensor::zeros(&[2, 3]);
    let report = gradient_check(&net, &x, Mode::Train, |y| mse_loss(y, &target), DEFAULT_STEP)?;
    Ok(CheckResult {
        name: "zero input".into(),
        blocks: report.blocks.len(),
        max_rel_error: report.max_rel_error(),
    })
}
