//! Fully-connected layer: `y[b,o] = Σ_i x[b,i]·W[i,o] + bias[o]`.

use crate::linalg::{gemm, Mat};
use crate::{Error, Real, Result, Tensor};

pub struct DenseGrads<T> {
    pub input: Tensor<T>,
    pub weight: Tensor<T>,
    pub bias: Tensor<T>,
}

fn dims<T: Real>(x: &Tensor<T>, w: &Tensor<T>) -> Result<(usize, usize, usize)> {
    if x.shape().len() != 2 || w.shape().len() != 2 || x.shape()[1] != w.shape()[0] {
        return Err(Error::ShapeMismatch {
            op: "dense",
            expected: vec![x.shape()[0], w.shape()[0]],
            got: x.shape().to_vec(),
        });
    }
    Ok((x.shape()[0], w.shape()[0], w.shape()[1]))
}

/// Inputs with fewer nonzeros than this share take the sparse path.
const SPARSE_SHARE: f64 = 0.2;

fn is_sparse<T: Real>(x: &[T]) -> bool {
    let nz = x.iter().filter(|v| **v != T::zero()).count();
    (nz as f64) < SPARSE_SHARE * x.len() as f64
}

pub fn dense_forward<T: Real>(x: &Tensor<T>, w: &Tensor<T>, bias: &Tensor<T>) -> Result<Tensor<T>> {
    let (batch, inputs, outputs) = dims(x, w)?;
    bias.expect_shape("dense bias", &[outputs])?;
    let mut y = Tensor::zeros(&[batch, outputs]);
    for out in y.data_mut().chunks_exact_mut(outputs) {
        out.copy_from_slice(bias.data());
    }
    let wd = w.data();
    if !is_sparse(x.data()) {
        gemm(Mat::new(x.data(), batch, inputs), Mat::new(wd, inputs, outputs), T::one(), y.data_mut());
        return Ok(y);
    }
    for (row, out) in x.data().chunks(inputs).zip(y.data_mut().chunks_mut(outputs)) {
        for (i, &xv) in row.iter().enumerate() {
            if xv == T::zero() {
                continue;
            }
            let wrow = &wd[i * outputs..(i + 1) * outputs];
            for (o, &wv) in out.iter_mut().zip(wrow) {
                *o += xv * wv;
            }
        }
    }
    Ok(y)
}

pub fn dense_backward<T: Real>(x: &Tensor<T>, w: &Tensor<T>, grad: &Tensor<T>) -> Result<DenseGrads<T>> {
    let (batch, inputs, outputs) = dims(x, w)?;
    grad.expect_shape("dense_backward", &[batch, outputs])?;
    let mut gx = Tensor::zeros(&[batch, inputs]);
    let mut gw = Tensor::zeros(&[inputs, outputs]);
    let mut gb = Tensor::zeros(&[outputs]);
    let g = Mat::new(grad.data(), batch, outputs);
    gemm(g, Mat::new(w.data(), inputs, outputs).t(), T::zero(), gx.data_mut());
    for row in grad.data().chunks_exact(outputs) {
        for (acc, &gv) in gb.data_mut().iter_mut().zip(row) {
            *acc += gv;
        }
    }
    if !is_sparse(x.data()) {
        gemm(Mat::new(x.data(), batch, inputs).t(), g, T::zero(), gw.data_mut());
    } else {
        for (row, g) in x.data().chunks_exact(inputs).zip(grad.data().chunks_exact(outputs)) {
            for (i, &xv) in row.iter().enumerate() {
                if xv != T::zero() {
                    let gw_row = &mut gw.data_mut()[i * outputs..(i + 1) * outputs];
                    for (acc, &gv) in gw_row.iter_mut().zip(g) {
                        *acc += xv * gv;
                    }
                }
            }
        }
    }
    Ok(DenseGrads {
        input: gx,
        weight: gw,
        bias: gb,
    })
}
