//! Max pooling over NHWC tensors. Padded cells never win a window.

use crate::conv::{geometry, Geometry, Padding};
use crate::{Error, Real, Result, Tensor};

pub struct PoolOutput<T> {
    pub output: Tensor<T>,
    /// Flat input index of each output cell's maximum.
    pub argmax: Vec<usize>,
}

pub fn maxpool2d_forward<T: Real>(
    x: &Tensor<T>,
    window: (usize, usize),
    stride: usize,
    padding: Padding,
) -> Result<PoolOutput<T>> {
    let xs = x.shape();
    if xs.len() != 4 {
        return Err(Error::ShapeMismatch {
            op: "maxpool2d",
            expected: vec![0, window.0, window.1, 0],
            got: xs.to_vec(),
        });
    }
    let (batch, c) = (xs[0], xs[3]);
    let Geometry { h, w } = geometry("maxpool2d", (xs[1], xs[2]), window, stride, padding)?;
    let mut out = Tensor::zeros(&[batch, h.output, w.output, c]);
    let mut argmax = vec![0usize; out.len()];
    let xd = x.data();
    let od = out.data_mut();
    for b in 0..batch {
        for oy in 0..h.output {
            for ox in 0..w.output {
                let obase = ((b * h.output + oy) * w.output + ox) * c;
                let best = &mut od[obase..obase + c];
                let at = &mut argmax[obase..obase + c];
                let mut first = true;
                for ky in 0..h.kernel {
                    let Some(iy) = h.source(oy, ky) else { continue };
                    for kx in 0..w.kernel {
                        let Some(ix) = w.source(ox, kx) else { continue };
                        let base = ((b * h.input + iy) * w.input + ix) * c;
                        let src = &xd[base..base + c];
                        if first {
                            best.copy_from_slice(src);
                            for (ch, a) in at.iter_mut().enumerate() {
                                *a = base + ch;
                            }
                            first = false;
                            continue;
                        }
                        // strict comparison keeps the first index on ties
                        for (ch, ((m, a), &v)) in best.iter_mut().zip(at.iter_mut()).zip(src).enumerate() {
                            if v > *m {
                                *m = v;
                                *a = base + ch;
                            }
                        }
                    }
                }
                assert!(!first, "every pooling window overlaps the input");
            }
        }
    }
    Ok(PoolOutput { output: out, argmax })
}

pub fn maxpool2d_backward<T: Real>(input_shape: &[usize], argmax: &[usize], grad: &Tensor<T>) -> Result<Tensor<T>> {
    if grad.len() != argmax.len() {
        return Err(Error::ShapeMismatch {
            op: "maxpool2d_backward",
            expected: vec![argmax.len()],
            got: grad.shape().to_vec(),
        });
    }
    let mut gx = Tensor::zeros(input_shape);
    let gd = gx.data_mut();
    for (&idx, &g) in argmax.iter().zip(grad.data()) {
        gd[idx] += g;
    }
    Ok(gx)
}
