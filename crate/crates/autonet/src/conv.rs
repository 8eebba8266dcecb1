//! 2-D convolution over NHWC tensors with TensorFlow-style `same`/`valid`
//! padding.
//!
//! Input `[B, H, W, Cin]`, kernel `[kh, kw, Cin, Cout]`, output
//! `[B, OH, OW, Cout]`. Patches are unrolled (im2col) and multiplied with
//! the kernel as one matrix product per work unit. Work units are batch
//! chunks sized from the layer shape alone, and kernel gradients are reduced
//! in unit order, so results do not depend on the thread count.

use rayon::prelude::*;

use crate::linalg::{gemm, Mat};
use crate::{Error, Real, Result, Tensor};

/// Upper bound on unrolled-patch entries held by one work unit.
const COLS_BUDGET: usize = 1 << 21;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Padding {
    /// Zero-filled borders; output length `ceil(n / stride)`.
    Same,
    /// No padding; output length `floor((n - k) / stride) + 1`.
    Valid,
}

impl Padding {
    pub fn as_str(self) -> &'static str {
        match self {
            Padding::Same => "same",
            Padding::Valid => "valid",
        }
    }
}

impl std::str::FromStr for Padding {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "same" => Ok(Padding::Same),
            "valid" => Ok(Padding::Valid),
            other => Err(format!("unknown padding {other:?}")),
        }
    }
}

/// Sliding-window layout along one spatial axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Axis {
    pub input: usize,
    pub kernel: usize,
    pub stride: usize,
    pub output: usize,
    pub pad_before: usize,
}

impl Axis {
    /// Input coordinate for output position `o` and kernel tap `k`, or
    /// `None` when it falls in the padding.
    #[inline]
    pub fn source(&self, o: usize, k: usize) -> Option<usize> {
        let pos = o * self.stride + k;
        if pos < self.pad_before {
            return None;
        }
        let pos = pos - self.pad_before;
        (pos < self.input).then_some(pos)
    }
}

/// Output length and leading pad for one axis, or `None` when a valid
/// window does not fit.
pub fn output_len(input: usize, kernel: usize, stride: usize, padding: Padding) -> Option<(usize, usize)> {
    assert!(stride >= 1 && kernel >= 1);
    match padding {
        Padding::Valid => (kernel <= input).then(|| ((input - kernel) / stride + 1, 0)),
        Padding::Same => {
            let out = input.div_ceil(stride);
            let total = ((out - 1) * stride + kernel).saturating_sub(input);
            Some((out, total / 2))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Geometry {
    pub h: Axis,
    pub w: Axis,
}

pub fn geometry(
    op: &'static str,
    input: (usize, usize),
    kernel: (usize, usize),
    stride: usize,
    padding: Padding,
) -> Result<Geometry> {
    if stride == 0 || kernel.0 == 0 || kernel.1 == 0 {
        return Err(Error::ZeroSize(op));
    }
    let too_large = || Error::KernelTooLarge { op, kernel, input };
    let (oh, ph) = output_len(input.0, kernel.0, stride, padding).ok_or_else(too_large)?;
    let (ow, pw) = output_len(input.1, kernel.1, stride, padding).ok_or_else(too_large)?;
    Ok(Geometry {
        h: Axis {
            input: input.0,
            kernel: kernel.0,
            stride,
            output: oh,
            pad_before: ph,
        },
        w: Axis {
            input: input.1,
            kernel: kernel.1,
            stride,
            output: ow,
            pad_before: pw,
        },
    })
}

struct Dims {
    batch: usize,
    cin: usize,
    cout: usize,
    geo: Geometry,
}

fn dims<T: Real>(x: &Tensor<T>, kernel: &Tensor<T>, stride: usize, padding: Padding) -> Result<Dims> {
    let xs = x.shape();
    let ks = kernel.shape();
    if xs.len() != 4 || ks.len() != 4 || xs[3] != ks[2] {
        return Err(Error::ShapeMismatch {
            op: "conv2d",
            expected: vec![ks.first().copied().unwrap_or(0), ks.get(1).copied().unwrap_or(0), ks.get(2).copied().unwrap_or(0)],
            got: xs.to_vec(),
        });
    }
    let geo = geometry("conv2d", (xs[1], xs[2]), (ks[0], ks[1]), stride, padding)?;
    Ok(Dims {
        batch: xs[0],
        cin: xs[3],
        cout: ks[3],
        geo,
    })
}

impl Dims {
    fn patch(&self) -> usize {
        self.geo.h.kernel * self.geo.w.kernel * self.cin
    }

    fn positions(&self) -> usize {
        self.geo.h.output * self.geo.w.output
    }

    /// Samples per work unit; depends only on the layer shape.
    fn per_unit(&self) -> usize {
        (COLS_BUDGET / (self.patch() * self.positions()).max(1)).max(1)
    }
}

/// Unrolls one sample into `positions × patch` rows, patch order
/// `(ky, kx, ci)` to match the kernel layout.
fn im2col<T: Real>(xs: &[T], d: &Dims, cols: &mut [T]) {
    let Geometry { h, w } = d.geo;
    let row_len = w.kernel * d.cin;
    let mut rows = cols.chunks_exact_mut(d.patch());
    for oy in 0..h.output {
        for ox in 0..w.output {
            let row = rows.next().unwrap();
            for (ky, seg) in row.chunks_exact_mut(row_len).enumerate() {
                let Some(iy) = h.source(oy, ky) else {
                    seg.fill(T::zero());
                    continue;
                };
                for (kx, dst) in seg.chunks_exact_mut(d.cin).enumerate() {
                    match w.source(ox, kx) {
                        Some(ix) => dst.copy_from_slice(&xs[(iy * w.input + ix) * d.cin..][..d.cin]),
                        None => dst.fill(T::zero()),
                    }
                }
            }
        }
    }
}

/// Adjoint of [`im2col`]: scatter-adds patch rows back onto the input.
fn col2im<T: Real>(cols: &[T], d: &Dims, gxs: &mut [T]) {
    let Geometry { h, w } = d.geo;
    let row_len = w.kernel * d.cin;
    let mut rows = cols.chunks_exact(d.patch());
    for oy in 0..h.output {
        for ox in 0..w.output {
            let row = rows.next().unwrap();
            for (ky, seg) in row.chunks_exact(row_len).enumerate() {
                let Some(iy) = h.source(oy, ky) else { continue };
                for (kx, src) in seg.chunks_exact(d.cin).enumerate() {
                    let Some(ix) = w.source(ox, kx) else { continue };
                    for (acc, &v) in gxs[(iy * w.input + ix) * d.cin..][..d.cin].iter_mut().zip(src) {
                        *acc += v;
                    }
                }
            }
        }
    }
}

fn unroll<T: Real>(x: &[T], first: usize, n: usize, in_len: usize, d: &Dims) -> Vec<T> {
    let block = d.positions() * d.patch();
    let mut cols = vec![T::zero(); n * block];
    for (s, c) in cols.chunks_exact_mut(block).enumerate() {
        im2col(&x[(first + s) * in_len..][..in_len], d, c);
    }
    cols
}

/// [`unroll`] in column-major order: one run of `n × positions` values per
/// patch entry.
fn unroll_columns<T: Real>(x: &[T], first: usize, n: usize, in_len: usize, d: &Dims) -> Vec<T> {
    let Geometry { h, w } = d.geo;
    let rows = n * d.positions();
    let mut cols = vec![T::zero(); rows * d.patch()];
    let mut runs = cols.chunks_exact_mut(rows);
    for ky in 0..h.kernel {
        for kx in 0..w.kernel {
            let ix: Vec<Option<usize>> = (0..w.output).map(|ox| w.source(ox, kx)).collect();
            for ci in 0..d.cin {
                let dst = runs.next().unwrap();
                let mut r = 0;
                for s in 0..n {
                    let xs = &x[(first + s) * in_len..][..in_len];
                    for oy in 0..h.output {
                        let out = &mut dst[r..r + w.output];
                        r += w.output;
                        let Some(iy) = h.source(oy, ky) else { continue };
                        let row = &xs[iy * w.input * d.cin..][..w.input * d.cin];
                        for (o, src) in out.iter_mut().zip(&ix) {
                            if let Some(ix) = src {
                                *o = row[ix * d.cin + ci];
                            }
                        }
                    }
                }
            }
        }
    }
    cols
}

pub fn conv2d_forward<T: Real>(
    x: &Tensor<T>,
    kernel: &Tensor<T>,
    bias: Option<&Tensor<T>>,
    stride: usize,
    padding: Padding,
) -> Result<Tensor<T>> {
    let d = dims(x, kernel, stride, padding)?;
    if let Some(b) = bias {
        b.expect_shape("conv2d bias", &[d.cout])?;
    }
    let Geometry { h, w } = d.geo;
    let in_len = h.input * w.input * d.cin;
    let out_len = h.output * w.output * d.cout;
    let mut y = Tensor::zeros(&[d.batch, h.output, w.output, d.cout]);
    if d.batch == 0 {
        return Ok(y);
    }
    let per = d.per_unit();
    let kmat = Mat::new(kernel.data(), d.patch(), d.cout);
    let xd = x.data();
    y.data_mut()
        .par_chunks_mut(per * out_len)
        .enumerate()
        .for_each(|(u, out)| {
            let n = out.len() / out_len;
            let cols = unroll_columns(xd, u * per, n, in_len, &d);
            if let Some(b) = bias {
                for o in out.chunks_exact_mut(d.cout) {
                    o.copy_from_slice(b.data());
                }
            }
            gemm(Mat::new(&cols, d.patch(), n * d.positions()).t(), kmat, T::one(), out);
        });
    Ok(y)
}

pub struct ConvGrads<T> {
    pub input: Tensor<T>,
    pub kernel: Tensor<T>,
    pub bias: Tensor<T>,
}

pub fn conv2d_backward<T: Real>(
    x: &Tensor<T>,
    kernel: &Tensor<T>,
    stride: usize,
    padding: Padding,
    grad: &Tensor<T>,
) -> Result<ConvGrads<T>> {
    let d = dims(x, kernel, stride, padding)?;
    let Geometry { h, w } = d.geo;
    grad.expect_shape("conv2d_backward", &[d.batch, h.output, w.output, d.cout])?;
    let in_len = h.input * w.input * d.cin;
    let out_len = h.output * w.output * d.cout;
    let per = d.per_unit();
    let units = d.batch.div_ceil(per);
    let klen = kernel.len();
    let kmat = Mat::new(kernel.data(), d.patch(), d.cout);

    let mut gx = Tensor::zeros(x.shape());
    let mut partials: Vec<Vec<T>> = vec![vec![T::zero(); klen]; units];
    let xd = x.data();
    let gd = grad.data();

    if d.batch > 0 {
        gx.data_mut()
            .par_chunks_mut(per * in_len)
            .zip(partials.par_iter_mut())
            .enumerate()
            .for_each(|(u, (gx_unit, gk))| {
                let n = gx_unit.len() / in_len;
                let rows = n * d.positions();
                let cols = unroll(xd, u * per, n, in_len, &d);
                let g = Mat::new(&gd[u * per * out_len..][..n * out_len], rows, d.cout);
                gemm(Mat::new(&cols, rows, d.patch()).t(), g, T::zero(), gk);
                let mut gcols = cols;
                gemm(g, kmat.t(), T::zero(), &mut gcols);
                let block = d.positions() * d.patch();
                for (c, gxs) in gcols.chunks_exact(block).zip(gx_unit.chunks_exact_mut(in_len)) {
                    col2im(c, &d, gxs);
                }
            });
    }

    let mut gk = Tensor::zeros(kernel.shape());
    for part in &partials {
        for (acc, &v) in gk.data_mut().iter_mut().zip(part) {
            *acc += v;
        }
    }
    let mut gb = Tensor::zeros(&[d.cout]);
    for g in gd.chunks(d.cout) {
        for (acc, &v) in gb.data_mut().iter_mut().zip(g) {
            *acc += v;
        }
    }
    Ok(ConvGrads {
        input: gx,
        kernel: gk,
        bias: gb,
    })
}
