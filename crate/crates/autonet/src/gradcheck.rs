//! Central finite-difference verification of analytic gradients.
//!
//! The per-element relative error is `|a − n| / max(|a|, |n|, 1e-6)`: the
//! floor keeps entries whose true gradient is zero from dividing rounding
//! noise by nothing.

use crate::layer::Mode;
use crate::{Error, Network, Result, Tensor};

/// Step used for central differences on `f64`.
pub const DEFAULT_STEP: f64 = 1e-4;

const REL_FLOOR: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct BlockError {
    pub name: String,
    pub len: usize,
    pub max_rel_error: f64,
    pub max_abs_error: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct GradReport {
    pub blocks: Vec<BlockError>,
}

impl GradReport {
    pub fn max_rel_error(&self) -> f64 {
        self.blocks.iter().map(|b| b.max_rel_error).fold(0.0, f64::max)
    }

    pub fn passes(&self, tolerance: f64) -> bool {
        self.blocks.iter().all(|b| b.max_rel_error < tolerance)
    }

    pub fn is_finite(&self) -> bool {
        self.blocks
            .iter()
            .all(|b| b.max_rel_error.is_finite() && b.max_abs_error.is_finite())
    }
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_FLOOR)
}

pub fn compare(name: impl Into<String>, analytic: &[f64], numeric: &[f64]) -> BlockError {
    assert_eq!(analytic.len(), numeric.len());
    let mut rel: f64 = 0.0;
    let mut abs: f64 = 0.0;
    for (&a, &n) in analytic.iter().zip(numeric) {
        let r = relative_error(a, n);
        // NaN must surface, not vanish inside max()
        rel = if r.is_nan() { f64::NAN } else if rel.is_nan() { rel } else { rel.max(r) };
        abs = abs.max((a - n).abs());
    }
    BlockError {
        name: name.into(),
        len: analytic.len(),
        max_rel_error: rel,
        max_abs_error: abs,
    }
}

/// Central differences of `f` around `x`, one coordinate at a time.
pub fn numeric_gradient(x: &[f64], h: f64, mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let orig = probe[i];
            probe[i] = orig + h;
            let plus = f(&probe);
            probe[i] = orig - h;
            let minus = f(&probe);
            probe[i] = orig;
            (plus - minus) / (2.0 * h)
        })
        .collect()
}

/// Checks an analytic gradient of a scalar function of a flat vector.
pub fn check_function(
    name: impl Into<String>,
    x: &[f64],
    analytic: &[f64],
    h: f64,
    f: impl FnMut(&[f64]) -> f64,
) -> BlockError {
    compare(name, analytic, &numeric_gradient(x, h, f))
}

/// Compares every parameter gradient and the input gradient of `net` under
/// `loss` against central differences with step `h`.
///
/// `net` is not modified. In train mode batch-norm layers update running
/// statistics on every evaluation, which does not affect train-mode outputs;
/// any other source of run-to-run variation is reported as
/// [`Error::NonDeterministic`].
pub fn gradient_check<L>(net: &Network<f64>, input: &Tensor<f64>, mode: Mode, loss: L, h: f64) -> Result<GradReport>
where
    L: Fn(&Tensor<f64>) -> Result<(f64, Tensor<f64>)>,
{
    let mut work = net.clone();
    work.store_mut().zero_grad();

    let y1 = work.forward(input, mode)?;
    let (l1, grad) = loss(&y1)?;
    let input_grad = work.backward(&grad)?;
    let y2 = work.clone().forward(input, mode)?;
    let l2 = loss(&y2)?.0;
    if y1.data() != y2.data() || l1.to_bits() != l2.to_bits() {
        return Err(Error::NonDeterministic);
    }

    let mut scratch = work.clone();
    let eval = |net: &mut Network<f64>, x: &Tensor<f64>| -> Result<f64> {
        let y = net.forward(x, mode)?;
        Ok(loss(&y)?.0)
    };

    let mut blocks = Vec::new();
    for pi in 0..work.store().len() {
        let param = work.store().iter().nth(pi).unwrap();
        let name = param.name.clone();
        let analytic = param.grad.data().to_vec();
        let mut numeric = Vec::with_capacity(analytic.len());
        for i in 0..analytic.len() {
            let value = &mut scratch.store_mut().iter_mut().nth(pi).unwrap().value;
            let orig = value.data()[i];
            value.data_mut()[i] = orig + h;
            let plus = eval(&mut scratch, input)?;
            scratch.store_mut().iter_mut().nth(pi).unwrap().value.data_mut()[i] = orig - h;
            let minus = eval(&mut scratch, input)?;
            scratch.store_mut().iter_mut().nth(pi).unwrap().value.data_mut()[i] = orig;
            numeric.push((plus - minus) / (2.0 * h));
        }
        blocks.push(compare(name, &analytic, &numeric));
    }

    let mut probe = input.clone();
    let mut numeric = Vec::with_capacity(input.len());
    for i in 0..input.len() {
        let orig = probe.data()[i];
        probe.data_mut()[i] = orig + h;
        let plus = eval(&mut scratch, &probe)?;
        probe.data_mut()[i] = orig - h;
        let minus = eval(&mut scratch, &probe)?;
        probe.data_mut()[i] = orig;
        numeric.push((plus - minus) / (2.0 * h));
    }
    blocks.push(compare("input", input_grad.data(), &numeric));
    Ok(GradReport { blocks })
}
