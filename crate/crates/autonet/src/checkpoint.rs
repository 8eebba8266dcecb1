//! Two-file checkpoint: a line-oriented text manifest and a flat array of
//! little-endian `f32` values.
//!
//! Manifest lines (in this order):
//!
//! ```text
//! autonet-checkpoint v1
//! data=<file name of the value array>
//! input_shape=<d1>,<d2>,...
//! layer.<i>=<LayerSpec text, e.g. "conv2d kh=3 kw=3 filters=100 stride=2 padding=same">
//! param.<j>=<name> shape=<d1>,<d2>,... offset=<index of first value>
//! bn.<k>=momentum=<m> epsilon=<e> offset=<index of running_mean>
//! meta.<key>=<value>
//! values=<total number of f32 values>
//! ```
//!
//! The value array holds every parameter in `param.<j>` order followed, for
//! each batch-norm layer, by its running mean and then its running variance.
//! Adagrad accumulators are not saved.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::rngs::StdRng;
use rand::SeedableRng;

use crate::layer::LayerSpec;
use crate::{Error, Network, Real, Result};

const MAGIC: &str = "autonet-checkpoint v1";

pub fn manifest_path(prefix: &Path) -> PathBuf {
    with_suffix(prefix, ".manifest")
}

pub fn data_path(prefix: &Path) -> PathBuf {
    with_suffix(prefix, ".bin")
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn join<D: ToString>(v: &[D]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

/// Renders the manifest text and the raw value bytes without touching disk.
pub fn encode<T: Real>(net: &Network<T>, data_name: &str, meta: &BTreeMap<String, String>) -> Result<(String, Vec<u8>)> {
    let mut lines = vec![
        MAGIC.to_string(),
        format!("data={data_name}"),
        format!("input_shape={}", join(net.input_shape())),
    ];
    for (i, spec) in net.specs().iter().enumerate() {
        lines.push(format!("layer.{i}={spec}"));
    }
    let mut values: Vec<f32> = Vec::new();
    for (j, p) in net.store().iter().enumerate() {
        lines.push(format!("param.{j}={} shape={} offset={}", p.name, join(p.value.shape()), values.len()));
        values.extend(p.value.data().iter().map(|v| v.to_f64_lossy() as f32));
    }
    for (k, st) in net.batchnorm_states().enumerate() {
        lines.push(format!(
            "bn.{k}=momentum={} epsilon={} offset={}",
            st.momentum,
            st.epsilon,
            values.len()
        ));
        values.extend(st.running_mean.iter().map(|v| v.to_f64_lossy() as f32));
        values.extend(st.running_var.iter().map(|v| v.to_f64_lossy() as f32));
    }
    for (k, v) in meta {
        if k.contains(['=', '\n']) || v.contains('\n') {
            return Err(Error::Checkpoint(format!("meta entry {k:?} is not representable")));
        }
        lines.push(format!("meta.{k}={v}"));
    }
    lines.push(format!("values={}", values.len()));
    let mut text = lines.join("\n");
    text.push('\n');
    let bytes = values.iter().flat_map(|v| v.to_le_bytes()).collect();
    Ok((text, bytes))
}

/// Writes `<prefix>.manifest` and `<prefix>.bin`.
pub fn save<T: Real>(net: &Network<T>, prefix: &Path, meta: &BTreeMap<String, String>) -> Result<()> {
    let data = data_path(prefix);
    let name = data
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| Error::Checkpoint(format!("bad checkpoint path {}", prefix.display())))?;
    let (text, bytes) = encode(net, name, meta)?;
    if let Some(dir) = prefix.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(manifest_path(prefix), text)?;
    fs::write(data, bytes)?;
    Ok(())
}

/// Loads a checkpoint written by [`save`]; returns the network and its
/// `meta.*` entries.
pub fn load(prefix: &Path) -> Result<(Network<f32>, BTreeMap<String, String>)> {
    let text = fs::read_to_string(manifest_path(prefix))?;
    let dir = prefix.parent().unwrap_or_else(|| Path::new(""));
    let mut data_file = None;
    for line in text.lines() {
        if let Some(name) = line.strip_prefix("data=") {
            data_file = Some(dir.join(name));
        }
    }
    let data_file = data_file.ok_or_else(|| Error::Checkpoint("manifest has no data= line".into()))?;
    let bytes = fs::read(data_file)?;
    decode(&text, &bytes)
}

pub fn decode(text: &str, bytes: &[u8]) -> Result<(Network<f32>, BTreeMap<String, String>)> {
    let bad = |m: String| Error::Checkpoint(m);
    let mut lines = text.lines();
    if lines.next() != Some(MAGIC) {
        return Err(bad("missing magic line".into()));
    }
    let mut input_shape = None;
    let mut specs = Vec::new();
    let mut params = Vec::new();
    let mut bns = Vec::new();
    let mut meta = BTreeMap::new();
    let mut total = None;
    for line in lines {
        let (key, value) = line.split_once('=').ok_or_else(|| bad(format!("bad line {line:?}")))?;
        if key == "input_shape" {
            input_shape = Some(parse_dims(value).ok_or_else(|| bad(format!("bad shape {value:?}")))?);
        } else if key.starts_with("layer.") {
            specs.push(value.parse::<LayerSpec>()?);
        } else if key.starts_with("param.") {
            params.push(value.to_string());
        } else if key.starts_with("bn.") {
            bns.push(value.to_string());
        } else if let Some(k) = key.strip_prefix("meta.") {
            meta.insert(k.to_string(), value.to_string());
        } else if key == "values" {
            total = value.parse::<usize>().ok();
        }
    }
    let input_shape = input_shape.ok_or_else(|| bad("missing input_shape".into()))?;
    let total = total.ok_or_else(|| bad("missing values count".into()))?;
    if bytes.len() != total * 4 {
        return Err(bad(format!("expected {} bytes of values, found {}", total * 4, bytes.len())));
    }
    let values: Vec<f32> = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();

    let mut net = Network::<f32>::new(&input_shape, &specs, &mut StdRng::seed_from_u64(0))?;
    if net.store().len() != params.len() {
        return Err(bad(format!(
            "manifest lists {} parameters, layers need {}",
            params.len(),
            net.store().len()
        )));
    }
    let field = |s: &str, k: &str| -> Option<String> {
        s.split_whitespace()
            .find_map(|p| p.strip_prefix(k).and_then(|r| r.strip_prefix('=')).map(str::to_string))
    };
    for (p, line) in net.store_mut().iter_mut().zip(&params) {
        let shape = field(line, "shape").and_then(|s| parse_dims(&s));
        let offset = field(line, "offset").and_then(|s| s.parse::<usize>().ok());
        let (Some(shape), Some(offset)) = (shape, offset) else {
            return Err(bad(format!("bad param line {line:?}")));
        };
        if shape != p.value.shape() || offset + p.value.len() > values.len() {
            return Err(bad(format!("parameter {} does not match its layer", p.name)));
        }
        let n = p.value.len();
        p.value.data_mut().copy_from_slice(&values[offset..offset + n]);
    }
    let states: Vec<_> = net.batchnorm_states_mut().collect();
    if states.len() != bns.len() {
        return Err(bad("batch-norm state count mismatch".into()));
    }
    for (st, line) in states.into_iter().zip(&bns) {
        let num = |k: &str| field(line, k).and_then(|s| s.parse::<f64>().ok());
        let (Some(m), Some(e), Some(off)) = (num("momentum"), num("epsilon"), num("offset")) else {
            return Err(bad(format!("bad bn line {line:?}")));
        };
        let off = off as usize;
        let c = st.features();
        if off + 2 * c > values.len() {
            return Err(bad("batch-norm state out of range".into()));
        }
        st.momentum = m as f32;
        st.epsilon = e as f32;
        st.running_mean.copy_from_slice(&values[off..off + c]);
        st.running_var.copy_from_slice(&values[off + c..off + 2 * c]);
    }
    Ok((net, meta))
}

fn parse_dims(s: &str) -> Option<Vec<usize>> {
    s.split(',').map(|d| d.parse().ok()).collect()
}
