//! Model files: an 8-byte magic, a `u32` format version, a `u32` kind tag and
//! the CBOR-encoded model. A plain-text summary is written next to it.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{Fitted, TrainedModel};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"XFMRMODL";
pub const VERSION: u32 = 1;

fn kind_tag(m: &TrainedModel) -> u32 {
    match m.fitted {
        Fitted::Tree(_) => 1,
        Fitted::Forest(_) => 2,
        Fitted::Boosted(_) => 3,
        Fitted::Knn(_) => 4,
        Fitted::Gnb(_) => 5,
        Fitted::Mlp(_) => 6,
    }
}

pub fn to_bytes(m: &TrainedModel) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&kind_tag(m).to_le_bytes());
    ciborium::into_writer(m, &mut out).map_err(|e| Error::format("model file", e.to_string()))?;
    Ok(out)
}

pub fn from_bytes(bytes: &[u8]) -> Result<TrainedModel> {
    if bytes.len() < 16 || &bytes[..8] != MAGIC {
        return Err(Error::format("model file", "bad magic or truncated header"));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if version != VERSION {
        return Err(Error::format("model file", format!("unsupported version {version}")));
    }
    let tag = u32::from_le_bytes(bytes[12..16].try_into().unwrap());
    let m: TrainedModel = ciborium::from_reader(&bytes[16..]).map_err(|e| Error::format("model file", e.to_string()))?;
    if kind_tag(&m) != tag {
        return Err(Error::format("model file", "kind tag does not match the encoded model"));
    }
    Ok(m)
}

pub fn summary(m: &TrainedModel) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "model: {}", m.spec.label());
    let _ = writeln!(s, "features: {}", m.n_features);
    let _ = writeln!(s, "classes: {}", m.n_classes);
    let _ = writeln!(s, "seed: {}", m.seed);
    match &m.fitted {
        Fitted::Tree(t) => {
            let _ = writeln!(s, "depth: {}\nleaves: {}", t.depth(), t.leaves());
        }
        Fitted::Forest(f) => {
            let _ = writeln!(s, "trees: {}", f.trees.len());
        }
        Fitted::Boosted(b) => {
            let _ = writeln!(s, "rounds: {}", b.rounds.len());
        }
        Fitted::Knn(k) => {
            let _ = writeln!(s, "stored points: {}", k.x.len());
        }
        Fitted::Gnb(_) => {}
        Fitted::Mlp(n) => {
            let sizes: Vec<String> = n.layers.iter().map(|l| l.outputs.to_string()).collect();
            let _ = writeln!(s, "layer sizes: {}", sizes.join(" "));
        }
    }
    if let (Some(first), Some(last)) = (m.loss_curve().first(), m.loss_curve().last()) {
        let _ = writeln!(s, "training loss: {first:.6} -> {last:.6} over {} steps", m.loss_curve().len());
    }
    for f in &m.flags {
        let _ = writeln!(s, "flag: {f}");
    }
    s
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut p = path.as_os_str().to_owned();
    p.push(".txt");
    PathBuf::from(p)
}

pub fn save(m: &TrainedModel, path: &Path) -> Result<()> {
    std::fs::write(path, to_bytes(m)?)?;
    std::fs::write(sidecar_path(path), summary(m))?;
    Ok(())
}

pub fn load(path: &Path) -> Result<TrainedModel> {
    from_bytes(&std::fs::read(path)?)
}
